//! The pre-limit fork-join system.
//!
//! Every arriving job brings one size `B_j` and one interarrival time `T_j`
//! shared by all `N` servers, and a fresh factor `A_{i,j}` per server. Server
//! `i` follows Lindley's recursion `W_i <- max(0, W_i + A_{i,j} B_j - T_j)`.
//! Paths are reported as `max_i W_i / c_N` at job index `floor(t c_N)`.

use serde::{Deserialize, Serialize};

use crate::distributions::{
    BoundedLaw, InterarrivalKind, InterarrivalLaw, Law, RegVarLaw, WeibullLaw,
};
use crate::error::{ensure_positive, Error, Result};
use crate::exec::Exec;
use crate::rng::Stream;
use crate::scaling::{scaling_for, ScalingConstants};
use crate::stats::{EmpiricalDistribution, KsReport};
use crate::trajectory::{ProcessKind, TimeGrid, TrajectoryBatch};

/// Default cap on server-job updates per invocation (2^33).
pub const DEFAULT_BUDGET: u64 = 1 << 33;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub weibull: WeibullLaw,
    pub regvar: RegVarLaw,
    pub interarrival: InterarrivalLaw,
    /// `E[T] - E[A] E[B]`, strictly positive.
    pub mu: f64,
    pub n_servers: u64,
}

impl ModelParams {
    /// Takes the interarrival law as given and derives the drift from it.
    pub fn new(
        weibull: WeibullLaw,
        regvar: RegVarLaw,
        interarrival: InterarrivalLaw,
        n_servers: u64,
    ) -> Result<Self> {
        if n_servers == 0 {
            return Err(Error::invalid("need at least one server"));
        }
        let load = weibull.mean()? * regvar.mean()?;
        let mu = interarrival.mean()? - load;
        if mu.is_nan() || mu <= 0.0 {
            return Err(Error::invalid(format!(
                "unstable model: E[T] = {} does not exceed E[A]E[B] = {load}",
                interarrival.mean_value()
            )));
        }
        Ok(ModelParams {
            weibull,
            regvar,
            interarrival,
            mu,
            n_servers,
        })
    }

    /// Chooses the interarrival mean `E[A]E[B] + mu` for the given family.
    pub fn with_drift(
        weibull: WeibullLaw,
        regvar: RegVarLaw,
        kind: InterarrivalKind,
        mu: f64,
        n_servers: u64,
    ) -> Result<Self> {
        ensure_positive("mu", mu)?;
        let mean = weibull.mean()? * regvar.mean()? + mu;
        Self::new(weibull, regvar, InterarrivalLaw::with_mean(kind, mean)?, n_servers)
    }

    pub fn scaling(&self) -> Result<ScalingConstants> {
        scaling_for(self.n_servers.max(2), &self.weibull, &self.regvar).map(|mut s| {
            s.n_servers = self.n_servers;
            s
        })
    }
}

/// Shared knobs for replicated runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimOptions {
    pub replications: usize,
    pub seed: u64,
    pub budget: u64,
    pub exec: Exec,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            replications: 1000,
            seed: 0,
            budget: DEFAULT_BUDGET,
            exec: Exec::default(),
        }
    }
}

impl SimOptions {
    pub fn new(replications: usize, seed: u64) -> Self {
        SimOptions {
            replications,
            seed,
            ..Self::default()
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub(crate) fn check_budget(&self, updates_per_rep: u128) -> Result<()> {
        let requested = updates_per_rep * self.replications as u128;
        if requested > self.budget as u128 {
            return Err(Error::Budget {
                requested,
                budget: self.budget,
            });
        }
        Ok(())
    }
}

/// Current waiting times of the `N` servers.
#[derive(Clone, Debug, PartialEq)]
pub struct ServerState {
    pub waits: Vec<f64>,
}

impl ServerState {
    pub fn empty(n: usize) -> Self {
        ServerState { waits: vec![0.0; n] }
    }

    /// One Lindley step with per-server factors `a`, common size `b` and
    /// interarrival time `t`.
    pub fn step(&mut self, a: &[f64], b: f64, t: f64) -> Result<()> {
        if a.len() != self.waits.len() {
            return Err(Error::invalid(format!(
                "factor array has {} entries for {} servers",
                a.len(),
                self.waits.len()
            )));
        }
        for (w, &ai) in self.waits.iter_mut().zip(a) {
            *w = (*w + ai * b - t).max(0.0);
        }
        Ok(())
    }

    pub fn max_wait(&self) -> f64 {
        self.waits.iter().copied().fold(0.0, f64::max)
    }
}

/// Supplies per-job draws: fills the server factors and returns `(B, T)`.
pub trait JobSource {
    fn next_job(&mut self, a: &mut [f64]) -> (f64, f64);
}

/// Job draws from one replication stream. Per job the order is `B`, `T`,
/// then `A_1..A_N`.
pub struct SampledJobs<'a> {
    params: &'a ModelParams,
    stream: Stream,
}

impl<'a> SampledJobs<'a> {
    pub fn new(params: &'a ModelParams, seed: u64, replication: u64) -> Self {
        SampledJobs {
            params,
            stream: Stream::new(seed, replication),
        }
    }
}

impl JobSource for SampledJobs<'_> {
    #[inline]
    fn next_job(&mut self, a: &mut [f64]) -> (f64, f64) {
        let s = &mut self.stream;
        let b = self
            .params
            .regvar
            .invert_survival(1.0 - s.open01())
            .expect("tail inversion on a monotone tail");
        let t = self.params.interarrival.draw(s);
        let w = &self.params.weibull;
        for ai in a.iter_mut() {
            *ai = w.invert(s.open01());
        }
        (b, t)
    }
}

/// Replays prerecorded draws; `a[j]` holds the `N` factors of job `j`.
pub struct ReplayJobs {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub t: Vec<f64>,
    next: usize,
}

impl ReplayJobs {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, t: Vec<f64>) -> Self {
        ReplayJobs { a, b, t, next: 0 }
    }
}

impl JobSource for ReplayJobs {
    fn next_job(&mut self, a: &mut [f64]) -> (f64, f64) {
        let j = self.next;
        self.next += 1;
        a.copy_from_slice(&self.a[j]);
        (self.b[j], self.t[j])
    }
}

/// Runs Lindley recursions for `n_servers` and returns `max_i W_i` at each of
/// the (sorted) job indices in `record_at`.
pub fn max_wait_path<S: JobSource>(source: &mut S, n_servers: usize, record_at: &[u64]) -> Vec<f64> {
    let mut waits = vec![0.0; n_servers];
    let mut a = vec![0.0; n_servers];
    let mut out = Vec::with_capacity(record_at.len());
    let mut job = 0u64;
    for &target in record_at {
        while job < target {
            let (b, t) = source.next_job(&mut a);
            for (w, &ai) in waits.iter_mut().zip(&a) {
                *w = (*w + ai * b - t).max(0.0);
            }
            job += 1;
        }
        out.push(waits.iter().copied().fold(0.0, f64::max));
    }
    out
}

/// Running sums without reflection; returns `max(0, sup_{k<=n} max_i S_i(k))`
/// at each recorded job index `n`.
pub fn auxiliary_path<S: JobSource>(source: &mut S, n_servers: usize, record_at: &[u64]) -> Vec<f64> {
    let mut sums = vec![0.0; n_servers];
    let mut a = vec![0.0; n_servers];
    let mut out = Vec::with_capacity(record_at.len());
    let mut running = 0.0f64;
    let mut job = 0u64;
    for &target in record_at {
        while job < target {
            let (b, t) = source.next_job(&mut a);
            let mut top = f64::NEG_INFINITY;
            for (s, &ai) in sums.iter_mut().zip(&a) {
                *s += ai * b - t;
                top = top.max(*s);
            }
            running = running.max(top);
            job += 1;
        }
        out.push(running);
    }
    out
}

fn record_indices(grid: &TimeGrid, scaling: &ScalingConstants) -> Result<Vec<u64>> {
    if grid.horizon() * scaling.c_n < 1.0 {
        return Err(Error::invalid(format!(
            "horizon {} covers less than one job (c_N = {})",
            grid.horizon(),
            scaling.c_n
        )));
    }
    Ok(grid.floor_indices(scaling.c_n))
}

fn simulate_paths(
    params: &ModelParams,
    grid: &TimeGrid,
    opts: &SimOptions,
    kind: ProcessKind,
) -> Result<TrajectoryBatch> {
    let scaling = params.scaling()?;
    let record = record_indices(grid, &scaling)?;
    let jobs = *record.last().expect("grid is nonempty");
    opts.check_budget(jobs as u128 * params.n_servers as u128)?;
    let n = params.n_servers as usize;
    let c = scaling.c_n;
    let rows = opts.exec.map(opts.replications, |r| {
        let mut src = SampledJobs::new(params, opts.seed, r as u64);
        let raw = match kind {
            ProcessKind::MaxWait => max_wait_path(&mut src, n, &record),
            _ => auxiliary_path(&mut src, n, &record),
        };
        raw.into_iter().map(|v| v / c).collect()
    });
    Ok(TrajectoryBatch::from_rows(kind, grid, rows, Some(scaling), opts.seed))
}

/// Scaled maximum waiting time `max_i W_i(floor(t c_N)) / c_N` on the grid.
pub fn simulate_max_wait(params: &ModelParams, grid: &TimeGrid, opts: &SimOptions) -> Result<TrajectoryBatch> {
    simulate_paths(params, grid, opts, ProcessKind::MaxWait)
}

/// Scaled auxiliary process `sup_{s<=t} max_i S_i(floor(s c_N)) / c_N`.
pub fn simulate_auxiliary(params: &ModelParams, grid: &TimeGrid, opts: &SimOptions) -> Result<TrajectoryBatch> {
    simulate_paths(params, grid, opts, ProcessKind::Auxiliary)
}

// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyStateRun {
    /// Jobs discarded per chain; `None` means `ceil(10 c_N)`.
    pub warmup_jobs: Option<u64>,
    /// Total recorded samples across chains.
    pub samples: usize,
    /// Jobs between samples; `None` means `ceil(c_N)`.
    pub gap_jobs: Option<u64>,
    /// Independent chains, each with its own stream and warmup.
    pub chains: usize,
    /// Reject warmups shorter than `10 c_N`.
    pub enforce_warmup: bool,
    pub seed: u64,
    pub budget: u64,
    pub exec: Exec,
}

impl Default for SteadyStateRun {
    fn default() -> Self {
        SteadyStateRun {
            warmup_jobs: None,
            samples: 1000,
            gap_jobs: None,
            chains: 1,
            enforce_warmup: true,
            seed: 0,
            budget: DEFAULT_BUDGET,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyStateSample {
    pub distribution: EmpiricalDistribution,
    pub scaling: ScalingConstants,
    pub warmup_jobs: u64,
    pub gap_jobs: u64,
    /// Samples in recording order, chain after chain.
    pub sequence: Vec<f64>,
    /// Number of samples contributed by each chain.
    pub chain_lengths: Vec<usize>,
}

/// Long-run samples of `max_i W_i / c_N` after a warmup.
pub fn simulate_steady_state(params: &ModelParams, run: &SteadyStateRun) -> Result<SteadyStateSample> {
    if run.samples == 0 || run.chains == 0 {
        return Err(Error::invalid("need at least one sample and one chain"));
    }
    if run.chains > run.samples {
        return Err(Error::invalid("more chains than samples"));
    }
    let scaling = params.scaling()?;
    let min_warmup = (10.0 * scaling.c_n).ceil() as u64;
    let warmup = run.warmup_jobs.unwrap_or(min_warmup);
    if run.enforce_warmup && warmup < min_warmup {
        return Err(Error::invalid(format!(
            "warmup of {warmup} jobs is below 10 c_N = {min_warmup}"
        )));
    }
    let gap = run.gap_jobs.unwrap_or(scaling.c_n.ceil() as u64).max(1);
    let per_chain: Vec<usize> = (0..run.chains)
        .map(|k| run.samples / run.chains + usize::from(k < run.samples % run.chains))
        .collect();
    let jobs: u128 = per_chain
        .iter()
        .map(|&s| warmup as u128 + (s as u128 - 1) * gap as u128)
        .sum();
    let requested = jobs * params.n_servers as u128;
    if requested > run.budget as u128 {
        return Err(Error::Budget {
            requested,
            budget: run.budget,
        });
    }

    let n = params.n_servers as usize;
    let c = scaling.c_n;
    let chains = run.exec.map(run.chains, |k| {
        let record: Vec<u64> = (0..per_chain[k] as u64).map(|i| warmup + i * gap).collect();
        let mut src = SampledJobs::new(params, run.seed, k as u64);
        max_wait_path(&mut src, n, &record)
            .into_iter()
            .map(|v| v / c)
            .collect::<Vec<f64>>()
    });
    let sequence: Vec<f64> = chains.into_iter().flatten().collect();
    let distribution = EmpiricalDistribution::from_correlated(sequence.clone())?;
    Ok(SteadyStateSample {
        distribution,
        scaling,
        warmup_jobs: warmup,
        gap_jobs: gap,
        sequence,
        chain_lengths: per_chain,
    })
}

// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteSupportParams {
    pub a: BoundedLaw,
    pub regvar: RegVarLaw,
    pub interarrival: InterarrivalLaw,
    pub n_servers: u64,
}

/// Which functional of the random walks is compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FiniteSupportMode {
    /// `max_i sum_{j<=k} (A_ij B_j - T_j)` against `sum_{j<=k} (b B_j - T_j)`.
    Endpoint,
    /// `max_i sup_{k'<=k} sum_{j<=k'} (...)` against the same with `A = b`;
    /// needs `E[b B - T] < 0`.
    RunningSup,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSupportComparison {
    /// Maximum over the `N` servers.
    pub servers: EmpiricalDistribution,
    /// Single server with `A` pinned at its right endpoint, same `(B, T)`.
    pub endpoint: EmpiricalDistribution,
    pub ks: KsReport,
}

/// Simulates the `N`-server system with a bounded server factor for `k` jobs
/// next to the single-server system with `A = b`, sharing `(B_j, T_j)`.
pub fn simulate_finite_support(
    params: &FiniteSupportParams,
    k: usize,
    mode: FiniteSupportMode,
    opts: &SimOptions,
) -> Result<FiniteSupportComparison> {
    if params.n_servers == 0 {
        return Err(Error::invalid("need at least one server"));
    }
    let b_end = params.a.right_endpoint();
    if mode == FiniteSupportMode::RunningSup {
        let drift = b_end * params.regvar.mean()? - params.interarrival.mean()?;
        if drift >= 0.0 {
            return Err(Error::invalid(format!(
                "E[bB - T] = {drift} must be negative for the running-sup comparison"
            )));
        }
    }
    opts.check_budget(k as u128 * params.n_servers as u128)?;
    let n = params.n_servers as usize;
    let pairs = opts.exec.map(opts.replications, |r| {
        let mut s = Stream::new(opts.seed, r as u64);
        let mut sums = vec![0.0f64; n];
        let mut best = vec![0.0f64; n];
        let mut pinned = 0.0f64;
        let mut pinned_best = 0.0f64;
        for _ in 0..k {
            let b = params
                .regvar
                .invert_survival(1.0 - s.open01())
                .expect("tail inversion on a monotone tail");
            let t = params.interarrival.draw(&mut s);
            for (si, bi) in sums.iter_mut().zip(best.iter_mut()) {
                *si += params.a.draw(&mut s) * b - t;
                *bi = bi.max(*si);
            }
            pinned += b_end * b - t;
            pinned_best = pinned_best.max(pinned);
        }
        match mode {
            FiniteSupportMode::Endpoint => {
                let top = if k == 0 { 0.0 } else { sums.iter().copied().fold(f64::NEG_INFINITY, f64::max) };
                (top, pinned)
            }
            FiniteSupportMode::RunningSup => {
                (best.iter().copied().fold(0.0, f64::max), pinned_best)
            }
        }
    });
    let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let servers = EmpiricalDistribution::new(a)?;
    let endpoint = EmpiricalDistribution::new(b)?;
    let ks = servers.two_sample_ks(&endpoint);
    Ok(FiniteSupportComparison { servers, endpoint, ks })
}
