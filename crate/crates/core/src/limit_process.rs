//! The limiting extremal process with drift and its closed-form laws.
//!
//! The two-parameter field `X_(s,t)` is discretized on cells of width `h`:
//! cell `k` covering `((k-1)h, kh]` carries an independent Frechet variate
//! `Y_k` with `P(Y_k <= x) = exp(-h / x^beta)`, and `X_(s,t)` is the maximum
//! of the cells inside `(s, t]`. Marginals are exact at grid points and
//! `X_(r,t) = max(X_(r,s), X_(s,t))` holds by construction.

use serde::{Deserialize, Serialize};

use crate::distributions::FrechetLaw;
use crate::error::{ensure_positive, Error, Result};
use crate::forkjoin_sim::SimOptions;
use crate::rng::Stream;
use crate::trajectory::{ProcessKind, TimeGrid, TrajectoryBatch};

const GRID_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub horizon: f64,
    pub step: f64,
    pub cells: usize,
}

impl GridSpec {
    pub fn new(horizon: f64, step: f64) -> Result<Self> {
        ensure_positive("horizon", horizon)?;
        ensure_positive("cell width", step)?;
        if step > horizon {
            return Err(Error::invalid(format!("cell width {step} exceeds horizon {horizon}")));
        }
        let cells = (horizon / step - GRID_EPS).ceil() as usize;
        Ok(GridSpec { horizon, step, cells })
    }

    /// Number of whole cells inside `(0, t]`.
    pub fn cell_index(&self, t: f64) -> usize {
        ((t / self.step + GRID_EPS).floor() as usize).min(self.cells)
    }

    fn record_cells(&self, grid: &TimeGrid) -> Result<Vec<usize>> {
        if grid.horizon() > self.horizon * (1.0 + GRID_EPS) {
            return Err(Error::invalid(format!(
                "record time {} is past the horizon {}",
                grid.horizon(),
                self.horizon
            )));
        }
        Ok(grid.times().iter().map(|&t| self.cell_index(t)).collect())
    }
}

/// One realisation of the discretized field.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtremalField {
    pub step: f64,
    pub increments: Vec<f64>,
}

impl ExtremalField {
    pub fn sample(grid: &GridSpec, beta: f64, stream: &mut Stream) -> Result<Self> {
        let law = FrechetLaw::new(beta, grid.step)?;
        let increments = (0..grid.cells).map(|_| law.invert(stream.open01())).collect();
        Ok(ExtremalField {
            step: grid.step,
            increments,
        })
    }

    /// `X_(s,t)`: maximum over cells `s_cell+1 ..= t_cell`, zero when empty.
    pub fn window_max(&self, s_cell: usize, t_cell: usize) -> f64 {
        self.increments[s_cell..t_cell].iter().copied().fold(0.0, f64::max)
    }
}

/// Streaming form of `V_k = max(0, max(V_{k-1}, Y_k) - mu h)`.
///
/// Unrolled, `V_k = max(0, max_{i<=k} Y_i - mu (k - i + 1) h)`: only the cell
/// achieving the maximum matters, so the state is that cell's value and its
/// distance to the current time. Anchors whose drifted value has gone
/// negative can never recover and are dropped.
#[derive(Clone, Copy, Debug, Default)]
pub struct DriftedSup {
    anchor: Option<(f64, u64)>,
}

impl DriftedSup {
    #[inline]
    fn drifted(y: f64, d: u64, mu: f64, h: f64) -> f64 {
        y - mu * (d as f64 * h)
    }

    /// Absorbs the next cell and returns the new `V`.
    #[inline]
    pub fn push(&mut self, y: f64, mu: f64, h: f64) -> f64 {
        let fresh = Self::drifted(y, 1, mu, h);
        let (best_y, best_d, best) = match self.anchor {
            Some((m, d)) if y < m => {
                let kept = Self::drifted(m, d + 1, mu, h);
                if kept >= fresh {
                    (m, d + 1, kept)
                } else {
                    (y, 1, fresh)
                }
            }
            _ => (y, 1, fresh),
        };
        if best > 0.0 {
            self.anchor = Some((best_y, best_d));
            best
        } else {
            self.anchor = None;
            0.0
        }
    }
}

/// Drifted supremum `V_1..V_m` for injected cell increments.
pub fn drifted_sup_path(increments: &[f64], mu: f64, h: f64) -> Vec<f64> {
    let mut state = DriftedSup::default();
    increments.iter().map(|&y| state.push(y, mu, h)).collect()
}

/// Auxiliary limit `U_k = max(U_{k-1}, R_k - mu k h)` with record process
/// `R_k = max(R_{k-1}, Y_k)` and `U_0 = 0`.
pub fn aux_limit_path(increments: &[f64], mu: f64, h: f64) -> Vec<f64> {
    let mut record = 0.0f64;
    let mut u = 0.0f64;
    increments
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            record = record.max(y);
            u = u.max(record - mu * ((i + 1) as f64 * h));
            u
        })
        .collect()
}

fn check_limit_args(beta: f64, mu: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 1.0) {
        return Err(Error::invalid(format!("beta must be > 1, got {beta}")));
    }
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::invalid(format!("mu must be >= 0, got {mu}")));
    }
    Ok(())
}

fn simulate_limit(
    grid: &GridSpec,
    record: &TimeGrid,
    beta: f64,
    mu: f64,
    opts: &SimOptions,
    kind: ProcessKind,
) -> Result<TrajectoryBatch> {
    check_limit_args(beta, mu)?;
    let law = FrechetLaw::new(beta, grid.step)?;
    let cells = grid.record_cells(record)?;
    let last = *cells.last().expect("grid is nonempty");
    opts.check_budget(last as u128)?;
    let h = grid.step;
    let rows = opts.exec.map(opts.replications, |r| {
        let mut s = Stream::new(opts.seed, r as u64);
        let mut out = Vec::with_capacity(cells.len());
        let mut k = 0usize;
        match kind {
            ProcessKind::DriftedSup => {
                let mut state = DriftedSup::default();
                let mut v = 0.0;
                for &target in &cells {
                    while k < target {
                        v = state.push(law.invert(s.open01()), mu, h);
                        k += 1;
                    }
                    out.push(v);
                }
            }
            _ => {
                let mut rec = 0.0f64;
                let mut u = 0.0f64;
                for &target in &cells {
                    while k < target {
                        rec = rec.max(law.invert(s.open01()));
                        k += 1;
                        u = u.max(rec - mu * (k as f64 * h));
                    }
                    out.push(u);
                }
            }
        }
        out
    });
    Ok(TrajectoryBatch::from_rows(kind, record, rows, None, opts.seed))
}

/// Replicated paths of `sup_{s<=t} (X_(s,t) - mu (t - s))`, recorded on
/// `record` (times must lie within the cell grid).
pub fn simulate_drifted_sup(
    grid: &GridSpec,
    record: &TimeGrid,
    beta: f64,
    mu: f64,
    opts: &SimOptions,
) -> Result<TrajectoryBatch> {
    simulate_limit(grid, record, beta, mu, opts, ProcessKind::DriftedSup)
}

/// Replicated paths of `sup_{s<=t} (X_s - mu s)`.
pub fn simulate_aux_limit(
    grid: &GridSpec,
    record: &TimeGrid,
    beta: f64,
    mu: f64,
    opts: &SimOptions,
) -> Result<TrajectoryBatch> {
    simulate_limit(grid, record, beta, mu, opts, ProcessKind::AuxLimit)
}

// ---------------------------------------------------------------------------

/// Closed-form limit laws.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LimitLawKind {
    /// `P(X_t <= x) = exp(-t / x^beta)`.
    FrechetMarginal { t: f64 },
    /// Drifted supremum over `[0, t]`.
    Transient { t: f64 },
    /// Drifted supremum over `[0, inf)`.
    SteadyState,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub kind: LimitLawKind,
    pub beta: f64,
    pub mu: f64,
}

impl LimitLaw {
    pub fn new(kind: LimitLawKind, beta: f64, mu: f64) -> Result<Self> {
        check_limit_args(beta, mu)?;
        match kind {
            LimitLawKind::FrechetMarginal { t } | LimitLawKind::Transient { t } => {
                if !(t.is_finite() && t >= 0.0) {
                    return Err(Error::invalid(format!("t must be >= 0, got {t}")));
                }
            }
            LimitLawKind::SteadyState => ensure_positive("mu", mu)?,
        }
        Ok(LimitLaw { kind, beta, mu })
    }

    /// CDF on the whole real line (zero for `x <= 0`).
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.kind {
            LimitLawKind::FrechetMarginal { t } => (-t * x.powf(-self.beta)).exp(),
            LimitLawKind::Transient { t } => transient_cdf_unchecked(x, t, self.beta, self.mu),
            LimitLawKind::SteadyState => steady_cdf_unchecked(x, self.beta, self.mu),
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }
}

fn steady_cdf_unchecked(x: f64, beta: f64, mu: f64) -> f64 {
    (-1.0 / (mu * (beta - 1.0) * x.powf(beta - 1.0))).exp()
}

fn transient_cdf_unchecked(x: f64, t: f64, beta: f64, mu: f64) -> f64 {
    if mu == 0.0 {
        return (-t * x.powf(-beta)).exp();
    }
    // (1/(mu^beta (beta-1))) ((x/mu)^{1-beta} - (x/mu + t)^{1-beta})
    let a = x / mu;
    let e = 1.0 - beta;
    let diff = a.powf(e) - (a + t).powf(e);
    (-diff / (mu.powf(beta) * (beta - 1.0))).exp()
}

/// `P(sup_{t>0}(X_t - mu t) <= x) = exp(-1 / (mu (beta-1) x^(beta-1)))`.
pub fn cdf_steady_state(x: f64, beta: f64, mu: f64) -> Result<f64> {
    ensure_positive("x", x)?;
    check_limit_args(beta, mu)?;
    ensure_positive("mu", mu)?;
    Ok(steady_cdf_unchecked(x, beta, mu))
}

/// `P(sup_{s<=t}(X_(s,t) - mu (t-s)) <= x)`.
pub fn cdf_transient(x: f64, t: f64, beta: f64, mu: f64) -> Result<f64> {
    ensure_positive("x", x)?;
    check_limit_args(beta, mu)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("t must be >= 0, got {t}")));
    }
    Ok(transient_cdf_unchecked(x, t, beta, mu))
}

/// Exact CDF of the discretized drifted supremum after `cells` cells of width
/// `h`: `V_m <= x` iff `Y_i <= x + mu (m - i + 1) h` for every cell `i`.
pub fn discrete_drifted_sup_cdf(x: f64, cells: usize, h: f64, beta: f64, mu: f64) -> Result<f64> {
    ensure_positive("x", x)?;
    ensure_positive("cell width", h)?;
    check_limit_args(beta, mu)?;
    let exponent: f64 = (1..=cells).map(|d| h * (x + mu * (d as f64 * h)).powf(-beta)).sum();
    Ok((-exponent).exp())
}

// ---------------------------------------------------------------------------

/// Terms summed directly before switching to the Euler-Maclaurin tail.
pub const HURWITZ_DIRECT_TERMS: u64 = 1_000_000;

/// `sum_{i >= m} (a + i)^{-s}` by Euler-Maclaurin, accurate when `a + m` is
/// large.
fn hurwitz_tail(s: f64, a: f64, m: u64) -> f64 {
    let x = a + m as f64;
    let f = x.powf(-s);
    x.powf(1.0 - s) / (s - 1.0) + 0.5 * f + s * f / (12.0 * x)
        - s * (s + 1.0) * (s + 2.0) * f / (720.0 * x * x * x)
}

/// Compensated sum of `(a + i)^{-s}` over `i in [lo, hi)`, smallest first.
fn hurwitz_direct(s: f64, a: f64, lo: u64, hi: u64) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for i in (lo..hi).rev() {
        let x = a + i as f64;
        let term = if s == 2.0 { 1.0 / (x * x) } else { x.powf(-s) };
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Hurwitz zeta `sum_{i>=0} (a + i)^{-s}` for `s > 1`, `a > 0`.
pub fn hurwitz_zeta(s: f64, a: f64) -> Result<f64> {
    if !(s > 1.0 && s.is_finite()) {
        return Err(Error::invalid(format!("Hurwitz zeta diverges for s = {s} <= 1")));
    }
    ensure_positive("a", a)?;
    Ok(hurwitz_direct(s, a, 0, HURWITZ_DIRECT_TERMS) + hurwitz_tail(s, a, HURWITZ_DIRECT_TERMS))
}

/// Range of the discretization sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HurwitzTerms {
    /// All `i >= 0` (steady state).
    Infinite,
    /// `i = 0 ..= floor(t / delta)` (transient, horizon `t`).
    Horizon(f64),
}

/// `(delta / (mu delta)^beta) * sum_i (x / (mu delta) + i)^{-beta}`, the
/// exponent of the product of cell probabilities on a `delta` grid. It tends
/// to `-ln` of the steady-state or transient CDF as `delta -> 0`.
pub fn hurwitz_partial(x: f64, beta: f64, mu: f64, delta: f64, terms: HurwitzTerms) -> Result<f64> {
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("sum diverges for beta = {beta} <= 1")));
    }
    ensure_positive("x", x)?;
    ensure_positive("mu", mu)?;
    ensure_positive("delta", delta)?;
    let a = x / (mu * delta);
    let sum = match terms {
        HurwitzTerms::Infinite => hurwitz_zeta(beta, a)?,
        HurwitzTerms::Horizon(t) => {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::invalid(format!("t must be >= 0, got {t}")));
            }
            // i = 0..=I
            let count = (t / delta + GRID_EPS).floor() as u64 + 1;
            if count <= HURWITZ_DIRECT_TERMS {
                hurwitz_direct(beta, a, 0, count)
            } else {
                hurwitz_direct(beta, a, 0, HURWITZ_DIRECT_TERMS)
                    + hurwitz_tail(beta, a, HURWITZ_DIRECT_TERMS)
                    - hurwitz_tail(beta, a, count)
            }
        }
    };
    Ok(delta / (mu * delta).powf(beta) * sum)
}

// ---------------------------------------------------------------------------

/// `max { sum z_j b_j : sum z_j^alpha <= 1, 0 <= z_j <= 1 }`.
///
/// For `alpha <= 1` the optimum puts all weight on the largest `b_j`. For
/// `alpha > 1` it is the dual norm `||b||_{alpha/(alpha-1)}`, attained at
/// `z_j` proportional to `b_j^{1/(alpha-1)}`; that maximiser has every
/// `z_j^alpha <= 1`, so the box constraint never binds.
pub fn holder_profile(b: &[f64], alpha: f64) -> Result<f64> {
    if b.is_empty() {
        return Err(Error::invalid("profile needs at least one value"));
    }
    ensure_positive("alpha", alpha)?;
    if let Some(bad) = b.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::invalid(format!("profile values must be positive, got {bad}")));
    }
    let top = b.iter().copied().fold(0.0, f64::max);
    if alpha <= 1.0 {
        return Ok(top);
    }
    let p = alpha / (alpha - 1.0);
    let s: f64 = b.iter().map(|v| (v / top).powf(p)).sum();
    Ok(top * s.powf(1.0 / p))
}

/// Joint CDF `P(V(t1) < x1, V(t2) < x2)` of the drifted-sup process written
/// through its marginals.
pub fn joint_cdf_decomposition(x1: f64, t1: f64, x2: f64, t2: f64, beta: f64, mu: f64) -> Result<f64> {
    ensure_positive("x1", x1)?;
    ensure_positive("x2", x2)?;
    ensure_positive("t1", t1)?;
    if !(t2 > t1 && t2.is_finite()) {
        return Err(Error::invalid(format!("need 0 < t1 < t2, got t1 = {t1}, t2 = {t2}")));
    }
    let f2 = cdf_transient(x2, t2, beta, mu)?;
    if x2 + mu * t2 > x1 + mu * t1 {
        let f1 = cdf_transient(x1, t1, beta, mu)?;
        let shifted = cdf_transient(x2 + mu * (t2 - t1), t1, beta, mu)?;
        Ok(f1 / shifted * f2)
    } else {
        Ok(f2)
    }
}
