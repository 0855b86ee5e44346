//! Empirical distributions, Kolmogorov-Smirnov distances, DKW bands,
//! Bennett-type tail bounds and record counts.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};

/// Confidence level used for every default KS threshold.
pub const KS_CONFIDENCE: f64 = 0.99;

/// Batches used by the batch-means effective sample size.
pub const BATCH_MEANS_BATCHES: usize = 32;

/// Half-width of the two-sided DKW band: `sqrt(ln(2/(1-conf)) / (2n))`.
pub fn dkw_band(n: usize, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * n as f64)).sqrt()
}

/// Asymptotic two-sample KS critical value at the given confidence.
pub fn two_sample_threshold(n: usize, m: usize, confidence: f64) -> f64 {
    let c = (-(0.5 * (1.0 - confidence)).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Sorted sample with ECDF, quantile and KS queries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
    effective_n: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub statistic: f64,
    /// Sample size (first sample for two-sample reports).
    pub n: usize,
    /// Second sample size for two-sample reports.
    pub m: Option<usize>,
    pub dkw_band_99: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl KsReport {
    /// Re-judges the report against a caller-provided threshold.
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self.pass = self.statistic <= threshold;
        self
    }
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("empirical distribution needs at least one sample"));
        }
        if let Some(bad) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample {bad}")));
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalDistribution {
            sorted: samples,
            effective_n: None,
        })
    }

    /// Builds from a sequence in time order and attaches its batch-means
    /// effective sample size.
    pub fn from_correlated(sequence: Vec<f64>) -> Result<Self> {
        let ess = effective_sample_size(&sequence, BATCH_MEANS_BATCHES);
        let mut d = Self::new(sequence)?;
        d.effective_n = ess;
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn effective_n(&self) -> Option<f64> {
        self.effective_n
    }

    pub fn set_effective_n(&mut self, ess: Option<f64>) {
        self.effective_n = ess;
    }

    /// Right-continuous ECDF, `#{x_i <= x} / n`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// Generalized inverse of the ECDF: smallest sample with ECDF >= p.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("quantile level must lie in [0, 1], got {p}")));
        }
        let n = self.len();
        let k = ((p * n as f64).ceil() as usize).clamp(1, n);
        Ok(self.sorted[k - 1])
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.len() as f64
    }

    /// One-sample KS distance against a continuous CDF. The default threshold
    /// is the 99% DKW band.
    pub fn ks_against(&self, cdf: impl Fn(f64) -> f64) -> KsReport {
        let n = self.len();
        let nf = n as f64;
        let mut d: f64 = 0.0;
        let mut i = 0;
        while i < n {
            let x = self.sorted[i];
            let mut j = i;
            while j < n && self.sorted[j] == x {
                j += 1;
            }
            let f = cdf(x);
            let below = i as f64 / nf;
            let at = j as f64 / nf;
            d = d.max((at - f).abs()).max((f - below).abs());
            i = j;
        }
        let band = dkw_band(n, KS_CONFIDENCE);
        KsReport {
            statistic: d,
            n,
            m: None,
            dkw_band_99: band,
            threshold: band,
            pass: d <= band,
        }
    }

    /// Two-sample KS distance; default threshold is the asymptotic 99% value.
    pub fn two_sample_ks(&self, other: &EmpiricalDistribution) -> KsReport {
        let (a, b) = (&self.sorted, &other.sorted);
        let (n, m) = (a.len(), b.len());
        let (mut i, mut j) = (0usize, 0usize);
        let mut d: f64 = 0.0;
        while i < n && j < m {
            let x = a[i].min(b[j]);
            while i < n && a[i] <= x {
                i += 1;
            }
            while j < m && b[j] <= x {
                j += 1;
            }
            d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
        }
        let threshold = two_sample_threshold(n, m, KS_CONFIDENCE);
        KsReport {
            statistic: d,
            n,
            m: Some(m),
            dkw_band_99: dkw_band(n.min(m), KS_CONFIDENCE),
            threshold,
            pass: d <= threshold,
        }
    }
}

/// Batch-means effective sample size of a correlated sequence, clamped to
/// `[1, n]`. `None` when there are too few points for the batch count.
pub fn effective_sample_size(sequence: &[f64], batches: usize) -> Option<f64> {
    let n = sequence.len();
    if batches < 2 || n < 2 * batches {
        return None;
    }
    let size = n / batches;
    let used = size * batches;
    let data = &sequence[..used];
    let mean = data.iter().sum::<f64>() / used as f64;
    let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (used - 1) as f64;
    if var == 0.0 {
        return Some(n as f64);
    }
    let bm_var = data
        .chunks_exact(size)
        .map(|c| (c.iter().sum::<f64>() / size as f64 - mean).powi(2))
        .sum::<f64>()
        / (batches - 1) as f64;
    // long-run variance estimate is size * bm_var
    let ess = used as f64 * var / (size as f64 * bm_var);
    Some(ess.clamp(1.0, n as f64))
}

/// Both Bennett-type upper bounds on `P(sum Y_i > y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BennettBounds {
    /// `exp(-(n s2 / M^2) h(y M / (n s2)))` with `h(x) = (1+x) ln(1+x) - x`.
    pub bennett: f64,
    /// Relaxed form `exp(-(y/M) (ln(1 + y M/(n s2)) - 1))`.
    pub relaxed: f64,
}

/// Tail bounds for a sum of `n` independent centred terms with per-term
/// variance `sigma2` and `|Y_i| < m_bound` almost surely.
pub fn bennett_bound(n: usize, sigma2: f64, m_bound: f64, y: f64) -> Result<BennettBounds> {
    if n == 0 {
        return Err(Error::invalid("bennett bound needs n >= 1"));
    }
    ensure_positive("sigma2", sigma2)?;
    ensure_positive("M", m_bound)?;
    ensure_positive("y", y)?;
    let total_var = n as f64 * sigma2;
    let x = y * m_bound / total_var;
    let h = (1.0 + x) * x.ln_1p() - x;
    let bennett = (-(total_var / (m_bound * m_bound)) * h).exp();
    let relaxed = (-(y / m_bound) * (x.ln_1p() - 1.0)).exp();
    Ok(BennettBounds {
        bennett: bennett.clamp(0.0, 1.0),
        relaxed: relaxed.clamp(0.0, 1.0),
    })
}

/// Number of strict running maxima (records) in sequence order.
pub fn record_count(samples: &[f64]) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut count = 0;
    for &x in samples {
        if x > best {
            best = x;
            count += 1;
        }
    }
    count
}

/// Expected record count of `m` i.i.d. continuous variables: `sum 1/j`.
pub fn expected_record_count(m: usize) -> f64 {
    (1..=m).map(|j| 1.0 / j as f64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use proptest::prelude::*;

    #[test]
    fn ks_hand_example() {
        let e = EmpiricalDistribution::new(vec![0.75, 0.25]).unwrap();
        let r = e.ks_against(|x| x.clamp(0.0, 1.0));
        assert!((r.statistic - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ks_degenerate_sample() {
        let e = EmpiricalDistribution::new(vec![0.0; 10]).unwrap();
        let r = e.ks_against(|x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / (x * x)).exp() });
        assert_eq!(r.statistic, 1.0);
        assert!(!r.pass);
    }

    #[test]
    fn ks_calibration_uniform() {
        let mut s = Stream::new(3, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| s.open01()).collect();
        let r = EmpiricalDistribution::new(xs).unwrap().ks_against(|x| x.clamp(0.0, 1.0));
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn ks_rejects_non_finite() {
        assert!(EmpiricalDistribution::new(vec![1.0, f64::NAN]).is_err());
        assert!(EmpiricalDistribution::new(vec![]).is_err());
    }

    #[test]
    fn two_sample_examples() {
        let a = EmpiricalDistribution::new(vec![0.3, 0.1, 0.9]).unwrap();
        assert_eq!(a.two_sample_ks(&a).statistic, 0.0);
        let z = EmpiricalDistribution::new(vec![0.0]).unwrap();
        let o = EmpiricalDistribution::new(vec![1.0]).unwrap();
        assert_eq!(z.two_sample_ks(&o).statistic, 1.0);
        // ties across samples
        let a = EmpiricalDistribution::new(vec![1.0, 2.0, 2.0, 3.0]).unwrap();
        let b = EmpiricalDistribution::new(vec![2.0, 2.0]).unwrap();
        assert!((a.two_sample_ks(&b).statistic - 0.25).abs() < 1e-15);
    }

    #[test]
    fn two_sample_calibration() {
        let mut s = Stream::new(8, 0);
        let a: Vec<f64> = (0..10_000).map(|_| s.open01()).collect();
        let b: Vec<f64> = (0..10_000).map(|_| s.open01()).collect();
        let r = EmpiricalDistribution::new(a)
            .unwrap()
            .two_sample_ks(&EmpiricalDistribution::new(b).unwrap());
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn quantiles() {
        let e = EmpiricalDistribution::new(vec![4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(e.quantile(0.0).unwrap(), 1.0);
        assert_eq!(e.quantile(0.25).unwrap(), 1.0);
        assert_eq!(e.quantile(0.26).unwrap(), 2.0);
        assert_eq!(e.quantile(1.0).unwrap(), 4.0);
        assert!(e.quantile(1.5).is_err());
    }

    #[test]
    fn bennett_examples() {
        let b = bennett_bound(1, 1.0, 1.0, 1.0).unwrap();
        let h1 = 2.0 * 2f64.ln() - 1.0;
        assert!((b.bennett - (-h1).exp()).abs() < 1e-15);
        assert!((b.bennett - 0.6796).abs() < 1e-4);
        let b = bennett_bound(1, 1.0, 1.0, 10.0).unwrap();
        let exact = (-10.0 * (11f64.ln() - 1.0)).exp();
        assert!((b.relaxed - exact).abs() < 1e-20);
        assert!((b.relaxed - 8.5e-7).abs() < 0.1e-7);
        let b = bennett_bound(5, 2.0, 3.0, 1e-12).unwrap();
        assert!((b.bennett - 1.0).abs() < 1e-9 && b.relaxed == 1.0);
        assert!(bennett_bound(1, 0.0, 1.0, 1.0).is_err());
        assert!(bennett_bound(0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn records() {
        assert_eq!(record_count(&[1.0, 2.0, 3.0]), 3);
        assert_eq!(record_count(&[3.0, 2.0, 1.0]), 1);
        assert_eq!(record_count(&[1.0, 1.0, 2.0]), 2);
        let mut s = Stream::new(17, 0);
        let reps = 10_000;
        let counts: Vec<f64> = (0..reps)
            .map(|_| {
                let xs: Vec<f64> = (0..3).map(|_| s.open01()).collect();
                record_count(&xs) as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / reps as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let se = (var / reps as f64).sqrt();
        assert!((mean - 11.0 / 6.0).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn ess_of_iid_is_near_n_and_of_ar1_is_smaller() {
        let mut s = Stream::new(21, 0);
        let iid: Vec<f64> = (0..32_000).map(|_| s.open01()).collect();
        let ess = effective_sample_size(&iid, 32).unwrap();
        assert!(ess > 16_000.0, "{ess}");
        let mut x = 0.0;
        let ar: Vec<f64> = (0..32_000)
            .map(|_| {
                x = 0.95 * x + s.open01() - 0.5;
                x
            })
            .collect();
        let ess_ar = effective_sample_size(&ar, 32).unwrap();
        assert!(ess_ar < 0.1 * 32_000.0, "{ess_ar}");
        assert!(effective_sample_size(&iid[..10], 32).is_none());
    }

    proptest! {
        #[test]
        fn ecdf_is_monotone_right_continuous(xs in prop::collection::vec(-1e3f64..1e3, 1..60), probe in prop::collection::vec(-1.1e3f64..1.1e3, 1..20)) {
            let e = EmpiricalDistribution::new(xs.clone()).unwrap();
            let mut p = probe.clone();
            p.sort_by(f64::total_cmp);
            let vals: Vec<f64> = p.iter().map(|&x| e.ecdf(x)).collect();
            prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(e.ecdf(f64::INFINITY), 1.0);
            prop_assert_eq!(e.ecdf(f64::NEG_INFINITY), 0.0);
            for &x in &xs {
                let k = xs.iter().filter(|&&v| v <= x).count();
                prop_assert_eq!(e.ecdf(x), k as f64 / xs.len() as f64);
            }
        }

        #[test]
        fn relaxed_bound_dominates(n in 1usize..50, s2 in 1e-3f64..1e2, m in 1e-2f64..1e2, y in 1e-3f64..1e3) {
            let b = bennett_bound(n, s2, m, y).unwrap();
            prop_assert!(b.relaxed >= 0.0 && b.bennett >= 0.0);
            if b.relaxed < 1.0 {
                prop_assert!(b.bennett <= b.relaxed);
            }
        }
    }
}
