//! Small numerical helpers: bracketed bisection and adaptive Simpson
//! quadrature on half-lines.

use crate::error::{Error, Result};

/// Bisection for the crossing of a decreasing function through zero on
/// `[lo, hi]`, assuming `f(lo) >= 0 > f(hi)`. Stops once the bracket is
/// narrower than `tol`.
pub(crate) fn bisect_decreasing<F>(
    what: &'static str,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
    f: F,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    for _ in 0..max_iter {
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence {
        what,
        iterations: max_iter,
        last: 0.5 * (lo + hi),
        residual: hi - lo,
    })
}

/// Grows `hi = lo + step, lo + 2 step, lo + 4 step, ...` until `f(hi) < 0`.
pub(crate) fn bracket_upward<F>(what: &'static str, lo: f64, step: f64, f: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut width = step;
    for _ in 0..64 {
        let hi = lo + width;
        if f(hi) < 0.0 {
            return Ok(hi);
        }
        width *= 2.0;
    }
    Err(Error::Convergence {
        what,
        iterations: 64,
        last: lo + width,
        residual: f64::NAN,
    })
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    worst: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        if depth == 0 {
            *worst = worst.max(delta.abs());
        }
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, worst)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, worst)
}

/// Adaptive Simpson on a finite interval. Returns the estimate and the largest
/// unresolved local error (zero when every panel met its tolerance).
pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut worst = 0.0;
    let v = simpson_step(&f, a, b, fa, fm, fb, whole, tol, 48, &mut worst);
    (v, worst)
}

/// Integral of a nonnegative, eventually decaying `f` over `[a, inf)`.
///
/// Integrates panels `[a, a+1], [a+1, a+3], [a+3, a+7], ...` until a panel
/// contributes less than `rel_tol` of the running total.
pub(crate) fn integrate_half_line(
    what: &'static str,
    f: impl Fn(f64) -> f64,
    a: f64,
    rel_tol: f64,
) -> Result<f64> {
    let mut total = 0.0f64;
    let mut lo = a;
    let mut width = 1.0;
    for _ in 0..60 {
        let hi = lo + width;
        let scale = panel_scale(&f, lo, hi).max(total.abs());
        let (panel, worst) = simpson(&f, lo, hi, rel_tol * 1e-2 * scale);
        if worst > rel_tol * scale {
            return Err(Error::Numeric {
                what,
                detail: format!("panel [{lo}, {hi}] unresolved, local error {worst:e}"),
            });
        }
        total += panel;
        if panel.abs() <= rel_tol * 1e-3 * total.abs() && f(hi) <= rel_tol * 1e-3 * total.abs() {
            return Ok(total);
        }
        lo = hi;
        width *= 2.0;
    }
    Err(Error::Numeric {
        what,
        detail: format!("tail still contributing at x = {lo}, running total {total}"),
    })
}

fn panel_scale(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    (f(lo).abs() + f(0.5 * (lo + hi)).abs() + f(hi).abs()) * (hi - lo) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect_decreasing("t", 0.0, 2.0, 1e-14, 200, |x| 2.0 - x * x).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisection_cap_is_an_error() {
        let r = bisect_decreasing("t", 0.0, 2.0, 1e-14, 3, |x| 2.0 - x * x);
        assert!(matches!(r, Err(Error::Convergence { iterations: 3, .. })));
    }

    #[test]
    fn half_line_exponential() {
        let v = integrate_half_line("t", |x| (-0.5 * x).exp(), 0.0, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn half_line_slow_decay() {
        // integral of e^{-0.05 y} from 0 is 20
        let v = integrate_half_line("t", |x| (-0.05 * x).exp(), 0.0, 1e-10).unwrap();
        assert!((v - 20.0).abs() < 1e-7, "{v}");
    }
}
