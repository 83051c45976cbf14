//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Iterations without step reduction accepted as converged inside a tight bracket.
const STALL_STEPS: usize = 8;
/// Relative bracket width below which a stalled iteration is accepted.
const STALL_WIDTH: f64 = 1e-12;

/// Safeguarded Newton iteration for an increasing function on `[lo, hi]`.
///
/// `fdf` returns `(f(x), f'(x))`. Steps leaving the current bracket fall back
/// to bisection, so convergence is guaranteed when `f(lo) <= 0 <= f(hi)`.
pub(crate) fn newton_bracketed<F>(
    mut fdf: F,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut x = if x0 > lo && x0 < hi { x0 } else { 0.5 * (lo + hi) };
    let mut min_step = f64::INFINITY;
    let mut stale = 0;
    let mut last_newton = f64::INFINITY;
    let mut slow = 0;
    for _ in 0..max_iter {
        let (fx, dfx) = fdf(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        if (newton - x).abs() <= tol * x.abs().max(1.0) {
            return Ok(newton.clamp(lo, hi));
        }
        // bisect whenever two Newton steps in a row failed to halve
        let newton_step = (newton - x).abs();
        if newton_step > 0.5 * last_newton {
            slow += 1;
        } else {
            slow = 0;
        }
        last_newton = newton_step;
        let mut next = newton;
        if slow >= 2 || !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
            slow = 0;
        }
        let step = (next - x).abs();
        x = next;
        let scale = x.abs().max(1.0);
        if step <= tol * scale || hi - lo <= tol * scale {
            return Ok(x);
        }
        // steps that stop shrinking inside a tight bracket are rounding noise in f
        if step < 0.5 * min_step {
            min_step = step;
            stale = 0;
        } else {
            stale += 1;
        }
        if stale >= STALL_STEPS && hi - lo <= STALL_WIDTH * scale {
            return Ok(x);
        }
    }
    if hi - lo <= STALL_WIDTH * x.abs().max(1.0) {
        return Ok(x);
    }
    Err(Error::Convergence(format!(
        "newton iteration stalled in [{lo}, {hi}] after {max_iter} iterations"
    )))
}
