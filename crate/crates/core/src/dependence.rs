//! Dependence diagnostics: rank correlations, tail dependence, and Pickands
//! functions of extreme-value copulas.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::copulas::CopulaFamily;
use crate::error::{Error, Result};
use crate::mixing::MixingModel;
use crate::mixture::{CopulaModel, MixtureCopula};
use crate::quad::integrate;
use crate::sampling::{sample_base, sample_mixture, SeededStream};

/// Default quantile level for the empirical upper tail estimator.
pub const DEFAULT_TAIL_QUANTILE: f64 = 0.95;

fn check_pairs(pairs: &[(f64, f64)]) -> Result<()> {
    if pairs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 pairs, got {}",
            pairs.len()
        )));
    }
    if pairs.iter().any(|&(x, y)| x.is_nan() || y.is_nan()) {
        return Err(Error::Domain("pairs contain NaN".into()));
    }
    Ok(())
}

/// Sum of t(t−1)/2 over runs of equal values in a sorted slice.
fn tied_pairs<T: PartialEq>(sorted: &[T]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Stable merge sort by value, returning the number of strict inversions.
fn sort_count_inversions(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (lo, hi) = v.split_at_mut(mid);
        let (blo, bhi) = buf.split_at_mut(mid);
        sort_count_inversions(lo, blo) + sort_count_inversions(hi, bhi)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Kendall's τ_b by Knight's merge-sort algorithm.
pub fn kendall_tau(pairs: &[(f64, f64)]) -> Result<f64> {
    check_pairs(pairs)?;
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n = sorted.len() as u64;
    let n0 = n * (n - 1) / 2;
    let xs: Vec<f64> = sorted.iter().map(|p| p.0).collect();
    let n1 = tied_pairs(&xs);
    let n3 = tied_pairs(&sorted);
    let mut ys: Vec<f64> = sorted.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; ys.len()];
    let swaps = sort_count_inversions(&mut ys, &mut buf);
    let n2 = tied_pairs(&ys);
    if n1 == n0 || n2 == n0 {
        return Err(Error::InsufficientData("a coordinate is constant".into()));
    }
    let s = n0 as i128 - n1 as i128 - n2 as i128 + n3 as i128 - 2 * swaps as i128;
    Ok(s as f64 / (((n0 - n1) as f64) * ((n0 - n2) as f64)).sqrt())
}

/// Ranks 1..=n with ties given their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let r = 0.5 * ((start + 1 + end) as f64);
        for &i in &idx[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

fn pearson_slices(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InsufficientData("a coordinate is constant".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Product-moment correlation.
pub fn pearson(pairs: &[(f64, f64)]) -> Result<f64> {
    check_pairs(pairs)?;
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    pearson_slices(&x, &y)
}

/// Spearman's ρ as the correlation of average ranks.
pub fn spearman_rho(pairs: &[(f64, f64)]) -> Result<f64> {
    check_pairs(pairs)?;
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    pearson_slices(&average_ranks(&x), &average_ranks(&y))
}

/// Empirical upper tail coefficient `2 − (1 − Ĉ(q,q))/(1 − q)` with the
/// empirical copula built from ranks scaled by `1/(n+1)`.
pub fn upper_tail_empirical(pairs: &[(f64, f64)], q: f64) -> Result<f64> {
    check_pairs(pairs)?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("tail quantile q = {q} must lie in (0,1)")));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let (rx, ry) = (average_ranks(&x), average_ranks(&y));
    let scale = (pairs.len() + 1) as f64;
    let below = rx
        .iter()
        .zip(&ry)
        .filter(|(a, b)| **a / scale <= q && **b / scale <= q)
        .count();
    let c = below as f64 / pairs.len() as f64;
    Ok(2.0 - (1.0 - c) / (1.0 - q))
}

/// Empirical dependence summary of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependenceSummary {
    pub pearson: f64,
    pub spearman: f64,
    pub kendall: f64,
    pub upper_tail: f64,
    pub tail_quantile: f64,
}

pub fn dependence_summary(pairs: &[(f64, f64)], q: f64) -> Result<DependenceSummary> {
    Ok(DependenceSummary {
        pearson: pearson(pairs)?,
        spearman: spearman_rho(pairs)?,
        kendall: kendall_tau(pairs)?,
        upper_tail: upper_tail_empirical(pairs, q)?,
        tail_quantile: q,
    })
}

/// Pickands dependence function of a bivariate extreme-value copula
/// `Q_A(u₁,u₂) = (u₁u₂)^{A(ln u₂ / ln(u₁u₂))}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum PickandsFunction {
    /// `A(t) = (t^α + (1−t)^α)^{1/α}`, `α ≥ 1`.
    Gumbel { alpha: f64 },
    /// `A(t) = 1 − ((ψ₁(1−t))^{−α} + (ψ₂t)^{−α})^{−1/α}`, `α > 0`, `ψ ∈ (0,1]`.
    Joe { alpha: f64, psi1: f64, psi2: f64 },
}

impl PickandsFunction {
    pub fn gumbel(alpha: f64) -> Result<Self> {
        let a = PickandsFunction::Gumbel { alpha };
        a.validate()?;
        Ok(a)
    }

    pub fn joe(alpha: f64, psi1: f64, psi2: f64) -> Result<Self> {
        let a = PickandsFunction::Joe { alpha, psi1, psi2 };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            PickandsFunction::Gumbel { alpha } => alpha >= 1.0 && alpha.is_finite(),
            PickandsFunction::Joe { alpha, psi1, psi2 } => {
                alpha > 0.0
                    && alpha.is_finite()
                    && psi1 > 0.0
                    && psi1 <= 1.0
                    && psi2 > 0.0
                    && psi2 <= 1.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ParameterDomain(format!("invalid Pickands function {self:?}")))
        }
    }

    /// A(t) for t ∈ [0, 1].
    pub fn value(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match *self {
            PickandsFunction::Gumbel { alpha } => {
                let (lo, hi) = if t < 0.5 { (t, 1.0 - t) } else { (1.0 - t, t) };
                if lo == 0.0 {
                    return 1.0;
                }
                hi * (1.0 + (lo / hi).powf(alpha)).powf(1.0 / alpha)
            }
            PickandsFunction::Joe { alpha, psi1, psi2 } => {
                if t == 0.0 || t == 1.0 {
                    return 1.0;
                }
                let a = (psi1 * (1.0 - t)).ln() * -alpha;
                let b = (psi2 * t).ln() * -alpha;
                let (hi, lo) = if a > b { (a, b) } else { (b, a) };
                let ln_sum = hi + (lo - hi).exp().ln_1p();
                1.0 - (-ln_sum / alpha).exp()
            }
        }
    }

    /// The extreme-value copula generated by `A`.
    pub fn copula_cdf(&self, u1: f64, u2: f64) -> f64 {
        if u1 <= 0.0 || u2 <= 0.0 {
            return 0.0;
        }
        let (x, y) = (-u1.min(1.0).ln(), -u2.min(1.0).ln());
        if x + y == 0.0 {
            return 1.0;
        }
        (-(x + y) * self.value(y / (x + y))).exp()
    }
}

/// Number of grid intervals for the Stieltjes sum in [`pickands_tau`].
const TAU_GRID: usize = 2000;

/// Kendall's τ of `Q_A`: `∫ t(1−t)/A(t) dA′(t)`, with `1 − 1/α` for Gumbel.
pub fn pickands_tau(a: &PickandsFunction) -> f64 {
    match *a {
        PickandsFunction::Gumbel { alpha } => 1.0 - 1.0 / alpha,
        PickandsFunction::Joe { .. } => pickands_tau_stieltjes(a),
    }
}

/// Stieltjes sum for Kendall's τ of `Q_A`.
///
/// `A′` is taken by central differences at the points of a uniform grid and
/// the integrand is evaluated at interval midpoints.
pub fn pickands_tau_stieltjes(a: &PickandsFunction) -> f64 {
    let h = 1e-6;
    let d = |t: f64| {
        let (lo, hi) = ((t - h).max(0.0), (t + h).min(1.0));
        (a.value(hi) - a.value(lo)) / (hi - lo)
    };
    let step = 1.0 / TAU_GRID as f64;
    let mut prev = d(0.0);
    let mut tau = 0.0;
    for i in 1..=TAU_GRID {
        let next = d(i as f64 * step);
        let mid = (i as f64 - 0.5) * step;
        tau += mid * (1.0 - mid) / a.value(mid) * (next - prev);
        prev = next;
    }
    tau
}

/// Spearman's ρ of `Q_A`: `12 ∫ (1 + A(t))⁻² dt − 3`.
pub fn pickands_rho(a: &PickandsFunction) -> f64 {
    let (v, _) = integrate(|t| (1.0 + a.value(t)).powi(-2), 0.0, 1.0, 1e-12);
    12.0 * v - 3.0
}

/// Diagonal offsets used in the upper tail extrapolation.
const TAIL_STEPS: [f64; 4] = [1e-3, 1e-4, 1e-5, 1e-6];

/// Upper tail dependence `2 − lim_{u↓0} (1 − C(1−u,1−u))/u`, extrapolated to
/// `u = 0` by Neville's scheme on [`TAIL_STEPS`].
pub fn upper_tail_theoretical(model: &CopulaModel) -> Result<f64> {
    model.validate()?;
    let mut vals = Vec::with_capacity(TAIL_STEPS.len());
    for &u in &TAIL_STEPS {
        let c = model.cdf(1.0 - u, 1.0 - u)?;
        vals.push((1.0 - c) / u);
    }
    // Neville table evaluated at zero
    let n = TAIL_STEPS.len();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (TAIL_STEPS[i], TAIL_STEPS[i + m]);
            vals[i] = (xi * vals[i + 1] - xj * vals[i]) / (xi - xj);
        }
    }
    Ok((2.0 - vals[0]).clamp(0.0, 1.0))
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub e_lambda: f64,
    pub tau_c: f64,
    pub tau_q: f64,
    pub rho_c: f64,
    pub rho_q: f64,
}

/// Empirical τ and ρ_S of the mixture against the base copula for each mean
/// claim count in `e_lambdas`, with `reps` pairs per cell.
///
/// Cell `i` draws the mixture from `stream.child(2i)` and the base copula
/// from `stream.child(2i + 1)`.
pub fn tau_convergence_study(
    base: &CopulaFamily,
    mixing: MixingModel,
    e_lambdas: &[f64],
    reps: usize,
    stream: SeededStream,
) -> Result<Vec<ConvergenceRow>> {
    if reps < 2 {
        return Err(Error::InsufficientData(format!("reps = {reps} is too small")));
    }
    e_lambdas
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let mc = MixtureCopula::new(*base, mixing.with_mean(e)?)?;
            let c = sample_mixture(&mc, reps, stream.child(2 * i as u64))?;
            let q = sample_base(base, reps, stream.child(2 * i as u64 + 1))?;
            Ok(ConvergenceRow {
                e_lambda: e,
                tau_c: kendall_tau(&c)?,
                tau_q: kendall_tau(&q)?,
                rho_c: spearman_rho(&c)?,
                rho_q: spearman_rho(&q)?,
            })
        })
        .collect()
}

/// Write convergence rows as CSV with header `e_lambda,tau_c,tau_q,rho_c,rho_q`.
pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
