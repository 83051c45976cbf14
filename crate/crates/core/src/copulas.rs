//! Bivariate base copulas Q_α.
//!
//! Every family exposes the CDF, the density, the conditional distribution
//! `∂Q/∂v₁` and its inverse in `v₂`. All families here are exchangeable, so
//! `∂Q/∂v₂(v₁, v₂) = ∂Q/∂v₁(v₂, v₁)`.
//!
//! Density-type functions clamp interior arguments into
//! `[BOUNDARY_EPS, 1 − BOUNDARY_EPS]`; exact 0 or 1 is a boundary error.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::roots::newton_bracketed;
use crate::special::{ln_1p_exp, ln_gamma, log_add_exp, StudentT};

/// Clamp applied to interior arguments of density-type evaluations.
pub const BOUNDARY_EPS: f64 = 1e-15;

/// Smallest admissible |α| for the Frank family.
pub const FRANK_MIN_ABS_ALPHA: f64 = 1e-6;

const INVERSE_MAX_ITER: usize = 200;

/// Family name without parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Independence,
    Gumbel,
    Frank,
    Joe,
    Clayton,
    Student,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 6] = [
        FamilyKind::Independence,
        FamilyKind::Gumbel,
        FamilyKind::Frank,
        FamilyKind::Joe,
        FamilyKind::Clayton,
        FamilyKind::Student,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Independence => "independence",
            FamilyKind::Gumbel => "gumbel",
            FamilyKind::Frank => "frank",
            FamilyKind::Joe => "joe",
            FamilyKind::Clayton => "clayton",
            FamilyKind::Student => "student",
        }
    }

    /// Number of free copula parameters.
    pub fn n_params(self) -> usize {
        match self {
            FamilyKind::Independence => 0,
            FamilyKind::Student => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "independence" | "indep" | "product" => Ok(FamilyKind::Independence),
            "gumbel" => Ok(FamilyKind::Gumbel),
            "frank" => Ok(FamilyKind::Frank),
            "joe" => Ok(FamilyKind::Joe),
            "clayton" => Ok(FamilyKind::Clayton),
            "student" | "t" => Ok(FamilyKind::Student),
            other => Err(Error::Domain(format!("unknown copula family '{other}'"))),
        }
    }
}

/// A base copula family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum CopulaFamily {
    Independence,
    /// α ≥ 1.
    Gumbel { alpha: f64 },
    /// α ≠ 0 (|α| ≥ 1e-6).
    Frank { alpha: f64 },
    /// α ≥ 1.
    Joe { alpha: f64 },
    /// α > 0.
    Clayton { alpha: f64 },
    /// Correlation ρ ∈ (−1, 1) and degrees of freedom m > 0.
    Student { rho: f64, dof: f64 },
}

/// Values of Q and its derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pieces {
    pub cdf: f64,
    pub d1: f64,
    pub d2: f64,
    pub pdf: f64,
}

impl CopulaFamily {
    /// Build a family from its kind and a parameter slice (`[α]`, or `[ρ, m]`
    /// for Student, empty for independence).
    pub fn from_kind(kind: FamilyKind, params: &[f64]) -> Result<Self> {
        if params.len() != kind.n_params() {
            return Err(Error::ParameterDomain(format!(
                "{kind} expects {} parameter(s), got {}",
                kind.n_params(),
                params.len()
            )));
        }
        let c = match kind {
            FamilyKind::Independence => CopulaFamily::Independence,
            FamilyKind::Gumbel => CopulaFamily::Gumbel { alpha: params[0] },
            FamilyKind::Frank => CopulaFamily::Frank { alpha: params[0] },
            FamilyKind::Joe => CopulaFamily::Joe { alpha: params[0] },
            FamilyKind::Clayton => CopulaFamily::Clayton { alpha: params[0] },
            FamilyKind::Student => CopulaFamily::Student {
                rho: params[0],
                dof: params[1],
            },
        };
        c.validate()?;
        Ok(c)
    }

    pub fn kind(&self) -> FamilyKind {
        match self {
            CopulaFamily::Independence => FamilyKind::Independence,
            CopulaFamily::Gumbel { .. } => FamilyKind::Gumbel,
            CopulaFamily::Frank { .. } => FamilyKind::Frank,
            CopulaFamily::Joe { .. } => FamilyKind::Joe,
            CopulaFamily::Clayton { .. } => FamilyKind::Clayton,
            CopulaFamily::Student { .. } => FamilyKind::Student,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            CopulaFamily::Independence => vec![],
            CopulaFamily::Gumbel { alpha }
            | CopulaFamily::Frank { alpha }
            | CopulaFamily::Joe { alpha }
            | CopulaFamily::Clayton { alpha } => vec![alpha],
            CopulaFamily::Student { rho, dof } => vec![rho, dof],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            CopulaFamily::Independence => true,
            CopulaFamily::Gumbel { alpha } | CopulaFamily::Joe { alpha } => {
                alpha >= 1.0 && alpha.is_finite()
            }
            CopulaFamily::Frank { alpha } => alpha.abs() >= FRANK_MIN_ABS_ALPHA && alpha.is_finite(),
            CopulaFamily::Clayton { alpha } => alpha > 0.0 && alpha.is_finite(),
            CopulaFamily::Student { rho, dof } => {
                rho > -1.0 && rho < 1.0 && dof > 0.0 && dof.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ParameterDomain(format!("invalid parameters for {self:?}")))
        }
    }

    /// Q(v₁, v₂).
    pub fn cdf(&self, v1: f64, v2: f64) -> Result<f64> {
        self.validate()?;
        check_unit("v1", v1)?;
        check_unit("v2", v2)?;
        Ok(self.cdf_raw(v1, v2))
    }

    /// Density q(v₁, v₂) on the open unit square.
    pub fn pdf(&self, v1: f64, v2: f64) -> Result<f64> {
        Ok(self.ln_pdf(v1, v2)?.exp())
    }

    /// ln q(v₁, v₂).
    pub fn ln_pdf(&self, v1: f64, v2: f64) -> Result<f64> {
        self.validate()?;
        check_interior("v1", v1)?;
        check_interior("v2", v2)?;
        Ok(self.ln_pdf_raw(clamp(v1), clamp(v2)))
    }

    /// ∂Q/∂v₁, the conditional CDF of V₂ given V₁ = v₁.
    pub fn partial_v1(&self, v1: f64, v2: f64) -> Result<f64> {
        self.validate()?;
        check_interior("v1", v1)?;
        check_unit("v2", v2)?;
        Ok(self.partial_raw(v1, v2))
    }

    /// ∂Q/∂v₂, the conditional CDF of V₁ given V₂ = v₂.
    pub fn partial_v2(&self, v1: f64, v2: f64) -> Result<f64> {
        self.partial_v1(v2, v1)
    }

    /// The `v₂` solving `∂Q/∂v₁(v₁, v₂) = p`.
    pub fn conditional_inverse(&self, v1: f64, p: f64) -> Result<f64> {
        self.validate()?;
        check_interior("v1", v1)?;
        check_interior("p", p)?;
        self.inverse_raw(clamp(v1), p)
    }

    /// Draw one pair by the conditional distribution method.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        self.validate()?;
        let v1: f64 = rng.sample(Open01);
        let p: f64 = rng.sample(Open01);
        Ok((v1, self.inverse_raw(v1, p)?))
    }

    pub(crate) fn cdf_raw(&self, v1: f64, v2: f64) -> f64 {
        if v1 <= 0.0 || v2 <= 0.0 {
            return 0.0;
        }
        if v1 >= 1.0 {
            return v2.min(1.0);
        }
        if v2 >= 1.0 {
            return v1;
        }
        match *self {
            CopulaFamily::Independence => v1 * v2,
            CopulaFamily::Gumbel { alpha } => (-gumbel_a(alpha, v1, v2).1).exp(),
            CopulaFamily::Frank { alpha } => {
                let e1 = (-alpha * v1).exp_m1();
                let e2 = (-alpha * v2).exp_m1();
                let d = (-alpha).exp_m1();
                let t = e1 * e2 / d;
                if t > -0.5 {
                    -t.ln_1p() / alpha
                } else {
                    -(frank_denominator(alpha, v1, v2) / d).ln() / alpha
                }
            }
            CopulaFamily::Joe { alpha } => -(JoeTerms::new(alpha, v1, v2).ln_s / alpha).exp_m1(),
            CopulaFamily::Clayton { alpha } => {
                let ln_s = clayton_ln_s(-alpha * v1.ln(), -alpha * v2.ln());
                (-ln_s / alpha).exp()
            }
            CopulaFamily::Student { rho, dof } => student_cdf(rho, dof, v1, v2),
        }
    }

    /// Natural log of the density; arguments must already be interior.
    pub(crate) fn ln_pdf_raw(&self, v1: f64, v2: f64) -> f64 {
        match *self {
            CopulaFamily::Independence => 0.0,
            CopulaFamily::Gumbel { alpha } => {
                let x = -v1.ln();
                let y = -v2.ln();
                let (ln_a, a) = gumbel_a(alpha, v1, v2);
                let am1 = alpha - 1.0;
                -a + x + y + am1 * (x.ln() + y.ln() - 2.0 * ln_a) + (am1 / a).ln_1p()
            }
            CopulaFamily::Frank { alpha } => {
                let d = (-alpha).exp_m1();
                (-alpha * d).ln() - alpha * (v1 + v2) - 2.0 * frank_denominator(alpha, v1, v2).abs().ln()
            }
            CopulaFamily::Joe { alpha } => {
                let j = JoeTerms::new(alpha, v1, v2);
                (alpha - 1.0) * (j.ln_u1 + j.ln_u2) + (1.0 / alpha - 2.0) * j.ln_s + (alpha - 1.0 + j.s).ln()
            }
            CopulaFamily::Clayton { alpha } => {
                let l1 = -alpha * v1.ln();
                let l2 = -alpha * v2.ln();
                let ln_s = clayton_ln_s(l1, l2);
                alpha.ln_1p() + (1.0 + 1.0 / alpha) * (l1 + l2) - (1.0 / alpha + 2.0) * ln_s
            }
            CopulaFamily::Student { rho, dof } => {
                let t = StudentT::new_unchecked(dof);
                let x1 = t.quantile(v1);
                let x2 = t.quantile(v2);
                let r2 = 1.0 - rho * rho;
                let qf = (x1 * x1 - 2.0 * rho * x1 * x2 + x2 * x2) / (dof * r2);
                ln_gamma(0.5 * dof + 1.0) - ln_gamma(0.5 * dof) - (dof * PI).ln() - 0.5 * r2.ln()
                    - 0.5 * (dof + 2.0) * qf.ln_1p()
                    - t.ln_pdf(x1)
                    - t.ln_pdf(x2)
            }
        }
    }

    /// ∂Q/∂v₁ with the boundary policy applied.
    pub(crate) fn partial_raw(&self, v1: f64, v2: f64) -> f64 {
        if v2 >= 1.0 {
            return 1.0;
        }
        if v2 <= 0.0 {
            return 0.0;
        }
        let v1 = clamp(v1);
        let v2 = clamp(v2);
        let h = match *self {
            CopulaFamily::Independence => v2,
            CopulaFamily::Gumbel { alpha } => {
                let x = -v1.ln();
                let (ln_a, a) = gumbel_a(alpha, v1, v2);
                (-a + x + (alpha - 1.0) * (x.ln() - ln_a)).exp()
            }
            CopulaFamily::Frank { alpha } => {
                (-alpha * v1).exp() * (-alpha * v2).exp_m1() / frank_denominator(alpha, v1, v2)
            }
            CopulaFamily::Joe { alpha } => joe_partial(alpha, v1, v2),
            CopulaFamily::Clayton { alpha } => {
                let l1 = -alpha * v1.ln();
                let l2 = -alpha * v2.ln();
                ((1.0 + 1.0 / alpha) * (l1 - clayton_ln_s(l1, l2))).exp()
            }
            CopulaFamily::Student { rho, dof } => {
                let t = StudentT::new_unchecked(dof);
                let x1 = t.quantile(v1);
                let x2 = t.quantile(v2);
                let scale = ((dof + x1 * x1) * (1.0 - rho * rho) / (dof + 1.0)).sqrt();
                StudentT::new_unchecked(dof + 1.0).cdf((x2 - rho * x1) / scale)
            }
        };
        h.clamp(0.0, 1.0)
    }

    pub(crate) fn inverse_raw(&self, v1: f64, p: f64) -> Result<f64> {
        let v2 = match *self {
            CopulaFamily::Independence => p,
            CopulaFamily::Gumbel { alpha } => gumbel_inverse(alpha, v1, p)?,
            CopulaFamily::Frank { alpha } => {
                let a = (-alpha * v1).exp();
                let d = (-alpha).exp_m1();
                let b = p * d / (p + a * (1.0 - p));
                if b.abs() < 0.5 {
                    -b.ln_1p() / alpha
                } else {
                    // 1 + b = (a(1−p) + p e^{−α}) / (p + a(1−p)), formed in logs
                    let ln_a_q = -alpha * v1 + (-p).ln_1p();
                    let ln_p = p.ln();
                    -(log_add_exp(ln_a_q, ln_p - alpha) - log_add_exp(ln_p, ln_a_q)) / alpha
                }
            }
            CopulaFamily::Joe { alpha } => joe_inverse(alpha, v1, p)?,
            CopulaFamily::Clayton { alpha } => {
                let l1 = -alpha * v1.ln();
                let k = (-alpha / (1.0 + alpha) * p.ln()).exp_m1();
                (-ln_1p_exp(k.ln() + l1) / alpha).exp()
            }
            CopulaFamily::Student { rho, dof } => {
                let t = StudentT::new_unchecked(dof);
                let x1 = t.quantile(v1);
                let scale = ((dof + x1 * x1) * (1.0 - rho * rho) / (dof + 1.0)).sqrt();
                let x2 = rho * x1 + scale * StudentT::new_unchecked(dof + 1.0).quantile(p);
                t.cdf(x2)
            }
        };
        Ok(v2.clamp(0.0, 1.0))
    }

    /// Q, ∂Q/∂v₁, ∂Q/∂v₂ and q at an interior point.
    pub(crate) fn pieces(&self, v1: f64, v2: f64) -> Pieces {
        let v1 = clamp(v1);
        let v2 = clamp(v2);
        match *self {
            CopulaFamily::Independence => Pieces {
                cdf: v1 * v2,
                d1: v2,
                d2: v1,
                pdf: 1.0,
            },
            CopulaFamily::Gumbel { alpha } => {
                let x = -v1.ln();
                let y = -v2.ln();
                let (lx, ly) = (x.ln(), y.ln());
                let (ln_a, a) = gumbel_a(alpha, v1, v2);
                let am1 = alpha - 1.0;
                Pieces {
                    cdf: (-a).exp(),
                    d1: (-a + x + am1 * (lx - ln_a)).exp(),
                    d2: (-a + y + am1 * (ly - ln_a)).exp(),
                    pdf: (-a + x + y + am1 * (lx + ly - 2.0 * ln_a) + (am1 / a).ln_1p()).exp(),
                }
            }
            CopulaFamily::Clayton { alpha } => {
                let l1 = -alpha * v1.ln();
                let l2 = -alpha * v2.ln();
                let ln_s = clayton_ln_s(l1, l2);
                let e = 1.0 + 1.0 / alpha;
                Pieces {
                    cdf: (-ln_s / alpha).exp(),
                    d1: (e * (l1 - ln_s)).exp(),
                    d2: (e * (l2 - ln_s)).exp(),
                    pdf: (alpha.ln_1p() + e * (l1 + l2) - (1.0 / alpha + 2.0) * ln_s).exp(),
                }
            }
            CopulaFamily::Joe { alpha } => {
                let j = JoeTerms::new(alpha, v1, v2);
                let (am1, k) = (alpha - 1.0, 1.0 / alpha - 1.0);
                Pieces {
                    cdf: -(j.ln_s / alpha).exp_m1(),
                    d1: (am1 * j.ln_u1 + k * j.ln_s).exp() * j.one_minus_b,
                    d2: (am1 * j.ln_u2 + k * j.ln_s).exp() * j.one_minus_a,
                    pdf: (am1 * (j.ln_u1 + j.ln_u2) + (k - 1.0) * j.ln_s + (am1 + j.s).ln()).exp(),
                }
            }
            _ => Pieces {
                cdf: self.cdf_raw(v1, v2),
                d1: self.partial_raw(v1, v2),
                d2: self.partial_raw(v2, v1),
                pdf: self.ln_pdf_raw(v1, v2).exp(),
            },
        }
    }
}

fn clamp(v: f64) -> f64 {
    v.clamp(BOUNDARY_EPS, 1.0 - BOUNDARY_EPS)
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} is outside [0, 1]")))
    }
}

fn check_interior(name: &str, v: f64) -> Result<()> {
    check_unit(name, v)?;
    if v == 0.0 || v == 1.0 {
        return Err(Error::Boundary(format!("{name} = {v} lies on the boundary")));
    }
    Ok(())
}

/// `(ln A, A)` with `A = ((−ln v₁)^α + (−ln v₂)^α)^{1/α}`.
fn gumbel_a(alpha: f64, v1: f64, v2: f64) -> (f64, f64) {
    let lx = (-v1.ln()).ln();
    let ly = (-v2.ln()).ln();
    let ln_a = log_add_exp(alpha * lx, alpha * ly) / alpha;
    (ln_a, ln_a.exp())
}

/// Solves `x·expm1(δ) + (α−1)δ + ln p = 0` for `δ = ln(A/x)`, then recovers `v₂`.
fn gumbel_inverse(alpha: f64, v1: f64, p: f64) -> Result<f64> {
    let x = -v1.ln();
    let ln_p = p.ln();
    let am1 = alpha - 1.0;
    let hi = if am1 > 0.0 {
        (-ln_p / am1).min((-ln_p / x).ln_1p())
    } else {
        (-ln_p / x).ln_1p()
    };
    let delta = if am1 == 0.0 {
        hi
    } else {
        newton_bracketed(
            |d| {
                let e = d.exp_m1();
                (x * e + am1 * d + ln_p, x * (e + 1.0) + am1)
            },
            0.0,
            hi,
            hi,
            1e-15,
            INVERSE_MAX_ITER,
        )?
    };
    let ad = alpha * delta;
    let y = if ad > 30.0 {
        (x.ln() + (ad + (-(-ad).exp()).ln_1p()) / alpha).exp()
    } else {
        x * ad.exp_m1().powf(1.0 / alpha)
    };
    Ok((-y).exp())
}

/// `e^{−α} − 1 + (e^{−αv₁} − 1)(e^{−αv₂} − 1)` as a sum of two terms of equal sign.
fn frank_denominator(alpha: f64, v1: f64, v2: f64) -> f64 {
    (-alpha * v1).exp() * (-alpha * v2).exp_m1() + (-alpha * v2).exp() * (-alpha * (1.0 - v2)).exp_m1()
}

/// Shared quantities of the Joe copula with `S = a + b − ab`, `a = (1−v₁)^α`,
/// `b = (1−v₂)^α`.
struct JoeTerms {
    ln_u1: f64,
    ln_u2: f64,
    one_minus_a: f64,
    one_minus_b: f64,
    s: f64,
    ln_s: f64,
}

impl JoeTerms {
    fn new(alpha: f64, v1: f64, v2: f64) -> Self {
        let ln_u1 = (-v1).ln_1p();
        let ln_u2 = (-v2).ln_1p();
        let a = (alpha * ln_u1).exp();
        let b = (alpha * ln_u2).exp();
        let one_minus_a = -(alpha * ln_u1).exp_m1();
        let one_minus_b = -(alpha * ln_u2).exp_m1();
        // a + b(1−a) is exact for small S, 1 − (1−a)(1−b) for S near one
        let direct = a + b * one_minus_a;
        let (s, ln_s) = if direct < 0.5 {
            (direct, direct.ln())
        } else {
            let c = one_minus_a * one_minus_b;
            (1.0 - c, (-c).ln_1p())
        };
        Self {
            ln_u1,
            ln_u2,
            one_minus_a,
            one_minus_b,
            s,
            ln_s,
        }
    }
}

fn joe_partial(alpha: f64, v1: f64, v2: f64) -> f64 {
    let j = JoeTerms::new(alpha, v1, v2);
    ((alpha - 1.0) * j.ln_u1 + (1.0 / alpha - 1.0) * j.ln_s).exp() * j.one_minus_b
}

/// Works in `z = −ln((1−v₂)^α)`, where the log conditional CDF is increasing.
fn joe_inverse(alpha: f64, v1: f64, p: f64) -> Result<f64> {
    if alpha == 1.0 {
        return Ok(p);
    }
    let ln_u1 = (-v1).ln_1p();
    let a = (alpha * ln_u1).exp();
    let ln_p = p.ln();
    let k = 1.0 / alpha - 1.0;
    let g = |z: f64| {
        let w = (-z).exp();
        let s = a + w * (1.0 - a);
        let val = (alpha - 1.0) * ln_u1 + (-(-z).exp_m1()).ln() + k * s.ln() - ln_p;
        let der = 1.0 / z.exp_m1() - k * w * (1.0 - a) / s;
        (val, der)
    };
    let mut hi = 1.0;
    while g(hi).0 < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Ok(1.0);
        }
    }
    let mut lo = hi * 0.5;
    while g(lo).0 > 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Ok(0.0);
        }
    }
    let z = newton_bracketed(g, lo, hi, 0.5 * (lo + hi), 1e-15, INVERSE_MAX_ITER)?;
    Ok(-(-z / alpha).exp_m1())
}

/// `ln(v₁^{−α} + v₂^{−α} − 1)` from `Lᵢ = −α ln vᵢ`.
fn clayton_ln_s(l1: f64, l2: f64) -> f64 {
    let (hi, lo) = if l1 >= l2 { (l1, l2) } else { (l2, l1) };
    hi + ((-hi).exp() * lo.exp_m1()).ln_1p()
}

/// Student copula CDF by quadrature of the conditional form over the first
/// coordinate, after `s = √m·tan φ` and a power map removing the endpoint
/// singularity at φ = −π/2.
fn student_cdf(rho: f64, dof: f64, v1: f64, v2: f64) -> f64 {
    let t = StudentT::new_unchecked(dof);
    let t1 = StudentT::new_unchecked(dof + 1.0);
    let x1 = t.quantile(v1);
    let x2 = t.quantile(v2);
    let sm = dof.sqrt();
    let phi1 = (x1 / sm).atan();
    let span = phi1 + FRAC_PI_2;
    let k = (1.0 / dof).max(1.0);
    let ln_k0 = ln_gamma(0.5 * (dof + 1.0)) - ln_gamma(0.5 * dof) - 0.5 * PI.ln();
    let r2 = 1.0 - rho * rho;
    let integrand = |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        let psi = span * w.powf(k);
        let phi = psi - FRAC_PI_2;
        let s = sm * phi.tan();
        let dpsi = span * k * w.powf(k - 1.0);
        let weight = (ln_k0 + (dof - 1.0) * psi.sin().ln()).exp();
        let scale = ((dof + s * s) * r2 / (dof + 1.0)).sqrt();
        weight * dpsi * t1.cdf((x2 - rho * s) / scale)
    };
    let (val, _) = quad::integrate(integrand, 0.0, 1.0, 1e-13);
    val.clamp((v1 + v2 - 1.0).max(0.0), v1.min(v2))
}
