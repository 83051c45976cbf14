//! The largest-claim copula `C(u₁, u₂) = L_Λ(−ln Q(v₁, v₂))`.
//!
//! With `P` the generating function of Λ and `vᵢ = P⁻¹(uᵢ)`, the copula is
//! `C = P(Q(v₁, v₂))` and its density is
//! `c = (P″(Q) Q₁Q₂ + P′(Q) q) / (P′(v₁) P′(v₂))`.
//! The per-model closed forms below are this expression simplified; the
//! generic assembly from `L′` and `L″` is kept as an independent path.

use serde::{Deserialize, Serialize};

use crate::copulas::{CopulaFamily, FamilyKind, BOUNDARY_EPS};
use crate::error::{Error, Result};
use crate::mixing::{MixingLaw, MixingModel};

/// A base copula mixed over a claim-count law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureCopula {
    pub base: CopulaFamily,
    pub mixing: MixingLaw,
}

impl MixtureCopula {
    pub fn new(base: CopulaFamily, mixing: MixingLaw) -> Result<Self> {
        base.validate()?;
        mixing.validate()?;
        Ok(Self { base, mixing })
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.mixing.validate()
    }

    /// C(u₁, u₂).
    pub fn cdf(&self, u1: f64, u2: f64) -> Result<f64> {
        self.validate()?;
        check_unit("u1", u1)?;
        check_unit("u2", u2)?;
        if u1 == 0.0 || u2 == 0.0 {
            return Ok(0.0);
        }
        if u1 == 1.0 {
            return Ok(u2);
        }
        if u2 == 1.0 {
            return Ok(u1);
        }
        let v1 = self.mixing.pgf_inverse(u1)?;
        let v2 = self.mixing.pgf_inverse(u2)?;
        Ok(self.mixing.pgf(self.base.cdf_raw(v1, v2)))
    }

    /// Density of C, from the per-model closed form.
    pub fn pdf(&self, u1: f64, u2: f64) -> Result<f64> {
        Ok(self.loglik_terms(u1, u2)?.exp())
    }

    /// ln c(u₁, u₂) from the simplified per-model expressions.
    pub fn loglik_terms(&self, u1: f64, u2: f64) -> Result<f64> {
        self.validate()?;
        check_interior("u1", u1)?;
        check_interior("u2", u2)?;
        self.ln_pdf_raw(u1, u2)
    }

    pub(crate) fn ln_pdf_raw(&self, u1: f64, u2: f64) -> Result<f64> {
        let v1 = self.mixing.pgf_inverse(u1)?.clamp(BOUNDARY_EPS, 1.0 - BOUNDARY_EPS);
        let v2 = self.mixing.pgf_inverse(u2)?.clamp(BOUNDARY_EPS, 1.0 - BOUNDARY_EPS);
        let p = self.base.pieces(v1, v2);
        if !(p.cdf > 0.0) {
            return Err(Error::Boundary(format!(
                "base copula underflows at v = ({v1}, {v2})"
            )));
        }
        let (q, q1, q2, dens) = (p.cdf, p.d1, p.d2, p.pdf);
        let value = match self.mixing {
            MixingLaw::ShiftedGeometric { theta } => {
                let b = 1.0 - theta;
                let d1 = 1.0 - b * v1;
                let d2 = 1.0 - b * v2;
                let dq = 1.0 - b * q;
                let w = dq * dens + 2.0 * b * q1 * q2;
                2.0 * (d1.ln() + d2.ln()) - theta.ln() - 3.0 * dq.ln() + w.ln()
            }
            MixingLaw::ShiftedPoisson { theta } => {
                let w = (1.0 + theta * q) * dens + theta * (2.0 + theta * q) * q1 * q2;
                theta * (q + 1.0 - v1 - v2) - (theta * v1).ln_1p() - (theta * v2).ln_1p() + w.ln()
            }
            MixingLaw::TruncatedPoisson { theta } => {
                (-(-theta).exp_m1()).ln() - theta.ln()
                    + theta * (1.0 - v1 - v2 + q)
                    + (theta * q1 * q2 + dens).ln()
            }
        };
        Ok(value)
    }

    /// Density assembled from `L′`, `L″`, the base pieces and `∂v/∂u`.
    pub fn pdf_generic(&self, u1: f64, u2: f64) -> Result<f64> {
        self.validate()?;
        check_interior("u1", u1)?;
        check_interior("u2", u2)?;
        let law = &self.mixing;
        let v1 = law.v_transform(u1)?;
        let v2 = law.v_transform(u2)?;
        let q = self.base.cdf(v1, v2)?;
        if !(q > 0.0) {
            return Err(Error::Boundary("base copula underflows".into()));
        }
        let q1 = self.base.partial_v1(v1, v2)?;
        let q2 = self.base.partial_v2(v1, v2)?;
        let dens = self.base.pdf(v1, v2)?;
        let t = -q.ln();
        let l1 = law.laplace_d1(t)?;
        let l2 = law.laplace_d2(t)?;
        let dv1 = -v1 / law.laplace_d1(-v1.ln())?;
        let dv2 = -v2 / law.laplace_d1(-v2.ln())?;
        Ok(dv1 * dv2 / (q * q) * ((l1 + l2) * q1 * q2 - l1 * q * dens))
    }

    /// ∂C/∂u₁.
    pub fn partial_u1(&self, u1: f64, u2: f64) -> Result<f64> {
        self.partial_u2(u2, u1)
    }

    /// ∂C/∂u₂, the conditional CDF of U₁ given U₂ = u₂.
    pub fn partial_u2(&self, u1: f64, u2: f64) -> Result<f64> {
        self.validate()?;
        check_unit("u1", u1)?;
        check_interior("u2", u2)?;
        self.partial_u2_raw(u1, u2)
    }

    pub(crate) fn partial_u2_raw(&self, u1: f64, u2: f64) -> Result<f64> {
        if u1 >= 1.0 {
            return Ok(1.0);
        }
        if u1 <= 0.0 {
            return Ok(0.0);
        }
        let v1 = self.mixing.pgf_inverse(u1)?;
        let v2 = self.mixing.pgf_inverse(u2)?.clamp(BOUNDARY_EPS, 1.0 - BOUNDARY_EPS);
        let q = self.base.cdf_raw(v1, v2);
        let q2 = self.base.partial_raw(v2, v1);
        Ok((self.mixing.pgf_d1(q) * q2 / self.mixing.pgf_d1(v2)).clamp(0.0, 1.0))
    }

    /// Joint df of the largest claims, `F(x, y) = L_Λ(−ln G(x, y))` with
    /// `G(x, y) = Q(G₁(x), G₂(y))` the df of a single claim pair.
    pub fn mixture_df<F1, F2>(&self, g1: F1, g2: F2, x: f64, y: f64) -> Result<f64>
    where
        F1: Fn(f64) -> f64,
        F2: Fn(f64) -> f64,
    {
        self.validate()?;
        let a = g1(x);
        let b = g2(y);
        check_unit("G1(x)", a)?;
        check_unit("G2(y)", b)?;
        Ok(self.mixing.pgf(self.base.cdf_raw(a, b)))
    }

    /// d-variate copula `L_Λ(−ln Q(v₁, …, v_d))` for the exchangeable
    /// Gumbel and Clayton extensions and independence.
    pub fn cdf_multivariate(&self, u: &[f64]) -> Result<f64> {
        self.validate()?;
        if u.len() < 2 {
            return Err(Error::Domain("dimension must be at least 2".into()));
        }
        for (i, &ui) in u.iter().enumerate() {
            check_unit(&format!("u[{i}]"), ui)?;
        }
        if !matches!(
            self.base.kind(),
            FamilyKind::Gumbel | FamilyKind::Clayton | FamilyKind::Independence
        ) {
            return Err(Error::Unsupported(format!(
                "no d-variate extension for the {} family",
                self.base.kind()
            )));
        }
        if u.contains(&0.0) {
            return Ok(0.0);
        }
        let v: Vec<f64> = u
            .iter()
            .map(|&ui| self.mixing.pgf_inverse(ui))
            .collect::<Result<_>>()?;
        let q = match self.base {
            CopulaFamily::Independence => v.iter().product(),
            CopulaFamily::Gumbel { alpha } => {
                let s: f64 = v.iter().map(|&vi| (-vi.ln()).powf(alpha)).sum();
                (-s.powf(1.0 / alpha)).exp()
            }
            CopulaFamily::Clayton { alpha } => {
                let s: f64 = v.iter().map(|&vi| (-alpha * vi.ln()).exp_m1()).sum();
                (-(s.ln_1p()) / alpha).exp()
            }
            _ => unreachable!("family support checked above"),
        };
        Ok(self.mixing.pgf(q))
    }
}

/// `F*(x, y) = P(N = 0) + P(N ≥ 1) F(x, y)`: the df of the maxima when the
/// claim count N may be zero and `F` is the df given at least one claim.
pub fn compound_df(p_zero: f64, f: f64) -> f64 {
    p_zero + (1.0 - p_zero) * f
}

/// A copula model: a bare base copula or a base mixed over a count law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CopulaModel {
    Base { base: CopulaFamily },
    Mixture { mixture: MixtureCopula },
}

impl CopulaModel {
    pub fn base(&self) -> CopulaFamily {
        match self {
            CopulaModel::Base { base } => *base,
            CopulaModel::Mixture { mixture } => mixture.base,
        }
    }

    pub fn mixing(&self) -> Option<MixingLaw> {
        match self {
            CopulaModel::Base { .. } => None,
            CopulaModel::Mixture { mixture } => Some(mixture.mixing),
        }
    }

    pub fn mixing_model(&self) -> Option<MixingModel> {
        self.mixing().map(|m| m.model())
    }

    /// Number of free parameters (mixing θ plus base parameters).
    pub fn n_params(&self) -> usize {
        self.base().kind().n_params() + usize::from(self.mixing().is_some())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CopulaModel::Base { base } => base.validate(),
            CopulaModel::Mixture { mixture } => mixture.validate(),
        }
    }

    pub fn cdf(&self, u1: f64, u2: f64) -> Result<f64> {
        match self {
            CopulaModel::Base { base } => base.cdf(u1, u2),
            CopulaModel::Mixture { mixture } => mixture.cdf(u1, u2),
        }
    }

    pub fn ln_pdf(&self, u1: f64, u2: f64) -> Result<f64> {
        match self {
            CopulaModel::Base { base } => base.ln_pdf(u1, u2),
            CopulaModel::Mixture { mixture } => mixture.loglik_terms(u1, u2),
        }
    }

    pub fn partial_u2(&self, u1: f64, u2: f64) -> Result<f64> {
        match self {
            CopulaModel::Base { base } => base.partial_v2(u1, u2),
            CopulaModel::Mixture { mixture } => mixture.partial_u2(u1, u2),
        }
    }

    /// ln c with parameters assumed valid and arguments interior.
    pub(crate) fn ln_pdf_raw(&self, u1: f64, u2: f64) -> Result<f64> {
        match self {
            CopulaModel::Base { base } => Ok(base.ln_pdf_raw(
                u1.clamp(BOUNDARY_EPS, 1.0 - BOUNDARY_EPS),
                u2.clamp(BOUNDARY_EPS, 1.0 - BOUNDARY_EPS),
            )),
            CopulaModel::Mixture { mixture } => mixture.ln_pdf_raw(u1, u2),
        }
    }

    pub(crate) fn partial_u2_raw(&self, u1: f64, u2: f64) -> Result<f64> {
        match self {
            CopulaModel::Base { base } => Ok(base.partial_raw(u2, u1)),
            CopulaModel::Mixture { mixture } => mixture.partial_u2_raw(u1, u2),
        }
    }
}

impl From<CopulaFamily> for CopulaModel {
    fn from(base: CopulaFamily) -> Self {
        CopulaModel::Base { base }
    }
}

impl From<MixtureCopula> for CopulaModel {
    fn from(mixture: MixtureCopula) -> Self {
        CopulaModel::Mixture { mixture }
    }
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
