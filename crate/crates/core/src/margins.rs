//! Univariate claim-size margins used to map copula samples to currency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A continuous or empirical univariate distribution with a quantile function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Margin {
    Uniform,
    /// Pareto type I: `F(x) = 1 − (σ/x)^a` for `x ≥ σ`.
    Pareto { scale: f64, shape: f64 },
    Empirical(EmpiricalMargin),
}

impl Margin {
    pub fn pareto(scale: f64, shape: f64) -> Result<Self> {
        if !(scale > 0.0 && shape > 0.0 && scale.is_finite() && shape.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "pareto margin needs positive scale and shape (got {scale}, {shape})"
            )));
        }
        Ok(Margin::Pareto { scale, shape })
    }

    pub fn empirical(data: &[f64]) -> Result<Self> {
        Ok(Margin::Empirical(EmpiricalMargin::new(data)?))
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Margin::Uniform => u,
            Margin::Pareto { scale, shape } => scale * (-(-u).ln_1p() / shape).exp(),
            Margin::Empirical(e) => e.quantile(u),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Margin::Uniform => x.clamp(0.0, 1.0),
            Margin::Pareto { scale, shape } => {
                if x <= *scale {
                    0.0
                } else {
                    -(shape * (scale / x).ln()).exp_m1()
                }
            }
            Margin::Empirical(e) => e.cdf(x),
        }
    }

    /// Expected value; infinite for Pareto shapes at or below one.
    pub fn mean(&self) -> f64 {
        match self {
            Margin::Uniform => 0.5,
            Margin::Pareto { scale, shape } => {
                if *shape > 1.0 {
                    scale * shape / (shape - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            Margin::Empirical(e) => e.mean(),
        }
    }
}

/// Empirical distribution with the left-continuous generalized inverse
/// `F⁻¹(u) = inf{x : F̂(x) ≥ u}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMargin {
    sorted: Vec<f64>,
}

impl EmpiricalMargin {
    pub fn new(data: &[f64]) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InsufficientData("empirical margin needs at least one value".into()));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("empirical margin data must be finite".into()));
        }
        let mut sorted = data.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.sorted.len();
        let k = (u * n as f64).ceil() as usize;
        self.sorted[k.clamp(1, n) - 1]
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len() as f64
    }
}
