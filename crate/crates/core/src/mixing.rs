//! Claim-count laws Λ ≥ 1 and their Laplace transforms.
//!
//! With `s = e^{−t}` the Laplace transform is the probability generating
//! function, `L_Λ(t) = P(s) = E[s^Λ]`, so every quantity is computed from
//! closed forms of `P`, `P′` and `P″`:
//!
//! * `L′(t) = −s P′(s)`
//! * `L″(t) = s P′(s) + s² P″(s)`

use std::fmt;
use std::str::FromStr;

use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::{Geometric, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::newton_bracketed;
use crate::special::ln_gamma;

/// Truncated-Poisson sampling switches from the inverse-CDF walk to
/// zero-rejection above this mean.
const TRUNCATED_WALK_MAX_THETA: f64 = 30.0;

/// Mixing model without its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixingModel {
    /// Model A: `P(Λ = k) = θ(1−θ)^{k−1}`.
    ShiftedGeometric,
    /// Model B: `Λ = 1 + Poisson(θ)`.
    ShiftedPoisson,
    /// Model C: `Λ = N | N ≥ 1` with `N ~ Poisson(θ)`.
    TruncatedPoisson,
}

impl MixingModel {
    pub const ALL: [MixingModel; 3] = [
        MixingModel::ShiftedGeometric,
        MixingModel::ShiftedPoisson,
        MixingModel::TruncatedPoisson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MixingModel::ShiftedGeometric => "shifted-geometric",
            MixingModel::ShiftedPoisson => "shifted-poisson",
            MixingModel::TruncatedPoisson => "truncated-poisson",
        }
    }

    /// The law with this model whose mean is `mean` (must exceed 1, or equal
    /// 1 for the models that allow a degenerate law).
    pub fn with_mean(self, mean: f64) -> Result<MixingLaw> {
        if !(mean >= 1.0 && mean.is_finite()) {
            return Err(Error::ParameterDomain(format!("mixing mean must be >= 1 (got {mean})")));
        }
        let law = match self {
            MixingModel::ShiftedGeometric => MixingLaw::ShiftedGeometric { theta: 1.0 / mean },
            MixingModel::ShiftedPoisson => MixingLaw::ShiftedPoisson { theta: mean - 1.0 },
            MixingModel::TruncatedPoisson => {
                if mean <= 1.0 {
                    return Err(Error::ParameterDomain(
                        "a truncated Poisson law has mean strictly above 1".into(),
                    ));
                }
                // θ/(1−e^{−θ}) is increasing; θ lies in (2(mean−1), mean]
                let theta = newton_bracketed(
                    |th| {
                        let q = -(-th).exp_m1();
                        let f = th / q - mean;
                        let df = (q - th * (-th).exp()) / (q * q);
                        (f, df)
                    },
                    0.0,
                    mean,
                    mean,
                    1e-15,
                    200,
                )?;
                MixingLaw::TruncatedPoisson { theta }
            }
        };
        law.validate()?;
        Ok(law)
    }
}

impl fmt::Display for MixingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MixingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" | "geometric" | "shifted-geometric" => Ok(MixingModel::ShiftedGeometric),
            "b" | "poisson" | "shifted-poisson" => Ok(MixingModel::ShiftedPoisson),
            "c" | "truncated" | "truncated-poisson" => Ok(MixingModel::TruncatedPoisson),
            other => Err(Error::Domain(format!("unknown mixing model '{other}'"))),
        }
    }
}

/// A claim-count law Λ with support {1, 2, ...}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum MixingLaw {
    /// θ ∈ (0, 1]; θ = 1 is the point mass at 1.
    ShiftedGeometric { theta: f64 },
    /// θ ≥ 0; θ = 0 is the point mass at 1.
    ShiftedPoisson { theta: f64 },
    /// θ > 0.
    TruncatedPoisson { theta: f64 },
}

impl MixingLaw {
    pub fn new(model: MixingModel, theta: f64) -> Result<Self> {
        let law = match model {
            MixingModel::ShiftedGeometric => MixingLaw::ShiftedGeometric { theta },
            MixingModel::ShiftedPoisson => MixingLaw::ShiftedPoisson { theta },
            MixingModel::TruncatedPoisson => MixingLaw::TruncatedPoisson { theta },
        };
        law.validate()?;
        Ok(law)
    }

    pub fn model(&self) -> MixingModel {
        match self {
            MixingLaw::ShiftedGeometric { .. } => MixingModel::ShiftedGeometric,
            MixingLaw::ShiftedPoisson { .. } => MixingModel::ShiftedPoisson,
            MixingLaw::TruncatedPoisson { .. } => MixingModel::TruncatedPoisson,
        }
    }

    pub fn theta(&self) -> f64 {
        match *self {
            MixingLaw::ShiftedGeometric { theta }
            | MixingLaw::ShiftedPoisson { theta }
            | MixingLaw::TruncatedPoisson { theta } => theta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            MixingLaw::ShiftedGeometric { theta } => theta > 0.0 && theta <= 1.0,
            MixingLaw::ShiftedPoisson { theta } => theta >= 0.0 && theta.is_finite(),
            MixingLaw::TruncatedPoisson { theta } => theta > 0.0 && theta.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ParameterDomain(format!("invalid mixing parameter for {self:?}")))
        }
    }

    /// E[Λ].
    pub fn mean(&self) -> f64 {
        match *self {
            MixingLaw::ShiftedGeometric { theta } => 1.0 / theta,
            MixingLaw::ShiftedPoisson { theta } => 1.0 + theta,
            MixingLaw::TruncatedPoisson { theta } => theta / -(-theta).exp_m1(),
        }
    }

    /// P(Λ = k).
    pub fn pmf(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let kf = k as f64;
        match *self {
            MixingLaw::ShiftedGeometric { theta } => {
                if theta == 1.0 {
                    return if k == 1 { 1.0 } else { 0.0 };
                }
                theta * ((kf - 1.0) * (-theta).ln_1p()).exp()
            }
            MixingLaw::ShiftedPoisson { theta } => {
                if theta == 0.0 {
                    return if k == 1 { 1.0 } else { 0.0 };
                }
                (-theta + (kf - 1.0) * theta.ln() - ln_gamma(kf)).exp()
            }
            MixingLaw::TruncatedPoisson { theta } => {
                (-theta + kf * theta.ln() - ln_gamma(kf + 1.0) - (-(-theta).exp_m1()).ln()).exp()
            }
        }
    }

    /// L_Λ(t) = E[e^{−tΛ}].
    pub fn laplace(&self, t: f64) -> Result<f64> {
        self.validate()?;
        check_t(t)?;
        Ok(self.pgf((-t).exp()))
    }

    /// L′_Λ(t) = −E[Λ e^{−tΛ}].
    pub fn laplace_d1(&self, t: f64) -> Result<f64> {
        self.validate()?;
        check_t(t)?;
        let s = (-t).exp();
        Ok(-s * self.pgf_d1(s))
    }

    /// L″_Λ(t) = E[Λ² e^{−tΛ}].
    pub fn laplace_d2(&self, t: f64) -> Result<f64> {
        self.validate()?;
        check_t(t)?;
        let s = (-t).exp();
        Ok(s * self.pgf_d1(s) + s * s * self.pgf_d2(s))
    }

    /// The `t ≥ 0` with `L_Λ(t) = u`.
    pub fn laplace_inverse(&self, u: f64) -> Result<f64> {
        Ok(-self.v_transform(u)?.ln())
    }

    /// `v = exp(−L_Λ⁻¹(u))`, the inverse of the generating function on [0, 1].
    pub fn v_transform(&self, u: f64) -> Result<f64> {
        self.validate()?;
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Domain(format!("u = {u} is outside (0, 1]")));
        }
        self.pgf_inverse(u)
    }

    /// Draw one value of Λ.
    pub fn sample_count<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        Ok(self.sampler()?.sample(rng))
    }

    /// A sampler with its set-up work done once.
    pub fn sampler(&self) -> Result<CountSampler> {
        self.validate()?;
        let kind = match *self {
            MixingLaw::ShiftedGeometric { theta } if theta == 1.0 => SamplerKind::One,
            MixingLaw::ShiftedPoisson { theta } if theta == 0.0 => SamplerKind::One,
            MixingLaw::ShiftedGeometric { theta } => SamplerKind::Geometric(
                Geometric::new(theta).map_err(|e| Error::ParameterDomain(e.to_string()))?,
            ),
            MixingLaw::ShiftedPoisson { theta } => SamplerKind::ShiftedPoisson(poisson(theta)?),
            MixingLaw::TruncatedPoisson { theta } if theta <= TRUNCATED_WALK_MAX_THETA => {
                SamplerKind::TruncatedWalk {
                    theta,
                    p1: theta * (-theta).exp() / -(-theta).exp_m1(),
                }
            }
            MixingLaw::TruncatedPoisson { theta } => SamplerKind::TruncatedReject(poisson(theta)?),
        };
        Ok(CountSampler { kind })
    }

    /// P(s) = E[s^Λ] for s ∈ [0, 1].
    pub(crate) fn pgf(&self, s: f64) -> f64 {
        match *self {
            MixingLaw::ShiftedGeometric { theta } => theta * s / (1.0 - (1.0 - theta) * s),
            MixingLaw::ShiftedPoisson { theta } => s * (-theta * (1.0 - s)).exp(),
            MixingLaw::TruncatedPoisson { theta } => {
                if theta <= 1.0 {
                    (theta * s).exp_m1() / theta.exp_m1()
                } else {
                    (theta * (s - 1.0)).exp() * (-theta * s).exp_m1() / (-theta).exp_m1()
                }
            }
        }
    }

    pub(crate) fn pgf_d1(&self, s: f64) -> f64 {
        match *self {
            MixingLaw::ShiftedGeometric { theta } => {
                let d = 1.0 - (1.0 - theta) * s;
                theta / (d * d)
            }
            MixingLaw::ShiftedPoisson { theta } => (-theta * (1.0 - s)).exp() * (1.0 + theta * s),
            MixingLaw::TruncatedPoisson { theta } => {
                theta * (theta * (s - 1.0)).exp() / -(-theta).exp_m1()
            }
        }
    }

    pub(crate) fn pgf_d2(&self, s: f64) -> f64 {
        match *self {
            MixingLaw::ShiftedGeometric { theta } => {
                let d = 1.0 - (1.0 - theta) * s;
                2.0 * theta * (1.0 - theta) / (d * d * d)
            }
            MixingLaw::ShiftedPoisson { theta } => {
                theta * (-theta * (1.0 - s)).exp() * (2.0 + theta * s)
            }
            MixingLaw::TruncatedPoisson { theta } => theta * self.pgf_d1(s),
        }
    }

    /// Inverse of the generating function; `u ∈ (0, 1]`.
    pub(crate) fn pgf_inverse(&self, u: f64) -> Result<f64> {
        if u >= 1.0 {
            return Ok(1.0);
        }
        match *self {
            MixingLaw::ShiftedGeometric { theta } => Ok(u / (theta + (1.0 - theta) * u)),
            MixingLaw::ShiftedPoisson { theta } => {
                if theta == 0.0 {
                    return Ok(u);
                }
                // θx·e^{θx} = θu·e^θ, so x = W(θu·e^θ)/θ; an approximate W
                // seeds Newton on ln x + θ(x−1) = ln u
                let ln_u = u.ln();
                let x0 = lambert_w_approx(theta.ln() + ln_u + theta) / theta;
                newton_bracketed(
                    |x| (x.ln() + theta * (x - 1.0) - ln_u, 1.0 / x + theta),
                    u,
                    1.0,
                    x0,
                    1e-15,
                    200,
                )
            }
            MixingLaw::TruncatedPoisson { theta } => {
                let v = if theta <= 1.0 {
                    (u * theta.exp_m1()).ln_1p() / theta
                } else {
                    1.0 + (u * -(-theta).exp_m1() + (-theta).exp()).ln() / theta
                };
                Ok(v.clamp(0.0, 1.0))
            }
        }
    }
}

/// Principal Lambert W at `e^{ln_z}` to about two digits.
fn lambert_w_approx(ln_z: f64) -> f64 {
    if ln_z < 1.0 {
        let l = ln_z.exp().ln_1p();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    } else {
        let l2 = ln_z.ln();
        ln_z - l2 + l2 / ln_z
    }
}

fn check_t(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("Laplace argument t = {t} must be >= 0")))
    }
}

fn poisson(theta: f64) -> Result<Poisson<f64>> {
    Poisson::new(theta).map_err(|e| Error::ParameterDomain(format!("poisson({theta}): {e}")))
}

#[derive(Debug, Clone, Copy)]
enum SamplerKind {
    One,
    Geometric(Geometric),
    ShiftedPoisson(Poisson<f64>),
    TruncatedWalk { theta: f64, p1: f64 },
    TruncatedReject(Poisson<f64>),
}

/// Prepared sampler for a [`MixingLaw`].
#[derive(Debug, Clone, Copy)]
pub struct CountSampler {
    kind: SamplerKind,
}

impl Distribution<u64> for CountSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self.kind {
            SamplerKind::One => 1,
            SamplerKind::Geometric(g) => 1 + g.sample(rng),
            SamplerKind::ShiftedPoisson(p) => 1 + p.sample(rng) as u64,
            SamplerKind::TruncatedWalk { theta, p1 } => {
                let u: f64 = rng.sample(Open01);
                let mut k = 1u64;
                let mut pk = p1;
                let mut cum = p1;
                while cum < u && pk > 0.0 {
                    k += 1;
                    pk *= theta / k as f64;
                    cum += pk;
                }
                k
            }
            SamplerKind::TruncatedReject(p) => loop {
                let k = p.sample(rng) as u64;
                if k >= 1 {
                    break k;
                }
            },
        }
    }
}
