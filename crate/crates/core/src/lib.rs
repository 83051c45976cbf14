//! Largest-claim mixture copulas.
//!
//! A claim-count law Λ ≥ 1 and a base copula Q induce the copula of the
//! componentwise maxima of Λ claim pairs,
//! `C(u₁, u₂) = L_Λ(−ln Q(v₁, v₂))` with `vᵢ = exp(−L_Λ⁻¹(uᵢ))`.
//! This crate evaluates, samples and fits these copulas and runs the
//! actuarial Monte Carlo studies built on them.

pub mod aggregate;
pub mod copulas;
pub mod data;
pub mod dependence;
pub mod error;
pub mod estimation;
pub mod margins;
pub mod mixing;
pub mod mixture;
mod quad;
pub mod optimize;
mod roots;
pub mod sampling;
pub mod special;

pub use aggregate::{CountLaw, PremiumGrid, RiskMeasureTable, Treaty};
pub use copulas::{CopulaFamily, FamilyKind};
pub use error::{Error, Result};
pub use mixing::{MixingLaw, MixingModel};
pub use mixture::{CopulaModel, MixtureCopula};
pub use margins::{EmpiricalMargin, Margin};
pub use sampling::{sample_claims, sample_mixture, SeededStream};
pub use data::{ClaimsDataset, ColumnMapping};
pub use estimation::{FitOptions, FitResult, PseudoObservations};

