//! Pseudo-maximum-likelihood fitting on rank-based margins, a right-censored
//! variant, and AIC ranking over a grid of models.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copulas::{CopulaFamily, FamilyKind};
use crate::dependence::average_ranks;
use crate::error::{Error, Result};
use crate::mixing::{MixingLaw, MixingModel};
use crate::mixture::{CopulaModel, MixtureCopula};
use crate::optimize::{halton, nelder_mead, Minimum, SimplexOptions, PENALTY};

/// Smallest sample accepted for fitting.
pub const MIN_OBSERVATIONS: usize = 10;

/// Observations per chunk of the parallel likelihood sum.
const CHUNK: usize = 2048;

/// Reported lower bound for parameters attracted to zero.
pub const PARAM_FLOOR: f64 = 1e-4;

/// Copula-scale observations, optionally with censoring indicators for the
/// first coordinate (`true` = fully observed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoObservations {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub delta: Option<Vec<bool>>,
}

impl PseudoObservations {
    pub fn new(u1: Vec<f64>, u2: Vec<f64>, delta: Option<Vec<bool>>) -> Result<Self> {
        if u1.len() != u2.len() || delta.as_ref().is_some_and(|d| d.len() != u1.len()) {
            return Err(Error::Domain("observation vectors differ in length".into()));
        }
        if u1.len() < MIN_OBSERVATIONS {
            return Err(Error::InsufficientData(format!(
                "need at least {MIN_OBSERVATIONS} observations, got {}",
                u1.len()
            )));
        }
        if u1.iter().chain(&u2).any(|&u| !(u > 0.0 && u < 1.0)) {
            return Err(Error::Domain("pseudo-observations must lie strictly inside (0,1)".into()));
        }
        Ok(Self { u1, u2, delta })
    }

    pub fn len(&self) -> usize {
        self.u1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u1.is_empty()
    }

    pub fn n_censored(&self) -> usize {
        self.delta.as_ref().map_or(0, |d| d.iter().filter(|&&o| !o).count())
    }
}

fn check_raw(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_OBSERVATIONS} observations, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Domain("input contains NaN".into()));
    }
    Ok(())
}

fn scaled_ranks(v: &[f64]) -> Vec<f64> {
    let scale = (v.len() + 1) as f64;
    average_ranks(v).into_iter().map(|r| r / scale).collect()
}

/// Average ranks divided by `n + 1` in each coordinate.
pub fn pseudo_observations(x: &[f64], y: &[f64]) -> Result<PseudoObservations> {
    check_raw(x, y)?;
    PseudoObservations::new(scaled_ranks(x), scaled_ranks(y), None)
}

/// Kaplan–Meier margin for the right-censored first coordinate and the
/// empirical margin for the second, both rescaled by `n/(n+1)`.
///
/// Observations are processed in sorted order with events before censorings
/// at equal values; tied values then share the average of their product-limit
/// values, which reduces to average ranks without censoring. A censored value
/// below every event has estimate zero and is placed at `1/(2(n+1))`.
pub fn km_pseudo_observations(x: &[f64], y: &[f64], delta: &[bool]) -> Result<PseudoObservations> {
    check_raw(x, y)?;
    if delta.len() != x.len() {
        return Err(Error::Domain("censoring indicators differ in length".into()));
    }
    if !delta.iter().any(|&d| d) {
        return Err(Error::InsufficientData("every observation is censored".into()));
    }
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(delta[b].cmp(&delta[a])));
    let mut g = vec![0.0; n];
    let mut survival = 1.0;
    for (k, &i) in idx.iter().enumerate() {
        if delta[i] {
            survival *= 1.0 - 1.0 / (n - k) as f64;
        }
        g[k] = 1.0 - survival;
    }
    let scale = n as f64 / (n + 1) as f64;
    let floor = 0.5 / (n + 1) as f64;
    let mut u1 = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        let mean = g[start..end].iter().sum::<f64>() / (end - start) as f64;
        let u = (scale * mean).max(floor);
        for &i in &idx[start..end] {
            u1[i] = u;
        }
        start = end;
    }
    PseudoObservations::new(u1, scaled_ranks(y), Some(delta.to_vec()))
}

/// Options shared by the fitting routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub starts: u32,
    pub simplex: SimplexOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            starts: 5,
            simplex: SimplexOptions::default(),
        }
    }
}

/// Fitted model with its likelihood summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: FamilyKind,
    pub mixing: Option<MixingModel>,
    pub theta: Option<f64>,
    /// First base parameter (ρ for Student), absent for independence.
    pub alpha: Option<f64>,
    /// Student degrees of freedom.
    pub m: Option<f64>,
    pub loglik: f64,
    pub aic: f64,
    pub n_params: usize,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    /// Rebuild the fitted copula.
    pub fn model(&self) -> Result<CopulaModel> {
        let params: Vec<f64> = self.alpha.into_iter().chain(self.m).collect();
        let base = CopulaFamily::from_kind(self.family, &params)?;
        match (self.mixing, self.theta) {
            (Some(model), Some(theta)) => {
                Ok(MixtureCopula::new(base, MixingLaw::new(model, theta)?)?.into())
            }
            _ => Ok(base.into()),
        }
    }

    pub fn label(&self) -> String {
        match self.mixing {
            Some(m) => format!("{}/{}", self.family, m),
            None => self.family.to_string(),
        }
    }
}

/// `2k − 2·loglik`.
pub fn aic(loglik: f64, n_params: usize) -> f64 {
    2.0 * n_params as f64 - 2.0 * loglik
}

#[derive(Debug, Clone, Copy)]
enum Map {
    /// `x = shift + e^z`
    Log { shift: f64 },
    /// `x = lo + (hi − lo)/(1 + e^{−z})`
    Logit { lo: f64, hi: f64 },
    Linear,
}

/// One optimizer coordinate: a map to the natural scale, the clamp on `z`,
/// and the natural-scale range for start points.
#[derive(Debug, Clone, Copy)]
struct Coord {
    map: Map,
    z_min: f64,
    z_max: f64,
    start_lo: f64,
    start_hi: f64,
}

impl Coord {
    fn log(shift: f64, min: f64, max: f64, start: (f64, f64)) -> Self {
        let map = Map::Log { shift };
        Coord {
            map,
            z_min: (min - shift).ln(),
            z_max: (max - shift).ln(),
            start_lo: start.0,
            start_hi: start.1,
        }
    }

    fn logit(lo: f64, hi: f64, min: f64, z_max: f64, start: (f64, f64)) -> Self {
        let mut c = Coord {
            map: Map::Logit { lo, hi },
            z_min: 0.0,
            z_max,
            start_lo: start.0,
            start_hi: start.1,
        };
        c.z_min = c.to_z(min);
        c
    }

    fn to_x(&self, z: f64) -> f64 {
        let z = z.clamp(self.z_min, self.z_max);
        match self.map {
            Map::Log { shift } => shift + z.exp(),
            Map::Logit { lo, hi } => lo + (hi - lo) / (1.0 + (-z).exp()),
            Map::Linear => z,
        }
    }

    fn to_z(&self, x: f64) -> f64 {
        match self.map {
            Map::Log { shift } => (x - shift).ln(),
            Map::Logit { lo, hi } => {
                let p = (x - lo) / (hi - lo);
                (p / (1.0 - p)).ln()
            }
            Map::Linear => x,
        }
    }
}

fn base_coords(kind: FamilyKind) -> Vec<Coord> {
    match kind {
        FamilyKind::Independence => vec![],
        FamilyKind::Gumbel | FamilyKind::Joe => vec![Coord::log(1.0, 1.0 + 1e-8, 100.0, (1.1, 5.0))],
        FamilyKind::Clayton => vec![Coord::log(0.0, PARAM_FLOOR, 100.0, (0.2, 8.0))],
        FamilyKind::Frank => vec![Coord {
            map: Map::Linear,
            z_min: -100.0,
            z_max: 100.0,
            start_lo: -8.0,
            start_hi: 12.0,
        }],
        FamilyKind::Student => vec![
            Coord::logit(-1.0, 1.0, -1.0 + 1e-8, 18.0, (-0.7, 0.9)),
            Coord::log(0.0, 0.5, 200.0, (2.0, 30.0)),
        ],
    }
}

fn theta_coord(model: MixingModel) -> Coord {
    match model {
        MixingModel::ShiftedGeometric => Coord::logit(0.0, 1.0, PARAM_FLOOR, 20.0, (0.05, 0.95)),
        MixingModel::ShiftedPoisson => Coord::log(0.0, PARAM_FLOOR, 1e4, (0.05, 5.0)),
        MixingModel::TruncatedPoisson => Coord::log(0.0, PARAM_FLOOR, 1e4, (0.1, 5.0)),
    }
}

/// A model specification: base family and optional mixing law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: FamilyKind,
    pub mixing: Option<MixingModel>,
}

impl ModelSpec {
    pub fn new(family: FamilyKind, mixing: Option<MixingModel>) -> Self {
        Self { family, mixing }
    }

    fn coords(&self) -> Vec<Coord> {
        let mut c = base_coords(self.family);
        c.extend(self.mixing.map(theta_coord));
        c
    }

    fn build(&self, params: &[f64]) -> Result<CopulaModel> {
        let k = self.family.n_params();
        let base = CopulaFamily::from_kind(self.family, &params[..k])?;
        match self.mixing {
            Some(m) => Ok(MixtureCopula::new(base, MixingLaw::new(m, params[k])?)?.into()),
            None => Ok(base.into()),
        }
    }
}

fn chunked_sum<F>(obs: &PseudoObservations, term: F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    let parts: Vec<Result<f64>> = (0..obs.len().div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut s = 0.0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(obs.len()) {
                s += term(i)?;
            }
            Ok(s)
        })
        .collect();
    let mut total = 0.0;
    for p in parts {
        total += p?;
    }
    Ok(total)
}

/// Pseudo log-likelihood `Σ ln c(u₁ᵢ, u₂ᵢ)`, ignoring censoring indicators.
pub fn pml_loglik(obs: &PseudoObservations, model: &CopulaModel) -> Result<f64> {
    model.validate()?;
    chunked_sum(obs, |i| model.ln_pdf_raw(obs.u1[i], obs.u2[i]))
}

/// Censored pseudo log-likelihood: censored rows contribute
/// `ln(1 − ∂C/∂u₂)` at the censoring point.
pub fn censored_loglik(obs: &PseudoObservations, model: &CopulaModel) -> Result<f64> {
    model.validate()?;
    let delta = obs
        .delta
        .as_ref()
        .ok_or_else(|| Error::Domain("censored likelihood needs censoring indicators".into()))?;
    chunked_sum(obs, |i| {
        if delta[i] {
            model.ln_pdf_raw(obs.u1[i], obs.u2[i])
        } else {
            Ok((1.0 - model.partial_u2_raw(obs.u1[i], obs.u2[i])?).ln())
        }
    })
}

fn fit_spec(
    obs: &PseudoObservations,
    spec: ModelSpec,
    censored: bool,
    opts: &FitOptions,
) -> Result<FitResult> {
    let coords = spec.coords();
    let dim = coords.len();
    let natural = |z: &[f64]| -> Vec<f64> { coords.iter().zip(z).map(|(c, &z)| c.to_x(z)).collect() };
    let objective = |z: &[f64]| -> f64 {
        let Ok(model) = spec.build(&natural(z)) else {
            return PENALTY;
        };
        let ll = if censored {
            censored_loglik(obs, &model)
        } else {
            pml_loglik(obs, &model)
        };
        match ll {
            Ok(v) if v.is_finite() => -v,
            _ => PENALTY,
        }
    };
    let starts = if dim == 0 { 1 } else { opts.starts.max(1) };
    let runs: Vec<_> = (1..=starts)
        .into_par_iter()
        .map(|s| {
            let h = halton(s, dim);
            let z0: Vec<f64> = coords
                .iter()
                .zip(&h)
                .map(|(c, &u)| {
                    let (a, b) = (c.to_z(c.start_lo), c.to_z(c.start_hi));
                    a + u * (b - a)
                })
                .collect();
            nelder_mead(objective, &z0, &opts.simplex)
        })
        .collect();

    let best = best_of(runs.iter().filter(|m| m.converged && m.value < PENALTY));
    let Some(best) = best else {
        let any = best_of(runs.iter()).expect("at least one start");
        return Err(Error::Optimization {
            message: format!("no start converged for {}", spec_label(&spec)),
            best_point: natural(&any.point),
            best_value: -any.value,
        });
    };
    let params = natural(&best.point);
    let loglik = -best.value;
    let k = spec.family.n_params();
    let n_params = dim;
    Ok(FitResult {
        family: spec.family,
        mixing: spec.mixing,
        theta: spec.mixing.map(|_| params[k]),
        alpha: (k >= 1).then(|| params[0]),
        m: (k == 2).then(|| params[1]),
        loglik,
        aic: aic(loglik, n_params),
        n_params,
        converged: best.converged,
        iterations: best.iterations,
    })
}

/// Lowest objective, earliest start on ties.
fn best_of<'a>(pool: impl Iterator<Item = &'a Minimum>) -> Option<&'a Minimum> {
    pool.fold(None, |best: Option<&Minimum>, m| match best {
        Some(b) if b.value <= m.value => Some(b),
        _ => Some(m),
    })
}

fn spec_label(spec: &ModelSpec) -> String {
    match spec.mixing {
        Some(m) => format!("{}/{}", spec.family, m),
        None => spec.family.to_string(),
    }
}

/// Maximize the pseudo log-likelihood over the parameters of `family` mixed by `mixing`.
pub fn pml_fit(
    obs: &PseudoObservations,
    family: FamilyKind,
    mixing: Option<MixingModel>,
    opts: &FitOptions,
) -> Result<FitResult> {
    if obs.n_censored() > 0 {
        return Err(Error::Domain(
            "observations are censored; use the censored fit".into(),
        ));
    }
    fit_spec(obs, ModelSpec::new(family, mixing), false, opts)
}

/// Maximize the censored pseudo log-likelihood.
pub fn censored_pml_fit(
    obs: &PseudoObservations,
    family: FamilyKind,
    mixing: Option<MixingModel>,
    opts: &FitOptions,
) -> Result<FitResult> {
    if obs.delta.is_none() {
        return Err(Error::Domain("censored fit needs censoring indicators".into()));
    }
    fit_spec(obs, ModelSpec::new(family, mixing), true, opts)
}

/// A grid cell whose fit failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFailure {
    pub family: FamilyKind,
    pub mixing: Option<MixingModel>,
    pub message: String,
}

/// Grid fits sorted by ascending AIC, with failed cells listed separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFit {
    pub fits: Vec<FitResult>,
    pub failures: Vec<GridFailure>,
}

/// Fit every family with every mixing model and each family without mixing.
///
/// The censored likelihood is used when censoring indicators are present.
pub fn model_grid_fit(
    obs: &PseudoObservations,
    families: &[FamilyKind],
    mixings: &[MixingModel],
    opts: &FitOptions,
) -> Result<GridFit> {
    if families.is_empty() {
        return Err(Error::InsufficientData("empty model grid".into()));
    }
    let censored = obs.delta.is_some();
    let mut specs = Vec::new();
    for &f in families {
        specs.extend(mixings.iter().map(|&m| ModelSpec::new(f, Some(m))));
        specs.push(ModelSpec::new(f, None));
    }
    let results: Vec<Result<FitResult>> =
        specs.par_iter().map(|&s| fit_spec(obs, s, censored, opts)).collect();
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for (spec, r) in specs.into_iter().zip(results) {
        match r {
            Ok(f) => fits.push(f),
            Err(e) => failures.push(GridFailure {
                family: spec.family,
                mixing: spec.mixing,
                message: e.to_string(),
            }),
        }
    }
    fits.sort_by(|a, b| a.aic.total_cmp(&b.aic));
    Ok(GridFit { fits, failures })
}

#[derive(Serialize)]
struct FitRow<'a> {
    family: &'a str,
    mixing: &'a str,
    theta: Option<f64>,
    alpha: Option<f64>,
    m: Option<f64>,
    loglik: f64,
    aic: f64,
    converged: bool,
}

/// Write fits as CSV with header `family,mixing,theta,alpha,m,loglik,aic,converged`.
pub fn write_fits_csv<W: Write>(fits: &[FitResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for f in fits {
        w.serialize(FitRow {
            family: f.family.name(),
            mixing: f.mixing.map_or("none", |m| m.name()),
            theta: f.theta,
            alpha: f.alpha,
            m: f.m,
            loglik: f.loglik,
            aic: f.aic,
            converged: f.converged,
        })?;
    }
    w.flush()?;
    Ok(())
}
