//! Collective-model Monte Carlo: influence of the largest claims on the
//! aggregate loss, and excess-of-loss and stop-loss reinsurance premiums.
//!
//! Replication `b` draws its claim count from `stream.child(b).child(0)` and
//! its claim pairs from `stream.child(b).child(1)`, so results do not depend
//! on the worker count and different copulas share claim counts for a seed.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::margins::Margin;
use crate::mixing::{CountSampler, MixingLaw};
use crate::mixture::CopulaModel;
use crate::sampling::{PairSampler, SeededStream};

/// Smallest replication count accepted by [`largest_claim_influence`].
pub const MIN_REPLICATIONS: usize = 100;

/// Law of the number of claims in one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum CountLaw {
    /// Poisson with the given mean; zero claims are possible.
    Poisson { mean: f64 },
    /// A deterministic number of claims.
    Fixed { n: u64 },
    /// One of the mixing laws (at least one claim).
    Mixing { mixing: MixingLaw },
}

impl CountLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            CountLaw::Poisson { mean } if !(mean.is_finite() && *mean >= 0.0) => {
                Err(Error::ParameterDomain(format!("Poisson mean must be finite and non-negative, got {mean}")))
            }
            CountLaw::Mixing { mixing } => mixing.validate(),
            _ => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            CountLaw::Poisson { mean } => *mean,
            CountLaw::Fixed { n } => *n as f64,
            CountLaw::Mixing { mixing } => mixing.mean(),
        }
    }

    fn sampler(&self) -> Result<Counter> {
        self.validate()?;
        Ok(match self {
            CountLaw::Poisson { mean } if *mean == 0.0 => Counter::Fixed(0),
            CountLaw::Poisson { mean } => Counter::Poisson(
                Poisson::new(*mean).map_err(|e| Error::ParameterDomain(e.to_string()))?,
            ),
            CountLaw::Fixed { n } => Counter::Fixed(*n),
            CountLaw::Mixing { mixing } => Counter::Mixing(mixing.sampler()?),
        })
    }
}

impl From<MixingLaw> for CountLaw {
    fn from(mixing: MixingLaw) -> Self {
        CountLaw::Mixing { mixing }
    }
}

enum Counter {
    Poisson(Poisson<f64>),
    Fixed(u64),
    Mixing(CountSampler),
}

impl Counter {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            Counter::Poisson(p) => p.sample(rng) as u64,
            Counter::Fixed(n) => *n,
            Counter::Mixing(s) => s.sample(rng),
        }
    }
}

/// Mean, sample standard deviation, VaR and TVaR at one confidence level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskMeasures {
    pub mean: f64,
    pub std: f64,
    pub var: f64,
    pub tvar: f64,
}

impl RiskMeasures {
    fn zip(self, other: Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            mean: f(self.mean, other.mean),
            std: f(self.std, other.std),
            var: f(self.var, other.var),
            tvar: f(self.tvar, other.tvar),
        }
    }

    fn map(self, f: impl Fn(f64) -> f64) -> Self {
        self.zip(self, |a, _| f(a))
    }
}

/// Risk measures of a sample at confidence `p`.
///
/// VaR is the order statistic of rank ⌈pB⌉ and TVaR the mean of that order
/// statistic and all larger ones.
pub fn risk_measures(sample: &[f64], p: f64) -> Result<RiskMeasures> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("confidence level must lie in (0, 1), got {p}")));
    }
    let n = sample.len();
    let nf = n as f64;
    if n < 2 || nf * (1.0 - p) < 1.0 - 1e-9 {
        return Err(Error::InsufficientData(format!(
            "{n} values are too few for confidence level {p}"
        )));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("sample contains non-finite values".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pn = p * nf;
    let rank = if (pn - pn.round()).abs() <= 1e-9 * nf { pn.round() } else { pn.ceil() };
    let k = (rank as usize).clamp(1, n);
    let mean = sorted.iter().sum::<f64>() / nf;
    let ss = sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    let tail = &sorted[k - 1..];
    Ok(RiskMeasures {
        mean,
        std: (ss / (nf - 1.0)).sqrt(),
        var: sorted[k - 1],
        tvar: tail.iter().sum::<f64>() / tail.len() as f64,
    })
}

/// Largest-claim influence report.
///
/// S_N* sums all claims except the largest of each portfolio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskMeasureTable {
    pub confidence: f64,
    pub replications: usize,
    pub stream: SeededStream,
    /// Aggregate loss S_N.
    pub total: RiskMeasures,
    /// Aggregate loss without the largest claim of each portfolio.
    pub total_without_largest: RiskMeasures,
    /// I* = ρ(S_N) − ρ(S_N*).
    pub influence: RiskMeasures,
    /// I* as a percentage of ρ(S_N).
    pub influence_pct: RiskMeasures,
    /// Covariance allocation of I* to the largest first-portfolio claim.
    pub allocation_x: RiskMeasures,
    /// Covariance allocation of I* to the largest second-portfolio claim.
    pub allocation_y: RiskMeasures,
    /// E[N](E[X] + E[Y]) when both margin means are finite.
    pub expected_total: Option<f64>,
}

/// Simulate `b` periods and collect one record per period.
fn replicate<T, F>(
    model: &CopulaModel,
    margins: (&Margin, &Margin),
    count: &CountLaw,
    b: usize,
    stream: SeededStream,
    record: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[(f64, f64)]) -> T + Sync,
{
    let pairs = PairSampler::new(model)?;
    let counter = count.sampler()?;
    (0..b)
        .into_par_iter()
        .map(|i| {
            let rep = stream.child(i as u64);
            let k = counter.sample(&mut rep.child(0).rng());
            let mut rng = rep.child(1).rng();
            let mut claims = Vec::with_capacity(k as usize);
            for _ in 0..k {
                let (u1, u2) = pairs.sample(&mut rng)?;
                claims.push((margins.0.quantile(u1), margins.1.quantile(u2)));
            }
            Ok(record(&claims))
        })
        .collect()
}

/// Index and value of the first maximum; `(usize::MAX, 0)` when empty.
fn argmax(values: impl Iterator<Item = f64>) -> (usize, f64) {
    values
        .enumerate()
        .fold((usize::MAX, 0.0), |best, (i, v)| if best.0 == usize::MAX || v > best.1 { (i, v) } else { best })
}

/// Influence of the two largest claims on the aggregate loss.
///
/// Claim pairs are drawn from `model` and the number of claims from `count`.
/// The allocation splits I* by cov(X_{N:N}, M_N)/var(M_N) and
/// cov(Y_{N:N}, M_N)/var(M_N) with M_N = X_{N:N} + Y_{N:N}.
pub fn largest_claim_influence(
    model: &CopulaModel,
    margins: (&Margin, &Margin),
    count: &CountLaw,
    b: usize,
    p: f64,
    stream: SeededStream,
) -> Result<RiskMeasureTable> {
    if b < MIN_REPLICATIONS {
        return Err(Error::InsufficientData(format!(
            "at least {MIN_REPLICATIONS} replications are needed, got {b}"
        )));
    }
    let reps = replicate(model, margins, count, b, stream, |claims| {
        let (ix, xm) = argmax(claims.iter().map(|c| c.0));
        let (iy, ym) = argmax(claims.iter().map(|c| c.1));
        let total: f64 = claims.iter().map(|(x, y)| x + y).sum();
        let rest: f64 = claims
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| if i == ix { 0.0 } else { x } + if i == iy { 0.0 } else { y })
            .sum();
        (total, xm, ym, rest)
    })?;
    let s: Vec<f64> = reps.iter().map(|r| r.0).collect();
    let s_star: Vec<f64> = reps.iter().map(|r| r.3).collect();
    let total = risk_measures(&s, p)?;
    let without = risk_measures(&s_star, p)?;
    let influence = total.zip(without, |a, b| a - b);

    let bf = b as f64;
    let mx = reps.iter().map(|r| r.1).sum::<f64>() / bf;
    let my = reps.iter().map(|r| r.2).sum::<f64>() / bf;
    let (mut cxm, mut cym) = (0.0, 0.0);
    for r in &reps {
        let (dx, dy) = (r.1 - mx, r.2 - my);
        cxm += dx * (dx + dy);
        cym += dy * (dx + dy);
    }
    let var_m = cxm + cym;
    if !(var_m > 0.0 && var_m.is_finite()) {
        return Err(Error::AllocationUndefined(
            "the sum of the largest claims has zero variance".into(),
        ));
    }
    let (share_x, share_y) = (cxm / var_m, cym / var_m);
    let expected = count.mean() * (margins.0.mean() + margins.1.mean());
    Ok(RiskMeasureTable {
        confidence: p,
        replications: b,
        stream,
        total,
        total_without_largest: without,
        influence,
        influence_pct: influence.zip(total, |i, t| 100.0 * i / t),
        allocation_x: influence.map(|i| share_x * i),
        allocation_y: influence.map(|i| share_y * i),
        expected_total: expected.is_finite().then_some(expected),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Treaty {
    ExcessOfLoss,
    StopLoss,
}

/// Monte Carlo premiums over a grid of retentions or deductibles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PremiumGrid {
    pub treaty: Treaty,
    pub levels: Vec<f64>,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// E[K]·E[g] with E[g] pooled over all simulated claims (excess of loss only).
    pub two_stage: Option<Vec<f64>>,
    pub replications: usize,
    pub stream: SeededStream,
}

/// Reinsurer's share of one claim under an excess-of-loss treaty with
/// retention `r`; the expense is shared in proportion to the ceded loss.
pub fn excess_of_loss_payment(x: f64, y: f64, r: f64) -> f64 {
    if x <= r {
        0.0
    } else {
        (x - r) + (x - r) / x * y
    }
}

fn check_levels(levels: &[f64], b: usize, strict: bool) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::Domain("no premium levels given".into()));
    }
    if let Some(l) = levels.iter().find(|&&l| !(l.is_finite() && (l > 0.0 || (!strict && l == 0.0)))) {
        return Err(Error::Domain(format!("invalid premium level {l}")));
    }
    if b < 2 {
        return Err(Error::InsufficientData("at least 2 replications are needed".into()));
    }
    Ok(())
}

fn mean_and_se(rows: &[Vec<f64>], j: usize) -> (f64, f64) {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
    let ss = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>();
    (mean, (ss / (n - 1.0) / n).sqrt())
}

fn grid(treaty: Treaty, levels: &[f64], rows: &[Vec<f64>], b: usize, stream: SeededStream) -> PremiumGrid {
    let (estimates, std_errors) = (0..levels.len()).map(|j| mean_and_se(rows, j)).unzip();
    PremiumGrid {
        treaty,
        levels: levels.to_vec(),
        estimates,
        std_errors,
        two_stage: None,
        replications: b,
        stream,
    }
}

/// Excess-of-loss premium κ(r) = E[Σ_{i≤K} g(X_i, Y_i, r)] for each retention.
pub fn excess_of_loss_premium(
    model: &CopulaModel,
    margins: (&Margin, &Margin),
    count: &CountLaw,
    retentions: &[f64],
    b: usize,
    stream: SeededStream,
) -> Result<PremiumGrid> {
    check_levels(retentions, b, true)?;
    let rows = replicate(model, margins, count, b, stream, |claims| {
        let mut row: Vec<f64> = retentions
            .iter()
            .map(|&r| claims.iter().map(|&(x, y)| excess_of_loss_payment(x, y, r)).sum())
            .collect();
        row.push(claims.len() as f64);
        row
    })?;
    let mut out = grid(Treaty::ExcessOfLoss, retentions, &rows, b, stream);
    let claims: f64 = rows.iter().map(|r| r[retentions.len()]).sum();
    if claims > 0.0 {
        let pooled = (0..retentions.len()).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / claims);
        out.two_stage = Some(pooled.map(|g| count.mean() * g).collect());
    }
    Ok(out)
}

/// Stop-loss premium π(d) = E[(Σ_{i≤K}(X_i + Y_i) − d)₊] for each deductible.
pub fn stop_loss_premium(
    model: &CopulaModel,
    margins: (&Margin, &Margin),
    count: &CountLaw,
    deductibles: &[f64],
    b: usize,
    stream: SeededStream,
) -> Result<PremiumGrid> {
    check_levels(deductibles, b, false)?;
    let rows = replicate(model, margins, count, b, stream, |claims| {
        let total: f64 = claims.iter().map(|(x, y)| x + y).sum();
        deductibles.iter().map(|&d| (total - d).max(0.0)).collect()
    })?;
    Ok(grid(Treaty::StopLoss, deductibles, &rows, b, stream))
}
