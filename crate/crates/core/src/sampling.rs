//! Exact simulation from mixture copulas by componentwise maxima of base pairs.
//!
//! Output is split into fixed-size blocks, each drawn from its own substream,
//! so results do not depend on the number of worker threads.

use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copulas::CopulaFamily;
use crate::error::{Error, Result};
use crate::margins::Margin;
use crate::mixing::CountSampler;
use crate::mixture::{CopulaModel, MixtureCopula};

/// Number of output pairs drawn from one substream.
pub const BLOCK_LEN: usize = 1024;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A reproducible random stream identified by a master seed and a stream index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededStream {
    pub seed: u64,
    pub index: u64,
}

impl SeededStream {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    /// ChaCha8 keyed by the seed, positioned on stream `index`.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }

    /// The `k`-th child stream; children of distinct streams use distinct keys.
    pub fn child(&self, k: u64) -> SeededStream {
        SeededStream {
            seed: splitmix64(self.seed ^ splitmix64(self.index.wrapping_add(GOLDEN))),
            index: k,
        }
    }
}

/// Streaming componentwise maximum of `count` base pairs, mapped back through
/// the generating function.
///
/// A new pair can only raise the second maximum when its conditional level
/// exceeds `∂Q/∂v₁(U₁, M₂)`, so the inversion runs only in that case.
fn draw_one<R: Rng + ?Sized>(
    base: &CopulaFamily,
    count: u64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let (mut m1, mut m2) = (0.0f64, 0.0f64);
    for _ in 0..count {
        let v1: f64 = rng.sample(Open01);
        let w: f64 = rng.sample(Open01);
        if w > base.partial_raw(v1, m2) {
            m2 = m2.max(base.inverse_raw(v1, w)?);
        }
        m1 = m1.max(v1);
    }
    Ok((m1, m2))
}

fn run_blocks<F>(n: usize, stream: SeededStream, block: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&mut ChaCha8Rng, usize, &mut Vec<(f64, f64)>) -> Result<()> + Sync,
{
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    let n_blocks = n.div_ceil(BLOCK_LEN);
    let parts: Vec<Result<Vec<(f64, f64)>>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let len = BLOCK_LEN.min(n - b * BLOCK_LEN);
            let mut rng = stream.child(b as u64).rng();
            let mut out = Vec::with_capacity(len);
            block(&mut rng, len, &mut out)?;
            Ok(out)
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

/// Draw `n` pairs from the mixture copula.
///
/// The first `k` pairs of a larger draw with the same stream equal a draw of size `k`.
pub fn sample_mixture(mc: &MixtureCopula, n: usize, stream: SeededStream) -> Result<Vec<(f64, f64)>> {
    mc.validate()?;
    let counts: CountSampler = mc.mixing.sampler()?;
    let base = mc.base;
    let mixing = mc.mixing;
    run_blocks(n, stream, |rng, len, out| {
        for _ in 0..len {
            let lambda = counts.sample(rng);
            let (m1, m2) = draw_one(&base, lambda, rng)?;
            out.push((mixing.pgf(m1), mixing.pgf(m2)));
        }
        Ok(())
    })
}

/// Draw `n` pairs from a base copula by conditional inversion.
pub fn sample_base(base: &CopulaFamily, n: usize, stream: SeededStream) -> Result<Vec<(f64, f64)>> {
    base.validate()?;
    run_blocks(n, stream, |rng, len, out| {
        for _ in 0..len {
            out.push(base.sample_pair(rng)?);
        }
        Ok(())
    })
}

/// Draws single pairs from a copula model with a caller-supplied generator.
#[derive(Debug, Clone)]
pub struct PairSampler {
    model: CopulaModel,
    counts: Option<CountSampler>,
}

impl PairSampler {
    pub fn new(model: &CopulaModel) -> Result<Self> {
        model.validate()?;
        let counts = model.mixing().map(|m| m.sampler()).transpose()?;
        Ok(Self { model: *model, counts })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        match (&self.model, &self.counts) {
            (CopulaModel::Mixture { mixture }, Some(counts)) => {
                let lambda = counts.sample(rng);
                let (m1, m2) = draw_one(&mixture.base, lambda, rng)?;
                Ok((mixture.mixing.pgf(m1), mixture.mixing.pgf(m2)))
            }
            _ => self.model.base().sample_pair(rng),
        }
    }
}

/// Draw `n` pairs from either model kind.
pub fn sample_model(model: &CopulaModel, n: usize, stream: SeededStream) -> Result<Vec<(f64, f64)>> {
    match model {
        CopulaModel::Base { base } => sample_base(base, n, stream),
        CopulaModel::Mixture { mixture } => sample_mixture(mixture, n, stream),
    }
}

/// Copula-coupled claim pairs on the original scale via the inverse method.
pub fn sample_claims(
    mc: &MixtureCopula,
    margins: (&Margin, &Margin),
    n: usize,
    stream: SeededStream,
) -> Result<Vec<(f64, f64)>> {
    Ok(to_claims(&sample_mixture(mc, n, stream)?, margins))
}

/// Apply marginal quantile functions to copula-scale pairs.
pub fn to_claims(pairs: &[(f64, f64)], margins: (&Margin, &Margin)) -> Vec<(f64, f64)> {
    pairs
        .iter()
        .map(|&(u1, u2)| (margins.0.quantile(u1), margins.1.quantile(u2)))
        .collect()
}
