//! Monte Carlo estimation of the warden's detection errors.
//!
//! The radiometer statistic is `T = (1/N) Σ |z_k|²` over a block of `N`
//! complex circular Gaussian samples of total variance `s` per sample, so
//! `T ~ Gamma(N, s/N)`. The fast path draws `T` directly; the per-sample path
//! draws every `z_k` and is kept for cross-checking.
//!
//! Every block uses its own counter-based stream (`seed`, block index), so
//! results do not depend on the number of threads or on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::detection::{DetectionError, MixedStrategy};
use crate::model::ActionSpace;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Detection(#[from] DetectionError),
    #[error("block count must be positive")]
    NoBlocks,
    #[error("invalid sampling parameters: {0}")]
    Parameters(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// Noise and jamming only.
    H0,
    /// Transmission present.
    H1,
}

/// Per-sample variance seen by the warden.
pub fn warden_variance(h: Hypothesis, power: f64, jam: f64, sigma_w_sq: f64) -> f64 {
    match h {
        Hypothesis::H0 => sigma_w_sq + jam,
        Hypothesis::H1 => power + sigma_w_sq + jam,
    }
}

/// Random stream for one block.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Draws the statistic of one block directly from its Gamma law.
pub fn sample_statistic<R: Rng + ?Sized>(rng: &mut R, n: u32, variance: f64) -> Result<f64, SimError> {
    let shape = f64::from(n);
    let g = Gamma::new(shape, variance / shape)
        .map_err(|e| SimError::Parameters(format!("n={n}, variance={variance}: {e}")))?;
    Ok(g.sample(rng))
}

/// Draws the statistic of one block sample by sample: each `z_k` is the sum
/// of independent signal, noise and jamming components with the given
/// variances.
pub fn sample_statistic_per_sample<R: Rng + ?Sized>(rng: &mut R, n: u32, variances: &[f64]) -> f64 {
    let mut acc = 0.0;
    for _ in 0..n {
        let (mut re, mut im) = (0.0, 0.0);
        for &v in variances {
            let sd = (v / 2.0).sqrt();
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            re += sd * a;
            im += sd * b;
        }
        acc += re * re + im * im;
    }
    acc / f64::from(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub false_alarms: u64,
    pub misses: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDetection {
    pub pfa_hat: f64,
    pub pm_hat: f64,
    pub blocks: u64,
    pub seed: u64,
    pub counts: Counts,
}

impl EmpiricalDetection {
    pub fn dep_hat(&self) -> f64 {
        self.pfa_hat + self.pm_hat
    }

    pub fn pfa_stderr(&self) -> f64 {
        binomial_stderr(self.pfa_hat, self.blocks)
    }

    pub fn pm_stderr(&self) -> f64 {
        binomial_stderr(self.pm_hat, self.blocks)
    }
}

fn binomial_stderr(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn sample_index<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // rounding left u above the running sum; fall back to the last atom
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Estimates `P_FA` and `P_M` when the transmitter side plays `joint` over the
/// rows of `space` and the warden plays `thr` over its thresholds. Each block
/// draws an action pair and one statistic under each hypothesis.
pub fn estimate_detection(
    space: &ActionSpace,
    joint: &MixedStrategy,
    thr: &MixedStrategy,
    blocks: u64,
    seed: u64,
) -> Result<EmpiricalDetection, SimError> {
    if blocks == 0 {
        return Err(SimError::NoBlocks);
    }
    joint.check_len(space.row_count(), "joint strategy")?;
    thr.check_len(space.col_count(), "threshold strategy")?;
    let s = space.scenario();
    let (n, sw) = (s.blocklength_n, s.sigma_w_sq);
    let rows = space.rows();
    let thresholds = space.thresholds();

    let counts = (0..blocks)
        .into_par_iter()
        .map(|b| -> Result<Counts, SimError> {
            let mut rng = block_rng(seed, b);
            let a = &rows[sample_index(&mut rng, joint.probs())];
            let t = thresholds[sample_index(&mut rng, thr.probs())];
            let t0 = sample_statistic(&mut rng, n, warden_variance(Hypothesis::H0, a.power, a.jam, sw))?;
            let t1 = sample_statistic(&mut rng, n, warden_variance(Hypothesis::H1, a.power, a.jam, sw))?;
            Ok(Counts { false_alarms: u64::from(t0 >= t), misses: u64::from(t1 < t) })
        })
        .try_reduce(Counts::default, |x, y| {
            Ok(Counts { false_alarms: x.false_alarms + y.false_alarms, misses: x.misses + y.misses })
        })?;

    Ok(EmpiricalDetection {
        pfa_hat: counts.false_alarms as f64 / blocks as f64,
        pm_hat: counts.misses as f64 / blocks as f64,
        blocks,
        seed,
        counts,
    })
}
