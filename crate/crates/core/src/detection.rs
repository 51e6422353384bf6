//! Analytic false-alarm and missed-detection probabilities of the energy
//! detector under mixed strategies.
//!
//! Under H0 the detector statistic is Gamma(N, (σ_w² + J) / N); under H1 the
//! scale is (P + σ_w² + J) / N. A threshold `t` therefore false-alarms with
//! probability `Q(N, N t / (σ_w² + J))` and misses with probability
//! `1 - Q(N, N t / (P + σ_w² + J))`.
//!
//! The no-jammer model is the special case of a jamming grid `{0}`.

use thiserror::Error;

use crate::model::ActionSpace;
use crate::specfun::{reg_gamma_p, reg_gamma_q, SpecFunError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectionError {
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("{what} has {got} entries, expected {expected}")]
    Dimension { what: &'static str, got: usize, expected: usize },
    #[error("invalid mixed strategy: {0}")]
    Strategy(String),
    #[error("invalid detection cell: {0}")]
    Cell(String),
}

/// Probability vector over an indexed action set.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    probs: Vec<f64>,
}

impl MixedStrategy {
    pub const SUM_TOL: f64 = 1e-9;

    /// Validates nonnegativity and unit sum (within [`Self::SUM_TOL`]).
    pub fn new(probs: Vec<f64>) -> Result<Self, DetectionError> {
        if probs.is_empty() {
            return Err(DetectionError::Strategy("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(DetectionError::Strategy(format!("entry {p} is not a probability")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOL {
            return Err(DetectionError::Strategy(format!("entries sum to {sum}")));
        }
        Ok(MixedStrategy { probs })
    }

    /// Clamps negative round-off to zero and rescales to unit sum. Fails if
    /// nothing positive is left.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self, DetectionError> {
        let clamped: Vec<f64> = weights.iter().map(|w| w.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(DetectionError::Strategy(format!("weights sum to {total}")));
        }
        MixedStrategy::new(clamped.into_iter().map(|w| w / total).collect())
    }

    pub fn point_mass(len: usize, index: usize) -> Self {
        assert!(index < len, "point mass index {index} out of {len}");
        let mut probs = vec![0.0; len];
        probs[index] = 1.0;
        MixedStrategy { probs }
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0);
        MixedStrategy { probs: vec![1.0 / len as f64; len] }
    }

    /// `w * a + (1 - w) * b`.
    pub fn mix(a: &Self, b: &Self, w: f64) -> Result<Self, DetectionError> {
        b.check_len(a.len(), "mixed strategy")?;
        let probs = a.probs.iter().zip(&b.probs).map(|(x, y)| w * x + (1.0 - w) * y).collect();
        MixedStrategy::new(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Indices whose probability exceeds `floor`.
    pub fn support(&self, floor: f64) -> Vec<usize> {
        (0..self.probs.len()).filter(|&i| self.probs[i] > floor).collect()
    }

    pub fn check_len(&self, expected: usize, what: &'static str) -> Result<(), DetectionError> {
        if self.probs.len() != expected {
            return Err(DetectionError::Dimension { what, got: self.probs.len(), expected });
        }
        Ok(())
    }
}

fn check_cell(jam: f64, threshold: f64, sigma_w_sq: f64) -> Result<(), DetectionError> {
    if !(jam.is_finite() && jam >= 0.0) {
        return Err(DetectionError::Cell(format!("jamming power {jam}")));
    }
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(DetectionError::Cell(format!("threshold {threshold}")));
    }
    if !(sigma_w_sq.is_finite() && sigma_w_sq > 0.0) {
        return Err(DetectionError::Cell(format!("noise variance {sigma_w_sq}")));
    }
    Ok(())
}

/// False-alarm probability of threshold `threshold` against jamming power `jam`.
pub fn pfa_cell(jam: f64, threshold: f64, n: u32, sigma_w_sq: f64) -> Result<f64, DetectionError> {
    check_cell(jam, threshold, sigma_w_sq)?;
    Ok(reg_gamma_q(n, f64::from(n) * threshold / (sigma_w_sq + jam))?)
}

/// Missed-detection probability of threshold `threshold` when transmitting
/// at `power` with jamming power `jam`.
pub fn pm_cell(power: f64, jam: f64, threshold: f64, n: u32, sigma_w_sq: f64) -> Result<f64, DetectionError> {
    check_cell(jam, threshold, sigma_w_sq)?;
    if !(power.is_finite() && power > 0.0) {
        return Err(DetectionError::Cell(format!("transmit power {power}")));
    }
    Ok(reg_gamma_p(n, f64::from(n) * threshold / (power + sigma_w_sq + jam))?)
}

/// Detection error `pfa_cell + pm_cell` of one (action, threshold) pair.
pub fn dep_cell(power: f64, jam: f64, threshold: f64, n: u32, sigma_w_sq: f64) -> Result<f64, DetectionError> {
    Ok(pfa_cell(jam, threshold, n, sigma_w_sq)? + pm_cell(power, jam, threshold, n, sigma_w_sq)?)
}

fn bilinear<F>(space: &ActionSpace, joint: &MixedStrategy, thr: &MixedStrategy, cell: F) -> Result<f64, DetectionError>
where
    F: Fn(f64, f64, f64) -> Result<f64, DetectionError>,
{
    joint.check_len(space.row_count(), "joint strategy")?;
    thr.check_len(space.col_count(), "threshold strategy")?;
    let mut total = 0.0;
    for (a, &pa) in space.rows().iter().zip(joint.probs()) {
        if pa == 0.0 {
            continue;
        }
        for (&t, &pt) in space.thresholds().iter().zip(thr.probs()) {
            if pt == 0.0 {
                continue;
            }
            total += cell(a.power, a.jam, t)? * pa * pt;
        }
    }
    Ok(total)
}

/// False-alarm probability under a joint (P, J) strategy and a threshold
/// strategy. Only the J-marginal of `joint` matters.
pub fn pfa(space: &ActionSpace, joint: &MixedStrategy, thr: &MixedStrategy) -> Result<f64, DetectionError> {
    let s = space.scenario();
    bilinear(space, joint, thr, |_, jam, t| pfa_cell(jam, t, s.blocklength_n, s.sigma_w_sq))
}

/// Missed-detection probability under a joint strategy and threshold strategy.
pub fn pm(space: &ActionSpace, joint: &MixedStrategy, thr: &MixedStrategy) -> Result<f64, DetectionError> {
    let s = space.scenario();
    bilinear(space, joint, thr, |p, jam, t| pm_cell(p, jam, t, s.blocklength_n, s.sigma_w_sq))
}

/// Per-cell detection errors for every (row action, threshold) pair,
/// row-major. False-alarm terms are shared across powers with the same
/// jamming level and computed once per (J, t).
pub fn dep_table(space: &ActionSpace) -> Result<Vec<f64>, DetectionError> {
    use rayon::prelude::*;

    let s = space.scenario();
    let (n, sw) = (s.blocklength_n, s.sigma_w_sq);
    let thresholds = space.thresholds();
    let pfa_by_jam: Vec<Vec<f64>> = s
        .jam_grid
        .par_iter()
        .map(|&jam| thresholds.iter().map(|&t| pfa_cell(jam, t, n, sw)).collect())
        .collect::<Result<_, _>>()?;
    let rows: Vec<Vec<f64>> = space
        .rows()
        .par_iter()
        .map(|a| {
            thresholds
                .iter()
                .zip(&pfa_by_jam[a.jam_index])
                .map(|(&t, &fa)| Ok(fa + pm_cell(a.power, a.jam, t, n, sw)?))
                .collect::<Result<Vec<f64>, DetectionError>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(rows.concat())
}
