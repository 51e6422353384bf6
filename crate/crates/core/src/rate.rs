//! Finite-blocklength coding rate (normal approximation) and its expectation
//! under a mixed strategy.

use std::f64::consts::LN_2;

use crate::detection::{DetectionError, MixedStrategy};
use crate::model::ActionSpace;
use crate::specfun::inv_q;

/// Normal-approximation rate in bits per channel use:
/// `log2(1 + snr) - sqrt((1 - (1 + snr)^-2) / n) * Q^{-1}(delta) / ln 2`.
///
/// Can be negative for small SNR; callers prune rather than clamp.
///
/// # Panics
///
/// If `delta` is outside (0, 1). Scenarios are validated before any rate is
/// evaluated.
pub fn rbar(snr: f64, blocklength_n: u32, delta: f64) -> f64 {
    let q_inv = inv_q(delta).expect("delta validated to lie in (0, 1)");
    rbar_with_qinv(snr, blocklength_n, q_inv)
}

/// [`rbar`] with `Q^{-1}(delta)` precomputed.
pub fn rbar_with_qinv(snr: f64, blocklength_n: u32, q_inv: f64) -> f64 {
    let dispersion = 1.0 - 1.0 / ((snr + 1.0) * (snr + 1.0));
    snr.ln_1p() / LN_2 - (dispersion / f64::from(blocklength_n)).sqrt() * q_inv / LN_2
}

/// Expected rate `Σ_y rbar(snr_y) π_y` over the rows of `space`.
pub fn expected_rate(space: &ActionSpace, strategy: &MixedStrategy) -> Result<f64, DetectionError> {
    strategy.check_len(space.row_count(), "joint strategy")?;
    Ok(space.row_rates().iter().zip(strategy.probs()).map(|(r, p)| r * p).sum())
}
