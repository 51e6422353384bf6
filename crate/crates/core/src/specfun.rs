//! Scalar special functions: the regularized upper incomplete gamma function
//! for integer shape, log-factorials and the Gaussian tail function with its
//! inverse.

use std::f64::consts::{PI, SQRT_2};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("incomplete gamma shape must be >= 1 (got {0})")]
    Shape(u32),
    #[error("incomplete gamma argument must be finite and >= 0 (got {0})")]
    Argument(f64),
    #[error("probability must lie strictly inside (0, 1) (got {0})")]
    Probability(f64),
}

/// Exact factorials 0! ..= 20!, all representable in an f64 without rounding
/// up to 18! and within half an ulp beyond.
const FACTORIALS: [f64; 21] = [
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362880.0,
    3628800.0,
    39916800.0,
    479001600.0,
    6227020800.0,
    87178291200.0,
    1307674368000.0,
    20922789888000.0,
    355687428096000.0,
    6402373705728000.0,
    121645100408832000.0,
    2432902008176640000.0,
];

/// Remainder of Stirling's series, `ln k! - (k ln k - k + ln(2 pi k) / 2)`.
/// Accurate to below 1e-17 for k > 20.
fn stirling_remainder(k: f64) -> f64 {
    let r = 1.0 / k;
    let r2 = r * r;
    r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0))))
}

/// Natural logarithm of `k!`.
pub fn ln_factorial(k: u32) -> f64 {
    if (k as usize) < FACTORIALS.len() {
        return FACTORIALS[k as usize].ln();
    }
    let kf = f64::from(k);
    kf * kf.ln() - kf + 0.5 * (2.0 * PI * kf).ln() + stirling_remainder(kf)
}

/// `ln Γ(n)` for a positive integer `n`.
pub fn ln_gamma_int(n: u32) -> Result<f64, SpecFunError> {
    if n == 0 {
        return Err(SpecFunError::Shape(n));
    }
    Ok(ln_factorial(n - 1))
}

/// Log of the Poisson mass `x^k e^{-x} / k!`.
///
/// The large terms `k ln x` and `x` are combined as `k ln(x/k) + (k - x)` so
/// the result keeps full relative precision near the mode, where `x ≈ k`.
pub fn ln_poisson_term(k: u32, x: f64) -> f64 {
    if k == 0 {
        return -x;
    }
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    let kf = f64::from(k);
    if (k as usize) < FACTORIALS.len() {
        return kf * x.ln() - x - FACTORIALS[k as usize].ln();
    }
    kf * ((x - kf) / kf).ln_1p() + (kf - x) - 0.5 * (2.0 * PI * kf).ln() - stirling_remainder(kf)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Regularized upper incomplete gamma function `Q(n, x) = Γ(n, x) / Γ(n)` for
/// integer shape `n`.
///
/// `Q(n, x)` is the Poisson(x) mass on `0..n` and `P(n, x) = 1 - Q(n, x)` the
/// mass on `n..`. Whichever side lies away from the Poisson mode is summed
/// directly, relative to its largest term and with compensated summation;
/// the other side is its complement. Both functions are therefore accurate
/// to an ulp in absolute terms and the small tail keeps its relative accuracy.
pub fn reg_gamma_q(shape_n: u32, x: f64) -> Result<f64, SpecFunError> {
    gamma_tails(shape_n, x).map(|t| t.1)
}

/// Regularized lower incomplete gamma `P(n, x) = 1 - Q(n, x)`.
pub fn reg_gamma_p(shape_n: u32, x: f64) -> Result<f64, SpecFunError> {
    gamma_tails(shape_n, x).map(|t| t.0)
}

fn gamma_tails(shape_n: u32, x: f64) -> Result<(f64, f64), SpecFunError> {
    if shape_n == 0 {
        return Err(SpecFunError::Shape(shape_n));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(SpecFunError::Argument(x));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x >= f64::from(shape_n) {
        let q = poisson_head(shape_n - 1, x);
        Ok((1.0 - q, q))
    } else {
        let p = poisson_tail(shape_n, x);
        Ok((p, 1.0 - p))
    }
}

/// Scales a sum of term ratios by the reference term `exp(ln_ref)`.
fn finish(ln_ref: f64, acc: CompensatedSum) -> f64 {
    (ln_ref + acc.value().ln()).exp().clamp(0.0, 1.0)
}

const CUTOFF: f64 = 1e-18;

/// Poisson(x) mass on `0..=top`, for `x >= top + 1`, where the largest term
/// is `k = top` and terms shrink downwards.
fn poisson_head(top: u32, x: f64) -> f64 {
    let ln_ref = ln_poisson_term(top, x);
    if ln_ref < -800.0 {
        return 0.0;
    }
    let mut acc = CompensatedSum::default();
    acc.add(1.0);
    // r_{k-1} = r_k * k / x
    let mut ratio = 1.0;
    let mut k = top;
    while k > 0 {
        ratio *= f64::from(k) / x;
        acc.add(ratio);
        if ratio < CUTOFF * acc.sum {
            break;
        }
        k -= 1;
    }
    finish(ln_ref, acc)
}

/// Poisson(x) mass on `n..`, for `x < n`, where the largest term is `k = n`
/// and terms shrink upwards.
fn poisson_tail(n: u32, x: f64) -> f64 {
    let ln_ref = ln_poisson_term(n, x);
    if ln_ref < -800.0 {
        return 0.0;
    }
    let mut acc = CompensatedSum::default();
    acc.add(1.0);
    // r_{k+1} = r_k * x / (k + 1)
    let mut ratio = 1.0;
    let mut k = f64::from(n);
    loop {
        k += 1.0;
        ratio *= x / k;
        acc.add(ratio);
        if ratio < CUTOFF * acc.sum {
            break;
        }
    }
    finish(ln_ref, acc)
}

/// Gaussian tail probability `Q(x) = P(Z > x)` for a standard normal `Z`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

// Rational approximation of the normal quantile (P. J. Acklam), relative error
// below 1.2e-9 before refinement.
const ACKLAM_A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.38357751867269e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const ACKLAM_B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const ACKLAM_C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549671010229528e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const ACKLAM_D: [f64; 4] = [7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00, 3.754408661907416e+00];
const ACKLAM_LOW: f64 = 0.02425;

/// Initial guess for the lower-tail quantile `Φ^{-1}(p)`.
fn normal_quantile_guess(p: f64) -> f64 {
    let (a, b, c, d) = (ACKLAM_A, ACKLAM_B, ACKLAM_C, ACKLAM_D);
    if p < ACKLAM_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    } else if p <= 1.0 - ACKLAM_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    }
}

/// Inverse Gaussian tail function: returns `x` with `Q(x) = p`.
///
/// A rational initial guess is polished with Halley steps on `erfc`.
pub fn inv_q(p: f64) -> Result<f64, SpecFunError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(SpecFunError::Probability(p));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Work in the lower tail, where Φ(x) = p and Q^{-1}(p) = -x; the symmetric
    // case is handled by reflection so both tails get the same accuracy.
    let (target, sign) = if p < 0.5 { (p, -1.0) } else { (1.0 - p, 1.0) };
    let mut x = normal_quantile_guess(target);
    for _ in 0..2 {
        let e = 0.5 * libm::erfc(-x / SQRT_2) - target;
        let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(sign * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_at_zero_is_one() {
        assert_eq!(reg_gamma_q(200, 0.0).unwrap(), 1.0);
        assert_eq!(reg_gamma_q(1, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn small_shapes_have_closed_forms() {
        let e1 = (-1.0f64).exp();
        assert!((reg_gamma_q(1, 1.0).unwrap() - e1).abs() < 1e-15);
        assert!((reg_gamma_q(2, 1.0).unwrap() - 2.0 * e1).abs() < 1e-15);
        for x in [0.01f64, 0.7, 3.0, 25.0, 300.0] {
            let want = (1.0 + x + 0.5 * x * x) * (-x).exp();
            let got = reg_gamma_q(3, x).unwrap();
            assert!((got - want).abs() < 1e-14, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn domain_errors() {
        assert_eq!(reg_gamma_q(0, 1.0), Err(SpecFunError::Shape(0)));
        assert!(matches!(reg_gamma_q(5, -1e-3), Err(SpecFunError::Argument(_))));
        assert!(matches!(reg_gamma_q(5, f64::NAN), Err(SpecFunError::Argument(_))));
        assert!(matches!(reg_gamma_q(5, f64::INFINITY), Err(SpecFunError::Argument(_))));
        for p in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(inv_q(p).is_err(), "p={p}");
        }
    }

    #[test]
    fn huge_arguments_underflow_to_zero() {
        assert_eq!(reg_gamma_q(200, 1e5).unwrap(), 0.0);
        assert!(reg_gamma_q(2000, 20000.0).unwrap() < 1e-300);
    }

    #[test]
    fn ln_factorial_matches_direct_sum() {
        for k in [0u32, 1, 5, 20, 21, 30, 170, 1999] {
            let direct: f64 = (1..=k).map(|j| f64::from(j).ln()).sum();
            let got = ln_factorial(k);
            assert!((got - direct).abs() <= 1e-12 * direct.max(1.0), "k={k}");
        }
    }

    #[test]
    fn poisson_term_matches_naive_for_moderate_values() {
        for k in [0u32, 3, 19, 20, 21, 60] {
            for x in [0.5, 7.0, 40.0] {
                let naive = f64::from(k) * f64::ln(x) - x - ln_factorial(k);
                assert!((ln_poisson_term(k, x) - naive).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn recurrence_in_shape() {
        for n in 1..=50u32 {
            for &x in &[0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0] {
                let lhs = reg_gamma_q(n + 1, x).unwrap() - reg_gamma_q(n, x).unwrap();
                let rhs = ln_poisson_term(n, x).exp();
                assert!((lhs - rhs).abs() <= 1e-12, "n={n} x={x}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn inv_q_median_and_symmetry() {
        assert_eq!(inv_q(0.5).unwrap(), 0.0);
        for p in [0.01, 0.1, 0.3] {
            let a = inv_q(p).unwrap();
            let b = inv_q(1.0 - p).unwrap();
            assert!((a + b).abs() < 1e-9, "p={p}");
        }
        assert!((inv_q(0.1).unwrap() - 1.2815515655446004).abs() < 1e-9);
    }

    #[test]
    fn inv_q_inverts_q_function() {
        let mut x = -6.0;
        while x <= 6.0 {
            let back = inv_q(q_function(x)).unwrap();
            assert!((back - x).abs() < 1e-8, "x={x} back={back}");
            x += 0.05;
        }
    }
}
