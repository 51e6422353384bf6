//! Scenario definition: physical constants, action grids, presets and the
//! negative-rate pruning rule, plus the key-value scenario file format.
//!
//! All powers and variances are linear milliwatts. A noise variance quoted as
//! 0 dB is 1 mW.
//!
//! # Scenario files
//!
//! UTF-8 text, one `key = value` per line. `#` starts a comment. Keys:
//!
//! | key              | value                                   | required |
//! |------------------|-----------------------------------------|----------|
//! | `blocklength_n`  | positive integer                        | yes      |
//! | `sigma_b_sq_mw`  | positive decimal                        | yes      |
//! | `sigma_w_sq_mw`  | positive decimal                        | yes      |
//! | `delta`          | decimal in (0, 1)                       | yes      |
//! | `alpha`          | nonnegative decimal                     | no (0)   |
//! | `beta`           | positive decimal                        | yes      |
//! | `power_grid`     | grid                                    | yes      |
//! | `jam_grid`       | grid                                    | no (`0`) |
//! | `threshold_grid` | grid                                    | yes      |
//!
//! Numbers are ordinary decimal literals (an exponent is allowed). A grid is
//! either a `start:step:stop` triple (stop inclusive) or a comma separated
//! list. Triples take plain decimals with at most 12 fractional digits and
//! are expanded exactly in integer units before conversion, so `0:0.01:3`
//! yields the doubles nearest to `0.00, 0.01, …, 3.00`. Unknown and repeated
//! keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::rate::rbar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{0}")]
    Invalid(String),
    #[error("every action has a negative rate; nothing left to play")]
    AllPruned,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown key `{key}` (line {line})")]
    UnknownKey { line: usize, key: String },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("vectorization index {y} outside 1..={max}")]
    IndexRange { y: usize, max: usize },
}

/// Physical and game parameters of one covert-communication scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub blocklength_n: u32,
    /// Noise variance at Bob, mW.
    pub sigma_b_sq: f64,
    /// Noise variance at Willie, mW.
    pub sigma_w_sq: f64,
    /// Decoding error probability.
    pub delta: f64,
    /// Jammer-to-Bob amplitude gain.
    pub alpha: f64,
    /// Weight on the detection error in the transmitter's payoff.
    pub beta: f64,
    /// Transmit powers, mW.
    pub power_grid: Vec<f64>,
    /// Jamming powers, mW. `[0.0]` means no jammer.
    pub jam_grid: Vec<f64>,
    /// Detection thresholds, mW.
    pub threshold_grid: Vec<f64>,
}

/// Builds the doubles nearest to `start + k * step` for `k = 0..=count`
/// with all arithmetic done in integer units of `10^-decimals`.
pub fn decimal_grid(start: &str, step: &str, stop: &str) -> Result<Vec<f64>, ModelError> {
    let a = Decimal::parse(start)?;
    let s = Decimal::parse(step)?;
    let b = Decimal::parse(stop)?;
    let scale = a.scale.max(s.scale).max(b.scale);
    let (a, s, b) = (a.rescale(scale), s.rescale(scale), b.rescale(scale));
    if s <= 0 {
        return Err(ModelError::Invalid(format!("grid step must be positive (got {step})")));
    }
    if b < a {
        return Err(ModelError::Invalid(format!("grid stop {stop} is below start {start}")));
    }
    if (b - a) % s != 0 {
        return Err(ModelError::Invalid(format!("grid {start}:{step}:{stop} does not land on its stop value")));
    }
    let count = (b - a) / s;
    if count > 1_000_000 {
        return Err(ModelError::Invalid("grid has more than a million points".into()));
    }
    let denom = 10f64.powi(scale as i32);
    Ok((0..=count).map(|k| (a + k * s) as f64 / denom).collect())
}

/// Fixed-point decimal literal: `mantissa * 10^-scale`.
#[derive(Debug, Clone, Copy)]
struct Decimal {
    mantissa: i128,
    scale: u32,
}

impl Decimal {
    fn parse(text: &str) -> Result<Self, ModelError> {
        let t = text.trim();
        let bad = || ModelError::Invalid(format!("`{text}` is not a plain decimal number"));
        let (neg, digits) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        if frac_part.len() > 12 {
            return Err(ModelError::Invalid(format!("`{text}` has more than 12 decimals")));
        }
        let joined = format!("{int_part}{frac_part}");
        let mantissa: i128 = joined.parse().map_err(|_| bad())?;
        Ok(Decimal { mantissa: if neg { -mantissa } else { mantissa }, scale: frac_part.len() as u32 })
    }

    fn rescale(self, scale: u32) -> i128 {
        self.mantissa * 10i128.pow(scale - self.scale)
    }
}

fn parse_number(text: &str) -> Result<f64, ModelError> {
    let t = text.trim();
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ModelError::Invalid(format!("`{t}` is not a finite number"))),
    }
}

/// Parses either `start:step:stop` or a comma separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, ModelError> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.len() {
        1 => text.split(',').map(parse_number).collect(),
        3 => decimal_grid(parts[0], parts[1], parts[2]),
        _ => Err(ModelError::Invalid(format!("grid `{text}` is neither a list nor start:step:stop"))),
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn check_grid(name: &str, grid: &[f64], strictly_positive: bool) -> Result<(), ModelError> {
    if grid.is_empty() {
        return Err(ModelError::Invalid(format!("{name} is empty")));
    }
    for w in grid.windows(2) {
        if w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) {
            return Err(ModelError::Invalid(format!("{name} must be strictly increasing ({} then {})", w[0], w[1])));
        }
    }
    for &v in grid {
        if !v.is_finite() || v < 0.0 || (strictly_positive && v == 0.0) {
            let req = if strictly_positive { "> 0" } else { ">= 0" };
            return Err(ModelError::Invalid(format!("{name} entries must be finite and {req} (got {v})")));
        }
    }
    Ok(())
}

impl Scenario {
    /// Parameters of the numerical studies: N = 200, unit noise at Bob and
    /// Willie, δ = 0.1, powers 0.01..=1 mW and thresholds 0..=3 in 0.01 steps.
    /// With the jammer: α = 1, β = 1.5 and jamming powers 0..=1 mW; without:
    /// β = 1.6 and no jammer.
    pub fn standard(with_jammer: bool) -> Scenario {
        let power_grid = decimal_grid("0.01", "0.01", "1.00").unwrap();
        let threshold_grid = decimal_grid("0", "0.01", "3.00").unwrap();
        let (alpha, beta, jam_grid) =
            if with_jammer { (1.0, 1.5, decimal_grid("0", "0.01", "1.00").unwrap()) } else { (0.0, 1.6, vec![0.0]) };
        Scenario {
            blocklength_n: 200,
            sigma_b_sq: 1.0,
            sigma_w_sq: 1.0,
            delta: 0.1,
            alpha,
            beta,
            power_grid,
            jam_grid,
            threshold_grid,
        }
    }

    /// Jammer scenario on 0.05 mW power and jamming steps (20 x 21 joint
    /// actions); everything else as in [`Scenario::standard`].
    pub fn desk_jammer() -> Scenario {
        Scenario {
            power_grid: decimal_grid("0.05", "0.05", "1.00").unwrap(),
            jam_grid: decimal_grid("0", "0.05", "1.00").unwrap(),
            ..Scenario::standard(true)
        }
    }

    pub fn has_jammer(&self) -> bool {
        !(self.jam_grid.len() == 1 && self.jam_grid[0] == 0.0)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.blocklength_n == 0 {
            return Err(ModelError::Invalid("blocklength_n must be >= 1".into()));
        }
        for (name, v) in [("sigma_b_sq_mw", self.sigma_b_sq), ("sigma_w_sq_mw", self.sigma_w_sq)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::Invalid(format!("{name} must be positive (got {v})")));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ModelError::Invalid(format!("delta must lie in (0, 1) (got {})", self.delta)));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(ModelError::Invalid(format!("alpha must be >= 0 (got {})", self.alpha)));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(ModelError::Invalid(format!("beta must be > 0 (got {})", self.beta)));
        }
        check_grid("power_grid", &self.power_grid, true)?;
        check_grid("jam_grid", &self.jam_grid, false)?;
        check_grid("threshold_grid", &self.threshold_grid, false)?;
        Ok(())
    }

    /// SNR at Bob for a transmit/jamming power pair.
    pub fn snr_b(&self, power: f64, jam: f64) -> f64 {
        power / (self.sigma_b_sq + self.alpha * self.alpha * jam)
    }

    /// Every (P, J) pair in vectorization order: the power index runs fastest.
    pub fn joint_actions(&self) -> Vec<JointAction> {
        let i_count = self.power_grid.len();
        let mut out = Vec::with_capacity(i_count * self.jam_grid.len());
        for (jam_index, &jam) in self.jam_grid.iter().enumerate() {
            for (power_index, &power) in self.power_grid.iter().enumerate() {
                out.push(JointAction { y: jam_index * i_count + power_index + 1, power_index, jam_index, power, jam });
            }
        }
        out
    }

    /// Applies one `key = value` setting, as found in scenario files.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ModelError> {
        let v = value.trim();
        match key.trim() {
            "blocklength_n" => {
                self.blocklength_n = v
                    .parse()
                    .map_err(|_| ModelError::Invalid(format!("blocklength_n `{v}` is not a positive integer")))?
            }
            "sigma_b_sq_mw" => self.sigma_b_sq = parse_number(v)?,
            "sigma_w_sq_mw" => self.sigma_w_sq = parse_number(v)?,
            "delta" => self.delta = parse_number(v)?,
            "alpha" => self.alpha = parse_number(v)?,
            "beta" => self.beta = parse_number(v)?,
            "power_grid" => self.power_grid = parse_grid(v)?,
            "jam_grid" => self.jam_grid = parse_grid(v)?,
            "threshold_grid" => self.threshold_grid = parse_grid(v)?,
            other => return Err(ModelError::UnknownKey { line: 0, key: other.to_string() }),
        }
        Ok(())
    }

    /// Renders the scenario in the file format; grids are written as
    /// explicit lists.
    pub fn to_file_string(&self) -> String {
        let list = |g: &[f64]| g.iter().map(|v| format_decimal(*v)).collect::<Vec<_>>().join(",");
        format!(
            "blocklength_n = {}\nsigma_b_sq_mw = {}\nsigma_w_sq_mw = {}\ndelta = {}\nalpha = {}\nbeta = {}\n\
             power_grid = {}\njam_grid = {}\nthreshold_grid = {}\n",
            self.blocklength_n,
            format_decimal(self.sigma_b_sq),
            format_decimal(self.sigma_w_sq),
            format_decimal(self.delta),
            format_decimal(self.alpha),
            format_decimal(self.beta),
            list(&self.power_grid),
            list(&self.jam_grid),
            list(&self.threshold_grid),
        )
    }
}

/// Shortest decimal that parses back to the same double; never uses
/// exponent notation so the result stays a valid scenario literal.
/// Shortest decimal that parses back to `v`, never in exponent form.
fn format_decimal(v: f64) -> String {
    v.to_string()
}

const REQUIRED_KEYS: [&str; 7] =
    ["blocklength_n", "sigma_b_sq_mw", "sigma_w_sq_mw", "delta", "beta", "power_grid", "threshold_grid"];

impl FromStr for Scenario {
    type Err = ModelError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        let mut s = Scenario {
            blocklength_n: 0,
            sigma_b_sq: 0.0,
            sigma_w_sq: 0.0,
            delta: 0.0,
            alpha: 0.0,
            beta: 0.0,
            power_grid: vec![],
            jam_grid: vec![0.0],
            threshold_grid: vec![],
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ModelError::Parse {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            if let Some(first) = seen.insert(key.to_string(), line) {
                return Err(ModelError::Parse { line, message: format!("key `{key}` already set on line {first}") });
            }
            s.set(key, value).map_err(|e| match e {
                ModelError::UnknownKey { key, .. } => ModelError::UnknownKey { line, key },
                other => ModelError::Parse { line, message: format!("{key}: {other}") },
            })?;
        }
        for key in REQUIRED_KEYS {
            if !seen.contains_key(key) {
                return Err(ModelError::MissingKey(key));
            }
        }
        s.validate()?;
        Ok(s)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_file_string())
    }
}

/// One transmitter-side action: a (P, J) pair and its vectorization index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointAction {
    /// 1-based vectorized index `y = (l - 1) * I + i`.
    pub y: usize,
    pub power_index: usize,
    pub jam_index: usize,
    pub power: f64,
    pub jam: f64,
}

/// 1-based (i, l) for a vectorized index `y` over an I x L grid.
pub fn vec_index(y: usize, i_count: usize, l_count: usize) -> Result<(usize, usize), ModelError> {
    let max = i_count * l_count;
    if y == 0 || y > max {
        return Err(ModelError::IndexRange { y, max });
    }
    let i = if y.is_multiple_of(i_count) { i_count } else { y % i_count };
    let l = y.div_ceil(i_count);
    Ok((i, l))
}

/// A scenario together with the transmitter actions actually in play.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSpace {
    scenario: Scenario,
    rows: Vec<JointAction>,
}

impl ActionSpace {
    /// All joint actions, unpruned.
    pub fn full(scenario: Scenario) -> Result<Self, ModelError> {
        scenario.validate()?;
        let rows = scenario.joint_actions();
        Ok(ActionSpace { scenario, rows })
    }

    /// Convenience: validate and prune in one go.
    pub fn pruned(scenario: Scenario) -> Result<Self, ModelError> {
        prune_negative_rate(&ActionSpace::full(scenario)?)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn rows(&self) -> &[JointAction] {
        &self.rows
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.scenario.threshold_grid
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.scenario.threshold_grid.len()
    }

    /// Finite-blocklength rate of each row action.
    pub fn row_rates(&self) -> Vec<f64> {
        self.rows.iter().map(|a| self.rate_of(a)).collect()
    }

    pub fn rate_of(&self, a: &JointAction) -> f64 {
        let s = &self.scenario;
        rbar(s.snr_b(a.power, a.jam), s.blocklength_n, s.delta)
    }

    /// Same action set under a different tradeoff weight.
    pub fn with_beta(&self, beta: f64) -> Result<Self, ModelError> {
        let mut scenario = self.scenario.clone();
        scenario.beta = beta;
        scenario.validate()?;
        Ok(ActionSpace { scenario, rows: self.rows.clone() })
    }

    /// Row position of the action with the given power and jamming levels.
    pub fn find_row(&self, power: f64, jam: f64, tol: f64) -> Option<usize> {
        self.rows.iter().position(|a| (a.power - power).abs() <= tol && (a.jam - jam).abs() <= tol)
    }
}

/// Drops every joint action whose rate term is negative.
pub fn prune_negative_rate(space: &ActionSpace) -> Result<ActionSpace, ModelError> {
    let rows: Vec<JointAction> = space.rows.iter().copied().filter(|a| space.rate_of(a) >= 0.0).collect();
    if rows.is_empty() {
        return Err(ModelError::AllPruned);
    }
    Ok(ActionSpace { scenario: space.scenario.clone(), rows })
}
