//! Numerical studies built on the game solver: equilibrium reports, β sweeps
//! tracing the rate/covertness tradeoff, and heuristic baselines that fix the
//! transmit distribution and let the warden pick the best threshold.

use rayon::prelude::*;
use thiserror::Error;

use crate::detection::{self, dep_cell, pfa_cell, pm_cell, DetectionError, MixedStrategy};
use crate::matrixgame::{build_payoff, solve_game, CovertGame, EquilibriumSolution, GameError};
use crate::model::{ActionSpace, ModelError, Scenario};
use crate::rate::{expected_rate, rbar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Detection(#[from] DetectionError),
    #[error("at beta = {beta}: {source}")]
    AtBeta { beta: f64, source: GameError },
    #[error("beta list is empty")]
    NoBetas,
    #[error("uniform baseline needs 2 <= k <= {max} (got {k})")]
    UniformRange { k: usize, max: usize },
    #[error("power {0} mW is not on the power grid")]
    PowerNotOnGrid(f64),
    #[error("power {power} mW has negative rate {rate}")]
    NegativeRate { power: f64, rate: f64 },
    #[error("curve is empty")]
    EmptyCurve,
}

/// Probability floor below which strategy entries are not reported.
pub const SUPPORT_FLOOR: f64 = 1e-9;

/// Tolerance of the dominance assertion.
pub const DOMINANCE_TOL: f64 = 1e-9;

/// Solves the zero-sum game of a scenario after pruning negative-rate actions.
pub fn solve_scenario(s: &Scenario) -> Result<(CovertGame, EquilibriumSolution), ExperimentError> {
    let space = ActionSpace::pruned(s.clone())?;
    let game = build_payoff(&space)?;
    let sol = solve_game(game.payoff())?;
    Ok((game, sol))
}

/// The same scenario with the jammer switched off.
pub fn without_jammer(s: &Scenario) -> Scenario {
    Scenario { jam_grid: vec![0.0], ..s.clone() }
}

/// Support of an equilibrium, in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub value: f64,
    pub row_gap: f64,
    pub col_gap: f64,
    /// (power, jam, probability) over joint actions with mass above the floor.
    pub joint_support: Vec<(f64, f64, f64)>,
    /// Marginal over transmit powers, (power, probability).
    pub power_marginal: Vec<(f64, f64)>,
    /// Marginal over jamming powers, (jam, probability).
    pub jam_marginal: Vec<(f64, f64)>,
    /// (threshold, probability).
    pub threshold_support: Vec<(f64, f64)>,
}

fn marginal(levels: &[f64], pairs: impl Iterator<Item = (usize, f64)>) -> Vec<(f64, f64)> {
    let mut mass = vec![0.0; levels.len()];
    for (k, p) in pairs {
        mass[k] += p;
    }
    levels.iter().zip(mass).filter(|(_, p)| *p > SUPPORT_FLOOR).map(|(&l, p)| (l, p)).collect()
}

pub fn equilibrium_report(game: &CovertGame, sol: &EquilibriumSolution) -> EquilibriumReport {
    let space = game.space();
    let s = space.scenario();
    let joint = sol.row_strategy.probs();
    let rows = space.rows();
    EquilibriumReport {
        value: sol.value,
        row_gap: sol.row_gap,
        col_gap: sol.col_gap,
        joint_support: rows
            .iter()
            .zip(joint)
            .filter(|(_, &p)| p > SUPPORT_FLOOR)
            .map(|(a, &p)| (a.power, a.jam, p))
            .collect(),
        power_marginal: marginal(&s.power_grid, rows.iter().zip(joint).map(|(a, &p)| (a.power_index, p))),
        jam_marginal: marginal(&s.jam_grid, rows.iter().zip(joint).map(|(a, &p)| (a.jam_index, p))),
        threshold_support: space
            .thresholds()
            .iter()
            .zip(sol.col_strategy.probs())
            .filter(|(_, &p)| p > SUPPORT_FLOOR)
            .map(|(&t, &p)| (t, p))
            .collect(),
    }
}

/// One point of the rate/covertness tradeoff, with the strategies it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub beta: f64,
    pub expected_rate: f64,
    pub pfa: f64,
    pub pm: f64,
    pub dep: f64,
    pub game_value: f64,
    pub joint: MixedStrategy,
    pub thresholds: MixedStrategy,
}

/// Evaluates rate and detection errors of an equilibrium of `game`.
pub fn tradeoff_point(game: &CovertGame, sol: &EquilibriumSolution) -> Result<TradeoffPoint, ExperimentError> {
    let space = game.space();
    let pfa = detection::pfa(space, &sol.row_strategy, &sol.col_strategy)?;
    let pm = detection::pm(space, &sol.row_strategy, &sol.col_strategy)?;
    Ok(TradeoffPoint {
        beta: game.beta(),
        expected_rate: expected_rate(space, &sol.row_strategy)?,
        pfa,
        pm,
        dep: pfa + pm,
        game_value: sol.value,
        joint: sol.row_strategy.clone(),
        thresholds: sol.col_strategy.clone(),
    })
}

/// Default β grid: 25 log-spaced values from 0.1 to 20.
pub fn default_betas() -> Vec<f64> {
    let (lo, hi, n) = (0.1f64.ln(), 20f64.ln(), 25);
    (0..n)
        .map(|k| match k {
            0 => 0.1,
            k if k == n - 1 => 20.0,
            k => (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// Solves the game at every β and returns the tradeoff points in input order.
/// The detection table is computed once and shared.
pub fn beta_sweep(s: &Scenario, betas: &[f64]) -> Result<Vec<TradeoffPoint>, ExperimentError> {
    if betas.is_empty() {
        return Err(ExperimentError::NoBetas);
    }
    let space = ActionSpace::pruned(s.clone())?;
    let base = build_payoff(&space)?;
    betas
        .par_iter()
        .map(|&beta| {
            let at = |source: GameError| ExperimentError::AtBeta { beta, source };
            let game = base.with_beta(beta).map_err(at)?;
            let sol = solve_game(game.payoff()).map_err(at)?;
            tradeoff_point(&game, &sol)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineKind {
    /// Uniform over the grid powers with indices 2..=k (1-based).
    Uniform(usize),
    /// A single power in mW.
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub kind: BaselineKind,
    pub best_threshold: f64,
    pub expected_rate: f64,
    pub pfa: f64,
    pub pm: f64,
    pub dep: f64,
}

/// Scans the threshold grid for the warden's dep-minimizing threshold against
/// a uniform mix of `powers` (no jamming). The first grid point wins ties.
fn best_threshold(s: &Scenario, powers: &[f64]) -> Result<(f64, f64, f64), DetectionError> {
    let (n, sw) = (s.blocklength_n, s.sigma_w_sq);
    let w = 1.0 / powers.len() as f64;
    let mut best: Option<(f64, f64, f64)> = None;
    for &t in &s.threshold_grid {
        let pfa = pfa_cell(0.0, t, n, sw)?;
        let mut pm = 0.0;
        for &p in powers {
            pm += w * pm_cell(p, 0.0, t, n, sw)?;
        }
        if best.is_none_or(|(_, a, b)| pfa + pm < a + b) {
            best = Some((t, pfa, pm));
        }
    }
    Ok(best.expect("validated scenario has thresholds"))
}

fn baseline(s: &Scenario, kind: BaselineKind, powers: &[f64]) -> Result<BaselineResult, ExperimentError> {
    for &p in powers {
        let rate = rbar(s.snr_b(p, 0.0), s.blocklength_n, s.delta);
        if rate < 0.0 {
            return Err(ExperimentError::NegativeRate { power: p, rate });
        }
    }
    let (t, pfa, pm) = best_threshold(s, powers)?;
    let rate =
        powers.iter().map(|&p| rbar(s.snr_b(p, 0.0), s.blocklength_n, s.delta)).sum::<f64>() / powers.len() as f64;
    Ok(BaselineResult { kind, best_threshold: t, expected_rate: rate, pfa, pm, dep: pfa + pm })
}

/// Transmitter uniform over the 2nd through k-th grid powers, no jamming.
pub fn uniform_baseline(s: &Scenario, k: usize) -> Result<BaselineResult, ExperimentError> {
    s.validate()?;
    let max = s.power_grid.len();
    if k < 2 || k > max {
        return Err(ExperimentError::UniformRange { k, max });
    }
    baseline(s, BaselineKind::Uniform(k), &s.power_grid[1..k])
}

/// Transmitter at one constant grid power, no jamming.
pub fn constant_baseline(s: &Scenario, power: f64) -> Result<BaselineResult, ExperimentError> {
    s.validate()?;
    let p = *s
        .power_grid
        .iter()
        .find(|&&g| (g - power).abs() <= 1e-12 * g.max(1.0))
        .ok_or(ExperimentError::PowerNotOnGrid(power))?;
    baseline(s, BaselineKind::Constant(p), &[p])
}

/// Detection error of a no-jammer baseline at an arbitrary threshold.
pub fn baseline_dep_at(s: &Scenario, powers: &[f64], threshold: f64) -> Result<f64, DetectionError> {
    let w = 1.0 / powers.len() as f64;
    let mut d = 0.0;
    for &p in powers {
        d += w * dep_cell(p, 0.0, threshold, s.blocklength_n, s.sigma_w_sq)?;
    }
    Ok(d)
}

/// A (dep, rate) pair on a tradeoff curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub dep: f64,
    pub rate: f64,
}

impl From<&TradeoffPoint> for CurvePoint {
    fn from(p: &TradeoffPoint) -> Self {
        CurvePoint { dep: p.dep, rate: p.expected_rate }
    }
}

impl From<&BaselineResult> for CurvePoint {
    fn from(b: &BaselineResult) -> Self {
        CurvePoint { dep: b.dep, rate: b.expected_rate }
    }
}

/// Rate of `curve` at `dep`. Points are ordered by dep (duplicates keep the
/// higher rate) and linearly interpolated; outside the covered dep range the
/// nearest endpoint is used and the second component is `true`.
pub fn rate_at_dep(curve: &[CurvePoint], dep: f64) -> Result<(f64, bool), ExperimentError> {
    let mut pts: Vec<CurvePoint> = curve.to_vec();
    if pts.is_empty() {
        return Err(ExperimentError::EmptyCurve);
    }
    pts.sort_by(|a, b| a.dep.total_cmp(&b.dep).then(b.rate.total_cmp(&a.rate)));
    pts.dedup_by(|later, first| later.dep == first.dep);
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    if dep <= first.dep {
        return Ok((first.rate, dep < first.dep));
    }
    if dep >= last.dep {
        return Ok((last.rate, dep > last.dep));
    }
    let k = pts.partition_point(|p| p.dep <= dep);
    let (a, b) = (pts[k - 1], pts[k]);
    let w = (dep - a.dep) / (b.dep - a.dep);
    Ok((a.rate + w * (b.rate - a.rate), false))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub label: String,
    pub dep: f64,
    pub baseline_rate: f64,
    pub game_rate: f64,
    /// Game rate minus baseline rate.
    pub advantage: f64,
    /// The baseline dep fell outside the game curve's dep range.
    pub extrapolated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    pub comparisons: Vec<Comparison>,
    pub min_advantage: f64,
    pub max_advantage: f64,
}

impl DominanceReport {
    /// Game rate ≥ baseline rate − tolerance at every compared point.
    pub fn dominates(&self) -> bool {
        self.min_advantage >= -DOMINANCE_TOL
    }
}

/// Compares each baseline point against the game curve at the same dep.
pub fn dominance_check(
    game_curve: &[CurvePoint],
    uniform_curve: &[CurvePoint],
    constant_curve: &[CurvePoint],
) -> Result<DominanceReport, ExperimentError> {
    if game_curve.is_empty() || (uniform_curve.is_empty() && constant_curve.is_empty()) {
        return Err(ExperimentError::EmptyCurve);
    }
    let labelled = uniform_curve
        .iter()
        .enumerate()
        .map(|(k, p)| (format!("uniform[{k}]"), p))
        .chain(constant_curve.iter().enumerate().map(|(k, p)| (format!("constant[{k}]"), p)));
    let mut comparisons = Vec::new();
    for (label, p) in labelled {
        let (game_rate, extrapolated) = rate_at_dep(game_curve, p.dep)?;
        comparisons.push(Comparison {
            label,
            dep: p.dep,
            baseline_rate: p.rate,
            game_rate,
            advantage: game_rate - p.rate,
            extrapolated,
        });
    }
    let min_advantage = comparisons.iter().map(|c| c.advantage).fold(f64::INFINITY, f64::min);
    let max_advantage = comparisons.iter().map(|c| c.advantage).fold(f64::NEG_INFINITY, f64::max);
    Ok(DominanceReport { comparisons, min_advantage, max_advantage })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_scenario() -> Scenario {
        let mut s = Scenario::standard(false);
        s.power_grid = crate::model::decimal_grid("0.01", "0.05", "0.96").unwrap();
        s.threshold_grid = crate::model::decimal_grid("0.8", "0.02", "1.6").unwrap();
        s
    }

    #[test]
    fn default_beta_grid() {
        let b = default_betas();
        assert_eq!(b.len(), 25);
        assert_eq!((b[0], b[24]), (0.1, 20.0));
        let r = b[1] / b[0];
        for w in b.windows(2) {
            assert!((w[1] / w[0] - r).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_keeps_order_and_matches_direct_solve() {
        let s = small_scenario();
        let betas = [3.0, 0.5, 1.6];
        let pts = beta_sweep(&s, &betas).unwrap();
        assert_eq!(pts.iter().map(|p| p.beta).collect::<Vec<_>>(), betas);
        let (game, sol) = solve_scenario(&s).unwrap();
        let direct = tradeoff_point(&game, &sol).unwrap();
        assert_eq!(pts[2], direct);
        for p in &pts {
            assert!((p.dep - p.pfa - p.pm).abs() <= 1e-12);
            assert!(p.dep > 0.0 && p.dep < 2.0);
        }
        assert_eq!(beta_sweep(&s, &[]), Err(ExperimentError::NoBetas));
    }

    #[test]
    fn sweep_error_names_beta() {
        let s = small_scenario();
        let err = beta_sweep(&s, &[1.0, -2.0]).unwrap_err();
        assert!(matches!(err, ExperimentError::AtBeta { beta, .. } if beta == -2.0));
    }

    #[test]
    fn baseline_ranges_and_pruning() {
        let s = Scenario::standard(false);
        assert!(matches!(uniform_baseline(&s, 1), Err(ExperimentError::UniformRange { .. })));
        assert!(matches!(uniform_baseline(&s, 101), Err(ExperimentError::UniformRange { .. })));
        assert!(matches!(constant_baseline(&s, 0.01), Err(ExperimentError::NegativeRate { .. })));
        assert!(matches!(constant_baseline(&s, 0.015), Err(ExperimentError::PowerNotOnGrid(_))));
        let one = constant_baseline(&s, 1.0).unwrap();
        assert!((one.expected_rate - 0.8867).abs() < 1e-4);
        let two = uniform_baseline(&s, 2).unwrap();
        let c = constant_baseline(&s, 0.02).unwrap();
        assert_eq!((two.best_threshold, two.dep), (c.best_threshold, c.dep));
    }

    #[test]
    fn baseline_threshold_is_grid_argmin() {
        let s = Scenario::standard(false);
        let b = uniform_baseline(&s, 30).unwrap();
        assert!(s.threshold_grid.contains(&b.best_threshold));
        let powers = &s.power_grid[1..30];
        for &t in &s.threshold_grid {
            assert!(b.dep <= baseline_dep_at(&s, powers, t).unwrap() + 1e-15);
        }
    }

    #[test]
    fn interpolation() {
        let c = [
            CurvePoint { dep: 1.0, rate: 0.0 },
            CurvePoint { dep: 0.0, rate: 1.0 },
            CurvePoint { dep: 0.5, rate: 0.25 },
            CurvePoint { dep: 0.5, rate: 0.75 },
        ];
        assert_eq!(rate_at_dep(&c, 0.25).unwrap(), (0.875, false));
        assert_eq!(rate_at_dep(&c, 0.5).unwrap(), (0.75, false));
        assert_eq!(rate_at_dep(&c, 1.5).unwrap(), (0.0, true));
        assert_eq!(rate_at_dep(&c, -1.0).unwrap(), (1.0, true));
        assert!(rate_at_dep(&[], 0.5).is_err());
    }

    #[test]
    fn curve_against_itself() {
        let c = [CurvePoint { dep: 0.2, rate: 0.7 }, CurvePoint { dep: 0.9, rate: 0.1 }];
        let r = dominance_check(&c, &c, &[]).unwrap();
        assert_eq!(r.comparisons.len(), 2);
        assert!(r.comparisons.iter().all(|x| x.advantage == 0.0 && !x.extrapolated));
        assert!(r.dominates());
    }

    #[test]
    fn report_marginals() {
        let mut s = Scenario::desk_jammer();
        s.power_grid = vec![0.5, 1.0];
        s.jam_grid = vec![0.0, 0.5];
        s.threshold_grid = crate::model::decimal_grid("0.9", "0.05", "1.5").unwrap();
        let (game, sol) = solve_scenario(&s).unwrap();
        let rep = equilibrium_report(&game, &sol);
        let total: f64 = rep.power_marginal.iter().map(|x| x.1).sum();
        assert!((total - 1.0).abs() < 1e-9);
        let total: f64 = rep.jam_marginal.iter().map(|x| x.1).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(rep.row_gap <= 1e-8 && rep.col_gap <= 1e-8);
    }
}
