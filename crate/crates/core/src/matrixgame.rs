//! Zero-sum matrix games: payoff construction for the covert-communication
//! games, equilibrium computation by linear programming and equilibrium
//! verification.
//!
//! Rows belong to the maximizer (transmitter, or transmitter plus jammer),
//! columns to the minimizer (the warden's thresholds). The payoff of row `y`
//! against threshold `m` is `rate_y + β · dep_{y,m}`.

use thiserror::Error;

use crate::detection::{dep_table, DetectionError, MixedStrategy};
use crate::lpsolve::{self, LinearProgram, LpError, RowKind, Sense};
use crate::model::{ActionSpace, ModelError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Detection(#[from] DetectionError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("payoff matrix is empty")]
    Empty,
    #[error("payoff matrix has a non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("ragged payoff matrix: row {row} has {got} entries, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
}

/// Dense payoff matrix, row-major. Entries are payoffs to the row player.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PayoffMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, GameError> {
        if rows == 0 || cols == 0 {
            return Err(GameError::Empty);
        }
        assert_eq!(data.len(), rows * cols, "payoff data length");
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(GameError::NonFinite(k / cols, k % cols));
        }
        Ok(PayoffMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, GameError> {
        let cols = rows.first().map_or(0, Vec::len);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(GameError::Ragged { row: i, got: r.len(), expected: cols });
            }
        }
        let n = rows.len();
        PayoffMatrix::new(n, cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `A[r][c] -> scale * A[r][c] + shift`.
    pub fn affine(&self, scale: f64, shift: f64) -> PayoffMatrix {
        PayoffMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| scale * v + shift).collect() }
    }

    /// Matrix with rows and columns reordered: entry `(i, j)` of the result
    /// is `A[row_perm[i]][col_perm[j]]`.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> PayoffMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for &r in row_perm {
            for &c in col_perm {
                data.push(self.get(r, c));
            }
        }
        PayoffMatrix { rows: self.rows, cols: self.cols, data }
    }

    /// Payoff of each pure column against a row strategy: `pᵀ A`.
    pub fn column_payoffs(&self, row_strategy: &MixedStrategy) -> Result<Vec<f64>, GameError> {
        row_strategy.check_len(self.rows, "row strategy")?;
        let mut out = vec![0.0; self.cols];
        for (r, &p) in row_strategy.probs().iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o += p * a;
            }
        }
        Ok(out)
    }

    /// Payoff of each pure row against a column strategy: `A q`.
    pub fn row_payoffs(&self, col_strategy: &MixedStrategy) -> Result<Vec<f64>, GameError> {
        col_strategy.check_len(self.cols, "column strategy")?;
        Ok((0..self.rows).map(|r| self.row(r).iter().zip(col_strategy.probs()).map(|(a, q)| a * q).sum()).collect())
    }

    /// `pᵀ A q`.
    pub fn expected_payoff(&self, p: &MixedStrategy, q: &MixedStrategy) -> Result<f64, GameError> {
        let cp = self.column_payoffs(p)?;
        q.check_len(self.cols, "column strategy")?;
        Ok(cp.iter().zip(q.probs()).map(|(a, b)| a * b).sum())
    }
}

/// The covert-communication game for one action space: rates, cached
/// per-cell detection errors, and the payoff matrix at the scenario's β.
#[derive(Debug, Clone)]
pub struct CovertGame {
    space: ActionSpace,
    rates: Vec<f64>,
    /// Row-major detection errors `pfa + pm` per (row, threshold).
    dep: Vec<f64>,
    payoff: PayoffMatrix,
}

/// Builds the payoff matrix `rate_y + β · dep_{y,m}` of a (pruned) action
/// space. Rows follow the vectorization order of the action space.
pub fn build_payoff(space: &ActionSpace) -> Result<CovertGame, GameError> {
    let rates = space.row_rates();
    let dep = dep_table(space)?;
    let payoff = assemble(&rates, &dep, space.col_count(), space.scenario().beta)?;
    Ok(CovertGame { space: space.clone(), rates, dep, payoff })
}

fn assemble(rates: &[f64], dep: &[f64], cols: usize, beta: f64) -> Result<PayoffMatrix, GameError> {
    let data = dep.chunks_exact(cols).zip(rates).flat_map(|(row, &r)| row.iter().map(move |&d| r + beta * d)).collect();
    PayoffMatrix::new(rates.len(), cols, data)
}

impl CovertGame {
    /// Same game with another tradeoff weight; the detection table is reused.
    pub fn with_beta(&self, beta: f64) -> Result<CovertGame, GameError> {
        let space = self.space.with_beta(beta)?;
        let payoff = assemble(&self.rates, &self.dep, space.col_count(), beta)?;
        Ok(CovertGame { space, rates: self.rates.clone(), dep: self.dep.clone(), payoff })
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn payoff(&self) -> &PayoffMatrix {
        &self.payoff
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn dep(&self, row: usize, col: usize) -> f64 {
        self.dep[row * self.space.col_count() + col]
    }

    pub fn beta(&self) -> f64 {
        self.space.scenario().beta
    }

    /// The warden's expected detection error for each pure threshold against
    /// a joint strategy.
    pub fn dep_against(&self, joint: &MixedStrategy) -> Result<Vec<f64>, GameError> {
        joint.check_len(self.rates.len(), "joint strategy")?;
        let m = self.space.col_count();
        let mut out = vec![0.0; m];
        for (row, &p) in self.dep.chunks_exact(m).zip(joint.probs()) {
            if p == 0.0 {
                continue;
            }
            for (o, &d) in out.iter_mut().zip(row) {
                *o += p * d;
            }
        }
        Ok(out)
    }
}

/// Which of the two equilibrium LPs to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Whichever LP has fewer constraints.
    Auto,
    /// Maximizer's program: max U s.t. pᵀA e_m ≥ U for all m.
    RowProgram,
    /// Minimizer's program: min U s.t. e_iᵀ A q ≤ U for all i.
    ColumnProgram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution {
    pub row_strategy: MixedStrategy,
    pub col_strategy: MixedStrategy,
    pub value: f64,
    pub row_gap: f64,
    pub col_gap: f64,
    /// Simplex pivots spent.
    pub iterations: usize,
}

/// Default tolerance for [`verify_equilibrium`].
pub const VERIFY_TOL: f64 = 1e-8;

/// Solves the zero-sum game `a` by linear programming. One LP is solved; the
/// opponent's strategy is read from its dual multipliers.
pub fn solve_game(a: &PayoffMatrix) -> Result<EquilibriumSolution, GameError> {
    solve_game_oriented(a, Orientation::Auto)
}

pub fn solve_game_oriented(a: &PayoffMatrix, orientation: Orientation) -> Result<EquilibriumSolution, GameError> {
    let (m, n) = (a.rows(), a.cols());
    let use_rows = match orientation {
        Orientation::Auto => n < m,
        Orientation::RowProgram => true,
        Orientation::ColumnProgram => false,
    };
    let (own, dual_count, own_count) = if use_rows { (m, n, m) } else { (n, m, n) };
    let sense = if use_rows { Sense::Maximize } else { Sense::Minimize };
    let mut lp = LinearProgram::new(sense, own + 1);
    lp.objective[own] = 1.0;
    for b in lp.bounds.iter_mut().take(own) {
        *b = (0.0, 1.0);
    }
    lp.bounds[own] = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..dual_count {
        let mut coeffs = Vec::with_capacity(own + 1);
        if use_rows {
            coeffs.extend((0..m).map(|i| a.get(i, k)));
        } else {
            coeffs.extend_from_slice(a.row(k));
        }
        coeffs.push(-1.0);
        lp.add_row(coeffs, if use_rows { RowKind::Ge } else { RowKind::Le }, 0.0);
    }
    let mut ones = vec![1.0; own_count];
    ones.push(0.0);
    lp.add_row(ones, RowKind::Eq, 1.0);

    let sol = lpsolve::solve(&lp)?;
    let own_strategy = MixedStrategy::from_weights(sol.x[..own].to_vec())?;
    let other_strategy = MixedStrategy::from_weights(sol.duals[..dual_count].iter().map(|y| -y).collect())?;
    let (row_strategy, col_strategy) =
        if use_rows { (own_strategy, other_strategy) } else { (other_strategy, own_strategy) };
    let mut out = EquilibriumSolution {
        row_strategy,
        col_strategy,
        value: sol.objective,
        row_gap: f64::NAN,
        col_gap: f64::NAN,
        iterations: sol.iterations,
    };
    let check = verify_equilibrium(a, &out, VERIFY_TOL)?;
    out.row_gap = check.row_gap;
    out.col_gap = check.col_gap;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumCheck {
    /// How far the row strategy's guaranteed payoff falls below the value.
    pub row_gap: f64,
    /// How far the column strategy's worst case exceeds the value.
    pub col_gap: f64,
    pub tol: f64,
}

impl EquilibriumCheck {
    pub fn is_equilibrium(&self) -> bool {
        self.row_gap <= self.tol && self.col_gap <= self.tol
    }
}

/// Best-response gaps of both strategies in `sol` against its stated value.
pub fn verify_equilibrium(
    a: &PayoffMatrix,
    sol: &EquilibriumSolution,
    tol: f64,
) -> Result<EquilibriumCheck, GameError> {
    let guaranteed = a.column_payoffs(&sol.row_strategy)?.into_iter().fold(f64::INFINITY, f64::min);
    let conceded = a.row_payoffs(&sol.col_strategy)?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok(EquilibriumCheck { row_gap: sol.value - guaranteed, col_gap: conceded - sol.value, tol })
}

fn argmin_set(values: &[f64], tol: f64) -> Vec<usize> {
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    (0..values.len()).filter(|&i| values[i] <= best + tol).collect()
}

/// Tie tolerance for best-response sets.
pub const TIE_TOL: f64 = 1e-12;

/// The minimizer's pure best responses to a row strategy in the zero-sum game.
pub fn column_best_responses(
    a: &PayoffMatrix,
    row_strategy: &MixedStrategy,
    tol: f64,
) -> Result<Vec<usize>, GameError> {
    Ok(argmin_set(&a.column_payoffs(row_strategy)?, tol))
}

/// The warden's pure best responses when his payoff is only the negated
/// detection error (the non-zero-sum formulation).
pub fn willie_br_nonzero_sum(game: &CovertGame, joint: &MixedStrategy) -> Result<Vec<usize>, GameError> {
    Ok(argmin_set(&game.dep_against(joint)?, TIE_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Scenario;

    fn m(rows: Vec<Vec<f64>>) -> PayoffMatrix {
        PayoffMatrix::from_rows(rows).unwrap()
    }

    fn assert_probs(s: &MixedStrategy, want: &[f64], tol: f64) {
        assert_eq!(s.len(), want.len());
        for (a, b) in s.probs().iter().zip(want) {
            assert!((a - b).abs() <= tol, "{:?} vs {want:?}", s.probs());
        }
    }

    #[test]
    fn matching_pennies() {
        let a = m(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        for o in [Orientation::RowProgram, Orientation::ColumnProgram] {
            let sol = solve_game_oriented(&a, o).unwrap();
            assert!(sol.value.abs() < 1e-12);
            assert_probs(&sol.row_strategy, &[0.5, 0.5], 1e-12);
            assert_probs(&sol.col_strategy, &[0.5, 0.5], 1e-12);
            assert!(sol.row_gap.abs() < 1e-12 && sol.col_gap.abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_two_by_two() {
        let a = m(vec![vec![2.0, 0.0], vec![0.0, 1.0]]);
        let sol = solve_game(&a).unwrap();
        assert!((sol.value - 2.0 / 3.0).abs() < 1e-12);
        assert_probs(&sol.row_strategy, &[1.0 / 3.0, 2.0 / 3.0], 1e-12);
        assert_probs(&sol.col_strategy, &[1.0 / 3.0, 2.0 / 3.0], 1e-12);
    }

    #[test]
    fn rock_paper_scissors() {
        let a = m(vec![vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]]);
        let sol = solve_game(&a).unwrap();
        assert!(sol.value.abs() < 1e-12);
        assert_probs(&sol.row_strategy, &[1.0 / 3.0; 3], 1e-12);
        assert_probs(&sol.col_strategy, &[1.0 / 3.0; 3], 1e-12);
    }

    #[test]
    fn saddle_point_and_single_cell() {
        let a = m(vec![vec![3.0, 5.0], vec![1.0, 4.0]]);
        let sol = solve_game(&a).unwrap();
        assert!((sol.value - 3.0).abs() < 1e-12);
        assert_probs(&sol.row_strategy, &[1.0, 0.0], 1e-12);
        assert_probs(&sol.col_strategy, &[1.0, 0.0], 1e-12);
        let one = solve_game(&m(vec![vec![-2.5]])).unwrap();
        assert_eq!(one.value, -2.5);
    }

    #[test]
    fn verify_flags_a_suboptimal_row_strategy() {
        let a = m(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        let sol = EquilibriumSolution {
            row_strategy: MixedStrategy::new(vec![0.6, 0.4]).unwrap(),
            col_strategy: MixedStrategy::uniform(2),
            value: 0.0,
            row_gap: 0.0,
            col_gap: 0.0,
            iterations: 0,
        };
        let check = verify_equilibrium(&a, &sol, VERIFY_TOL).unwrap();
        assert!((check.row_gap - 0.2).abs() < 1e-12);
        assert!(check.col_gap.abs() < 1e-12);
        assert!(!check.is_equilibrium());
        let bad = EquilibriumSolution { row_strategy: MixedStrategy::uniform(3), ..sol };
        assert!(verify_equilibrium(&a, &bad, VERIFY_TOL).is_err());
    }

    #[test]
    fn matrix_construction_errors() {
        assert_eq!(PayoffMatrix::from_rows(vec![]), Err(GameError::Empty));
        assert!(matches!(
            PayoffMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0]]),
            Err(GameError::Ragged { row: 1, .. })
        ));
        assert_eq!(PayoffMatrix::from_rows(vec![vec![1.0, f64::NAN]]), Err(GameError::NonFinite(0, 1)));
    }

    #[test]
    fn single_power_single_threshold_game() {
        let mut s = Scenario::standard(false);
        s.power_grid = vec![0.5];
        s.threshold_grid = vec![1.1];
        let space = ActionSpace::pruned(s).unwrap();
        let game = build_payoff(&space).unwrap();
        let want =
            crate::rate::rbar(0.5, 200, 0.1) + 1.6 * crate::detection::dep_cell(0.5, 0.0, 1.1, 200, 1.0).unwrap();
        assert_eq!(game.payoff().rows(), 1);
        assert_eq!(game.payoff().cols(), 1);
        assert!((game.payoff().get(0, 0) - want).abs() < 1e-15);
        let br = willie_br_nonzero_sum(&game, &MixedStrategy::point_mass(1, 0)).unwrap();
        assert_eq!(br, vec![0]);
    }

    #[test]
    fn beta_rescaling_reuses_detection_table() {
        let space = ActionSpace::pruned(Scenario::desk_jammer()).unwrap();
        let game = build_payoff(&space).unwrap();
        let small = game.with_beta(1e-9).unwrap();
        for r in (0..small.payoff().rows()).step_by(23) {
            for c in (0..small.payoff().cols()).step_by(31) {
                assert!((small.payoff().get(r, c) - game.rates()[r]).abs() < 2e-9);
            }
        }
        let rebuilt = build_payoff(&space.with_beta(0.7).unwrap()).unwrap();
        assert_eq!(game.with_beta(0.7).unwrap().payoff(), rebuilt.payoff());
    }

    #[test]
    fn standard_payoff_dimensions() {
        let space = ActionSpace::pruned(Scenario::standard(false)).unwrap();
        let game = build_payoff(&space).unwrap();
        assert_eq!((game.payoff().rows(), game.payoff().cols()), (99, 301));
        let min_rate = game.rates().iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min_rate >= 0.0);
        for r in 0..99 {
            assert!(game.payoff().row(r).iter().all(|&v| v > min_rate));
        }
    }
}
