//! Dense two-phase simplex for small and medium linear programs.
//!
//! The solver accepts `≤`, `≥` and `=` rows and per-variable bounds (either
//! side may be infinite). Internally every variable is shifted or split to
//! `0 ≤ z ≤ u`, rows are normalized to a nonnegative right-hand side and each
//! row carries one unit column (its slack when the slack enters with `+1`,
//! otherwise an artificial). Phase 1 drives the artificials out; phase 2
//! optimizes the objective with a bounded-variable ratio test.
//!
//! Pricing is Dantzig's rule until `10 * rows` consecutive degenerate pivots
//! have been made, after which Bland's rule takes over for the rest of the
//! phase. Ties are broken by index so a given input always follows the same
//! pivot sequence.
//!
//! Dual multipliers are reported as sensitivities of the optimal objective to
//! each right-hand side, in the sense of the original problem.

#![allow(clippy::needless_range_loop)]

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub kind: RowKind,
    pub rhs: f64,
}

/// `optimize c·x subject to rows and lo ≤ x ≤ hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub rows: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// Program with `n` variables, zero objective and bounds `[0, ∞)`.
    pub fn new(sense: Sense, n: usize) -> Self {
        LinearProgram { sense, objective: vec![0.0; n], rows: Vec::new(), bounds: vec![(0.0, f64::INFINITY); n] }
    }

    pub fn var_count(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, kind: RowKind, rhs: f64) {
        self.rows.push(Constraint { coeffs, kind, rhs });
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(LpError::Malformed(format!("{} bounds for {n} variables", self.bounds.len())));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::Malformed("non-finite objective coefficient".into()));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.coeffs.len() != n {
                return Err(LpError::Malformed(format!("row {i} has {} coefficients, expected {n}", r.coeffs.len())));
            }
            if r.coeffs.iter().any(|a| !a.is_finite()) || !r.rhs.is_finite() {
                return Err(LpError::Malformed(format!("row {i} has a non-finite entry")));
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(LpError::Malformed(format!("variable {j} has bounds [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    /// Largest violation of any row or bound at `x`, relative to the row's
    /// magnitude.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for r in &self.rows {
            let lhs: f64 = r.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let mag: f64 = 1.0 + r.rhs.abs() + r.coeffs.iter().zip(x).map(|(a, v)| (a * v).abs()).sum::<f64>();
            let viol = match r.kind {
                RowKind::Le => lhs - r.rhs,
                RowKind::Ge => r.rhs - lhs,
                RowKind::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(viol / mag);
        }
        for (&(lo, hi), &v) in self.bounds.iter().zip(x) {
            worst = worst.max((lo - v) / (1.0 + lo.abs())).max((v - hi) / (1.0 + hi.abs()));
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    IterationCap,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// One multiplier per row: d(objective)/d(rhs).
    pub duals: Vec<f64>,
    pub iterations: usize,
}

/// Optimality certificate computed from the original program, independent of
/// the pivot path that produced the solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    pub primal_residual: f64,
    /// Largest sign violation of a multiplier or reduced cost.
    pub dual_residual: f64,
    pub complementarity: f64,
    pub dual_objective: f64,
    pub duality_gap: f64,
}

impl LpSolution {
    /// Checks primal feasibility, dual feasibility, complementary slackness
    /// and strong duality against `lp`.
    pub fn kkt(&self, lp: &LinearProgram) -> KktReport {
        // Work as a maximization: flip signs for minimization problems.
        let sign = if lp.sense == Sense::Maximize { 1.0 } else { -1.0 };
        let y: Vec<f64> = self.duals.iter().map(|d| sign * d).collect();
        let n = lp.var_count();
        let mut reduced: Vec<f64> = lp.objective.iter().map(|c| sign * c).collect();
        for (r, yi) in lp.rows.iter().zip(&y) {
            for j in 0..n {
                reduced[j] -= yi * r.coeffs[j];
            }
        }
        let mut dual_residual = 0.0f64;
        let mut complementarity = 0.0f64;
        let mut dual_obj = 0.0;
        for (r, &yi) in lp.rows.iter().zip(&y) {
            dual_obj += yi * r.rhs;
            let lhs: f64 = r.coeffs.iter().zip(&self.x).map(|(a, v)| a * v).sum();
            let slack = r.rhs - lhs;
            match r.kind {
                RowKind::Le => dual_residual = dual_residual.max(-yi),
                RowKind::Ge => dual_residual = dual_residual.max(yi),
                RowKind::Eq => {}
            }
            if r.kind != RowKind::Eq {
                complementarity = complementarity.max((yi * slack).abs());
            }
        }
        for j in 0..n {
            let (lo, hi) = lp.bounds[j];
            let d = reduced[j];
            // A positive reduced cost needs a finite upper bound to rest on,
            // a negative one a finite lower bound.
            if d > 0.0 {
                if hi.is_finite() {
                    dual_obj += d * hi;
                    complementarity = complementarity.max((d * (hi - self.x[j])).abs());
                } else {
                    dual_residual = dual_residual.max(d);
                }
            } else if d < 0.0 {
                if lo.is_finite() {
                    dual_obj += d * lo;
                    complementarity = complementarity.max((d * (self.x[j] - lo)).abs());
                } else {
                    dual_residual = dual_residual.max(-d);
                }
            }
        }
        let dual_objective = sign * dual_obj;
        KktReport {
            primal_residual: lp.primal_residual(&self.x),
            dual_residual,
            complementarity,
            dual_objective,
            duality_gap: (dual_objective - self.objective).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("linear program is infeasible (phase-1 residual {residual:e})")]
    Infeasible { residual: f64 },
    #[error("linear program is unbounded (entering column {column})")]
    Unbounded { column: usize },
    #[error("iteration cap of {cap} reached in phase {phase} after {degenerate} consecutive degenerate pivots")]
    IterationCap { cap: usize, phase: u8, degenerate: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Entries of smaller magnitude are never used as pivots.
    pub pivot_tol: f64,
    /// Reduced-cost optimality tolerance (on the scaled problem).
    pub optimality_tol: f64,
    pub feasibility_tol: f64,
    /// `None` means `50 * (rows + cols)`.
    pub max_iterations: Option<usize>,
    /// Consecutive degenerate pivots, as a multiple of the row count, before
    /// switching to Bland's rule.
    pub bland_after: usize,
    pub scale: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            pivot_tol: 1e-11,
            optimality_tol: 1e-9,
            feasibility_tol: 1e-9,
            max_iterations: None,
            bland_after: 10,
            scale: true,
        }
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_with(lp, &SolverOptions::default())
}

/// How an original variable maps onto internal nonnegative columns:
/// `x = offset + Σ coef * z_col`.
#[derive(Debug, Clone)]
struct VarMap {
    parts: Vec<(usize, f64)>,
    offset: f64,
}

struct Tableau {
    m: usize,
    width: usize,
    /// `B^{-1} A`, row-major `m x width`.
    a: Vec<f64>,
    /// Values of the basic variables.
    xb: Vec<f64>,
    basis: Vec<usize>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    /// Columns allowed to enter the basis.
    enterable: Vec<bool>,
    /// Reduced-cost rows, one per phase (maximization convention).
    d1: Vec<f64>,
    d2: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

impl Tableau {
    fn costs(&self, phase: Phase) -> &[f64] {
        match phase {
            Phase::One => &self.d1,
            Phase::Two => &self.d2,
        }
    }

    fn is_basic(&self) -> Vec<bool> {
        let mut b = vec![false; self.width];
        for &j in &self.basis {
            b[j] = true;
        }
        b
    }

    /// Improving direction for nonbasic `j`, if any: +1 to increase from the
    /// lower bound, -1 to decrease from the upper bound.
    fn improving(&self, j: usize, d: f64, tol: f64) -> Option<f64> {
        if !self.enterable[j] {
            return None;
        }
        if !self.at_upper[j] && d > tol {
            Some(1.0)
        } else if self.at_upper[j] && d < -tol {
            Some(-1.0)
        } else {
            None
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let piv = self.a[r * w + q];
        {
            let row = &mut self.a[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[q] = 1.0;
        }
        let (head, rest) = self.a.split_at_mut(r * w);
        let (prow, tail) = rest.split_at_mut(w);
        for row in head.chunks_exact_mut(w).chain(tail.chunks_exact_mut(w)) {
            let f = row[q];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                row[q] = 0.0;
            }
        }
        for d in [&mut self.d1, &mut self.d2] {
            let f = d[q];
            if f != 0.0 {
                for (v, p) in d.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                d[q] = 0.0;
            }
        }
        self.basis[r] = q;
    }
}

/// Solves `lp` with explicit options.
pub fn solve_with(lp: &LinearProgram, opts: &SolverOptions) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.var_count();
    let m = lp.rows.len();
    let maximize = lp.sense == Sense::Maximize;
    let cap = opts.max_iterations.unwrap_or(50 * (m + n).max(1));

    // Equilibrate: rows then columns to unit max-norm, using powers of two so
    // the scaling itself is exact.
    let pow2 = |v: f64| if v > 0.0 { (-v.log2().round()).exp2() } else { 1.0 };
    let row_scale: Vec<f64> = lp
        .rows
        .iter()
        .map(|r| if opts.scale { pow2(r.coeffs.iter().fold(0.0f64, |a, v| a.max(v.abs()))) } else { 1.0 })
        .collect();
    let col_scale: Vec<f64> = (0..n)
        .map(|j| {
            if !opts.scale {
                return 1.0;
            }
            let mx = lp.rows.iter().zip(&row_scale).fold(0.0f64, |a, (r, s)| a.max((r.coeffs[j] * s).abs()));
            pow2(mx)
        })
        .collect();

    // Map original variables (x = col_scale * x') onto nonnegative columns.
    let mut maps = Vec::with_capacity(n);
    let mut upper: Vec<f64> = Vec::new();
    for j in 0..n {
        let s = col_scale[j];
        let (lo, hi) = (lp.bounds[j].0 / s, lp.bounds[j].1 / s);
        let map = if lo.is_finite() {
            upper.push(hi - lo);
            VarMap { parts: vec![(upper.len() - 1, 1.0)], offset: lo }
        } else if hi.is_finite() {
            upper.push(f64::INFINITY);
            VarMap { parts: vec![(upper.len() - 1, -1.0)], offset: hi }
        } else {
            upper.push(f64::INFINITY);
            upper.push(f64::INFINITY);
            VarMap { parts: vec![(upper.len() - 2, 1.0), (upper.len() - 1, -1.0)], offset: 0.0 }
        };
        maps.push(map);
    }
    let nz = upper.len();

    // Scaled constraint matrix over the internal structural columns.
    let mut rows_z = vec![vec![0.0; nz]; m];
    let mut rhs = vec![0.0; m];
    for (i, r) in lp.rows.iter().enumerate() {
        let rs = row_scale[i];
        let mut b = r.rhs * rs;
        for j in 0..n {
            let a = r.coeffs[j] * rs * col_scale[j];
            if a == 0.0 {
                continue;
            }
            b -= a * maps[j].offset;
            for &(col, coef) in &maps[j].parts {
                rows_z[i][col] += a * coef;
            }
        }
        rhs[i] = b;
    }
    let mut cost_z = vec![0.0; nz];
    for j in 0..n {
        let c = lp.objective[j] * col_scale[j] * if maximize { 1.0 } else { -1.0 };
        for &(col, coef) in &maps[j].parts {
            cost_z[col] += c * coef;
        }
    }

    // Slack and artificial columns. Each row gets a `+1` unit column.
    let mut sign = vec![1.0; m];
    let mut slack_col: Vec<Option<(usize, f64)>> = vec![None; m];
    let mut unit_col = vec![0usize; m];
    let mut extra_upper = Vec::new();
    let mut is_artificial = Vec::new();
    let mut next = nz;
    for i in 0..m {
        let kind = lp.rows[i].kind;
        // Slack coefficient before normalization.
        let k = match kind {
            RowKind::Le => Some(1.0),
            RowKind::Ge => Some(-1.0),
            RowKind::Eq => None,
        };
        sign[i] = if rhs[i] < 0.0 {
            -1.0
        } else if rhs[i] == 0.0 {
            // Pick the orientation that lets the slack start in the basis.
            k.map_or(1.0, |k| k)
        } else {
            1.0
        };
        if let Some(k) = k {
            slack_col[i] = Some((next, k * sign[i]));
            extra_upper.push(f64::INFINITY);
            is_artificial.push(false);
            next += 1;
        }
        match slack_col[i] {
            Some((c, coef)) if coef > 0.0 => unit_col[i] = c,
            _ => {
                unit_col[i] = next;
                extra_upper.push(f64::INFINITY);
                is_artificial.push(true);
                next += 1;
            }
        }
    }
    let width = next;
    let mut a = vec![0.0; m * width];
    let mut xb = vec![0.0; m];
    for i in 0..m {
        let row = &mut a[i * width..(i + 1) * width];
        for (v, &z) in row.iter_mut().zip(&rows_z[i]) {
            *v = sign[i] * z;
        }
        if let Some((c, coef)) = slack_col[i] {
            row[c] = coef;
        }
        row[unit_col[i]] = 1.0;
        xb[i] = sign[i] * rhs[i];
    }
    upper.extend(extra_upper);
    let mut artificial = vec![false; width];
    for (k, &art) in is_artificial.iter().enumerate() {
        artificial[nz + k] = art;
    }

    // Phase-2 reduced costs for the all-unit starting basis are the raw
    // costs; phase 1 maximizes -Σ artificials.
    let mut d2 = vec![0.0; width];
    d2[..nz].copy_from_slice(&cost_z);
    let mut d1 = vec![0.0; width];
    for i in 0..m {
        if artificial[unit_col[i]] {
            let row = &a[i * width..(i + 1) * width];
            for (d, v) in d1.iter_mut().zip(row) {
                *d += v;
            }
        }
    }
    for i in 0..m {
        d1[unit_col[i]] = 0.0;
    }

    let mut tab = Tableau {
        m,
        width,
        a,
        xb,
        basis: unit_col.clone(),
        upper,
        at_upper: vec![false; width],
        enterable: vec![true; width],
        d1,
        d2,
    };

    let mut iterations = 0usize;
    let needs_phase1 = unit_col.iter().any(|&c| artificial[c]);
    if needs_phase1 {
        run_phase(&mut tab, Phase::One, opts, cap, &mut iterations)?;
        let infeas: f64 = (0..m).filter(|&i| artificial[tab.basis[i]]).map(|i| tab.xb[i]).sum();
        let scale = 1.0 + rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if infeas > opts.feasibility_tol * scale {
            return Err(LpError::Infeasible { residual: infeas });
        }
    }
    // Artificials are pinned at zero from here on.
    for j in 0..width {
        if artificial[j] {
            tab.upper[j] = 0.0;
            tab.enterable[j] = false;
            tab.at_upper[j] = false;
        }
    }
    run_phase(&mut tab, Phase::Two, opts, cap, &mut iterations)?;

    // Refresh the basic values from the original data through B^{-1}, which
    // sits in the unit columns, to shed accumulated drift.
    let mut b_eff: Vec<f64> = (0..m).map(|i| sign[i] * rhs[i]).collect();
    for j in 0..width {
        if tab.at_upper[j] && tab.upper[j] != 0.0 {
            let u = tab.upper[j];
            for i in 0..m {
                let orig = if j < nz {
                    sign[i] * rows_z[i][j]
                } else if slack_col[i].map(|(c, _)| c) == Some(j) {
                    slack_col[i].unwrap().1
                } else {
                    0.0
                };
                b_eff[i] -= orig * u;
            }
        }
    }
    for i in 0..m {
        let mut v = 0.0;
        for k in 0..m {
            v += tab.a[i * width + unit_col[k]] * b_eff[k];
        }
        tab.xb[i] = v;
    }

    let mut z = vec![0.0; width];
    for j in 0..width {
        if tab.at_upper[j] {
            z[j] = tab.upper[j];
        }
    }
    for i in 0..m {
        let j = tab.basis[i];
        z[j] = tab.xb[i].clamp(0.0, tab.upper[j]);
    }
    let x: Vec<f64> = (0..n)
        .map(|j| {
            let xs = maps[j].offset + maps[j].parts.iter().map(|&(c, coef)| coef * z[c]).sum::<f64>();
            xs * col_scale[j]
        })
        .collect();
    let objective = lp.objective_value(&x);

    let flip = if maximize { 1.0 } else { -1.0 };
    let duals: Vec<f64> = (0..m)
        .map(|i| {
            let y_norm = -tab.d2[unit_col[i]];
            flip * sign[i] * row_scale[i] * y_norm
        })
        .collect();

    let residual = lp.primal_residual(&x);
    let status = if residual > opts.feasibility_tol { LpStatus::NumericalFailure } else { LpStatus::Optimal };
    if status == LpStatus::NumericalFailure {
        return Err(LpError::Numerical(format!(
            "primal residual {residual:e} exceeds {:e} after {iterations} iterations",
            opts.feasibility_tol
        )));
    }
    Ok(LpSolution { status, x, objective, duals, iterations })
}

fn run_phase(
    tab: &mut Tableau,
    phase: Phase,
    opts: &SolverOptions,
    cap: usize,
    iterations: &mut usize,
) -> Result<(), LpError> {
    let m = tab.m;
    let w = tab.width;
    let mut degenerate_run = 0usize;
    let mut bland = false;
    loop {
        let is_basic = tab.is_basic();
        // Pricing.
        let costs = tab.costs(phase);
        let mut entering: Option<(usize, f64)> = None;
        let mut best = 0.0;
        for j in 0..w {
            if is_basic[j] {
                continue;
            }
            let d = costs[j];
            if let Some(dir) = tab.improving(j, d, opts.optimality_tol) {
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if d.abs() > best {
                    best = d.abs();
                    entering = Some((j, dir));
                }
            }
        }
        let Some((q, dir)) = entering else {
            return Ok(());
        };
        if *iterations >= cap {
            let phase = if phase == Phase::One { 1 } else { 2 };
            return Err(LpError::IterationCap { cap, phase, degenerate: degenerate_run });
        }
        *iterations += 1;

        // Ratio test. Basic i moves by -dir * theta * alpha_i.
        let mut theta = tab.upper[q];
        let mut leave: Option<(usize, bool)> = None;
        let mut leave_key = (f64::INFINITY, 0.0f64, usize::MAX);
        for i in 0..m {
            let alpha = tab.a[i * w + q];
            if alpha.abs() <= opts.pivot_tol {
                continue;
            }
            let g = dir * alpha;
            let bj = tab.basis[i];
            let (limit, to_upper) = if g > 0.0 {
                (tab.xb[i].max(0.0) / g, false)
            } else {
                let u = tab.upper[bj];
                if !u.is_finite() {
                    continue;
                }
                ((u - tab.xb[i]).max(0.0) / -g, true)
            };
            // Smallest ratio; on ties prefer the larger pivot (or the
            // smallest variable index under Bland's rule).
            let key = if bland { (limit, 0.0, bj) } else { (limit, -alpha.abs(), bj) };
            let better = key.0 < leave_key.0
                || (key.0 == leave_key.0 && (key.1 < leave_key.1 || (key.1 == leave_key.1 && key.2 < leave_key.2)));
            if better {
                leave_key = key;
                leave = Some((i, to_upper));
            }
        }
        if leave_key.0 < theta {
            theta = leave_key.0;
        } else {
            leave = None;
        }
        if !theta.is_finite() {
            return Err(LpError::Unbounded { column: q });
        }

        if theta <= 1e-12 {
            degenerate_run += 1;
            if degenerate_run >= opts.bland_after * m.max(1) {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }

        for i in 0..m {
            tab.xb[i] -= dir * theta * tab.a[i * w + q];
        }
        match leave {
            None => {
                // Bound flip: the entering variable runs to its other bound.
                tab.at_upper[q] = !tab.at_upper[q];
            }
            Some((r, to_upper)) => {
                let leaving = tab.basis[r];
                let entering_value = if dir > 0.0 { theta } else { tab.upper[q] - theta };
                tab.pivot(r, q);
                tab.xb[r] = entering_value;
                tab.at_upper[q] = false;
                tab.at_upper[leaving] = to_upper;
            }
        }
    }
}
