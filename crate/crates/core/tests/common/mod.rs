//! Reference implementations used only by the test suites. None of them share
//! code with the library.

#![allow(dead_code)]

use covgame::lpsolve::{LinearProgram, RowKind, Sense};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;

// ---------------------------------------------------------------------------
// Incomplete gamma: power series below the transition, Lentz continued
// fraction above it, with a Stirling-series log-gamma.

pub fn ln_gamma(a: f64) -> f64 {
    let mut z = a;
    let mut shift = 0.0;
    while z < 15.0 {
        shift -= z.ln();
        z += 1.0;
    }
    let r = 1.0 / z;
    let r2 = r * r;
    let series = r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))));
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series + shift
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..200_000 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..200_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_fraction(a, x)
    }
}

// ---------------------------------------------------------------------------
// Gaussian tail from the Maclaurin series of erf, inverted by bisection.
// Intended for |x| <= 3.

pub fn erf_series(z: f64) -> f64 {
    let mut term = z;
    let mut sum = z;
    for n in 1..400 {
        term *= -z * z / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    2.0 / std::f64::consts::PI.sqrt() * sum
}

pub fn gauss_tail(x: f64) -> f64 {
    0.5 * (1.0 - erf_series(x / std::f64::consts::SQRT_2))
}

pub fn gauss_tail_inverse(p: f64) -> f64 {
    let (mut lo, mut hi) = (-4.0f64, 4.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gauss_tail(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// ---------------------------------------------------------------------------
// Exact rational two-phase simplex with Bland's rule. Every variable must
// have finite bounds.

type Q = BigRational;

fn q(v: f64) -> Q {
    BigRational::from_float(v).expect("finite")
}

struct Tab {
    rows: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
}

impl Tab {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = &*v / &p;
        }
        self.rhs[r] = &self.rhs[r] / &p;
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            let (pivot_row, row) = if i < r {
                let (a, b) = self.rows.split_at_mut(r);
                (&b[0], &mut a[i])
            } else {
                let (a, b) = self.rows.split_at_mut(i);
                (&a[r], &mut b[0])
            };
            for (v, pv) in row.iter_mut().zip(pivot_row) {
                if !pv.is_zero() {
                    *v = &*v - &f * pv;
                }
            }
            self.rhs[i] = &self.rhs[i] - &f * &self.rhs[r];
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost · z` over columns `allowed`; returns false if unbounded.
    fn maximize(&mut self, cost: &[Q], allowed: &dyn Fn(usize) -> bool) -> bool {
        let ncols = cost.len();
        loop {
            let mut entering = None;
            for j in (0..ncols).filter(|&j| allowed(j)) {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !self.rows[i][j].is_zero() {
                        d -= &cost[b] * &self.rows[i][j];
                    }
                }
                if d.is_positive() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][c].is_positive() {
                    let ratio = &self.rhs[i] / &self.rows[i][c];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else { return false };
            self.pivot(r, c);
        }
    }
}

/// Optimal objective of `lp`, exactly. `None` if infeasible or unbounded.
pub fn exact_lp_objective(lp: &LinearProgram) -> Option<Q> {
    let n = lp.var_count();
    let lower: Vec<Q> = lp.bounds.iter().map(|b| q(b.0)).collect();
    let mut cons: Vec<(Vec<Q>, RowKind, Q)> = Vec::new();
    for row in &lp.rows {
        let a: Vec<Q> = row.coeffs.iter().map(|&v| q(v)).collect();
        let shift: Q = a.iter().zip(&lower).map(|(x, l)| x * l).sum();
        cons.push((a, row.kind, q(row.rhs) - shift));
    }
    for (j, b) in lp.bounds.iter().enumerate() {
        let mut a = vec![Q::zero(); n];
        a[j] = Q::from_integer(BigInt::from(1));
        cons.push((a, RowKind::Le, q(b.1) - q(b.0)));
    }
    for c in cons.iter_mut() {
        if c.2.is_negative() {
            for v in c.0.iter_mut() {
                *v = -v.clone();
            }
            c.2 = -c.2.clone();
            c.1 = match c.1 {
                RowKind::Le => RowKind::Ge,
                RowKind::Ge => RowKind::Le,
                RowKind::Eq => RowKind::Eq,
            };
        }
    }
    let m = cons.len();
    let slack_count = cons.iter().filter(|c| c.1 != RowKind::Eq).count();
    let art_count = cons.iter().filter(|c| c.1 != RowKind::Le).count();
    let total = n + slack_count + art_count;
    let first_art = n + slack_count;
    let one = Q::from_integer(BigInt::from(1));
    let mut tab = Tab { rows: Vec::with_capacity(m), rhs: Vec::with_capacity(m), basis: Vec::with_capacity(m) };
    let (mut s, mut a) = (n, first_art);
    for (coeffs, kind, rhs) in cons {
        let mut row = coeffs;
        row.resize(total, Q::zero());
        match kind {
            RowKind::Le => {
                row[s] = one.clone();
                tab.basis.push(s);
                s += 1;
            }
            RowKind::Ge => {
                row[s] = -one.clone();
                s += 1;
                row[a] = one.clone();
                tab.basis.push(a);
                a += 1;
            }
            RowKind::Eq => {
                row[a] = one.clone();
                tab.basis.push(a);
                a += 1;
            }
        }
        tab.rows.push(row);
        tab.rhs.push(rhs);
    }
    let phase1: Vec<Q> = (0..total).map(|j| if j >= first_art { -one.clone() } else { Q::zero() }).collect();
    tab.maximize(&phase1, &|_| true);
    let infeas: Q = tab.basis.iter().zip(&tab.rhs).filter(|(&b, _)| b >= first_art).map(|(_, r)| r.clone()).sum();
    if infeas.is_positive() {
        return None;
    }
    // drive zero-level artificials out of the basis; drop redundant rows
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= first_art {
            match (0..first_art).find(|&j| !tab.rows[r][j].is_zero()) {
                Some(c) => tab.pivot(r, c),
                None => {
                    tab.rows.remove(r);
                    tab.rhs.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    let flip = if lp.sense == Sense::Minimize { -1.0 } else { 1.0 };
    let mut cost: Vec<Q> = lp.objective.iter().map(|&c| q(flip * c)).collect();
    cost.resize(total, Q::zero());
    if !tab.maximize(&cost, &|j| j < first_art) {
        return None;
    }
    let mut z = vec![Q::zero(); n];
    for (&b, v) in tab.basis.iter().zip(&tab.rhs) {
        if b < n {
            z[b] = v.clone();
        }
    }
    Some(lp.objective.iter().zip(z.iter().zip(&lower)).map(|(&c, (zj, l))| q(c) * (zj + l)).sum())
}

pub fn to_f64(v: &Q) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().expect("representable")
}

/// Random bounded LP with integer data and a known integer feasible point.
pub fn random_integer_lp<R: Rng>(rng: &mut R, max_rows: usize, max_vars: usize) -> LinearProgram {
    let n = rng.random_range(1..=max_vars);
    let m = rng.random_range(1..=max_rows);
    let sense = if rng.random_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
    let mut lp = LinearProgram::new(sense, n);
    let mut x0 = Vec::with_capacity(n);
    for j in 0..n {
        let l = rng.random_range(-5..=3) as f64;
        let u = l + rng.random_range(1..=8) as f64;
        lp.bounds[j] = (l, u);
        x0.push(rng.random_range(l as i64..=u as i64) as f64);
        lp.objective[j] = rng.random_range(-5..=5) as f64;
    }
    for _ in 0..m {
        let coeffs: Vec<f64> =
            (0..n).map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(-5..=5) as f64 }).collect();
        let at: f64 = coeffs.iter().zip(&x0).map(|(a, x)| a * x).sum();
        let slack = rng.random_range(0..=3) as f64;
        let (kind, rhs) = match rng.random_range(0..3) {
            0 => (RowKind::Le, at + slack),
            1 => (RowKind::Ge, at - slack),
            _ => (RowKind::Eq, at),
        };
        lp.add_row(coeffs, kind, rhs);
    }
    lp
}

// ---------------------------------------------------------------------------
// Matrix-game oracles.

/// Best guaranteed row payoff over row strategies whose entries are
/// multiples of `1/steps`. At most 8 columns.
pub fn grid_maximin(a: &[Vec<f64>], steps: usize) -> f64 {
    const MAX_COLS: usize = 8;
    // partial column sums are passed by value so no rounding drift builds up
    fn rec(a: &[Vec<f64>], row: usize, left: usize, steps: usize, acc: [f64; MAX_COLS], best: &mut f64) {
        let cols = a[0].len();
        let last = row == a.len() - 1;
        let range = if last { left..=left } else { 0..=left };
        for k in range {
            let w = k as f64 / steps as f64;
            let mut next = acc;
            for j in 0..cols {
                next[j] += w * a[row][j];
            }
            if last {
                let worst = next[..cols].iter().copied().fold(f64::INFINITY, f64::min);
                if worst > *best {
                    *best = worst;
                }
            } else {
                rec(a, row + 1, left - k, steps, next, best);
            }
        }
    }
    assert!(a[0].len() <= MAX_COLS);
    let mut best = f64::NEG_INFINITY;
    rec(a, 0, steps, steps, [0.0; MAX_COLS], &mut best);
    best
}

/// Bracket `[maximin, minimax]` over strategies on the `1/steps` grid of
/// each player's simplex. The game value lies inside.
pub fn grid_bracket(a: &[Vec<f64>], steps: usize) -> (f64, f64) {
    let neg_t: Vec<Vec<f64>> = (0..a[0].len()).map(|j| a.iter().map(|r| -r[j]).collect()).collect();
    (grid_maximin(a, steps), -grid_maximin(&neg_t, steps))
}

/// Value estimate from `rounds` of alternating fictitious play (the column
/// player responds first, the row player answers the updated history):
/// midpoint of the bounds certified by the two empirical mixtures.
pub fn fictitious_play(a: &[Vec<f64>], rounds: usize) -> f64 {
    let (m, n) = (a.len(), a[0].len());
    // row_pay[i] = payoff of row i against the column history, col_pay[j]
    // likewise against the row history
    let mut row_pay = vec![0.0; m];
    let mut col_pay = vec![0.0; n];
    let mut i = 0usize;
    for _ in 0..rounds {
        for (c, v) in col_pay.iter_mut().enumerate() {
            *v += a[i][c];
        }
        let j = (0..n).fold(0, |b, c| if col_pay[c] < col_pay[b] { c } else { b });
        for (r, v) in row_pay.iter_mut().enumerate() {
            *v += a[r][j];
        }
        i = (0..m).fold(0, |b, r| if row_pay[r] > row_pay[b] { r } else { b });
    }
    let t = rounds as f64;
    let upper = row_pay.iter().copied().fold(f64::NEG_INFINITY, f64::max) / t;
    let lower = col_pay.iter().copied().fold(f64::INFINITY, f64::min) / t;
    0.5 * (upper + lower)
}

pub fn random_matrix<R: Rng>(rng: &mut R, max_dim: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let m = rng.random_range(1..=max_dim);
    let n = rng.random_range(1..=max_dim);
    (0..m).map(|_| (0..n).map(|_| rng.random_range(lo..hi)).collect()).collect()
}
