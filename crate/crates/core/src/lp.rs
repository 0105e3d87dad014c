//! Exact linear programming over arbitrary-precision rationals.
//!
//! Two independent decision procedures live here:
//!
//! - [`solve`]: a two-phase dense simplex with Bland's rule (terminating,
//!   exact). Infeasible instances come back with a Farkas certificate that
//!   can be re-verified against the original constraints.
//! - [`fourier_motzkin_feasible`]: projection-based feasibility, used as a
//!   second route when cross-checking simplex verdicts.
//!
//! All variables are implicitly nonnegative, which is the shape every
//! caller in this crate needs (probability weights).

use crate::Rat;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelOp {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Rat>,
    pub op: RelOp,
    pub rhs: Rat,
}

impl Constraint {
    pub fn eq(coeffs: Vec<Rat>, rhs: Rat) -> Self {
        Constraint {
            coeffs,
            op: RelOp::Eq,
            rhs,
        }
    }
    pub fn le(coeffs: Vec<Rat>, rhs: Rat) -> Self {
        Constraint {
            coeffs,
            op: RelOp::Le,
            rhs,
        }
    }
    pub fn ge(coeffs: Vec<Rat>, rhs: Rat) -> Self {
        Constraint {
            coeffs,
            op: RelOp::Ge,
            rhs,
        }
    }
}

/// Farkas certificate of infeasibility: one multiplier per original
/// constraint. See [`verify_infeasibility`] for the inequality it witnesses.
#[derive(Debug, Clone)]
pub struct FarkasCertificate {
    pub multipliers: Vec<Rat>,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal { x: Vec<Rat>, value: Rat },
    Infeasible(FarkasCertificate),
    Unbounded,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible(_))
    }
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("constraint has {got} coefficients, expected {want}")]
    BadConstraint { got: usize, want: usize },
    #[error("elimination exceeded the row cap ({0} rows)")]
    EliminationBlowup(usize),
}

/// Feasibility-only convenience wrapper: zero objective.
pub fn feasible(num_vars: usize, constraints: &[Constraint]) -> Result<LpOutcome, LpError> {
    solve(num_vars, constraints, &vec![Rat::zero(); num_vars])
}

/// Maximize `objective . x` subject to `constraints` and `x >= 0`.
pub fn solve(
    num_vars: usize,
    constraints: &[Constraint],
    objective: &[Rat],
) -> Result<LpOutcome, LpError> {
    for c in constraints {
        if c.coeffs.len() != num_vars {
            return Err(LpError::BadConstraint {
                got: c.coeffs.len(),
                want: num_vars,
            });
        }
    }
    let mut tab = Tableau::new(num_vars, constraints);
    if let Some(farkas) = tab.phase_one() {
        return Ok(LpOutcome::Infeasible(farkas));
    }
    Ok(tab.phase_two(objective))
}

/// Exact check that `multipliers` certify infeasibility of
/// `{x >= 0 : constraints}`: with y_i <= 0 on Le rows, y_i >= 0 on Ge rows,
/// the aggregate sum_i y_i a_i has all entries <= 0 while sum_i y_i b_i > 0.
pub fn verify_infeasibility(constraints: &[Constraint], cert: &FarkasCertificate) -> bool {
    if cert.multipliers.len() != constraints.len() {
        return false;
    }
    let num_vars = constraints.first().map_or(0, |c| c.coeffs.len());
    for (c, y) in constraints.iter().zip(&cert.multipliers) {
        match c.op {
            RelOp::Le if y.is_positive() => return false,
            RelOp::Ge if y.is_negative() => return false,
            _ => {}
        }
    }
    let mut agg = vec![Rat::zero(); num_vars];
    let mut rhs = Rat::zero();
    for (c, y) in constraints.iter().zip(&cert.multipliers) {
        for (a, coeff) in agg.iter_mut().zip(&c.coeffs) {
            *a += y * coeff;
        }
        rhs += y * &c.rhs;
    }
    agg.iter().all(|a| !a.is_positive()) && rhs.is_positive()
}

struct Tableau {
    rows: Vec<Vec<Rat>>, // m x ntot
    rhs: Vec<Rat>,
    basis: Vec<usize>,
    num_vars: usize,
    ntot: usize,
    // bookkeeping for multiplier extraction / verification
    identity_col: Vec<usize>, // per row: its initial identity column
    identity_is_artificial: Vec<bool>,
    flipped: Vec<bool>,
    artificial_cols: Vec<usize>,
    allow_artificial: bool,
}

impl Tableau {
    fn new(num_vars: usize, constraints: &[Constraint]) -> Self {
        let m = constraints.len();
        // count extra columns: slack/surplus for Le/Ge, artificial for Ge/Eq
        let mut ncols = num_vars;
        let mut slack_col = vec![usize::MAX; m];
        for (i, c) in constraints.iter().enumerate() {
            if c.op != RelOp::Eq {
                slack_col[i] = ncols;
                ncols += 1;
            }
        }
        let art_start = ncols;
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut identity_col = Vec::with_capacity(m);
        let mut identity_is_artificial = Vec::with_capacity(m);
        let mut flipped = Vec::with_capacity(m);
        let mut artificial_cols = Vec::new();
        let mut next_art = art_start;
        // first pass to count artificials
        let mut n_art = 0;
        for c in constraints {
            let flip = c.rhs.is_negative();
            let op = effective_op(c.op, flip);
            if op != RelOp::Le {
                n_art += 1;
            }
        }
        let ntot = art_start + n_art;
        for (i, c) in constraints.iter().enumerate() {
            let flip = c.rhs.is_negative();
            let mut row = vec![Rat::zero(); ntot];
            for (j, a) in c.coeffs.iter().enumerate() {
                row[j] = if flip { -a.clone() } else { a.clone() };
            }
            let b = if flip { -c.rhs.clone() } else { c.rhs.clone() };
            let op = effective_op(c.op, flip);
            if slack_col[i] != usize::MAX {
                // original Le gets +slack, original Ge gets -surplus; flipping
                // the row swaps which one we are in
                row[slack_col[i]] = if op == RelOp::Le {
                    Rat::one()
                } else {
                    -Rat::one()
                };
            }
            if op == RelOp::Le {
                basis.push(slack_col[i]);
                identity_col.push(slack_col[i]);
                identity_is_artificial.push(false);
            } else {
                row[next_art] = Rat::one();
                basis.push(next_art);
                identity_col.push(next_art);
                identity_is_artificial.push(true);
                artificial_cols.push(next_art);
                next_art += 1;
            }
            rows.push(row);
            rhs.push(b);
            flipped.push(flip);
        }
        Tableau {
            rows,
            rhs,
            basis,
            num_vars,
            ntot,
            identity_col,
            identity_is_artificial,
            flipped,
            artificial_cols,
            allow_artificial: true,
        }
    }

    fn is_artificial(&self, col: usize) -> bool {
        self.artificial_cols.binary_search(&col).is_ok()
    }

    /// Reduced-cost row for cost vector `cost` (minimization form).
    fn reduced_costs(&self, cost: &[Rat]) -> Vec<Rat> {
        let mut red: Vec<Rat> = cost.to_vec();
        for (i, &bi) in self.basis.iter().enumerate() {
            if cost[bi].is_zero() {
                continue;
            }
            let cb = cost[bi].clone();
            for j in 0..self.ntot {
                if !self.rows[i][j].is_zero() {
                    let d = &cb * &self.rows[i][j];
                    red[j] -= d;
                }
            }
        }
        red
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col].clone();
        for x in self.rows[row].iter_mut() {
            *x /= &piv;
        }
        self.rhs[row] /= &piv;
        let prow = self.rows[row].clone();
        let prhs = self.rhs[row].clone();
        for k in 0..self.rows.len() {
            if k == row || self.rows[k][col].is_zero() {
                continue;
            }
            let f = self.rows[k][col].clone();
            for (x, p) in self.rows[k].iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
            self.rhs[k] -= &f * &prhs;
        }
        self.basis[row] = col;
    }

    /// Bland's rule simplex for minimizing `cost . x_full`. Returns None on
    /// optimal, Some(col) when `col` proves unboundedness.
    fn run(&mut self, cost: &[Rat]) -> Option<usize> {
        loop {
            let red = self.reduced_costs(cost);
            let entering = (0..self.ntot).find(|&j| {
                red[j].is_negative() && (self.allow_artificial || !self.is_artificial(j))
            });
            let Some(col) = entering else { return None };
            // ratio test, Bland tie-break on basis variable index
            let mut best: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][col].is_positive() {
                    let ratio = &self.rhs[i] / &self.rows[i][col];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return Some(col),
            }
        }
    }

    /// Phase one: drive artificials to zero. Returns a Farkas certificate on
    /// infeasibility.
    fn phase_one(&mut self) -> Option<FarkasCertificate> {
        if self.artificial_cols.is_empty() {
            return None;
        }
        let mut cost = vec![Rat::zero(); self.ntot];
        for &a in &self.artificial_cols {
            cost[a] = Rat::one();
        }
        self.allow_artificial = true;
        let unbounded = self.run(&cost);
        debug_assert!(unbounded.is_none(), "phase-1 objective is bounded below");
        let total: Rat = self
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| self.is_artificial(b))
            .map(|(i, _)| self.rhs[i].clone())
            .sum();
        if total.is_positive() {
            // simplex multipliers from the reduced costs of the initial
            // identity columns: pi_i = c_identity - red[identity]
            let red = self.reduced_costs(&cost);
            let mut y = Vec::with_capacity(self.rows.len());
            for i in 0..self.rows.len() {
                let c0 = if self.identity_is_artificial[i] {
                    Rat::one()
                } else {
                    Rat::zero()
                };
                let mut pi = c0 - red[self.identity_col[i]].clone();
                if self.flipped[i] {
                    pi = -pi;
                }
                y.push(pi);
            }
            return Some(FarkasCertificate { multipliers: y });
        }
        // pivot any degenerate basic artificials out, or detect redundant rows
        for i in 0..self.rows.len() {
            if self.is_artificial(self.basis[i]) {
                if let Some(col) = (0..self.num_vars).find(|&j| !self.rows[i][j].is_zero()) {
                    self.pivot(i, col);
                }
                // if the row is all zeros on structural columns it is
                // redundant; the artificial stays basic at value zero and is
                // barred from re-entering in phase two
            }
        }
        None
    }

    fn phase_two(&mut self, objective: &[Rat]) -> LpOutcome {
        let mut cost = vec![Rat::zero(); self.ntot];
        for (j, c) in objective.iter().enumerate() {
            cost[j] = -c.clone(); // maximize => minimize negation
        }
        self.allow_artificial = false;
        if self.run(&cost).is_some() {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rat::zero(); self.num_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_vars {
                x[b] = self.rhs[i].clone();
            }
        }
        let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpOutcome::Optimal { x, value }
    }
}

fn effective_op(op: RelOp, flip: bool) -> RelOp {
    match (op, flip) {
        (RelOp::Le, true) => RelOp::Ge,
        (RelOp::Ge, true) => RelOp::Le,
        (op, _) => op,
    }
}

/// Feasibility of `{x >= 0 : constraints}` by exact Gaussian elimination
/// of the equalities followed by Fourier-Motzkin projection of the
/// remaining inequality system.
///
/// Independent of the simplex path; used as the second route when checking
/// verdicts. `max_rows` bounds intermediate growth of the projection.
pub fn fourier_motzkin_feasible(
    num_vars: usize,
    constraints: &[Constraint],
    max_rows: usize,
) -> Result<bool, LpError> {
    for c in constraints {
        if c.coeffs.len() != num_vars {
            return Err(LpError::BadConstraint {
                got: c.coeffs.len(),
                want: num_vars,
            });
        }
    }
    // reduce the equality block to row-echelon form and substitute the
    // pivot variables away; x_pivot >= 0 turns into an inequality over the
    // free variables
    let mut eqs: Vec<(Vec<Rat>, Rat)> = constraints
        .iter()
        .filter(|c| c.op == RelOp::Eq)
        .map(|c| (c.coeffs.clone(), c.rhs.clone()))
        .collect();
    let mut pivots: Vec<(usize, Vec<Rat>, Rat)> = Vec::new(); // (col, row, rhs)
    for col in 0..num_vars {
        let Some(r) = eqs.iter().position(|(a, _)| !a[col].is_zero()) else {
            continue;
        };
        let (mut row, mut rhs) = eqs.swap_remove(r);
        let p = row[col].clone();
        for x in row.iter_mut() {
            *x /= &p;
        }
        rhs /= &p;
        for (a, b) in eqs.iter_mut() {
            if !a[col].is_zero() {
                let f = a[col].clone();
                for (x, y) in a.iter_mut().zip(&row) {
                    *x -= &f * y;
                }
                *b -= &f * &rhs;
            }
        }
        pivots.push((col, row, rhs));
    }
    // leftover all-zero equality rows must have zero rhs
    for (a, b) in &eqs {
        debug_assert!(a.iter().all(|x| x.is_zero()));
        if !b.is_zero() {
            return Ok(false);
        }
    }
    // back-substitute so each pivot row mentions only free variables
    for i in (0..pivots.len()).rev() {
        let (col_i, row_i, rhs_i) = pivots[i].clone();
        for (_, row_j, rhs_j) in pivots.iter_mut().take(i) {
            let f = row_j[col_i].clone();
            if !f.is_zero() {
                for (x, y) in row_j.iter_mut().zip(&row_i) {
                    *x -= &f * y;
                }
                *rhs_j -= &f * &rhs_i;
            }
        }
    }
    let is_pivot: Vec<Option<usize>> = {
        let mut v = vec![None; num_vars];
        for (k, (col, _, _)) in pivots.iter().enumerate() {
            v[*col] = Some(k);
        }
        v
    };
    // substitute pivots into a row expressed over all variables, returning
    // the row over free variables only (same length; pivot columns zero)
    let substitute = |coeffs: &[Rat], rhs: &Rat| -> (Vec<Rat>, Rat) {
        let mut a = coeffs.to_vec();
        let mut b = rhs.clone();
        for (col, row, prhs) in &pivots {
            if a[*col].is_zero() {
                continue;
            }
            let f = a[*col].clone();
            // x_col = prhs - sum_{j != col} row_j x_j  (row has 1 at col)
            for (j, y) in row.iter().enumerate() {
                if j == *col {
                    continue;
                }
                a[j] -= &f * y;
            }
            a[*col] = Rat::zero();
            b -= &f * prhs;
        }
        (a, b)
    };
    // assemble the inequality system over free variables
    let mut rows: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for c in constraints {
        match c.op {
            RelOp::Eq => {}
            RelOp::Le => rows.push(substitute(&c.coeffs, &c.rhs)),
            RelOp::Ge => {
                let (a, b) = substitute(&c.coeffs, &c.rhs);
                rows.push((neg(&a), -b));
            }
        }
    }
    for j in 0..num_vars {
        match is_pivot[j] {
            Some(k) => {
                // x_j = rhs_k - sum row_k x_free >= 0
                let (col, row, rhs) = &pivots[k];
                debug_assert_eq!(*col, j);
                let mut a: Vec<Rat> = row.clone();
                a[j] = Rat::zero();
                rows.push((a, rhs.clone()));
            }
            None => {
                let mut v = vec![Rat::zero(); num_vars];
                v[j] = -Rat::one();
                rows.push((v, Rat::zero()));
            }
        }
    }
    let mut remaining: Vec<usize> = (0..num_vars).filter(|j| is_pivot[*j].is_none()).collect();
    while !remaining.is_empty() {
        match simplify(rows, max_rows)? {
            Simplified::Infeasible => return Ok(false),
            Simplified::Rows(r) => rows = r,
        }
        // eliminate the variable with the fewest pos*neg combinations
        let (pick_idx, _) = remaining
            .iter()
            .enumerate()
            .map(|(k, &j)| {
                let pos = rows.iter().filter(|(a, _)| a[j].is_positive()).count();
                let negc = rows.iter().filter(|(a, _)| a[j].is_negative()).count();
                (k, pos * negc + pos + negc)
            })
            .min_by_key(|&(_, cost)| cost)
            .unwrap();
        let var = remaining.remove(pick_idx);
        let (mut pos, mut negs, mut zero) = (Vec::new(), Vec::new(), Vec::new());
        for (a, b) in rows.drain(..) {
            if a[var].is_positive() {
                pos.push((a, b));
            } else if a[var].is_negative() {
                negs.push((a, b));
            } else {
                zero.push((a, b));
            }
        }
        let mut next = zero;
        for (ap, bp) in &pos {
            for (an, bn) in &negs {
                // scale so the eliminated coefficient cancels
                let cp = &ap[var];
                let cn = &an[var]; // negative
                let mut a = Vec::with_capacity(num_vars);
                for j in 0..num_vars {
                    a.push(&ap[j] * &(-cn.clone()) + &an[j] * cp);
                }
                let b = bp * &(-cn.clone()) + bn * cp;
                next.push((a, b));
                if next.len() > max_rows {
                    return Err(LpError::EliminationBlowup(max_rows));
                }
            }
        }
        rows = next;
    }
    match simplify(rows, max_rows)? {
        Simplified::Infeasible => Ok(false),
        Simplified::Rows(_) => Ok(true),
    }
}

enum Simplified {
    Infeasible,
    Rows(Vec<(Vec<Rat>, Rat)>),
}

/// Drop trivially-true rows and duplicates; detect constant contradictions.
fn simplify(rows: Vec<(Vec<Rat>, Rat)>, max_rows: usize) -> Result<Simplified, LpError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (a, b) in rows {
        if a.iter().all(|x| x.is_zero()) {
            if b.is_negative() {
                return Ok(Simplified::Infeasible);
            }
            continue;
        }
        // normalize by the largest absolute coefficient for dedup
        let scale = a.iter().map(|x| x.abs()).max().unwrap();
        let na: Vec<Rat> = a.iter().map(|x| x / &scale).collect();
        let nb = &b / &scale;
        if seen.insert((na.clone(), nb.clone())) {
            out.push((na, nb));
            if out.len() > max_rows {
                return Err(LpError::EliminationBlowup(max_rows));
            }
        }
    }
    Ok(Simplified::Rows(out))
}

fn neg(v: &[Rat]) -> Vec<Rat> {
    v.iter().map(|x| -x.clone()).collect()
}

/// Shorthand for building exact rationals in constraint builders.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}
