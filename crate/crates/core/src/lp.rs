//! Exact linear programming over rationals.
//!
//! Dense two-phase simplex with Bland's rule. All variables are
//! nonnegative; the objective is minimized. Problems here are small (tens
//! of variables, a few hundred rows), so a dense tableau is adequate.

use num_traits::{Signed, Zero};

use crate::rational::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rat)>,
    pub cmp: Cmp,
    pub rhs: Rat,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, Rat)>, cmp: Cmp, rhs: Rat) -> Self {
        Constraint { coeffs, cmp, rhs }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rat, x: Vec<Rat> },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<Rat>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![Rat::zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn set_objective(&mut self, var: usize, coeff: Rat) {
        self.objective[var] = coeff;
    }

    pub fn add(&mut self, c: Constraint) {
        debug_assert!(c.coeffs.iter().all(|(v, _)| *v < self.num_vars));
        self.constraints.push(c);
    }

    pub fn constrain(&mut self, coeffs: Vec<(usize, Rat)>, cmp: Cmp, rhs: Rat) {
        self.add(Constraint::new(coeffs, cmp, rhs));
    }

    /// Minimizes the objective.
    pub fn minimize(&self) -> LpOutcome {
        Tableau::build(self).solve(&self.objective)
    }

    /// Maximizes the objective.
    pub fn maximize(&self) -> LpOutcome {
        let neg: Vec<Rat> = self.objective.iter().map(|c| -c).collect();
        match Tableau::build(self).solve(&neg) {
            LpOutcome::Optimal { value, x } => LpOutcome::Optimal { value: -value, x },
            other => other,
        }
    }
}

struct Tableau {
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    num_structural: usize,
    /// Columns `artificial_start..num_cols` are artificial.
    artificial_start: usize,
    num_cols: usize,
}

/// Coefficients, comparison and right-hand side of one constraint.
type Row = (Vec<(usize, Rat)>, Cmp, Rat);

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars;
        let mut slack_count = 0;
        let mut art_count = 0;
        // Normalize to nonnegative right-hand sides.
        let normalized: Vec<Row> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let cmp = match c.cmp {
                        Cmp::Le => Cmp::Ge,
                        Cmp::Ge => Cmp::Le,
                        Cmp::Eq => Cmp::Eq,
                    };
                    let coeffs = c.coeffs.iter().map(|(v, a)| (*v, -a)).collect();
                    (coeffs, cmp, -&c.rhs)
                } else {
                    (c.coeffs.clone(), c.cmp, c.rhs.clone())
                }
            })
            .collect();
        for (_, cmp, _) in &normalized {
            match cmp {
                Cmp::Le => slack_count += 1,
                Cmp::Ge => {
                    slack_count += 1;
                    art_count += 1
                }
                Cmp::Eq => art_count += 1,
            }
        }
        let artificial_start = n + slack_count;
        let num_cols = artificial_start + art_count;
        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let (mut next_slack, mut next_art) = (n, artificial_start);
        for (coeffs, cmp, rhs) in normalized {
            let mut row = vec![Rat::zero(); num_cols + 1];
            for (v, a) in coeffs {
                row[v] += a;
            }
            row[num_cols] = rhs;
            match cmp {
                Cmp::Le => {
                    row[next_slack] = Rat::from_integer(1.into());
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Cmp::Ge => {
                    row[next_slack] = Rat::from_integer((-1).into());
                    next_slack += 1;
                    row[next_art] = Rat::from_integer(1.into());
                    basis.push(next_art);
                    next_art += 1;
                }
                Cmp::Eq => {
                    row[next_art] = Rat::from_integer(1.into());
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            num_structural: n,
            artificial_start,
            num_cols,
        }
    }

    fn rhs(&self, i: usize) -> &Rat {
        &self.rows[i][self.num_cols]
    }

    /// Reduced-cost row (last entry is minus the objective value).
    fn cost_row(&self, cost: &[Rat]) -> Vec<Rat> {
        let mut r: Vec<Rat> = cost.to_vec();
        r.resize(self.num_cols + 1, Rat::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = r[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (j, a) in self.rows[i].iter().enumerate() {
                if !a.is_zero() {
                    r[j] -= &cb * a;
                }
            }
        }
        r
    }

    fn pivot(&mut self, obj: &mut [Rat], pr: usize, pc: usize) {
        let piv = self.rows[pr][pc].clone();
        let nz: Vec<usize> = {
            let row = &mut self.rows[pr];
            for a in row.iter_mut() {
                if !a.is_zero() {
                    *a /= &piv;
                }
            }
            (0..row.len()).filter(|&j| !row[j].is_zero()).collect()
        };
        let prow: Vec<(usize, Rat)> = nz.iter().map(|&j| (j, self.rows[pr][j].clone())).collect();
        for i in 0..self.rows.len() {
            if i == pr {
                continue;
            }
            let f = self.rows[i][pc].clone();
            if f.is_zero() {
                continue;
            }
            let row = &mut self.rows[i];
            for (j, a) in &prow {
                row[*j] -= &f * a;
            }
        }
        let f = obj[pc].clone();
        if !f.is_zero() {
            for (j, a) in &prow {
                obj[*j] -= &f * a;
            }
        }
        self.basis[pr] = pc;
    }

    /// Runs simplex iterations on `obj` over columns `< col_limit`.
    /// Returns false if unbounded.
    fn iterate(&mut self, obj: &mut [Rat], col_limit: usize) -> bool {
        loop {
            let Some(pc) = (0..col_limit).find(|&j| obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][pc];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((pr, _)) => self.pivot(obj, pr, pc),
                None => return false,
            }
        }
    }

    fn solve(mut self, cost: &[Rat]) -> LpOutcome {
        if self.num_cols > self.artificial_start {
            let mut phase1 = vec![Rat::zero(); self.num_cols];
            for c in phase1.iter_mut().skip(self.artificial_start) {
                *c = Rat::from_integer(1.into());
            }
            let mut obj = self.cost_row(&phase1);
            self.iterate(&mut obj, self.num_cols);
            if !obj[self.num_cols].is_zero() {
                return LpOutcome::Infeasible;
            }
            // Drive remaining (zero-valued) artificials out of the basis.
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.artificial_start {
                    match (0..self.artificial_start).find(|&j| !self.rows[i][j].is_zero()) {
                        Some(pc) => {
                            self.pivot(&mut obj, i, pc);
                            i += 1;
                        }
                        None => {
                            self.rows.remove(i);
                            self.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }
        let mut obj = self.cost_row(cost);
        if !self.iterate(&mut obj, self.artificial_start) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rat::zero(); self.num_structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_structural {
                x[b] = self.rhs(i).clone();
            }
        }
        let value = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpOutcome::Optimal { value, x }
    }
}
