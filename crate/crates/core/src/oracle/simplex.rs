//! Dense two-phase simplex with Bland's rule.
//!
//! Problems here have one variable per successor and a handful of rows, so
//! a full tableau is cheap even over big rationals.

use super::scalar::{Scalar, Tol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

/// Constraints over variables `x >= 0`.
#[derive(Debug, Clone)]
pub struct Lp<F> {
    pub nvars: usize,
    pub rows: Vec<(Vec<F>, Rel, F)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<F> {
    Infeasible,
    Unbounded,
    Optimal(F),
}

/// Guard against float-mode cycling; exact mode never gets close.
const MAX_PIVOTS: usize = 100_000;

struct Tableau<F> {
    rows: Vec<Vec<F>>,
    basis: Vec<usize>,
    width: usize,
}

impl<F: Scalar> Tableau<F> {
    fn rhs(&self, i: usize) -> &F {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / piv.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            if f == F::zero() {
                continue;
            }
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * p.clone();
            }
        }
        self.basis[r] = c;
    }

    fn value(&self, cost: &[F]) -> F {
        (0..self.rows.len()).fold(F::zero(), |acc, i| {
            acc + cost[self.basis[i]].clone() * self.rhs(i).clone()
        })
    }

    /// Maximizes `cost · x` over columns `< allowed`; `false` if unbounded.
    fn optimize(&mut self, cost: &[F], allowed: usize, tol: &Tol<F>) -> bool {
        for _ in 0..MAX_PIVOTS {
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = cost[j].clone();
                for (i, row) in self.rows.iter().enumerate() {
                    reduced = reduced - cost[self.basis[i]].clone() * row[j].clone();
                }
                if tol.is_pos(&reduced) {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else { return true };
            let mut leave: Option<(usize, F)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][j];
                if !tol.is_pos(a) {
                    continue;
                }
                let ratio = self.rhs(i).clone() / a.clone();
                let better = match &leave {
                    None => true,
                    Some((k, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((i, _)) = leave else { return false };
            self.pivot(i, j);
        }
        true
    }
}

/// Maximizes `objective · x` subject to `lp`, or only decides feasibility
/// when `objective` is `None` (reported as `Optimal(0)`).
pub fn solve<F: Scalar>(lp: &Lp<F>, objective: Option<&[F]>, tol: &Tol<F>) -> LpOutcome<F> {
    let n = lp.nvars;
    let mut rows: Vec<(Vec<F>, Rel, F)> = Vec::with_capacity(lp.rows.len());
    for (coeffs, rel, rhs) in &lp.rows {
        if *rhs < F::zero() {
            let flipped = match rel {
                Rel::Le => Rel::Ge,
                Rel::Ge => Rel::Le,
                Rel::Eq => Rel::Eq,
            };
            rows.push((coeffs.iter().map(|c| -c.clone()).collect(), flipped, -rhs.clone()));
        } else {
            rows.push((coeffs.clone(), *rel, rhs.clone()));
        }
    }
    let m = rows.len();
    let slacks = rows.iter().filter(|r| r.1 != Rel::Eq).count();
    let artificials = rows.iter().filter(|r| r.1 != Rel::Le).count();
    let art_start = n + slacks;
    let width = art_start + artificials;

    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        width,
    };
    let (mut next_slack, mut next_art) = (n, art_start);
    for (coeffs, rel, rhs) in rows {
        let mut row = vec![F::zero(); width + 1];
        for (j, c) in coeffs.into_iter().enumerate() {
            row[j] = c;
        }
        row[width] = rhs;
        match rel {
            Rel::Le => {
                row[next_slack] = F::one();
                tab.basis.push(next_slack);
                next_slack += 1;
            }
            Rel::Ge => {
                row[next_slack] = -F::one();
                next_slack += 1;
                row[next_art] = F::one();
                tab.basis.push(next_art);
                next_art += 1;
            }
            Rel::Eq => {
                row[next_art] = F::one();
                tab.basis.push(next_art);
                next_art += 1;
            }
        }
        tab.rows.push(row);
    }

    if artificials > 0 {
        let mut cost = vec![F::zero(); width];
        for c in cost.iter_mut().skip(art_start) {
            *c = -F::one();
        }
        tab.optimize(&cost, width, tol);
        if tol.is_neg(&tab.value(&cost)) {
            return LpOutcome::Infeasible;
        }
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= art_start {
                match (0..art_start).find(|&j| !tol.is_zero(&tab.rows[i][j])) {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let Some(obj) = objective else {
        return LpOutcome::Optimal(F::zero());
    };
    let mut cost = vec![F::zero(); width];
    for (c, o) in cost.iter_mut().zip(obj) {
        *c = o.clone();
    }
    if !tab.optimize(&cost, art_start, tol) {
        return LpOutcome::Unbounded;
    }
    LpOutcome::Optimal(tab.value(&cost))
}
