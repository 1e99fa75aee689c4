//! Exact dense pivoting kernel.
//!
//! A [`Tableau`] stores `B⁻¹ [A | b]` for an equality system `A x = b`
//! together with the basic column of every row. The Scarf engine drives it
//! with the lexicographic ratio rule; [`maximize`] runs a two-phase simplex
//! with Bland's rule on top of it.

use num_traits::{One, Signed, Zero};

use crate::frac::Rational;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    /// Builds the tableau of `A x = b` where `columns[j]` is column `j` of
    /// `A`. The columns listed in `basis` must form an identity matrix (row
    /// `r` carries the 1 of `basis[r]`).
    pub fn from_columns(columns: &[Vec<Rational>], rhs: &[Rational], basis: Vec<usize>) -> Result<Self> {
        let m = rhs.len();
        if basis.len() != m || columns.iter().any(|c| c.len() != m) {
            return Err(Error::Internal("tableau dimensions disagree".into()));
        }
        for (r, &j) in basis.iter().enumerate() {
            let col = columns
                .get(j)
                .ok_or_else(|| Error::Internal(format!("basis column {j} out of range")))?;
            let unit = col
                .iter()
                .enumerate()
                .all(|(i, v)| if i == r { v.is_one() } else { v.is_zero() });
            if !unit {
                return Err(Error::Internal(format!("basis column {j} is not a unit column")));
            }
        }
        let ncols = columns.len();
        let rows = (0..m)
            .map(|r| {
                columns
                    .iter()
                    .map(|c| c[r].clone())
                    .chain(std::iter::once(rhs[r].clone()))
                    .collect()
            })
            .collect();
        Ok(Tableau { rows, basis, ncols })
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_count(&self) -> usize {
        self.ncols
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn entry(&self, row: usize, col: usize) -> &Rational {
        &self.rows[row][col]
    }

    pub fn rhs(&self, row: usize) -> &Rational {
        &self.rows[row][self.ncols]
    }

    pub fn basis_row(&self, col: usize) -> Option<usize> {
        self.basis.iter().position(|&b| b == col)
    }

    /// Values of all columns in the current basic solution.
    pub fn basic_solution(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.ncols];
        for (r, &j) in self.basis.iter().enumerate() {
            x[j] = self.rhs(r).clone();
        }
        x
    }

    /// Gauss-Jordan pivot making `col` basic in `row`.
    pub fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        assert!(!p.is_zero(), "pivot on a zero entry");
        for v in self.rows[row].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[row].clone();
        for (r, other) in self.rows.iter_mut().enumerate() {
            if r == row || other[col].is_zero() {
                continue;
            }
            let factor = other[col].clone();
            for (v, pv) in other.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Leaving row for entering column `col` under the lexicographic ratio
    /// rule: rows are compared on `(rhs, entries at tie_break) / entry`,
    /// which realises the right-hand side perturbed by `(ε, ε², …)` along
    /// the `tie_break` columns. `None` when the column has no positive entry.
    pub fn lexicographic_leaving_row(&self, col: usize, tie_break: &[usize]) -> Option<usize> {
        let key = |r: usize| -> Vec<Rational> {
            let d = &self.rows[r][col];
            std::iter::once(self.rhs(r) / d)
                .chain(tie_break.iter().map(|&k| &self.rows[r][k] / d))
                .collect()
        };
        (0..self.rows.len())
            .filter(|&r| self.rows[r][col].is_positive())
            .map(|r| (key(r), r))
            .min_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, r)| r)
    }

    /// Whether every row's perturbed value `(rhs, entries at tie_break)` is
    /// lexicographically positive.
    pub fn is_lexicographically_feasible(&self, tie_break: &[usize]) -> bool {
        (0..self.rows.len()).all(|r| {
            std::iter::once(self.rhs(r))
                .chain(tie_break.iter().map(|&k| &self.rows[r][k]))
                .find(|v| !v.is_zero())
                .is_some_and(|v| v.is_positive())
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

fn reduced_cost(t: &Tableau, cost: &[Rational], j: usize) -> Rational {
    let mut d = cost[j].clone();
    for (r, &b) in t.basis.iter().enumerate() {
        if !cost[b].is_zero() && !t.rows[r][j].is_zero() {
            d -= &cost[b] * &t.rows[r][j];
        }
    }
    d
}

/// Bland's-rule simplex iterations maximising `cost · x`. Columns with
/// `barred[j]` never enter. Returns `false` if the objective is unbounded.
fn run_simplex(t: &mut Tableau, cost: &[Rational], barred: &[bool]) -> bool {
    loop {
        let entering = (0..t.ncols)
            .filter(|&j| !barred[j] && t.basis_row(j).is_none())
            .find(|&j| reduced_cost(t, cost, j).is_positive());
        let Some(j) = entering else {
            return true;
        };
        let leaving = (0..t.rows.len())
            .filter(|&r| t.rows[r][j].is_positive())
            .min_by(|&a, &b| {
                let ra = t.rhs(a) / &t.rows[a][j];
                let rb = t.rhs(b) / &t.rows[b][j];
                ra.cmp(&rb).then(t.basis[a].cmp(&t.basis[b]))
            });
        match leaving {
            Some(r) => t.pivot(r, j),
            None => return false,
        }
    }
}

/// Maximises `objective · x` subject to `constraints · x = rhs`, `x ≥ 0`, in
/// exact arithmetic. `constraints` is given row by row.
pub fn maximize(objective: &[Rational], constraints: &[Vec<Rational>], rhs: &[Rational]) -> LpOutcome {
    let m = constraints.len();
    let n = objective.len();
    assert_eq!(rhs.len(), m);
    let mut rows: Vec<Vec<Rational>> = constraints.to_vec();
    let mut b: Vec<Rational> = rhs.to_vec();
    for (row, v) in rows.iter_mut().zip(b.iter_mut()) {
        assert_eq!(row.len(), n);
        if v.is_negative() {
            row.iter_mut().for_each(|x| *x = -x.clone());
            *v = -v.clone();
        }
    }
    let mut columns: Vec<Vec<Rational>> = (0..n).map(|j| rows.iter().map(|r| r[j].clone()).collect()).collect();
    for a in 0..m {
        columns.push((0..m).map(|r| if r == a { Rational::one() } else { Rational::zero() }).collect());
    }
    let mut t = Tableau::from_columns(&columns, &b, (n..n + m).collect()).expect("artificial basis is a unit basis");

    let phase1: Vec<Rational> = (0..n + m)
        .map(|j| if j < n { Rational::zero() } else { -Rational::one() })
        .collect();
    let open = vec![false; n + m];
    run_simplex(&mut t, &phase1, &open);
    let infeasibility: Rational = (0..m).filter(|&r| t.basis[r] >= n).map(|r| t.rhs(r).clone()).sum();
    if infeasibility.is_positive() {
        return LpOutcome::Infeasible;
    }
    // Drive zero-valued artificials out of the basis where possible; rows
    // where that fails are redundant and keep their artificial at zero.
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| t.basis_row(j).is_none() && !t.rows[r][j].is_zero()) {
                t.pivot(r, j);
            }
        }
    }

    let mut cost: Vec<Rational> = objective.to_vec();
    cost.extend((0..m).map(|_| Rational::zero()));
    let barred: Vec<bool> = (0..n + m).map(|j| j >= n).collect();
    if !run_simplex(&mut t, &cost, &barred) {
        return LpOutcome::Unbounded;
    }
    let mut x = t.basic_solution();
    x.truncate(n);
    let value = x.iter().zip(objective).map(|(a, c)| a * c).sum();
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac::{int, ratio};

    fn v(values: &[i64]) -> Vec<Rational> {
        values.iter().map(|x| int(*x)).collect()
    }

    #[test]
    fn pivot_solves_system() {
        // x + y = 3, y = 1 with slack basis.
        let cols = vec![v(&[1, 0]), v(&[0, 1]), v(&[1, 1])];
        let mut t = Tableau::from_columns(&cols, &v(&[3, 1]), vec![0, 1]).unwrap();
        let r = t.lexicographic_leaving_row(2, &[0, 1]).unwrap();
        assert_eq!(r, 1);
        t.pivot(r, 2);
        assert_eq!(t.basic_solution(), v(&[2, 0, 1]));
        assert!(t.is_lexicographically_feasible(&[0, 1]));
    }

    #[test]
    fn lexicographic_rule_breaks_ties() {
        // Both rows give ratio 1; the perturbation favours the row whose
        // inverse entries are lexicographically smaller.
        let cols = vec![v(&[1, 0]), v(&[0, 1]), v(&[1, 1])];
        let t = Tableau::from_columns(&cols, &v(&[1, 1]), vec![0, 1]).unwrap();
        // Row 0 key (1, 1, 0), row 1 key (1, 0, 1): row 1 is smaller.
        assert_eq!(t.lexicographic_leaving_row(2, &[0, 1]), Some(1));
        // Reversed tie-break order flips the choice.
        assert_eq!(t.lexicographic_leaving_row(2, &[1, 0]), Some(0));
    }

    #[test]
    fn non_unit_basis_rejected() {
        let cols = vec![v(&[2, 0]), v(&[0, 1])];
        assert!(Tableau::from_columns(&cols, &v(&[1, 1]), vec![0, 1]).is_err());
    }

    #[test]
    fn maximize_small_lp() {
        // max x + y s.t. x + 2y + s1 = 4, 3x + y + s2 = 6.
        let rows = vec![v(&[1, 2, 1, 0]), v(&[3, 1, 0, 1])];
        let out = maximize(&v(&[1, 1, 0, 0]), &rows, &v(&[4, 6]));
        match out {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, ratio(14, 5));
                assert_eq!(&x[..2], &[ratio(8, 5), ratio(6, 5)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn maximize_detects_infeasible_and_unbounded() {
        // x + y = 1, x + y = 2.
        let rows = vec![v(&[1, 1]), v(&[1, 1])];
        assert_eq!(maximize(&v(&[0, 0]), &rows, &v(&[1, 2])), LpOutcome::Infeasible);
        // x - y = 1, maximise x.
        let rows = vec![v(&[1, -1])];
        assert_eq!(maximize(&v(&[1, 0]), &rows, &v(&[1])), LpOutcome::Unbounded);
    }

    #[test]
    fn maximize_handles_redundant_rows() {
        let rows = vec![v(&[1, 1]), v(&[2, 2])];
        match maximize(&v(&[1, 0]), &rows, &v(&[1, 2])) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, int(1)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
