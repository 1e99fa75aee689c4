//! Scarf's algorithm for stable π-schedule matchings.
//!
//! Both matrices have one row per agent and one column per agent followed by
//! one column per acceptable assignment (in
//! [`Market::acceptable_assignments`] order). Matrix A holds the unit
//! vectors of the agents and the intensity vectors of the assignments; its
//! right-hand side is the capacity vector. Matrix C holds ordinal
//! utilities: zero on the diagonal, preference ranks for the agents taking
//! part in an assignment, and large distinct values everywhere else.
//!
//! The algorithm alternates a cardinal pivot on A with an ordinal pivot on C
//! until the two bases coincide. Cardinal pivots use the lexicographic ratio
//! rule, which realises the perturbation `π_N + (ε, ε², …, εⁿ)` and makes
//! every pivot unique.

use std::collections::HashSet;
use std::fmt::Write as _;

use num_traits::Zero;

use crate::frac::Rational;
use crate::market::{AgentId, Market};
use crate::schedule::{PiScheduleMatching, PiScheme};
use crate::tableau::Tableau;
use crate::{Error, Result};

/// What a column of A and C stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnKind {
    Agent(AgentId),
    /// Index into the acceptable-assignment order.
    Assign(usize),
}

pub fn column_kind(market: &Market, column: usize) -> ColumnKind {
    let n = market.agent_count();
    if column < n {
        ColumnKind::Agent(market.agent_at(column))
    } else {
        ColumnKind::Assign(column - n)
    }
}

pub fn column_label(market: &Market, column: usize) -> String {
    match column_kind(market, column) {
        ColumnKind::Agent(a) => market.agent_label(a).to_string(),
        ColumnKind::Assign(k) => market.assignment_label(&market.acceptable_assignments()[k]),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixA {
    agents: usize,
    columns: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
}

impl MatrixA {
    pub fn agent_count(&self) -> usize {
        self.agents
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[Rational] {
        &self.columns[j]
    }

    pub fn entry(&self, row: usize, col: usize) -> &Rational {
        &self.columns[col][row]
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.rhs
    }

    /// Whether agent `row` takes no part in column `col`.
    fn is_off(&self, row: usize, col: usize) -> bool {
        self.columns[col][row].is_zero()
    }
}

pub fn build_matrix_a(market: &Market, scheme: &PiScheme) -> MatrixA {
    let n = market.agent_count();
    let mut columns: Vec<Vec<Rational>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| if i == j { crate::frac::one() } else { crate::frac::zero() })
                .collect()
        })
        .collect();
    columns.extend(scheme.intensities().iter().cloned());
    MatrixA {
        agents: n,
        columns,
        rhs: scheme.capacity().to_vec(),
    }
}

/// Order of the large "absent" values across columns. `Canonical` makes
/// them decrease with column position; `Reversed` makes them increase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LOrdering {
    #[default]
    Canonical,
    Reversed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixC {
    agents: usize,
    /// `columns[j][i]` is the entry in row `i`, column `j`.
    columns: Vec<Vec<u64>>,
}

impl MatrixC {
    pub fn agent_count(&self) -> usize {
        self.agents
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> u64 {
        self.columns[col][row]
    }

    pub fn row(&self, row: usize) -> Vec<u64> {
        self.columns.iter().map(|c| c[row]).collect()
    }
}

pub fn build_matrix_c(market: &Market) -> MatrixC {
    build_matrix_c_with(market, LOrdering::Canonical)
}

/// Integer utilities:
///
/// * the diagonal is 0;
/// * a firm's entry for one of its acceptable assignments is its ascending
///   rank (worst acceptable = 1);
/// * a worker's entry for an assignment holding her contract is the
///   ascending rank of that situation under the externality order
///   (empty = 0);
/// * with `B` one above the largest rank and `K` assignment columns, an
///   agent's entry for an assignment it takes no part in lies in
///   `B..B+K`, and its entry for another agent's column in `B+K..B+K+n`,
///   both spread over the columns according to `ordering`.
pub fn build_matrix_c_with(market: &Market, ordering: LOrdering) -> MatrixC {
    let n = market.agent_count();
    let acceptable = market.acceptable_assignments();
    let k_cols = acceptable.len();

    let mut rank: Vec<Vec<Option<u64>>> = vec![vec![None; n]; k_cols];
    for f in market.firm_ids() {
        let listed = market.firm_prefs(f).len();
        for (k, a) in acceptable.iter().enumerate() {
            if a.firm() == f {
                let pos = market.firm_position(a).expect("acceptable assignments are listed");
                rank[k][market.agent_index(AgentId::Firm(f))] = Some((listed - pos) as u64);
            }
        }
    }
    for w in market.worker_ids() {
        let row = market.agent_index(AgentId::Worker(w));
        for (r, situation) in market.worker_situations(w).iter().enumerate() {
            if let Some(a) = situation.assignment() {
                let k = market.acceptable_index(a).expect("situations come from acceptable assignments");
                rank[k][row] = Some(r as u64);
            }
        }
    }
    let base = 1 + rank.iter().flatten().flatten().copied().max().unwrap_or(0);
    let k_cols_u = k_cols as u64;
    let n_u = n as u64;

    let mut columns = Vec::with_capacity(n + k_cols);
    for j in 0..n {
        let pos = j as u64 + 1;
        let off = match ordering {
            LOrdering::Canonical => base + k_cols_u + (n_u - pos),
            LOrdering::Reversed => base + k_cols_u + (pos - 1),
        };
        columns.push((0..n).map(|i| if i == j { 0 } else { off }).collect());
    }
    for (k, ranks) in rank.iter().enumerate() {
        let pos = k as u64 + 1;
        let off = match ordering {
            LOrdering::Canonical => base + (k_cols_u - pos),
            LOrdering::Reversed => base + (pos - 1),
        };
        columns.push(ranks.iter().map(|r| r.unwrap_or(off)).collect());
    }
    MatrixC { agents: n, columns }
}

/// A feasible basis of `{b ≥ 0 : A b = π_N}` with its exact tableau.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibleBasis {
    tableau: Tableau,
}

impl FeasibleBasis {
    /// Basis columns in ascending column order.
    pub fn columns(&self) -> Vec<usize> {
        let mut cols = self.tableau.basis().to_vec();
        cols.sort_unstable();
        cols
    }

    /// Values of every column (zero off the basis).
    pub fn basic_solution(&self) -> Vec<Rational> {
        self.tableau.basic_solution()
    }

    pub fn contains(&self, column: usize) -> bool {
        self.tableau.basis_row(column).is_some()
    }

    fn check(&self, a: &MatrixA) -> Result<()> {
        let b = self.basic_solution();
        for (i, target) in a.rhs.iter().enumerate() {
            let lhs: Rational = b
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(j, v)| v * a.entry(i, j))
                .sum();
            if &lhs != target {
                return Err(Error::Internal(format!("A·b differs from π_N in row {i}")));
            }
        }
        let perturbation: Vec<usize> = (0..a.agents).collect();
        if !self.tableau.is_lexicographically_feasible(&perturbation) {
            return Err(Error::Internal("basis lost lexicographic feasibility".into()));
        }
        Ok(())
    }
}

/// An ordinal basis of C: `n` columns and, per row, the column holding the
/// row minimum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinalBasis {
    columns: Vec<usize>,
    minimizer: Vec<usize>,
}

impl OrdinalBasis {
    fn from_columns(c: &MatrixC, mut columns: Vec<usize>) -> Self {
        columns.sort_unstable();
        let minimizer = (0..c.agents)
            .map(|i| {
                *columns
                    .iter()
                    .min_by_key(|&&j| c.entry(i, j))
                    .expect("a basis has columns")
            })
            .collect();
        OrdinalBasis { columns, minimizer }
    }

    /// Basis columns in ascending column order.
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    /// Column holding the minimum of row `row`.
    pub fn minimizer(&self, row: usize) -> usize {
        self.minimizer[row]
    }

    /// The row minima `u_i`.
    pub fn row_minima(&self, c: &MatrixC) -> Vec<u64> {
        (0..c.agents).map(|i| c.entry(i, self.minimizer[i])).collect()
    }

    pub fn contains(&self, column: usize) -> bool {
        self.columns.binary_search(&column).is_ok()
    }

    /// Checks that every basis column holds exactly one row minimizer and
    /// that no column of C strictly exceeds the row minima in every row.
    pub fn check(&self, c: &MatrixC) -> Result<()> {
        for &j in &self.columns {
            let count = self.minimizer.iter().filter(|&&m| m == j).count();
            if count != 1 {
                return Err(Error::Internal(format!("column {j} holds {count} row minimizers")));
            }
        }
        let u = self.row_minima(c);
        for s in 0..c.column_count() {
            if (0..c.agents).all(|i| u[i] < c.entry(i, s)) {
                return Err(Error::Internal(format!("column {s} dominates the ordinal basis")));
            }
        }
        Ok(())
    }
}

/// First row (firms first) admitting an assignment column without that
/// agent, or the preferred row if it admits one.
fn choose_initial_row(a: &MatrixA, preferred: Option<usize>) -> Result<usize> {
    let admits = |i: usize| (a.agents..a.column_count()).any(|j| a.is_off(i, j));
    match preferred {
        Some(i) if admits(i) => Ok(i),
        Some(_) => Err(Error::NoOffColumnRow),
        None => (0..a.agents).find(|&i| admits(i)).ok_or(Error::NoOffColumnRow),
    }
}

/// Step 0: the agent columns as feasible basis, and the `n` columns with the
/// largest entries in `row` as ordinal basis. Returns both bases and the
/// single column of the ordinal basis outside the feasible one.
pub fn initial_bases(a: &MatrixA, c: &MatrixC, row: usize) -> Result<(FeasibleBasis, OrdinalBasis, usize)> {
    let n = a.agents;
    if a.column_count() == n {
        return Err(Error::NoAcceptableAssignments);
    }
    if !(n..a.column_count()).any(|j| a.is_off(row, j)) {
        return Err(Error::NoOffColumnRow);
    }
    let tableau = Tableau::from_columns(&a.columns, &a.rhs, (0..n).collect())?;
    let mut by_value: Vec<usize> = (0..c.column_count()).collect();
    by_value.sort_by_key(|&j| std::cmp::Reverse(c.entry(row, j)));
    by_value.truncate(n);
    let ordinal = OrdinalBasis::from_columns(c, by_value);
    let outside: Vec<usize> = ordinal.columns.iter().copied().filter(|&j| j >= n).collect();
    match outside.as_slice() {
        [j] => Ok((FeasibleBasis { tableau }, ordinal, *j)),
        _ => Err(Error::Internal("initial ordinal basis must hold exactly one assignment column".into())),
    }
}

/// Brings `col_in` into the feasible basis; returns the new basis and the
/// column that left.
pub fn cardinal_pivot(a: &MatrixA, basis: &FeasibleBasis, col_in: usize) -> Result<(FeasibleBasis, usize)> {
    if basis.contains(col_in) {
        return Err(Error::AlreadyInBasis(col_in));
    }
    let perturbation: Vec<usize> = (0..a.agents).collect();
    let row = basis
        .tableau
        .lexicographic_leaving_row(col_in, &perturbation)
        .ok_or_else(|| Error::Internal(format!("column {col_in} has no positive entry against the basis")))?;
    let leaving = basis.tableau.basis()[row];
    let mut tableau = basis.tableau.clone();
    tableau.pivot(row, col_in);
    Ok((FeasibleBasis { tableau }, leaving))
}

/// Removes `col_out` from the ordinal basis and brings in the replacement
/// column; returns the new basis and the column that entered.
pub fn ordinal_pivot(c: &MatrixC, basis: &OrdinalBasis, col_out: usize) -> Result<(OrdinalBasis, usize)> {
    if !basis.contains(col_out) {
        return Err(Error::NotInBasis(col_out));
    }
    let n = c.agents;
    let remaining: Vec<usize> = basis.columns.iter().copied().filter(|&j| j != col_out).collect();
    if remaining.iter().all(|&j| j < n) {
        return Err(Error::OrdinalPivotBlocked);
    }
    let new_min: Vec<usize> = (0..n)
        .map(|i| *remaining.iter().min_by_key(|&&j| c.entry(i, j)).expect("n ≥ 2"))
        .collect();
    let orphan_row = (0..n)
        .find(|&i| basis.minimizer[i] == col_out)
        .ok_or_else(|| Error::Internal(format!("column {col_out} holds no row minimizer")))?;
    let doubled = new_min[orphan_row];
    let pivot_row = (0..n)
        .find(|&i| i != orphan_row && basis.minimizer[i] == doubled)
        .ok_or_else(|| Error::Internal("no old minimizer for the doubled column".into()))?;

    let qualifies = |k: usize| (0..n).all(|i| i == pivot_row || c.entry(i, k) > c.entry(i, new_min[i]));
    let entering = (0..c.column_count())
        .filter(|&k| qualifies(k))
        .max_by_key(|&k| c.entry(pivot_row, k))
        .ok_or_else(|| Error::Internal("no column qualifies for the ordinal pivot".into()))?;

    let mut columns = remaining;
    columns.push(entering);
    Ok((OrdinalBasis::from_columns(c, columns), entering))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScarfConfig {
    /// Row whose largest entries seed the ordinal basis. Defaults to the
    /// first firm (or the first agent that admits an assignment column
    /// without itself).
    pub initial_row: Option<AgentId>,
    pub ordering: LOrdering,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScarfStep {
    pub index: usize,
    pub entered_a: usize,
    pub left_a: usize,
    /// `(out, in)` of the ordinal pivot; absent when the algorithm stopped
    /// right after the cardinal pivot.
    pub ordinal: Option<(usize, usize)>,
    pub a_basis: Vec<usize>,
    pub c_basis: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScarfTrace {
    pub initial_row: Option<usize>,
    pub initial_a: Vec<usize>,
    pub initial_c: Vec<usize>,
    pub steps: Vec<ScarfStep>,
}

impl ScarfTrace {
    /// One line per step:
    /// `<s> pivotA in=<col> out=<col> pivotC out=<col> in=<col> A=[..] C=[..]`
    /// with basis columns in column order, preceded by a step-0 line.
    pub fn render(&self, market: &Market) -> String {
        let list = |cols: &[usize]| {
            cols.iter()
                .map(|&j| column_label(market, j))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::new();
        let Some(row) = self.initial_row else {
            out.push_str("0 empty\n");
            return out;
        };
        let _ = writeln!(
            out,
            "0 init row={} A=[{}] C=[{}]",
            market.agent_label(market.agent_at(row)),
            list(&self.initial_a),
            list(&self.initial_c)
        );
        for step in &self.steps {
            let ordinal = match step.ordinal {
                Some((o, i)) => format!("pivotC out={} in={}", column_label(market, o), column_label(market, i)),
                None => "pivotC -".to_string(),
            };
            let _ = writeln!(
                out,
                "{} pivotA in={} out={} {} A=[{}] C=[{}]",
                step.index,
                column_label(market, step.entered_a),
                column_label(market, step.left_a),
                ordinal,
                list(&step.a_basis),
                list(&step.c_basis)
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScarfOutcome {
    pub schedule: PiScheduleMatching,
    /// Values of all columns, agents' slack first.
    pub solution: Vec<Rational>,
    pub final_basis: Vec<usize>,
    pub trace: ScarfTrace,
}

pub fn scarf_solve(market: &Market, scheme: &PiScheme) -> Result<ScarfOutcome> {
    scarf_solve_with(market, scheme, &ScarfConfig::default())
}

pub fn scarf_solve_with(market: &Market, scheme: &PiScheme, config: &ScarfConfig) -> Result<ScarfOutcome> {
    let n = market.agent_count();
    let k = market.acceptable_assignments().len();
    if k == 0 {
        let mut solution = scheme.capacity().to_vec();
        solution.truncate(n);
        return Ok(ScarfOutcome {
            schedule: PiScheduleMatching::zero(0),
            solution,
            final_basis: (0..n).collect(),
            trace: ScarfTrace::default(),
        });
    }
    let a = build_matrix_a(market, scheme);
    let c = build_matrix_c_with(market, config.ordering);
    let row = choose_initial_row(&a, config.initial_row.map(|agent| market.agent_index(agent)))?;
    let (mut feasible, mut ordinal, mut entering) = initial_bases(&a, &c, row)?;
    ordinal.check(&c)?;

    let mut trace = ScarfTrace {
        initial_row: Some(row),
        initial_a: feasible.columns(),
        initial_c: ordinal.columns.clone(),
        steps: Vec::new(),
    };
    let mut seen: HashSet<(Vec<usize>, Vec<usize>)> = HashSet::new();
    seen.insert((trace.initial_a.clone(), trace.initial_c.clone()));

    for index in 1.. {
        let (next_feasible, left) = cardinal_pivot(&a, &feasible, entering)?;
        next_feasible.check(&a)?;
        feasible = next_feasible;
        let a_basis = feasible.columns();
        if a_basis == ordinal.columns {
            trace.steps.push(ScarfStep {
                index,
                entered_a: entering,
                left_a: left,
                ordinal: None,
                a_basis,
                c_basis: ordinal.columns.clone(),
            });
            break;
        }
        let (next_ordinal, brought) = ordinal_pivot(&c, &ordinal, left)?;
        next_ordinal.check(&c)?;
        ordinal = next_ordinal;
        trace.steps.push(ScarfStep {
            index,
            entered_a: entering,
            left_a: left,
            ordinal: Some((left, brought)),
            a_basis: a_basis.clone(),
            c_basis: ordinal.columns.clone(),
        });
        if !seen.insert((a_basis.clone(), ordinal.columns.clone())) {
            return Err(Error::Internal(format!("pivot sequence revisited a basis pair at step {index}")));
        }
        if a_basis == ordinal.columns {
            break;
        }
        entering = brought;
    }

    let solution = feasible.basic_solution();
    let schedule = PiScheduleMatching::new(solution[n..].to_vec());
    Ok(ScarfOutcome {
        schedule,
        solution,
        final_basis: feasible.columns(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::frac::{int, ratio};

    fn labels(m: &Market, cols: &[usize]) -> Vec<String> {
        cols.iter().map(|&j| column_label(m, j)).collect()
    }

    #[test]
    fn matrix_a_matches_table() {
        let eb = fixtures::eb();
        let a = build_matrix_a(&eb.market, &eb.scheme);
        let row_f1: Vec<Rational> = (0..9).map(|j| a.entry(0, j).clone()).collect();
        let expected: Vec<Rational> = [1, 0, 0, 0, 4, 2, 4, 0, 0].iter().map(|v| int(*v)).collect();
        assert_eq!(row_f1, expected);
        assert_eq!(a.rhs(), &[int(5), int(3), int(2), int(3)]);

        let unit = PiScheme::unit(&eb.market);
        let a = build_matrix_a(&eb.market, &unit);
        assert_eq!(a.column(7), &[int(0), int(1), int(1), int(1)]);

        let m4 = fixtures::m4_pi();
        let a = build_matrix_a(&m4.market, &m4.scheme);
        assert_eq!(a.rhs(), &[int(1), int(3), int(1), int(1)]);
    }

    #[test]
    fn matrix_c_canonical_encoding() {
        let eb = fixtures::eb().market;
        let c = build_matrix_c(&eb);
        // B = 5, K = 5, n = 4.
        assert_eq!(c.row(0), vec![0, 12, 11, 10, 3, 2, 1, 6, 5]);
        assert_eq!(c.row(1), vec![13, 0, 11, 10, 9, 8, 7, 2, 1]);
        assert_eq!(c.row(2), vec![13, 12, 0, 10, 4, 3, 1, 2, 5]);
        assert_eq!(c.row(3), vec![13, 12, 11, 0, 1, 2, 7, 4, 3]);
        assert!(c.entry(0, 7) > c.entry(0, 8));
    }

    #[test]
    fn matrix_c_rules_hold_for_both_orderings() {
        let eb = fixtures::eb().market;
        let n = eb.agent_count();
        for ordering in [LOrdering::Canonical, LOrdering::Reversed] {
            let c = build_matrix_c_with(&eb, ordering);
            for i in 0..n {
                let row = c.row(i);
                assert_eq!(row[i], 0);
                let mut sorted = row.clone();
                sorted.sort_unstable();
                sorted.dedup();
                assert_eq!(sorted.len(), row.len(), "row {i} has repeated values");
                let max_assign = row[n..].iter().max().unwrap();
                assert!((0..n).filter(|&j| j != i).all(|j| row[j] > *max_assign));
            }
        }
    }

    #[test]
    fn initial_bases_for_eb() {
        let eb = fixtures::eb();
        let a = build_matrix_a(&eb.market, &eb.scheme);
        let c = build_matrix_c(&eb.market);
        let (fb, ob, j) = initial_bases(&a, &c, 0).unwrap();
        assert_eq!(labels(&eb.market, &fb.columns()), ["f1", "f2", "w1", "w2"]);
        assert_eq!(labels(&eb.market, ob.columns()), ["f2", "w1", "w2", "{z1,z2}"]);
        assert_eq!(column_label(&eb.market, j), "{z1,z2}");
        assert_eq!(&fb.basic_solution()[..4], &[int(5), int(3), int(2), int(3)]);
        ob.check(&c).unwrap();
    }

    #[test]
    fn pivots_follow_worked_example() {
        let eb = fixtures::eb();
        let m = &eb.market;
        let a = build_matrix_a(m, &eb.scheme);
        let c = build_matrix_c(m);
        let (fb0, ob0, j0) = initial_bases(&a, &c, 0).unwrap();

        let (fb1, out1) = cardinal_pivot(&a, &fb0, j0).unwrap();
        assert_eq!(column_label(m, out1), "w2");
        let b1 = fb1.basic_solution();
        assert_eq!((&b1[0], &b1[1], &b1[2], &b1[7]), (&int(5), &int(1), &int(1), &int(1)));
        let (ob1, in1) = ordinal_pivot(&c, &ob0, out1).unwrap();
        assert_eq!(column_label(m, in1), "{x5c}");

        let (fb2, out2) = cardinal_pivot(&a, &fb1, in1).unwrap();
        assert_eq!(column_label(m, out2), "w1");
        assert_eq!(fb2.basic_solution()[6], ratio(1, 2));
        let (ob2, in2) = ordinal_pivot(&c, &ob1, out2).unwrap();
        assert_eq!(column_label(m, in2), "f1");
        assert_eq!(ob2.columns(), fb2.columns().as_slice());
    }

    #[test]
    fn ordinal_pivot_refuses_all_agent_remainder() {
        let eb = fixtures::eb();
        let a = build_matrix_a(&eb.market, &eb.scheme);
        let c = build_matrix_c(&eb.market);
        let (_, ob, j) = initial_bases(&a, &c, 0).unwrap();
        assert!(matches!(ordinal_pivot(&c, &ob, j), Err(Error::OrdinalPivotBlocked)));
        assert!(matches!(ordinal_pivot(&c, &ob, 0), Err(Error::NotInBasis(0))));
    }

    #[test]
    fn degenerate_tie_uses_lexicographic_rule() {
        // Every ratio ties at the start: capacities 1 and a column touching
        // all four agents with unit intensity.
        let m2 = fixtures::m2().market;
        let unit = PiScheme::unit(&m2);
        let a = build_matrix_a(&m2, &unit);
        let c = build_matrix_c(&m2);
        let (fb, _, _) = initial_bases(&a, &c, 0).unwrap();
        // Column {f1w1,f1w2} has entries (1,0,1,1): rows f1, w1, w2 tie at
        // ratio 1. The perturbation key of row r is (1, e_r), so the row
        // with the largest index has the smallest key and leaves.
        let (next, out) = cardinal_pivot(&a, &fb, 4).unwrap();
        assert_eq!(column_label(&m2, out), "w2");
        next.check(&a).unwrap();
        let b = next.basic_solution();
        assert_eq!(b[0], int(0));
        assert_eq!(b[4], int(1));
    }

    #[test]
    fn solve_reproduces_worked_example() {
        let eb = fixtures::eb();
        let out = scarf_solve(&eb.market, &eb.scheme).unwrap();
        let expected: Vec<Rational> = [(3, 1), (1, 1), (0, 1), (0, 1), (0, 1), (0, 1), (1, 2), (1, 1), (0, 1)]
            .iter()
            .map(|(p, q)| ratio(*p, *q))
            .collect();
        assert_eq!(out.solution, expected);
        assert_eq!(out.schedule.shares(), &expected[4..]);
        assert_eq!(out.trace.steps.len(), 2);
        assert_eq!(labels(&eb.market, &out.final_basis), ["f1", "f2", "{x5c}", "{z1,z2}"]);
    }

    #[test]
    fn empty_market_short_circuits() {
        let file = fixtures::no_acceptable();
        let out = scarf_solve(&file.market, &file.scheme).unwrap();
        assert!(out.schedule.shares().is_empty());
        assert!(out.trace.steps.is_empty());
        assert_eq!(out.trace.render(&file.market), "0 empty\n");
    }

    #[test]
    fn trace_rendering() {
        let eb = fixtures::eb();
        let out = scarf_solve(&eb.market, &eb.scheme).unwrap();
        let text = out.trace.render(&eb.market);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "0 init row=f1 A=[f1 f2 w1 w2] C=[f2 w1 w2 {z1,z2}]");
        assert_eq!(
            lines[1],
            "1 pivotA in={z1,z2} out=w2 pivotC out=w2 in={x5c} A=[f1 f2 w1 {z1,z2}] C=[f2 w1 {x5c} {z1,z2}]"
        );
        assert_eq!(
            lines[2],
            "2 pivotA in={x5c} out=w1 pivotC out=w1 in=f1 A=[f1 f2 {x5c} {z1,z2}] C=[f1 f2 {x5c} {z1,z2}]"
        );
    }
}
