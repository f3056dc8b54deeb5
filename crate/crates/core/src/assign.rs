//! Gated minimum-cost linear assignment.
//!
//! The solver is the shortest-augmenting-path form of the Hungarian
//! algorithm. Costs are compared lexicographically as
//! `(forbidden pairs used, summed cost)`: minimising the first component
//! maximises the number of admissible matches, and only then is the real
//! cost minimised. A forbidden pair can therefore never be chosen in place
//! of an admissible one, however large the admissible costs get.
//!
//! Rows are augmented in ascending order and columns are scanned in
//! ascending order with strict comparisons, so equal-cost alternatives
//! always resolve the same way for the same input.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Sub, SubAssign};

/// Sentinel marking a pair that must not be matched.
pub const FORBIDDEN: f64 = f64::INFINITY;

#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    /// Builds a row-major matrix. Entries must be finite and non-negative,
    /// or [`FORBIDDEN`].
    ///
    /// # Panics
    /// If `data.len() != rows * cols` or an entry is negative or NaN.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "cost matrix shape mismatch");
        assert!(
            data.iter().all(|&c| c == FORBIDDEN || (c.is_finite() && c >= 0.0)),
            "cost entries must be finite and >= 0, or FORBIDDEN"
        );
        CostMatrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CostMatrix::new(rows, cols, data)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged cost rows");
        CostMatrix::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn is_forbidden(&self, row: usize, col: usize) -> bool {
        self.get(row, col) == FORBIDDEN
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AssignmentResult {
    /// Matched `(row, col)` pairs, sorted by row.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
    /// Sum of matched costs, accumulated in row order.
    pub total_cost: f64,
}

/// Replaces every entry above `max_cost` with [`FORBIDDEN`].
pub fn gate_costs(costs: &CostMatrix, max_cost: f64) -> CostMatrix {
    CostMatrix {
        rows: costs.rows,
        cols: costs.cols,
        data: costs
            .data
            .iter()
            .map(|&c| if c > max_cost { FORBIDDEN } else { c })
            .collect(),
    }
}

/// Maximum-cardinality, minimum-cost matching that avoids forbidden pairs.
pub fn solve_assignment(costs: &CostMatrix) -> AssignmentResult {
    let (rows, cols) = (costs.rows, costs.cols);
    if rows == 0 || cols == 0 {
        return AssignmentResult {
            matches: Vec::new(),
            unmatched_rows: (0..rows).collect(),
            unmatched_cols: (0..cols).collect(),
            total_cost: 0.0,
        };
    }

    let transpose = rows > cols;
    let (n, m) = if transpose { (cols, rows) } else { (rows, cols) };
    let key = |i: usize, j: usize| {
        let c = if transpose {
            costs.get(j, i)
        } else {
            costs.get(i, j)
        };
        if c == FORBIDDEN {
            Key::new(1, 0.0)
        } else {
            Key::new(0, c)
        }
    };

    let col_of_row = hungarian(n, m, key);

    let mut matches: Vec<(usize, usize)> = col_of_row
        .iter()
        .enumerate()
        .map(|(i, &j)| if transpose { (j, i) } else { (i, j) })
        .filter(|&(r, c)| !costs.is_forbidden(r, c))
        .collect();
    matches.sort_unstable();

    let mut row_used = vec![false; rows];
    let mut col_used = vec![false; cols];
    let mut total_cost = 0.0;
    for &(r, c) in &matches {
        row_used[r] = true;
        col_used[c] = true;
        total_cost += costs.get(r, c);
    }
    AssignmentResult {
        matches,
        unmatched_rows: (0..rows).filter(|&r| !row_used[r]).collect(),
        unmatched_cols: (0..cols).filter(|&c| !col_used[c]).collect(),
        total_cost,
    }
}

/// Lexicographic cost: forbidden-pair count first, then real cost.
#[derive(Debug, Clone, Copy)]
struct Key {
    penalty: i64,
    cost: f64,
}

impl Key {
    const INFINITE: Key = Key {
        penalty: i64::MAX / 4,
        cost: 0.0,
    };
    const ZERO: Key = Key {
        penalty: 0,
        cost: 0.0,
    };

    fn new(penalty: i64, cost: f64) -> Self {
        Key { penalty, cost }
    }
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_key(other) == Ordering::Equal
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_key(other))
    }
}

impl Key {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.penalty
            .cmp(&other.penalty)
            .then_with(|| self.cost.total_cmp(&other.cost))
    }
}

impl Add for Key {
    type Output = Key;
    fn add(self, rhs: Key) -> Key {
        Key::new(self.penalty + rhs.penalty, self.cost + rhs.cost)
    }
}

impl Sub for Key {
    type Output = Key;
    fn sub(self, rhs: Key) -> Key {
        Key::new(self.penalty - rhs.penalty, self.cost - rhs.cost)
    }
}

impl AddAssign for Key {
    fn add_assign(&mut self, rhs: Key) {
        *self = *self + rhs;
    }
}

impl SubAssign for Key {
    fn sub_assign(&mut self, rhs: Key) {
        *self = *self - rhs;
    }
}

/// Assigns each of `n` rows to a distinct one of `m >= n` columns, minimising
/// the summed key. Returns the column of each row.
fn hungarian(n: usize, m: usize, cost: impl Fn(usize, usize) -> Key) -> Vec<usize> {
    debug_assert!(n <= m);
    // 1-based: index 0 is the virtual source row/column.
    let mut u = vec![Key::ZERO; n + 1];
    let mut v = vec![Key::ZERO; m + 1];
    let mut row_of_col = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for row in 1..=n {
        row_of_col[0] = row;
        let mut j0 = 0;
        let mut min_slack = vec![Key::INFINITE; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = Key::INFINITE;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < min_slack[j] {
                    min_slack[j] = reduced;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of_row = vec![0; n];
    for j in 1..=m {
        if row_of_col[j] != 0 {
            col_of_row[row_of_col[j] - 1] = j - 1;
        }
    }
    col_of_row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominant_diagonal() {
        let r = solve_assignment(&CostMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]));
        assert_eq!(r.matches, vec![(0, 0), (1, 1)]);
        assert_eq!(r.total_cost, 2.0);
        assert!(r.unmatched_rows.is_empty() && r.unmatched_cols.is_empty());
    }

    #[test]
    fn empty_matrices() {
        let r = solve_assignment(&CostMatrix::new(0, 0, vec![]));
        assert_eq!(r, AssignmentResult::default());
        let r = solve_assignment(&CostMatrix::new(3, 0, vec![]));
        assert_eq!(r.unmatched_rows, vec![0, 1, 2]);
        let r = solve_assignment(&CostMatrix::new(0, 2, vec![]));
        assert_eq!(r.unmatched_cols, vec![0, 1]);
    }

    #[test]
    fn rectangular_reports_unmatched() {
        let wide = CostMatrix::from_rows(&[vec![5.0, 1.0, 3.0]]);
        let r = solve_assignment(&wide);
        assert_eq!(r.matches, vec![(0, 1)]);
        assert_eq!(r.unmatched_cols, vec![0, 2]);

        let tall = CostMatrix::from_rows(&[vec![5.0], vec![1.0], vec![3.0]]);
        let r = solve_assignment(&tall);
        assert_eq!(r.matches, vec![(1, 0)]);
        assert_eq!(r.unmatched_rows, vec![0, 2]);
    }

    #[test]
    fn gating_examples() {
        let c = CostMatrix::from_rows(&[vec![0.1, 0.9]]);
        let g = gate_costs(&c, 0.5);
        assert_eq!(g.data(), &[0.1, FORBIDDEN]);
        assert_eq!(gate_costs(&c, 1.0), c);

        let all = gate_costs(&CostMatrix::from_rows(&[vec![0.7, 0.9], vec![0.8, 0.6]]), 0.5);
        assert!(all.data().iter().all(|&c| c == FORBIDDEN));
        let r = solve_assignment(&all);
        assert!(r.matches.is_empty());
        assert_eq!(r.unmatched_rows, vec![0, 1]);
        assert_eq!(r.unmatched_cols, vec![0, 1]);
    }

    #[test]
    fn forbidden_is_not_outbid_by_large_costs() {
        // The only way to match both rows uses two very expensive pairs.
        let c = CostMatrix::from_rows(&[vec![0.0, 1e12], vec![FORBIDDEN, 1e12]]);
        let r = solve_assignment(&c);
        assert_eq!(r.matches, vec![(0, 0), (1, 1)]);
        assert_eq!(r.total_cost, 1e12);
    }

    #[test]
    fn prefers_cardinality_over_cost() {
        // Greedy min would take (0,0) with cost 0 and strand row 1.
        let c = CostMatrix::from_rows(&[vec![0.0, 0.9], vec![0.1, FORBIDDEN]]);
        let r = solve_assignment(&c);
        assert_eq!(r.matches, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn deterministic_on_ties() {
        let c = CostMatrix::new(3, 3, vec![0.0; 9]);
        let first = solve_assignment(&c);
        for _ in 0..10 {
            assert_eq!(solve_assignment(&c), first);
        }
        assert_eq!(first.matches.len(), 3);
    }
}
