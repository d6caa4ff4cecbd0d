//! Dense linear assignment.
//!
//! [`solve_assignment`] follows Jonker and Volgenant: column reduction and
//! reduction transfer give feasible column duals `v` and a partial
//! assignment, then every free row is inserted along a shortest augmenting
//! path in reduced costs `c[i][j] − v[j]`.

use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

/// Largest size accepted by [`brute_force_assignment`].
pub const BRUTE_FORCE_LIMIT: usize = 10;

/// Square dense cost matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: data.len() });
        }
        Ok(Self { n, data })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: r.len() });
        }
        Ok(Self { n, data: rows.concat() })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Cost of assigning row `i` to column `assignment[i]`, summed in row order.
    pub fn assignment_cost(&self, assignment: &[usize]) -> f64 {
        assignment.iter().enumerate().map(|(i, &j)| self.get(i, j)).sum()
    }

    fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|c| !c.is_finite()) {
            Some(p) => Err(Error::NonFinite { row: p / self.n, col: p % self.n }),
            None => Ok(()),
        }
    }
}

/// An optimal permutation and its total cost (unnormalized).
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingResult {
    /// `assignment[i]` is the column matched to row `i`.
    pub assignment: Vec<usize>,
    pub total_cost: f64,
    pub per_edge_costs: Option<Vec<f64>>,
}

impl MatchingResult {
    fn from_assignment(c: &CostMatrix, assignment: Vec<usize>) -> Self {
        let total_cost = c.assignment_cost(&assignment);
        Self { assignment, total_cost, per_edge_costs: None }
    }

    /// Fills `per_edge_costs` from the matrix the result was computed on.
    pub fn with_edge_costs(mut self, c: &CostMatrix) -> Self {
        self.per_edge_costs = Some(self.assignment.iter().enumerate().map(|(i, &j)| c.get(i, j)).collect());
        self
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.assignment.len()];
        self.assignment.iter().all(|&j| j < seen.len() && !std::mem::replace(&mut seen[j], true))
    }
}

/// Exact minimum-cost perfect matching on a square matrix of finite costs.
pub fn solve_assignment(c: &CostMatrix) -> Result<MatchingResult> {
    c.check_finite()?;
    let n = c.size();
    if n == 0 {
        return Ok(MatchingResult { assignment: Vec::new(), total_cost: 0.0, per_edge_costs: None });
    }
    let mut solver = Lapjv::new(c);
    solver.initialize();
    solver.augment_all();
    Ok(MatchingResult::from_assignment(c, solver.row_to_col))
}

struct Lapjv<'a> {
    c: &'a CostMatrix,
    n: usize,
    v: Vec<f64>,
    row_to_col: Vec<usize>,
    col_to_row: Vec<usize>,
    free_rows: Vec<usize>,
    // scratch for the shortest path search
    dist: Vec<f64>,
    pred: Vec<usize>,
    cols: Vec<usize>,
}

impl<'a> Lapjv<'a> {
    fn new(c: &'a CostMatrix) -> Self {
        let n = c.size();
        Self {
            c,
            n,
            v: vec![f64::INFINITY; n],
            row_to_col: vec![NONE; n],
            col_to_row: vec![NONE; n],
            free_rows: Vec::new(),
            dist: vec![0.0; n],
            pred: vec![0; n],
            cols: (0..n).collect(),
        }
    }

    /// Column reduction followed by reduction transfer.
    fn initialize(&mut self) {
        let n = self.n;
        let mut argmin = vec![0usize; n];
        for i in 0..n {
            for (j, &cij) in self.c.row(i).iter().enumerate() {
                if cij < self.v[j] {
                    self.v[j] = cij;
                    argmin[j] = i;
                }
            }
        }
        let mut unique = vec![true; n];
        for j in (0..n).rev() {
            let i = argmin[j];
            if self.row_to_col[i] == NONE {
                self.row_to_col[i] = j;
                self.col_to_row[j] = i;
            } else {
                unique[i] = false;
            }
        }
        for i in 0..n {
            let j1 = self.row_to_col[i];
            if j1 == NONE {
                self.free_rows.push(i);
            } else if unique[i] {
                // move the row's slack onto v[j1] so that j1 stays its best column
                let row = self.c.row(i);
                let mut slack = f64::INFINITY;
                for (j, &cij) in row.iter().enumerate() {
                    if j != j1 {
                        slack = slack.min(cij - self.v[j]);
                    }
                }
                if slack.is_finite() {
                    self.v[j1] -= slack;
                }
            }
        }
    }

    fn augment_all(&mut self) {
        let free = std::mem::take(&mut self.free_rows);
        for start in free {
            let mut j = self.shortest_path(start);
            loop {
                let i = self.pred[j];
                self.col_to_row[j] = i;
                let prev = std::mem::replace(&mut self.row_to_col[i], j);
                if i == start {
                    break;
                }
                j = prev;
            }
        }
    }

    /// Dijkstra over columns from the free row `start`; returns the unassigned
    /// column that ends the augmenting path and updates the duals of scanned
    /// columns.
    fn shortest_path(&mut self, start: usize) -> usize {
        let n = self.n;
        let row = self.c.row(start);
        for j in 0..n {
            self.cols[j] = j;
            self.pred[j] = start;
            self.dist[j] = row[j] - self.v[j];
        }
        // cols[..ready] scanned, cols[ready..todo] at the current minimum, cols[todo..] unseen
        let mut ready = 0usize;
        let mut todo = 0usize;
        let end_col = 'search: loop {
            if ready == todo {
                todo = self.collect_minimum(ready);
                for k in ready..todo {
                    let j = self.cols[k];
                    if self.col_to_row[j] == NONE {
                        break 'search j;
                    }
                }
            }
            // scan one column at the minimum distance
            let j = self.cols[ready];
            ready += 1;
            let i = self.col_to_row[j];
            let mind = self.dist[j];
            let row = self.c.row(i);
            let h = row[j] - self.v[j] - mind;
            let mut k = todo;
            while k < n {
                let col = self.cols[k];
                let reduced = row[col] - self.v[col] - h;
                if reduced < self.dist[col] {
                    self.dist[col] = reduced;
                    self.pred[col] = i;
                    if reduced <= mind {
                        if self.col_to_row[col] == NONE {
                            self.finish(ready, mind);
                            return col;
                        }
                        self.cols.swap(k, todo);
                        todo += 1;
                    }
                }
                k += 1;
            }
        };
        let mind = self.dist[end_col];
        self.finish(ready, mind);
        end_col
    }

    /// Moves all columns of `cols[lo..]` with minimal distance to the front
    /// of that range; returns the end of the block.
    fn collect_minimum(&mut self, lo: usize) -> usize {
        let mut hi = lo + 1;
        let mut mind = self.dist[self.cols[lo]];
        for k in lo + 1..self.n {
            let j = self.cols[k];
            let d = self.dist[j];
            if d <= mind {
                if d < mind {
                    hi = lo;
                    mind = d;
                }
                self.cols.swap(k, hi);
                hi += 1;
            }
        }
        hi
    }

    fn finish(&mut self, ready: usize, mind: f64) {
        for k in 0..ready {
            let j = self.cols[k];
            self.v[j] += self.dist[j] - mind;
        }
    }
}

/// Exhaustive minimum over all `n!` permutations (Heap's algorithm), `n ≤ 10`.
pub fn brute_force_assignment(c: &CostMatrix) -> Result<MatchingResult> {
    c.check_finite()?;
    let n = c.size();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { n, limit: BRUTE_FORCE_LIMIT });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_cost = c.assignment_cost(&perm);
    let mut counters = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            let cost = c.assignment_cost(&perm);
            if cost < best_cost {
                best_cost = cost;
                best.copy_from_slice(&perm);
            }
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(MatchingResult::from_assignment(c, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngState;

    fn random_matrix(n: usize, rng: &mut RngState) -> CostMatrix {
        CostMatrix::from_fn(n, |_, _| rng.uniform())
    }

    #[test]
    fn trivial_sizes() {
        let r = solve_assignment(&CostMatrix::from_rows(&[vec![2.5]]).unwrap()).unwrap();
        assert_eq!(r.assignment, vec![0]);
        assert_eq!(r.total_cost, 2.5);
        let r = solve_assignment(&CostMatrix::new(0, vec![]).unwrap()).unwrap();
        assert!(r.assignment.is_empty());
        let r = brute_force_assignment(&CostMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()).unwrap();
        assert_eq!(r.assignment, vec![0, 1]);
        assert_eq!(r.total_cost, 0.0);
    }

    #[test]
    fn zero_diagonal_gives_identity() {
        let c = CostMatrix::from_rows(&[vec![0.0, 5.0, 7.0], vec![4.0, 0.0, 6.0], vec![9.0, 8.0, 0.0]]).unwrap();
        let r = solve_assignment(&c).unwrap();
        assert_eq!(r.assignment, vec![0, 1, 2]);
        assert_eq!(r.total_cost, 0.0);
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = RngState::new(99);
        for n in 1..=8 {
            for _ in 0..100 {
                let c = random_matrix(n, &mut rng);
                let fast = solve_assignment(&c).unwrap();
                let slow = brute_force_assignment(&c).unwrap();
                assert!(fast.is_permutation());
                assert!((fast.total_cost - slow.total_cost).abs() < 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn handles_ties_and_integer_costs() {
        let mut rng = RngState::new(4);
        for n in 2..=8 {
            for _ in 0..200 {
                let c = CostMatrix::from_fn(n, |_, _| (rng.uniform() * 3.0).floor());
                let fast = solve_assignment(&c).unwrap();
                let slow = brute_force_assignment(&c).unwrap();
                assert!(fast.is_permutation());
                assert_eq!(fast.total_cost, slow.total_cost);
            }
        }
        let flat = CostMatrix::from_fn(6, |_, _| 1.0);
        assert_eq!(solve_assignment(&flat).unwrap().total_cost, 6.0);
    }

    #[test]
    fn rejects_non_finite() {
        let c = CostMatrix::from_rows(&[vec![0.0, f64::NAN], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(solve_assignment(&c), Err(Error::NonFinite { row: 0, col: 1 })));
        let c = CostMatrix::from_rows(&[vec![0.0, f64::INFINITY], vec![1.0, 0.0]]).unwrap();
        assert!(brute_force_assignment(&c).is_err());
        assert!(CostMatrix::from_rows(&[vec![0.0], vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn brute_force_size_limit() {
        let c = CostMatrix::from_fn(11, |i, j| (i + j) as f64);
        assert!(matches!(brute_force_assignment(&c), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn brute_force_is_minimum_over_samples() {
        let mut rng = RngState::new(17);
        let c = random_matrix(5, &mut rng);
        let best = brute_force_assignment(&c).unwrap().total_cost;
        let mut perm: Vec<usize> = (0..5).collect();
        for _ in 0..10_000 {
            for i in (1..5).rev() {
                let j = (rng.uniform() * (i + 1) as f64) as usize;
                perm.swap(i, j);
            }
            assert!(best <= c.assignment_cost(&perm));
        }
    }

    #[test]
    fn larger_instances_beat_random_permutations() {
        let mut rng = RngState::new(8);
        let c = random_matrix(200, &mut rng);
        let r = solve_assignment(&c).unwrap().with_edge_costs(&c);
        assert!(r.is_permutation());
        let edges: f64 = r.per_edge_costs.as_ref().unwrap().iter().sum();
        assert!((edges - r.total_cost).abs() < 1e-12);
        assert!(r.total_cost <= c.assignment_cost(&(0..200).collect::<Vec<_>>()));
        let mut perm: Vec<usize> = (0..200).collect();
        for _ in 0..100 {
            for i in (1..200).rev() {
                let j = (rng.uniform() * (i + 1) as f64) as usize;
                perm.swap(i, j);
            }
            assert!(r.total_cost <= c.assignment_cost(&perm));
        }
    }
}
