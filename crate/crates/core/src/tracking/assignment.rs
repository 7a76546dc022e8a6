//! Rectangular linear assignment by shortest augmenting paths (O(n²m)).

/// Dense row-major cost matrix. Entries may be `f64::INFINITY` to forbid a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, fill: f64) -> Self {
        Self { rows, cols, data: vec![fill; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged cost matrix");
        Self { rows: rows.len(), cols, data: rows.concat() }
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

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }
}

/// Outcome of associating rows (tracks) with columns (detections).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssociationResult {
    /// (row, column) pairs.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_detections: Vec<usize>,
}

impl AssociationResult {
    pub fn total_cost(&self, cost: &CostMatrix) -> f64 {
        self.matches.iter().map(|&(r, c)| cost.get(r, c)).sum()
    }
}

/// Optimal assignment restricted to entries `<= max_cost`.
///
/// Among matchings that only use admissible entries, the result has the
/// largest possible number of pairs and, among those, the smallest total
/// cost. Non-finite or over-threshold entries are never matched.
pub fn solve_assignment(cost: &CostMatrix, max_cost: f64) -> AssociationResult {
    let (n_rows, n_cols) = (cost.rows(), cost.cols());
    let admissible = |v: f64| v.is_finite() && v <= max_cost;

    let mut max_abs = 0.0f64;
    let mut any = false;
    for &v in &cost.data {
        if admissible(v) {
            any = true;
            max_abs = max_abs.max(v.abs());
        }
    }
    if !any {
        return AssociationResult {
            matches: Vec::new(),
            unmatched_tracks: (0..n_rows).collect(),
            unmatched_detections: (0..n_cols).collect(),
        };
    }

    // A forbidden pair costs more than any complete admissible matching, so
    // the solver first maximizes admissible cardinality and then minimizes cost.
    let k = n_rows.min(n_cols) as f64;
    let penalty = (2.0 * max_abs + 1.0) * (k + 1.0);

    let transpose = n_rows > n_cols;
    let (n, m) = if transpose { (n_cols, n_rows) } else { (n_rows, n_cols) };
    let at = |i: usize, j: usize| -> f64 {
        let v = if transpose { cost.get(j, i) } else { cost.get(i, j) };
        if admissible(v) {
            v
        } else {
            penalty
        }
    };

    let row_to_col = shortest_augmenting_path(n, m, at);

    let mut matches = Vec::new();
    let mut row_used = vec![false; n_rows];
    let mut col_used = vec![false; n_cols];
    for (i, &j) in row_to_col.iter().enumerate() {
        let (r, c) = if transpose { (j, i) } else { (i, j) };
        if admissible(cost.get(r, c)) {
            matches.push((r, c));
            row_used[r] = true;
            col_used[c] = true;
        }
    }
    matches.sort_unstable();
    AssociationResult {
        matches,
        unmatched_tracks: (0..n_rows).filter(|&r| !row_used[r]).collect(),
        unmatched_detections: (0..n_cols).filter(|&c| !col_used[c]).collect(),
    }
}

/// Assigns each of `n` rows to a distinct column out of `m >= n`, minimizing
/// the sum of `cost(i, j)`. Returns the column of every row.
fn shortest_augmenting_path(n: usize, m: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    debug_assert!(n <= m);
    // 1-based potentials; index 0 is the virtual source column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![0.0f64; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut out = vec![0usize; n];
    for j in 1..=m {
        if p[j] > 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_optimum() {
        let c = CostMatrix::from_rows(&[vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]);
        let r = solve_assignment(&c, f64::INFINITY);
        assert_eq!(r.matches, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(r.total_cost(&c), 0.0);
    }

    #[test]
    fn gated_single_entry() {
        let c = CostMatrix::from_rows(&[vec![5.0]]);
        let r = solve_assignment(&c, 1.0);
        assert!(r.matches.is_empty());
        assert_eq!(r.unmatched_tracks, vec![0]);
        assert_eq!(r.unmatched_detections, vec![0]);
    }

    #[test]
    fn empty_matrix() {
        let r = solve_assignment(&CostMatrix::new(0, 3, 0.0), 1.0);
        assert!(r.matches.is_empty());
        assert_eq!(r.unmatched_detections, vec![0, 1, 2]);
        let r = solve_assignment(&CostMatrix::new(2, 0, 0.0), 1.0);
        assert_eq!(r.unmatched_tracks, vec![0, 1]);
    }

    #[test]
    fn rectangular_both_orientations() {
        let wide = CostMatrix::from_rows(&[vec![3.0, 1.0, 2.0], vec![1.0, 5.0, 4.0]]);
        let r = solve_assignment(&wide, 10.0);
        assert_eq!(r.matches, vec![(0, 1), (1, 0)]);
        assert_eq!(r.unmatched_detections, vec![2]);

        let tall = CostMatrix::from_rows(&[vec![3.0, 1.0], vec![1.0, 5.0], vec![0.5, 0.5]]);
        let r = solve_assignment(&tall, 10.0);
        assert_eq!(r.total_cost(&tall), 1.5);
        assert_eq!(r.matches.len(), 2);
        assert_eq!(r.unmatched_tracks.len(), 1);
    }

    #[test]
    fn infinity_prices_out() {
        let inf = f64::INFINITY;
        let c = CostMatrix::from_rows(&[vec![inf, 0.2], vec![inf, 0.1]]);
        let r = solve_assignment(&c, 1.0);
        assert_eq!(r.matches, vec![(1, 1)]);
        assert_eq!(r.unmatched_tracks, vec![0]);
        assert_eq!(r.unmatched_detections, vec![0]);
    }

    #[test]
    fn prefers_more_admissible_pairs() {
        // Greedy would take (0,0) at 0.1 and leave row 1 stranded.
        let inf = f64::INFINITY;
        let c = CostMatrix::from_rows(&[vec![0.1, 0.6], vec![0.5, inf]]);
        let r = solve_assignment(&c, 1.0);
        assert_eq!(r.matches, vec![(0, 1), (1, 0)]);
    }
}
