use pathfinding::kuhn_munkres::kuhn_munkres_min;
use pathfinding::matrix::Matrix;

/// Up to this size every permutation is tried.
pub const EXHAUSTIVE_LIMIT: usize = 6;

/// Minimum-cost perfect assignment of rows to columns of a square matrix.
/// Returns the value and `perm[row] = column`.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> (i64, Vec<usize>) {
    let n = cost.len();
    if n == 0 {
        return (0, vec![]);
    }
    if n <= EXHAUSTIVE_LIMIT {
        return exhaustive(cost);
    }
    let m = Matrix::from_rows(cost.iter().cloned()).expect("square matrix");
    kuhn_munkres_min(&m)
}

fn exhaustive(cost: &[Vec<i64>]) -> (i64, Vec<usize>) {
    let n = cost.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = (i64::MAX, perm.clone());
    // Heap's algorithm
    let mut c = vec![0usize; n];
    let eval = |p: &[usize]| p.iter().enumerate().map(|(r, &col)| cost[r][col]).sum::<i64>();
    best.0 = eval(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let v = eval(&perm);
            if v < best.0 {
                best = (v, perm.clone());
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}
