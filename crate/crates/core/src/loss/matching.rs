//! Matching-based diagram distances: bottleneck, Wasserstein with an exact
//! assignment solver, and the sliced approximation.
//!
//! The default ground metric on the plane is the sup norm; a point may always
//! match its own diagonal projection, at cost half its persistence (or the
//! Euclidean equivalent). Zero-persistence points are dropped before any
//! distance is computed.

use crate::loss::{off_diagonal_points, scatter_point_grads, sorted_sum, LossError, LossValue, PointRef};
use crate::persistence::Diagram;

/// Plane metric used to compare diagram points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GroundMetric {
    #[default]
    SupNorm,
    Euclidean,
}

impl GroundMetric {
    fn distance(self, a: (f64, f64), b: (f64, f64)) -> f64 {
        match self {
            GroundMetric::SupNorm => (a.0 - b.0).abs().max((a.1 - b.1).abs()),
            GroundMetric::Euclidean => {
                ((a.0 - b.0) * (a.0 - b.0) + (a.1 - b.1) * (a.1 - b.1)).sqrt()
            }
        }
    }

    /// Distance from a point to its diagonal projection.
    fn diag_gap(self, p: (f64, f64)) -> f64 {
        match self {
            GroundMetric::SupNorm => (p.1 - p.0) / 2.0,
            GroundMetric::Euclidean => (p.1 - p.0) / 2.0 * std::f64::consts::SQRT_2,
        }
    }

    /// Derivative of the distance with respect to the first point. The sup
    /// norm routes through the active coordinate (birth preferred on ties);
    /// coincident points get the zero subgradient.
    fn grad(self, p: (f64, f64), q: (f64, f64)) -> (f64, f64) {
        match self {
            GroundMetric::SupNorm => {
                let db = (p.0 - q.0).abs();
                let dd = (p.1 - q.1).abs();
                if db >= dd {
                    (sign(p.0 - q.0), 0.0)
                } else {
                    (0.0, sign(p.1 - q.1))
                }
            }
            GroundMetric::Euclidean => {
                let dist = self.distance(p, q);
                if dist == 0.0 {
                    (0.0, 0.0)
                } else {
                    ((p.0 - q.0) / dist, (p.1 - q.1) / dist)
                }
            }
        }
    }

    /// Derivative of the diagonal gap with respect to the point.
    fn diag_grad(self) -> (f64, f64) {
        match self {
            GroundMetric::SupNorm => (-0.5, 0.5),
            GroundMetric::Euclidean => {
                let c = std::f64::consts::SQRT_2 / 2.0;
                (-c, c)
            }
        }
    }
}

/// One side of a matched pair: a point index into the diagram's regular part,
/// or the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchSide {
    Point(usize),
    Diagonal,
}

/// A partial matching between the off-diagonal points of two diagrams in one
/// homology dimension. Every off-diagonal point of each side appears exactly
/// once; diagonal-to-diagonal pairs are omitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub dim: usize,
    pub pairs: Vec<(MatchSide, MatchSide)>,
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Exact bottleneck distance between the regular parts under the sup norm.
pub fn bottleneck(d: &Diagram, target: &Diagram, dim: usize) -> (LossValue, Matching) {
    bottleneck_with_metric(d, target, dim, GroundMetric::SupNorm)
}

/// Bottleneck distance by binary search over the candidate costs with a
/// bipartite-matching feasibility test. The subgradient concentrates on the
/// first matched pair attaining the value.
pub fn bottleneck_with_metric(
    d: &Diagram,
    target: &Diagram,
    dim: usize,
    metric: GroundMetric,
) -> (LossValue, Matching) {
    let a_pts = off_diagonal_points(d.dim(dim), None);
    let b_pts = off_diagonal_points(target.dim(dim), None);
    let a: Vec<(f64, f64)> = a_pts.iter().map(|p| (p.0, p.1)).collect();
    let b: Vec<(f64, f64)> = b_pts.iter().map(|p| (p.0, p.1)).collect();
    let (n, m) = (a.len(), b.len());

    let mut grad = d.zero_grad();
    if n == 0 && m == 0 {
        return (
            LossValue {
                value: 0.0,
                grad,
                aux: None,
            },
            Matching {
                dim,
                pairs: Vec::new(),
            },
        );
    }

    let mut candidates = vec![0.0];
    for &pa in &a {
        candidates.push(metric.diag_gap(pa));
        for &pb in &b {
            candidates.push(metric.distance(pa, pb));
        }
    }
    for &pb in &b {
        candidates.push(metric.diag_gap(pb));
    }
    candidates.sort_by(|x, y| x.partial_cmp(y).expect("finite costs"));
    candidates.dedup();

    let feasible = |r: f64| perfect_threshold_matching(&a, &b, r, metric);
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    debug_assert!(feasible(candidates[hi]).is_some());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let value = candidates[lo];
    let assignment = feasible(value).expect("feasible at the bottleneck value");

    let matching = assignment_to_matching(dim, &a_pts, &b_pts, &assignment, n, m);

    // The pair attaining the max, scanned in matching order, carries the
    // subgradient; only points of `d` receive coordinates.
    let mut arg: Option<(MatchSide, MatchSide, f64)> = None;
    for &(left, right) in &matching.pairs {
        let cost = pair_cost(&a_pts, &b_pts, left, right, metric);
        if arg.is_none_or(|(.., best)| cost > best) {
            arg = Some((left, right, cost));
        }
    }
    if let Some((MatchSide::Point(orig_i), right, _)) = arg {
        let i = a_pts
            .iter()
            .position(|p| p.2 == PointRef::Regular(orig_i))
            .expect("matched point exists");
        let (gb, gd) = match right {
            MatchSide::Point(orig_j) => {
                let j = b_pts
                    .iter()
                    .position(|p| p.2 == PointRef::Regular(orig_j))
                    .expect("matched point exists");
                metric.grad(a[i], b[j])
            }
            MatchSide::Diagonal => metric.diag_grad(),
        };
        grad.regular[dim][orig_i] = (gb, gd);
    }

    (
        LossValue {
            value,
            grad,
            aux: None,
        },
        matching,
    )
}

/// Exact p-Wasserstein distance (p = 1 or 2) under the sup norm.
pub fn wasserstein(
    d: &Diagram,
    target: &Diagram,
    dim: usize,
    p: u32,
) -> Result<(LossValue, Matching), LossError> {
    wasserstein_with_metric(d, target, dim, p, GroundMetric::SupNorm)
}

/// p-Wasserstein distance via a Hungarian assignment on the diagonally
/// augmented cost matrix. The value is the p-th root of the ascending-sorted
/// sum of matched costs to the p.
pub fn wasserstein_with_metric(
    d: &Diagram,
    target: &Diagram,
    dim: usize,
    p: u32,
    metric: GroundMetric,
) -> Result<(LossValue, Matching), LossError> {
    if p != 1 && p != 2 {
        return Err(LossError::UnsupportedOrder(p));
    }
    let a_pts = off_diagonal_points(d.dim(dim), None);
    let b_pts = off_diagonal_points(target.dim(dim), None);
    let a: Vec<(f64, f64)> = a_pts.iter().map(|q| (q.0, q.1)).collect();
    let b: Vec<(f64, f64)> = b_pts.iter().map(|q| (q.0, q.1)).collect();
    let (n, m) = (a.len(), b.len());
    let size = n + m;

    let mut grad = d.zero_grad();
    if size == 0 {
        return Ok((
            LossValue {
                value: 0.0,
                grad,
                aux: None,
            },
            Matching {
                dim,
                pairs: Vec::new(),
            },
        ));
    }

    let base_cost = |i: usize, j: usize| -> f64 {
        match (i < n, j < m) {
            (true, true) => metric.distance(a[i], b[j]),
            (true, false) => metric.diag_gap(a[i]),
            (false, true) => metric.diag_gap(b[j]),
            (false, false) => 0.0,
        }
    };
    let powered = |i: usize, j: usize| base_cost(i, j).powi(p as i32);
    let row_to_col = hungarian(size, &powered);

    let value = {
        let terms: Vec<f64> = (0..size).map(|i| powered(i, row_to_col[i])).collect();
        sorted_sum(terms).powf(1.0 / p as f64)
    };

    if value > 0.0 {
        // d value / d cost_k = value^(1-p) * cost_k^(p-1), then through the
        // sup-norm or diagonal-projection derivative of the matched pair.
        for i in 0..n {
            let j = row_to_col[i];
            let cost = base_cost(i, j);
            if cost == 0.0 {
                continue;
            }
            let outer = value.powi(1 - p as i32) * cost.powi(p as i32 - 1);
            let (gb, gd) = if j < m {
                metric.grad(a[i], b[j])
            } else {
                metric.diag_grad()
            };
            if let PointRef::Regular(orig) = a_pts[i].2 {
                grad.regular[dim][orig].0 += outer * gb;
                grad.regular[dim][orig].1 += outer * gd;
            }
        }
    }

    let assignment: Vec<Option<usize>> = row_to_col.iter().map(|&j| Some(j)).collect();
    let matching = assignment_to_matching(dim, &a_pts, &b_pts, &assignment, n, m);
    Ok((
        LossValue {
            value,
            grad,
            aux: None,
        },
        matching,
    ))
}

/// Sliced Wasserstein distance: the mean over evenly spaced directions in
/// [-pi/2, pi/2) of the 1-dimensional transport cost between the projected
/// diagrams, each augmented with the other's diagonal projections.
pub fn sliced_wasserstein(d: &Diagram, target: &Diagram, dim: usize, n_dirs: usize) -> LossValue {
    assert!(n_dirs >= 1, "need at least one direction");
    let a_pts = off_diagonal_points(d.dim(dim), None);
    let b_pts = off_diagonal_points(target.dim(dim), None);
    let a: Vec<(f64, f64)> = a_pts.iter().map(|q| (q.0, q.1)).collect();
    let b: Vec<(f64, f64)> = b_pts.iter().map(|q| (q.0, q.1)).collect();
    let (value, grad_a, _grad_b) = sliced_wasserstein_points(&a, &b, n_dirs);
    let mut grad = d.zero_grad();
    scatter_point_grads(&mut grad, dim, &a_pts, &grad_a, 1.0);
    LossValue {
        value,
        grad,
        aux: None,
    }
}

/// Which original point a projected scalar belongs to.
#[derive(Clone, Copy)]
enum Projected {
    Direct(usize),
    DiagonalOf(usize),
}

/// One (d/d birth, d/d death) pair per point of a diagram side.
pub(crate) type SideGrads = Vec<(f64, f64)>;

/// Point-list form of the sliced distance, returning per-point gradients for
/// both sides.
pub(crate) fn sliced_wasserstein_points(
    a: &[(f64, f64)],
    b: &[(f64, f64)],
    n_dirs: usize,
) -> (f64, SideGrads, SideGrads) {
    let mut grad_a = vec![(0.0, 0.0); a.len()];
    let mut grad_b = vec![(0.0, 0.0); b.len()];
    let mut slice_costs = Vec::with_capacity(n_dirs);
    let inv = 1.0 / n_dirs as f64;

    for l in 0..n_dirs {
        let theta = -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * l as f64 / n_dirs as f64;
        let (cos_t, sin_t) = (theta.cos(), theta.sin());
        let diag_coef = (cos_t + sin_t) / 2.0;

        let project = |p: (f64, f64)| cos_t * p.0 + sin_t * p.1;
        let project_diag = |p: (f64, f64)| (p.0 + p.1) * diag_coef;

        let mut u: Vec<(f64, Projected)> = a
            .iter()
            .enumerate()
            .map(|(i, &p)| (project(p), Projected::Direct(i)))
            .chain(
                b.iter()
                    .enumerate()
                    .map(|(j, &p)| (project_diag(p), Projected::DiagonalOf(j))),
            )
            .collect();
        let mut v: Vec<(f64, Projected)> = b
            .iter()
            .enumerate()
            .map(|(j, &p)| (project(p), Projected::Direct(j)))
            .chain(
                a.iter()
                    .enumerate()
                    .map(|(i, &p)| (project_diag(p), Projected::DiagonalOf(i))),
            )
            .collect();
        u.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite projections"));
        v.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite projections"));

        let mut cost = 0.0;
        for (&(pu, su), &(pv, sv)) in u.iter().zip(&v) {
            cost += (pu - pv).abs();
            let s = sign(pu - pv);
            if s == 0.0 {
                continue;
            }
            match su {
                Projected::Direct(i) => {
                    grad_a[i].0 += s * cos_t * inv;
                    grad_a[i].1 += s * sin_t * inv;
                }
                Projected::DiagonalOf(j) => {
                    grad_b[j].0 += s * diag_coef * inv;
                    grad_b[j].1 += s * diag_coef * inv;
                }
            }
            match sv {
                Projected::Direct(j) => {
                    grad_b[j].0 -= s * cos_t * inv;
                    grad_b[j].1 -= s * sin_t * inv;
                }
                Projected::DiagonalOf(i) => {
                    grad_a[i].0 -= s * diag_coef * inv;
                    grad_a[i].1 -= s * diag_coef * inv;
                }
            }
        }
        slice_costs.push(cost);
    }
    (sorted_sum(slice_costs) * inv, grad_a, grad_b)
}

fn pair_cost(
    a_pts: &[(f64, f64, PointRef)],
    b_pts: &[(f64, f64, PointRef)],
    left: MatchSide,
    right: MatchSide,
    metric: GroundMetric,
) -> f64 {
    let find = |pts: &[(f64, f64, PointRef)], orig: usize| -> (f64, f64) {
        let p = pts
            .iter()
            .find(|p| p.2 == PointRef::Regular(orig))
            .expect("matching references an off-diagonal point");
        (p.0, p.1)
    };
    match (left, right) {
        (MatchSide::Point(i), MatchSide::Point(j)) => {
            metric.distance(find(a_pts, i), find(b_pts, j))
        }
        (MatchSide::Point(i), MatchSide::Diagonal) => metric.diag_gap(find(a_pts, i)),
        (MatchSide::Diagonal, MatchSide::Point(j)) => metric.diag_gap(find(b_pts, j)),
        (MatchSide::Diagonal, MatchSide::Diagonal) => 0.0,
    }
}

/// Convert an augmented-assignment (rows: a points then diagonal slots) into
/// a [`Matching`] over original regular indices, dropping diagonal-diagonal
/// pairs. Pairs are listed with all of `d`'s points first, then the target
/// points sent to the diagonal.
fn assignment_to_matching(
    dim: usize,
    a_pts: &[(f64, f64, PointRef)],
    b_pts: &[(f64, f64, PointRef)],
    row_to_col: &[Option<usize>],
    n: usize,
    m: usize,
) -> Matching {
    let orig = |r: PointRef| match r {
        PointRef::Regular(i) => i,
        PointRef::Essential(_) => unreachable!("distance losses use regular parts only"),
    };
    let mut pairs = Vec::new();
    for i in 0..n {
        let left = MatchSide::Point(orig(a_pts[i].2));
        match row_to_col[i] {
            Some(j) if j < m => pairs.push((left, MatchSide::Point(orig(b_pts[j].2)))),
            _ => pairs.push((left, MatchSide::Diagonal)),
        }
    }
    let mut b_matched = vec![false; m];
    for &assigned in row_to_col.iter().take(n) {
        if let Some(j) = assigned {
            if j < m {
                b_matched[j] = true;
            }
        }
    }
    for (j, matched) in b_matched.iter().enumerate() {
        if !matched {
            pairs.push((MatchSide::Diagonal, MatchSide::Point(orig(b_pts[j].2))));
        }
    }
    Matching { dim, pairs }
}

/// Maximum bipartite matching on the threshold graph at radius `r` for the
/// diagonally augmented instance; `Some(assignment)` iff it is perfect.
/// Rows are a-points then b-diagonal slots, columns b-points then a-diagonal
/// slots.
fn perfect_threshold_matching(
    a: &[(f64, f64)],
    b: &[(f64, f64)],
    r: f64,
    metric: GroundMetric,
) -> Option<Vec<Option<usize>>> {
    let (n, m) = (a.len(), b.len());
    let size = n + m;
    let allowed = |i: usize, j: usize| -> bool {
        match (i < n, j < m) {
            (true, true) => metric.distance(a[i], b[j]) <= r,
            (true, false) => metric.diag_gap(a[i]) <= r,
            (false, true) => metric.diag_gap(b[j]) <= r,
            (false, false) => true,
        }
    };
    let mut col_row: Vec<Option<usize>> = vec![None; size];
    let mut row_col: Vec<Option<usize>> = vec![None; size];
    for i in 0..size {
        let mut visited = vec![false; size];
        if !augment(i, &allowed, &mut visited, &mut col_row, &mut row_col, size) {
            return None;
        }
    }
    Some(row_col)
}

fn augment(
    row: usize,
    allowed: &impl Fn(usize, usize) -> bool,
    visited: &mut [bool],
    col_row: &mut [Option<usize>],
    row_col: &mut [Option<usize>],
    size: usize,
) -> bool {
    for col in 0..size {
        if visited[col] || !allowed(row, col) {
            continue;
        }
        visited[col] = true;
        if col_row[col].is_none()
            || augment(col_row[col].unwrap(), allowed, visited, col_row, row_col, size)
        {
            col_row[col] = Some(row);
            row_col[row] = Some(col);
            return true;
        }
    }
    false
}

/// Minimum-cost perfect assignment on an implicit square cost matrix
/// (Jonker-Volgenant shortest augmenting paths with potentials). Returns the
/// column assigned to each row.
pub(crate) fn hungarian(size: usize, cost: &impl Fn(usize, usize) -> f64) -> Vec<usize> {
    const UNSET: usize = usize::MAX;
    let mut u = vec![0.0; size + 1];
    let mut v = vec![0.0; size + 1];
    let mut col_row = vec![UNSET; size + 1];
    let mut way = vec![size; size + 1];

    for row in 0..size {
        col_row[size] = row;
        let mut j0 = size;
        let mut minv = vec![f64::INFINITY; size + 1];
        let mut used = vec![false; size + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = size;
            for j in 0..size {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0, j) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=size {
                if used[j] {
                    if col_row[j] != UNSET {
                        u[col_row[j]] += delta;
                    }
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == UNSET {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == size {
                break;
            }
        }
    }

    let mut row_col = vec![UNSET; size];
    for j in 0..size {
        if col_row[j] != UNSET {
            row_col[col_row[j]] = j;
        }
    }
    row_col
}
