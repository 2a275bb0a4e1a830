//! Parametrized filtration families: forward evaluation of the filtration
//! vector together with a [`GradTape`] of parameter derivatives.
//!
//! Every family here is a max of smooth terms per cell. The forward pass
//! selects one generating argmax per cell (ties broken by the smallest
//! lexicographic generating index) and records its derivative, which is a
//! valid subgradient selection everywhere and the exact gradient away from
//! ties.

use thiserror::Error;

use crate::complex::{Complex, ComplexKind, Filtration};
use crate::grad::GradTape;
use crate::matrix::DenseMatrix;

#[derive(Debug, Error)]
pub enum FiltrationError {
    #[error("point cloud must be non-empty with positive dimension")]
    EmptyCloud,
    #[error("non-finite coordinate in point {point}")]
    NonFinitePoint { point: usize },
    #[error("complex must be simplicial for this family")]
    NotSimplicial,
    #[error("complex references vertex {vertex} but only {n} points given")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("expected {expected} vertex values, got {got}")]
    VertexCountMismatch { expected: usize, got: usize },
    #[error("k_nn = {k_nn} out of range for {n} points (need 1 <= k_nn < n)")]
    KnnOutOfRange { k_nn: usize, n: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    MatrixNotSquare { rows: usize, cols: usize },
    #[error("matrix entries ({i},{j}) and ({j},{i}) differ")]
    MatrixAsymmetric { i: usize, j: usize },
    #[error("matrix diagonal entry {i} must be zero")]
    MatrixDiagonalNonzero { i: usize },
    #[error("matrix entry ({i},{j}) is negative")]
    MatrixNegativeEntry { i: usize, j: usize },
    #[error("image pixel ({row},{col}) is not 0 or 1")]
    NonBinaryImage { row: usize, col: usize },
    #[error("angle must be finite")]
    NonFiniteAngle,
}

/// n points in R^d, stored row-major. The flat coordinate vector is the
/// parameter space of the point-cloud families: point i's coordinate c has
/// parameter index `i * d + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl PointCloud {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, FiltrationError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(FiltrationError::EmptyCloud);
        }
        let d = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d || row.iter().any(|v| !v.is_finite()) {
                return Err(FiltrationError::NonFinitePoint { point: i });
            }
            data.extend_from_slice(row);
        }
        Ok(PointCloud {
            data,
            n: rows.len(),
            d,
        })
    }

    pub fn from_flat(data: Vec<f64>, d: usize) -> Result<Self, FiltrationError> {
        if d == 0 || data.is_empty() || !data.len().is_multiple_of(d) {
            return Err(FiltrationError::EmptyCloud);
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(FiltrationError::NonFinitePoint { point: i / d });
        }
        let n = data.len() / d;
        Ok(PointCloud { data, n, d })
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n_params(&self) -> usize {
        self.n * self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn coords(&self) -> &[f64] {
        &self.data
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// A real value per vertex of a complex.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    values: Vec<f64>,
}

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Result<Self, FiltrationError> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FiltrationError::NonFinitePoint { point: i });
        }
        Ok(VertexFunction { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Direction parameter of the image height family, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightDirection {
    pub theta: f64,
}

impl HeightDirection {
    pub fn new(theta: f64) -> Result<Self, FiltrationError> {
        if !theta.is_finite() {
            return Err(FiltrationError::NonFiniteAngle);
        }
        Ok(HeightDirection { theta })
    }
}

fn check_simplicial_over(k: &Complex, n: usize) -> Result<(), FiltrationError> {
    if k.kind() != ComplexKind::Simplicial {
        return Err(FiltrationError::NotSimplicial);
    }
    for cell in k.cells() {
        if let Some(&v) = cell.vertices.iter().find(|&&v| v >= n) {
            return Err(FiltrationError::VertexOutOfRange { vertex: v, n });
        }
    }
    Ok(())
}

fn add_term(entry: &mut Vec<(usize, f64)>, p: usize, c: f64) {
    match entry.iter_mut().find(|(q, _)| *q == p) {
        Some((_, acc)) => *acc += c,
        None => entry.push((p, c)),
    }
}

/// Derivative entries of the Euclidean distance between points `i` and `j`
/// with respect to the flat coordinates. At distance zero the coefficients
/// are 0, a valid subgradient of the norm at the origin.
fn distance_terms(x: &PointCloud, i: usize, j: usize, dist: f64, scale: f64) -> Vec<(usize, f64)> {
    let d = x.dim();
    let mut entry = Vec::with_capacity(2 * d);
    for c in 0..d {
        let g = if dist > 0.0 {
            (x.point(i)[c] - x.point(j)[c]) / dist
        } else {
            0.0
        };
        entry.push((i * d + c, scale * g));
        entry.push((j * d + c, -scale * g));
    }
    entry
}

/// Vietoris-Rips filtration: a simplex enters at the largest pairwise
/// distance among its vertices; vertices enter at 0.
pub fn rips_filtration(
    x: &PointCloud,
    k: &Complex,
) -> Result<(Filtration, GradTape), FiltrationError> {
    let n = x.n_points();
    check_simplicial_over(k, n)?;
    let dist = pairwise_distances(x);
    let mut values = vec![0.0; k.len()];
    let mut tape = GradTape::new(k.len(), x.n_params());
    for cell in k.cells() {
        if cell.dim == 0 {
            continue;
        }
        let (i, j, v) = max_pair(&cell.vertices, |a, b| dist[a * n + b]);
        values[cell.id] = v;
        tape.set(cell.id, distance_terms(x, i, j, v, 1.0));
    }
    let f = Filtration::new(values).expect("finite inputs give finite distances");
    Ok((f, tape))
}

/// Rips-style filtration of a symmetric dissimilarity matrix. The parameter
/// vector is the flattened matrix; the gradient lands on the upper-triangle
/// entry of the selected pair.
pub fn rips_from_matrix(
    m: &DenseMatrix,
    k: &Complex,
) -> Result<(Filtration, GradTape), FiltrationError> {
    let n = m.rows();
    if m.cols() != n {
        return Err(FiltrationError::MatrixNotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    for i in 0..n {
        if m.get(i, i) != 0.0 {
            return Err(FiltrationError::MatrixDiagonalNonzero { i });
        }
        for j in (i + 1)..n {
            if m.get(i, j) != m.get(j, i) {
                return Err(FiltrationError::MatrixAsymmetric { i, j });
            }
            if m.get(i, j) < 0.0 {
                return Err(FiltrationError::MatrixNegativeEntry { i, j });
            }
        }
    }
    check_simplicial_over(k, n)?;
    let mut values = vec![0.0; k.len()];
    let mut tape = GradTape::new(k.len(), n * n);
    for cell in k.cells() {
        if cell.dim == 0 {
            continue;
        }
        let (i, j, v) = max_pair(&cell.vertices, |a, b| m.get(a, b));
        values[cell.id] = v;
        tape.set(cell.id, vec![(i * n + j, 1.0)]);
    }
    let f = Filtration::new(values).expect("finite matrix gives finite values");
    Ok((f, tape))
}

/// Which term of the weighted edge formula won the max.
#[derive(Clone, Copy)]
enum EdgeBranch {
    WeightLo,
    WeightHi,
    Sum,
}

/// Weighted Rips filtration. Vertex j enters at `2 f_j`; an edge (i, j) at
/// `max(2 f_i, 2 f_j, |x_i - x_j| + f_i + f_j)`; higher simplices at the max
/// over their edges. The parameter vector is the flat point coordinates
/// followed by the vertex weights.
pub fn weighted_rips_filtration(
    x: &PointCloud,
    weights: &VertexFunction,
    k: &Complex,
) -> Result<(Filtration, GradTape), FiltrationError> {
    let n = x.n_points();
    if weights.len() != n {
        return Err(FiltrationError::VertexCountMismatch {
            expected: n,
            got: weights.len(),
        });
    }
    check_simplicial_over(k, n)?;
    let nd = x.n_params();
    let w = weights.values();
    let dist = pairwise_distances(x);

    let edge = |i: usize, j: usize| -> (f64, EdgeBranch, f64) {
        let d_ij = dist[i * n + j];
        let candidates = [
            (2.0 * w[i], EdgeBranch::WeightLo),
            (2.0 * w[j], EdgeBranch::WeightHi),
            (d_ij + w[i] + w[j], EdgeBranch::Sum),
        ];
        let mut best = candidates[0];
        for &c in &candidates[1..] {
            if c.0 > best.0 {
                best = c;
            }
        }
        (best.0, best.1, d_ij)
    };

    let mut values = vec![0.0; k.len()];
    let mut tape = GradTape::new(k.len(), nd + n);
    for cell in k.cells() {
        match cell.dim {
            0 => {
                let v = cell.vertices[0];
                values[cell.id] = 2.0 * w[v];
                tape.set(cell.id, vec![(nd + v, 2.0)]);
            }
            _ => {
                // Largest edge among the simplex's vertex pairs, first pair
                // in lexicographic order on ties.
                let mut best: Option<(f64, usize, usize, EdgeBranch, f64)> = None;
                for (a, &i) in cell.vertices.iter().enumerate() {
                    for &j in &cell.vertices[a + 1..] {
                        let (v, branch, d_ij) = edge(i, j);
                        if best.is_none_or(|(bv, ..)| v > bv) {
                            best = Some((v, i, j, branch, d_ij));
                        }
                    }
                }
                let (v, i, j, branch, d_ij) = best.expect("simplex of dim >= 1 has a pair");
                values[cell.id] = v;
                let entry = match branch {
                    EdgeBranch::WeightLo => vec![(nd + i, 2.0)],
                    EdgeBranch::WeightHi => vec![(nd + j, 2.0)],
                    EdgeBranch::Sum => {
                        let mut e = distance_terms(x, i, j, d_ij, 1.0);
                        add_term(&mut e, nd + i, 1.0);
                        add_term(&mut e, nd + j, 1.0);
                        e
                    }
                };
                tape.set(cell.id, entry);
            }
        }
    }
    let f = Filtration::new(values).expect("finite inputs");
    Ok((f, tape))
}

/// Distance-to-measure weights: the weight at a point is the mean distance to
/// its `k_nn` nearest other points (ties by smallest index).
pub fn dtm_weights(
    x: &PointCloud,
    k_nn: usize,
) -> Result<(VertexFunction, GradTape), FiltrationError> {
    let n = x.n_points();
    if k_nn == 0 || k_nn >= n {
        return Err(FiltrationError::KnnOutOfRange { k_nn, n });
    }
    let d = x.dim();
    let mut values = vec![0.0; n];
    let mut tape = GradTape::new(n, x.n_params());
    for (i, value) in values.iter_mut().enumerate() {
        let mut neighbours: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (x.distance(i, j), j))
            .collect();
        neighbours.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        neighbours.truncate(k_nn);
        let inv_k = 1.0 / k_nn as f64;
        *value = neighbours.iter().map(|nb| nb.0).sum::<f64>() * inv_k;
        let mut entry = Vec::new();
        for &(d_ij, j) in &neighbours {
            if d_ij == 0.0 {
                continue;
            }
            for c in 0..d {
                let g = (x.point(i)[c] - x.point(j)[c]) / d_ij * inv_k;
                add_term(&mut entry, i * d + c, g);
                add_term(&mut entry, j * d + c, -g);
            }
        }
        tape.set(i, entry);
    }
    Ok((VertexFunction::new(values)?, tape))
}

/// Lower-star filtration: each cell enters at the max of its vertex values,
/// routed to the smallest argmax vertex. Works for simplicial and cubical
/// complexes alike.
pub fn lower_star_filtration(
    f: &VertexFunction,
    k: &Complex,
) -> Result<(Filtration, GradTape), FiltrationError> {
    let n_vertices = k.n_vertices();
    if f.len() != n_vertices {
        return Err(FiltrationError::VertexCountMismatch {
            expected: n_vertices,
            got: f.len(),
        });
    }
    let vals = f.values();
    let mut values = vec![0.0; k.len()];
    let mut tape = GradTape::new(k.len(), n_vertices);
    for cell in k.cells() {
        let mut best = cell.vertices[0];
        for &v in &cell.vertices[1..] {
            if vals[v] > vals[best] {
                best = v;
            }
        }
        values[cell.id] = vals[best];
        tape.set(cell.id, vec![(best, 1.0)]);
    }
    let filt = Filtration::new(values).expect("finite vertex function");
    Ok((filt, tape))
}

/// Height function of a binary image along a direction: foreground pixel
/// (r, c) gets `cos(theta) * c + sin(theta) * r`; background pixels get the
/// sentinel `2 * (h + w)`, strictly above any foreground height, so they
/// enter the filtration last.
pub fn height_filtration(
    image: &DenseMatrix,
    dir: HeightDirection,
) -> Result<(VertexFunction, GradTape), FiltrationError> {
    let (h, w) = (image.rows(), image.cols());
    let sentinel = background_sentinel(h, w);
    let (cos_t, sin_t) = (dir.theta.cos(), dir.theta.sin());
    let mut values = vec![0.0; h * w];
    let mut tape = GradTape::new(h * w, 1);
    for r in 0..h {
        for c in 0..w {
            let p = image.get(r, c);
            let v = r * w + c;
            if p == 1.0 {
                values[v] = cos_t * c as f64 + sin_t * r as f64;
                tape.set(v, vec![(0, -sin_t * c as f64 + cos_t * r as f64)]);
            } else if p == 0.0 {
                values[v] = sentinel;
            } else {
                return Err(FiltrationError::NonBinaryImage { row: r, col: c });
            }
        }
    }
    Ok((VertexFunction::new(values)?, tape))
}

/// Sentinel height assigned to background pixels.
pub fn background_sentinel(h: usize, w: usize) -> f64 {
    2.0 * (h + w) as f64
}

fn pairwise_distances(x: &PointCloud) -> Vec<f64> {
    let n = x.n_points();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = x.distance(i, j);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    dist
}

/// Max over vertex pairs in lexicographic order; strict improvement keeps the
/// first maximizing pair.
fn max_pair(vertices: &[usize], value: impl Fn(usize, usize) -> f64) -> (usize, usize, f64) {
    let mut best: Option<(usize, usize, f64)> = None;
    for (a, &i) in vertices.iter().enumerate() {
        for &j in &vertices[a + 1..] {
            let v = value(i, j);
            if best.is_none_or(|(.., bv)| v > bv) {
                best = Some((i, j, v));
            }
        }
    }
    best.expect("at least one pair")
}
