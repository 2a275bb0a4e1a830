//! Finite simplicial and cubical cell complexes and the monotone filtration
//! vectors defined over them.
//!
//! A complex is a flat list of cells, each carrying its dimension, sorted
//! vertex list and codimension-1 boundary. Cell ids are contiguous and ordered
//! by dimension first, then lexicographically by vertex list, so that every
//! construction is reproducible bit for bit.

use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("need at least one vertex")]
    EmptyComplex,
    #[error("max_dim {max_dim} out of range for {n_vertices} vertices")]
    DimOutOfRange { n_vertices: usize, max_dim: usize },
    #[error("grid must have positive dimensions, got {height}x{width}")]
    EmptyGrid { height: usize, width: usize },
    #[error("filtration has {got} values but the complex has {expected} cells")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite filtration value at cell {cell}")]
    NonFiniteValue { cell: usize },
    #[error("cell {cell} is malformed: {reason}")]
    MalformedCell { cell: usize, reason: String },
}

/// Whether cells are simplices or axis-aligned cubes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexKind {
    Simplicial,
    Cubical,
}

/// A single cell: a simplex given by its sorted vertex list, or a cube given
/// by the sorted list of its corner vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub id: usize,
    pub dim: usize,
    /// Strictly increasing vertex ids. A k-simplex has k+1 entries, a k-cube
    /// has 2^k corner entries.
    pub vertices: Vec<usize>,
    /// Ids of the codimension-1 faces, sorted ascending. Empty for vertices.
    pub boundary: Vec<usize>,
}

/// A finite cell complex, closed under taking faces.
#[derive(Debug, Clone)]
pub struct Complex {
    cells: Vec<Cell>,
    kind: ComplexKind,
    /// (height, width) when the complex was built from a pixel grid; pixels
    /// map to vertices as `r * width + c`.
    grid: Option<(usize, usize)>,
}

impl Complex {
    /// All faces of the (n-1)-simplex on `n_vertices` vertices up to dimension
    /// `max_dim`, ordered by dimension then lexicographically.
    pub fn full_simplex(n_vertices: usize, max_dim: usize) -> Result<Self, ComplexError> {
        if n_vertices == 0 {
            return Err(ComplexError::EmptyComplex);
        }
        if max_dim >= n_vertices {
            return Err(ComplexError::DimOutOfRange {
                n_vertices,
                max_dim,
            });
        }
        let mut cells = Vec::new();
        let mut id_of: HashMap<Vec<usize>, usize> = HashMap::new();
        for dim in 0..=max_dim {
            let mut subset: Vec<usize> = (0..=dim).collect();
            loop {
                let id = cells.len();
                let boundary = if dim == 0 {
                    Vec::new()
                } else {
                    let mut faces: Vec<usize> = (0..subset.len())
                        .map(|drop| {
                            let mut face = subset.clone();
                            face.remove(drop);
                            id_of[&face]
                        })
                        .collect();
                    faces.sort_unstable();
                    faces
                };
                id_of.insert(subset.clone(), id);
                cells.push(Cell {
                    id,
                    dim,
                    vertices: subset.clone(),
                    boundary,
                });
                if !next_combination(&mut subset, n_vertices) {
                    break;
                }
            }
        }
        Ok(Complex {
            cells,
            kind: ComplexKind::Simplicial,
            grid: None,
        })
    }

    /// Full cubical complex of an `height` x `width` pixel grid. Pixels are
    /// vertices (pixel (r, c) is vertex `r * width + c`); edges and squares
    /// connect neighbouring pixels.
    pub fn cubical_grid(height: usize, width: usize) -> Result<Self, ComplexError> {
        if height == 0 || width == 0 {
            return Err(ComplexError::EmptyGrid { height, width });
        }
        let v = |r: usize, c: usize| r * width + c;
        let mut cells = Vec::new();
        for r in 0..height {
            for c in 0..width {
                cells.push(Cell {
                    id: v(r, c),
                    dim: 0,
                    vertices: vec![v(r, c)],
                    boundary: Vec::new(),
                });
            }
        }
        let mut edge_id: HashMap<(usize, usize), usize> = HashMap::new();
        for r in 0..height {
            for c in 0..width {
                if c + 1 < width {
                    let id = cells.len();
                    edge_id.insert((v(r, c), v(r, c + 1)), id);
                    cells.push(Cell {
                        id,
                        dim: 1,
                        vertices: vec![v(r, c), v(r, c + 1)],
                        boundary: vec![v(r, c), v(r, c + 1)],
                    });
                }
                if r + 1 < height {
                    let id = cells.len();
                    edge_id.insert((v(r, c), v(r + 1, c)), id);
                    cells.push(Cell {
                        id,
                        dim: 1,
                        vertices: vec![v(r, c), v(r + 1, c)],
                        boundary: vec![v(r, c), v(r + 1, c)],
                    });
                }
            }
        }
        for r in 0..height.saturating_sub(1) {
            for c in 0..width.saturating_sub(1) {
                let id = cells.len();
                let corners = vec![v(r, c), v(r, c + 1), v(r + 1, c), v(r + 1, c + 1)];
                let mut boundary = vec![
                    edge_id[&(v(r, c), v(r, c + 1))],
                    edge_id[&(v(r + 1, c), v(r + 1, c + 1))],
                    edge_id[&(v(r, c), v(r + 1, c))],
                    edge_id[&(v(r, c + 1), v(r + 1, c + 1))],
                ];
                boundary.sort_unstable();
                cells.push(Cell {
                    id,
                    dim: 2,
                    vertices: corners,
                    boundary,
                });
            }
        }
        Ok(Complex {
            cells,
            kind: ComplexKind::Cubical,
            grid: Some((height, width)),
        })
    }

    /// Build a complex from an explicit cell list, checking closure and id
    /// invariants. Useful for complexes that are not full simplices or grids,
    /// such as the path graph used for signal sublevel filtrations.
    pub fn from_cells(kind: ComplexKind, cells: Vec<Cell>) -> Result<Self, ComplexError> {
        if cells.is_empty() {
            return Err(ComplexError::EmptyComplex);
        }
        let n = cells.len();
        for (i, cell) in cells.iter().enumerate() {
            if cell.id != i {
                return Err(ComplexError::MalformedCell {
                    cell: i,
                    reason: format!("id {} not contiguous", cell.id),
                });
            }
            if cell.vertices.is_empty() || cell.vertices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ComplexError::MalformedCell {
                    cell: i,
                    reason: "vertices not strictly increasing".into(),
                });
            }
            let expected = match (kind, cell.dim) {
                (_, 0) => 0,
                (ComplexKind::Simplicial, d) => d + 1,
                (ComplexKind::Cubical, d) => 2 * d,
            };
            if cell.boundary.len() != expected {
                return Err(ComplexError::MalformedCell {
                    cell: i,
                    reason: format!(
                        "boundary has {} entries, expected {}",
                        cell.boundary.len(),
                        expected
                    ),
                });
            }
            for &b in &cell.boundary {
                if b >= n {
                    return Err(ComplexError::MalformedCell {
                        cell: i,
                        reason: format!("boundary id {b} out of range"),
                    });
                }
                if cells[b].dim + 1 != cell.dim {
                    return Err(ComplexError::MalformedCell {
                        cell: i,
                        reason: format!("boundary id {b} has dimension {}", cells[b].dim),
                    });
                }
                if !cells[b].vertices.iter().all(|v| cell.vertices.contains(v)) {
                    return Err(ComplexError::MalformedCell {
                        cell: i,
                        reason: format!("boundary id {b} is not a face"),
                    });
                }
            }
        }
        Ok(Complex {
            cells,
            kind,
            grid: None,
        })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, id: usize) -> &Cell {
        &self.cells[id]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn kind(&self) -> ComplexKind {
        self.kind
    }

    pub fn max_dim(&self) -> usize {
        self.cells.iter().map(|c| c.dim).max().unwrap_or(0)
    }

    /// Number of 0-cells. Vertices always occupy the leading id block.
    pub fn n_vertices(&self) -> usize {
        self.cells.iter().filter(|c| c.dim == 0).count()
    }

    /// Pixel grid shape, when this complex was built by [`Complex::cubical_grid`].
    pub fn grid_dims(&self) -> Option<(usize, usize)> {
        self.grid
    }
}

/// One filtration value per cell, monotone under the face relation.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    values: Vec<f64>,
}

impl Filtration {
    pub fn new(values: Vec<f64>) -> Result<Self, ComplexError> {
        if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
            return Err(ComplexError::NonFiniteValue { cell });
        }
        Ok(Filtration { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// True iff `f` is monotone on `c`: no cell enters before one of its faces.
/// A length mismatch is an error, distinct from a mere monotonicity failure.
pub fn validate_filtration(c: &Complex, f: &Filtration) -> Result<bool, ComplexError> {
    if f.len() != c.len() {
        return Err(ComplexError::LengthMismatch {
            expected: c.len(),
            got: f.len(),
        });
    }
    for cell in c.cells() {
        for &face in &cell.boundary {
            if f.value(face) > f.value(cell.id) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Advance `subset` to the next size-k subset of 0..n in lexicographic order.
fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - (k - i) {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_dim(c: &Complex, d: usize) -> usize {
        c.cells().iter().filter(|cell| cell.dim == d).count()
    }

    /// Exhaustive structural check: boundary ids exist, point one dimension
    /// down, and ids are contiguous in dimension-then-lex order.
    fn check_integrity(c: &Complex) {
        for (i, cell) in c.cells().iter().enumerate() {
            assert_eq!(cell.id, i);
            assert!(cell.vertices.windows(2).all(|w| w[0] < w[1]));
            for &b in &cell.boundary {
                assert!(b < c.len());
                assert_eq!(c.cell(b).dim + 1, cell.dim);
            }
        }
        for w in c.cells().windows(2) {
            let key = |cell: &Cell| (cell.dim, cell.vertices.clone());
            assert!(key(&w[0]) < key(&w[1]), "cells out of order");
        }
    }

    #[test]
    fn full_simplex_small_counts() {
        let c = Complex::full_simplex(2, 1).unwrap();
        assert_eq!(c.len(), 3);
        let c = Complex::full_simplex(3, 2).unwrap();
        assert_eq!(c.len(), 7);
        assert_eq!(count_dim(&c, 0), 3);
        assert_eq!(count_dim(&c, 1), 3);
        assert_eq!(count_dim(&c, 2), 1);
        let c = Complex::full_simplex(4, 1).unwrap();
        assert_eq!(c.len(), 10);
        check_integrity(&c);
    }

    #[test]
    fn full_simplex_has_all_faces() {
        for n in 1..=5 {
            let c = Complex::full_simplex(n, n - 1).unwrap();
            assert_eq!(c.len(), (1usize << n) - 1);
            check_integrity(&c);
        }
    }

    #[test]
    fn full_simplex_rejects_bad_dim() {
        assert!(Complex::full_simplex(3, 3).is_err());
        assert!(Complex::full_simplex(0, 0).is_err());
    }

    #[test]
    fn cubical_grid_counts() {
        let c = Complex::cubical_grid(1, 1).unwrap();
        assert_eq!((count_dim(&c, 0), count_dim(&c, 1), count_dim(&c, 2)), (1, 0, 0));
        let c = Complex::cubical_grid(1, 2).unwrap();
        assert_eq!((count_dim(&c, 0), count_dim(&c, 1), count_dim(&c, 2)), (2, 1, 0));
        let c = Complex::cubical_grid(2, 2).unwrap();
        assert_eq!((count_dim(&c, 0), count_dim(&c, 1), count_dim(&c, 2)), (4, 4, 1));
        check_integrity(&c);
    }

    #[test]
    fn cubical_grid_euler_characteristic_is_one() {
        for h in 1..=4 {
            for w in 1..=4 {
                let c = Complex::cubical_grid(h, w).unwrap();
                let euler = count_dim(&c, 0) as i64 - count_dim(&c, 1) as i64
                    + count_dim(&c, 2) as i64;
                assert_eq!(euler, 1, "grid {h}x{w}");
                check_integrity(&c);
            }
        }
    }

    #[test]
    fn cubical_grid_rejects_zero() {
        assert!(Complex::cubical_grid(0, 3).is_err());
        assert!(Complex::cubical_grid(3, 0).is_err());
    }

    #[test]
    fn validate_filtration_examples() {
        let c = Complex::full_simplex(2, 1).unwrap();
        let good = Filtration::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(validate_filtration(&c, &good).unwrap());
        let bad = Filtration::new(vec![0.0, 2.0, 1.0]).unwrap();
        assert!(!validate_filtration(&c, &bad).unwrap());
        let constant = Filtration::new(vec![0.5; 3]).unwrap();
        assert!(validate_filtration(&c, &constant).unwrap());
    }

    #[test]
    fn validate_filtration_length_mismatch_is_error() {
        let c = Complex::full_simplex(2, 1).unwrap();
        let short = Filtration::new(vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            validate_filtration(&c, &short),
            Err(ComplexError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn filtration_rejects_nan() {
        assert!(Filtration::new(vec![0.0, f64::NAN]).is_err());
        assert!(Filtration::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn from_cells_path_graph() {
        let cells = vec![
            Cell { id: 0, dim: 0, vertices: vec![0], boundary: vec![] },
            Cell { id: 1, dim: 0, vertices: vec![1], boundary: vec![] },
            Cell { id: 2, dim: 0, vertices: vec![2], boundary: vec![] },
            Cell { id: 3, dim: 1, vertices: vec![0, 1], boundary: vec![0, 1] },
            Cell { id: 4, dim: 1, vertices: vec![1, 2], boundary: vec![1, 2] },
        ];
        let c = Complex::from_cells(ComplexKind::Simplicial, cells).unwrap();
        assert_eq!(c.n_vertices(), 3);
        assert_eq!(c.max_dim(), 1);
    }

    #[test]
    fn from_cells_rejects_missing_face() {
        let cells = vec![
            Cell { id: 0, dim: 0, vertices: vec![0], boundary: vec![] },
            Cell { id: 1, dim: 1, vertices: vec![0, 1], boundary: vec![0, 9] },
        ];
        assert!(Complex::from_cells(ComplexKind::Simplicial, cells).is_err());
    }
}
