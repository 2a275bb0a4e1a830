//! Persistence pairs by boundary-matrix reduction over the two-element field,
//! diagram assembly per homology dimension, and the pull-back that routes
//! diagram-coordinate gradients to filtration parameters.
//!
//! Every diagram coordinate is one of the input filtration values, reached
//! through a cell id. That index routing is what makes the whole pipeline
//! differentiable: losses produce per-point gradients, and
//! [`pull_back_gradient`] forwards them through the recorded cells into the
//! tape of whichever filtration family produced the values.

use serde_json::{json, Value};
use thiserror::Error;

use crate::complex::{validate_filtration, Complex, Filtration};
use crate::grad::{DiagramGrad, GradTape};

#[derive(Debug, Error)]
pub enum PersistenceError {
    #[error("filtration is not monotone under the face relation")]
    NotMonotone,
    #[error("filtration/complex mismatch: {0}")]
    Mismatch(#[from] crate::complex::ComplexError),
    #[error("gradient shape does not match the diagram ({0})")]
    GradShape(String),
}

/// Total order on cells: ascending by (value, dimension, cell id). The order
/// is a function of the preorder induced by the values, so equal-value
/// configurations always reduce identically.
#[derive(Debug, Clone)]
pub struct TotalOrder {
    /// position -> cell id
    perm: Vec<usize>,
    /// cell id -> position
    rank: Vec<usize>,
}

impl TotalOrder {
    pub fn cell_at(&self, position: usize) -> usize {
        self.perm[position]
    }

    pub fn position_of(&self, cell: usize) -> usize {
        self.rank[cell]
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }
}

pub fn total_order(c: &Complex, f: &Filtration) -> Result<TotalOrder, PersistenceError> {
    if !validate_filtration(c, f)? {
        return Err(PersistenceError::NotMonotone);
    }
    let mut perm: Vec<usize> = (0..c.len()).collect();
    perm.sort_by(|&a, &b| {
        let ka = (f.value(a), c.cell(a).dim, a);
        let kb = (f.value(b), c.cell(b).dim, b);
        ka.partial_cmp(&kb).expect("finite filtration values")
    });
    let mut rank = vec![0; c.len()];
    for (pos, &cell) in perm.iter().enumerate() {
        rank[cell] = pos;
    }
    Ok(TotalOrder { perm, rank })
}

/// Persistence pairs per homology dimension, as cell ids, plus the unpaired
/// creators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSet {
    /// `pairs[k]` lists (creator cell, destroyer cell) for homology dimension k.
    pub pairs: Vec<Vec<(usize, usize)>>,
    /// `essential[k]` lists unpaired creator cells of dimension k.
    pub essential: Vec<Vec<usize>>,
}

impl PairSet {
    pub fn n_pairs(&self) -> usize {
        self.pairs.iter().map(|p| p.len()).sum()
    }

    pub fn n_essential(&self) -> usize {
        self.essential.iter().map(|e| e.len()).sum()
    }
}

/// Column reduction in filtration order, processing dimensions from the top
/// down and clearing the columns of already-paired creators.
pub fn compute_pairs(c: &Complex, ord: &TotalOrder) -> PairSet {
    let n = c.len();
    let max_dim = c.max_dim();
    let mut columns: Vec<Option<Vec<usize>>> = vec![None; n];
    let mut low_inv: Vec<Option<usize>> = vec![None; n];
    let mut paired_creator = vec![false; n];
    let mut destroyer = vec![false; n];
    let mut pairs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); max_dim + 1];

    for dim in (1..=max_dim).rev() {
        for pos in 0..n {
            let cell = c.cell(ord.cell_at(pos));
            if cell.dim != dim || paired_creator[pos] {
                continue;
            }
            let mut col: Vec<usize> = cell.boundary.iter().map(|&b| ord.position_of(b)).collect();
            col.sort_unstable();
            // the column is a creator when it reduces to zero
            while let Some(&low) = col.last() {
                match low_inv[low] {
                    Some(other) => {
                        let other_col = columns[other].as_ref().expect("reduced column stored");
                        col = symmetric_difference(&col, other_col);
                    }
                    None => {
                        low_inv[low] = Some(pos);
                        destroyer[pos] = true;
                        paired_creator[low] = true;
                        pairs[dim - 1].push((ord.cell_at(low), ord.cell_at(pos)));
                        break;
                    }
                }
            }
            columns[pos] = Some(col);
        }
    }

    let mut essential: Vec<Vec<usize>> = vec![Vec::new(); max_dim + 1];
    for pos in 0..n {
        if !destroyer[pos] && !paired_creator[pos] {
            let cell = c.cell(ord.cell_at(pos));
            essential[cell.dim].push(cell.id);
        }
    }
    PairSet { pairs, essential }
}

/// A finite diagram point, remembering the cells its coordinates came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularPoint {
    pub birth: f64,
    pub death: f64,
    pub birth_cell: usize,
    pub death_cell: usize,
}

impl RegularPoint {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// A birth with no finite death.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssentialPoint {
    pub birth: f64,
    pub birth_cell: usize,
}

/// The diagram of one homology dimension.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagramDim {
    pub regular: Vec<RegularPoint>,
    pub essential: Vec<EssentialPoint>,
}

/// Persistence diagram, one part per homology dimension. Zero-persistence
/// points are retained so the coordinate count always matches the complex;
/// losses filter them as needed.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagram {
    dims: Vec<DiagramDim>,
}

impl Diagram {
    /// Assemble a diagram from explicit per-dimension parts. Losses only read
    /// coordinates and routing ids, so hand-built diagrams (targets, tests)
    /// are first-class citizens.
    pub fn from_parts(dims: Vec<DiagramDim>) -> Self {
        Diagram { dims }
    }

    pub fn n_dims(&self) -> usize {
        self.dims.len()
    }

    /// The part in homology dimension `k`; empty for dimensions beyond the
    /// complex.
    pub fn dim(&self, k: usize) -> &DiagramDim {
        static EMPTY: DiagramDim = DiagramDim {
            regular: Vec::new(),
            essential: Vec::new(),
        };
        self.dims.get(k).unwrap_or(&EMPTY)
    }

    pub fn dims(&self) -> &[DiagramDim] {
        &self.dims
    }

    pub fn regular_counts(&self) -> Vec<usize> {
        self.dims.iter().map(|d| d.regular.len()).collect()
    }

    pub fn essential_counts(&self) -> Vec<usize> {
        self.dims.iter().map(|d| d.essential.len()).collect()
    }

    /// Gradient container with one zero slot per point.
    pub fn zero_grad(&self) -> DiagramGrad {
        DiagramGrad::zeros(&self.regular_counts(), &self.essential_counts())
    }

    /// JSON form: one object per dimension with `regular` as [birth, death]
    /// pairs and `essential` as births. With `include_cells`, each dimension
    /// also carries the routing cell ids.
    pub fn to_json(&self, include_cells: bool) -> Value {
        let parts: Vec<Value> = self
            .dims
            .iter()
            .enumerate()
            .map(|(k, part)| {
                let mut obj = json!({
                    "dim": k,
                    "regular": part.regular.iter().map(|p| vec![p.birth, p.death]).collect::<Vec<_>>(),
                    "essential": part.essential.iter().map(|p| p.birth).collect::<Vec<_>>(),
                });
                if include_cells {
                    obj["cells"] = json!({
                        "regular": part
                            .regular
                            .iter()
                            .map(|p| vec![p.birth_cell, p.death_cell])
                            .collect::<Vec<_>>(),
                        "essential": part.essential.iter().map(|p| p.birth_cell).collect::<Vec<_>>(),
                    });
                }
                obj
            })
            .collect();
        Value::Array(parts)
    }
}

/// Attach filtration values to the pairs. Points are sorted by (birth, death)
/// with cell ids as the final tie-break, so equal geometry always serializes
/// identically.
pub fn assemble_diagram(c: &Complex, f: &Filtration, p: &PairSet) -> Diagram {
    let n_dims = p.pairs.len().max(p.essential.len());
    let mut dims = Vec::with_capacity(n_dims);
    for k in 0..n_dims {
        let mut regular: Vec<RegularPoint> = p
            .pairs
            .get(k)
            .map(|pairs| {
                pairs
                    .iter()
                    .map(|&(creator, destroyer)| RegularPoint {
                        birth: f.value(creator),
                        death: f.value(destroyer),
                        birth_cell: creator,
                        death_cell: destroyer,
                    })
                    .collect()
            })
            .unwrap_or_default();
        regular.sort_by(|a, b| {
            (a.birth, a.death, a.birth_cell, a.death_cell)
                .partial_cmp(&(b.birth, b.death, b.birth_cell, b.death_cell))
                .expect("finite coordinates")
        });
        let mut essential: Vec<EssentialPoint> = p
            .essential
            .get(k)
            .map(|cells| {
                cells
                    .iter()
                    .map(|&cell| EssentialPoint {
                        birth: f.value(cell),
                        birth_cell: cell,
                    })
                    .collect()
            })
            .unwrap_or_default();
        essential.sort_by(|a, b| {
            (a.birth, a.birth_cell)
                .partial_cmp(&(b.birth, b.birth_cell))
                .expect("finite coordinates")
        });
        dims.push(DiagramDim { regular, essential });
        let _ = c;
    }
    Diagram { dims }
}

/// Full pipeline: order, reduce, assemble.
pub fn diagram(c: &Complex, f: &Filtration) -> Result<Diagram, PersistenceError> {
    let ord = total_order(c, f)?;
    let pairs = compute_pairs(c, &ord);
    Ok(assemble_diagram(c, f, &pairs))
}

/// Route per-point diagram gradients through the recorded cells into the
/// filtration tape, accumulating a dense parameter gradient. Linear in the
/// incoming gradients and independent of accumulation order.
pub fn pull_back_gradient(
    d: &Diagram,
    grad: &DiagramGrad,
    tape: &GradTape,
) -> Result<Vec<f64>, PersistenceError> {
    if grad.regular.len() != d.n_dims() || grad.essential.len() != d.n_dims() {
        return Err(PersistenceError::GradShape(format!(
            "got {} regular / {} essential dimensions, diagram has {}",
            grad.regular.len(),
            grad.essential.len(),
            d.n_dims()
        )));
    }
    let mut out = vec![0.0; tape.n_params()];
    for (k, part) in d.dims().iter().enumerate() {
        if grad.regular[k].len() != part.regular.len() {
            return Err(PersistenceError::GradShape(format!(
                "dimension {k}: {} regular gradients for {} points",
                grad.regular[k].len(),
                part.regular.len()
            )));
        }
        if grad.essential[k].len() != part.essential.len() {
            return Err(PersistenceError::GradShape(format!(
                "dimension {k}: {} essential gradients for {} points",
                grad.essential[k].len(),
                part.essential.len()
            )));
        }
        for (point, &(g_birth, g_death)) in part.regular.iter().zip(&grad.regular[k]) {
            if g_birth != 0.0 {
                tape.accumulate(point.birth_cell, g_birth, &mut out);
            }
            if g_death != 0.0 {
                tape.accumulate(point.death_cell, g_death, &mut out);
            }
        }
        for (point, &g_birth) in part.essential.iter().zip(&grad.essential[k]) {
            if g_birth != 0.0 {
                tape.accumulate(point.birth_cell, g_birth, &mut out);
            }
        }
    }
    Ok(out)
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}
