//! Non-topological penalty terms used alongside the diagram losses.

use crate::filtration::PointCloud;
use crate::loss::{LossError, LossValue};
use crate::matrix::DenseMatrix;

/// An axis-aligned box, the feasible region of the containment penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, LossError> {
        if lo.is_empty()
            || lo.len() != hi.len()
            || lo.iter().zip(&hi).any(|(l, h)| !l.is_finite() || !h.is_finite() || l > h)
        {
            return Err(LossError::BadBox);
        }
        Ok(AxisBox { lo, hi })
    }

    /// The unit box [0, 1]^d.
    pub fn unit(d: usize) -> Self {
        AxisBox {
            lo: vec![0.0; d],
            hi: vec![1.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// Sum of Euclidean distances from each point to the box. Outside points get
/// the unit outward normal as gradient; inside points contribute nothing.
pub fn penalty_square(x: &PointCloud, bounds: &AxisBox) -> LossValue {
    assert_eq!(bounds.dim(), x.dim(), "box dimension must match the cloud");
    let d = x.dim();
    let mut value = 0.0;
    let mut grad = vec![0.0; x.n_params()];
    for i in 0..x.n_points() {
        let p = x.point(i);
        let mut delta = vec![0.0; d];
        for c in 0..d {
            if p[c] < bounds.lo[c] {
                delta[c] = p[c] - bounds.lo[c];
            } else if p[c] > bounds.hi[c] {
                delta[c] = p[c] - bounds.hi[c];
            }
        }
        let dist = delta.iter().map(|v| v * v).sum::<f64>().sqrt();
        if dist > 0.0 {
            value += dist;
            for c in 0..d {
                grad[i * d + c] = delta[c] / dist;
            }
        }
    }
    LossValue::aux_only(value, grad)
}

/// Per-pixel distance to the nearest of {0, 1}. The subgradient follows the
/// active branch; the tie at 0.5 resolves to the |p| branch.
pub fn penalty_binary_image(pixels: &[f64]) -> LossValue {
    let mut value = 0.0;
    let mut grad = vec![0.0; pixels.len()];
    for (i, &p) in pixels.iter().enumerate() {
        let to_zero = p.abs();
        let to_one = (1.0 - p).abs();
        if to_zero <= to_one {
            value += to_zero;
            grad[i] = if p > 0.0 {
                1.0
            } else if p < 0.0 {
                -1.0
            } else {
                0.0
            };
        } else {
            value += to_one;
            grad[i] = if p < 1.0 {
                -1.0
            } else if p > 1.0 {
                1.0
            } else {
                0.0
            };
        }
    }
    LossValue::aux_only(value, grad)
}

/// Total variation of a signal: the sum of absolute successive differences.
pub fn penalty_tv(beta: &[f64]) -> LossValue {
    assert!(beta.len() >= 2, "total variation needs at least two entries");
    let mut value = 0.0;
    let mut grad = vec![0.0; beta.len()];
    for i in 0..beta.len() - 1 {
        let diff = beta[i + 1] - beta[i];
        value += diff.abs();
        let s = if diff > 0.0 {
            1.0
        } else if diff < 0.0 {
            -1.0
        } else {
            0.0
        };
        grad[i + 1] += s;
        grad[i] -= s;
    }
    LossValue::aux_only(value, grad)
}

/// Squared residual sum |X beta - y|^2 with gradient 2 X^T (X beta - y).
pub fn penalty_mse(x: &DenseMatrix, y: &[f64], beta: &[f64]) -> Result<LossValue, LossError> {
    if y.len() != x.rows() || beta.len() != x.cols() {
        return Err(LossError::ShapeMismatch(format!(
            "X is {}x{}, y has {}, beta has {}",
            x.rows(),
            x.cols(),
            y.len(),
            beta.len()
        )));
    }
    let mut residual = x.matvec(beta);
    for (r, yi) in residual.iter_mut().zip(y) {
        *r -= yi;
    }
    let value = residual.iter().map(|r| r * r).sum();
    let mut grad = x.transpose_matvec(&residual);
    for g in &mut grad {
        *g *= 2.0;
    }
    Ok(LossValue::aux_only(value, grad))
}
