//! Functions of persistence and auxiliary penalties. Each loss returns its
//! value together with per-diagram-point gradients (and, for the penalties, a
//! dense gradient over their own parameters).
//!
//! Summations iterate terms in a canonical sorted order, so reordering the
//! points of a diagram changes neither the value bits nor the per-point
//! gradients.

mod matching;
mod penalty;
mod vectorize;

pub use matching::{
    bottleneck, bottleneck_with_metric, sliced_wasserstein, wasserstein, wasserstein_with_metric,
    GroundMetric, MatchSide, Matching,
};

/// Default direction count for the sliced distance.
pub const DEFAULT_SLICED_DIRECTIONS: usize = 50;
pub use penalty::{penalty_binary_image, penalty_mse, penalty_square, penalty_tv, AxisBox};
pub use vectorize::{landscape, landscape_points, persistence_image, ImageWeight, LandscapeVector, PersistenceImage};

use serde_json::{json, Value};
use thiserror::Error;

use crate::grad::DiagramGrad;
use crate::persistence::{Diagram, DiagramDim};

#[derive(Debug, Error)]
pub enum LossError {
    #[error("Wasserstein order must be 1 or 2, got {0}")]
    UnsupportedOrder(u32),
    #[error("sigma must be positive, got {0}")]
    BadSigma(f64),
    #[error("box bounds are malformed")]
    BadBox,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("need at least two distinct labels")]
    NeedTwoLabels,
    #[error("{got} labels for {expected} diagrams")]
    LabelCountMismatch { expected: usize, got: usize },
}

/// A loss value together with its gradients: one pair per regular diagram
/// point, one birth derivative per essential point, and an optional dense
/// gradient for non-diagram parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub grad: DiagramGrad,
    pub aux: Option<Vec<f64>>,
}

impl LossValue {
    pub fn aux_only(value: f64, aux: Vec<f64>) -> Self {
        LossValue {
            value,
            grad: DiagramGrad::empty(),
            aux: Some(aux),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "value": self.value,
            "grad_regular": self.grad.regular,
            "grad_essential": self.grad.essential,
            "grad_aux": self.aux,
        })
    }
}

/// Sum with ascending-sorted accumulation: the result depends only on the
/// multiset of terms, not their order.
pub(crate) fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| a.partial_cmp(b).expect("finite loss terms"));
    terms.iter().sum()
}

/// Where a filtered off-diagonal point came from in its diagram part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PointRef {
    Regular(usize),
    Essential(usize),
}

/// The strictly off-diagonal points of one diagram part. With a cap, the
/// essential births are included as regular points dying at the cap.
pub(crate) fn off_diagonal_points(
    part: &DiagramDim,
    essential_cap: Option<f64>,
) -> Vec<(f64, f64, PointRef)> {
    let mut pts: Vec<(f64, f64, PointRef)> = part
        .regular
        .iter()
        .enumerate()
        .filter(|(_, p)| p.death > p.birth)
        .map(|(i, p)| (p.birth, p.death, PointRef::Regular(i)))
        .collect();
    if let Some(cap) = essential_cap {
        pts.extend(
            part.essential
                .iter()
                .enumerate()
                .filter(|(_, p)| cap > p.birth)
                .map(|(i, p)| (p.birth, cap, PointRef::Essential(i))),
        );
    }
    pts
}

/// Sum of death - birth over the regular points of the selected dimensions.
/// Every point contributes gradient (-1, +1); essential points are ignored.
pub fn total_persistence(d: &Diagram, dims: &[usize]) -> LossValue {
    let mut grad = d.zero_grad();
    let mut terms = Vec::new();
    let mut seen = Vec::new();
    for &k in dims {
        if seen.contains(&k) || k >= d.n_dims() {
            continue;
        }
        seen.push(k);
        for (i, p) in d.dim(k).regular.iter().enumerate() {
            terms.push(p.death - p.birth);
            grad.regular[k][i] = (-1.0, 1.0);
        }
    }
    LossValue {
        value: sorted_sum(terms),
        grad,
        aux: None,
    }
}

/// Negated squared distance-to-diagonal summed over the dimension-1 regular
/// part: rewards persistent loops.
pub fn hole_penalty(d: &Diagram) -> LossValue {
    let mut grad = d.zero_grad();
    let mut terms = Vec::new();
    if d.n_dims() > 1 {
        for (i, p) in d.dim(1).regular.iter().enumerate() {
            let half_gap = (p.death - p.birth) / 2.0;
            terms.push(-half_gap * half_gap);
            grad.regular[1][i] = (half_gap, -half_gap);
        }
    }
    LossValue {
        value: sorted_sum(terms),
        grad,
        aux: None,
    }
}

/// The label-contrast criterion over a batch of diagrams: for each label, the
/// ratio of the within-class sliced Wasserstein sum to the sum over all pairs
/// whose first member carries that label (ordered pairs, i != j). Classes
/// whose denominator vanishes are skipped and reported.
pub struct ContrastLoss {
    pub value: f64,
    pub grads: Vec<DiagramGrad>,
    pub skipped_labels: Vec<usize>,
}

pub fn label_contrast_loss(
    diagrams: &[Diagram],
    labels: &[usize],
    dim: usize,
    n_dirs: usize,
    essential_cap: Option<f64>,
) -> Result<ContrastLoss, LossError> {
    let n = diagrams.len();
    if labels.len() != n {
        return Err(LossError::LabelCountMismatch {
            expected: n,
            got: labels.len(),
        });
    }
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(LossError::NeedTwoLabels);
    }

    let points: Vec<Vec<(f64, f64, PointRef)>> = diagrams
        .iter()
        .map(|d| off_diagonal_points(d.dim(dim), essential_cap))
        .collect();

    // One sliced Wasserstein evaluation per unordered pair.
    struct PairTerm {
        i: usize,
        j: usize,
        value: f64,
        grad_i: Vec<(f64, f64)>,
        grad_j: Vec<(f64, f64)>,
    }
    let mut pair_terms: Vec<PairTerm> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let plain_i: Vec<(f64, f64)> = points[i].iter().map(|p| (p.0, p.1)).collect();
            let plain_j: Vec<(f64, f64)> = points[j].iter().map(|p| (p.0, p.1)).collect();
            let (value, grad_i, grad_j) =
                matching::sliced_wasserstein_points(&plain_i, &plain_j, n_dirs);
            pair_terms.push(PairTerm {
                i,
                j,
                value,
                grad_i,
                grad_j,
            });
        }
    }

    let mut value_terms = Vec::new();
    let mut skipped = Vec::new();
    // dL / d sw(i, j) accumulated across class ratios
    let mut pair_coeff = vec![0.0; pair_terms.len()];
    for &label in &distinct {
        let mut numerator = Vec::new();
        let mut denominator = Vec::new();
        for term in &pair_terms {
            let li = labels[term.i] == label;
            let lj = labels[term.j] == label;
            if li && lj {
                // both orderings count in both sums
                numerator.push(2.0 * term.value);
                denominator.push(2.0 * term.value);
            } else if li || lj {
                denominator.push(term.value);
            }
        }
        let num = sorted_sum(numerator);
        let den = sorted_sum(denominator);
        if den == 0.0 {
            skipped.push(label);
            continue;
        }
        value_terms.push(num / den);
        // quotient rule: d(num/den)/d sw = (mult_num * den - num * mult_den) / den^2
        for (idx, term) in pair_terms.iter().enumerate() {
            let li = labels[term.i] == label;
            let lj = labels[term.j] == label;
            let (mult_num, mult_den) = if li && lj {
                (2.0, 2.0)
            } else if li || lj {
                (0.0, 1.0)
            } else {
                continue;
            };
            pair_coeff[idx] += (mult_num * den - num * mult_den) / (den * den);
        }
    }

    let mut grads: Vec<DiagramGrad> = diagrams.iter().map(|d| d.zero_grad()).collect();
    for (term, &coeff) in pair_terms.iter().zip(&pair_coeff) {
        if coeff == 0.0 {
            continue;
        }
        scatter_point_grads(&mut grads[term.i], dim, &points[term.i], &term.grad_i, coeff);
        scatter_point_grads(&mut grads[term.j], dim, &points[term.j], &term.grad_j, coeff);
    }

    Ok(ContrastLoss {
        value: sorted_sum(value_terms),
        grads,
        skipped_labels: skipped,
    })
}

/// Route gradients of a filtered point list back onto the diagram part they
/// were drawn from. Death derivatives of capped essential points are dropped:
/// the cap is a constant.
pub(crate) fn scatter_point_grads(
    grad: &mut DiagramGrad,
    dim: usize,
    points: &[(f64, f64, PointRef)],
    point_grads: &[(f64, f64)],
    scale: f64,
) {
    for ((_, _, r), &(gb, gd)) in points.iter().zip(point_grads) {
        match *r {
            PointRef::Regular(i) => {
                grad.regular[dim][i].0 += scale * gb;
                grad.regular[dim][i].1 += scale * gd;
            }
            PointRef::Essential(i) => {
                grad.essential[dim][i] += scale * gb;
            }
        }
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use crate::persistence::{Diagram, DiagramDim, RegularPoint};

    /// A one-dimension diagram from raw points, for loss unit tests. Cell ids
    /// are synthetic.
    pub fn diagram_from_points(dim: usize, points: &[(f64, f64)]) -> Diagram {
        let mut dims = vec![DiagramDim::default(); dim + 1];
        dims[dim].regular = points
            .iter()
            .enumerate()
            .map(|(i, &(birth, death))| RegularPoint {
                birth,
                death,
                birth_cell: 2 * i,
                death_cell: 2 * i + 1,
            })
            .collect();
        Diagram::from_parts(dims)
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::diagram_from_points;
    use super::*;

    #[test]
    fn total_persistence_examples() {
        let d = diagram_from_points(0, &[(0.0, 1.0), (2.0, 5.0)]);
        let loss = total_persistence(&d, &[0]);
        assert_eq!(loss.value, 4.0);
        assert_eq!(loss.grad.regular[0], vec![(-1.0, 1.0), (-1.0, 1.0)]);

        let empty = diagram_from_points(0, &[]);
        assert_eq!(total_persistence(&empty, &[0]).value, 0.0);

        let diagonal = diagram_from_points(0, &[(0.3, 0.3), (0.7, 0.7)]);
        assert_eq!(total_persistence(&diagonal, &[0]).value, 0.0);
    }

    #[test]
    fn total_persistence_ignores_duplicate_and_out_of_range_dims() {
        let d = diagram_from_points(0, &[(0.0, 1.0)]);
        assert_eq!(total_persistence(&d, &[0, 0, 5]).value, 1.0);
    }

    #[test]
    fn hole_penalty_examples() {
        let empty = diagram_from_points(1, &[]);
        assert_eq!(hole_penalty(&empty).value, 0.0);

        let one = diagram_from_points(1, &[(0.0, 2.0)]);
        let loss = hole_penalty(&one);
        assert_eq!(loss.value, -1.0);
        assert_eq!(loss.grad.regular[1][0], (1.0, -1.0));

        let two = diagram_from_points(1, &[(0.0, 2.0), (1.0, 2.0)]);
        assert_eq!(hole_penalty(&two).value, -1.25);
    }

    #[test]
    fn contrast_loss_skips_degenerate_classes() {
        let d = diagram_from_points(0, &[(0.0, 1.0)]);
        let batch = vec![d.clone(), d.clone(), d.clone(), d];
        let labels = vec![0, 0, 1, 1];
        let out = label_contrast_loss(&batch, &labels, 0, 8, None).unwrap();
        // all diagrams identical: every distance is zero, both classes skip
        assert_eq!(out.value, 0.0);
        assert_eq!(out.skipped_labels, vec![0, 1]);
    }

    #[test]
    fn contrast_loss_zero_when_classes_are_tight() {
        let a = diagram_from_points(0, &[(0.0, 1.0)]);
        let b = diagram_from_points(0, &[(0.0, 4.0)]);
        let batch = vec![a.clone(), a, b.clone(), b];
        let labels = vec![0, 0, 1, 1];
        let out = label_contrast_loss(&batch, &labels, 0, 8, None).unwrap();
        // within-class distances vanish, across-class distances do not
        assert_eq!(out.value, 0.0);
        assert!(out.skipped_labels.is_empty());
    }

    #[test]
    fn contrast_loss_matches_direct_evaluation() {
        use crate::loss::matching::sliced_wasserstein_points;
        let batch = vec![
            diagram_from_points(0, &[(0.0, 1.0), (0.5, 2.0)]),
            diagram_from_points(0, &[(0.0, 1.5)]),
            diagram_from_points(0, &[(1.0, 3.0), (0.2, 0.9)]),
            diagram_from_points(0, &[(0.4, 2.2)]),
        ];
        let labels = vec![0, 1, 0, 1];
        let n_dirs = 10;
        let out = label_contrast_loss(&batch, &labels, 0, n_dirs, None).unwrap();

        let pts: Vec<Vec<(f64, f64)>> = batch
            .iter()
            .map(|d| d.dim(0).regular.iter().map(|p| (p.birth, p.death)).collect())
            .collect();
        let sw = |i: usize, j: usize| sliced_wasserstein_points(&pts[i], &pts[j], n_dirs).0;
        let mut expect = 0.0;
        for &label in &[0usize, 1] {
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    if i == j || labels[i] != label {
                        continue;
                    }
                    let v = sw(i, j);
                    den += v;
                    if labels[j] == label {
                        num += v;
                    }
                }
            }
            expect += num / den;
        }
        assert!((out.value - expect).abs() < 1e-12, "{} vs {expect}", out.value);
    }

    #[test]
    fn contrast_loss_needs_two_labels() {
        let d = diagram_from_points(0, &[(0.0, 1.0)]);
        let batch = vec![d.clone(), d];
        assert!(matches!(
            label_contrast_loss(&batch, &[3, 3], 0, 4, None),
            Err(LossError::NeedTwoLabels)
        ));
    }

    #[test]
    fn loss_json_has_all_fields() {
        let d = diagram_from_points(0, &[(0.0, 1.0)]);
        let v = total_persistence(&d, &[0]).to_json();
        assert_eq!(v["value"], 1.0);
        assert!(v["grad_regular"].is_array());
        assert!(v["grad_aux"].is_null());
    }
}
