//! Diagram vectorizations: persistence landscapes and persistence images.

use crate::loss::LossError;
use crate::persistence::Diagram;

/// Landscape samples in k-major order: the block for k = 1 over the whole
/// grid, then k = 2, and so on. Each sample remembers the selected point and
/// the derivative of the active tent branch.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeVector {
    pub values: Vec<f64>,
    /// Per sample: (regular point index, d/d birth, d/d death), or None when
    /// the diagram has fewer than k points.
    pub grads: Vec<Option<(usize, f64, f64)>>,
}

/// Tent function of a point over the real line, with its derivatives.
fn tent(birth: f64, death: f64, t: f64) -> (f64, f64, f64) {
    let mid = (birth + death) / 2.0;
    if t >= birth && t <= mid {
        (t - birth, -1.0, 0.0)
    } else if t > mid && t <= death {
        (death - t, 0.0, 1.0)
    } else {
        (0.0, 0.0, 0.0)
    }
}

/// Landscape of the regular part in one homology dimension.
pub fn landscape(d: &Diagram, dim: usize, k_max: usize, grid: &[f64]) -> LandscapeVector {
    let points: Vec<(f64, f64)> = d
        .dim(dim)
        .regular
        .iter()
        .map(|p| (p.birth, p.death))
        .collect();
    landscape_points(&points, k_max, grid)
}

/// Landscape of an explicit point list. The k-th largest tent value is taken
/// per grid sample; ties select the smallest point index.
pub fn landscape_points(points: &[(f64, f64)], k_max: usize, grid: &[f64]) -> LandscapeVector {
    assert!(k_max >= 1, "need k_max >= 1");
    assert!(!grid.is_empty(), "need a non-empty grid");
    let mut values = Vec::with_capacity(k_max * grid.len());
    let mut grads = Vec::with_capacity(k_max * grid.len());
    for k in 1..=k_max {
        for &t in grid {
            if points.len() < k {
                values.push(0.0);
                grads.push(None);
                continue;
            }
            let mut evaluated: Vec<(f64, usize)> = points
                .iter()
                .enumerate()
                .map(|(i, &(b, d))| (tent(b, d, t).0, i))
                .collect();
            // descending by value, ascending by index on ties
            evaluated.sort_by(|x, y| {
                y.0.partial_cmp(&x.0)
                    .expect("finite tents")
                    .then(x.1.cmp(&y.1))
            });
            let (value, idx) = evaluated[k - 1];
            let (_, gb, gd) = tent(points[idx].0, points[idx].1, t);
            values.push(value);
            grads.push(Some((idx, gb, gd)));
        }
    }
    LandscapeVector { values, grads }
}

/// Weight applied to each diagram point in a persistence image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageWeight {
    One,
    Persistence,
}

/// Gaussian-smoothed diagram density sampled on a grid, with dense per-point
/// gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceImage {
    pub values: Vec<f64>,
    /// `grads[sample][point]` = (d/d birth, d/d death)
    pub grads: Vec<Vec<(f64, f64)>>,
}

/// Weighted Gaussian density of the regular part at each grid location.
pub fn persistence_image(
    d: &Diagram,
    dim: usize,
    grid: &[(f64, f64)],
    sigma: f64,
    weight: ImageWeight,
) -> Result<PersistenceImage, LossError> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(LossError::BadSigma(sigma));
    }
    let points: Vec<(f64, f64)> = d
        .dim(dim)
        .regular
        .iter()
        .map(|p| (p.birth, p.death))
        .collect();
    // canonical accumulation order, independent of point storage order
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].partial_cmp(&points[j]).expect("finite points"));

    let inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
    let inv_sigma2 = 1.0 / (sigma * sigma);
    let mut values = Vec::with_capacity(grid.len());
    let mut grads = Vec::with_capacity(grid.len());
    for &(qx, qy) in grid {
        let mut total = 0.0;
        let mut grad = vec![(0.0, 0.0); points.len()];
        for &i in &order {
            let (b, dth) = points[i];
            let sq = (qx - b) * (qx - b) + (qy - dth) * (qy - dth);
            let gauss = (-sq * inv_two_sigma2).exp();
            let (w, dw_db, dw_dd) = match weight {
                ImageWeight::One => (1.0, 0.0, 0.0),
                ImageWeight::Persistence => (dth - b, -1.0, 1.0),
            };
            total += w * gauss;
            grad[i] = (
                dw_db * gauss + w * gauss * (qx - b) * inv_sigma2,
                dw_dd * gauss + w * gauss * (qy - dth) * inv_sigma2,
            );
        }
        values.push(total);
        grads.push(grad);
    }
    Ok(PersistenceImage { values, grads })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::test_support::diagram_from_points;

    #[test]
    fn landscape_single_point_closed_form() {
        let d = diagram_from_points(0, &[(0.0, 2.0)]);
        let out = landscape(&d, 0, 1, &[1.0, 0.5, 2.5]);
        assert_eq!(out.values, vec![1.0, 0.5, 0.0]);
        // t = 1 sits at the peak, still on the rising branch
        assert_eq!(out.grads[0], Some((0, -1.0, 0.0)));
        assert_eq!(out.grads[2], Some((0, 0.0, 0.0)));
    }

    #[test]
    fn landscape_second_level_of_single_point_is_zero() {
        let d = diagram_from_points(0, &[(0.0, 2.0)]);
        let out = landscape(&d, 0, 2, &[1.0]);
        assert_eq!(out.values, vec![1.0, 0.0]);
        assert_eq!(out.grads[1], None);
    }

    #[test]
    fn landscape_tie_selects_smallest_index() {
        let d = diagram_from_points(0, &[(0.0, 2.0), (1.0, 3.0)]);
        let out = landscape(&d, 0, 2, &[1.5]);
        // both tents evaluate to 0.5 at t = 1.5
        assert_eq!(out.values, vec![0.5, 0.5]);
        // k = 1 takes point 0 on its falling branch, k = 2 point 1 rising
        assert_eq!(out.grads[0], Some((0, 0.0, 1.0)));
        assert_eq!(out.grads[1], Some((1, -1.0, 0.0)));
    }

    #[test]
    fn landscape_is_lipschitz_in_t_and_coordinates() {
        let base = vec![(0.1, 1.4), (0.6, 2.0), (0.9, 1.1)];
        let grid: Vec<f64> = (0..60).map(|i| i as f64 * 0.05).collect();
        let v0 = landscape_points(&base, 3, &grid).values;
        // in t
        for k in 0..3 {
            for w in v0[k * 60..(k + 1) * 60].windows(2) {
                assert!((w[1] - w[0]).abs() <= 0.05 + 1e-12);
            }
        }
        // in a coordinate
        let eps = 1e-3;
        let moved: Vec<(f64, f64)> = base
            .iter()
            .enumerate()
            .map(|(i, &(b, d))| if i == 1 { (b, d + eps) } else { (b, d) })
            .collect();
        let v1 = landscape_points(&moved, 3, &grid).values;
        for (a, b) in v0.iter().zip(&v1) {
            assert!((a - b).abs() <= eps + 1e-12);
        }
    }

    #[test]
    fn image_value_at_the_point_is_its_weight() {
        let d = diagram_from_points(0, &[(0.0, 2.0)]);
        let img = persistence_image(&d, 0, &[(0.0, 2.0)], 0.5, ImageWeight::One).unwrap();
        assert_eq!(img.values, vec![1.0]);
        let img = persistence_image(&d, 0, &[(0.0, 2.0)], 0.5, ImageWeight::Persistence).unwrap();
        assert_eq!(img.values, vec![2.0]);
    }

    #[test]
    fn image_of_empty_diagram_is_zero() {
        let d = diagram_from_points(0, &[]);
        let img = persistence_image(&d, 0, &[(0.0, 0.0), (1.0, 1.0)], 1.0, ImageWeight::One).unwrap();
        assert_eq!(img.values, vec![0.0, 0.0]);
    }

    #[test]
    fn image_is_additive_over_points() {
        let grid = vec![(0.3, 0.9), (1.5, 2.0)];
        let both = diagram_from_points(0, &[(0.0, 1.0), (1.0, 2.5)]);
        let first = diagram_from_points(0, &[(0.0, 1.0)]);
        let second = diagram_from_points(0, &[(1.0, 2.5)]);
        let all = persistence_image(&both, 0, &grid, 0.7, ImageWeight::Persistence).unwrap();
        let a = persistence_image(&first, 0, &grid, 0.7, ImageWeight::Persistence).unwrap();
        let b = persistence_image(&second, 0, &grid, 0.7, ImageWeight::Persistence).unwrap();
        for i in 0..grid.len() {
            assert_eq!(all.values[i], a.values[i] + b.values[i]);
        }
    }

    #[test]
    fn image_rejects_bad_sigma() {
        let d = diagram_from_points(0, &[(0.0, 1.0)]);
        assert!(persistence_image(&d, 0, &[(0.0, 0.0)], 0.0, ImageWeight::One).is_err());
        assert!(persistence_image(&d, 0, &[(0.0, 0.0)], -1.0, ImageWeight::One).is_err());
    }
}
