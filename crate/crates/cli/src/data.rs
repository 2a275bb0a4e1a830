//! Seeded synthetic data: the experiment inputs are generated, not shipped.

use persopt_core::sample::{std_normal, uniform01, uniform_range};
use persopt_core::{DenseMatrix, PointCloud};
use rand_core::Rng;

/// Uniform cloud in the unit square.
pub fn uniform_square_cloud(rng: &mut impl Rng, n: usize) -> PointCloud {
    let data: Vec<f64> = (0..2 * n).map(|_| uniform01(rng)).collect();
    PointCloud::from_flat(data, 2).expect("finite draws")
}

/// Evenly spaced points on a circle of radius `radius` centered in the unit
/// square.
pub fn clean_circle(n: usize, radius: f64) -> PointCloud {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / n as f64;
            vec![0.5 + radius * angle.cos(), 0.5 + radius * angle.sin()]
        })
        .collect();
    PointCloud::from_rows(&rows).expect("finite circle")
}

/// The clean circle jittered by Gaussian noise, plus stray points well off
/// the circle band.
pub fn noisy_circle_with_outliers(
    rng: &mut impl Rng,
    n: usize,
    radius: f64,
    noise: f64,
    outliers: usize,
) -> PointCloud {
    let clean = clean_circle(n, radius);
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let p = clean.point(i);
            vec![p[0] + noise * std_normal(rng), p[1] + noise * std_normal(rng)]
        })
        .collect();
    let mut placed = 0;
    while placed < outliers {
        let x = uniform01(rng);
        let y = uniform01(rng);
        let r = ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt();
        if r < radius - 0.15 || r > radius + 0.15 {
            rows.push(vec![x, y]);
            placed += 1;
        }
    }
    PointCloud::from_rows(&rows).expect("finite cloud")
}

/// A blocky digit on a light background: strokes at 0, background at 1, plus
/// `noise_pixels` isolated gray specks. Anything darker than the background
/// is an early sublevel component, so each speck is its own short-lived
/// class. Speck value 0.7 keeps the binary penalty pushing the same way as
/// the persistence penalty.
pub fn noisy_digit(rng: &mut impl Rng, size: usize, noise_pixels: usize) -> DenseMatrix {
    assert!(size >= 12, "digit needs at least a 12x12 canvas");
    let mut img = DenseMatrix::new(size, size, vec![1.0; size * size]).unwrap();
    let mut digit = vec![false; size * size];
    let mut stroke = |r: usize, c: usize| {
        digit[r * size + c] = true;
    };
    // a "7": top bar and a stem
    for c in 3..size - 3 {
        stroke(3, c);
        stroke(4, c);
    }
    let stem = size / 2;
    for r in 5..size - 3 {
        stroke(r, stem);
        stroke(r, stem + 1);
    }
    for (i, &d) in digit.iter().enumerate() {
        if d {
            img.set(i / size, i % size, 0.0);
        }
    }
    // pepper noise, kept clear of the digit and of each other
    let mut noise: Vec<(usize, usize)> = Vec::new();
    let mut guard = 0;
    while noise.len() < noise_pixels {
        guard += 1;
        assert!(guard < 100_000, "could not place noise pixels");
        let r = (uniform01(rng) * size as f64) as usize % size;
        let c = (uniform01(rng) * size as f64) as usize % size;
        let clear_of_digit = (0..size).all(|rr| {
            (0..size).all(|cc| {
                !digit[rr * size + cc]
                    || rr.abs_diff(r).max(cc.abs_diff(c)) >= 2
            })
        });
        let clear_of_noise = noise
            .iter()
            .all(|&(nr, nc)| nr.abs_diff(r).max(nc.abs_diff(c)) >= 2);
        if clear_of_digit && clear_of_noise && r > 0 && c > 0 && r < size - 1 && c < size - 1 {
            noise.push((r, c));
            img.set(r, c, 0.7);
        }
    }
    img
}

/// Two classes of binary images telling left-open from right-open brackets.
/// Swept along the column axis, the open class splits into two components
/// that merge late; swept along the row axis both classes are a single
/// component, so the optimal filter directions are 0 and pi.
pub fn bracket_classes(
    rng: &mut impl Rng,
    n_per_class: usize,
    size: usize,
) -> (Vec<DenseMatrix>, Vec<usize>) {
    assert!(size >= 14, "brackets need at least a 14x14 canvas");
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for class in 0..2usize {
        for _ in 0..n_per_class {
            let dr = (uniform01(rng) * 3.0) as usize; // 0..=2
            let dc = (uniform01(rng) * 3.0) as usize;
            let reach = (uniform01(rng) * 2.0) as usize; // prong length jitter
            let mut img = DenseMatrix::zeros(size, size);
            let top = 2 + dr;
            let bottom = size - 5 + dr.min(1);
            let near = 2 + dc; // open end
            let far = size - 6 + dc.min(1); // spine side
            let mut fill = |r0: usize, r1: usize, c0: usize, c1: usize| {
                for r in r0..=r1 {
                    for c in c0..=c1 {
                        let (rr, cc) = (r.min(size - 1), c.min(size - 1));
                        // class 1 is the horizontal mirror of class 0
                        let col = if class == 0 { cc } else { size - 1 - cc };
                        img.set(rr, col, 1.0);
                    }
                }
            };
            // spine on the far side, prongs reaching toward the open side
            fill(top, bottom, far, far + 2);
            fill(top, top + 2, near + reach, far);
            fill(bottom - 2, bottom, near + reach, far);
            images.push(img);
            labels.push(class);
        }
    }
    (images, labels)
}

/// Triangular bump of the given half-width centered at `center`.
fn bump(i: usize, center: usize, half_width: usize, height: f64) -> f64 {
    let dist = i.abs_diff(center);
    if dist >= half_width {
        0.0
    } else {
        height * (1.0 - dist as f64 / half_width as f64)
    }
}

/// Ground-truth coefficients with three peaks, a design matrix of standard
/// normals, and noisy responses.
pub struct RegressionInstance {
    pub design: DenseMatrix,
    pub response: Vec<f64>,
    pub beta_star: Vec<f64>,
}

pub fn regression_instance(
    rng: &mut impl Rng,
    n: usize,
    p: usize,
    noise: f64,
) -> RegressionInstance {
    let half_width = (p / 12).max(2);
    let beta_star: Vec<f64> = (0..p)
        .map(|i| {
            bump(i, p / 6, half_width, 1.0)
                + bump(i, p / 2, half_width, 1.5)
                + bump(i, 5 * p / 6, half_width, 0.8)
        })
        .collect();
    let design = DenseMatrix::new(n, p, (0..n * p).map(|_| std_normal(rng)).collect()).unwrap();
    let mut response = design.matvec(&beta_star);
    for y in &mut response {
        *y += noise * std_normal(rng);
    }
    RegressionInstance {
        design,
        response,
        beta_star,
    }
}

/// Small random rotation-free jitter used by tests.
pub fn jitter_cloud(rng: &mut impl Rng, cloud: &PointCloud, scale: f64) -> PointCloud {
    let data: Vec<f64> = cloud
        .coords()
        .iter()
        .map(|v| v + uniform_range(rng, -scale, scale))
        .collect();
    PointCloud::from_flat(data, cloud.dim()).expect("finite jitter")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    #[test]
    fn digit_has_requested_specks() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let img = noisy_digit(&mut rng, 20, 10);
        let strokes = img.data().iter().filter(|&&v| v == 0.0).count();
        let specks = img.data().iter().filter(|&&v| v == 0.7).count();
        let background = img.data().iter().filter(|&&v| v == 1.0).count();
        assert_eq!(strokes + specks + background, 400);
        assert_eq!(specks, 10);
        assert!(strokes > 20);
    }

    #[test]
    fn brackets_are_binary_and_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (images, labels) = bracket_classes(&mut rng, 4, 20);
        assert_eq!(images.len(), 8);
        assert_eq!(labels.iter().filter(|&&l| l == 0).count(), 4);
        for img in &images {
            assert!(img.data().iter().all(|&v| v == 0.0 || v == 1.0));
            assert!(img.data().contains(&1.0));
        }
    }

    #[test]
    fn regression_signal_has_three_peaks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = regression_instance(&mut rng, 30, 60, 1.0);
        let peaks = inst
            .beta_star
            .windows(3)
            .filter(|w| w[1] > w[0] && w[1] > w[2])
            .count();
        assert_eq!(peaks, 3);
    }

    #[test]
    fn circle_with_outliers_has_requested_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cloud = noisy_circle_with_outliers(&mut rng, 30, 0.35, 0.02, 3);
        assert_eq!(cloud.n_points(), 33);
    }
}
