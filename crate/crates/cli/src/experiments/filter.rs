//! Filter selection: tune the direction of an image height function so that
//! dimension-0 sublevel diagrams separate two classes, scored by the
//! label-contrast criterion and validated with a nearest-centroid classifier
//! on landscape features.

use std::cell::RefCell;
use std::path::Path;

use persopt_core::{
    background_sentinel, diagram, height_filtration, label_contrast_loss, landscape_points,
    lower_star_filtration, pull_back_gradient, Complex, DenseMatrix, Diagram, GradTape,
    HeightDirection, OptState, StopReason,
};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::config::{OptimConfig, RawConfig};
use crate::data::bracket_classes;
use crate::error::CliError;
use crate::experiments::{emit_trace, ensure_dir, window_satisfied};
use crate::io::write_string;

#[derive(Debug, Clone)]
pub struct FilterConfig {
    pub opt: OptimConfig,
    pub n_per_class: usize,
    pub img_size: usize,
    pub batch: usize,
    pub n_dirs: usize,
    pub theta0: f64,
    pub k_landscapes: usize,
    pub resolution: usize,
}

impl FilterConfig {
    pub fn from_raw(mut raw: RawConfig) -> Result<Self, CliError> {
        let opt = OptimConfig::take(&mut raw, 5, 1_500, 200, 0.4, 0.02, 1e-3)?;
        let n_per_class = raw.take_usize("n_per_class", 8)?;
        let cfg = FilterConfig {
            opt,
            n_per_class,
            img_size: raw.take_usize("img_size", 20)?,
            batch: raw.take_usize("batch", 2 * n_per_class)?,
            n_dirs: raw.take_usize("n_dirs", persopt_core::loss::DEFAULT_SLICED_DIRECTIONS)?,
            theta0: raw.take_f64("theta0", 1.2)?,
            k_landscapes: raw.take_usize("k_landscapes", 5)?,
            resolution: raw.take_usize("resolution", 100)?,
        };
        raw.finish()?;
        if cfg.n_per_class < 2 {
            return Err(CliError::Config("need at least 2 images per class".into()));
        }
        if cfg.batch < 2 {
            return Err(CliError::Config("batch must be at least 2".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone)]
pub struct FilterReport {
    pub theta0: f64,
    pub theta_final: f64,
    /// Full-set contrast loss at the initial and final direction.
    pub initial_loss: f64,
    pub final_loss: f64,
    /// Nearest-centroid accuracy on landscape features, before and after.
    pub accuracy_before: f64,
    pub accuracy_after: f64,
    pub stop: StopReason,
    pub window_converged: bool,
    pub warnings: Vec<String>,
}

/// Diagram of one image under the direction filter, with the tape chained
/// all the way to the angle.
fn image_diagram(
    img: &DenseMatrix,
    grid: &Complex,
    theta: f64,
) -> Result<(Diagram, GradTape), CliError> {
    let (heights, theta_tape) = height_filtration(img, HeightDirection::new(theta)?)?;
    let (filt, cell_tape) = lower_star_filtration(&heights, grid)?;
    let d = diagram(grid, &filt)?;
    Ok((d, cell_tape.compose(&theta_tape)))
}

/// Contrast loss and its angle derivative over a set of images.
fn contrast_at(
    images: &[DenseMatrix],
    labels: &[usize],
    idx: &[usize],
    grid: &Complex,
    theta: f64,
    n_dirs: usize,
    cap: f64,
) -> Result<(f64, f64, Vec<usize>), CliError> {
    let mut diagrams = Vec::with_capacity(idx.len());
    let mut tapes = Vec::with_capacity(idx.len());
    let mut batch_labels = Vec::with_capacity(idx.len());
    for &i in idx {
        let (d, tape) = image_diagram(&images[i], grid, theta)?;
        diagrams.push(d);
        tapes.push(tape);
        batch_labels.push(labels[i]);
    }
    let out = label_contrast_loss(&diagrams, &batch_labels, 0, n_dirs, Some(cap))?;
    let mut dtheta = 0.0;
    for ((d, tape), grad) in diagrams.iter().zip(&tapes).zip(&out.grads) {
        dtheta += pull_back_gradient(d, grad, tape)?[0];
    }
    Ok((out.value, dtheta, out.skipped_labels))
}

/// Landscape feature vectors of every image at a fixed direction; essential
/// components are included capped at the background sentinel.
fn landscape_features(
    images: &[DenseMatrix],
    grid: &Complex,
    theta: f64,
    cap: f64,
    k_max: usize,
    resolution: usize,
) -> Result<Vec<Vec<f64>>, CliError> {
    let ts: Vec<f64> = (0..resolution)
        .map(|i| -cap + 2.0 * cap * i as f64 / (resolution - 1) as f64)
        .collect();
    images
        .iter()
        .map(|img| {
            let (d, _) = image_diagram(img, grid, theta)?;
            let pts: Vec<(f64, f64)> = d
                .dim(0)
                .regular
                .iter()
                .filter(|p| p.death > p.birth)
                .map(|p| (p.birth, p.death))
                .chain(
                    d.dim(0)
                        .essential
                        .iter()
                        .filter(|p| cap > p.birth)
                        .map(|p| (p.birth, cap)),
                )
                .collect();
            Ok(landscape_points(&pts, k_max, &ts).values)
        })
        .collect()
}

/// Nearest-centroid accuracy: centroids from the first half of each class,
/// scored on the second half.
fn centroid_accuracy(features: &[Vec<f64>], labels: &[usize]) -> f64 {
    let classes = [0usize, 1];
    let split: Vec<bool> = {
        // first half of each class trains
        let mut counts = [0usize; 2];
        let totals = [
            labels.iter().filter(|&&l| l == 0).count(),
            labels.iter().filter(|&&l| l == 1).count(),
        ];
        labels
            .iter()
            .map(|&l| {
                counts[l] += 1;
                counts[l] <= totals[l] / 2
            })
            .collect()
    };
    let dim = features[0].len();
    let mut centroids = [vec![0.0; dim], vec![0.0; dim]];
    let mut counts = [0usize; 2];
    for (i, f) in features.iter().enumerate() {
        if split[i] {
            counts[labels[i]] += 1;
            for (c, v) in centroids[labels[i]].iter_mut().zip(f) {
                *c += v;
            }
        }
    }
    for (centroid, count) in centroids.iter_mut().zip(counts) {
        for c in centroid.iter_mut() {
            *c /= count.max(1) as f64;
        }
    }
    let mut correct = 0;
    let mut total = 0;
    for (i, f) in features.iter().enumerate() {
        if split[i] {
            continue;
        }
        total += 1;
        let dist = |class: usize| -> f64 {
            centroids[class]
                .iter()
                .zip(f)
                .map(|(c, v)| (c - v) * (c - v))
                .sum()
        };
        let predicted = if dist(classes[0]) <= dist(classes[1]) { 0 } else { 1 };
        if predicted == labels[i] {
            correct += 1;
        }
    }
    correct as f64 / total.max(1) as f64
}

pub fn run_filter(cfg: &FilterConfig, out: &Path) -> Result<FilterReport, CliError> {
    ensure_dir(out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.opt.seed);
    let (images, labels) = bracket_classes(&mut rng, cfg.n_per_class, cfg.img_size);
    let grid = Complex::cubical_grid(cfg.img_size, cfg.img_size)?;
    let cap = background_sentinel(cfg.img_size, cfg.img_size);
    let n_images = images.len();
    let all: Vec<usize> = (0..n_images).collect();

    let (initial_loss, _, _) = contrast_at(
        &images, &labels, &all, &grid, cfg.theta0, cfg.n_dirs, cap,
    )?;
    let stop = cfg.opt.stop_rule(initial_loss);

    let warnings = RefCell::new(Vec::<String>::new());
    let thetas = RefCell::new(Vec::<f64>::new());
    let batch_rng = RefCell::new(ChaCha8Rng::seed_from_u64(cfg.opt.seed.wrapping_add(0x5eed)));
    let eval = |x: &[f64]| -> (f64, Vec<f64>) {
        let theta = x[0];
        if !theta.is_finite() {
            return (f64::INFINITY, vec![0.0]);
        }
        let idx: Vec<usize> = if cfg.batch >= n_images {
            all.clone()
        } else {
            let mut rng = batch_rng.borrow_mut();
            loop {
                let mut pool = all.clone();
                let mut chosen = Vec::with_capacity(cfg.batch);
                for _ in 0..cfg.batch {
                    let pick =
                        (persopt_core::sample::uniform01(&mut *rng) * pool.len() as f64) as usize;
                    chosen.push(pool.swap_remove(pick.min(pool.len() - 1)));
                }
                let first = labels[chosen[0]];
                if chosen.iter().any(|&i| labels[i] != first) {
                    break chosen;
                }
                warnings
                    .borrow_mut()
                    .push("single-class batch resampled".to_string());
            }
        };
        thetas.borrow_mut().push(theta);
        match contrast_at(&images, &labels, &idx, &grid, theta, cfg.n_dirs, cap) {
            Ok((value, dtheta, skipped)) => {
                if !skipped.is_empty() {
                    warnings
                        .borrow_mut()
                        .push(format!("skipped degenerate classes {skipped:?}"));
                }
                (value, vec![dtheta])
            }
            Err(_) => (f64::INFINITY, vec![0.0]),
        }
    };

    let mut state = OptState::new(vec![cfg.theta0], cfg.opt.seed);
    let mut objective = |x: &[f64]| eval(x);
    let stop_reason = persopt_core::run(
        &mut state,
        &mut objective,
        &cfg.opt.schedule(),
        &cfg.opt.noise(),
        &stop,
    )?;
    let theta_final = state.x[0];
    let (final_loss, _, _) = contrast_at(
        &images, &labels, &all, &grid, theta_final, cfg.n_dirs, cap,
    )?;

    let before = landscape_features(
        &images, &grid, cfg.theta0, cap, cfg.k_landscapes, cfg.resolution,
    )?;
    let after = landscape_features(
        &images, &grid, theta_final, cap, cfg.k_landscapes, cfg.resolution,
    )?;
    let accuracy_before = centroid_accuracy(&before, &labels);
    let accuracy_after = centroid_accuracy(&after, &labels);

    emit_trace(out, "trace", &state.trace)?;
    let mut theta_csv = String::from("step,theta\n");
    for (i, t) in thetas.borrow().iter().enumerate() {
        theta_csv.push_str(&format!("{i},{t}\n"));
    }
    write_string(&out.join("theta_trace.csv"), &theta_csv)?;
    for (name, feats) in [("features_before.csv", &before), ("features_after.csv", &after)] {
        let mut csv = String::new();
        for (i, f) in feats.iter().enumerate() {
            let row: Vec<String> = f.iter().map(|v| v.to_string()).collect();
            csv.push_str(&format!("{},{}\n", labels[i], row.join(",")));
        }
        write_string(&out.join(name), &csv)?;
    }
    write_string(
        &out.join("summary.csv"),
        &format!(
            "theta0,theta_final,loss0,loss_final,accuracy_before,accuracy_after\n{},{},{},{},{},{}\n",
            cfg.theta0, theta_final, initial_loss, final_loss, accuracy_before, accuracy_after
        ),
    )?;

    let mut warnings = warnings.into_inner();
    warnings.dedup();
    Ok(FilterReport {
        theta0: cfg.theta0,
        theta_final,
        initial_loss,
        final_loss,
        accuracy_before,
        accuracy_after,
        stop: stop_reason,
        window_converged: window_satisfied(&state.trace, &stop),
        warnings,
    })
}
