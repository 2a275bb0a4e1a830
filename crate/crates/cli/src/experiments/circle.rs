//! Noisy-circle repair: pull the Rips diagram of a corrupted sample toward
//! the diagram of a clean one by descending the squared 2-Wasserstein
//! distance.

use std::path::Path;

use persopt_core::{
    diagram, pull_back_gradient, rips_filtration, wasserstein, Complex, Diagram, OptState,
    PointCloud, StopReason,
};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::config::{OptimConfig, RawConfig};
use crate::data::{clean_circle, noisy_circle_with_outliers};
use crate::error::CliError;
use crate::experiments::{emit_trace, ensure_dir, window_satisfied};
use crate::io::{write_cloud_csv, write_string};
use crate::plot::scatter_plot;

#[derive(Debug, Clone)]
pub struct CircleConfig {
    pub opt: OptimConfig,
    pub n: usize,
    pub outliers: usize,
    pub cloud_noise: f64,
    pub radius: f64,
    pub dim: usize,
}

impl CircleConfig {
    pub fn from_raw(mut raw: RawConfig) -> Result<Self, CliError> {
        let opt = OptimConfig::take(&mut raw, 4, 2_500, 200, 0.3, 0.02, 1e-3)?;
        let cfg = CircleConfig {
            opt,
            n: raw.take_usize("n", 30)?,
            outliers: raw.take_usize("outliers", 3)?,
            cloud_noise: raw.take_f64("cloud_noise", 0.02)?,
            radius: raw.take_f64("radius", 0.35)?,
            dim: raw.take_usize("dim", 0)?,
        };
        raw.finish()?;
        if cfg.n < 8 {
            return Err(CliError::Config("n must be at least 8".into()));
        }
        if cfg.dim > 1 {
            return Err(CliError::Config("dim must be 0 or 1".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone)]
pub struct CircleReport {
    pub initial_loss: f64,
    pub final_loss: f64,
    pub stop: StopReason,
    pub window_converged: bool,
}

fn rips_diagram(cloud: &PointCloud, complex: &Complex) -> Result<Diagram, CliError> {
    let (filt, _) = rips_filtration(cloud, complex)?;
    Ok(diagram(complex, &filt)?)
}

pub fn run_circle(cfg: &CircleConfig, out: &Path) -> Result<CircleReport, CliError> {
    ensure_dir(out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.opt.seed);
    let target_cloud = clean_circle(cfg.n, cfg.radius);
    let target_complex = Complex::full_simplex(cfg.n, cfg.dim + 1)?;
    let target = rips_diagram(&target_cloud, &target_complex)?;

    let cloud0 =
        noisy_circle_with_outliers(&mut rng, cfg.n, cfg.radius, cfg.cloud_noise, cfg.outliers);
    let complex = Complex::full_simplex(cloud0.n_points(), cfg.dim + 1)?;
    let dim = cfg.dim;

    // squared distance: value w^2, gradient 2 w dw
    let eval = |coords: &[f64]| -> (f64, Vec<f64>) {
        let Ok(cloud) = PointCloud::from_flat(coords.to_vec(), 2) else {
            return (f64::INFINITY, vec![0.0; coords.len()]);
        };
        let (filt, tape) = rips_filtration(&cloud, &complex).expect("cloud matches complex");
        let d = diagram(&complex, &filt).expect("rips filtrations are monotone");
        let (w, _) = wasserstein(&d, &target, dim, 2).expect("order 2 is supported");
        let mut grad_d = w.grad.clone();
        grad_d.scale(2.0 * w.value);
        let grad = pull_back_gradient(&d, &grad_d, &tape).expect("gradient shapes match");
        (w.value * w.value, grad)
    };

    let (initial_loss, _) = eval(cloud0.coords());
    let stop = cfg.opt.stop_rule(initial_loss);
    let mut state = OptState::new(cloud0.coords().to_vec(), cfg.opt.seed);
    let mut objective = |x: &[f64]| eval(x);
    let stop_reason = persopt_core::run(
        &mut state,
        &mut objective,
        &cfg.opt.schedule(),
        &cfg.opt.noise(),
        &stop,
    )?;
    let (final_loss, _) = eval(&state.x);

    let final_cloud = PointCloud::from_flat(state.x.clone(), 2).expect("finite iterate");
    write_cloud_csv(&out.join("cloud_initial.csv"), &cloud0)?;
    write_cloud_csv(&out.join("cloud_final.csv"), &final_cloud)?;
    emit_trace(out, "trace", &state.trace)?;
    let d = rips_diagram(&final_cloud, &complex)?;
    write_string(
        &out.join("diagram_final.json"),
        &serde_json::to_string_pretty(&d.to_json(false)).expect("serializable"),
    )?;
    let pts: Vec<(f64, f64)> = (0..final_cloud.n_points())
        .map(|i| (final_cloud.point(i)[0], final_cloud.point(i)[1]))
        .collect();
    write_string(&out.join("cloud_final.svg"), &scatter_plot(&pts, "repaired cloud"))?;

    Ok(CircleReport {
        initial_loss,
        final_loss,
        stop: stop_reason,
        window_converged: window_satisfied(&state.trace, &stop),
    })
}
