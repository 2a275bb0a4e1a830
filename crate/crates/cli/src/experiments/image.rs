//! Image denoising through dimension-0 persistence of the cubical sublevel
//! filtration: short-lived components are noise, and a binary-value penalty
//! pins pixels to {0, 1}.

use std::path::Path;

use persopt_core::{
    diagram, lower_star_filtration, penalty_binary_image, pull_back_gradient, total_persistence,
    Complex, DenseMatrix, OptState, StopReason, VertexFunction,
};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::config::{OptimConfig, RawConfig};
use crate::data::noisy_digit;
use crate::error::CliError;
use crate::experiments::{emit_trace, ensure_dir, window_satisfied};
use crate::io::{write_matrix_csv, write_string};

#[derive(Debug, Clone)]
pub struct ImageConfig {
    pub opt: OptimConfig,
    pub size: usize,
    pub noise_pixels: usize,
    pub weight_topo: f64,
    pub weight_binary: f64,
}

impl ImageConfig {
    pub fn from_raw(mut raw: RawConfig) -> Result<Self, CliError> {
        let opt = OptimConfig::take(&mut raw, 2, 10_000, 200, 0.05, 0.1, 1e-3)?;
        let cfg = ImageConfig {
            opt,
            size: raw.take_usize("size", 20)?,
            noise_pixels: raw.take_usize("noise_pixels", 10)?,
            weight_topo: raw.take_f64("weight_topo", 1.0)?,
            weight_binary: raw.take_f64("weight_binary", 1.0)?,
        };
        raw.finish()?;
        if cfg.size < 12 {
            return Err(CliError::Config("size must be at least 12".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone)]
pub struct ImageReport {
    pub initial_loss: f64,
    pub final_loss: f64,
    /// Unweighted finite dimension-0 total persistence, before and after.
    pub initial_total_persistence: f64,
    pub final_total_persistence: f64,
    /// Unweighted binary penalty of the final image.
    pub final_binary_penalty: f64,
    pub stop: StopReason,
    pub window_converged: bool,
}

/// Finite dimension-0 total persistence of an image under the sublevel
/// filtration.
fn image_total_persistence(grid: &Complex, pixels: &[f64]) -> Result<f64, CliError> {
    let vf = VertexFunction::new(pixels.to_vec())?;
    let (filt, _) = lower_star_filtration(&vf, grid)?;
    let d = diagram(grid, &filt)?;
    Ok(total_persistence(&d, &[0]).value)
}

pub fn run_image(cfg: &ImageConfig, out: &Path) -> Result<ImageReport, CliError> {
    ensure_dir(out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.opt.seed);
    let image0 = noisy_digit(&mut rng, cfg.size, cfg.noise_pixels);
    let grid = Complex::cubical_grid(cfg.size, cfg.size)?;
    let (wt, wb) = (cfg.weight_topo, cfg.weight_binary);

    // snapshot the diagram at intervals to show how it deforms over the run
    let snapshot_every = (cfg.opt.max_steps / 8).max(1);
    let snapshots: std::cell::RefCell<Vec<(u64, String)>> = std::cell::RefCell::new(Vec::new());
    let evals_seen = std::cell::Cell::new(0u64);

    let eval = |pixels: &[f64]| -> (f64, Vec<f64>) {
        let Ok(vf) = VertexFunction::new(pixels.to_vec()) else {
            return (f64::INFINITY, vec![0.0; pixels.len()]);
        };
        let (filt, tape) = lower_star_filtration(&vf, &grid).expect("pixel count matches grid");
        let d = diagram(&grid, &filt).expect("sublevel filtrations are monotone");
        let step = evals_seen.get();
        evals_seen.set(step + 1);
        if step.is_multiple_of(snapshot_every) {
            snapshots.borrow_mut().push((
                step,
                serde_json::to_string_pretty(&d.to_json(false)).expect("serializable"),
            ));
        }
        let topo = total_persistence(&d, &[0]);
        let binary = penalty_binary_image(pixels);
        let mut grad = pull_back_gradient(&d, &topo.grad, &tape).expect("gradient shapes match");
        for g in &mut grad {
            *g *= wt;
        }
        for (g, a) in grad.iter_mut().zip(binary.aux.as_deref().unwrap()) {
            *g += wb * a;
        }
        (wt * topo.value + wb * binary.value, grad)
    };

    let initial_total_persistence = image_total_persistence(&grid, image0.data())?;
    let (initial_loss, _) = eval(image0.data());
    snapshots.borrow_mut().clear();
    evals_seen.set(0);
    let stop = cfg.opt.stop_rule(initial_loss);
    let mut state = OptState::new(image0.data().to_vec(), cfg.opt.seed);
    let mut objective = |x: &[f64]| eval(x);
    let stop_reason = persopt_core::run(
        &mut state,
        &mut objective,
        &cfg.opt.schedule(),
        &cfg.opt.noise(),
        &stop,
    )?;

    let (final_loss, _) = eval(&state.x);
    let final_total_persistence = image_total_persistence(&grid, &state.x)?;
    let final_binary_penalty = penalty_binary_image(&state.x).value;

    let final_image = DenseMatrix::new(cfg.size, cfg.size, state.x.clone())
        .map_err(|e| CliError::Config(e.to_string()))?;
    write_matrix_csv(&out.join("image_initial.csv"), &image0)?;
    write_matrix_csv(&out.join("image_final.csv"), &final_image)?;
    emit_trace(out, "trace", &state.trace)?;
    let vf = VertexFunction::new(state.x.clone())?;
    let (filt, _) = lower_star_filtration(&vf, &grid)?;
    let d = diagram(&grid, &filt)?;
    write_string(
        &out.join("diagram_final.json"),
        &serde_json::to_string_pretty(&d.to_json(false)).expect("serializable"),
    )?;
    for (step, json) in snapshots.borrow().iter() {
        write_string(&out.join(format!("diagram_step{step:06}.json")), json)?;
    }

    Ok(ImageReport {
        initial_loss,
        final_loss,
        initial_total_persistence,
        final_total_persistence,
        final_binary_penalty,
        stop: stop_reason,
        window_converged: window_satisfied(&state.trace, &stop),
    })
}
