//! Point-cloud homology maximization: reward persistent loops in the Rips
//! diagram while a containment penalty keeps the points in the unit square.

use std::path::Path;

use persopt_core::{
    diagram, hole_penalty, penalty_square, pull_back_gradient, rips_filtration, run, AxisBox,
    Complex, OptState, PointCloud, StopReason,
};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::config::{OptimConfig, RawConfig};
use crate::data::uniform_square_cloud;
use crate::error::CliError;
use crate::experiments::{emit_trace, ensure_dir, window_satisfied};
use crate::io::{write_cloud_csv, write_string};
use crate::plot::scatter_plot;

#[derive(Debug, Clone)]
pub struct PointcloudConfig {
    pub opt: OptimConfig,
    pub n: usize,
    pub weight_topo: f64,
    pub weight_box: f64,
}

impl PointcloudConfig {
    pub fn from_raw(mut raw: RawConfig) -> Result<Self, CliError> {
        let opt = OptimConfig::take(&mut raw, 10, 50_000, 200, 0.1, 2.0, 1e-3)?;
        let cfg = PointcloudConfig {
            opt,
            n: raw.take_usize("n", 30)?,
            weight_topo: raw.take_f64("weight_topo", 1.0)?,
            weight_box: raw.take_f64("weight_box", 1.0)?,
        };
        raw.finish()?;
        if cfg.n < 4 {
            return Err(CliError::Config("n must be at least 4".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone)]
pub struct PointcloudReport {
    pub initial_loss: f64,
    pub final_loss: f64,
    pub stop: StopReason,
    pub steps: u64,
    pub window_converged: bool,
    /// Largest excursion of any coordinate outside [0, 1].
    pub max_outside: f64,
    /// Most persistent loop in the final diagram.
    pub best_loop_persistence: f64,
}

pub fn run_pointcloud(cfg: &PointcloudConfig, out: &Path) -> Result<PointcloudReport, CliError> {
    ensure_dir(out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.opt.seed);
    let cloud0 = uniform_square_cloud(&mut rng, cfg.n);
    let complex = Complex::full_simplex(cfg.n, 2)?;
    let bounds = AxisBox::unit(2);
    let (wt, wb) = (cfg.weight_topo, cfg.weight_box);

    let eval = |coords: &[f64]| -> (f64, Vec<f64>) {
        let Ok(cloud) = PointCloud::from_flat(coords.to_vec(), 2) else {
            return (f64::INFINITY, vec![0.0; coords.len()]);
        };
        let (filt, tape) = rips_filtration(&cloud, &complex).expect("cloud matches complex");
        let d = diagram(&complex, &filt).expect("rips filtrations are monotone");
        let topo = hole_penalty(&d);
        let containment = penalty_square(&cloud, &bounds);
        let mut grad = pull_back_gradient(&d, &topo.grad, &tape).expect("gradient shapes match");
        for g in &mut grad {
            *g *= wt;
        }
        for (g, a) in grad.iter_mut().zip(containment.aux.as_deref().unwrap()) {
            *g += wb * a;
        }
        (wt * topo.value + wb * containment.value, grad)
    };

    let (initial_loss, _) = eval(cloud0.coords());
    let stop = cfg.opt.stop_rule(initial_loss);
    let mut state = OptState::new(cloud0.coords().to_vec(), cfg.opt.seed);
    let mut objective = |x: &[f64]| eval(x);
    let stop_reason = run(
        &mut state,
        &mut objective,
        &cfg.opt.schedule(),
        &cfg.opt.noise(),
        &stop,
    )?;

    let final_cloud = PointCloud::from_flat(state.x.clone(), 2).expect("finite iterate");
    let (final_loss, _) = eval(&state.x);
    let (filt, _) = rips_filtration(&final_cloud, &complex)?;
    let final_diagram = diagram(&complex, &filt)?;
    let best_loop_persistence = final_diagram
        .dim(1)
        .regular
        .iter()
        .map(|p| p.persistence())
        .fold(0.0, f64::max);
    let max_outside = state
        .x
        .iter()
        .map(|&c| (-c).max(c - 1.0).max(0.0))
        .fold(0.0, f64::max);

    write_cloud_csv(&out.join("cloud_initial.csv"), &cloud0)?;
    write_cloud_csv(&out.join("cloud_final.csv"), &final_cloud)?;
    emit_trace(out, "trace", &state.trace)?;
    write_string(
        &out.join("diagram_final.json"),
        &serde_json::to_string_pretty(&final_diagram.to_json(false)).expect("serializable"),
    )?;
    let pts: Vec<(f64, f64)> = (0..final_cloud.n_points())
        .map(|i| (final_cloud.point(i)[0], final_cloud.point(i)[1]))
        .collect();
    write_string(&out.join("cloud_final.svg"), &scatter_plot(&pts, "final cloud"))?;

    Ok(PointcloudReport {
        initial_loss,
        final_loss,
        stop: stop_reason,
        steps: state.step_count,
        window_converged: window_satisfied(&state.trace, &stop),
        max_outside,
        best_loop_persistence,
    })
}
