//! Linear regression with a topological prior: the residual term, the total
//! variation of the coefficients, and the total persistence of the
//! coefficient signal beyond its three most prominent features.

use std::path::Path;

use persopt_core::{
    diagram, lower_star_filtration, penalty_mse, penalty_tv, pull_back_gradient, Cell, Complex,
    ComplexKind, DenseMatrix, OptState, StopReason, VertexFunction,
};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::config::{OptimConfig, RawConfig};
use crate::data::{regression_instance, RegressionInstance};
use crate::error::CliError;
use crate::experiments::{emit_trace, ensure_dir, window_satisfied};
use crate::io::write_string;
use crate::plot::line_plot;

#[derive(Debug, Clone)]
pub struct RegressionConfig {
    pub opt: OptimConfig,
    pub n: usize,
    pub p: usize,
    pub data_noise: f64,
    pub weight_tv: f64,
    pub weight_topo: f64,
    pub keep_peaks: usize,
}

impl RegressionConfig {
    pub fn from_raw(mut raw: RawConfig) -> Result<Self, CliError> {
        let opt = OptimConfig::take(&mut raw, 3, 10_000, 200, 0.002, 0.005, 1e-6)?;
        let cfg = RegressionConfig {
            opt,
            n: raw.take_usize("n", 100)?,
            p: raw.take_usize("p", 60)?,
            data_noise: raw.take_f64("data_noise", 2.0)?,
            weight_tv: raw.take_f64("weight_tv", 1.0)?,
            weight_topo: raw.take_f64("weight_topo", 1.0)?,
            keep_peaks: raw.take_usize("keep_peaks", 3)?,
        };
        raw.finish()?;
        if cfg.p < 7 {
            return Err(CliError::Config(
                "p must be at least 7 to host three peaks".into(),
            ));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone)]
pub struct RegressionReport {
    /// Held-out mean squared error per variant: residual only, with total
    /// variation, with total variation and topology.
    pub test_mse: [f64; 3],
    pub stops: [StopReason; 3],
    pub window_converged: bool,
}

/// Chain of vertices 0..n with an edge between neighbours.
pub fn path_complex(n: usize) -> Complex {
    let mut cells: Vec<Cell> = (0..n)
        .map(|v| Cell {
            id: v,
            dim: 0,
            vertices: vec![v],
            boundary: vec![],
        })
        .collect();
    for i in 0..n - 1 {
        cells.push(Cell {
            id: n + i,
            dim: 1,
            vertices: vec![i, i + 1],
            boundary: vec![i, i + 1],
        });
    }
    Complex::from_cells(ComplexKind::Simplicial, cells).expect("path graph is closed")
}

/// Total persistence of the finite dimension-0 diagram of a signal's
/// sublevel filtration, excluding its `keep` most persistent points. The
/// gradient lands only on the excess features.
pub fn signal_topology_excess(
    path: &Complex,
    signal: &[f64],
    keep: usize,
) -> Result<(f64, Vec<f64>), CliError> {
    let vf = VertexFunction::new(signal.to_vec())?;
    let (filt, tape) = lower_star_filtration(&vf, path)?;
    let d = diagram(path, &filt)?;
    let part = d.dim(0);
    let mut order: Vec<usize> = (0..part.regular.len()).collect();
    order.sort_by(|&a, &b| {
        part.regular[b]
            .persistence()
            .partial_cmp(&part.regular[a].persistence())
            .expect("finite persistence")
            .then(a.cmp(&b))
    });
    let mut grad = d.zero_grad();
    let mut terms: Vec<f64> = Vec::new();
    for &i in order.iter().skip(keep) {
        terms.push(part.regular[i].persistence());
        grad.regular[0][i] = (-1.0, 1.0);
    }
    terms.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let value = terms.iter().sum();
    let dense = pull_back_gradient(&d, &grad, &tape)?;
    Ok((value, dense))
}

fn mean_squared_error(x: &DenseMatrix, y: &[f64], beta: &[f64]) -> f64 {
    let r = x.matvec(beta);
    r.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / y.len() as f64
}

pub fn run_regression(cfg: &RegressionConfig, out: &Path) -> Result<RegressionReport, CliError> {
    ensure_dir(out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.opt.seed);
    let train = regression_instance(&mut rng, cfg.n, cfg.p, cfg.data_noise);
    let test = {
        let RegressionInstance {
            design, response, ..
        } = regression_instance(&mut rng, cfg.n, cfg.p, cfg.data_noise);
        (design, response)
    };
    let beta0: Vec<f64> = (0..cfg.p)
        .map(|_| 0.1 * persopt_core::sample::std_normal(&mut rng))
        .collect();
    let path = path_complex(cfg.p);

    // variant 0: residual; 1: + total variation; 2: + topology
    let mut betas: Vec<Vec<f64>> = Vec::new();
    let mut stops = Vec::new();
    let mut converged = true;
    for variant in 0..3 {
        let eval = |beta: &[f64]| -> (f64, Vec<f64>) {
            if beta.iter().any(|v| !v.is_finite()) {
                return (f64::INFINITY, vec![0.0; beta.len()]);
            }
            let mse = penalty_mse(&train.design, &train.response, beta)
                .expect("shapes fixed at setup");
            let mut value = mse.value;
            let mut grad = mse.aux.unwrap();
            if variant >= 1 {
                let tv = penalty_tv(beta);
                value += cfg.weight_tv * tv.value;
                for (g, a) in grad.iter_mut().zip(tv.aux.as_deref().unwrap()) {
                    *g += cfg.weight_tv * a;
                }
            }
            if variant >= 2 {
                let (tvalue, tgrad) =
                    signal_topology_excess(&path, beta, cfg.keep_peaks).expect("finite signal");
                value += cfg.weight_topo * tvalue;
                for (g, a) in grad.iter_mut().zip(&tgrad) {
                    *g += cfg.weight_topo * a;
                }
            }
            (value, grad)
        };
        let (initial_loss, _) = eval(&beta0);
        let stop = cfg.opt.stop_rule(initial_loss);
        let mut state = OptState::new(beta0.clone(), cfg.opt.seed);
        let mut objective = |x: &[f64]| eval(x);
        let reason = persopt_core::run(
            &mut state,
            &mut objective,
            &cfg.opt.schedule(),
            &cfg.opt.noise(),
            &stop,
        )?;
        converged &= window_satisfied(&state.trace, &stop);
        let name = ["trace_residual", "trace_tv", "trace_full"][variant];
        emit_trace(out, name, &state.trace)?;
        stops.push(reason);
        betas.push(state.x.clone());
    }

    let test_mse = [
        mean_squared_error(&test.0, &test.1, &betas[0]),
        mean_squared_error(&test.0, &test.1, &betas[1]),
        mean_squared_error(&test.0, &test.1, &betas[2]),
    ];

    let mut coeffs = String::from("index,beta_star,beta_residual,beta_tv,beta_full\n");
    for (i, star) in train.beta_star.iter().enumerate() {
        coeffs.push_str(&format!(
            "{i},{star},{},{},{}\n",
            betas[0][i], betas[1][i], betas[2][i]
        ));
    }
    write_string(&out.join("coefficients.csv"), &coeffs)?;
    let mut table = String::from("variant,test_mse\nresidual,");
    table.push_str(&format!(
        "{}\nresidual_tv,{}\nresidual_tv_topology,{}\n",
        test_mse[0], test_mse[1], test_mse[2]
    ));
    write_string(&out.join("test_mse.csv"), &table)?;
    for (variant, name) in ["beta_residual", "beta_tv", "beta_full"].iter().enumerate() {
        let series: Vec<(f64, f64)> = betas[variant]
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as f64, v))
            .collect();
        write_string(&out.join(format!("{name}.svg")), &line_plot(&series, name))?;
    }

    Ok(RegressionReport {
        test_mse,
        stops: [stops[0], stops[1], stops[2]],
        window_converged: converged,
    })
}
