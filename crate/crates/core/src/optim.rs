//! Stochastic subgradient descent with decaying learning rates, optional
//! injected noise, a window-based convergence stop, and diagnostic checks on
//! the hypotheses the convergence guarantee rests on.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use thiserror::Error;

use crate::sample::std_normal;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("non-finite loss {loss} at step {step}")]
    NonFiniteLoss { step: u64, loss: f64 },
    #[error("non-finite gradient component {index} at step {step}")]
    NonFiniteGrad { step: u64, index: usize },
    #[error("gradient has {got} components for {expected} parameters at step {step}")]
    GradLength { step: u64, expected: usize, got: usize },
}

/// Learning-rate schedule. The inverse-time decay a / (1 + b k) has divergent
/// rate sum and convergent squared sum whenever a, b > 0; a constant rate does
/// not, and is flagged by [`check_assumptions`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    InverseTime { a: f64, b: f64 },
    Constant { a: f64 },
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::InverseTime { a: 0.1, b: 0.01 }
    }
}

impl Schedule {
    pub fn rate(&self, k: u64) -> f64 {
        match *self {
            Schedule::InverseTime { a, b } => a / (1.0 + b * k as f64),
            Schedule::Constant { a } => a,
        }
    }

    /// Whether the rate sequence has divergent sum and summable squares.
    pub fn summability_ok(&self) -> bool {
        matches!(self, Schedule::InverseTime { a, b } if *a > 0.0 && *b > 0.0)
    }
}

/// Additive noise injected into the subgradient at each step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum NoiseModel {
    #[default]
    None,
    Gaussian { stddev: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub step: u64,
    pub loss: f64,
    pub grad_norm: f64,
    pub alpha: f64,
}

/// Iterate, step counter, loss trace and the running statistics needed by the
/// diagnostics. Identical seeds and inputs reproduce bit-identical runs.
#[derive(Debug, Clone)]
pub struct OptState {
    pub x: Vec<f64>,
    pub step_count: u64,
    pub trace: Vec<TraceRow>,
    pub seed: u64,
    rng: ChaCha8Rng,
    noise_sum: f64,
    noise_count: u64,
    max_x_norm: f64,
}

impl OptState {
    pub fn new(x0: Vec<f64>, seed: u64) -> Self {
        let max_x_norm = norm(&x0);
        OptState {
            x: x0,
            step_count: 0,
            trace: Vec::new(),
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise_sum: 0.0,
            noise_count: 0,
            max_x_norm,
        }
    }

    /// Largest iterate norm seen so far.
    pub fn max_iterate_norm(&self) -> f64 {
        self.max_x_norm
    }

    /// Mean of all injected noise components, when any noise was drawn.
    pub fn noise_mean(&self) -> Option<f64> {
        (self.noise_count > 0).then(|| self.noise_sum / self.noise_count as f64)
    }

    pub fn noise_count(&self) -> u64 {
        self.noise_count
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// A loss with its subgradient at the queried iterate.
pub type Objective<'a> = dyn FnMut(&[f64]) -> (f64, Vec<f64>) + 'a;

/// One iteration: evaluate the objective at the current iterate, append a
/// trace row, then move against the (noisy) subgradient.
pub fn step(
    state: &mut OptState,
    objective: &mut Objective<'_>,
    sched: &Schedule,
    noise: &NoiseModel,
) -> Result<(), OptimError> {
    let k = state.step_count;
    let (loss, grad) = objective(&state.x);
    if !loss.is_finite() {
        return Err(OptimError::NonFiniteLoss { step: k, loss });
    }
    if grad.len() != state.x.len() {
        return Err(OptimError::GradLength {
            step: k,
            expected: state.x.len(),
            got: grad.len(),
        });
    }
    if let Some(index) = grad.iter().position(|g| !g.is_finite()) {
        return Err(OptimError::NonFiniteGrad { step: k, index });
    }
    let alpha = sched.rate(k);
    state.trace.push(TraceRow {
        step: k,
        loss,
        grad_norm: norm(&grad),
        alpha,
    });
    for (i, x) in state.x.iter_mut().enumerate() {
        let zeta = match noise {
            NoiseModel::None => 0.0,
            NoiseModel::Gaussian { stddev } => {
                let z = stddev * std_normal(&mut state.rng);
                state.noise_sum += z;
                state.noise_count += 1;
                z
            }
        };
        *x -= alpha * (grad[i] + zeta);
    }
    state.step_count = k + 1;
    state.max_x_norm = state.max_x_norm.max(norm(&state.x));
    Ok(())
}

/// When to stop a run: after `max_steps`, or as soon as the recorded losses
/// over the last `loss_window` steps span less than `tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub max_steps: u64,
    pub loss_window: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    WindowConverged,
    MaxSteps,
}

/// Loss range over the last `window` trace rows, when enough exist.
pub fn window_range(trace: &[TraceRow], window: usize) -> Option<f64> {
    if window == 0 || trace.len() < window {
        return None;
    }
    let tail = &trace[trace.len() - window..];
    let lo = tail.iter().map(|r| r.loss).fold(f64::INFINITY, f64::min);
    let hi = tail.iter().map(|r| r.loss).fold(f64::NEG_INFINITY, f64::max);
    Some(hi - lo)
}

/// Iterate until the stop rule fires, reporting which criterion did.
pub fn run(
    state: &mut OptState,
    objective: &mut Objective<'_>,
    sched: &Schedule,
    noise: &NoiseModel,
    stop: &StopRule,
) -> Result<StopReason, OptimError> {
    assert!(stop.max_steps >= 1, "need at least one step");
    for _ in 0..stop.max_steps {
        step(state, objective, sched, noise)?;
        if let Some(range) = window_range(&state.trace, stop.loss_window) {
            if range < stop.tol {
                return Ok(StopReason::WindowConverged);
            }
        }
    }
    Ok(StopReason::MaxSteps)
}

/// Diagnostic flags for the convergence hypotheses: rate summability,
/// boundedness of the iterates, and zero-mean noise.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub schedule_summable: bool,
    pub iterates_bounded: bool,
    pub noise_zero_mean: bool,
    pub notes: Vec<String>,
}

impl AssumptionReport {
    pub fn all_ok(&self) -> bool {
        self.schedule_summable && self.iterates_bounded && self.noise_zero_mean
    }
}

/// Check the run diagnostics: the schedule analytically, boundedness against
/// `bound`, and the empirical noise mean against three standard errors.
pub fn check_assumptions(
    sched: &Schedule,
    noise: &NoiseModel,
    state: &OptState,
    bound: f64,
) -> AssumptionReport {
    let schedule_summable = sched.summability_ok();
    let mut notes = Vec::new();
    if !schedule_summable {
        notes.push("rate schedule lacks divergent sum with summable squares".to_string());
    }
    let iterates_bounded = state.max_iterate_norm() <= bound;
    if !iterates_bounded {
        notes.push(format!(
            "iterate norm reached {:.3e}, above bound {bound:.3e}",
            state.max_iterate_norm()
        ));
    }
    let noise_zero_mean = match (noise, state.noise_mean()) {
        (NoiseModel::Gaussian { stddev }, Some(mean)) => {
            let tol = 3.0 * stddev / (state.noise_count() as f64).sqrt();
            let ok = mean.abs() <= tol;
            if !ok {
                notes.push(format!("empirical noise mean {mean:.3e} beyond {tol:.3e}"));
            }
            ok
        }
        _ => true,
    };
    AssumptionReport {
        schedule_summable,
        iterates_bounded,
        noise_zero_mean,
        notes,
    }
}

/// CSV rendering of a trace: `step,loss,grad_norm,alpha`.
pub fn trace_to_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("step,loss,grad_norm,alpha\n");
    for row in trace {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.step, row.loss, row.grad_norm, row.alpha
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic() -> impl FnMut(&[f64]) -> (f64, Vec<f64>) {
        |x: &[f64]| (x[0] * x[0], vec![2.0 * x[0]])
    }

    #[test]
    fn one_step_of_the_quadratic() {
        let mut state = OptState::new(vec![1.0], 0);
        let sched = Schedule::Constant { a: 0.1 };
        step(&mut state, &mut quadratic(), &sched, &NoiseModel::None).unwrap();
        assert!((state.x[0] - 0.8).abs() < 1e-15);
        assert_eq!(state.trace.len(), 1);
        assert_eq!(state.trace[0].loss, 1.0);
    }

    #[test]
    fn zero_gradient_leaves_iterate_fixed() {
        let mut state = OptState::new(vec![3.0, -4.0], 0);
        let sched = Schedule::Constant { a: 0.5 };
        let mut objective = |_: &[f64]| (7.0, vec![0.0, 0.0]);
        step(&mut state, &mut objective, &sched, &NoiseModel::None).unwrap();
        assert_eq!(state.x, vec![3.0, -4.0]);
    }

    #[test]
    fn absolute_value_reaches_small_values() {
        let mut state = OptState::new(vec![5.0], 0);
        let sched = Schedule::InverseTime { a: 1.0, b: 0.0 };
        let mut objective = |x: &[f64]| {
            (
                x[0].abs(),
                vec![if x[0] > 0.0 {
                    1.0
                } else if x[0] < 0.0 {
                    -1.0
                } else {
                    0.0
                }],
            )
        };
        let mut reached = u64::MAX;
        for k in 0..200 {
            step(&mut state, &mut objective, &sched, &NoiseModel::None).unwrap();
            if state.x[0].abs() < 0.1 {
                reached = k;
                break;
            }
        }
        assert!(reached < 200, "never got below 0.1");
    }

    #[test]
    fn run_stops_on_window_at_critical_point() {
        let mut state = OptState::new(vec![2.0], 0);
        let mut objective = |_: &[f64]| (1.5, vec![0.0]);
        let stop = StopRule {
            max_steps: 100,
            loss_window: 5,
            tol: 1e-9,
        };
        let reason = run(
            &mut state,
            &mut objective,
            &Schedule::Constant { a: 0.1 },
            &NoiseModel::None,
            &stop,
        )
        .unwrap();
        assert_eq!(reason, StopReason::WindowConverged);
        assert_eq!(state.trace.len(), 5);
        assert!(state.trace.iter().all(|r| r.loss == 1.5));
    }

    #[test]
    fn run_converges_on_convex_quadratic() {
        let mut state = OptState::new(vec![4.0], 0);
        let stop = StopRule {
            max_steps: 10_000,
            loss_window: 50,
            tol: 1e-10,
        };
        let sched = Schedule::InverseTime { a: 0.4, b: 0.01 };
        run(&mut state, &mut quadratic(), &sched, &NoiseModel::None, &stop).unwrap();
        let final_loss = state.x[0] * state.x[0];
        assert!(final_loss < 1e-3, "final loss {final_loss}");
    }

    #[test]
    fn run_respects_max_steps() {
        let mut state = OptState::new(vec![1.0], 0);
        let stop = StopRule {
            max_steps: 1,
            loss_window: 10,
            tol: 1e-9,
        };
        let reason = run(
            &mut state,
            &mut quadratic(),
            &Schedule::Constant { a: 0.1 },
            &NoiseModel::None,
            &stop,
        )
        .unwrap();
        assert_eq!(reason, StopReason::MaxSteps);
        assert_eq!(state.trace.len(), 1);
    }

    #[test]
    fn non_finite_loss_aborts_with_diagnostic() {
        let mut state = OptState::new(vec![1.0], 0);
        let mut objective = |_: &[f64]| (f64::NAN, vec![0.0]);
        let err = step(
            &mut state,
            &mut objective,
            &Schedule::Constant { a: 0.1 },
            &NoiseModel::None,
        )
        .unwrap_err();
        assert!(matches!(err, OptimError::NonFiniteLoss { .. }));
    }

    #[test]
    fn identical_seeds_give_identical_traces() {
        let run_once = || {
            let mut state = OptState::new(vec![1.0, -2.0], 99);
            let mut objective = |x: &[f64]| {
                (
                    x.iter().map(|v| v * v).sum(),
                    x.iter().map(|v| 2.0 * v).collect(),
                )
            };
            for _ in 0..50 {
                step(
                    &mut state,
                    &mut objective,
                    &Schedule::InverseTime { a: 0.1, b: 0.05 },
                    &NoiseModel::Gaussian { stddev: 0.01 },
                )
                .unwrap();
            }
            (state.x.clone(), state.trace.clone())
        };
        let (x1, t1) = run_once();
        let (x2, t2) = run_once();
        assert_eq!(x1, x2);
        assert_eq!(t1, t2);
    }

    #[test]
    fn assumption_checks() {
        let mut state = OptState::new(vec![0.5], 7);
        let sched = Schedule::InverseTime { a: 0.1, b: 0.1 };
        let noise = NoiseModel::Gaussian { stddev: 0.05 };
        for _ in 0..500 {
            step(&mut state, &mut quadratic(), &sched, &noise).unwrap();
        }
        let report = check_assumptions(&sched, &noise, &state, 100.0);
        assert!(report.all_ok(), "{:?}", report.notes);

        let constant = Schedule::Constant { a: 0.1 };
        let report = check_assumptions(&constant, &noise, &state, 100.0);
        assert!(!report.schedule_summable);

        // a divergent run trips the boundedness flag
        let mut diverging = OptState::new(vec![1.0], 7);
        let mut expand = |x: &[f64]| (x[0] * x[0], vec![-4.0 * x[0]]);
        for _ in 0..40 {
            step(&mut diverging, &mut expand, &constant, &NoiseModel::None).unwrap();
        }
        let report = check_assumptions(&constant, &NoiseModel::None, &diverging, 100.0);
        assert!(!report.iterates_bounded);
    }

    #[test]
    fn smooth_descent_is_monotone_for_small_rates() {
        let mut state = OptState::new(vec![3.0], 0);
        let sched = Schedule::InverseTime { a: 0.05, b: 0.001 };
        for _ in 0..200 {
            step(&mut state, &mut quadratic(), &sched, &NoiseModel::None).unwrap();
        }
        for w in state.trace.windows(2) {
            assert!(w[1].loss <= w[0].loss + 1e-12);
        }
    }

    #[test]
    fn defaults_are_the_gentle_inverse_time_schedule() {
        assert_eq!(Schedule::default(), Schedule::InverseTime { a: 0.1, b: 0.01 });
        assert!(Schedule::default().summability_ok());
        assert_eq!(NoiseModel::default(), NoiseModel::None);
    }

    #[test]
    fn csv_shape() {
        let trace = vec![TraceRow {
            step: 0,
            loss: 1.25,
            grad_norm: 0.5,
            alpha: 0.1,
        }];
        let csv = trace_to_csv(&trace);
        assert_eq!(csv, "step,loss,grad_norm,alpha\n0,1.25,0.5,0.1\n");
    }
}
