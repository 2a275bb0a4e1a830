//! Harness-level behavior: config validation, determinism, edge modes of the
//! experiments, and the diagram subcommand examples.

use persopt_cli::experiments::regression::{path_complex, signal_topology_excess};
use persopt_cli::{
    run_circle, run_diagram, run_filter, run_image, run_pointcloud, CircleConfig, DiagramCmd,
    FilterConfig, FiltrationKind, ImageConfig, PointcloudConfig, RawConfig, RegressionConfig,
};

fn tmp_dir(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("persopt-clitest-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn config(pairs: &[(&str, &str)]) -> RawConfig {
    let mut raw = RawConfig::empty();
    for (k, v) in pairs {
        raw.set(k, v);
    }
    raw
}

#[test]
fn unknown_config_keys_are_rejected() {
    let err = PointcloudConfig::from_raw(config(&[("mystery", "1")])).unwrap_err();
    assert!(err.to_string().contains("mystery"), "{err}");
}

#[test]
fn regression_rejects_too_few_coefficients() {
    let err = RegressionConfig::from_raw(config(&[("p", "6")])).unwrap_err();
    assert!(err.to_string().contains("three peaks"), "{err}");
}

#[test]
fn pointcloud_with_containment_only_stays_put() {
    let cfg = PointcloudConfig::from_raw(config(&[
        ("n", "8"),
        ("steps", "50"),
        ("weight_topo", "0"),
    ]))
    .unwrap();
    let r = run_pointcloud(&cfg, &tmp_dir("pc-containment")).unwrap();
    // points start inside the square, so the loss is zero throughout
    assert_eq!(r.initial_loss, 0.0);
    assert_eq!(r.final_loss, 0.0);
    assert_eq!(r.max_outside, 0.0);
}

#[test]
fn clean_image_has_nothing_to_optimize() {
    let cfg = ImageConfig::from_raw(config(&[("noise_pixels", "0")])).unwrap();
    let r = run_image(&cfg, &tmp_dir("image-clean")).unwrap();
    // exactly binary with one dark component: nothing but tie wobble, which
    // dies with the learning rate
    assert_eq!(r.initial_total_persistence, 0.0);
    assert!(
        r.final_total_persistence <= 0.05,
        "persistence appeared from nowhere: {}",
        r.final_total_persistence
    );
    assert!(
        r.final_binary_penalty <= 0.2,
        "image stopped being binary: {}",
        r.final_binary_penalty
    );
}

#[test]
fn circle_dimension_one_variant_runs() {
    let cfg = CircleConfig::from_raw(config(&[
        ("n", "10"),
        ("steps", "5"),
        ("dim", "1"),
    ]))
    .unwrap();
    let r = run_circle(&cfg, &tmp_dir("circle-dim1")).unwrap();
    assert!(r.final_loss.is_finite());
}

#[test]
fn circle_already_at_target_has_zero_loss() {
    // no noise, no outliers: the sample is the clean sample
    let cfg = CircleConfig::from_raw(config(&[
        ("n", "12"),
        ("outliers", "0"),
        ("cloud_noise", "0"),
        ("steps", "3"),
    ]))
    .unwrap();
    let r = run_circle(&cfg, &tmp_dir("circle-clean")).unwrap();
    assert_eq!(r.initial_loss, 0.0);
}

#[test]
fn seeded_runs_produce_identical_artifacts() {
    let cfg = CircleConfig::from_raw(config(&[("n", "8"), ("steps", "30")])).unwrap();
    let out1 = tmp_dir("det-1");
    let out2 = tmp_dir("det-2");
    run_circle(&cfg, &out1).unwrap();
    run_circle(&cfg, &out2).unwrap();
    for file in ["trace.csv", "cloud_initial.csv", "cloud_final.csv", "diagram_final.json"] {
        let a = std::fs::read(out1.join(file)).unwrap();
        let b = std::fs::read(out2.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identically seeded runs");
    }
}

#[test]
fn filter_resamples_single_class_batches() {
    let cfg = FilterConfig::from_raw(config(&[
        ("n_per_class", "3"),
        ("batch", "2"),
        ("steps", "40"),
        ("img_size", "14"),
        ("n_dirs", "6"),
    ]))
    .unwrap();
    let r = run_filter(&cfg, &tmp_dir("filter-batch")).unwrap();
    // with batches of 2 from 6 images, same-label draws occur and are retried
    assert!(
        r.warnings.iter().any(|w| w.contains("resampled")),
        "expected at least one resample warning, got {:?}",
        r.warnings
    );
    assert!(r.final_loss.is_finite());
}

#[test]
fn excess_persistence_ignores_the_three_main_features() {
    // a signal whose sublevel diagram has exactly three finite points
    let signal = vec![0.0, 1.0, 0.2, 0.9, 0.1, 1.1, 0.3, 0.8];
    let path = path_complex(signal.len());
    let (value, grad) = signal_topology_excess(&path, &signal, 3).unwrap();
    assert_eq!(value, 0.0);
    assert!(grad.iter().all(|&g| g == 0.0));
}

#[test]
fn diagram_command_examples() {
    let dir = tmp_dir("diagram-cmd");
    // two points: one merge, one essential component
    let cloud = dir.join("two.csv");
    std::fs::write(&cloud, "0,0\n3,4\n").unwrap();
    let json = run_diagram(
        &DiagramCmd {
            input: cloud,
            kind: FiltrationKind::Rips,
            max_dim: None,
            knn: 3,
            include_cells: false,
        },
        &dir.join("two"),
    )
    .unwrap();
    assert_eq!(json[0]["regular"][0][0], 0.0);
    assert_eq!(json[0]["regular"][0][1], 5.0);
    assert_eq!(json[0]["essential"][0], 0.0);

    // a single pixel: one essential class, nothing else
    let pixel = dir.join("one.csv");
    std::fs::write(&pixel, "0.25\n").unwrap();
    let json = run_diagram(
        &DiagramCmd {
            input: pixel,
            kind: FiltrationKind::Cubical,
            max_dim: None,
            knn: 3,
            include_cells: false,
        },
        &dir.join("one"),
    )
    .unwrap();
    assert_eq!(json[0]["essential"][0], 0.25);
    assert_eq!(json[0]["regular"].as_array().unwrap().len(), 0);

    // unit square corners: a loop born at the side, killed at the diagonal
    let square = dir.join("square.csv");
    std::fs::write(&square, "0,0\n1,0\n0,1\n1,1\n").unwrap();
    let json = run_diagram(
        &DiagramCmd {
            input: square,
            kind: FiltrationKind::Rips,
            max_dim: None,
            knn: 3,
            include_cells: true,
        },
        &dir.join("square"),
    )
    .unwrap();
    let loops = json[1]["regular"].as_array().unwrap();
    let positive: Vec<_> = loops
        .iter()
        .filter(|p| p[1].as_f64().unwrap() > p[0].as_f64().unwrap())
        .collect();
    assert_eq!(positive.len(), 1);
    assert_eq!(positive[0][0].as_f64().unwrap(), 1.0);
    assert!((positive[0][1].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert!(json[1].get("cells").is_some());
}

#[test]
fn dtm_rips_diagram_runs() {
    let dir = tmp_dir("diagram-dtm");
    let cloud = dir.join("cloud.csv");
    std::fs::write(&cloud, "0,0\n1,0\n0,1\n2,2\n").unwrap();
    let json = run_diagram(
        &DiagramCmd {
            input: cloud,
            kind: FiltrationKind::DtmRips,
            max_dim: Some(1),
            knn: 2,
            include_cells: false,
        },
        &dir.join("out"),
    )
    .unwrap();
    assert!(!json[0]["essential"].as_array().unwrap().is_empty());
}

#[test]
fn matrix_diagram_matches_point_cloud() {
    let dir = tmp_dir("diagram-matrix");
    let cloud_path = dir.join("cloud.csv");
    std::fs::write(&cloud_path, "0,0\n3,4\n").unwrap();
    let matrix_path = dir.join("matrix.csv");
    std::fs::write(&matrix_path, "0,5\n5,0\n").unwrap();
    let from_cloud = run_diagram(
        &DiagramCmd {
            input: cloud_path,
            kind: FiltrationKind::Rips,
            max_dim: None,
            knn: 3,
            include_cells: false,
        },
        &dir.join("cloud"),
    )
    .unwrap();
    let from_matrix = run_diagram(
        &DiagramCmd {
            input: matrix_path,
            kind: FiltrationKind::RipsMatrix,
            max_dim: None,
            knn: 3,
            include_cells: false,
        },
        &dir.join("matrix"),
    )
    .unwrap();
    assert_eq!(from_cloud, from_matrix);
}

#[test]
fn regression_with_all_priors_generalizes_best() {
    let cfg = RegressionConfig::from_raw(RawConfig::empty()).unwrap();
    let r = persopt_cli::run_regression(&cfg, &tmp_dir("regression-default")).unwrap();
    assert!(
        r.test_mse[2] < r.test_mse[0],
        "all priors {} should beat the residual alone {}",
        r.test_mse[2],
        r.test_mse[0]
    );
}

#[test]
fn noiseless_ground_truth_is_already_optimal_in_residual_and_topology() {
    use persopt_core::penalty_mse;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let inst = persopt_cli::data::regression_instance(&mut rng, 40, 36, 0.0);
    // exact data: zero residual at the ground truth
    let mse = penalty_mse(&inst.design, &inst.response, &inst.beta_star).unwrap();
    assert!(mse.value < 1e-20, "residual at the truth: {}", mse.value);
    // three peaks: nothing beyond the three most persistent features
    let path = path_complex(inst.beta_star.len());
    let (excess, _) = signal_topology_excess(&path, &inst.beta_star, 3).unwrap();
    assert_eq!(excess, 0.0);
}

#[test]
fn pointcloud_runs_are_reproducible_byte_for_byte() {
    let cfg = PointcloudConfig::from_raw(config(&[("n", "8"), ("steps", "30")])).unwrap();
    let out1 = tmp_dir("pc-det-1");
    let out2 = tmp_dir("pc-det-2");
    run_pointcloud(&cfg, &out1).unwrap();
    run_pointcloud(&cfg, &out2).unwrap();
    for file in ["trace.csv", "cloud_initial.csv", "cloud_final.csv", "diagram_final.json"] {
        let a = std::fs::read(out1.join(file)).unwrap();
        let b = std::fs::read(out2.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identically seeded runs");
    }
}

#[test]
fn emitted_diagrams_revalidate() {
    let out = tmp_dir("circle-revalidate");
    let cfg = CircleConfig::from_raw(config(&[("n", "10"), ("steps", "20")])).unwrap();
    run_circle(&cfg, &out).unwrap();
    let text = std::fs::read_to_string(out.join("diagram_final.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    for part in json.as_array().unwrap() {
        for point in part["regular"].as_array().unwrap() {
            let (birth, death) = (point[0].as_f64().unwrap(), point[1].as_f64().unwrap());
            assert!(death >= birth, "({birth}, {death}) is below the diagonal");
        }
    }
}

#[test]
fn trailing_window_ranges_shrink_as_the_run_converges() {
    let out = tmp_dir("circle-windows");
    let cfg = CircleConfig::from_raw(RawConfig::empty()).unwrap();
    run_circle(&cfg, &out).unwrap();
    let text = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    let losses: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let window = 40;
    let range_ending_at = |end: usize| -> f64 {
        let tail = &losses[end - window..end];
        tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - tail.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let n = losses.len();
    // checkpoints at a quarter, half, and the full trace: later windows span less
    let quarter = range_ending_at(n / 4);
    let half = range_ending_at(n / 2);
    let full = range_ending_at(n);
    assert!(half <= quarter, "range grew from {quarter} to {half}");
    assert!(full <= half, "range grew from {half} to {full}");
}

#[test]
fn filter_recovers_the_axis_from_the_orthogonal_start() {
    // start the direction exactly orthogonal to the separating axis
    let cfg = FilterConfig::from_raw(config(&[
        ("theta0", "1.5707963267948966"),
        ("steps", "3000"),
    ]))
    .unwrap();
    let r = run_filter(&cfg, &tmp_dir("filter-orthogonal")).unwrap();
    let wrapped = r.theta_final.rem_euclid(std::f64::consts::PI);
    let to_axis = wrapped.min(std::f64::consts::PI - wrapped);
    assert!(to_axis <= 0.3, "theta ended {to_axis:.3} rad from the axis");
    assert!(r.final_loss < r.initial_loss);
}
