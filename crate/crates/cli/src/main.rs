use std::path::PathBuf;
use std::process::ExitCode;

use persopt_cli::experiments::diagram_cmd::{DiagramCmd, FiltrationKind};
use persopt_cli::{
    run_circle, run_diagram, run_filter, run_image, run_pointcloud, run_regression, CircleConfig,
    CliError, FilterConfig, ImageConfig, PointcloudConfig, RawConfig, RegressionConfig,
};

const USAGE: &str = "\
persopt - persistence-driven optimization experiments

USAGE:
    persopt <experiment> --config <path> --out <dir> [--seed N]
    persopt diagram --input <file> --filtration <kind> --out <dir>
                    [--max-dim D] [--knn K] [--cells]

EXPERIMENTS:
    pointcloud     maximize loops of a point cloud inside the unit square
    image          denoise a digit image via dimension-0 persistence
    regression     linear regression with total-variation and topology priors
    circle-match   repair a noisy circle sample by matching a clean diagram
    filter-select  tune an image height direction for class contrast
    diagram        compute the persistence diagram of an input file

Filtration kinds for `diagram`: rips, rips-matrix, dtm-rips, cubical
(point CSV, matrix CSV, point CSV, image CSV/PGM respectively).

Config files are flat `key = value` lines; unknown keys are rejected.
Every experiment writes trace.csv, plots, and its own CSV/JSON artifacts.
";

struct Flags {
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    input: Option<PathBuf>,
    filtration: Option<String>,
    max_dim: Option<usize>,
    knn: Option<usize>,
    cells: bool,
}

fn parse_flags(args: &[String]) -> Result<Flags, CliError> {
    let mut flags = Flags {
        config: None,
        out: None,
        seed: None,
        input: None,
        filtration: None,
        max_dim: None,
        knn: None,
        cells: false,
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut value = || {
            it.next()
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("flag {arg} needs a value")))
        };
        match arg.as_str() {
            "--config" => flags.config = Some(PathBuf::from(value()?)),
            "--out" => flags.out = Some(PathBuf::from(value()?)),
            "--seed" => {
                flags.seed = Some(value()?.parse().map_err(|_| {
                    CliError::Usage("--seed expects an unsigned integer".into())
                })?)
            }
            "--input" => flags.input = Some(PathBuf::from(value()?)),
            "--filtration" => flags.filtration = Some(value()?),
            "--max-dim" => {
                flags.max_dim = Some(value()?.parse().map_err(|_| {
                    CliError::Usage("--max-dim expects an unsigned integer".into())
                })?)
            }
            "--knn" => {
                flags.knn = Some(value()?.parse().map_err(|_| {
                    CliError::Usage("--knn expects an unsigned integer".into())
                })?)
            }
            "--cells" => flags.cells = true,
            other => return Err(CliError::Usage(format!("unknown flag `{other}`"))),
        }
    }
    Ok(flags)
}

fn load_config(flags: &Flags) -> Result<RawConfig, CliError> {
    let path = flags
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let mut raw = RawConfig::from_file(path)?;
    if let Some(seed) = flags.seed {
        raw.set("seed", seed);
    }
    Ok(raw)
}

fn out_dir(flags: &Flags) -> Result<PathBuf, CliError> {
    flags
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("--out is required".into()))
}

fn dispatch(command: &str, flags: Flags) -> Result<(), CliError> {
    match command {
        "pointcloud" => {
            let cfg = PointcloudConfig::from_raw(load_config(&flags)?)?;
            let out = out_dir(&flags)?;
            let report = run_pointcloud(&cfg, &out)?;
            println!(
                "pointcloud: loss {:.6} -> {:.6} in {} steps ({:?}); best loop persistence {:.4}",
                report.initial_loss,
                report.final_loss,
                report.steps,
                report.stop,
                report.best_loop_persistence
            );
        }
        "image" => {
            let cfg = ImageConfig::from_raw(load_config(&flags)?)?;
            let out = out_dir(&flags)?;
            let report = run_image(&cfg, &out)?;
            println!(
                "image: total persistence {:.4} -> {:.4}; binary penalty {:.4} ({:?})",
                report.initial_total_persistence,
                report.final_total_persistence,
                report.final_binary_penalty,
                report.stop
            );
        }
        "regression" => {
            let cfg = RegressionConfig::from_raw(load_config(&flags)?)?;
            let out = out_dir(&flags)?;
            let report = run_regression(&cfg, &out)?;
            println!(
                "regression: test mse residual {:.4} | +tv {:.4} | +tv+topology {:.4}",
                report.test_mse[0], report.test_mse[1], report.test_mse[2]
            );
        }
        "circle-match" => {
            let cfg = CircleConfig::from_raw(load_config(&flags)?)?;
            let out = out_dir(&flags)?;
            let report = run_circle(&cfg, &out)?;
            println!(
                "circle-match: squared distance {:.6} -> {:.6} ({:?})",
                report.initial_loss, report.final_loss, report.stop
            );
        }
        "filter-select" => {
            let cfg = FilterConfig::from_raw(load_config(&flags)?)?;
            let out = out_dir(&flags)?;
            let report = run_filter(&cfg, &out)?;
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
            println!(
                "filter-select: theta {:.4} -> {:.4}; loss {:.6} -> {:.6}; accuracy {:.3} -> {:.3}",
                report.theta0,
                report.theta_final,
                report.initial_loss,
                report.final_loss,
                report.accuracy_before,
                report.accuracy_after
            );
        }
        "diagram" => {
            let input = flags
                .input
                .clone()
                .ok_or_else(|| CliError::Usage("--input is required".into()))?;
            let kind = FiltrationKind::parse(
                flags
                    .filtration
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("--filtration is required".into()))?,
            )?;
            let cmd = DiagramCmd {
                input,
                kind,
                max_dim: flags.max_dim,
                knn: flags.knn.unwrap_or(3),
                include_cells: flags.cells,
            };
            let out = out_dir(&flags)?;
            run_diagram(&cmd, &out)?;
            println!("diagram: wrote {}", out.join("diagram.json").display());
        }
        other => {
            return Err(CliError::Usage(format!("unknown experiment `{other}`")));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        eprint!("{USAGE}");
        return ExitCode::FAILURE;
    };
    if command == "--help" || command == "-h" || command == "help" {
        print!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    let flags = match parse_flags(&args[1..]) {
        Ok(flags) => flags,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    match dispatch(command, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
