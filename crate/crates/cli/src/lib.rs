//! Experiment harness behind the `persopt` binary: seeded synthetic data,
//! flat key-value configs, and one module per experiment.

pub mod config;
pub mod data;
pub mod error;
pub mod experiments;
pub mod io;
pub mod plot;

pub use config::{OptimConfig, RawConfig};
pub use error::CliError;
pub use experiments::circle::{run_circle, CircleConfig, CircleReport};
pub use experiments::diagram_cmd::{run_diagram, DiagramCmd, FiltrationKind};
pub use experiments::filter::{run_filter, FilterConfig, FilterReport};
pub use experiments::image::{run_image, ImageConfig, ImageReport};
pub use experiments::pointcloud::{run_pointcloud, PointcloudConfig, PointcloudReport};
pub use experiments::regression::{run_regression, RegressionConfig, RegressionReport};
