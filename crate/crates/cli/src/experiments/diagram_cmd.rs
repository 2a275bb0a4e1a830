//! The `diagram` subcommand: read a point cloud, distance matrix or image,
//! build the requested filtration, and emit the per-dimension diagram JSON.

use std::path::{Path, PathBuf};

use persopt_core::{
    diagram, dtm_weights, lower_star_filtration, rips_filtration, rips_from_matrix,
    weighted_rips_filtration, Complex, VertexFunction,
};

use crate::error::CliError;
use crate::experiments::ensure_dir;
use crate::io::{read_image, read_matrix, read_point_cloud, write_string};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiltrationKind {
    Rips,
    RipsMatrix,
    DtmRips,
    Cubical,
}

impl FiltrationKind {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "rips" => Ok(FiltrationKind::Rips),
            "rips-matrix" => Ok(FiltrationKind::RipsMatrix),
            "dtm-rips" => Ok(FiltrationKind::DtmRips),
            "cubical" => Ok(FiltrationKind::Cubical),
            other => Err(CliError::Usage(format!(
                "unknown filtration `{other}` (expected rips, rips-matrix, dtm-rips or cubical)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiagramCmd {
    pub input: PathBuf,
    pub kind: FiltrationKind,
    pub max_dim: Option<usize>,
    pub knn: usize,
    pub include_cells: bool,
}

pub fn run_diagram(cmd: &DiagramCmd, out: &Path) -> Result<serde_json::Value, CliError> {
    ensure_dir(out)?;
    let json = match cmd.kind {
        FiltrationKind::Rips => {
            let cloud = read_point_cloud(&cmd.input)?;
            let n = cloud.n_points();
            let max_dim = cmd.max_dim.unwrap_or(2.min(n - 1));
            let complex = Complex::full_simplex(n, max_dim)?;
            let (filt, _) = rips_filtration(&cloud, &complex)?;
            diagram(&complex, &filt)?.to_json(cmd.include_cells)
        }
        FiltrationKind::RipsMatrix => {
            let m = read_matrix(&cmd.input)?;
            let n = m.rows();
            let max_dim = cmd.max_dim.unwrap_or(2.min(n - 1));
            let complex = Complex::full_simplex(n, max_dim)?;
            let (filt, _) = rips_from_matrix(&m, &complex)?;
            diagram(&complex, &filt)?.to_json(cmd.include_cells)
        }
        FiltrationKind::DtmRips => {
            let cloud = read_point_cloud(&cmd.input)?;
            let n = cloud.n_points();
            let max_dim = cmd.max_dim.unwrap_or(2.min(n - 1));
            let complex = Complex::full_simplex(n, max_dim)?;
            let (weights, _) = dtm_weights(&cloud, cmd.knn)?;
            let (filt, _) = weighted_rips_filtration(&cloud, &weights, &complex)?;
            diagram(&complex, &filt)?.to_json(cmd.include_cells)
        }
        FiltrationKind::Cubical => {
            let img = read_image(&cmd.input)?;
            let complex = Complex::cubical_grid(img.rows(), img.cols())?;
            let vf = VertexFunction::new(img.data().to_vec())?;
            let (filt, _) = lower_star_filtration(&vf, &complex)?;
            diagram(&complex, &filt)?.to_json(cmd.include_cells)
        }
    };
    write_string(
        &out.join("diagram.json"),
        &serde_json::to_string_pretty(&json).expect("serializable"),
    )?;
    Ok(json)
}
