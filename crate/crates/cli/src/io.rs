//! File formats: CSV for point clouds, matrices and images, PGM (P2 and P5)
//! for images. Parse errors carry line numbers.

use std::path::Path;

use persopt_core::{DenseMatrix, PointCloud};

use crate::error::CliError;

pub fn read_csv_rows(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split(',') {
            let field = field.trim();
            row.push(field.parse::<f64>().map_err(|_| {
                CliError::parse(path, lineno + 1, format!("`{field}` is not a number"))
            })?);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::parse(path, 1, "no data rows"));
    }
    Ok(rows)
}

fn rectangular(path: &Path, rows: &[Vec<f64>]) -> Result<(), CliError> {
    let w = rows[0].len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != w {
            return Err(CliError::parse(
                path,
                i + 1,
                format!("row has {} fields, expected {w}", row.len()),
            ));
        }
    }
    Ok(())
}

pub fn read_point_cloud(path: &Path) -> Result<PointCloud, CliError> {
    let rows = read_csv_rows(path)?;
    rectangular(path, &rows)?;
    Ok(PointCloud::from_rows(&rows)?)
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix, CliError> {
    let rows = read_csv_rows(path)?;
    rectangular(path, &rows)?;
    let (r, c) = (rows.len(), rows[0].len());
    let data: Vec<f64> = rows.into_iter().flatten().collect();
    DenseMatrix::new(r, c, data).map_err(|e| CliError::Config(e.to_string()))
}

/// Image loader: PGM by extension, CSV otherwise.
pub fn read_image(path: &Path) -> Result<DenseMatrix, CliError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => read_pgm(path),
        _ => read_matrix(path),
    }
}

/// Plain (P2) and binary (P5) PGM, scaled to [0, 1].
pub fn read_pgm(path: &Path) -> Result<DenseMatrix, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let mut header = Vec::new();
    let mut pos = 0;
    // magic, width, height, maxval with # comments allowed in between
    while header.len() < 4 && pos < bytes.len() {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        header.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if header.len() < 4 {
        return Err(CliError::parse(path, 1, "truncated header"));
    }
    let magic = header[0].as_str();
    let width: usize = header[1]
        .parse()
        .map_err(|_| CliError::parse(path, 1, "bad width"))?;
    let height: usize = header[2]
        .parse()
        .map_err(|_| CliError::parse(path, 1, "bad height"))?;
    let maxval: f64 = header[3]
        .parse()
        .map_err(|_| CliError::parse(path, 1, "bad maxval"))?;
    if maxval <= 0.0 {
        return Err(CliError::parse(path, 1, "maxval must be positive"));
    }
    let data: Vec<f64> = match magic {
        "P2" => {
            let text = String::from_utf8_lossy(&bytes[pos..]);
            let values: Result<Vec<f64>, _> = text.split_whitespace().map(|t| t.parse()).collect();
            values.map_err(|_| CliError::parse(path, 1, "bad pixel value"))?
        }
        "P5" => {
            pos += 1; // single whitespace after maxval
            if maxval > 255.0 {
                return Err(CliError::parse(path, 1, "16-bit P5 not supported"));
            }
            bytes[pos..].iter().map(|&b| b as f64).collect()
        }
        other => {
            return Err(CliError::parse(path, 1, format!("unsupported magic `{other}`")));
        }
    };
    if data.len() < width * height {
        return Err(CliError::parse(
            path,
            1,
            format!("expected {} pixels, found {}", width * height, data.len()),
        ));
    }
    let scaled: Vec<f64> = data[..width * height].iter().map(|v| v / maxval).collect();
    DenseMatrix::new(height, width, scaled).map_err(|e| CliError::Config(e.to_string()))
}

pub fn write_string(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|e| CliError::io(path, e))
}

pub fn write_cloud_csv(path: &Path, cloud: &PointCloud) -> Result<(), CliError> {
    let mut out = String::new();
    for i in 0..cloud.n_points() {
        let row: Vec<String> = cloud.point(i).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_string(path, &out)
}

pub fn write_matrix_csv(path: &Path, m: &DenseMatrix) -> Result<(), CliError> {
    let mut out = String::new();
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_string(path, &out)
}
