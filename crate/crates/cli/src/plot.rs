//! Dependency-free SVG plots: polylines for loss traces, dots for point
//! clouds.

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || lo == hi {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const M: f64 = 40.0;

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"14\">{title}</text>\n<rect x=\"{M}\" y=\"{M}\" width=\"{}\" height=\"{}\" \
         fill=\"none\" stroke=\"#999\"/>\n",
        W / 2.0,
        W - 2.0 * M,
        H - 2.0 * M
    )
}

/// Polyline through (x, y) samples.
pub fn line_plot(series: &[(f64, f64)], title: &str) -> String {
    let (x_lo, x_hi) = bounds(series.iter().map(|p| p.0));
    let (y_lo, y_hi) = bounds(series.iter().map(|p| p.1));
    let sx = |x: f64| M + (x - x_lo) / (x_hi - x_lo) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y_lo) / (y_hi - y_lo) * (H - 2.0 * M);
    let mut svg = svg_open(title);
    let pts: Vec<String> = series
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n",
        pts.join(" ")
    ));
    svg.push_str(&format!(
        "<text x=\"{M}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">[{y_lo:.4}, {y_hi:.4}]</text>\n</svg>\n",
        H - 8.0
    ));
    svg
}

/// Scatter of 2-dimensional points, equal axis scaling.
pub fn scatter_plot(points: &[(f64, f64)], title: &str) -> String {
    let (x_lo, x_hi) = bounds(points.iter().map(|p| p.0));
    let (y_lo, y_hi) = bounds(points.iter().map(|p| p.1));
    let span = (x_hi - x_lo).max(y_hi - y_lo);
    let side = (W - 2.0 * M).min(H - 2.0 * M);
    let sx = |x: f64| M + (x - x_lo) / span * side;
    let sy = |y: f64| H - M - (y - y_lo) / span * side;
    let mut svg = svg_open(title);
    for &(x, y) in points {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#d62728\"/>\n",
            sx(x),
            sy(y)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_are_well_formed() {
        let line = line_plot(&[(0.0, 1.0), (1.0, 0.5), (2.0, 0.25)], "loss");
        assert!(line.starts_with("<svg"));
        assert!(line.ends_with("</svg>\n"));
        assert!(line.contains("polyline"));
        let scatter = scatter_plot(&[(0.0, 0.0), (1.0, 1.0)], "cloud");
        assert!(scatter.contains("circle"));
    }
}
