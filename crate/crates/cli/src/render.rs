//! Figures rendered from the CSV artifacts alone, so an SVG can always be
//! regenerated from the data next to it.

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use crate::contour::marching_squares;
use crate::svg::{range, Plot};

const LEVEL_COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
const ZERO_MODE_TOL: f64 = 1e-8;

fn rows<T: for<'de> Deserialize<'de>>(csv_text: &str, what: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(csv_text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .with_context(|| format!("malformed {what}"))
}

#[derive(Deserialize)]
struct CurvePoint {
    #[allow(dead_code)]
    theta: f64,
    #[allow(dead_code)]
    branch: usize,
    re: f64,
    im: f64,
}

#[derive(Deserialize)]
struct RegionNode {
    re: f64,
    im: f64,
    label: String,
    winding: Option<i32>,
}

#[derive(Deserialize)]
struct SigmaNode {
    re: f64,
    im: f64,
    sigma_min: f64,
}

#[derive(Deserialize)]
struct Eigenvalue {
    re: f64,
    im: f64,
}

#[derive(Deserialize)]
struct ModeEntry {
    mode: usize,
    lambda_re: f64,
    lambda_im: f64,
    index: usize,
    re: f64,
    im: f64,
}

/// Recover the axes of a row-major grid (real part fastest).
fn grid_axes(points: &[(f64, f64)]) -> Result<(Vec<f64>, Vec<f64>)> {
    let Some(&(_, im0)) = points.first() else { bail!("empty grid") };
    let nx = points.iter().take_while(|p| p.1 == im0).count();
    if points.len() % nx != 0 {
        bail!("grid is not rectangular");
    }
    let xs = points[..nx].iter().map(|p| p.0).collect();
    let ys = points.iter().step_by(nx).map(|p| p.1).collect();
    Ok((xs, ys))
}

fn step(axis: &[f64]) -> f64 {
    if axis.len() > 1 {
        (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64
    } else {
        1.0
    }
}

fn curve_dots(plot: &mut Plot, curve: &[CurvePoint]) {
    for p in curve {
        plot.circle(p.re, p.im, 0.8, "#222222");
    }
}

/// `region.svg`: cells of nonzero winding, σ_det overlaid.
pub fn region_svg(region_csv: &str, sigma_det_csv: &str) -> Result<String> {
    let nodes: Vec<RegionNode> = rows(region_csv, "region.csv")?;
    let curve: Vec<CurvePoint> = rows(sigma_det_csv, "sigma_det.csv")?;
    let (xs, ys) = grid_axes(&nodes.iter().map(|n| (n.re, n.im)).collect::<Vec<_>>())?;
    let (dx, dy) = (step(&xs), step(&ys));
    let mut plot = Plot::new(
        (xs[0] - dx / 2.0, xs[xs.len() - 1] + dx / 2.0),
        (ys[0] - dy / 2.0, ys[ys.len() - 1] + dy / 2.0),
        "region of nonzero winding",
        "Re λ",
        "Im λ",
    );
    for n in &nodes {
        let fill = match (n.label.as_str(), n.winding) {
            ("on_sigma_det", _) => "#555555",
            (_, Some(-1)) => "#9ecae1",
            (_, Some(1)) => "#fcae91",
            (_, Some(w)) if w != 0 => "#bcbddc",
            _ => continue,
        };
        plot.cell(n.re, n.im, dx, dy, fill);
    }
    curve_dots(&mut plot, &curve);
    plot.legend("winding −1", "#9ecae1");
    plot.legend("winding +1", "#fcae91");
    plot.legend("σ_det", "#222222");
    Ok(plot.finish())
}

/// `pseudospectrum.svg`: `σ_min = ε` contours with eigenvalue dots.
pub fn pseudospectrum_svg(sigma_min_csv: &str, eigenvalues_csv: &str, epsilons: &[f64]) -> Result<String> {
    let nodes: Vec<SigmaNode> = rows(sigma_min_csv, "sigma_min.csv")?;
    let eigs: Vec<Eigenvalue> = rows(eigenvalues_csv, "eigenvalues.csv")?;
    let (xs, ys) = grid_axes(&nodes.iter().map(|n| (n.re, n.im)).collect::<Vec<_>>())?;
    let field: Vec<f64> = nodes.iter().map(|n| n.sigma_min.log10()).collect();
    let mut plot = Plot::new(
        (xs[0], xs[xs.len() - 1]),
        (ys[0], ys[ys.len() - 1]),
        "ε-pseudospectrum",
        "Re λ",
        "Im λ",
    );
    for (i, eps) in epsilons.iter().enumerate() {
        let color = LEVEL_COLORS[i % LEVEL_COLORS.len()];
        plot.segments(&marching_squares(&field, &xs, &ys, eps.log10()), color, 1.2);
        plot.legend(&format!("ε = {eps:e}"), color);
    }
    for e in &eigs {
        plot.circle(e.re, e.im, 2.0, "black");
    }
    plot.legend("eigenvalues", "black");
    Ok(plot.finish())
}

/// `modes.svg`: `|x_j|` of every eigenvector against the site index, each
/// scaled to a peak of 1; the λ ≈ 0 mode in gray.
pub fn modes_svg(modes_csv: &str) -> Result<String> {
    let entries: Vec<ModeEntry> = rows(modes_csv, "modes.csv")?;
    let sites = range(entries.iter().map(|e| e.index as f64));
    let mut plot = Plot::new(sites, (0.0, 1.05), "eigenmodes", "site", "|x_j| / max");
    let mut modes: Vec<(usize, bool, Vec<(f64, f64)>)> = Vec::new();
    for e in &entries {
        if modes.last().is_none_or(|m| m.0 != e.mode) {
            let zero = e.lambda_re.hypot(e.lambda_im) <= ZERO_MODE_TOL;
            modes.push((e.mode, zero, Vec::new()));
        }
        let last = modes.last_mut().expect("just pushed");
        last.2.push((e.index as f64, e.re.hypot(e.im)));
    }
    // gray underneath
    modes.sort_by_key(|m| !m.1);
    for (mode, zero, mut points) in modes {
        let peak = points.iter().map(|p| p.1).fold(0.0, f64::max);
        if peak > 0.0 {
            points.iter_mut().for_each(|p| p.1 /= peak);
        }
        let color = if zero {
            "#999999".to_string()
        } else {
            format!("hsl({},65%,45%)", (mode * 137) % 360)
        };
        plot.polyline(&points, &color, if zero { 2.0 } else { 0.8 });
    }
    plot.legend("λ ≈ 0", "#999999");
    Ok(plot.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes_from_row_major_points() {
        let pts = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (0.0, 5.0), (1.0, 5.0), (2.0, 5.0)];
        let (xs, ys) = grid_axes(&pts).unwrap();
        assert_eq!(xs, vec![0.0, 1.0, 2.0]);
        assert_eq!(ys, vec![0.0, 5.0]);
        assert!(grid_axes(&pts[..5]).is_err());
    }

    #[test]
    fn modes_gray_for_zero() {
        let csv = "mode,lambda_re,lambda_im,index,re,im,cell,cell_max\n\
                   1,0,0,1,1,0,1,1\n1,0,0,2,1,0,1,1\n\
                   2,1.5,0,1,1,0,1,1\n2,1.5,0,2,0.5,0,1,1\n";
        let svg = modes_svg(csv).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(r##"stroke="#999999" stroke-width="2""##));
    }

    #[test]
    fn malformed_csv_is_an_error() {
        assert!(modes_svg("mode,index\nx,1\n").is_err());
    }
}
