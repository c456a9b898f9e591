use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use num_complex::Complex64;
use skinspec::acceptance::{run_all, DEFAULT_SEED};
use skinspec::linalg::{eigvals, CMatrix};
use skinspec::modes::{cell_maxima, Side};
use skinspec::resonator::{capacitance_matrix, skin_effect_report};
use skinspec::spectra::{pseudospectrum_grid, sigma_det_sample, ClassifiedGrid, SigmaDetSample};

use crate::config::{MatrixSource, RunConfig};
use crate::render;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    VerificationFailed,
}

fn write(out: &Path, name: &str, contents: &[u8]) -> Result<()> {
    let path = out.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).expect("csv output is UTF-8")
}

fn sigma_det_csv(sample: &SigmaDetSample) -> Result<Vec<u8>> {
    let rows = sample.thetas.iter().enumerate().flat_map(|(m, theta)| {
        sample
            .at(m)
            .iter()
            .enumerate()
            .map(move |(branch, z)| vec![theta.to_string(), branch.to_string(), z.re.to_string(), z.im.to_string()])
    });
    csv_bytes(&["theta", "branch", "re", "im"], rows)
}

pub fn sigma_det(cfg: &RunConfig, out: &Path) -> Result<Status> {
    let s = cfg.symbol()?;
    let sample = sigma_det_sample(&s, cfg.samples)?;
    write(out, "sigma_det.csv", &sigma_det_csv(&sample)?)?;
    println!(
        "sigma_det: {} samples x {} branches, min |λ| on the curves = {}",
        sample.thetas.len(),
        s.k(),
        sample.curve_distance(Complex64::new(0.0, 0.0))
    );
    Ok(Status::Ok)
}

pub fn winding_region(cfg: &RunConfig, out: &Path) -> Result<Status> {
    let s = cfg.symbol()?;
    let sample = sigma_det_sample(&s, cfg.samples)?;
    let grid = ClassifiedGrid::new(cfg.grid_around(&sample)?)?.classify(&s);
    let regions = grid.regions.as_ref().expect("classified");
    let rows = regions.iter().enumerate().map(|(i, r)| {
        let p = grid.spec.point(i);
        vec![
            p.re.to_string(),
            p.im.to_string(),
            r.label().to_string(),
            r.winding().map(|w| w.to_string()).unwrap_or_default(),
        ]
    });
    let region_csv = csv_bytes(&["re", "im", "label", "winding"], rows)?;
    let curve_csv = sigma_det_csv(&sample)?;
    write(out, "region.csv", &region_csv)?;
    write(out, "sigma_det.csv", &curve_csv)?;
    write(out, "region.svg", render::region_svg(text(&region_csv), text(&curve_csv))?.as_bytes())?;
    let counts = grid.summary(&[]).regions;
    println!(
        "winding-region: {} nodes; winding<0: {}, winding>0: {}, on sigma_det: {}, outside: {}",
        grid.spec.len(),
        counts.inside_negative,
        counts.inside_positive,
        counts.on_sigma_det,
        counts.outside
    );
    Ok(Status::Ok)
}

pub fn pseudospectrum(cfg: &RunConfig, out: &Path) -> Result<Status> {
    let (a, symbol): (CMatrix, _) = match cfg.matrix_source()? {
        MatrixSource::Chain(chain) => (capacitance_matrix(&chain), Some(cfg.symbol()?)),
        MatrixSource::Dense(m) => (m, None),
        MatrixSource::Section(s, n) => (s.finite_section(n), Some(s)),
    };
    let eigs = eigvals(&a)?;
    let spec = match &symbol {
        Some(s) => {
            let sample = sigma_det_sample(s, cfg.samples)?;
            let mut frame: Vec<Complex64> = sample.values.clone();
            frame.extend(&eigs);
            cfg.grid_around_points(&frame)?
        }
        None => cfg.grid_around_points(&eigs)?,
    };
    let mut grid = pseudospectrum_grid(&a, spec)?;
    if let Some(s) = &symbol {
        grid = grid.classify(s);
    }
    let sigma = grid.sigma_min.as_ref().expect("computed");
    let rows = sigma.iter().enumerate().map(|(i, v)| {
        let p = grid.spec.point(i);
        vec![p.re.to_string(), p.im.to_string(), v.to_string()]
    });
    let sigma_csv = csv_bytes(&["re", "im", "sigma_min"], rows)?;
    let eig_csv = csv_bytes(&["re", "im"], eigs.iter().map(|z| vec![z.re.to_string(), z.im.to_string()]))?;
    let summary = grid.summary(&cfg.epsilons);
    write(out, "sigma_min.csv", &sigma_csv)?;
    write(out, "eigenvalues.csv", &eig_csv)?;
    write(out, "summary.json", serde_json::to_string_pretty(&summary)?.as_bytes())?;
    let svg = render::pseudospectrum_svg(text(&sigma_csv), text(&eig_csv), &cfg.epsilons)?;
    write(out, "pseudospectrum.svg", svg.as_bytes())?;
    for level in &summary.epsilon_levels {
        println!(
            "pseudospectrum: ε = {:e}: {} of {} nodes with σ_min ≤ ε",
            level.epsilon,
            level.nodes_below,
            grid.spec.len()
        );
    }
    Ok(Status::Ok)
}

pub fn skin_report(cfg: &RunConfig, out: &Path) -> Result<Status> {
    let chain = cfg.chain()?;
    let report = skin_effect_report(chain)?;
    let k = chain.k();
    let mut rows = Vec::new();
    for (j, m) in report.modes.iter().enumerate() {
        let maxima = cell_maxima(&m.vector, k, Side::Left);
        let peak = maxima.iter().copied().fold(0.0, f64::max);
        for (i, z) in m.vector.iter().enumerate() {
            let cell_max = if peak > 0.0 { maxima[i / k] / peak } else { 0.0 };
            rows.push(vec![
                (j + 1).to_string(),
                m.lambda.re.to_string(),
                m.lambda.im.to_string(),
                (i + 1).to_string(),
                z.re.to_string(),
                z.im.to_string(),
                (i / k + 1).to_string(),
                cell_max.to_string(),
            ]);
        }
    }
    let header = ["mode", "lambda_re", "lambda_im", "index", "re", "im", "cell", "cell_max"];
    let modes_csv = csv_bytes(&header, rows)?;
    let mut report_csv = Vec::new();
    report.write_csv(&mut report_csv)?;
    write(out, "modes.csv", &modes_csv)?;
    write(out, "report.csv", &report_csv)?;
    write(out, "report.json", serde_json::to_string_pretty(&report)?.as_bytes())?;
    write(out, "modes.svg", render::modes_svg(text(&modes_csv))?.as_bytes())?;
    let left = report.modes.iter().filter(|m| m.argmax_site <= chain.n() / 2).count();
    println!(
        "skin-report: {} modes, {} peaking in the left half{}",
        report.modes.len(),
        left,
        if report.experimental { " (non-uniform lengths: experimental)" } else { "" }
    );
    Ok(Status::Ok)
}

pub fn verify(seed: Option<u64>, out: Option<&Path>) -> Result<Status> {
    let outcomes = run_all(seed.unwrap_or(DEFAULT_SEED));
    for o in &outcomes {
        println!("{}", o.line());
    }
    if let Some(out) = out {
        write(out, "verify.json", serde_json::to_string_pretty(&outcomes)?.as_bytes())?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("verify: {}/{} criteria passed", outcomes.len() - failed, outcomes.len());
    Ok(if failed == 0 { Status::Ok } else { Status::VerificationFailed })
}
