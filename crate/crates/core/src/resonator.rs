//! Resonator chains: the gauge capacitance matrix `C^γ`, its reading as a
//! corner-perturbed tridiagonal k-Toeplitz matrix, and the skin-effect report.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_dense, CMatrix};
use crate::modes::{decay_profile, Side};
use crate::spectra::{sigma_b0, sigma_det_sample};
use crate::symbol::SymbolCoeffs;
use crate::winding::{in_region_G, Region};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Relative tolerance for the periodicity of the spacings.
const PERIOD_TOL: f64 = 1e-12;
/// Rebuilt matrix must match the source to this (relative to `max |C_ij|`).
pub const REBUILD_TOL: f64 = 1e-10;
pub const REPORT_SIGMA_DET_SAMPLES: usize = 512;

/// `N` resonators with `k`-periodic spacings `s` (length `N−1`), lengths
/// `ℓ` (length `N`) and gauge `γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChain", into = "RawChain")]
pub struct ResonatorChain {
    n: usize,
    k: usize,
    spacings: Vec<f64>,
    lengths: Vec<f64>,
    gamma: f64,
}

#[derive(Serialize, Deserialize)]
struct RawChain {
    #[serde(rename = "N")]
    n: usize,
    k: usize,
    s: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    l: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
}

impl TryFrom<RawChain> for ResonatorChain {
    type Error = Error;

    fn try_from(raw: RawChain) -> Result<Self> {
        let spacings = if raw.s.len() == raw.k && raw.n.saturating_sub(1) != raw.k {
            (0..raw.n.saturating_sub(1)).map(|i| raw.s[i % raw.k]).collect()
        } else {
            raw.s
        };
        let lengths = raw.l.unwrap_or_else(|| vec![1.0; raw.n]);
        Self::new(raw.n, raw.k, spacings, lengths, raw.gamma.unwrap_or(1.0))
    }
}

impl From<ResonatorChain> for RawChain {
    fn from(c: ResonatorChain) -> Self {
        RawChain {
            n: c.n,
            k: c.k,
            s: c.spacings,
            l: Some(c.lengths),
            gamma: Some(c.gamma),
        }
    }
}

impl ResonatorChain {
    pub fn new(n: usize, k: usize, spacings: Vec<f64>, lengths: Vec<f64>, gamma: f64) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if n < 2 {
            return bad(format!("a chain needs N >= 2 resonators, got {n}"));
        }
        if k == 0 || k >= n {
            return bad(format!("period k = {k} must satisfy 1 <= k < N = {n}"));
        }
        if spacings.len() != n - 1 {
            return bad(format!("expected {} spacings, got {}", n - 1, spacings.len()));
        }
        if lengths.len() != n {
            return bad(format!("expected {n} lengths, got {}", lengths.len()));
        }
        if spacings.iter().chain(&lengths).any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("spacings and lengths must be positive and finite".into());
        }
        if !(gamma.is_finite() && gamma != 0.0) {
            return bad(format!("gamma must be finite and nonzero, got {gamma}"));
        }
        for i in k..n - 1 {
            if (spacings[i] - spacings[i - k]).abs() > PERIOD_TOL * spacings[i].abs() {
                return bad(format!("spacings are not {k}-periodic at index {}", i + 1));
            }
        }
        Ok(Self {
            n,
            k,
            spacings,
            lengths,
            gamma,
        })
    }

    /// Uniform lengths `ℓ = 1`; `pattern` holds one period of spacings.
    pub fn periodic(n: usize, pattern: &[f64], gamma: f64) -> Result<Self> {
        let k = pattern.len();
        if k == 0 {
            return Err(Error::InvalidInput("empty spacing pattern".into()));
        }
        let spacings = (0..n.saturating_sub(1)).map(|i| pattern[i % k]).collect();
        Self::new(n, k, spacings, vec![1.0; n], gamma)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Non-uniform lengths take a path whose index reading is not settled;
    /// results for them are experimental.
    pub fn is_experimental(&self) -> bool {
        self.lengths.iter().any(|&l| l != self.lengths[0])
    }
}

/// `x / (1 − e^{−t})` without cancellation for small `t`.
fn over_one_minus_exp_neg(x: f64, t: f64) -> f64 {
    x / -(-t).exp_m1()
}

/// The gauge capacitance matrix: real, tridiagonal, non-symmetric for γ ≠ 0.
pub fn capacitance_matrix(chain: &ResonatorChain) -> CMatrix {
    let n = chain.n;
    let g = chain.gamma;
    let s = &chain.spacings;
    let l = &chain.lengths;
    let mut c = CMatrix::zeros(n, n);
    let set = |c: &mut CMatrix, i: usize, j: usize, v: f64| c[(i, j)] = Complex64::new(v, 0.0);

    // 0-based: s[i] separates resonators i and i+1
    set(&mut c, 0, 0, g / s[0] * over_one_minus_exp_neg(l[0], g * l[0]));
    for i in 1..n - 1 {
        let v = g / s[i] * over_one_minus_exp_neg(l[i], g * l[i]) - g / s[i - 1] * over_one_minus_exp_neg(l[i], -g * l[i]);
        set(&mut c, i, i, v);
    }
    set(&mut c, n - 1, n - 1, -g / s[n - 2] * over_one_minus_exp_neg(l[n - 1], -g * l[n - 1]));
    for i in 0..n - 1 {
        set(&mut c, i, i + 1, -g / s[i] * over_one_minus_exp_neg(l[i], g * l[i + 1]));
        set(&mut c, i + 1, i, g / s[i] * over_one_minus_exp_neg(l[i + 1], -g * l[i]));
    }
    c
}

/// Corner-perturbed k-Toeplitz reading of an `n x n` matrix: `A_n(coeffs)`
/// with `a_pert` added at `(1,1)` and `b_pert` at `(n,n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KToeplitzSpec {
    pub n: usize,
    pub coeffs: SymbolCoeffs,
    pub a_pert: Complex64,
    pub b_pert: Complex64,
}

pub fn ktoeplitz_matrix(spec: &KToeplitzSpec) -> CMatrix {
    let mut m = spec.coeffs.finite_section(spec.n);
    m[(0, 0)] += spec.a_pert;
    m[(spec.n - 1, spec.n - 1)] += spec.b_pert;
    m
}

/// Read the symbol off interior rows `k+1..2k` and the corner perturbations
/// off the first and last diagonal entries. `N` need not be a multiple of
/// `k`. Fails if the rebuilt matrix does not reproduce `C^γ`.
pub fn capacitance_to_ktoeplitz(chain: &ResonatorChain) -> Result<KToeplitzSpec> {
    let (n, k) = (chain.n, chain.k);
    if n < 3 * k {
        return Err(Error::InvalidInput(format!("need N >= 3k = {} to observe interior rows, got {n}", 3 * k)));
    }
    let c = capacitance_matrix(chain);
    let rows = k..2 * k;
    let a = rows.clone().map(|r| c[(r, r)]).collect();
    let b = rows.clone().map(|r| c[(r, r + 1)]).collect();
    let cc = rows.map(|r| c[(r + 1, r)]).collect();
    let coeffs = SymbolCoeffs::new(a, b, cc)?;
    let a_pert = c[(0, 0)] - coeffs.a()[0];
    let b_pert = c[(n - 1, n - 1)] - coeffs.a()[(n - 1) % k];
    let spec = KToeplitzSpec {
        n,
        coeffs,
        a_pert,
        b_pert,
    };
    let rebuilt = ktoeplitz_matrix(&spec);
    let scale = c.as_slice().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let (mut worst, mut at) = (0.0, (0, 0));
    for i in 0..n {
        for j in 0..n {
            let d = (rebuilt[(i, j)] - c[(i, j)]).norm();
            if d > worst {
                worst = d;
                at = (i, j);
            }
        }
    }
    if worst >= REBUILD_TOL * scale {
        return Err(Error::RebuildMismatch {
            max_error: worst,
            row: at.0 + 1,
            col: at.1 + 1,
        });
    }
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub lambda: Complex64,
    pub region: Region,
    pub side: Side,
    /// 1-based site of the largest entry.
    pub argmax_site: usize,
    /// `None` when the chain is too short (< 4k sites) to fit.
    pub fitted_rho: Option<f64>,
    #[serde(rename = "logC")]
    pub fitted_log_c: Option<f64>,
    /// Unit-norm eigenvector, phase fixed so its largest entry is positive.
    #[serde(skip)]
    pub vector: Vec<Complex64>,
}

impl ModeReport {
    pub fn winding(&self) -> Option<i32> {
        self.region.winding()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkinReport {
    pub chain: ResonatorChain,
    pub experimental: bool,
    pub ktoeplitz: KToeplitzSpec,
    pub b0_eigs: Vec<Complex64>,
    pub sigma_det: Vec<Complex64>,
    pub modes: Vec<ModeReport>,
}

/// Eigen-decompose `C^γ` and classify/profile every mode against the
/// extracted symbol.
pub fn skin_effect_report(chain: &ResonatorChain) -> Result<SkinReport> {
    let spec = capacitance_to_ktoeplitz(chain)?;
    let s = &spec.coeffs;
    let c = capacitance_matrix(chain);
    let pairs = eig_dense(&c)?;
    let k = chain.k;
    let modes = pairs
        .into_par_iter()
        .map(|pair| -> Result<ModeReport> {
            let region = in_region_G(s, pair.value);
            let side = match region {
                Region::Inside(w) if w > 0 => Side::Right,
                _ => Side::Left,
            };
            let argmax_site = pair
                .vector
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()).then(y.0.cmp(&x.0)))
                .map_or(1, |(i, _)| i + 1);
            let profile = if pair.vector.len() >= 4 * k && pair.vector.iter().any(|z| *z != ZERO) {
                Some(decay_profile(&pair.vector, k, side)?)
            } else {
                None
            };
            Ok(ModeReport {
                lambda: pair.value,
                region,
                side,
                argmax_site,
                fitted_rho: profile.as_ref().map(|p| p.fitted_rho),
                fitted_log_c: profile.as_ref().map(|p| p.fitted_log_c),
                vector: pair.vector,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SkinReport {
        chain: chain.clone(),
        experimental: chain.is_experimental(),
        b0_eigs: sigma_b0(s)?,
        sigma_det: sigma_det_sample(s, REPORT_SIGMA_DET_SAMPLES)?.values,
        ktoeplitz: spec,
        modes,
    })
}

impl SkinReport {
    /// Per-mode table: `lambda_re, lambda_im, winding, region, argmax_site, fitted_rho`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lambda_re", "lambda_im", "winding", "region", "argmax_site", "fitted_rho"])?;
        for m in &self.modes {
            w.write_record([
                m.lambda.re.to_string(),
                m.lambda.im.to_string(),
                m.winding().map(|v| v.to_string()).unwrap_or_default(),
                m.region.label().to_string(),
                m.argmax_site.to_string(),
                m.fitted_rho.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
