//! Decaying eigenvectors of `T(f)` and pseudo-eigenvectors of its finite
//! sections, built from the roots of the z-quadratic.
//!
//! For a root `z` and `(f(z) − λ) v = 0`, the vector `(v, z⁻¹v, z⁻²v, …)`
//! satisfies every block row of `(T(f) − λ) x = 0` except the first, where
//! it misses `−A₁ z v` — a multiple of `e₁`. Two such vectors (or a vector
//! and its Jordan partner at a double root) are combined to cancel it.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_least_squares, vec_norm, vec_norm_inf, CMatrix, Svd};
use crate::symbol::{Multiplicity, RootPair, SymbolCoeffs};
use crate::winding::eigencurve_winding_sum;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative size of the second-smallest singular value of `f(z₁) − λ` below
/// which a double root is treated as having a two-dimensional eigenspace.
pub const EIGENSPACE_TOL: f64 = 1e-8;
/// Allowed relative residual of the Jordan-chain system.
pub const JORDAN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chain {
    Independent,
    Jordan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Lazy `ℓ²` eigenvector of `T(f)`: cell `m` (1-based) is
/// `α₁ z_a^{-(m−1)} v₁ + α₂ z_b^{-(m−1)} v₂` in the independent case and
/// `α₁ w^{m−1} v₁ + α₂ (w^{m−1} v₂ + (m−1) w^{m−2} v₁)`, `w = 1/z₁`, for a
/// Jordan chain.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorEigenvector {
    pub k: usize,
    pub lambda: Complex64,
    pub roots: RootPair,
    /// Root attached to `v1` and `v2` respectively (equal for double roots).
    pub z: [Complex64; 2],
    pub v1: Vec<Complex64>,
    pub v2: Vec<Complex64>,
    pub combo: [Complex64; 2],
    pub chain: Chain,
    /// `max 1/|zᵢ|`.
    pub rho: f64,
}

impl OperatorEigenvector {
    /// Cell `m ≥ 1` of component `which` (0 or 1) before combination.
    fn component_cell(&self, which: usize, m: usize) -> Vec<Complex64> {
        let pow = |z: Complex64, e: usize| (1.0 / z).powu(e as u32);
        match (self.chain, which) {
            (Chain::Independent, 0) => scale(&self.v1, pow(self.z[0], m - 1)),
            (Chain::Independent, _) => scale(&self.v2, pow(self.z[1], m - 1)),
            (Chain::Jordan, 0) => scale(&self.v1, pow(self.z[0], m - 1)),
            (Chain::Jordan, _) => {
                let mut cell = scale(&self.v2, pow(self.z[0], m - 1));
                if m >= 2 {
                    let t = pow(self.z[0], m - 2) * (m - 1) as f64;
                    cell.iter_mut().zip(&self.v1).for_each(|(c, v)| *c += t * v);
                }
                cell
            }
        }
    }

    pub fn cell(&self, m: usize) -> Vec<Complex64> {
        let a = self.component_cell(0, m);
        let b = self.component_cell(1, m);
        a.iter().zip(&b).map(|(x, y)| self.combo[0] * x + self.combo[1] * y).collect()
    }
}

fn scale(v: &[Complex64], s: Complex64) -> Vec<Complex64> {
    v.iter().map(|x| x * s).collect()
}

/// Right singular vectors of `m` for its smallest singular values (last
/// first), with all singular values in descending order.
fn null_vectors(m: &CMatrix) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let svd = Svd::new(m)?;
    let n = svd.sigma.len();
    let vectors = (0..n).rev().map(|j| svd.right_vector(j)).collect();
    Ok((svd.sigma, vectors))
}

/// Minimum-norm `v₂` with `M v₂ = −((A₀ − λ) + 2A₋₁ w) v₁`, where
/// `M = A₁ + (A₀ − λ) w + A₋₁ w²` and `w = 1/z₁`.
pub fn jordan_chain_vector(s: &SymbolCoeffs, lambda: Complex64, z1: Complex64, v1: &[Complex64]) -> Result<Vec<Complex64>> {
    if z1 == ZERO {
        return Err(Error::ZeroArgument);
    }
    let k = s.k();
    if v1.len() != k {
        return Err(Error::InvalidInput(format!("v1 has length {}, expected {k}", v1.len())));
    }
    let blocks = s.build_blocks();
    let w = 1.0 / z1;
    let shifted = blocks.a0.shifted(lambda);
    let m = blocks
        .a1
        .add(&shifted.scaled(w))?
        .add(&blocks.a_minus1.scaled(w * w))?;
    let d = shifted.add(&blocks.a_minus1.scaled(2.0 * w))?;
    let rhs: Vec<Complex64> = d.mul_vec(v1)?.into_iter().map(|x| -x).collect();
    let ls = solve_least_squares(&m, &rhs)?;
    let allowed = JORDAN_TOL * (1.0 + m.frobenius_norm() * vec_norm(v1) + vec_norm(&rhs));
    if ls.residual > allowed {
        return Err(Error::InconsistentSystem {
            residual: ls.residual,
            allowed,
        });
    }
    Ok(ls.solution)
}

/// Theorem-style construction of a decaying eigenvector of `T(f)` at `λ`.
/// Needs radius-1 winding −1, so both roots lie outside the unit circle.
pub fn operator_eigenvector(s: &SymbolCoeffs, lambda: Complex64) -> Result<OperatorEigenvector> {
    let winding = eigencurve_winding_sum(s, lambda)?;
    if winding >= 0 {
        return Err(Error::WrongWinding { winding });
    }
    let roots = s.quadratic_roots(lambda)?;
    let k = s.k();
    let (z, v1, v2, chain) = match roots.multiplicity {
        Multiplicity::Distinct => {
            let (_, n1) = null_vectors(&s.eval_symbol(roots.z1)?.shifted(lambda))?;
            let (_, n2) = null_vectors(&s.eval_symbol(roots.z2)?.shifted(lambda))?;
            ([roots.z1, roots.z2], n1[0].clone(), n2[0].clone(), Chain::Independent)
        }
        Multiplicity::Double => {
            let f = s.eval_symbol(roots.z1)?.shifted(lambda);
            let (sigma, nulls) = null_vectors(&f)?;
            let scale = 1.0 + f.frobenius_norm();
            if k >= 2 && sigma[k - 2] <= EIGENSPACE_TOL * scale {
                ([roots.z1, roots.z1], nulls[0].clone(), nulls[1].clone(), Chain::Independent)
            } else {
                let v1 = nulls[0].clone();
                let v2 = jordan_chain_vector(s, lambda, roots.z1, &v1)?;
                ([roots.z1, roots.z1], v1, v2, Chain::Jordan)
            }
        }
    };
    let mut ev = OperatorEigenvector {
        k,
        lambda,
        roots,
        z,
        v1,
        v2,
        combo: [ONE, ZERO],
        chain,
        rho: roots.rho(),
    };
    // first-row defects of the two components
    let blocks = s.build_blocks();
    let shifted = blocks.a0.shifted(lambda);
    let defect = |which: usize| -> Result<Complex64> {
        let c1 = ev.component_cell(which, 1);
        let c2 = ev.component_cell(which, 2);
        let r = shifted.mul_vec(&c1)?;
        let t = blocks.a_minus1.mul_vec(&c2)?;
        Ok(r[0] + t[0])
    };
    let (d1, d2) = (defect(0)?, defect(1)?);
    let norm = (d1.norm_sqr() + d2.norm_sqr()).sqrt();
    if norm > 0.0 {
        ev.combo = [d2 / norm, -d1 / norm];
    }
    Ok(ev)
}

/// The first `n` entries of the eigenvector, scaled so the largest modulus
/// is 1.
pub fn materialize(ev: &OperatorEigenvector, n: usize) -> Vec<Complex64> {
    let cells = n.div_ceil(ev.k);
    let mut x: Vec<Complex64> = (1..=cells).flat_map(|m| ev.cell(m)).take(n).collect();
    let peak = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak > 0.0 {
        x.iter_mut().for_each(|z| *z /= peak);
    }
    x
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoEigenvector {
    pub vector: Vec<Complex64>,
    pub side: Side,
    pub chain: Chain,
    pub rho: f64,
    /// `‖(A_N − λ)v‖ / ‖v‖`, computed in floating point (floors near 1e−16).
    pub residual: f64,
    /// The same ratio evaluated exactly from the truncation: only row `N`
    /// is defective, by `b_N x_{N+1}`.
    pub defect: f64,
    /// `defect / (ρ^{⌈N/k⌉−1} · (⌈N/k⌉ if Jordan))`: the fitted bound constant.
    pub constant: f64,
}

/// Truncation of the operator eigenvector to `N` entries, as a
/// pseudo-eigenvector of the finite section. Positive winding is handled by
/// building on the index-reversed section and flipping the result.
pub fn pseudo_eigenvector(s: &SymbolCoeffs, lambda: Complex64, n: usize) -> Result<PseudoEigenvector> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be positive".into()));
    }
    let winding = eigencurve_winding_sum(s, lambda)?;
    let (built_on, side) = match winding {
        w if w < 0 => (s.clone(), Side::Left),
        w if w > 0 => (s.mirrored(n), Side::Right),
        w => return Err(Error::WrongWinding { winding: w }),
    };
    let ev = operator_eigenvector(&built_on, lambda)?;
    let mut vector = materialize(&ev, n + 1);
    let next = vector.pop().unwrap_or(ZERO);
    let peak = vec_norm_inf(&vector);
    if peak > 0.0 {
        vector.iter_mut().for_each(|z| *z /= peak);
    }
    let defect = (built_on.b()[(n - 1) % s.k()] * next).norm() / (peak * vec_norm(&vector));
    if side == Side::Right {
        vector.reverse();
    }
    let res = residual(&s.finite_section(n), lambda, &vector)?;
    let cells = n.div_ceil(s.k());
    let mut factor = ev.rho.powi(cells as i32 - 1);
    if ev.chain == Chain::Jordan {
        factor *= cells as f64;
    }
    Ok(PseudoEigenvector {
        vector,
        side,
        chain: ev.chain,
        rho: ev.rho,
        residual: res,
        defect,
        constant: defect / factor,
    })
}

/// `‖(A − λ)v‖ / ‖v‖`.
pub fn residual(a: &CMatrix, lambda: Complex64, v: &[Complex64]) -> Result<f64> {
    let nv = vec_norm(v);
    if nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    let av = a.mul_vec(v)?;
    let r: Vec<Complex64> = av.iter().zip(v).map(|(x, y)| x - lambda * y).collect();
    Ok(vec_norm(&r) / nv)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    /// Per-cell maximum modulus, largest = 1, counted from `side`.
    #[serde(skip)]
    pub cell_max: Vec<f64>,
    #[serde(rename = "rho")]
    pub fitted_rho: f64,
    #[serde(rename = "logC")]
    pub fitted_log_c: f64,
    /// Half-open range of 0-based cell indices used by the fit.
    #[serde(rename = "window")]
    pub fit_window: (usize, usize),
    pub side: Side,
}

/// Fit `log cell_max_m ≈ log C + (m−1) log ρ` over all cells but the first
/// and last, skipping empty cells.
pub fn decay_profile(v: &[Complex64], k: usize, side: Side) -> Result<DecayProfile> {
    if k == 0 || v.len() < 4 * k {
        return Err(Error::InvalidInput(format!(
            "decay profile needs at least 4k = {} entries, got {}",
            4 * k,
            v.len()
        )));
    }
    let mut cell_max = cell_maxima(v, k, side);
    let peak = cell_max.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::ZeroVector);
    }
    cell_max.iter_mut().for_each(|c| *c /= peak);
    let window = (1, cell_max.len() - 1);
    let points: Vec<(f64, f64)> = (window.0..window.1)
        .filter(|&m| cell_max[m] > 0.0)
        .map(|m| (m as f64, cell_max[m].ln()))
        .collect();
    if points.len() < 2 {
        return Err(Error::InvalidInput("fewer than two nonzero cells in the fit window".into()));
    }
    let count = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / count;
    let my = points.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(DecayProfile {
        cell_max,
        fitted_rho: slope.exp(),
        fitted_log_c: my - slope * mx,
        fit_window: window,
        side,
    })
}

/// Per-cell maximum modulus; for `Side::Right` cells are counted from the
/// last entry.
pub fn cell_maxima(v: &[Complex64], k: usize, side: Side) -> Vec<f64> {
    let cell = |c: &[Complex64]| c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    match side {
        Side::Left => v.chunks(k).map(cell).collect(),
        Side::Right => v.rchunks(k).map(cell).collect(),
    }
}

/// Mode dump: columns `index, re, im, cell, cell_max` (1-based index and
/// cell counted from the left; `cell_max` normalized to 1).
pub fn write_mode_csv<W: Write>(v: &[Complex64], k: usize, out: W) -> Result<(), csv::Error> {
    let maxima = cell_maxima(v, k, Side::Left);
    let peak = maxima.iter().copied().fold(0.0, f64::max);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "re", "im", "cell", "cell_max"])?;
    for (i, z) in v.iter().enumerate() {
        let cell = i / k;
        let cm = if peak > 0.0 { maxima[cell] / peak } else { 0.0 };
        w.write_record([
            (i + 1).to_string(),
            z.re.to_string(),
            z.im.to_string(),
            (cell + 1).to_string(),
            cm.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
