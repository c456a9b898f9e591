//! Spectral sets: `σ_det` curves, `σ(B₀)`, the spectrum sandwich, the
//! forward-recurrence kernel test, circulant (Laurent) oracles and
//! pseudospectrum grids.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cmp_complex, eigvals, schur, vec_norm, CMatrix};
use crate::symbol::SymbolCoeffs;
use crate::winding::{in_region_G, winding_at_radius, Region};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub const MIN_SIGMA_DET_SAMPLES: usize = 64;
/// Distance to `σ(B₀)` below which a winding-zero point is a B₀ candidate.
pub const B0_TOL: f64 = 1e-8;
/// Ratio tolerance of the forward-recurrence verdict.
pub const RECURRENCE_RATIO_TOL: f64 = 0.05;
/// Default recurrence length is this many cells.
pub const RECURRENCE_CELLS: usize = 60;
pub const DEFAULT_RESOLUTION: usize = 201;
pub const MIN_RESOLUTION: usize = 32;
/// Grid bounds extend the `σ_det` bounding box by this fraction on each side.
pub const GRID_INFLATION: f64 = 0.25;

/// Eigenvalues of `f(e^{iθ_m})` for `θ_m = 2πm/samples`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaDetSample {
    pub k: usize,
    pub thetas: Vec<f64>,
    /// `values[m*k + j]` is branch `j` at `thetas[m]` (branches sorted by
    /// real, then imaginary part at each angle).
    pub values: Vec<Complex64>,
}

impl SigmaDetSample {
    pub fn at(&self, m: usize) -> &[Complex64] {
        &self.values[m * self.k..(m + 1) * self.k]
    }

    /// Distance from `λ` to the nearest sample value.
    pub fn distance(&self, lambda: Complex64) -> f64 {
        self.values.iter().map(|v| (v - lambda).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Distance from `λ` to the sampled curves, treating consecutive
    /// samples of each branch as line segments.
    pub fn curve_distance(&self, lambda: Complex64) -> f64 {
        let n = self.thetas.len();
        let mut best = self.distance(lambda);
        for m in 0..n {
            let next = (m + 1) % n;
            for &p in self.at(m) {
                // branch labels may swap between angles; use the nearest
                // value at the next angle as the segment end
                let q = self
                    .at(next)
                    .iter()
                    .copied()
                    .min_by(|x, y| (x - p).norm().total_cmp(&(y - p).norm()))
                    .unwrap_or(p);
                best = best.min(segment_distance(lambda, p, q));
            }
        }
        best
    }

    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        self.values.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(x0, x1, y0, y1), v| (x0.min(v.re), x1.max(v.re), y0.min(v.im), y1.max(v.im)),
        )
    }
}

fn segment_distance(x: Complex64, p: Complex64, q: Complex64) -> f64 {
    let d = q - p;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (x - p).norm();
    }
    let t = (((x - p) * d.conj()).re / len2).clamp(0.0, 1.0);
    (x - (p + d * t)).norm()
}

pub fn sigma_det_sample(s: &SymbolCoeffs, samples: usize) -> Result<SigmaDetSample> {
    if samples < MIN_SIGMA_DET_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "need at least {MIN_SIGMA_DET_SAMPLES} samples, got {samples}"
        )));
    }
    let thetas: Vec<f64> = (0..samples).map(|m| 2.0 * PI * m as f64 / samples as f64).collect();
    let per_angle: Vec<Vec<Complex64>> = thetas
        .par_iter()
        .map(|&theta| -> Result<Vec<Complex64>> {
            let f = s.eval_symbol(Complex64::from_polar(1.0, theta))?;
            Ok(eigvals(&f)?)
        })
        .collect::<Result<_>>()?;
    Ok(SigmaDetSample {
        k: s.k(),
        thetas,
        values: per_angle.into_iter().flatten().collect(),
    })
}

/// The spectrum of the Laurent operator `L(f)` is `σ_det(f)`; same samples.
pub fn laurent_spectrum_sample(s: &SymbolCoeffs, samples: usize) -> Result<SigmaDetSample> {
    sigma_det_sample(s, samples)
}

/// Eigenvalues of the leading `(k−1) x (k−1)` block of `A₀` (empty for `k = 1`).
pub fn sigma_b0(s: &SymbolCoeffs) -> Result<Vec<Complex64>> {
    let k = s.k();
    if k == 1 {
        return Ok(Vec::new());
    }
    let minor = s.build_blocks().a0.leading_minor(k - 1);
    Ok(eigvals(&minor)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumLabel {
    InSpectrumEssential,
    InSpectrumWinding,
    CandidateB0,
    NotInSpectrum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumClassification {
    pub label: SpectrumLabel,
    /// Radius-1 winding; 0 on `σ_det` where it is undefined.
    pub winding: i32,
    pub b0_eigs: Vec<Complex64>,
}

/// Place `λ` in the sandwich `σ_det ∪ σ_wind ⊂ σ(T) ⊂ σ_det ∪ σ_wind ∪ σ(B₀)`.
pub fn classify_spectrum_point(s: &SymbolCoeffs, lambda: Complex64) -> Result<SpectrumClassification> {
    let b0_eigs = sigma_b0(s)?;
    let (label, winding) = match winding_at_radius(s, lambda, 1.0) {
        Err(Error::OnBoundary { .. }) => (SpectrumLabel::InSpectrumEssential, 0),
        Err(e) => return Err(e),
        Ok(w) if w.winding != 0 => (SpectrumLabel::InSpectrumWinding, w.winding),
        Ok(_) => {
            let tol = B0_TOL * (1.0 + lambda.norm());
            if b0_eigs.iter().any(|e| (e - lambda).norm() <= tol) {
                (SpectrumLabel::CandidateB0, 0)
            } else {
                (SpectrumLabel::NotInSpectrum, 0)
            }
        }
    };
    Ok(SpectrumClassification { label, winding, b0_eigs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecurrenceVerdict {
    Ell2Decay,
    Growth,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardRecurrence {
    pub vector: Vec<Complex64>,
    pub verdict: RecurrenceVerdict,
    /// Geometric-mean growth of the per-cell maximum over the verdict window.
    pub ratio: Option<f64>,
}

/// Solve `(T(f) − λ) u = 0` row by row from `u₁ = 1`. The verdict compares
/// the per-cell maxima of the final two windows of `w = max(2, cells/3)`
/// cells: the per-cell ratio is `(M_last / M_prev)^{1/w}`.
pub fn kernel_forward_recurrence(s: &SymbolCoeffs, lambda: Complex64, n: usize) -> Result<ForwardRecurrence> {
    let k = s.k();
    let (a, b, c) = (s.a(), s.b(), s.c());
    let mut u = Vec::with_capacity(n);
    if n > 0 {
        u.push(Complex64::new(1.0, 0.0));
    }
    let mut overflow = false;
    for m in 1..n {
        // row m (1-based) determines u_{m+1}
        let row = m - 1;
        let bm = b[row % k];
        if bm == ZERO {
            return Err(Error::VanishingCoefficient { row: m });
        }
        let back = if row == 0 { ZERO } else { c[(row - 1) % k] * u[row - 1] };
        let next = ((lambda - a[row % k]) * u[row] - back) / bm;
        if !(next.re.is_finite() && next.im.is_finite()) {
            overflow = true;
            break;
        }
        u.push(next);
    }
    if overflow {
        u.resize(n, Complex64::new(f64::INFINITY, 0.0));
        return Ok(ForwardRecurrence {
            vector: u,
            verdict: RecurrenceVerdict::Growth,
            ratio: None,
        });
    }
    let (verdict, ratio) = recurrence_verdict(&u, k);
    Ok(ForwardRecurrence { vector: u, verdict, ratio })
}

pub fn default_recurrence_length(s: &SymbolCoeffs) -> usize {
    RECURRENCE_CELLS * s.k()
}

fn cell_maxima(v: &[Complex64], k: usize) -> Vec<f64> {
    v.chunks(k).map(|cell| cell.iter().map(|z| z.norm()).fold(0.0, f64::max)).collect()
}

fn recurrence_verdict(u: &[Complex64], k: usize) -> (RecurrenceVerdict, Option<f64>) {
    let maxima = cell_maxima(u, k);
    let cells = maxima.len();
    let w = (cells / 3).max(2).min(cells / 2);
    if w == 0 {
        return (RecurrenceVerdict::Inconclusive, None);
    }
    let window_max = |lo: usize, hi: usize| maxima[lo..hi].iter().copied().fold(0.0, f64::max);
    let prev = window_max(cells - 2 * w, cells - w);
    let last = window_max(cells - w, cells);
    if prev == 0.0 {
        let verdict = if last > 0.0 { RecurrenceVerdict::Growth } else { RecurrenceVerdict::Inconclusive };
        return (verdict, None);
    }
    let ratio = (last / prev).powf(1.0 / w as f64);
    let verdict = if ratio < 1.0 - RECURRENCE_RATIO_TOL {
        RecurrenceVerdict::Ell2Decay
    } else if ratio > 1.0 + RECURRENCE_RATIO_TOL {
        RecurrenceVerdict::Growth
    } else {
        RecurrenceVerdict::Inconclusive
    };
    (verdict, Some(ratio))
}

/// Eigenvalues of the periodic `(cells·k)`-dimensional truncation, computed
/// densely. Sorted by (real, imaginary).
pub fn block_circulant_eigs(s: &SymbolCoeffs, cells: usize) -> Result<Vec<Complex64>> {
    if cells < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 cells, got {cells}")));
    }
    Ok(eigvals(&s.periodic_section(cells))?)
}

/// `∪_j eig(f(ω_j))` over the `cells`-th roots of unity. Sorted.
pub fn symbol_circulant_eigs(s: &SymbolCoeffs, cells: usize) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(cells * s.k());
    for j in 0..cells {
        let omega = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / cells as f64);
        out.extend(eigvals(&s.eval_symbol(omega)?)?);
    }
    out.sort_by(cmp_complex);
    Ok(out)
}

/// Largest distance in an optimal-greedy matching of two equal-size
/// multisets (each value of `xs` takes its nearest unused partner in `ys`).
pub fn multiset_distance(xs: &[Complex64], ys: &[Complex64]) -> f64 {
    if xs.len() != ys.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; ys.len()];
    let mut worst: f64 = 0.0;
    for x in xs {
        let best = ys
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|(_, p), (_, q)| (*p - x).norm().total_cmp(&(*q - x).norm()))
            .map(|(i, _)| i);
        match best {
            Some(i) => {
                used[i] = true;
                worst = worst.max((ys[i] - x).norm());
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

/// Rectangular λ-grid; nodes include the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(re: (f64, f64), im: (f64, f64), resolution: usize) -> Result<Self> {
        let spec = Self {
            re_min: re.0,
            re_max: re.1,
            im_min: im.0,
            im_max: im.1,
            nx: resolution,
            ny: resolution,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Bounding box of the samples, extended by [`GRID_INFLATION`] of the
    /// larger half-extent on every side.
    pub fn around(sample: &SigmaDetSample, resolution: usize) -> Result<Self> {
        let (x0, x1, y0, y1) = sample.bounding_box();
        let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
        let (hx, hy) = ((x1 - x0) / 2.0, (y1 - y0) / 2.0);
        let pad = GRID_INFLATION * hx.max(hy).max(1e-3);
        Self::new((cx - hx - pad, cx + hx + pad), (cy - hy - pad, cy + hy + pad), resolution)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < MIN_RESOLUTION || self.ny < MIN_RESOLUTION {
            return Err(Error::InvalidInput(format!(
                "grid resolution {}x{} below the minimum {MIN_RESOLUTION}",
                self.nx, self.ny
            )));
        }
        let ok = [self.re_min, self.re_max, self.im_min, self.im_max].iter().all(|v| v.is_finite())
            && self.re_min < self.re_max
            && self.im_min < self.im_max;
        if !ok {
            return Err(Error::InvalidInput("grid bounds must be finite with min < max".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn re_at(&self, ix: usize) -> f64 {
        self.re_min + (self.re_max - self.re_min) * ix as f64 / (self.nx - 1) as f64
    }

    pub fn im_at(&self, iy: usize) -> f64 {
        self.im_min + (self.im_max - self.im_min) * iy as f64 / (self.ny - 1) as f64
    }

    /// Node `idx`, row-major with the real part varying fastest.
    pub fn point(&self, idx: usize) -> Complex64 {
        Complex64::new(self.re_at(idx % self.nx), self.im_at(idx / self.nx))
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedGrid {
    pub spec: GridSpec,
    pub regions: Option<Vec<Region>>,
    pub sigma_min: Option<Vec<f64>>,
}

impl ClassifiedGrid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec,
            regions: None,
            sigma_min: None,
        })
    }

    /// Fill the region layer from the symbol.
    pub fn classify(mut self, s: &SymbolCoeffs) -> Self {
        let spec = self.spec;
        self.regions = Some((0..spec.len()).into_par_iter().map(|i| in_region_G(s, spec.point(i))).collect());
        self
    }

    /// Fill the `σ_min(A − λ)` layer.
    pub fn with_sigma_min(mut self, a: &CMatrix) -> Result<Self> {
        let resolvent = ResolventNorm::new(a)?;
        let spec = self.spec;
        self.sigma_min = Some((0..spec.len()).into_par_iter().map(|i| resolvent.sigma_min(spec.point(i))).collect());
        Ok(self)
    }

    pub fn summary(&self, epsilons: &[f64]) -> GridSummary {
        let mut counts = RegionCounts::default();
        if let Some(regions) = &self.regions {
            for r in regions {
                match r {
                    Region::Inside(w) if *w < 0 => counts.inside_negative += 1,
                    Region::Inside(_) => counts.inside_positive += 1,
                    Region::OnSigmaDet => counts.on_sigma_det += 1,
                    Region::Outside => counts.outside += 1,
                }
            }
        }
        let levels = match &self.sigma_min {
            Some(sig) => epsilons
                .iter()
                .map(|&eps| EpsilonLevel {
                    epsilon: eps,
                    nodes_below: sig.iter().filter(|&&v| v <= eps).count(),
                    edge_crossings: self.edge_crossings(sig, eps),
                })
                .collect(),
            None => Vec::new(),
        };
        GridSummary {
            spec: self.spec,
            regions: counts,
            epsilon_levels: levels,
        }
    }

    fn edge_crossings(&self, sig: &[f64], eps: f64) -> usize {
        let (nx, ny) = (self.spec.nx, self.spec.ny);
        let below = |i: usize| sig[i] <= eps;
        let mut n = 0;
        for iy in 0..ny {
            for ix in 0..nx {
                let i = iy * nx + ix;
                if ix + 1 < nx && below(i) != below(i + 1) {
                    n += 1;
                }
                if iy + 1 < ny && below(i) != below(i + nx) {
                    n += 1;
                }
            }
        }
        n
    }

    /// CSV with columns `re, im, label, winding, sigma_min`; absent layers
    /// leave their cells empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["re", "im", "label", "winding", "sigma_min"])?;
        for i in 0..self.spec.len() {
            let p = self.spec.point(i);
            let (label, winding) = match &self.regions {
                Some(r) => (r[i].label().to_string(), r[i].winding().map(|w| w.to_string()).unwrap_or_default()),
                None => (String::new(), String::new()),
            };
            let sigma = self.sigma_min.as_ref().map(|s| s[i].to_string()).unwrap_or_default();
            w.write_record([p.re.to_string(), p.im.to_string(), label, winding, sigma])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionCounts {
    pub inside_negative: usize,
    pub inside_positive: usize,
    pub on_sigma_det: usize,
    pub outside: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonLevel {
    pub epsilon: f64,
    pub nodes_below: usize,
    /// Grid edges whose endpoints lie on opposite sides of the level.
    pub edge_crossings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub spec: GridSpec,
    pub regions: RegionCounts,
    pub epsilon_levels: Vec<EpsilonLevel>,
}

/// `σ_min(A − λ)` evaluated on many shifts. `A = Z T Z^H` is reduced to
/// Schur form once; for each shift, Lanczos on `((T − λ)^H (T − λ))^{-1}`
/// (two triangular solves per step, full reorthogonalization) finds its
/// largest eigenvalue `1/σ_min²`.
pub struct ResolventNorm {
    t: CMatrix,
}

const LANCZOS_MAX_STEPS: usize = 80;
const LANCZOS_RTOL: f64 = 1e-13;

impl ResolventNorm {
    pub fn new(a: &CMatrix) -> Result<Self> {
        Ok(Self { t: schur(a)?.t })
    }

    pub fn dim(&self) -> usize {
        self.t.rows()
    }

    pub fn sigma_min(&self, lambda: Complex64) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 0.0;
        }
        let diag: Vec<Complex64> = (0..n).map(|i| self.t[(i, i)] - lambda).collect();
        if diag.iter().any(|d| *d == ZERO) {
            return 0.0;
        }
        // deterministic start with no special alignment
        let mut q: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + 0.5 * (0.7 * i as f64).cos(), 0.3 * (1.3 * i as f64).sin()))
            .collect();
        let nq = vec_norm(&q);
        q.iter_mut().for_each(|z| *z /= nq);

        let mut basis: Vec<Vec<Complex64>> = Vec::new();
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut theta = 0.0;
        let mut settled = 0;
        for _ in 0..LANCZOS_MAX_STEPS.min(n) {
            let y = self.solve_adjoint(&diag, &q);
            let mut w = self.solve(&diag, &y);
            if w.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return 0.0;
            }
            let a = crate::linalg::vec_dot(&q, &w).re;
            alpha.push(a);
            basis.push(q);
            // full reorthogonalization (twice is enough)
            for _ in 0..2 {
                for b in &basis {
                    let h = crate::linalg::vec_dot(b, &w);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= h * y);
                }
            }
            let next = largest_tridiagonal_eigenvalue(&alpha, &beta);
            let converged = (next - theta).abs() <= LANCZOS_RTOL * next;
            theta = next;
            settled = if converged { settled + 1 } else { 0 };
            let bnorm = vec_norm(&w);
            if settled >= 2 || bnorm <= f64::EPSILON * theta {
                break;
            }
            beta.push(bnorm);
            q = w.into_iter().map(|z| z / bnorm).collect();
        }
        if theta.is_finite() && theta > 0.0 {
            1.0 / theta.sqrt()
        } else {
            0.0
        }
    }

    /// `(T − λ) w = y`, upper triangular.
    fn solve(&self, diag: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
        let n = y.len();
        let mut w = y.to_vec();
        for i in (0..n).rev() {
            let mut s = w[i];
            for j in i + 1..n {
                s -= self.t[(i, j)] * w[j];
            }
            w[i] = s / diag[i];
        }
        w
    }

    /// `(T − λ)^H y = x`, lower triangular.
    fn solve_adjoint(&self, diag: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        let mut y = x.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.t[(j, i)].conj() * y[j];
            }
            y[i] = s / diag[i].conj();
        }
        y
    }
}

/// Largest eigenvalue of the real symmetric tridiagonal matrix with
/// diagonal `alpha` and off-diagonal `beta`, by Sturm-sequence bisection.
fn largest_tridiagonal_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let n = alpha.len();
    let off = |i: usize| if i < beta.len() { beta[i].abs() } else { 0.0 };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let r = off(i) + if i > 0 { off(i - 1) } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    // number of eigenvalues strictly greater than x
    let count_above = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..n {
            let b2 = if i > 0 { off(i - 1).powi(2) } else { 0.0 };
            d = alpha[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = f64::MIN_POSITIVE;
            }
            if d > 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_above(mid) >= 1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `σ_min(A − λ)` on every node of `spec`.
pub fn pseudospectrum_grid(a: &CMatrix, spec: GridSpec) -> Result<ClassifiedGrid> {
    a.ensure_square()?;
    ClassifiedGrid::new(spec)?.with_sigma_min(a)
}
