//! Winding numbers of `z ↦ det(f(z) − λ)` on circles `|z| = r`.
//!
//! `z·det(f(z) − λ) = A z² + g(λ) z + B`, so the winding about 0 on `|z| = r`
//! is the number of quadratic roots inside the circle minus one (the simple
//! pole at the origin). Counterclockwise traversal is positive.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol::SymbolCoeffs;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Largest sample count the argument method will try.
pub const MAX_ARGUMENT_SAMPLES: usize = 1 << 18;
pub const MIN_ARGUMENT_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindingMethod {
    RootCount,
    ArgumentSum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingResult {
    pub winding: i32,
    pub method: WindingMethod,
    /// Distance from the nearest root modulus to the radius.
    pub guard: f64,
}

/// Classification of a point against the region of nonzero winding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "label", content = "winding", rename_all = "snake_case")]
pub enum Region {
    Inside(i32),
    OnSigmaDet,
    Outside,
}

impl Region {
    pub fn label(&self) -> &'static str {
        match self {
            Region::Inside(_) => "inside",
            Region::OnSigmaDet => "on_sigma_det",
            Region::Outside => "outside",
        }
    }

    /// Winding number, or `None` on the curve.
    pub fn winding(&self) -> Option<i32> {
        match *self {
            Region::Inside(w) => Some(w),
            Region::OnSigmaDet => None,
            Region::Outside => Some(0),
        }
    }
}

pub fn guard_tol(r: f64) -> f64 {
    1e-9 * (1.0 + r)
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {r}")));
    }
    Ok(())
}

/// Winding of `det(f(z) − λ)` on `|z| = r` by counting roots inside.
pub fn winding_at_radius(s: &SymbolCoeffs, lambda: Complex64, r: f64) -> Result<WindingResult> {
    check_radius(r)?;
    let roots = s.quadratic_roots(lambda)?;
    let moduli = [roots.z1.norm(), roots.z2.norm()];
    let guard = moduli.iter().map(|m| (m - r).abs()).fold(f64::INFINITY, f64::min);
    if guard <= guard_tol(r) {
        let modulus = moduli.into_iter().min_by(|x, y| (x - r).abs().total_cmp(&(y - r).abs())).unwrap();
        return Err(Error::OnBoundary { radius: r, modulus });
    }
    let inside = moduli.iter().filter(|&&m| m < r).count() as i32;
    Ok(WindingResult {
        winding: inside - 1,
        method: WindingMethod::RootCount,
        guard,
    })
}

/// Winding by accumulating the unwrapped argument of the closed-form
/// determinant around the circle. The sample count doubles (up to
/// [`MAX_ARGUMENT_SAMPLES`]) while any step exceeds π/2.
pub fn winding_via_argument(s: &SymbolCoeffs, lambda: Complex64, r: f64, samples: usize) -> Result<WindingResult> {
    if samples < MIN_ARGUMENT_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "argument method needs at least {MIN_ARGUMENT_SAMPLES} samples, got {samples}"
        )));
    }
    // shares the boundary guard (and its error) with the root count
    let guard = winding_at_radius(s, lambda, r)?.guard;
    let g = s.g_lambda(lambda);
    let (qa, qb) = (s.quad_a(), s.quad_b());
    let det = |theta: f64| {
        let z = Complex64::from_polar(r, theta);
        qa * z + qb / z + g
    };

    let mut n = samples;
    loop {
        let mut total = 0.0;
        let mut smooth = true;
        let mut prev = det(0.0);
        for m in 1..=n {
            let cur = if m == n { det(0.0) } else { det(2.0 * PI * m as f64 / n as f64) };
            if cur == ZERO || prev == ZERO {
                return Err(Error::OnBoundary { radius: r, modulus: r });
            }
            let step = (cur / prev).arg();
            if step.abs() > FRAC_PI_2 {
                smooth = false;
                break;
            }
            total += step;
            prev = cur;
        }
        if smooth {
            return Ok(WindingResult {
                winding: (total / (2.0 * PI)).round() as i32,
                method: WindingMethod::ArgumentSum,
                guard,
            });
        }
        if n >= MAX_ARGUMENT_SAMPLES {
            return Err(Error::UnwrapFailure { samples: n });
        }
        n = (2 * n).min(MAX_ARGUMENT_SAMPLES);
    }
}

/// Total winding of the eigenvalue curves `λ_j(T)` about `λ`, which equals
/// the radius-1 winding of the determinant.
pub fn eigencurve_winding_sum(s: &SymbolCoeffs, lambda: Complex64) -> Result<i32> {
    Ok(winding_at_radius(s, lambda, 1.0)?.winding)
}

/// Classify `λ` against `σ_det` and the nonzero-winding region. Never fails:
/// degenerate symbols (`∏b = 0` or `∏c = 0`) are handled by counting the
/// roots of the lower-degree numerator.
#[allow(non_snake_case)]
pub fn in_region_G(s: &SymbolCoeffs, lambda: Complex64) -> Region {
    let tol = guard_tol(1.0);
    let (qa, qb, g) = (s.quad_a(), s.quad_b(), s.g_lambda(lambda));
    let moduli: Vec<f64> = if qa != ZERO && qb != ZERO {
        match s.quadratic_roots(lambda) {
            Ok(roots) => vec![roots.z1.norm(), roots.z2.norm()],
            Err(_) => unreachable!("nondegenerate quadratic"),
        }
    } else if qa != ZERO {
        // z (A z + g): one root at the origin
        vec![0.0, (g / qa).norm()]
    } else if g != ZERO {
        vec![(qb / g).norm()]
    } else if qb != ZERO {
        vec![]
    } else {
        // det(f(z) − λ) vanishes identically
        return Region::OnSigmaDet;
    };
    if moduli.iter().any(|m| (m - 1.0).abs() <= tol) {
        return Region::OnSigmaDet;
    }
    let w = moduli.iter().filter(|&&m| m < 1.0).count() as i32 - 1;
    if w == 0 {
        Region::Outside
    } else {
        Region::Inside(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn coburn(b2: f64) -> SymbolCoeffs {
        SymbolCoeffs::from_real(&[0.0, 1.0], &[1.0, b2], &[1.0, b2]).unwrap()
    }

    fn ellipse() -> SymbolCoeffs {
        SymbolCoeffs::from_real(&[0.0], &[0.5], &[2.0]).unwrap()
    }

    #[test]
    fn root_count_examples() {
        assert_eq!(winding_at_radius(&coburn(0.5), r(0.0), 1.0).unwrap().winding, 0);
        assert_eq!(winding_at_radius(&coburn(0.5), r(0.0), 0.25).unwrap().winding, -1);
        let w = winding_at_radius(&ellipse(), r(0.0), 1.0).unwrap();
        assert_eq!(w.winding, 1);
        assert!((w.guard - 0.5).abs() < 1e-14);
        assert!(matches!(
            winding_at_radius(&coburn(0.5), r(0.0), 0.5),
            Err(Error::OnBoundary { .. })
        ));
    }

    #[test]
    fn argument_examples() {
        for s in [coburn(2.0), coburn(0.5)] {
            let w = winding_via_argument(&s, r(0.0), 1.0, 256).unwrap();
            assert_eq!((w.winding, w.method), (0, WindingMethod::ArgumentSum));
        }
        assert_eq!(winding_via_argument(&ellipse(), r(0.0), 1.0, 256).unwrap().winding, 1);
        assert!(winding_via_argument(&ellipse(), r(0.0), 1.0, 100).is_err());
    }

    #[test]
    fn argument_refines_near_the_curve() {
        // root modulus 1.001: the determinant nearly vanishes on the circle
        let s = SymbolCoeffs::from_real(&[0.0], &[1.001], &[1.0]).unwrap();
        let lambda = r(0.0);
        let a = winding_at_radius(&s, lambda, 1.0).unwrap();
        let b = winding_via_argument(&s, lambda, 1.0, 256).unwrap();
        assert_eq!(a.winding, b.winding);
    }

    #[test]
    fn eigencurve_sum_examples() {
        assert_eq!(eigencurve_winding_sum(&coburn(0.5), r(0.0)).unwrap(), 0);
        assert_eq!(eigencurve_winding_sum(&coburn(0.5), Complex64::new(40.0, -30.0)).unwrap(), 0);
    }

    #[test]
    fn region_examples() {
        assert_eq!(in_region_G(&coburn(2.0), r(0.0)), Region::Outside);
        let symmetric = SymbolCoeffs::from_real(&[0.0], &[1.0], &[1.0]).unwrap();
        assert_eq!(in_region_G(&symmetric, r(0.0)), Region::OnSigmaDet);
        assert_eq!(in_region_G(&ellipse(), r(0.0)), Region::Inside(1));
    }

    #[test]
    fn region_handles_degenerate_symbols() {
        // f(z) = 2 z: the curve is the circle |λ| = 2
        let s = SymbolCoeffs::from_real(&[0.0], &[0.0], &[2.0]).unwrap();
        assert_eq!(in_region_G(&s, r(0.0)), Region::Inside(1));
        assert_eq!(in_region_G(&s, r(3.0)), Region::Outside);
        assert_eq!(in_region_G(&s, r(2.0)), Region::OnSigmaDet);
        // f(z) = z⁻¹
        let s = SymbolCoeffs::from_real(&[0.0], &[1.0], &[0.0]).unwrap();
        assert_eq!(in_region_G(&s, r(0.5)), Region::Inside(-1));
        assert_eq!(in_region_G(&s, r(1.5)), Region::Outside);
        // f ≡ 1
        let s = SymbolCoeffs::from_real(&[1.0], &[0.0], &[0.0]).unwrap();
        assert_eq!(in_region_G(&s, r(1.0)), Region::OnSigmaDet);
        assert_eq!(in_region_G(&s, r(0.0)), Region::Outside);
    }
}
