use num_complex::Complex64;

use super::eig::eigvals;
use super::{cmp_complex, CMatrix, LinalgError, ONE, ZERO};

const NEWTON_STEPS: usize = 3;

/// Horner evaluation; `coeffs[0]` is the leading coefficient.
pub fn poly_eval(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs.iter().fold(ZERO, |acc, &c| acc * x + c)
}

fn poly_eval_with_derivative(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// All roots of a polynomial with coefficients in descending degree order.
///
/// Leading zeros are trimmed. Roots are eigenvalues of the companion matrix,
/// each polished by a few guarded Newton steps, and returned sorted by
/// (real, imaginary).
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
    let start = coeffs.iter().position(|c| *c != ZERO).ok_or(LinalgError::ZeroPolynomial)?;
    let p = &coeffs[start..];
    let degree = p.len() - 1;
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = p[0];
    let mut companion = CMatrix::zeros(degree, degree);
    for j in 0..degree {
        companion[(0, j)] = -p[j + 1] / lead;
    }
    for i in 1..degree {
        companion[(i, i - 1)] = ONE;
    }
    let mut roots = eigvals(&companion)?;
    for r in roots.iter_mut() {
        for _ in 0..NEWTON_STEPS {
            let (value, slope) = poly_eval_with_derivative(p, *r);
            if value == ZERO || slope == ZERO {
                break;
            }
            let candidate = *r - value / slope;
            if !(candidate.re.is_finite() && candidate.im.is_finite()) {
                break;
            }
            if poly_eval(p, candidate).norm() < value.norm() {
                *r = candidate;
            } else {
                break;
            }
        }
    }
    roots.sort_by(cmp_complex);
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn quadratic_examples() {
        let roots = poly_roots(&[r(1.0), r(0.0), r(-1.0)]).unwrap();
        assert!((roots[0] - r(-1.0)).norm() < 1e-14 && (roots[1] - r(1.0)).norm() < 1e-14);
        let roots = poly_roots(&[r(2.0), r(5.0), r(2.0)]).unwrap();
        assert!((roots[0] - r(-2.0)).norm() < 1e-14 && (roots[1] - r(-0.5)).norm() < 1e-14);
    }

    #[test]
    fn triple_root_at_zero() {
        let roots = poly_roots(&[r(1.0), r(0.0), r(0.0), r(0.0)]).unwrap();
        assert_eq!(roots.len(), 3);
        assert!(roots.iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn leading_zeros_are_trimmed_and_zero_rejected() {
        let roots = poly_roots(&[r(0.0), r(1.0), r(-3.0)]).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - r(3.0)).norm() < 1e-14);
        assert_eq!(poly_roots(&[r(0.0), r(0.0)]), Err(LinalgError::ZeroPolynomial));
        assert!(poly_roots(&[r(4.0)]).unwrap().is_empty());
    }
}
