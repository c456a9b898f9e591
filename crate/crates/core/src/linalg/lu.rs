use num_complex::Complex64;

use super::{CMatrix, LinalgError, ONE, ZERO};

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    factors: CMatrix,
    perm: Vec<usize>,
    sign: f64,
    /// Replacement for exactly-zero pivots, so singular systems still yield a
    /// (huge) solution. Inverse iteration depends on this.
    tiny_pivot: f64,
}

impl Lu {
    pub fn new(a: &CMatrix) -> Result<Self, LinalgError> {
        let n = a.ensure_square()?;
        a.ensure_finite()?;
        let mut m = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let scale = a.norm_inf().max(f64::MIN_POSITIVE);
        let tiny_pivot = f64::EPSILON * scale;

        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&i, &j| m[(i, col)].norm().total_cmp(&m[(j, col)].norm()).then(j.cmp(&i)))
                .unwrap_or(col);
            if pivot_row != col {
                for j in 0..n {
                    let tmp = m[(col, j)];
                    m[(col, j)] = m[(pivot_row, j)];
                    m[(pivot_row, j)] = tmp;
                }
                perm.swap(col, pivot_row);
                sign = -sign;
            }
            let pivot = m[(col, col)];
            if pivot == ZERO {
                continue;
            }
            for i in col + 1..n {
                let factor = m[(i, col)] / pivot;
                if factor == ZERO {
                    continue;
                }
                m[(i, col)] = factor;
                for j in col + 1..n {
                    let u = m[(col, j)];
                    m[(i, j)] -= factor * u;
                }
            }
        }
        Ok(Self {
            factors: m,
            perm,
            sign,
            tiny_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.factors.rows()
    }

    pub fn determinant(&self) -> Complex64 {
        let n = self.dim();
        (0..n).map(|i| self.factors[(i, i)]).fold(Complex64::new(self.sign, 0.0), |acc, d| acc * d)
    }

    fn pivot(&self, i: usize) -> Complex64 {
        let d = self.factors[(i, i)];
        if d == ZERO {
            Complex64::new(self.tiny_pivot, 0.0)
        } else {
            d
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
        let n = self.dim();
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                actual: b.len(),
            });
        }
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.factors[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.factors[(i, j)] * x[j];
            }
            x[i] = s / self.pivot(i);
        }
        Ok(x)
    }

    /// Solves `A^H x = b`.
    pub fn solve_adjoint(&self, b: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
        let n = self.dim();
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                actual: b.len(),
            });
        }
        // A^H = U^H L^H P, so solve U^H y = b, L^H w = y, x = P^T w.
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.factors[(j, i)].conj() * y[j];
            }
            y[i] = s / self.pivot(i).conj();
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.factors[(j, i)].conj() * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![ZERO; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        Ok(x)
    }
}

/// Determinant by LU with partial pivoting.
pub fn determinant(a: &CMatrix) -> Result<Complex64, LinalgError> {
    if a.rows() == 0 && a.cols() == 0 {
        return Ok(ONE);
    }
    Ok(Lu::new(a)?.determinant())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn determinant_of_small_matrices() {
        let a = CMatrix::from_real_rows(&[&[0.0, 1.5], &[1.5, 1.0]]).unwrap();
        assert!((determinant(&a).unwrap() - c(-2.25, 0.0)).norm() < 1e-14);
        let b = CMatrix::from_rows(&[
            vec![c(1.0, 2.0), c(0.0, 1.0), c(3.0, 0.0)],
            vec![c(2.0, 0.0), c(1.0, -1.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(4.0, 0.0), c(1.0, 1.0)],
        ])
        .unwrap();
        // cofactor expansion along the first row
        let expected = c(1.0, 2.0) * (c(1.0, -1.0) * c(1.0, 1.0) - c(0.0, 0.0))
            - c(0.0, 1.0) * (c(2.0, 0.0) * c(1.0, 1.0) - c(0.0, 0.0))
            + c(3.0, 0.0) * (c(2.0, 0.0) * c(4.0, 0.0) - c(1.0, -1.0) * c(0.0, 0.0));
        assert!((determinant(&b).unwrap() - expected).norm() < 1e-12);
    }

    #[test]
    fn solve_and_adjoint_solve() {
        let a = CMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(2.0, 1.0)],
            vec![c(1.0, 0.0), c(3.0, -1.0)],
        ])
        .unwrap();
        let lu = Lu::new(&a).unwrap();
        let b = vec![c(1.0, 0.0), c(0.0, 1.0)];
        let x = lu.solve(&b).unwrap();
        let r = a.mul_vec(&x).unwrap();
        assert!((r[0] - b[0]).norm() < 1e-14 && (r[1] - b[1]).norm() < 1e-14);
        let y = lu.solve_adjoint(&b).unwrap();
        let r = a.conj_transpose().mul_vec(&y).unwrap();
        assert!((r[0] - b[0]).norm() < 1e-14 && (r[1] - b[1]).norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_has_zero_determinant_and_still_solves() {
        let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        let lu = Lu::new(&a).unwrap();
        assert!(lu.determinant().norm() < 1e-14);
        let x = lu.solve(&[ONE, ONE]).unwrap();
        assert!(x.iter().all(|z| z.re.is_finite()));
    }
}
