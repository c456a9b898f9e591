use num_complex::Complex64;

use super::{CMatrix, LinalgError, ZERO};

const MAX_SWEEPS: usize = 80;
/// Relative cutoff below which singular values count as zero in
/// [`solve_least_squares`].
pub const DEFAULT_RCOND: f64 = 1e-10;

/// Thin singular value decomposition `A = U diag(sigma) V^H`.
///
/// `sigma` is sorted in descending order; `u` is `m x n`, `v` is `n x n`.
/// Columns of `u` for zero singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    /// One-sided (Hestenes) Jacobi: rotate column pairs of `A V` until they
    /// are mutually orthogonal.
    pub fn new(a: &CMatrix) -> Result<Self, LinalgError> {
        a.ensure_finite()?;
        let m = a.rows();
        let n = a.cols();
        // column-major working copies
        let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
        let mut vcols: Vec<Vec<Complex64>> = (0..n)
            .map(|j| {
                let mut e = vec![ZERO; n];
                e[j] = Complex64::new(1.0, 0.0);
                e
            })
            .collect();
        let tol = f64::EPSILON * (m.max(1) as f64).sqrt();

        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                    let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                    let gamma: Complex64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                    let g = gamma.norm();
                    if g == 0.0 || g <= tol * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let phase = gamma / g;
                    let zeta = (beta - alpha) / (2.0 * g);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    let sp = phase * s; // s e^{i phi}
                    let (left, right) = cols.split_at_mut(q);
                    rotate(&mut left[p], &mut right[0], c, sp);
                    let (left, right) = vcols.split_at_mut(q);
                    rotate(&mut left[p], &mut right[0], c, sp);
                }
            }
            if !rotated {
                break;
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
        order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

        let mut u = CMatrix::zeros(m, n);
        let mut v = CMatrix::zeros(n, n);
        let mut sigma = Vec::with_capacity(n);
        for (new_j, &old_j) in order.iter().enumerate() {
            let s = norms[old_j];
            sigma.push(s);
            for i in 0..m {
                u[(i, new_j)] = if s > 0.0 { cols[old_j][i] / s } else { ZERO };
            }
            for i in 0..n {
                v[(i, new_j)] = vcols[old_j][i];
            }
        }
        Ok(Self { u, sigma, v })
    }

    /// Right singular vector for the `j`-th largest singular value.
    pub fn right_vector(&self, j: usize) -> Vec<Complex64> {
        self.v.column(j)
    }
}

/// `[x, y] <- [x, y] [[c, s e^{i phi}], [-s e^{-i phi}, c]]`, with `sp = s e^{i phi}`.
fn rotate(x: &mut [Complex64], y: &mut [Complex64], c: f64, sp: Complex64) {
    let spc = sp.conj();
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let xa = *a;
        let yb = *b;
        *a = xa * c - spc * yb;
        *b = sp * xa + yb * c;
    }
}

pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>, LinalgError> {
    Ok(Svd::new(a)?.sigma)
}

/// Smallest singular value of a square matrix, i.e. `1 / ||A^{-1}||_2`.
pub fn smallest_singular_value(a: &CMatrix) -> Result<f64, LinalgError> {
    a.ensure_square()?;
    if a.rows() == 0 {
        return Ok(0.0);
    }
    let sigma = singular_values(a)?;
    Ok(*sigma.last().expect("non-empty"))
}

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: Vec<Complex64>,
    /// `||A x - b||_2` for the returned solution.
    pub residual: f64,
    pub rank: usize,
}

/// Minimum-norm least-squares solution of `A x = b` via the SVD, truncating
/// singular values below `DEFAULT_RCOND * sigma_max`.
pub fn solve_least_squares(a: &CMatrix, b: &[Complex64]) -> Result<LeastSquares, LinalgError> {
    if b.len() != a.rows() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.rows(),
            actual: b.len(),
        });
    }
    let n = a.cols();
    let svd = Svd::new(a)?;
    let cutoff = DEFAULT_RCOND * svd.sigma.first().copied().unwrap_or(0.0);
    let mut x = vec![ZERO; n];
    let mut rank = 0;
    for (j, &s) in svd.sigma.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            continue;
        }
        rank += 1;
        let coeff: Complex64 = (0..a.rows()).map(|i| svd.u[(i, j)].conj() * b[i]).sum::<Complex64>() / s;
        for i in 0..n {
            x[i] += svd.v[(i, j)] * coeff;
        }
    }
    let ax = a.mul_vec(&x)?;
    let residual = ax.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
    Ok(LeastSquares {
        solution: x,
        residual,
        rank,
    })
}
