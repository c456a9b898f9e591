use num_complex::Complex64;

use super::lu::Lu;
use super::{cmp_complex, fix_phase, normalize, vec_norm, CMatrix, LinalgError, ONE, ZERO};

/// Iterations allowed per eigenvalue before the QR sweep gives up.
const ITERATIONS_PER_EIGENVALUE: usize = 40;
const INVERSE_ITERATION_STEPS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: Complex64,
    /// Unit Euclidean norm, largest entry rotated to the positive real axis.
    pub vector: Vec<Complex64>,
}

/// Complex Schur form `A = Z T Z^H` with `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur {
    pub t: CMatrix,
    pub z: CMatrix,
}

/// Diagonal similarity `D^{-1} A D` equalizing row and column norms, with
/// power-of-two factors so the scaling itself is exact.
fn balance(a: &CMatrix) -> (CMatrix, Vec<f64>) {
    const RADIX: f64 = 2.0;
    let n = a.rows();
    let mut m = a.clone();
    let mut d = vec![1.0; n];
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 200 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let total = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
                g = r / RADIX;
                if f > 1e150 {
                    break;
                }
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= RADIX * RADIX;
                if f < 1e-150 {
                    break;
                }
            }
            if (c + r) / f < 0.95 * total {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
    (m, d)
}

/// Householder reduction to upper Hessenberg form; returns (H, Q) with A = Q H Q^H.
fn hessenberg(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = CMatrix::identity(n);
    if n < 3 {
        return (h, q);
    }
    let mut v = vec![ZERO; n];
    for col in 0..n - 2 {
        let start = col + 1;
        let xnorm = (start..n).map(|i| h[(i, col)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(start, col)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * xnorm;
        for i in 0..n {
            v[i] = if i < start { ZERO } else { h[(i, col)] };
        }
        v[start] -= alpha;
        let vnorm = vec_norm(&v[start..]);
        if vnorm == 0.0 {
            continue;
        }
        for z in v[start..].iter_mut() {
            *z /= vnorm;
        }
        // H <- P H
        for j in 0..n {
            let s: Complex64 = (start..n).map(|i| v[i].conj() * h[(i, j)]).sum();
            let s2 = s * 2.0;
            for i in start..n {
                h[(i, j)] -= v[i] * s2;
            }
        }
        // H <- H P, Q <- Q P
        for i in 0..n {
            let s: Complex64 = (start..n).map(|j| h[(i, j)] * v[j]).sum();
            let s2 = s * 2.0;
            for j in start..n {
                h[(i, j)] -= s2 * v[j].conj();
            }
            let s: Complex64 = (start..n).map(|j| q[(i, j)] * v[j]).sum();
            let s2 = s * 2.0;
            for j in start..n {
                q[(i, j)] -= s2 * v[j].conj();
            }
        }
        for i in col + 2..n {
            h[(i, col)] = ZERO;
        }
    }
    (h, q)
}

/// Givens rotation (c real) with `G [x; y] = [r; 0]`, `G = [[c, s], [-conj(s), c]]`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, ONE);
    }
    let r = ax.hypot(ay);
    let alpha = x / ax;
    (ax / r, alpha * y.conj() / r)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Shifted QR on an upper Hessenberg matrix, in place, producing the full
/// triangular Schur factor. Rotations are accumulated into `z` when given.
fn hessenberg_qr(h: &mut CMatrix, mut z: Option<&mut CMatrix>) -> Result<(), LinalgError> {
    let n = h.rows();
    if n < 2 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let norm = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let budget = ITERATIONS_PER_EIGENVALUE * n;
    let mut total = 0usize;
    let mut hi = n - 1;
    let mut iter = 0usize;

    while hi > 0 {
        // locate the start of the active unreduced block
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if s == 0.0 {
                s = norm;
            }
            if sub <= eps * s || sub < f64::MIN_POSITIVE * 1e3 {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        total += 1;
        iter += 1;
        if total > budget {
            return Err(LinalgError::NoConvergence {
                sweeps: budget,
                index: hi,
            });
        }

        let mu = if iter % 10 == 0 {
            // exceptional shift to break cycles
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].re.abs() + h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        let mut x = h[(lo, lo)] - mu;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            if k > lo {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let first_col = if k > lo { k - 1 } else { lo };
            for j in first_col..n {
                let t1 = h[(k, j)];
                let t2 = h[(k + 1, j)];
                h[(k, j)] = t1 * c + s * t2;
                h[(k + 1, j)] = -s.conj() * t1 + t2 * c;
            }
            if k > lo {
                h[(k + 1, k - 1)] = ZERO;
            }
            let last_row = (k + 2).min(hi);
            for i in 0..=last_row {
                let t1 = h[(i, k)];
                let t2 = h[(i, k + 1)];
                h[(i, k)] = t1 * c + s.conj() * t2;
                h[(i, k + 1)] = -s * t1 + t2 * c;
            }
            if let Some(z) = z.as_deref_mut() {
                for i in 0..n {
                    let t1 = z[(i, k)];
                    let t2 = z[(i, k + 1)];
                    z[(i, k)] = t1 * c + s.conj() * t2;
                    z[(i, k + 1)] = -s * t1 + t2 * c;
                }
            }
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok(())
}

/// Complex Schur decomposition without balancing (unitary similarity only).
pub fn schur(a: &CMatrix) -> Result<Schur, LinalgError> {
    a.ensure_square()?;
    a.ensure_finite()?;
    let (mut t, mut z) = hessenberg(a);
    hessenberg_qr(&mut t, Some(&mut z))?;
    Ok(Schur { t, z })
}

/// Eigenvalues only, sorted by (real, imaginary).
pub fn eigvals(a: &CMatrix) -> Result<Vec<Complex64>, LinalgError> {
    let n = a.ensure_square()?;
    a.ensure_finite()?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let (b, _) = balance(a);
    let (mut h, _) = hessenberg(&b);
    hessenberg_qr(&mut h, None)?;
    let mut values: Vec<Complex64> = (0..n).map(|i| h[(i, i)]).collect();
    values.sort_by(cmp_complex);
    Ok(values)
}

/// Eigenvector of the triangular factor for diagonal index `i`.
fn triangular_eigenvector(t: &CMatrix, i: usize) -> Vec<Complex64> {
    let n = t.rows();
    let lambda = t[(i, i)];
    let small = f64::EPSILON * t.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut y = vec![ZERO; n];
    y[i] = ONE;
    for j in (0..i).rev() {
        let s: Complex64 = (j + 1..=i).map(|l| t[(j, l)] * y[l]).sum();
        let mut d = t[(j, j)] - lambda;
        if d.norm() < small {
            d = Complex64::new(small, 0.0);
        }
        y[j] = -s / d;
    }
    y
}

fn residual_norm(a: &CMatrix, lambda: Complex64, x: &[Complex64]) -> f64 {
    let ax = a.mul_vec(x).expect("dimension checked");
    ax.iter().zip(x).map(|(p, q)| (p - lambda * q).norm_sqr()).sum::<f64>().sqrt()
}

fn is_finite_vec(x: &[Complex64]) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Full eigendecomposition of a square matrix.
///
/// Eigenvalues come from the balanced Schur form; each eigenvector starts from
/// triangular back-substitution and is refined by inverse iteration on the
/// original matrix. Pairs are sorted by (real, imaginary) part.
pub fn eig_dense(a: &CMatrix) -> Result<Vec<EigenPair>, LinalgError> {
    let n = a.ensure_square()?;
    a.ensure_finite()?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let (b, d) = balance(a);
    let (mut t, mut z) = hessenberg(&b);
    hessenberg_qr(&mut t, Some(&mut z))?;

    let mut pairs = Vec::with_capacity(n);
    for i in 0..n {
        let lambda = t[(i, i)];
        let y = triangular_eigenvector(&t, i);
        let mut x: Vec<Complex64> = z.mul_vec(&y)?.iter().zip(&d).map(|(v, s)| v * *s).collect();
        if !is_finite_vec(&x) || normalize(&mut x) == 0.0 {
            x = (0..n).map(|j| Complex64::new(1.0, 0.1 * j as f64)).collect();
            normalize(&mut x);
        }
        let mut best_res = residual_norm(a, lambda, &x);
        let mut best = x.clone();
        if let Ok(lu) = Lu::new(&a.shifted(lambda)) {
            let mut cur = x;
            for _ in 0..INVERSE_ITERATION_STEPS {
                let Ok(mut next) = lu.solve(&cur) else { break };
                if !is_finite_vec(&next) || normalize(&mut next) == 0.0 {
                    break;
                }
                let res = residual_norm(a, lambda, &next);
                cur = next;
                if res < best_res {
                    best_res = res;
                    best = cur.clone();
                }
            }
        }
        fix_phase(&mut best);
        pairs.push(EigenPair {
            value: lambda,
            vector: best,
        });
    }
    pairs.sort_by(|p, q| cmp_complex(&p.value, &q.value));
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        let data = (0..n * n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        CMatrix::from_row_major(n, n, data).unwrap()
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let pairs = eig_dense(&CMatrix::identity(3)).unwrap();
        assert_eq!(pairs.len(), 3);
        for p in &pairs {
            assert!((p.value - ONE).norm() < 1e-14);
            assert!((vec_norm(&p.vector) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_matrix() {
        let a = CMatrix::diagonal(&[c(1.0, 0.0), c(0.0, 2.0)]);
        let pairs = eig_dense(&a).unwrap();
        assert!((pairs[0].value - c(0.0, 2.0)).norm() < 1e-14);
        assert!((pairs[1].value - c(1.0, 0.0)).norm() < 1e-14);
        assert!((pairs[0].vector[1] - ONE).norm() < 1e-12);
        assert!((pairs[1].vector[0] - ONE).norm() < 1e-12);
    }

    #[test]
    fn symmetric_two_by_two_matches_quadratic_formula() {
        let a = CMatrix::from_real_rows(&[&[0.0, 1.5], &[1.5, 1.0]]).unwrap();
        let vals = eigvals(&a).unwrap();
        let r = 10f64.sqrt();
        assert!((vals[0] - c((1.0 - r) / 2.0, 0.0)).norm() < 1e-13);
        assert!((vals[1] - c((1.0 + r) / 2.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn random_matrices_satisfy_trace_determinant_and_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 3, 5, 8, 13, 30] {
            for _ in 0..4 {
                let a = random_matrix(&mut rng, n);
                let fro = a.frobenius_norm();
                let pairs = eig_dense(&a).unwrap();
                let sum: Complex64 = pairs.iter().map(|p| p.value).sum();
                assert!((sum - a.trace()).norm() <= 1e-8 * fro, "trace mismatch n={n}");
                if n <= 8 {
                    let prod: Complex64 = pairs.iter().map(|p| p.value).product();
                    let det = super::super::determinant(&a).unwrap();
                    assert!((prod - det).norm() <= 1e-6 * det.norm().max(1e-300), "det mismatch n={n}");
                }
                for p in &pairs {
                    assert!(residual_norm(&a, p.value, &p.vector) <= 1e-8 * fro);
                }
            }
        }
    }

    #[test]
    fn jordan_block_and_nilpotent() {
        let mut a = CMatrix::zeros(4, 4);
        for i in 0..3 {
            a[(i, i + 1)] = ONE;
        }
        let vals = eigvals(&a).unwrap();
        assert!(vals.iter().all(|v| v.norm() < 1e-3));
    }

    #[test]
    fn schur_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 9);
        let s = schur(&a).unwrap();
        let back = s.z.matmul(&s.t).unwrap().matmul(&s.z.conj_transpose()).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                assert!((back[(i, j)] - a[(i, j)]).norm() < 1e-12);
                if i > j {
                    assert_eq!(s.t[(i, j)], ZERO);
                }
            }
        }
    }

    #[test]
    fn non_square_is_rejected() {
        assert!(matches!(eig_dense(&CMatrix::zeros(2, 3)), Err(LinalgError::NotSquare { .. })));
    }

    #[test]
    fn strongly_nonnormal_tridiagonal_has_real_spectrum() {
        // Hatano-Nelson style chain: similar to a symmetric matrix, so the
        // spectrum is real even though eigenvector conditioning is awful.
        let n = 60;
        let mut a = CMatrix::zeros(n, n);
        for i in 0..n - 1 {
            a[(i, i + 1)] = c(2.0, 0.0);
            a[(i + 1, i)] = c(0.5, 0.0);
        }
        let vals = eigvals(&a).unwrap();
        // eigenvalues 2 sqrt(bc) cos(j pi / (n + 1))
        let mut exact: Vec<f64> = (1..=n)
            .map(|j| 2.0 * (std::f64::consts::PI * j as f64 / (n + 1) as f64).cos())
            .collect();
        exact.sort_by(f64::total_cmp);
        for (v, e) in vals.iter().zip(&exact) {
            assert!(v.im.abs() < 1e-8, "eigenvalue {v}");
            assert!((v.re - e).abs() < 1e-8);
        }
    }
}
