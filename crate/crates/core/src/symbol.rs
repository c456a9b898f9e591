//! The tridiagonal k-Toeplitz symbol `f(z) = A₋₁ z⁻¹ + A₀ + A₁ z` and its
//! closed-form determinant.
//!
//! Conventions: the operator `T(f)` has diagonal `a`, superdiagonal `b` and
//! subdiagonal `c`, all repeating with period `k`. The eigenvector ansatz is
//! `x = (v, z⁻¹v, z⁻²v, …)`, so `|z| > 1` means decay to the right.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{poly_roots, CMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative tolerance on the discriminant for declaring a double root.
pub const DOUBLE_ROOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSymbol", into = "RawSymbol")]
pub struct SymbolCoeffs {
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawSymbol {
    k: usize,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
}

impl TryFrom<RawSymbol> for SymbolCoeffs {
    type Error = Error;

    fn try_from(raw: RawSymbol) -> Result<Self> {
        if raw.a.len() != raw.k {
            return Err(Error::InvalidInput(format!("k = {} but a has {} entries", raw.k, raw.a.len())));
        }
        Self::new(raw.a, raw.b, raw.c)
    }
}

impl From<SymbolCoeffs> for RawSymbol {
    fn from(s: SymbolCoeffs) -> Self {
        RawSymbol {
            k: s.k(),
            a: s.a,
            b: s.b,
            c: s.c,
        }
    }
}

/// The three `k x k` coefficient blocks of the symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBlocks {
    pub a_minus1: CMatrix,
    pub a0: CMatrix,
    pub a1: CMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplicity {
    Distinct,
    Double,
}

/// Roots of `A z² + g(λ) z + B`, the numerator of `det(f(z) − λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootPair {
    /// Root of smaller modulus (ties broken by argument).
    pub z1: Complex64,
    pub z2: Complex64,
    pub multiplicity: Multiplicity,
    pub a: Complex64,
    pub b: Complex64,
    pub g: Complex64,
}

impl RootPair {
    /// `max 1/|zᵢ|`: the per-cell decay factor of `(v, z⁻¹v, …)`.
    pub fn rho(&self) -> f64 {
        (1.0 / self.z1.norm()).max(1.0 / self.z2.norm())
    }
}

impl SymbolCoeffs {
    pub fn new(a: Vec<Complex64>, b: Vec<Complex64>, c: Vec<Complex64>) -> Result<Self> {
        let k = a.len();
        if k == 0 {
            return Err(Error::InvalidInput("symbol needs k >= 1".into()));
        }
        if b.len() != k || c.len() != k {
            return Err(Error::InvalidInput(format!(
                "coefficient lengths differ: a {}, b {}, c {}",
                k,
                b.len(),
                c.len()
            )));
        }
        if a.iter().chain(&b).chain(&c).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("non-finite symbol coefficient".into()));
        }
        Ok(Self { a, b, c })
    }

    pub fn from_real(a: &[f64], b: &[f64], c: &[f64]) -> Result<Self> {
        let lift = |x: &[f64]| x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::new(lift(a), lift(b), lift(c))
    }

    pub fn k(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[Complex64] {
        &self.a
    }

    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    pub fn c(&self) -> &[Complex64] {
        &self.c
    }

    pub fn is_real(&self) -> bool {
        self.a.iter().chain(&self.b).chain(&self.c).all(|z| z.im == 0.0)
    }

    pub fn prod_b(&self) -> Complex64 {
        self.b.iter().product()
    }

    pub fn prod_c(&self) -> Complex64 {
        self.c.iter().product()
    }

    fn sign(&self) -> f64 {
        if self.k() % 2 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    /// Coefficient of `z` in `det(f(z) − λ)`: `(−1)^{k+1} ∏c`.
    pub fn quad_a(&self) -> Complex64 {
        self.prod_c() * self.sign()
    }

    /// Coefficient of `z⁻¹` in `det(f(z) − λ)`: `(−1)^{k+1} ∏b`.
    pub fn quad_b(&self) -> Complex64 {
        self.prod_b() * self.sign()
    }

    pub fn build_blocks(&self) -> SymbolBlocks {
        let k = self.k();
        let mut a0 = CMatrix::zeros(k, k);
        let mut a_minus1 = CMatrix::zeros(k, k);
        let mut a1 = CMatrix::zeros(k, k);
        for i in 0..k {
            a0[(i, i)] = self.a[i];
        }
        for i in 0..k.saturating_sub(1) {
            a0[(i, i + 1)] = self.b[i];
            a0[(i + 1, i)] = self.c[i];
        }
        a_minus1[(k - 1, 0)] = self.b[k - 1];
        a1[(0, k - 1)] = self.c[k - 1];
        SymbolBlocks { a_minus1, a0, a1 }
    }

    /// `f(z)`. Blocks are summed, so for `k ≤ 2` corner terms overlap.
    pub fn eval_symbol(&self, z: Complex64) -> Result<CMatrix> {
        if z == ZERO {
            return Err(Error::ZeroArgument);
        }
        let k = self.k();
        let mut m = CMatrix::zeros(k, k);
        for i in 0..k {
            m[(i, i)] = self.a[i];
        }
        for i in 0..k - 1 {
            m[(i, i + 1)] += self.b[i];
            m[(i + 1, i)] += self.c[i];
        }
        m[(k - 1, 0)] += self.b[k - 1] / z;
        m[(0, k - 1)] += self.c[k - 1] * z;
        Ok(m)
    }

    pub fn det_closed_form(&self, z: Complex64, lambda: Complex64) -> Result<Complex64> {
        if z == ZERO {
            return Err(Error::ZeroArgument);
        }
        Ok(self.quad_a() * z + self.quad_b() / z + self.g_lambda(lambda))
    }

    /// `g(λ) = det(A₀ − λ) − b_k c_k p(λ)`.
    pub fn g_lambda(&self, lambda: Complex64) -> Complex64 {
        let k = self.k();
        tridiagonal_det(&self.a, &self.b[..k - 1], &self.c[..k - 1], lambda)
            - self.b[k - 1] * self.c[k - 1] * self.p_lambda(lambda)
    }

    /// Determinant of the tridiagonal block on indices `2..k−1` (0 for
    /// `k = 1`, 1 for `k = 2`).
    pub fn p_lambda(&self, lambda: Complex64) -> Complex64 {
        let k = self.k();
        match k {
            1 => ZERO,
            2 => ONE,
            _ => tridiagonal_det(&self.a[1..k - 1], &self.b[1..k - 2], &self.c[1..k - 2], lambda),
        }
    }

    /// Coefficients of `g(λ)`, highest degree first (degree `k`).
    pub fn g_coefficients(&self) -> Vec<Complex64> {
        let k = self.k();
        let det = tridiagonal_det_poly(&self.a, &self.b[..k - 1], &self.c[..k - 1]);
        let p = match k {
            1 => vec![],
            2 => vec![ONE],
            _ => tridiagonal_det_poly(&self.a[1..k - 1], &self.b[1..k - 2], &self.c[1..k - 2]),
        };
        let bc = self.b[k - 1] * self.c[k - 1];
        let mut g = det;
        for (i, coeff) in p.iter().enumerate() {
            g[i] -= bc * coeff;
        }
        g.reverse();
        g
    }

    fn require_nondegenerate(&self) -> Result<()> {
        let (prod_b, prod_c) = (self.prod_b(), self.prod_c());
        if prod_b == ZERO || prod_c == ZERO {
            return Err(Error::DegenerateQuadratic { prod_b, prod_c });
        }
        Ok(())
    }

    pub fn quadratic_roots(&self, lambda: Complex64) -> Result<RootPair> {
        self.require_nondegenerate()?;
        let a = self.quad_a();
        let b = self.quad_b();
        let g = self.g_lambda(lambda);
        let disc = g * g - 4.0 * a * b;
        let scale = g.norm_sqr() + 4.0 * (a * b).norm() + 1.0;
        let (z1, z2, multiplicity) = if disc.norm() <= DOUBLE_ROOT_TOL * scale {
            let z = -g / (2.0 * a);
            (z, z, Multiplicity::Double)
        } else {
            let sq = disc.sqrt();
            // pick the sign that avoids cancellation
            let q = if (g.conj() * sq).re >= 0.0 { -(g + sq) / 2.0 } else { -(g - sq) / 2.0 };
            let (r1, r2) = (q / a, b / q);
            if root_order(&r1, &r2).is_le() {
                (r1, r2, Multiplicity::Distinct)
            } else {
                (r2, r1, Multiplicity::Distinct)
            }
        };
        Ok(RootPair {
            z1,
            z2,
            multiplicity,
            a,
            b,
            g,
        })
    }

    /// All `λ` (at most `2k`) where the z-quadratic has a double root, i.e.
    /// the roots of `g(λ) ∓ 2√(AB)`. Sorted by (real, imaginary).
    pub fn double_root_lambdas(&self) -> Result<Vec<Complex64>> {
        self.require_nondegenerate()?;
        let shift = 2.0 * (self.quad_a() * self.quad_b()).sqrt();
        let g = self.g_coefficients();
        let degree = g.len() - 1;
        let mut out = Vec::with_capacity(2 * degree);
        for s in [shift, -shift] {
            let mut poly = g.clone();
            poly[degree] -= s;
            out.extend(poly_roots(&poly)?);
        }
        out.sort_by(crate::linalg::cmp_complex);
        Ok(out)
    }

    /// The `n x n` finite section `A_n` of `T(f)`.
    pub fn finite_section(&self, n: usize) -> CMatrix {
        let k = self.k();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.a[i % k];
            if i + 1 < n {
                m[(i, i + 1)] = self.b[i % k];
                m[(i + 1, i)] = self.c[i % k];
            }
        }
        m
    }

    /// The `(cells·k)`-dimensional periodic truncation (wrap-around corners).
    pub fn periodic_section(&self, cells: usize) -> CMatrix {
        let k = self.k();
        let n = cells * k;
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            let j = (i + 1) % n;
            m[(i, i)] += self.a[i % k];
            m[(i, j)] += self.b[i % k];
            m[(j, i)] += self.c[i % k];
        }
        m
    }

    /// Symbol of the index-reversed section: `J A_n J = A_n(mirrored(n))`
    /// where `J` is the exchange matrix. Depends on `n mod k`.
    pub fn mirrored(&self, n: usize) -> Self {
        let k = self.k() as i64;
        let n = n as i64;
        // value at 1-based site `site` of a k-periodic sequence
        let at = |v: &[Complex64], site: i64| v[(site - 1).rem_euclid(k) as usize];
        // site i of the mirror is site n+1-i of the original; bond (i, i+1)
        // is bond (n-i, n+1-i) traversed backwards
        let a = (1..=k).map(|i| at(&self.a, n + 1 - i)).collect();
        let b = (1..=k).map(|i| at(&self.c, n - i)).collect();
        let c = (1..=k).map(|i| at(&self.b, n - i)).collect();
        Self { a, b, c }
    }
}

/// Smaller modulus first, then smaller argument.
fn root_order(x: &Complex64, y: &Complex64) -> std::cmp::Ordering {
    x.norm().total_cmp(&y.norm()).then(x.arg().total_cmp(&y.arg()))
}

/// `det(T − λ)` for tridiagonal `T` with diagonal `d`, super `up`, sub `lo`.
fn tridiagonal_det(d: &[Complex64], up: &[Complex64], lo: &[Complex64], lambda: Complex64) -> Complex64 {
    let mut prev = ONE;
    let mut cur = ONE;
    for (j, &dj) in d.iter().enumerate() {
        let next = if j == 0 {
            dj - lambda
        } else {
            (dj - lambda) * cur - up[j - 1] * lo[j - 1] * prev
        };
        prev = cur;
        cur = next;
    }
    cur
}

/// Same recurrence on polynomials in λ (ascending coefficients).
fn tridiagonal_det_poly(d: &[Complex64], up: &[Complex64], lo: &[Complex64]) -> Vec<Complex64> {
    let mut prev = vec![ONE];
    let mut cur = vec![ONE];
    for (j, &dj) in d.iter().enumerate() {
        let mut next = vec![ZERO; cur.len() + 1];
        for (i, &p) in cur.iter().enumerate() {
            next[i] += dj * p;
            next[i + 1] -= p;
        }
        if j > 0 {
            let w = up[j - 1] * lo[j - 1];
            for (i, &p) in prev.iter().enumerate() {
                next[i] -= w * p;
            }
        }
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{determinant, poly_eval};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn r(x: f64) -> Complex64 {
        c(x, 0.0)
    }

    fn coburn1() -> SymbolCoeffs {
        SymbolCoeffs::from_real(&[0.0, 1.0], &[1.0, 0.5], &[1.0, 0.5]).unwrap()
    }

    fn coburn2() -> SymbolCoeffs {
        SymbolCoeffs::from_real(&[0.0, 1.0], &[1.0, 2.0], &[1.0, 2.0]).unwrap()
    }

    fn close(x: Complex64, y: Complex64, tol: f64) -> bool {
        (x - y).norm() <= tol
    }

    #[test]
    fn blocks_match_displayed_examples() {
        let s = SymbolCoeffs::from_real(&[1.0], &[0.0], &[0.0]).unwrap();
        let bl = s.build_blocks();
        assert_eq!(bl.a0[(0, 0)], r(1.0));
        assert_eq!(bl.a_minus1[(0, 0)], r(0.0));
        assert_eq!(bl.a1[(0, 0)], r(0.0));

        let bl = coburn1().build_blocks();
        assert_eq!(bl.a0, CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 1.0]]).unwrap());
        assert_eq!(bl.a_minus1, CMatrix::from_real_rows(&[&[0.0, 0.0], &[0.5, 0.0]]).unwrap());
        assert_eq!(bl.a1, CMatrix::from_real_rows(&[&[0.0, 0.5], &[0.0, 0.0]]).unwrap());

        let t = coburn2().finite_section(4);
        assert_eq!(t.row(0), &[r(0.0), r(1.0), r(0.0), r(0.0)]);
        assert_eq!(t.row(1), &[r(1.0), r(1.0), r(2.0), r(0.0)]);
    }

    #[test]
    fn symbol_evaluation() {
        let f = coburn1().eval_symbol(r(1.0)).unwrap();
        assert_eq!(f, CMatrix::from_real_rows(&[&[0.0, 1.5], &[1.5, 1.0]]).unwrap());
        let s = SymbolCoeffs::from_real(&[0.0], &[1.0], &[1.0]).unwrap();
        assert!(s.eval_symbol(c(0.0, 1.0)).unwrap()[(0, 0)].norm() < 1e-15);
        let f = coburn2().eval_symbol(r(-0.5)).unwrap();
        assert_eq!(f, CMatrix::from_real_rows(&[&[0.0, 0.0], &[-3.0, 1.0]]).unwrap());
        assert_eq!(coburn1().eval_symbol(ZERO), Err(Error::ZeroArgument));
    }

    #[test]
    fn closed_form_determinant_examples() {
        assert!(close(coburn1().det_closed_form(r(1.0), ZERO).unwrap(), r(-2.25), 1e-14));
        assert!(close(coburn2().det_closed_form(r(-0.5), ZERO).unwrap(), ZERO, 1e-14));
        let s = SymbolCoeffs::from_real(&[2.0], &[0.0], &[0.0]).unwrap();
        assert_eq!(s.det_closed_form(c(0.3, 0.7), r(2.0)).unwrap(), ZERO);
    }

    #[test]
    fn g_and_p_examples() {
        assert!(close(coburn1().g_lambda(ZERO), r(-1.25), 1e-15));
        assert!(close(coburn2().g_lambda(ZERO), r(-5.0), 1e-15));
        let s = SymbolCoeffs::from_real(&[3.0], &[1.0], &[2.0]).unwrap();
        assert_eq!(s.g_lambda(r(3.0)), ZERO);
        assert_eq!(s.p_lambda(r(0.3)), ZERO);
        assert_eq!(coburn1().p_lambda(r(7.0)), ONE);
        let s3 = SymbolCoeffs::from_real(&[0.0, 5.0, 0.0], &[1.0; 3], &[1.0; 3]).unwrap();
        assert_eq!(s3.p_lambda(r(1.0)), r(4.0));
    }

    #[test]
    fn g_coefficients_match_evaluation() {
        let s = SymbolCoeffs::new(
            vec![c(0.3, 1.0), c(-1.0, 0.2), c(0.5, 0.5), c(2.0, -1.0)],
            vec![c(1.0, 0.1), c(0.4, 0.0), c(-0.7, 0.3), c(1.1, 1.1)],
            vec![c(0.2, -0.9), c(1.3, 0.0), c(0.8, 0.8), c(-0.5, 0.6)],
        )
        .unwrap();
        let coeffs = s.g_coefficients();
        assert_eq!(coeffs.len(), 5);
        assert_eq!(coeffs[0], ONE); // (−1)^k with k = 4
        for lambda in [c(0.0, 0.0), c(1.5, -0.5), c(-2.0, 3.0)] {
            assert!(close(poly_eval(&coeffs, lambda), s.g_lambda(lambda), 1e-12));
        }
    }

    #[test]
    fn closed_form_agrees_with_lu_for_each_k() {
        for k in 1..=6 {
            let a: Vec<_> = (0..k).map(|i| c(0.3 * i as f64 - 0.5, 0.1 * i as f64)).collect();
            let b: Vec<_> = (0..k).map(|i| c(1.0 + 0.2 * i as f64, -0.3)).collect();
            let cc: Vec<_> = (0..k).map(|i| c(0.7, 0.4 - 0.1 * i as f64)).collect();
            let s = SymbolCoeffs::new(a, b, cc).unwrap();
            for z in [c(0.5, 0.0), c(0.0, 1.0), c(-1.2, 1.6)] {
                let lambda = c(0.25, -0.75);
                let direct = determinant(&s.eval_symbol(z).unwrap().shifted(lambda)).unwrap();
                let closed = s.det_closed_form(z, lambda).unwrap();
                assert!(close(direct, closed, 1e-12 * (1.0 + direct.norm())), "k={k} z={z}");
            }
        }
    }

    #[test]
    fn quadratic_root_examples() {
        for s in [coburn1(), coburn2()] {
            let roots = s.quadratic_roots(ZERO).unwrap();
            assert_eq!(roots.multiplicity, Multiplicity::Distinct);
            assert!(close(roots.z1, r(-0.5), 1e-14));
            assert!(close(roots.z2, r(-2.0), 1e-14));
        }
        let s = SymbolCoeffs::from_real(&[0.0], &[1.0], &[0.25]).unwrap();
        let roots = s.quadratic_roots(ONE).unwrap();
        assert_eq!(roots.multiplicity, Multiplicity::Double);
        assert!(close(roots.z1, r(2.0), 1e-14) && roots.z1 == roots.z2);

        let degenerate = SymbolCoeffs::from_real(&[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(matches!(degenerate.quadratic_roots(ZERO), Err(Error::DegenerateQuadratic { .. })));
    }

    #[test]
    fn double_root_lambda_examples() {
        let cases: [(f64, f64, f64, [f64; 2]); 3] = [
            (0.0, 1.0, 1.0, [-2.0, 2.0]),
            (0.0, 1.0, 0.25, [-1.0, 1.0]),
            (5.0, 1.0, 1.0, [3.0, 7.0]),
        ];
        for (a, b, cc, expected) in cases {
            let s = SymbolCoeffs::from_real(&[a], &[b], &[cc]).unwrap();
            let lambdas = s.double_root_lambdas().unwrap();
            assert_eq!(lambdas.len(), 2);
            for (l, e) in lambdas.iter().zip(expected) {
                assert!(close(*l, r(e), 1e-12), "{l} vs {e}");
                assert_eq!(s.quadratic_roots(*l).unwrap().multiplicity, Multiplicity::Double);
            }
        }
    }

    #[test]
    fn mirrored_section_is_reversed_section() {
        let s = SymbolCoeffs::new(
            vec![c(0.1, 0.0), c(0.2, 0.0), c(0.3, 0.0)],
            vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)],
            vec![c(-1.0, 0.0), c(-2.0, 0.0), c(-3.0, 0.0)],
        )
        .unwrap();
        for n in [3, 7, 8, 9, 10] {
            let a = s.finite_section(n);
            let m = s.mirrored(n).finite_section(n);
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(m[(i, j)], a[(n - 1 - i, n - 1 - j)], "n={n} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let s = coburn1();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.starts_with("{\"k\":2,\"a\":[[0.0,0.0],[1.0,0.0]]"));
        let back: SymbolCoeffs = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"k": 2, "a": [[0,0]], "b": [[1,0]], "c": [[1,0]]}"#;
        assert!(serde_json::from_str::<SymbolCoeffs>(bad).is_err());
    }
}
