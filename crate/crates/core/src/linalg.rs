//! Symmetric tridiagonal kernels: products, Cholesky solves, and the
//! generalized eigenproblem S x = λ M x for a symmetric tridiagonal pencil
//! with M positive definite.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix stored as its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1), "off-diagonal length");
        Self { diag, off }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        self.mul_into(x, &mut y);
        y
    }

    /// y = A x
    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n();
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            y[i] = v;
        }
    }

    /// s·self + other
    pub fn scaled_add(&self, s: f64, other: &SymTridiag) -> SymTridiag {
        SymTridiag {
            diag: self
                .diag
                .iter()
                .zip(&other.diag)
                .map(|(a, b)| s * a + b)
                .collect(),
            off: self
                .off
                .iter()
                .zip(&other.off)
                .map(|(a, b)| s * a + b)
                .collect(),
        }
    }

    pub fn cholesky(&self) -> Result<TridiagCholesky> {
        let n = self.n();
        let mut l_diag = vec![0.0; n];
        let mut l_sub = vec![0.0; n.saturating_sub(1)];
        let mut pivot = self.diag[0];
        for i in 0..n {
            if i > 0 {
                let m = self.off[i - 1] / l_diag[i - 1];
                l_sub[i - 1] = m;
                pivot = self.diag[i] - m * m;
            }
            if !(pivot > 0.0 && pivot.is_finite()) {
                return Err(Error::Singular { row: i, pivot });
            }
            l_diag[i] = pivot.sqrt();
        }
        Ok(TridiagCholesky { l_diag, l_sub })
    }

    /// Number of eigenvalues of the pencil (self, mass) strictly below `x`,
    /// by Sylvester inertia of self - x·mass.
    fn pencil_count_below(&self, mass: &SymTridiag, x: f64) -> usize {
        let n = self.n();
        let mut count = 0;
        let mut d = 0.0;
        for i in 0..n {
            let a = self.diag[i] - x * mass.diag[i];
            d = if i == 0 {
                a
            } else {
                let b = self.off[i - 1] - x * mass.off[i - 1];
                a - b * b / d
            };
            if d == 0.0 {
                d = -f64::EPSILON * (a.abs() + f64::MIN_POSITIVE);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }
}

/// Lower bidiagonal Cholesky factor L with A = L Lᵀ.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagCholesky {
    l_diag: Vec<f64>,
    l_sub: Vec<f64>,
}

impl TridiagCholesky {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.l_diag.len();
        x[0] /= self.l_diag[0];
        for i in 1..n {
            x[i] = (x[i] - self.l_sub[i - 1] * x[i - 1]) / self.l_diag[i];
        }
        x[n - 1] /= self.l_diag[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.l_sub[i] * x[i + 1]) / self.l_diag[i];
        }
    }
}

/// Solve the (possibly indefinite) tridiagonal system with partial pivoting.
fn solve_tridiag_pivoted(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    // Row i of U holds (u0, u1, u2) at columns (i, i+1, i+2).
    let mut u0 = diag.to_vec();
    let mut u1: Vec<f64> = (0..n)
        .map(|i| if i + 1 < n { sup[i] } else { 0.0 })
        .collect();
    let mut u2 = vec![0.0; n];
    let mut b = rhs.to_vec();
    let mut low: Vec<f64> = sub.to_vec();
    // Exactly singular pivots (shift equal to an eigenvalue) are replaced by
    // a relative perturbation so that inverse iteration stays finite.
    let scale = diag
        .iter()
        .chain(sub)
        .chain(sup)
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    for i in 0..n.saturating_sub(1) {
        // candidate rows: i (u0[i], u1[i], u2[i]) and i+1 (low[i], u0[i+1], u1[i+1])
        if low[i].abs() > u0[i].abs() {
            let (a0, a1, a2, ab) = (u0[i], u1[i], u2[i], b[i]);
            u0[i] = low[i];
            u1[i] = u0[i + 1];
            u2[i] = u1[i + 1];
            b[i] = b[i + 1];
            low[i] = a0;
            u0[i + 1] = a1;
            u1[i + 1] = a2;
            b[i + 1] = ab;
        }
        if u0[i] == 0.0 {
            u0[i] = tiny;
        }
        let m = low[i] / u0[i];
        u0[i + 1] -= m * u1[i];
        u1[i + 1] -= m * u2[i];
        b[i + 1] -= m * b[i];
    }
    if u0[n - 1] == 0.0 {
        u0[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = b[i];
        if i + 1 < n {
            v -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            v -= u2[i] * x[i + 2];
        }
        x[i] = v / u0[i];
    }
    x
}

fn m_dot(mass: &SymTridiag, u: &[f64], v: &[f64]) -> f64 {
    mass.mul(v).iter().zip(u).map(|(a, b)| a * b).sum()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

const INVERSE_ITERATIONS: usize = 6;

/// Smallest `count` eigenpairs of S x = λ M x by Sturm-sequence bisection
/// and inverse iteration, M-orthonormalized.
pub fn pencil_eigenpairs(
    stiffness: &SymTridiag,
    mass: &SymTridiag,
    count: usize,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = stiffness.n();
    // λ ≤ ‖S‖_∞ / λ_min(M), with λ_min(M) bounded below by Gershgorin.
    let row_abs = |a: &SymTridiag, i: usize| -> f64 {
        let mut s = 0.0;
        if i > 0 {
            s += a.off[i - 1].abs();
        }
        if i + 1 < n {
            s += a.off[i].abs();
        }
        s
    };
    let s_norm = (0..n)
        .map(|i| stiffness.diag[i].abs() + row_abs(stiffness, i))
        .fold(0.0, f64::max);
    let m_min = (0..n)
        .map(|i| mass.diag[i] - row_abs(mass, i))
        .fold(f64::INFINITY, f64::min);
    if !(m_min > 0.0) {
        return Err(Error::Numerical(
            "mass matrix is not diagonally dominant; cannot bound the spectrum".into(),
        ));
    }
    let upper = 1.01 * s_norm / m_min + 1.0;
    let lower = -upper;

    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(count);
    for j in 0..count {
        // j-th eigenvalue: smallest x with count_below(x) > j
        let (mut lo, mut hi) = (lower, upper);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if stiffness.pencil_count_below(mass, mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut lambda = 0.5 * (lo + hi);

        // Inverse iteration on (S - λM) x_{k+1} = M x_k, orthogonalized
        // against the pairs already found.
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * ((i * 7 + j * 13) % 11) as f64)
            .collect();
        let mut converged = false;
        let mut rel_residual = f64::INFINITY;
        for _ in 0..INVERSE_ITERATIONS {
            let shifted = mass.scaled_add(-lambda, stiffness);
            let sub = shifted.off.clone();
            let rhs = mass.mul(&x);
            let mut y = solve_tridiag_pivoted(&sub, &shifted.diag, &shifted.off, &rhs);
            for (_, p) in &pairs {
                let c = m_dot(mass, p, &y);
                for (yi, pi) in y.iter_mut().zip(p) {
                    *yi -= c * pi;
                }
            }
            let nrm = m_dot(mass, &y, &y).sqrt();
            if !(nrm > 0.0 && nrm.is_finite()) {
                break;
            }
            for v in y.iter_mut() {
                *v /= nrm;
            }
            // Rayleigh quotient refinement of the eigenvalue estimate.
            let rq = m_dot(stiffness, &y, &y);
            x = y;
            let sx = stiffness.mul(&x);
            let mx = mass.mul(&x);
            let res: Vec<f64> = sx.iter().zip(&mx).map(|(a, b)| a - rq * b).collect();
            rel_residual = norm2(&res) / norm2(&sx);
            lambda = rq;
            if rel_residual <= 1e-13 {
                converged = true;
                break;
            }
        }
        if !converged && !(rel_residual <= 1e-10) {
            return Err(Error::EigenNonConvergence { count, index: j });
        }
        // fix sign: first nonnegligible entry positive
        if let Some(first) = x.iter().find(|v| v.abs() > 1e-8) {
            if *first < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
        }
        pairs.push((lambda, x));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = SymTridiag::new(vec![1.0, -1.0], vec![0.0]);
        assert!(a.cholesky().is_err());
    }

    #[test]
    fn pivoted_solve_indefinite() {
        // [[0,1,0],[1,0,1],[0,1,1]] x = [1,2,2] -> x = [1, 1, 1]
        let x = solve_tridiag_pivoted(&[1.0, 1.0], &[0.0, 0.0, 1.0], &[1.0, 1.0], &[1.0, 2.0, 2.0]);
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_mass_recovers_standard_spectrum() {
        // tridiag(-1, 2, -1) of size n: λ_j = 2 - 2 cos(jπ/(n+1))
        let n = 9;
        let s = SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1]);
        let m = SymTridiag::new(vec![1.0; n], vec![0.0; n - 1]);
        let pairs = pencil_eigenpairs(&s, &m, n).unwrap();
        for (j, (lambda, _)) in pairs.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((lambda - exact).abs() < 1e-13, "j={j}");
        }
    }
}
