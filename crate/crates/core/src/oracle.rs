//! Spectral reference solutions in the sine basis √2 sin(jπx), where the
//! Dirichlet Laplacian has eigenvalues λ_j = j²π².
//!
//! Deterministic part: û_j(t) = E_{α,1}(-λ_j t^α) û_j(0).
//!
//! Additive noise σ ≡ g acting diagonally (σ e_j = g_j e_j): the stochastic
//! convolution of mode j is ∫_0^t (t-s)^{α-1} E_{α,α}(-λ_j (t-s)^α) √q_j g_j
//! dβ_j(s), evaluated by a left-point sum on the fine grid of the path, so
//! the kernel is never sampled at s = t.

use std::collections::BTreeSet;
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::fem::{eval_p1, Mesh1D};
use crate::noise::{CovarianceSpec, WienerPath};
use crate::special_functions::ml;
use crate::weights::GmmpWeights;

/// Five-point Gauss-Legendre rule on [0, 1].
const GAUSS5: [(f64, f64); 5] = [
    (0.046_910_077_030_668, 0.118_463_442_528_094_54),
    (0.230_765_344_947_158_45, 0.239_314_335_249_683_23),
    (0.5, 0.284_444_444_444_444_44),
    (0.769_234_655_052_841_6, 0.239_314_335_249_683_23),
    (0.953_089_922_969_332, 0.118_463_442_528_094_54),
];

/// λ_j = j²π²
pub fn dirichlet_eigenvalue(j: usize) -> f64 {
    let k = j as f64 * PI;
    k * k
}

/// A finite sine series Σ c_j √2 sin(jπx).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    alpha: f64,
    modes: Vec<(usize, f64)>,
}

impl SpectralField {
    pub fn new(alpha: f64, modes: Vec<(usize, f64)>) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::domain(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        let mut seen = BTreeSet::new();
        for &(j, c) in &modes {
            if j == 0 || !seen.insert(j) {
                return Err(Error::domain(format!(
                    "mode indices must be positive and distinct, got {j}"
                )));
            }
            if !c.is_finite() {
                return Err(Error::domain(format!(
                    "mode {j} has non-finite coefficient"
                )));
            }
        }
        Ok(Self { alpha, modes })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn modes(&self) -> &[(usize, f64)] {
        &self.modes
    }

    pub fn coefficient(&self, j: usize) -> f64 {
        self.modes
            .iter()
            .find(|(k, _)| *k == j)
            .map_or(0.0, |(_, c)| *c)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.modes
            .iter()
            .map(|&(j, c)| c * SQRT_2 * (j as f64 * PI * x).sin())
            .sum()
    }

    /// Values at the interior nodes of `mesh`.
    pub fn nodal(&self, mesh: &Mesh1D) -> Vec<f64> {
        mesh.interior_nodes()
            .iter()
            .map(|&x| self.eval(x))
            .collect()
    }

    /// L2(0,1) norm, exact by orthonormality.
    pub fn l2_norm(&self) -> f64 {
        self.modes.iter().map(|(_, c)| c * c).sum::<f64>().sqrt()
    }

    /// Mode-wise sum; indices present in either field are kept.
    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let mut modes = self.modes.clone();
        for &(j, c) in &other.modes {
            match modes.iter_mut().find(|(k, _)| *k == j) {
                Some(m) => m.1 += c,
                None => modes.push((j, c)),
            }
        }
        SpectralField {
            alpha: self.alpha,
            modes,
        }
    }

    /// ‖u_h - self‖_{L2(0,1)} for the P1 function with interior values `u`,
    /// by five-point Gauss-Legendre quadrature on every cell.
    pub fn l2_error(&self, mesh: &Mesh1D, u: &[f64]) -> Result<f64> {
        if u.len() != mesh.n_dof() {
            return Err(Error::LengthMismatch {
                what: "finite element coefficients",
                expected: mesh.n_dof(),
                actual: u.len(),
            });
        }
        let h = mesh.h();
        let mut sum = 0.0;
        for c in 0..mesh.n_cells() {
            for &(xi, w) in &GAUSS5 {
                let x = (c as f64 + xi) * h;
                let d = eval_p1(mesh, u, x) - self.eval(x);
                sum += w * h * d * d;
            }
        }
        Ok(sum.sqrt())
    }

    /// Largest nodal deviation max_i |u_i - u(x_i)|.
    pub fn max_nodal_error(&self, mesh: &Mesh1D, u: &[f64]) -> f64 {
        self.nodal(mesh)
            .iter()
            .zip(u)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Mode-wise E_{α,1}(-j²π² t^α) û_j(0).
pub fn exact_deterministic(alpha: f64, u0: &SpectralField, t: f64) -> Result<SpectralField> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    let ta = t.powf(alpha);
    let modes = u0
        .modes
        .iter()
        .map(|&(j, c)| Ok((j, c * ml(alpha, 1.0, -dirichlet_eigenvalue(j) * ta)?)))
        .collect::<Result<Vec<_>>>()?;
    SpectralField::new(alpha, modes)
}

/// The h → 0 limit of the fully discrete scheme at fixed τ = t/k_steps:
/// each sine mode follows the scalar GMMP recursion
/// (τ^{-α} + λ_j) c^{n+1} = τ^{-α} (b_{n+1} c^0 - Σ_{k=1}^{n+1} ω_k c^{n+1-k}).
///
/// Comparing a finite element solution against this field isolates the
/// spatial error, since both carry the same time discretization.
pub fn time_discrete_deterministic(
    alpha: f64,
    u0: &SpectralField,
    t: f64,
    k_steps: usize,
) -> Result<SpectralField> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    let w = GmmpWeights::new(alpha, k_steps)?;
    let shift = (t / k_steps as f64).powf(-alpha);
    let (omega, b) = (w.omega(), w.b());
    let modes = u0
        .modes
        .iter()
        .map(|&(j, c0)| {
            let lambda = dirichlet_eigenvalue(j);
            let mut c = Vec::with_capacity(k_steps + 1);
            c.push(c0);
            for n in 0..k_steps {
                let mut acc = b[n + 1] * c0;
                for k in 1..=n + 1 {
                    acc -= omega[k] * c[n + 1 - k];
                }
                c.push(shift * acc / (shift + lambda));
            }
            (j, c[k_steps])
        })
        .collect();
    SpectralField::new(alpha, modes)
}

/// Left-point weights (t - s_m)^{α-1} E_{α,α}(-λ_j (t - s_m)^α) for lags
/// t - s_m = d·τ_f, d = 1..=n_lags, tabulated once per mode.
#[derive(Debug, Clone)]
pub struct ConvolutionKernel {
    alpha: f64,
    tau_fine: f64,
    modes: Vec<usize>,
    /// modes × lags
    table: Vec<f64>,
    n_lags: usize,
}

impl ConvolutionKernel {
    pub fn new(alpha: f64, modes: &[usize], tau_fine: f64, n_lags: usize) -> Result<Self> {
        if !(tau_fine > 0.0 && tau_fine.is_finite()) {
            return Err(Error::domain("fine step must be positive"));
        }
        let mut table = Vec::with_capacity(modes.len() * n_lags);
        for &j in modes {
            let lambda = dirichlet_eigenvalue(j);
            for d in 1..=n_lags {
                let lag = d as f64 * tau_fine;
                let la = lag.powf(alpha);
                table.push(lag.powf(alpha - 1.0) * ml(alpha, alpha, -lambda * la)?);
            }
        }
        Ok(Self {
            alpha,
            tau_fine,
            modes: modes.to_vec(),
            table,
            n_lags,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau_fine(&self) -> f64 {
        self.tau_fine
    }

    /// Kernel of mode slot `i` at lag d·τ_f (d ≥ 1).
    pub fn weight(&self, i: usize, d: usize) -> f64 {
        self.table[i * self.n_lags + d - 1]
    }

    /// Stochastic convolution at t = n·τ_f for every tabulated mode.
    pub fn apply(
        &self,
        g: &SpectralField,
        covariance: &CovarianceSpec,
        path: &WienerPath,
        n: usize,
    ) -> Result<SpectralField> {
        if n > self.n_lags || n > path.k_fine() {
            return Err(Error::domain(format!(
                "evaluation step {n} exceeds the tabulated horizon"
            )));
        }
        if (path.tau_fine() - self.tau_fine).abs() > 1e-12 * self.tau_fine {
            return Err(Error::domain("path and kernel use different fine steps"));
        }
        let q = covariance.eigenvalues();
        let mut out = Vec::with_capacity(self.modes.len());
        for (i, &j) in self.modes.iter().enumerate() {
            let gj = g.coefficient(j);
            if j > q.len() || j > path.n_modes() || gj == 0.0 {
                out.push((j, 0.0));
                continue;
            }
            let incr = path.fine().mode(j - 1);
            let mut acc = 0.0;
            for (m, db) in incr[..n].iter().enumerate() {
                acc += self.weight(i, n - m) * db;
            }
            out.push((j, acc * q[j - 1].sqrt() * gj));
        }
        SpectralField::new(g.alpha, out)
    }
}

/// Stochastic convolution of the additive noise g at time t, which must be a
/// point of the path's fine grid.
pub fn additive_convolution(
    alpha: f64,
    g: &SpectralField,
    covariance: &CovarianceSpec,
    path: &WienerPath,
    t: f64,
) -> Result<SpectralField> {
    let n = grid_index(path, t)?;
    let modes: Vec<usize> = g.modes.iter().map(|(j, _)| *j).collect();
    let kernel = ConvolutionKernel::new(alpha, &modes, path.tau_fine(), n)?;
    kernel.apply(g, covariance, path, n)
}

/// Index n with t = n·τ_f, or an error when t is off the fine grid.
pub fn grid_index(path: &WienerPath, t: f64) -> Result<usize> {
    let s = t / path.tau_fine();
    let n = s.round();
    if !(t >= 0.0) || (s - n).abs() > 1e-9 * s.max(1.0) || n as usize > path.k_fine() {
        return Err(Error::domain(format!(
            "time {t} is not on the fine grid of the path"
        )));
    }
    Ok(n as usize)
}
