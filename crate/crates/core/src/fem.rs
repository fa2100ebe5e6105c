//! Piecewise-linear Galerkin discretization on a uniform mesh of (0, 1) with
//! homogeneous Dirichlet conditions.
//!
//! Only interior nodes carry degrees of freedom, so every matrix here has
//! size n_cells - 1. The discrete Laplacian is represented by the pair
//! (M, S) of mass and stiffness matrices: the positive operator -Δ_h is
//! M⁻¹S, and one implicit GMMP step solves (τ^{-α} M + S) u = rhs, which is
//! symmetric positive definite.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SymTridiag, TridiagCholesky};

/// Upper bound on the number of cells accepted from configuration input.
pub const MAX_CELLS: usize = 1 << 16;

/// Three-point Gauss rule on the reference cell [0, 1]: (abscissa, weight).
pub const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// Uniform mesh of (0, 1) with `n_cells` cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Mesh1D {
    n_cells: usize,
}

impl TryFrom<usize> for Mesh1D {
    type Error = Error;

    fn try_from(n_cells: usize) -> Result<Self> {
        Mesh1D::new(n_cells)
    }
}

impl From<Mesh1D> for usize {
    fn from(m: Mesh1D) -> usize {
        m.n_cells
    }
}

impl Mesh1D {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::domain(format!(
                "a mesh needs at least 2 cells, got {n_cells}"
            )));
        }
        if n_cells > MAX_CELLS {
            return Err(Error::domain(format!(
                "a mesh may have at most {MAX_CELLS} cells, got {n_cells}"
            )));
        }
        Ok(Self { n_cells })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    pub fn n_dof(&self) -> usize {
        self.n_cells - 1
    }

    /// Coordinate of interior node `i` (1-based, 1..=n_dof).
    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.n_cells as f64
    }

    /// Interior node coordinates x_1 < ... < x_{n_dof}.
    pub fn interior_nodes(&self) -> Vec<f64> {
        (1..self.n_cells).map(|i| self.node(i)).collect()
    }

    /// Whether `fine` is obtained from `self` by uniform subdivision.
    pub fn is_refined_by(&self, fine: &Mesh1D) -> bool {
        fine.n_cells.is_multiple_of(self.n_cells)
    }
}

/// Coefficients of a finite element function in the interior hat basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoefVec(pub Vec<f64>);

impl CoefVec {
    pub fn zeros(n: usize) -> Self {
        CoefVec(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for CoefVec {
    type Target = Vec<f64>;

    fn deref(&self) -> &Vec<f64> {
        &self.0
    }
}

impl DerefMut for CoefVec {
    fn deref_mut(&mut self) -> &mut Vec<f64> {
        &mut self.0
    }
}

impl From<Vec<f64>> for CoefVec {
    fn from(v: Vec<f64>) -> Self {
        CoefVec(v)
    }
}

/// A generalized eigenpair S φ = λ M φ, normalized so that φᵀMφ = 1.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: f64,
    pub phi: CoefVec,
}

/// Assembled mass and stiffness matrices on one mesh.
#[derive(Debug, Clone)]
pub struct FemOperators {
    mesh: Mesh1D,
    mass: SymTridiag,
    stiffness: SymTridiag,
    mass_factor: TridiagCholesky,
}

impl FemOperators {
    /// Mass matrix tridiag(h/6, 2h/3, h/6), stiffness tridiag(-1/h, 2/h, -1/h).
    pub fn assemble(mesh: Mesh1D) -> Self {
        let n = mesh.n_dof();
        let h = mesh.h();
        let mass = SymTridiag::new(vec![2.0 * h / 3.0; n], vec![h / 6.0; n - 1]);
        let stiffness = SymTridiag::new(vec![2.0 / h; n], vec![-1.0 / h; n - 1]);
        let mass_factor = mass
            .cholesky()
            .expect("the P1 mass matrix is positive definite");
        Self {
            mesh,
            mass,
            stiffness,
            mass_factor,
        }
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn n_dof(&self) -> usize {
        self.mesh.n_dof()
    }

    pub fn mass(&self) -> &SymTridiag {
        &self.mass
    }

    pub fn stiffness(&self) -> &SymTridiag {
        &self.stiffness
    }

    /// Load vector ∫ f φ_i dx with three Gauss points per cell.
    pub fn load_vector<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        let n_cells = self.mesh.n_cells();
        let h = self.mesh.h();
        let mut load = vec![0.0; self.n_dof()];
        for c in 0..n_cells {
            let x0 = c as f64 * h;
            let (mut left, mut right) = (0.0, 0.0);
            for &(xi, w) in &GAUSS3 {
                let fx = f(x0 + xi * h) * w * h;
                left += fx * (1.0 - xi);
                right += fx * xi;
            }
            // node c is dof c-1, node c+1 is dof c
            if c > 0 {
                load[c - 1] += left;
            }
            if c + 1 < n_cells {
                load[c] += right;
            }
        }
        load
    }

    /// Solve M a = rhs.
    pub fn solve_mass(&self, rhs: &[f64]) -> Result<CoefVec> {
        self.check_len("mass solve right-hand side", rhs.len())?;
        Ok(CoefVec(self.mass_factor.solve(rhs)))
    }

    /// L2 projection P_h f: solves M a = (f, φ_i).
    pub fn l2_project<F: Fn(f64) -> f64>(&self, f: F) -> CoefVec {
        CoefVec(self.mass_factor.solve(&self.load_vector(f)))
    }

    /// (u, v)_M = uᵀ M v.
    pub fn m_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let mv = self.mass.mul(v);
        u.iter().zip(&mv).map(|(a, b)| a * b).sum()
    }

    /// L2(0,1) norm of the finite element function with coefficients `u`.
    pub fn m_norm(&self, u: &[f64]) -> f64 {
        self.m_inner(u, u).max(0.0).sqrt()
    }

    /// Value at x ∈ [0, 1] of the P1 function with interior coefficients `u`.
    pub fn eval(&self, u: &[f64], x: f64) -> f64 {
        eval_p1(&self.mesh, u, x)
    }

    /// Factorization of τ^{-α} M + S, reusable across time steps.
    pub fn shifted_solver(&self, tau_alpha: f64) -> Result<ShiftedSolver> {
        if !(tau_alpha > 0.0 && tau_alpha.is_finite()) {
            return Err(Error::domain(format!(
                "tau^alpha must be positive and finite, got {tau_alpha}"
            )));
        }
        let shift = 1.0 / tau_alpha;
        let matrix = self.mass.scaled_add(shift, &self.stiffness);
        let factor = matrix.cholesky()?;
        Ok(ShiftedSolver {
            tau_alpha,
            matrix,
            factor,
        })
    }

    /// Solve (τ^{-α} M + S) u = rhs, i.e. apply the resolvent M⁻¹-weighted
    /// (τ^{-α} I + M⁻¹S)⁻¹ to a load vector.
    pub fn solve_shifted(&self, tau_alpha: f64, rhs: &[f64]) -> Result<CoefVec> {
        self.check_len("shifted solve right-hand side", rhs.len())?;
        let solver = self.shifted_solver(tau_alpha)?;
        Ok(CoefVec(solver.solve(rhs)))
    }

    /// The `count` smallest generalized eigenpairs of S φ = λ M φ, ascending,
    /// M-orthonormal.
    pub fn generalized_eigs(&self, count: usize) -> Result<Vec<EigenPair>> {
        let n = self.n_dof();
        if count == 0 || count > n {
            return Err(Error::domain(format!(
                "requested {count} eigenpairs of a pencil of size {n}"
            )));
        }
        let pairs = crate::linalg::pencil_eigenpairs(&self.stiffness, &self.mass, count)?;
        Ok(pairs
            .into_iter()
            .map(|(lambda, phi)| EigenPair {
                lambda,
                phi: CoefVec(phi),
            })
            .collect())
    }

    fn check_len(&self, what: &'static str, len: usize) -> Result<()> {
        if len != self.n_dof() {
            return Err(Error::LengthMismatch {
                what,
                expected: self.n_dof(),
                actual: len,
            });
        }
        Ok(())
    }
}

/// Cached factorization of τ^{-α} M + S.
#[derive(Debug, Clone)]
pub struct ShiftedSolver {
    tau_alpha: f64,
    matrix: SymTridiag,
    factor: TridiagCholesky,
}

impl ShiftedSolver {
    pub fn tau_alpha(&self) -> f64 {
        self.tau_alpha
    }

    pub fn matrix(&self) -> &SymTridiag {
        &self.matrix
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.factor.solve(rhs)
    }
}

/// Value at x of the P1 function with interior nodal values `u` on `mesh`.
pub fn eval_p1(mesh: &Mesh1D, u: &[f64], x: f64) -> f64 {
    let n = mesh.n_cells();
    let s = x.clamp(0.0, 1.0) * n as f64;
    let c = (s.floor() as usize).min(n - 1);
    let xi = s - c as f64;
    let left = if c == 0 { 0.0 } else { u[c - 1] };
    let right = if c + 1 == n { 0.0 } else { u[c] };
    left * (1.0 - xi) + right * xi
}

/// Nodal values of a P1 function on `coarse` prolongated to the nodes of the
/// nested mesh `fine`.
pub fn prolongate(coarse: &Mesh1D, u: &[f64], fine: &Mesh1D) -> Result<Vec<f64>> {
    if !coarse.is_refined_by(fine) {
        return Err(Error::NotNested {
            coarse: coarse.n_cells(),
            fine: fine.n_cells(),
        });
    }
    if u.len() != coarse.n_dof() {
        return Err(Error::LengthMismatch {
            what: "coarse coefficient vector",
            expected: coarse.n_dof(),
            actual: u.len(),
        });
    }
    Ok(fine
        .interior_nodes()
        .into_iter()
        .map(|x| eval_p1(coarse, u, x))
        .collect())
}

/// L2(0,1) distance between two P1 functions on nested uniform meshes,
/// integrated exactly cell by cell on the finer mesh.
pub fn p1_l2_distance(mesh_a: &Mesh1D, a: &[f64], mesh_b: &Mesh1D, b: &[f64]) -> Result<f64> {
    let (coarse, uc, fine, uf) = if mesh_a.n_cells() <= mesh_b.n_cells() {
        (mesh_a, a, mesh_b, b)
    } else {
        (mesh_b, b, mesh_a, a)
    };
    if uf.len() != fine.n_dof() {
        return Err(Error::LengthMismatch {
            what: "fine coefficient vector",
            expected: fine.n_dof(),
            actual: uf.len(),
        });
    }
    let up = prolongate(coarse, uc, fine)?;
    let h = fine.h();
    let n = fine.n_cells();
    let diff = |node: usize| -> f64 {
        if node == 0 || node == n {
            0.0
        } else {
            uf[node - 1] - up[node - 1]
        }
    };
    let mut sum = 0.0;
    for c in 0..n {
        let (d0, d1) = (diff(c), diff(c + 1));
        sum += d0 * d0 + d0 * d1 + d1 * d1;
    }
    Ok((sum * h / 3.0).sqrt())
}
