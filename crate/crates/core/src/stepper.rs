//! Fully discrete GMMP-Galerkin scheme.
//!
//! Step n → n+1 solves
//!
//! ```text
//! (τ^{-α} M + S) u^{n+1} = τ^{-α} M (b_{n+1} u^0 - Σ_{k=1}^{n+1} ω_k u^{n+1-k})
//!                          + τ^{-1} N(u^n, Δβ^{n+1})
//! ```
//!
//! where N is the stochastic load of [`crate::noise::NoiseAssembler`]. The
//! τ^{-α} factor multiplies the whole history term; it follows from writing
//! the GMMP quotient τ^{-α}[Σ_{k=0}^{n+1} ω_k u^{n+1-k} - b_{n+1} u^0] and
//! moving the k = 0 term to the left. σ is evaluated at the left point u^n.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{eval_p1, p1_l2_distance, FemOperators, Mesh1D, ShiftedSolver};
use crate::noise::{CovarianceSpec, NoiseAssembler, SigmaSpec, WienerPath};
use crate::weights::GmmpWeights;

/// Upper bound on the number of time steps accepted from configuration input.
pub const MAX_STEPS: usize = 1 << 16;

/// One sine mode c·√2 sin(jπx).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SineMode {
    pub j: usize,
    pub coef: f64,
}

/// Closed catalog of initial conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Σ coef·√2 sin(jπx).
    SineModes { modes: Vec<SineMode> },
    /// amplitude·16 x²(1-x)², peak value `amplitude` at x = 1/2.
    Bump { amplitude: f64 },
    /// Values at the interior nodes of the configured mesh.
    Nodal { values: Vec<f64> },
}

impl InitialCondition {
    /// sin(πx), i.e. the first sine mode with coefficient 1/√2.
    pub fn sin_pi() -> Self {
        InitialCondition::SineModes {
            modes: vec![SineMode {
                j: 1,
                coef: 1.0 / SQRT_2,
            }],
        }
    }

    pub fn zero() -> Self {
        InitialCondition::SineModes { modes: Vec::new() }
    }

    fn validate(&self, mesh: &Mesh1D) -> Result<()> {
        match self {
            InitialCondition::SineModes { modes } => {
                for m in modes {
                    if m.j == 0 || !m.coef.is_finite() {
                        return Err(Error::config(format!(
                            "sine modes need j >= 1 and a finite coefficient, got j={} coef={}",
                            m.j, m.coef
                        )));
                    }
                }
            }
            InitialCondition::Bump { amplitude } => {
                if !amplitude.is_finite() {
                    return Err(Error::config("bump amplitude must be finite"));
                }
            }
            InitialCondition::Nodal { values } => {
                if values.len() != mesh.n_dof() {
                    return Err(Error::LengthMismatch {
                        what: "nodal initial condition",
                        expected: mesh.n_dof(),
                        actual: values.len(),
                    });
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::config("nodal initial values must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Point value; nodal data is read as its P1 interpolant on `mesh`.
    pub fn eval(&self, mesh: &Mesh1D, x: f64) -> f64 {
        match self {
            InitialCondition::SineModes { modes } => modes
                .iter()
                .map(|m| m.coef * SQRT_2 * (m.j as f64 * PI * x).sin())
                .sum(),
            InitialCondition::Bump { amplitude } => {
                let s = x * (1.0 - x);
                16.0 * amplitude * s * s
            }
            InitialCondition::Nodal { values } => eval_p1(mesh, values, x),
        }
    }
}

/// Parameters of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub alpha: f64,
    pub t_final: f64,
    pub k_steps: usize,
    #[serde(rename = "n_cells")]
    pub mesh: Mesh1D,
    #[serde(default)]
    pub covariance: CovarianceSpec,
    #[serde(default = "zero_sigma")]
    pub sigma: SigmaSpec,
    pub u0: InitialCondition,
}

fn zero_sigma() -> SigmaSpec {
    SigmaSpec::Zero
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        self.validate_except_alpha()
    }

    fn validate_except_alpha(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::config(format!(
                "t_final must be positive and finite, got {}",
                self.t_final
            )));
        }
        if self.k_steps == 0 || self.k_steps > MAX_STEPS {
            return Err(Error::config(format!(
                "k_steps must lie in 1..={MAX_STEPS}, got {}",
                self.k_steps
            )));
        }
        self.covariance.validate()?;
        self.sigma.validate()?;
        self.u0.validate(&self.mesh)
    }

    pub fn tau(&self) -> f64 {
        self.t_final / self.k_steps as f64
    }

    pub fn with_mesh(&self, mesh: Mesh1D) -> Self {
        let mut c = self.clone();
        if let InitialCondition::Nodal { values } = &self.u0 {
            // Carry nodal data across meshes through its P1 interpolant.
            let nodes = mesh.interior_nodes();
            c.u0 = InitialCondition::Nodal {
                values: nodes
                    .iter()
                    .map(|&x| eval_p1(&self.mesh, values, x))
                    .collect(),
            };
        }
        c.mesh = mesh;
        c
    }

    pub fn with_k_steps(&self, k_steps: usize) -> Self {
        Self {
            k_steps,
            ..self.clone()
        }
    }
}

/// Running state of the scheme: full history of coefficient vectors.
#[derive(Debug, Clone)]
pub struct SchemeState {
    step_index: usize,
    k_steps: usize,
    n_dof: usize,
    tau: f64,
    tau_alpha: f64,
    /// u^0..u^n, contiguous, n_dof values each
    history: Vec<f64>,
    weights: GmmpWeights,
    ops: FemOperators,
    solver: ShiftedSolver,
    sigma: SigmaSpec,
    noise: Option<NoiseAssembler>,
    scratch: Vec<f64>,
}

impl SchemeState {
    /// u^0 = P_h u0, weights for n_max = K.
    pub fn init(config: &SchemeConfig) -> Result<Self> {
        config.validate()?;
        let weights = GmmpWeights::new(config.alpha, config.k_steps)?;
        Self::build(config, weights)
    }

    /// The same scheme driven by the α = 1 weights [1, -1, 0, ...], which is
    /// backward Euler (M + τS) u^{n+1} = M u^n + N. `config.alpha` is ignored.
    pub fn init_backward_euler(config: &SchemeConfig) -> Result<Self> {
        config.validate_except_alpha()?;
        Self::build(config, GmmpWeights::backward_euler_limit(config.k_steps))
    }

    fn build(config: &SchemeConfig, weights: GmmpWeights) -> Result<Self> {
        let ops = FemOperators::assemble(config.mesh);
        let tau = config.tau();
        let tau_alpha = tau.powf(weights.alpha());
        let solver = ops.shifted_solver(tau_alpha)?;
        let u0 = ops.l2_project(|x| config.u0.eval(&config.mesh, x));
        let n_dof = ops.n_dof();
        let mut history = Vec::with_capacity((config.k_steps + 1) * n_dof);
        history.extend_from_slice(&u0);
        let noise = if config.sigma.is_zero() {
            None
        } else {
            Some(NoiseAssembler::new(config.mesh, &config.covariance)?)
        };
        Ok(Self {
            step_index: 0,
            k_steps: config.k_steps,
            n_dof,
            tau,
            tau_alpha,
            history,
            weights,
            ops,
            solver,
            sigma: config.sigma,
            noise,
            scratch: vec![0.0; n_dof],
        })
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn operators(&self) -> &FemOperators {
        &self.ops
    }

    pub fn weights(&self) -> &GmmpWeights {
        &self.weights
    }

    /// u^m for m ≤ n.
    pub fn solution(&self, m: usize) -> &[f64] {
        &self.history[m * self.n_dof..(m + 1) * self.n_dof]
    }

    pub fn current(&self) -> &[f64] {
        self.solution(self.step_index)
    }

    /// Advance one step. `increments` holds the J Brownian increments over
    /// [t_n, t_{n+1}]; it may be `None` only when σ ≡ 0.
    pub fn step(&mut self, increments: Option<&[f64]>) -> Result<()> {
        let n = self.step_index;
        if n + 1 > self.k_steps {
            return Err(Error::HistoryOverflow {
                step: n + 1,
                k_steps: self.k_steps,
            });
        }
        let nd = self.n_dof;
        let omega = self.weights.omega();
        let b = self.weights.b()[n + 1];

        // acc = b_{n+1} u^0 - Σ_{k=1}^{n+1} ω_k u^{n+1-k}
        let acc = &mut self.scratch;
        for (a, u) in acc.iter_mut().zip(&self.history[..nd]) {
            *a = b * u;
        }
        for (k, &w) in omega.iter().enumerate().take(n + 2).skip(1) {
            if w == 0.0 {
                continue;
            }
            let m = n + 1 - k;
            let u = &self.history[m * nd..(m + 1) * nd];
            for (a, v) in acc.iter_mut().zip(u) {
                *a -= w * v;
            }
        }
        let mut rhs = self.ops.mass().mul(acc);
        let scale = 1.0 / self.tau_alpha;
        for r in rhs.iter_mut() {
            *r *= scale;
        }

        if let Some(noise) = &self.noise {
            let incr = increments.ok_or_else(|| {
                Error::config("a nonzero sigma needs Brownian increments for every step")
            })?;
            let load = noise.load(&self.history[n * nd..(n + 1) * nd], &self.sigma, incr)?;
            let inv_tau = 1.0 / self.tau;
            for (r, l) in rhs.iter_mut().zip(&load) {
                *r += inv_tau * l;
            }
        }

        let next = self.solver.solve(&rhs);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite solution at step {}",
                n + 1
            )));
        }
        self.history.extend_from_slice(&next);
        self.step_index = n + 1;
        Ok(())
    }

    pub fn into_trajectory(self) -> Trajectory {
        let times = (0..=self.step_index).map(|m| m as f64 * self.tau).collect();
        Trajectory {
            mesh: *self.ops.mesh(),
            times,
            n_dof: self.n_dof,
            values: self.history,
        }
    }
}

/// Coefficient vectors at t_0..t_K.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    mesh: Mesh1D,
    times: Vec<f64>,
    n_dof: usize,
    values: Vec<f64>,
}

impl Trajectory {
    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, m: usize) -> &[f64] {
        &self.values[m * self.n_dof..(m + 1) * self.n_dof]
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("a trajectory holds at least u^0")
    }

    /// CSV with header `t,x_1,...,x_N` and one row per `stride`-th step; the
    /// final step is always written.
    pub fn write_csv<W: Write>(&self, mut w: W, stride: usize) -> Result<()> {
        let stride = stride.max(1);
        let mut header = String::from("t");
        for i in 1..=self.n_dof {
            header.push_str(&format!(",x_{i}"));
        }
        writeln!(w, "{header}")?;
        let last = self.len() - 1;
        for m in 0..self.len() {
            if m % stride != 0 && m != last {
                continue;
            }
            let mut line = format!("{:.16e}", self.times[m]);
            for v in self.state(m) {
                line.push_str(&format!(",{v:.16e}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Execute all K steps. The path is coarsened to the scheme's τ; it is only
/// consulted when σ ≢ 0.
pub fn run(config: &SchemeConfig, path: Option<&WienerPath>) -> Result<Trajectory> {
    let state = SchemeState::init(config)?;
    drive(state, config, path)
}

/// [`run`] with the backward Euler weights.
pub fn run_backward_euler(config: &SchemeConfig, path: Option<&WienerPath>) -> Result<Trajectory> {
    let state = SchemeState::init_backward_euler(config)?;
    drive(state, config, path)
}

fn drive(
    mut state: SchemeState,
    config: &SchemeConfig,
    path: Option<&WienerPath>,
) -> Result<Trajectory> {
    let increments = match (config.sigma.is_zero(), path) {
        (true, _) => None,
        (false, None) => {
            return Err(Error::config("a nonzero sigma needs a Wiener path"));
        }
        (false, Some(p)) => {
            if p.n_modes() != config.covariance.n_modes() {
                return Err(Error::LengthMismatch {
                    what: "Wiener path modes vs covariance modes",
                    expected: config.covariance.n_modes(),
                    actual: p.n_modes(),
                });
            }
            if (p.t_final() - config.t_final).abs() > 1e-12 * config.t_final {
                return Err(Error::config(format!(
                    "path horizon {} differs from t_final {}",
                    p.t_final(),
                    config.t_final
                )));
            }
            Some(p.increments_for(config.k_steps)?)
        }
    };
    let mut buf = Vec::new();
    for m in 0..config.k_steps {
        let incr = match &increments {
            Some(inc) => {
                buf.clear();
                buf.extend((0..inc.n_modes()).map(|j| inc.mode(j)[m]));
                Some(buf.as_slice())
            }
            None => None,
        };
        state.step(incr)?;
    }
    Ok(state.into_trajectory())
}

/// L2(0,1) distance between the final states of two trajectories on nested
/// meshes sharing the same final time.
pub fn strong_error_at_t(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    let (ta, tb) = (a.final_time(), b.final_time());
    if (ta - tb).abs() > 1e-12 * ta.abs().max(tb.abs()) {
        return Err(Error::domain(format!(
            "trajectories end at different times {ta} and {tb}"
        )));
    }
    p1_l2_distance(a.mesh(), a.final_state(), b.mesh(), b.final_state())
}
