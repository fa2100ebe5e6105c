//! Truncated Karhunen-Loève Q-Wiener noise.
//!
//! W(t, x) = Σ_{j=1}^{J} √q_j e_j(x) β_j(t) with e_j(x) = √2 sin(jπx) and
//! independent Brownian motions β_j. Increments are drawn once on the finest
//! time grid and summed for coarser grids, so every resolution of a
//! convergence ladder sees the same path.

use std::f64::consts::{PI, SQRT_2};
use std::io::{Read, Write};

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{FemOperators, Mesh1D, GAUSS3};
use crate::rng::sample_rng;

/// Upper bound on modes and fine steps accepted from configuration input.
pub const MAX_MODES: usize = 1 << 12;
pub const MAX_FINE_STEPS: usize = 1 << 20;

/// Magic bytes opening a binary path dump.
pub const PATH_DUMP_MAGIC: &[u8; 8] = b"QWPATH01";
pub const PATH_DUMP_HEADER_LEN: usize = 32;

/// Covariance operator Q, diagonal in the sine basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CovarianceSpec {
    /// q_j = j^{-decay}, j = 1..n_modes.
    PowerLaw { n_modes: usize, decay: f64 },
    /// q_j given explicitly.
    Explicit { eigenvalues: Vec<f64> },
}

impl Default for CovarianceSpec {
    fn default() -> Self {
        CovarianceSpec::PowerLaw {
            n_modes: 64,
            decay: 2.0,
        }
    }
}

impl CovarianceSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            CovarianceSpec::PowerLaw { n_modes, decay } => {
                if *n_modes == 0 || *n_modes > MAX_MODES {
                    return Err(Error::config(format!(
                        "n_modes must lie in 1..={MAX_MODES}, got {n_modes}"
                    )));
                }
                if !(*decay > 1.0 && decay.is_finite()) {
                    return Err(Error::config(format!(
                        "covariance decay must be > 1 for a trace-class Q, got {decay}"
                    )));
                }
            }
            CovarianceSpec::Explicit { eigenvalues } => {
                if eigenvalues.is_empty() || eigenvalues.len() > MAX_MODES {
                    return Err(Error::config(format!(
                        "explicit covariance needs 1..={MAX_MODES} eigenvalues, got {}",
                        eigenvalues.len()
                    )));
                }
                if let Some(bad) = eigenvalues.iter().find(|q| !(**q > 0.0 && q.is_finite())) {
                    return Err(Error::config(format!(
                        "covariance eigenvalues must be positive and finite, got {bad}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        match self {
            CovarianceSpec::PowerLaw { n_modes, .. } => *n_modes,
            CovarianceSpec::Explicit { eigenvalues } => eigenvalues.len(),
        }
    }

    /// q_1..q_J
    pub fn eigenvalues(&self) -> Vec<f64> {
        match self {
            CovarianceSpec::PowerLaw { n_modes, decay } => {
                (1..=*n_modes).map(|j| (j as f64).powf(-decay)).collect()
            }
            CovarianceSpec::Explicit { eigenvalues } => eigenvalues.clone(),
        }
    }

    /// Σ_{j≤J} q_j
    pub fn truncated_trace(&self) -> f64 {
        self.eigenvalues().iter().sum()
    }

    /// Fraction of tr Q retained by the truncation; `None` for explicit lists,
    /// which are their own full spectrum.
    pub fn trace_fraction(&self) -> Option<f64> {
        match self {
            CovarianceSpec::PowerLaw { decay, .. } => Some(self.truncated_trace() / zeta(*decay)),
            CovarianceSpec::Explicit { .. } => None,
        }
    }
}

/// Riemann zeta for s > 1 by Euler-Maclaurin summation.
fn zeta(s: f64) -> f64 {
    const N: usize = 32;
    let n = N as f64;
    let head: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    // tail Σ_{k≥N} k^{-s} = N^{1-s}/(s-1) + N^{-s}/2 + Σ B_{2m}/(2m)! s(s+1).. N^{-s-2m+1}
    let mut tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    let bernoulli_over_fact = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1_209_600.0];
    let mut rising = s;
    let mut power = n.powf(-s - 1.0);
    for (m, c) in bernoulli_over_fact.iter().enumerate() {
        tail += c * rising * power;
        let k = 2 * m as u32 + 1;
        rising *= (s + k as f64) * (s + k as f64 + 1.0);
        power /= n * n;
    }
    head + tail
}

/// Diffusion coefficient σ acting pointwise on the solution value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SigmaSpec {
    Zero,
    /// σ(u) = value (additive noise).
    Constant {
        value: f64,
    },
    /// σ(u) = c·u.
    Linear {
        c: f64,
    },
    /// σ(u) = amplitude·sin(u).
    Sine {
        amplitude: f64,
    },
}

impl SigmaSpec {
    pub fn apply(&self, u: f64) -> f64 {
        match *self {
            SigmaSpec::Zero => 0.0,
            SigmaSpec::Constant { value } => value,
            SigmaSpec::Linear { c } => c * u,
            SigmaSpec::Sine { amplitude } => amplitude * u.sin(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            SigmaSpec::Zero => true,
            SigmaSpec::Constant { value } => value == 0.0,
            SigmaSpec::Linear { c } => c == 0.0,
            SigmaSpec::Sine { amplitude } => amplitude == 0.0,
        }
    }

    /// Independent of the solution, so the exact mild solution is explicit.
    pub fn is_additive(&self) -> bool {
        matches!(self, SigmaSpec::Zero | SigmaSpec::Constant { .. }) || self.is_zero()
    }

    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            SigmaSpec::Zero => 0.0,
            SigmaSpec::Constant { value } => value,
            SigmaSpec::Linear { c } => c,
            SigmaSpec::Sine { amplitude } => amplitude,
        };
        if !v.is_finite() {
            return Err(Error::config("sigma parameters must be finite"));
        }
        Ok(())
    }
}

/// Brownian increments of all modes on a uniform time grid, stored mode-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Increments {
    n_modes: usize,
    n_steps: usize,
    tau: f64,
    data: Vec<f64>,
}

impl Increments {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Increments of mode j (0-based) over all steps.
    pub fn mode(&self, j: usize) -> &[f64] {
        &self.data[j * self.n_steps..(j + 1) * self.n_steps]
    }

    /// Increments of all modes over step m (0-based, covering [t_m, t_{m+1}]).
    pub fn step(&self, m: usize) -> Vec<f64> {
        (0..self.n_modes)
            .map(|j| self.data[j * self.n_steps + m])
            .collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// One sampled Q-Wiener path on the finest time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerPath {
    fine: Increments,
    t_final: f64,
    seed: u64,
    sample_id: u64,
}

impl WienerPath {
    /// Draw J × k_fine increments, each N(0, T/k_fine), from the stream
    /// derived from (seed, sample_id). Modes are filled in order, so the
    /// first J' < J modes do not depend on J.
    pub fn sample(
        spec: &CovarianceSpec,
        k_fine: usize,
        t_final: f64,
        seed: u64,
        sample_id: u64,
    ) -> Result<Self> {
        spec.validate()?;
        if k_fine == 0 || k_fine > MAX_FINE_STEPS {
            return Err(Error::config(format!(
                "fine step count must lie in 1..={MAX_FINE_STEPS}, got {k_fine}"
            )));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::config(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        let n_modes = spec.n_modes();
        let tau = t_final / k_fine as f64;
        let scale = tau.sqrt();
        let mut rng = sample_rng(seed, sample_id);
        let data: Vec<f64> = (0..n_modes * k_fine)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                scale * z
            })
            .collect();
        Ok(Self {
            fine: Increments {
                n_modes,
                n_steps: k_fine,
                tau,
                data,
            },
            t_final,
            seed,
            sample_id,
        })
    }

    /// Rebuild a path from decoded dump contents.
    pub fn from_increments(
        n_modes: usize,
        k_fine: usize,
        t_final: f64,
        data: Vec<f64>,
        seed: u64,
        sample_id: u64,
    ) -> Result<Self> {
        if n_modes == 0 || k_fine == 0 || data.len() != n_modes * k_fine {
            return Err(Error::LengthMismatch {
                what: "path increments (n_modes * k_fine)",
                expected: n_modes.saturating_mul(k_fine),
                actual: data.len(),
            });
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::domain("final time must be positive"));
        }
        Ok(Self {
            fine: Increments {
                n_modes,
                n_steps: k_fine,
                tau: t_final / k_fine as f64,
                data,
            },
            t_final,
            seed,
            sample_id,
        })
    }

    pub fn fine(&self) -> &Increments {
        &self.fine
    }

    pub fn n_modes(&self) -> usize {
        self.fine.n_modes
    }

    pub fn k_fine(&self) -> usize {
        self.fine.n_steps
    }

    pub fn tau_fine(&self) -> f64 {
        self.fine.tau
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample_id(&self) -> u64 {
        self.sample_id
    }

    /// Sum consecutive groups of `factor` fine increments per mode.
    pub fn coarsen(&self, factor: usize) -> Result<Increments> {
        let k = self.fine.n_steps;
        if factor == 0 || !k.is_multiple_of(factor) {
            return Err(Error::Divisibility { factor, total: k });
        }
        let n_steps = k / factor;
        let mut data = Vec::with_capacity(self.fine.n_modes * n_steps);
        for j in 0..self.fine.n_modes {
            for chunk in self.fine.mode(j).chunks_exact(factor) {
                let mut s = 0.0;
                for v in chunk {
                    s += v;
                }
                data.push(s);
            }
        }
        Ok(Increments {
            n_modes: self.fine.n_modes,
            n_steps,
            tau: self.t_final / n_steps as f64,
            data,
        })
    }

    /// Increments on a grid of `k_steps` uniform steps.
    pub fn increments_for(&self, k_steps: usize) -> Result<Increments> {
        if k_steps == 0 || !self.fine.n_steps.is_multiple_of(k_steps) {
            return Err(Error::Divisibility {
                factor: k_steps,
                total: self.fine.n_steps,
            });
        }
        self.coarsen(self.fine.n_steps / k_steps)
    }

    /// SHA-256 of the little-endian increment matrix, hex encoded.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for v in &self.fine.data {
            hasher.update(v.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }

    /// Binary dump: "QWPATH01", J (u64 LE), K_fine (u64 LE), T (f64 LE),
    /// then the J × K_fine increments as f64 LE, mode-major.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(PATH_DUMP_MAGIC)?;
        w.write_all(&(self.fine.n_modes as u64).to_le_bytes())?;
        w.write_all(&(self.fine.n_steps as u64).to_le_bytes())?;
        w.write_all(&self.t_final.to_le_bytes())?;
        for v in &self.fine.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_dump_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(PATH_DUMP_HEADER_LEN + 8 * self.fine.data.len());
        self.write_dump(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }
}

/// Contents of a decoded path dump.
#[derive(Debug, Clone, PartialEq)]
pub struct PathDump {
    pub n_modes: usize,
    pub k_fine: usize,
    pub t_final: f64,
    pub increments: Vec<f64>,
}

impl PathDump {
    /// Decode a dump from bytes. Rejects bad magic, inconsistent lengths,
    /// out-of-range dimensions and non-finite values.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < PATH_DUMP_HEADER_LEN {
            return Err(Error::Decode(format!(
                "{} bytes is shorter than the {PATH_DUMP_HEADER_LEN}-byte header",
                bytes.len()
            )));
        }
        if &bytes[..8] != PATH_DUMP_MAGIC {
            return Err(Error::Decode("bad magic".into()));
        }
        let word = |i: usize| -> [u8; 8] { bytes[i..i + 8].try_into().expect("8-byte slice") };
        let n_modes = u64::from_le_bytes(word(8));
        let k_fine = u64::from_le_bytes(word(16));
        let t_final = f64::from_le_bytes(word(24));
        if n_modes == 0 || n_modes > MAX_MODES as u64 {
            return Err(Error::Decode(format!("mode count {n_modes} out of range")));
        }
        if k_fine == 0 || k_fine > MAX_FINE_STEPS as u64 {
            return Err(Error::Decode(format!("step count {k_fine} out of range")));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::Decode(format!(
                "final time {t_final} is not positive"
            )));
        }
        let (n_modes, k_fine) = (n_modes as usize, k_fine as usize);
        let body = &bytes[PATH_DUMP_HEADER_LEN..];
        let expected = n_modes * k_fine * 8;
        if body.len() != expected {
            return Err(Error::Decode(format!(
                "body has {} bytes, header implies {expected}",
                body.len()
            )));
        }
        let increments: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        if increments.iter().any(|v| !v.is_finite()) {
            return Err(Error::Decode("non-finite increment".into()));
        }
        Ok(Self {
            n_modes,
            k_fine,
            t_final,
            increments,
        })
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::decode(&bytes)
    }

    pub fn into_path(self, seed: u64, sample_id: u64) -> Result<WienerPath> {
        WienerPath::from_increments(
            self.n_modes,
            self.k_fine,
            self.t_final,
            self.increments,
            seed,
            sample_id,
        )
    }
}

/// Precomputed √q_j e_j at every Gauss point of a mesh; assembles the
/// stochastic load vector of one time step.
#[derive(Debug, Clone)]
pub struct NoiseAssembler {
    mesh: Mesh1D,
    n_modes: usize,
    /// row q (quadrature point) × column j
    table: Vec<f64>,
}

impl NoiseAssembler {
    pub fn new(mesh: Mesh1D, spec: &CovarianceSpec) -> Result<Self> {
        spec.validate()?;
        let q = spec.eigenvalues();
        let n_modes = q.len();
        let h = mesh.h();
        let mut table = Vec::with_capacity(mesh.n_cells() * GAUSS3.len() * n_modes);
        for c in 0..mesh.n_cells() {
            for &(xi, _) in &GAUSS3 {
                let x = (c as f64 + xi) * h;
                for (j, qj) in q.iter().enumerate() {
                    table.push(qj.sqrt() * SQRT_2 * ((j + 1) as f64 * PI * x).sin());
                }
            }
        }
        Ok(Self {
            mesh,
            n_modes,
            table,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// N_i = Σ_j √q_j Δβ_j (σ(u) e_j, φ_i), with σ applied pointwise to the
    /// P1 function `u_prev` at the Gauss points.
    pub fn load(&self, u_prev: &[f64], sigma: &SigmaSpec, increments: &[f64]) -> Result<Vec<f64>> {
        let n_dof = self.mesh.n_dof();
        if increments.len() != self.n_modes {
            return Err(Error::LengthMismatch {
                what: "per-mode increments",
                expected: self.n_modes,
                actual: increments.len(),
            });
        }
        if u_prev.len() != n_dof {
            return Err(Error::LengthMismatch {
                what: "previous solution",
                expected: n_dof,
                actual: u_prev.len(),
            });
        }
        let mut load = vec![0.0; n_dof];
        if sigma.is_zero() {
            return Ok(load);
        }
        let n_cells = self.mesh.n_cells();
        let h = self.mesh.h();
        let mut row = 0;
        for c in 0..n_cells {
            let ul = if c == 0 { 0.0 } else { u_prev[c - 1] };
            let ur = if c + 1 == n_cells { 0.0 } else { u_prev[c] };
            let (mut left, mut right) = (0.0, 0.0);
            for &(xi, w) in &GAUSS3 {
                let basis = &self.table[row * self.n_modes..(row + 1) * self.n_modes];
                row += 1;
                let dw: f64 = basis.iter().zip(increments).map(|(b, d)| b * d).sum();
                let u = ul * (1.0 - xi) + ur * xi;
                let v = sigma.apply(u) * dw * w * h;
                left += v * (1.0 - xi);
                right += v * xi;
            }
            if c > 0 {
                load[c - 1] += left;
            }
            if c + 1 < n_cells {
                load[c] += right;
            }
        }
        Ok(load)
    }
}

/// One-shot form of [`NoiseAssembler::load`].
pub fn noise_load(
    ops: &FemOperators,
    spec: &CovarianceSpec,
    u_prev: &[f64],
    sigma: &SigmaSpec,
    increments: &[f64],
) -> Result<Vec<f64>> {
    NoiseAssembler::new(*ops.mesh(), spec)?.load(u_prev, sigma, increments)
}
