//! Grünwald-type weights of the GMMP discretization of the Caputo derivative.
//!
//! For 0 < α < 1 the Caputo derivative at t_n on a uniform grid is
//! approximated by
//!
//! ```text
//! D^α u(t_n) ≈ τ^{-α} [ Σ_{k=0}^{n} ω_k u(t_{n-k}) - b_n u(t_0) ]
//! ```
//!
//! with ω_k = (-1)^k C(α, k) and b_n = Σ_{k≤n} ω_k. The ω_k are generated by
//! the recurrence ω_k = ω_{k-1} (1 - (1+α)/k), which avoids Γ(-α) and the
//! overflow of the closed form for large k.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GmmpWeights {
    alpha: f64,
    omega: Vec<f64>,
    b: Vec<f64>,
}

impl GmmpWeights {
    /// Weights ω_0..ω_{n_max} and partial sums b_0..b_{n_max} for 0 < α < 1.
    pub fn new(alpha: f64, n_max: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!(
                "GMMP weights need 0 < alpha < 1, got {alpha}"
            )));
        }
        if n_max == 0 {
            return Err(Error::domain("GMMP weights need n_max >= 1"));
        }
        Ok(Self::from_recurrence(alpha, n_max))
    }

    /// The α = 1 limit of the recurrence, ω = [1, -1, 0, 0, ...].
    ///
    /// Bypasses the (0, 1) guard of [`GmmpWeights::new`]; with these weights
    /// the stepper reduces to backward Euler.
    pub fn backward_euler_limit(n_max: usize) -> Self {
        Self::from_recurrence(1.0, n_max.max(1))
    }

    fn from_recurrence(alpha: f64, n_max: usize) -> Self {
        let mut omega = Vec::with_capacity(n_max + 1);
        let mut b = Vec::with_capacity(n_max + 1);
        let mut w = 1.0;
        let mut sum = 0.0;
        for k in 0..=n_max {
            if k > 0 {
                w *= 1.0 - (1.0 + alpha) / k as f64;
            }
            sum += w;
            omega.push(w);
            b.push(sum);
        }
        Self { alpha, omega, b }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Largest n for which weights are available.
    pub fn n_max(&self) -> usize {
        self.omega.len() - 1
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// GMMP approximation of the Caputo derivative at t_n from samples
    /// u(t_0), ..., u(t_n) with step `tau`.
    pub fn caputo_apply(&self, samples: &[f64], tau: f64) -> Result<f64> {
        if samples.is_empty() || samples.len() > self.omega.len() {
            return Err(Error::LengthMismatch {
                what: "caputo_apply samples (at most n_max + 1)",
                expected: self.omega.len(),
                actual: samples.len(),
            });
        }
        if !(tau > 0.0) {
            return Err(Error::domain(format!("tau must be positive, got {tau}")));
        }
        let n = samples.len() - 1;
        let conv: f64 = self.omega[..=n]
            .iter()
            .zip(samples.iter().rev())
            .map(|(w, u)| w * u)
            .sum();
        Ok((conv - self.b[n] * samples[0]) * tau.powf(-self.alpha))
    }
}
