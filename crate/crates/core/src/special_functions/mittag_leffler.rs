//! Two-parameter Mittag-Leffler function E_{α,β}(z) = Σ z^n / Γ(αn+β) for
//! 0 < α ≤ 1, β > 0 and real z ≤ 0.
//!
//! Three regimes:
//!
//! * |z| ≤ [`SERIES_RADIUS`]: Taylor series with Neumaier summation.
//! * |z| ≥ [`ASYMPTOTIC_RADIUS`] and α < 1: the algebraic expansion
//!   -Σ_{k≥1} z^{-k}/Γ(β-αk), truncated at the smallest term. The
//!   exponentially small remainder is below e^{-|z|^{1/α}|cos(π/α)|}, which is
//!   negligible relative to the algebraic part for |z| ≥ 50.
//! * otherwise: inversion of the Laplace transform s^{α-β}/(s^α - z) along a
//!   parabolic contour with the trapezoidal rule (optimal-parameter choice for
//!   a transform whose only singularity on the principal sheet is the branch
//!   cut along the negative axis).
//!
//! E_{1,1}(z) is evaluated as exp(z) directly.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma_fns::{ln_gamma, recip_gamma};
use crate::error::{Error, Result};

/// Largest |z| handled by the Taylor series.
pub const SERIES_RADIUS: f64 = 1.0;

/// Smallest |z| handled by the asymptotic expansion (α < 1 only).
pub const ASYMPTOTIC_RADIUS: f64 = 50.0;

/// Target absolute accuracy of the contour quadrature.
const CONTOUR_EPS: f64 = 1e-15;

const MAX_SERIES_TERMS: usize = 400;
const MAX_ASYMPTOTIC_TERMS: usize = 200;

/// A validated argument triple for [`mittag_leffler`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlQuery {
    alpha: f64,
    beta: f64,
    z: f64,
}

impl MlQuery {
    pub fn new(alpha: f64, beta: f64, z: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::domain(format!(
                "Mittag-Leffler alpha must lie in (0, 1], got {alpha}"
            )));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain(format!(
                "Mittag-Leffler beta must be positive, got {beta}"
            )));
        }
        if !(z <= 0.0) || z.is_infinite() {
            return Err(Error::domain(format!(
                "Mittag-Leffler argument must be finite and <= 0, got {z}"
            )));
        }
        Ok(Self { alpha, beta, z })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn z(&self) -> f64 {
        self.z
    }
}

/// E_{α,β}(z) for a validated query.
pub fn mittag_leffler(q: &MlQuery) -> f64 {
    let MlQuery { alpha, beta, z } = *q;
    if z == 0.0 {
        return recip_gamma(beta);
    }
    if alpha == 1.0 && beta == 1.0 {
        return z.exp();
    }
    let r = -z;
    if r <= SERIES_RADIUS {
        series(alpha, beta, z)
    } else if r >= ASYMPTOTIC_RADIUS && alpha < 1.0 {
        asymptotic(alpha, beta, z)
    } else {
        contour(alpha, beta, z)
    }
}

/// Checked convenience wrapper around [`MlQuery::new`] and [`mittag_leffler`].
pub fn ml(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    MlQuery::new(alpha, beta, z).map(|q| mittag_leffler(&q))
}

/// n-th Taylor coefficient 1/Γ(αn+β).
pub fn ml_series_coefficient(alpha: f64, beta: f64, n: usize) -> f64 {
    recip_gamma(alpha * n as f64 + beta)
}

fn series(alpha: f64, beta: f64, z: f64) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    let mut zn = 1.0_f64;
    for n in 0..MAX_SERIES_TERMS {
        let term = zn * ml_series_coefficient(alpha, beta, n);
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        if n > 4 && term.abs() <= 1e-18 * (sum + comp).abs() {
            break;
        }
        zn *= z;
    }
    sum + comp
}

fn asymptotic(alpha: f64, beta: f64, z: f64) -> f64 {
    // Individual terms dip near the poles of Γ(β-αk), so truncation is
    // driven by the envelope |z|^{-k} Γ(1+αk-β)/π ≥ |z^{-k}/Γ(β-αk)|.
    let ln_r = (-z).ln();
    let inv = 1.0 / z;
    let mut zk = 1.0_f64;
    let mut sum = 0.0_f64;
    let mut last_envelope = f64::INFINITY;
    for k in 1..=MAX_ASYMPTOTIC_TERMS {
        zk *= inv;
        let arg = beta - alpha * k as f64;
        sum -= zk * recip_gamma(arg);
        if 1.0 - arg > 0.0 {
            let envelope = (ln_gamma(1.0 - arg) - k as f64 * ln_r - PI.ln()).exp();
            if envelope > last_envelope || envelope <= 1e-18 * sum.abs() {
                break;
            }
            last_envelope = envelope;
        }
    }
    sum
}

/// Parameters (μ, h, N) of the parabolic contour s(u) = μ(1 + iu)^2 sampled
/// at u = hk, |k| ≤ N, for a transform analytic off the negative axis whose
/// behaviour at the origin is governed by the exponent `p`.
fn contour_parameters(p: f64, log_eps: f64) -> (f64, f64, usize) {
    let log_mach = f64::EPSILON.ln();
    let mut phibar: f64 = 0.01;
    let (mut mu, mut h, mut n);
    let mut iterations = 0;
    loop {
        let log_eps_phi = log_eps / phibar;
        n = (phibar / PI * (1.0 - 1.5 * log_eps_phi + (1.0 - 2.0 * log_eps_phi).sqrt())).ceil();
        let a = PI * n / phibar;
        let sq_mu = phibar.sqrt() * (4.0 - a).abs() / (7.0 - (1.0 + 12.0 * a).sqrt()).abs();
        mu = sq_mu * sq_mu;
        h = (-3.0 * a - 2.0 + 2.0 * (1.0 + 12.0 * a).sqrt()) / (4.0 - a) / n;
        iterations += 1;
        if p < 1e-14 || iterations > 100 {
            break;
        }
        let fbar = (phibar.sqrt() / sq_mu).powf(-p);
        if fbar > 1.0 && fbar < 10.0 {
            break;
        }
        let sq_phibar = 5.0_f64.powf(-1.0 / p) * sq_mu;
        phibar = sq_phibar * sq_phibar;
    }
    let threshold = log_eps - log_mach;
    if mu > threshold {
        let q = if p.abs() < 1e-14 {
            0.0
        } else {
            5.0_f64.powf(-1.0 / p) * mu.sqrt()
        };
        let phibar = q * q;
        if phibar < threshold {
            let w = (log_mach / (log_mach - log_eps)).sqrt();
            let u = (-phibar / log_mach).sqrt();
            mu = threshold;
            n = (w * log_eps / (2.0 * PI) / (u * w - 1.0)).ceil();
            h = w / n;
        }
    }
    (mu, h, n as usize)
}

fn contour(alpha: f64, beta: f64, z: f64) -> f64 {
    let p = (2.0 * (beta - alpha - 1.0)).max(0.0);
    let (mu, h, n) = contour_parameters(p, CONTOUR_EPS.ln());
    let integrand = |u: f64| -> Complex64 {
        let s = mu * Complex64::new(1.0, u).powi(2);
        let ds = Complex64::new(-2.0 * mu * u, 2.0 * mu);
        s.exp() * s.powf(alpha - beta) / (s.powf(alpha) - z) * ds
    };
    // The integrand is conjugate-symmetric in u, so only k ≥ 0 is summed.
    let mut acc = integrand(0.0).im;
    for k in 1..=n {
        acc += 2.0 * integrand(h * k as f64).im;
    }
    // Re( h Σ F / (2πi) ) = h Σ Im F / (2π)
    h * acc / (2.0 * PI)
}
