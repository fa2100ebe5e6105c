//! Special functions on the real line: Gamma utilities and the
//! two-parameter Mittag-Leffler function on the nonpositive axis.
//!
//! E_{α,1}(-λ t^α) and E_{α,α}(-λ t^α) are the per-mode actions of the
//! solution operators of the subdiffusion equation, so everything downstream
//! (the spectral oracle in particular) rests on this module.

mod gamma_fns;
mod mittag_leffler;

pub use gamma_fns::{
    gamma, gamma_ratio, gamma_ratio_offset, ln_gamma, recip_gamma, STIRLING_SHIFT,
};
pub use mittag_leffler::{
    mittag_leffler, ml, ml_series_coefficient, MlQuery, ASYMPTOTIC_RADIUS, SERIES_RADIUS,
};
