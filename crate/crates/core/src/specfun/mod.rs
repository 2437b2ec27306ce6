//! Gamma, Airy, confluent hypergeometric and error functions for real arguments.

mod airy;
mod erf;
mod gamma;
mod hypergeom;

pub use airy::{airy, airy_ai_log_derivative, airy_scaled, AiryQuad, AIRY_MAX, AIRY_MIN};
pub use erf::{erf_fn, normal_cdf};
pub use gamma::{gamma_fn, ln_gamma, pochhammer, rgamma, sin_pi};
pub use hypergeom::{kummer_m, kummer_m_prime, tricomi_u, tricomi_u_prime, HypergeomArgs};
