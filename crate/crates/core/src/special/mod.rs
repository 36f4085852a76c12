//! Special functions: complex log-Gamma, quadrature and Mellin-Barnes integrals.

pub mod bessel;
pub mod bivariate;
pub mod foxh;
pub mod gamma;
pub mod mellin;
pub mod quad;

pub use bivariate::{bivariate_foxh, bivariate_mellin, BivariateFoxHSpec, JointFactor};
pub use foxh::{choose_contour, foxh, foxh_on_contour, meijerg, FoxHSpec, GammaFactor};
pub use gamma::{gamma, ln_gamma, log_gamma_complex};
pub use mellin::{integrate_vertical, MellinKernel, QuadratureConfig, Strip};
