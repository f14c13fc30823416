//! Numerical kernels shared by every other module.

pub mod jet;
pub mod quadrature;
pub mod roots;
pub mod spectral;

pub use jet::Jet;
pub use quadrature::{integrate, integrate_with_estimate, Integral, QuadratureSpec};
pub use roots::{find_root_monotone, newton_monotone};
pub use spectral::{spectral_derivative, SampledPeriodic};
