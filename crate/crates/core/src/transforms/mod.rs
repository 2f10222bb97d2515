//! Short-time Fourier transforms, ambiguity functions and the holomorphic
//! (Fock space) view of Gabor transforms.

mod ambiguity;
mod fock;
mod recover;
mod stft;
mod window_ratio;

pub use ambiguity::{ambiguity, ambiguity_relation_residual, measurement_to_ambiguity_product};
pub use fock::{fock_polynomial_field, gabor_from_fock, log_derivative_ratio, modulus_gradient, FockField};
pub use recover::{add_measurement_noise, recover, Recovery, RecoveryReport};
pub use stft::{covariance_residual, phaseless, stft, WindowSpec};
pub use window_ratio::{window_comparison_ratio, WindowRatio};
