//! Functional calculus beyond plain spectral powers: the resolvent integral
//! for `s^{1+θ}`, contour integrals, left/right multiplication
//! superoperators, and the Fréchet derivative of the power map.

mod contour;
mod frechet;
mod integral;
pub mod quadrature;
mod superop;

pub use contour::{contour_power, ContourSpec, DEFAULT_CONTOUR_NODES, MAX_CONTOUR_NODES};
pub use frechet::{
    by_contour, divided_difference, finite_difference_step, frechet_derivative, scalar_contour_kernel,
    DerivativeMethod,
};
pub use integral::{c_theta, power_integral, QuadratureScheme, ResolventNodes, MAX_RESOLVENT_CONDITION};
pub use superop::{
    left_superop, mixed_multiplication, right_superop, superop_power, unvectorize, vectorize, SuperOperator,
};
