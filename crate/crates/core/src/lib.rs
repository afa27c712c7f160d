//! Exact verification of the diameters of wandering Fatou components for the
//! polynomials `P_a(z) = a z^p + (1 - a) z^(p+1)` over a non-Archimedean field.
//!
//! Norms are tracked as exponents of `|a|`, so every statement reduces to an
//! identity between rationals.
//!
//! - [`scale`]: constants, block schedule, closed-form sums.
//! - [`flow`]: step-by-step ball propagation through the itinerary.
//! - [`cantor`]: the Cantor set of attainable diameters and digit decomposition.
//! - [`field`]: truncated arithmetic in a totally ramified extension of `Q_p`.

pub mod cantor;
pub mod field;
pub mod flow;
pub mod scale;

pub use scale::{EllSpec, Exponent, ExponentInterval, PrimeParams, Schedule};
