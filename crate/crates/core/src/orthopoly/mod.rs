//! Orthonormal bases for the Gaussian and the centred binomial weight law.

mod hermite;
mod krawtchouk;
mod weight_law;

pub use hermite::{hermite, hermite_all, HermiteBasis};
pub use krawtchouk::{verify_krawtchouk_bound, KrawtchoukBasis, KrawtchoukBoundReport};
pub use weight_law::{binomial_pmf, WeightLaw};
