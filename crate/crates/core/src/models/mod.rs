//! Null and planted distributions, the three noise operators, and exact
//! small-instance oracles for noisy laws.

mod container;
mod matrix;
mod noise;
mod oracle;
mod sampling;
mod spec;

pub use container::{read_batch, write_batch, write_csv};
pub use matrix::SymMatrix;
pub use noise::{
    apply_boolean_noise, apply_ou_noise, apply_ou_noise_matrix, boolean_noise_in_place,
    ou_noise_in_place, ou_noise_matrix_in_place,
};
pub use oracle::{noisy_weight_law, HypercubeLaw};
pub use sampling::{sample, Payload, SampleBatch, Sampler};
pub use spec::{quadrature_product_spec, Domain, NullSpec, PlantedKind, PlantedSpec, Spec, SpikeSigns};
