//! Numerical laboratory for low-degree advantage versus total-variation
//! distance between planted and null distributions.
//!
//! The crate is organised around the three settings in which the low-degree
//! advantage is related to statistical distance:
//!
//! * symmetric Boolean strings ([`orthopoly`], [`binomial`]), where every
//!   quantity can be computed exactly on the weight law;
//! * Gaussian vectors ([`symstats`], [`charfun`]), where the symmetric
//!   statistic `F_k` and its characteristic function are estimated;
//! * Wigner matrices ([`subgraph`]), through signed subgraph counts and
//!   second-order Poincaré bounds.
//!
//! Monte Carlo loops go through [`par`], which runs on rayon when the
//! `parallel` feature is enabled and falls back to plain iterators
//! otherwise. Results are identical either way.

pub mod binomial;
pub mod charfun;
pub mod error;
pub mod ldlr;
pub mod models;
pub mod orthopoly;
pub mod par;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod subgraph;
pub mod symstats;

pub use error::{Error, Result};
pub use stats::Estimate;
