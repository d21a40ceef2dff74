//! Normalized signed subgraph counts in Wigner matrices, their derivative
//! statistics, the second-order Poincare TV bound, and null moment checks.

mod derivs;
mod pattern;
mod pipeline;
mod shape;

pub use derivs::{
    grad_hess_stats, gradient, gradient_generic, hess_vec,
    hess_vec_generic, hessian_norm, noisy_point, sigma2, sigma2_enumerated, sigma2_floor, upper_dot,
    GradHessStats, PowerResult, Sigma2Mode, EXACT_MAX_EDGES, EXACT_MAX_N, POWER_STEPS, POWER_TOL,
};
pub use pattern::{chi_many, chi_theta, chi_theta_generic, make_pattern, parse_edge_list, GraphPattern, Motif};
pub use pipeline::{
    chatterjee_bound, chatterjee_stats, gaussian_moment_ratio, has_closed_form, moment_check, noisy_count_laws,
    null_count_law, null_moments, results_csv, ChatterjeeStats, MomentReport, MomentRow, NoisyCountLaws,
    ResultRow, RESULT_HEADER,
};
pub use shape::{connected_shapes, EntryCache, Shape, MAX_VERTICES};
