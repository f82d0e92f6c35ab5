//! Simulation and statistical verification toolkit for Brownian motions with
//! interacting drifts on finite conductance graphs, their Lamperti time
//! change, and the associated random beta potential.
//!
//! The library is organized around five layers:
//!
//! - [`graph`] / [`linalg`] / [`timesplit`]: conductance graphs, the matrix
//!   families `H_beta` and `K_t`, factorizations, and the exact split
//!   identities.
//! - [`dist`]: exact samplers and density evaluators for the one-dimensional
//!   building blocks (Inverse Gaussian, Gamma, generalized Inverse Gaussian,
//!   3-dimensional Bessel bridges) plus the modified Bessel function K.
//! - [`sde`]: the absorbing interacting SDE system, the time-changed system,
//!   the Lamperti transform between them, and the restart map.
//! - [`potential`]: the beta potential's density, quadrature normalization,
//!   an independent Metropolis sampler, and the pathwise martingale
//!   quantities.
//! - [`verify`]: Kolmogorov-Smirnov machinery and the named verification
//!   suites that turn distributional identities into pass/fail reports.

pub mod error;
pub mod graph;
pub mod linalg;
pub mod dist;
pub mod rng;
pub mod timesplit;

pub use error::{Error, Result};
pub use graph::{
    h_beta, k_t, one_vertex_params, path_graph_params, two_vertex_params, BetaPoint,
    ConductanceMatrix, GraphJson, ModelParams, TimeVector,
};
pub use linalg::{is_positive_definite, Cholesky, Lu, SquareMat};
pub use rng::RngStream;
pub use timesplit::{random_admissible_split, split_identity_residuals, SplitResiduals, SplitSystem};
