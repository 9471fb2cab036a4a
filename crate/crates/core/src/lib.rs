//! Numerics for the two-parameter Poisson-Dirichlet family PD(alpha, theta):
//! exact stick-breaking sampling, correlation functions, the generalized
//! Dickman function and its Volterra/renewal solvers, ranked-weight densities
//! and moments, large-theta limit experiments, and Markov-Krein transform
//! identity checks -- each analytic path paired with an independent Monte
//! Carlo oracle.

pub mod asymptotics;
pub mod constants;
pub mod dickman;
pub mod error;
pub mod generating;
pub mod laws;
pub mod markov_krein;
pub mod numerics;
pub mod params;
pub mod sampler;
pub mod special;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use numerics::tabulated::TabulatedFunction;
pub use params::{validate_params, PDParams};
pub use sampler::{RankedPrefix, RngStream, StickSample};
