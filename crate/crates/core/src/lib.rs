//! Stationary entanglement of two filtered travelling optical output fields
//! produced by magnon-mediated Brillouin scattering in a YIG sphere.
//!
//! The model is a linearized three-mode system (magnon `m`, anti-Stokes
//! whispering-gallery mode `a2`, Stokes mode `b1`) with a beam-splitter
//! coupling `G_a` between `m` and `a2` and a two-mode-squeezing coupling
//! `G_b` between `m` and `b1`. The travelling output fields of the two
//! optical modes are passed through square temporal filters, and the
//! stationary 6x6 covariance matrix of (magnon, filtered A2, filtered B1)
//! is computed by frequency-domain integration of the filtered input-output
//! response. Entanglement of the two filtered output modes is quantified by
//! the logarithmic negativity.
//!
//! Crate layout:
//!
//! - [`params`]: physical parameters, thermal occupations, pump conversion
//! - [`dynamics`]: drift/diffusion matrices, stability, Lyapunov solver
//! - [`filters`]: square filter functions and the filter transformation
//! - [`spectrum`]: stationary output covariance matrix by quadrature
//! - [`entanglement`]: symplectic spectra, logarithmic negativity
//! - [`timesim`]: stochastic Langevin integration as an independent
//!   Monte-Carlo estimate of the same covariance matrix
//! - [`sweep`]: parameter sweeps, optimum search, persistence
//! - [`cli`]: command-line front end

pub mod cli;
pub mod config;
pub mod constants;
pub mod covariance;
pub mod dynamics;
pub mod entanglement;
pub mod filters;
pub mod params;
mod quad;
pub mod spectrum;
pub mod sweep;
pub mod timesim;

/// 6x6 real matrix in the quadrature ordering (X_m, Y_m, X_a2, Y_a2, X_b1, Y_b1).
pub type Mat6 = nalgebra::SMatrix<f64, 6, 6>;
/// 6x6 complex matrix in the same ordering.
pub type CMat6 = nalgebra::SMatrix<num_complex::Complex<f64>, 6, 6>;
/// 6-component real quadrature vector.
pub type Vec6 = nalgebra::SVector<f64, 6>;

pub use covariance::{CovMat, ModeOrdering, ModePair};
pub use dynamics::LinearModel;
pub use filters::{FilterPair, FilterSpec};
pub use params::{PumpSpec, SystemParams};
