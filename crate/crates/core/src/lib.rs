//! Steady states and relative-phase synchronization measures for star
//! networks of dissipative spin-1 oscillators.
//!
//! A network is one hub (site 0) coupled to `N` identical leaves (sites
//! `1..=N`). Every site relaxes toward its `m = 0` level through a gain
//! channel (`m=-1 → 0`) and a damping channel (`m=+1 → 0`); the hub hops
//! excitations to and from every leaf. The crate
//!
//! - assembles the sparse Liouvillian on column-stacked density matrices
//!   ([`lindblad`]),
//! - computes its steady state with a sparse LU solve and cross-checks it by
//!   explicit time evolution,
//! - reduces the steady state to hub–leaf and leaf–leaf pairs and evaluates
//!   the relative-phase distribution `S2(φ)` and the peak-contrast measure
//!   ([`measures`]),
//! - runs 1D/2D parameter sweeps over coupling, detuning and rates
//!   ([`sweep`]).
//!
//! ```no_run
//! use starsync_core::lindblad::{build_liouvillian, steady_state, NetworkConfig};
//! use starsync_core::measures::pair_report;
//!
//! let config = NetworkConfig::identical(4, 1.0, 1.0, 0.2);
//! let l = build_liouvillian(&config).unwrap();
//! let rho = steady_state(&l, 1e-10).unwrap();
//! let leaf_leaf = pair_report(&rho, 1, 2, 2048).unwrap();
//! println!("S12 = {}", leaf_leaf.measure.value);
//! ```

use num_complex::Complex64;

pub mod lindblad;
pub mod measures;
pub mod sparse;
pub mod spin;
pub mod sweep;

pub(crate) const C64_ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("site {site} out of range for a {n_sites}-site network")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("invalid `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("invalid pair ({i}, {j}): {reason}")]
    InvalidPair { i: usize, j: usize, reason: &'static str },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("steady-state solver did not converge (relative residual {residual:.3e})")]
    NotConverged { residual: f64 },

    #[error("steady state is not unique: {0}")]
    Degenerate(String),

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("time step {dt:.3e} exceeds the stability bound {max_dt:.3e}")]
    StepTooLarge { dt: f64, max_dt: f64 },

    #[error("trace drifted by {drift:.3e} during time evolution; reduce the step size")]
    TraceDrift { drift: f64 },

    #[error("time evolution did not reach a fixed point within t = {t_max} (distance estimate {distance:.3e})")]
    Indeterminate { t_max: f64, distance: f64 },

    #[error("Husimi quadrature not converged: doubling the order changed S2 by {change:.3e}")]
    QuadratureNotConverged { change: f64 },

    #[error("invalid sweep axis: {0}")]
    InvalidAxis(String),
}
