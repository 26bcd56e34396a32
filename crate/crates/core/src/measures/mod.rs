//! Pair-reduced states, phase correlators and relative-phase measures.
//!
//! For two spin-1 sites the relative-phase distribution is a pure two-term
//! Fourier series,
//!
//! ```text
//! S2(φ) = (9π/256)|c1| cos(φ − arg c1) + (1/16π)|c2| cos(2φ − arg c2),
//! c1 = ⟨S⁺_i S⁻_j⟩,   c2 = ⟨(S⁺_i S⁻_j)²⟩,
//! ```
//!
//! where `φ = φ_i − φ_j`. The peak of the first harmonic sits at the phase of
//! `c1`, which is what integrating the Husimi function built from
//! `e^{−iφS^z} e^{−iθS^y}|1, 1⟩` gives (see [`husimi`]).

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::lindblad::DensityMatrix;
use crate::sparse::CsrMatrix;
use crate::spin::{site_levels, spin1_operators, SITE_DIM};
use crate::{Error, Result, C64_ZERO};

pub mod husimi;
mod peaks;

pub use husimi::{s2_husimi_oracle, HUSIMI_CONVERGENCE_TOL};
pub use peaks::{peak_contrast, Peak, SyncMeasure, PEAK_EQUALITY_TOL, POSITIVE_PEAK_TOL};

/// First-harmonic prefactor `9π/256`.
pub const FIRST_HARMONIC_COEFF: f64 = 9.0 * PI / 256.0;
/// Second-harmonic prefactor `1/(16π)`.
pub const SECOND_HARMONIC_COEFF: f64 = 1.0 / (16.0 * PI);
/// Correlators below this magnitude get phase 0.
pub const PHASE_CUTOFF: f64 = 1e-14;

pub const DEFAULT_GRID_SIZE: usize = 2048;
pub const DEFAULT_QUAD_ORDER: usize = 64;

/// Partial trace onto sites `(i, j)`, with `i` the left factor.
pub fn reduce_pair(rho: &DensityMatrix, i: usize, j: usize) -> Result<DensityMatrix> {
    let n = rho.n_sites();
    if i == j {
        return Err(Error::InvalidPair { i, j, reason: "sites must differ" });
    }
    if i >= n || j >= n {
        return Err(Error::InvalidPair { i, j, reason: "site outside the network" });
    }
    let d = rho.dim();
    let levels: Vec<Vec<usize>> = (0..d).map(|a| site_levels(a, n)).collect();
    // Key identifying the traced-out sites' levels.
    let rest_key = |lv: &[usize]| -> usize {
        lv.iter()
            .enumerate()
            .filter(|(k, _)| *k != i && *k != j)
            .fold(0, |acc, (_, &l)| acc * SITE_DIM + l)
    };
    let keys: Vec<usize> = levels.iter().map(|lv| rest_key(lv)).collect();
    let pair_index: Vec<usize> = levels.iter().map(|lv| lv[i] * SITE_DIM + lv[j]).collect();

    let mut by_key: Vec<Vec<usize>> = vec![Vec::new(); SITE_DIM.pow((n - 2) as u32)];
    for a in 0..d {
        by_key[keys[a]].push(a);
    }
    let mut out = Array2::from_elem((SITE_DIM * SITE_DIM, SITE_DIM * SITE_DIM), C64_ZERO);
    let m = rho.matrix();
    for group in &by_key {
        for &a in group {
            for &b in group {
                out[[pair_index[a], pair_index[b]]] += m[[a, b]];
            }
        }
    }
    DensityMatrix::from_matrix(2, out)
}

/// `⟨S⁺_i S⁻_j⟩` and `⟨(S⁺_i S⁻_j)²⟩` of a two-site state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCorrelators {
    pub c1: Complex64,
    pub c2: Complex64,
}

/// The operators `S⁺⊗S⁻` and `(S⁺⊗S⁻)²` on a pair.
pub fn pair_operators() -> (CsrMatrix, CsrMatrix) {
    let ops = spin1_operators();
    let sp = CsrMatrix::from_dense(ops.splus.matrix());
    let sm = CsrMatrix::from_dense(ops.sminus.matrix());
    let first = sp.kron(&sm);
    let second = first.matmul(&first);
    (first, second)
}

pub fn pair_correlators(rho_pair: &DensityMatrix) -> Result<PairCorrelators> {
    if rho_pair.n_sites() != 2 {
        return Err(Error::InvalidState(format!(
            "pair correlators need a two-site state, got {} sites",
            rho_pair.n_sites()
        )));
    }
    let (first, second) = pair_operators();
    Ok(PairCorrelators { c1: rho_pair.expectation(&first), c2: rho_pair.expectation(&second) })
}

/// Two-harmonic relative-phase distribution sampled on `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDistribution {
    pub a1: f64,
    pub phi1: f64,
    pub a2: f64,
    pub phi2: f64,
    /// `(φ, S2(φ))` on the uniform grid `φ_k = 2πk / n`.
    pub samples: Vec<(f64, f64)>,
}

impl PhaseDistribution {
    pub fn from_harmonics(a1: f64, phi1: f64, a2: f64, phi2: f64, grid_size: usize) -> Self {
        let mut dist = Self { a1, phi1, a2, phi2, samples: Vec::new() };
        dist.samples = phase_grid(grid_size).map(|phi| (phi, dist.value(phi))).collect();
        dist
    }

    /// First-harmonic part `a1 cos(φ − φ1)`.
    pub fn first(&self, phi: f64) -> f64 {
        self.a1 * (phi - self.phi1).cos()
    }

    /// Second-harmonic part `a2 cos(2φ − φ2)`.
    pub fn second(&self, phi: f64) -> f64 {
        self.a2 * (2.0 * phi - self.phi2).cos()
    }

    pub fn value(&self, phi: f64) -> f64 {
        self.first(phi) + self.second(phi)
    }

    pub fn derivative(&self, phi: f64) -> f64 {
        -self.a1 * (phi - self.phi1).sin() - 2.0 * self.a2 * (2.0 * phi - self.phi2).sin()
    }
}

/// Uniform grid `2πk/n`, `k = 0..n`.
pub fn phase_grid(n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |k| 2.0 * PI * k as f64 / n as f64)
}

fn amplitude_and_phase(c: Complex64) -> (f64, f64) {
    let amp = c.norm();
    if amp < PHASE_CUTOFF {
        return (amp, 0.0);
    }
    let arg = c.arg();
    (amp, if arg <= -PI { PI } else { arg })
}

pub fn s2_closed_form(c: &PairCorrelators, grid_size: usize) -> PhaseDistribution {
    let (abs1, phi1) = amplitude_and_phase(c.c1);
    let (abs2, phi2) = amplitude_and_phase(c.c2);
    let a1 = if abs1 < PHASE_CUTOFF { 0.0 } else { FIRST_HARMONIC_COEFF * abs1 };
    let a2 = if abs2 < PHASE_CUTOFF { 0.0 } else { SECOND_HARMONIC_COEFF * abs2 };
    PhaseDistribution::from_harmonics(a1, phi1, a2, phi2, grid_size)
}

/// Everything computed for one pair of a network state.
#[derive(Debug, Clone)]
pub struct PairReport {
    pub pair: (usize, usize),
    pub correlators: PairCorrelators,
    pub distribution: PhaseDistribution,
    pub measure: SyncMeasure,
}

pub fn pair_report(rho: &DensityMatrix, i: usize, j: usize, grid_size: usize) -> Result<PairReport> {
    let reduced = reduce_pair(rho, i, j)?;
    let correlators = pair_correlators(&reduced)?;
    let distribution = s2_closed_form(&correlators, grid_size);
    let measure = peak_contrast(&distribution);
    Ok(PairReport { pair: (i, j), correlators, distribution, measure })
}
