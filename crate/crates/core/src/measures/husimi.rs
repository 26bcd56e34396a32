//! Direct quadrature of the pair Husimi function.
//!
//! `S2(φ_ij) = ∫dφ_j ∫sinθ_i dθ_i ∫sinθ_j dθ_j Q(θ, φ, ρ) − 1/(2π)` with
//! `φ_i = φ_ij + φ_j`, `Q = (3/4π)² ⟨θ,φ|ρ|θ,φ⟩` and product spin coherent
//! states `e^{−iφS^z} e^{−iθS^y}|1, 1⟩`. The polar integrals use
//! Gauss–Legendre nodes in `θ`, the azimuthal one the periodic rectangle
//! rule. This never touches the correlators, so it independently checks the
//! closed form in the parent module.
//!
//! The subtracted constant is the uniform density `1/(2π)` of a phase on the
//! circle; with it the distribution of the maximally mixed state vanishes.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use super::phase_grid;
use crate::lindblad::DensityMatrix;
use crate::spin::{magnetic_number, spin1_sy, SITE_DIM};
use crate::{Error, Result, C64_ZERO};

/// Maximum change allowed when the quadrature order is doubled.
pub const HUSIMI_CONVERGENCE_TOL: f64 = 1e-8;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    (nodes, weights)
}

/// Matrix exponential of a 3x3 matrix by scaling and squaring a Taylor series.
pub fn expm3(a: &Array2<Complex64>) -> Array2<Complex64> {
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a.mapv(|z| z / 2f64.powi(squarings as i32));
    let mut result = Array2::<Complex64>::eye(SITE_DIM);
    let mut term = Array2::<Complex64>::eye(SITE_DIM);
    for k in 1..=24 {
        term = term.dot(&scaled).mapv(|z| z / k as f64);
        result += &term;
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

/// `e^{−iθS^y}|m=+1⟩`.
pub fn rotated_top_state(theta: f64) -> Array1<Complex64> {
    let generator = spin1_sy().matrix().mapv(|z| z * Complex64::new(0.0, -theta));
    expm3(&generator).column(0).to_owned()
}

/// `Σ_k w_k sinθ_k |χ(θ_k)⟩⟨χ(θ_k)|` with `θ` Gauss–Legendre nodes on `[0, π]`.
fn polar_kernel(order: usize) -> Array2<Complex64> {
    let (x, w) = gauss_legendre(order);
    let mut kernel = Array2::from_elem((SITE_DIM, SITE_DIM), C64_ZERO);
    for (xk, wk) in x.iter().zip(&w) {
        let theta = 0.5 * PI * (xk + 1.0);
        let weight = 0.5 * PI * wk * theta.sin();
        let chi = rotated_top_state(theta);
        for a in 0..SITE_DIM {
            for b in 0..SITE_DIM {
                kernel[[a, b]] += chi[a] * chi[b].conj() * weight;
            }
        }
    }
    kernel
}

/// `R(φ) K R(φ)†` with `R = e^{−iφS^z}`.
fn rotate(kernel: &Array2<Complex64>, phi: f64) -> [[Complex64; SITE_DIM]; SITE_DIM] {
    let mut out = [[C64_ZERO; SITE_DIM]; SITE_DIM];
    for a in 0..SITE_DIM {
        for b in 0..SITE_DIM {
            let dm = (magnetic_number(a) - magnetic_number(b)) as f64;
            out[a][b] = kernel[[a, b]] * Complex64::from_polar(1.0, -phi * dm);
        }
    }
    out
}

fn s2_at_order(rho: &Array2<Complex64>, grid_size: usize, order: usize) -> Vec<(f64, f64)> {
    let kernel = polar_kernel(order);
    let norm = (3.0 / (4.0 * PI)).powi(2);
    let azimuth_weight = 2.0 * PI / order as f64;
    let offset = 1.0 / (2.0 * PI);
    // tr(ρ (K_i ⊗ K_j)) = Σ ρ[(ai, aj), (bi, bj)] K_i[bi, ai] K_j[bj, aj]; the
    // sum over the j factor depends only on φ_j and is done once per node.
    let partial: Vec<[[Complex64; SITE_DIM]; SITE_DIM]> = phase_grid(order)
        .map(|phi_j| {
            let kj = rotate(&kernel, phi_j);
            let mut m = [[C64_ZERO; SITE_DIM]; SITE_DIM];
            for (ai, row) in m.iter_mut().enumerate() {
                for (bi, entry) in row.iter_mut().enumerate() {
                    for aj in 0..SITE_DIM {
                        for bj in 0..SITE_DIM {
                            *entry += rho[[ai * SITE_DIM + aj, bi * SITE_DIM + bj]] * kj[bj][aj];
                        }
                    }
                }
            }
            m
        })
        .collect();
    phase_grid(grid_size)
        .map(|phi_ij| {
            let mut acc = 0.0;
            for (phi_j, m) in phase_grid(order).zip(&partial) {
                let ki = rotate(&kernel, phi_ij + phi_j);
                let mut tr = C64_ZERO;
                for ai in 0..SITE_DIM {
                    for bi in 0..SITE_DIM {
                        tr += m[ai][bi] * ki[bi][ai];
                    }
                }
                acc += azimuth_weight * norm * tr.re;
            }
            (phi_ij, acc - offset)
        })
        .collect()
}

/// Relative-phase distribution of a two-site state by Husimi quadrature.
///
/// The result at `quad_order` is returned after checking that doubling the
/// order changes no sample by more than [`HUSIMI_CONVERGENCE_TOL`].
pub fn s2_husimi_oracle(
    rho_pair: &DensityMatrix,
    grid_size: usize,
    quad_order: usize,
) -> Result<Vec<(f64, f64)>> {
    if rho_pair.n_sites() != 2 {
        return Err(Error::InvalidState("the Husimi oracle needs a two-site state".into()));
    }
    if quad_order < 16 {
        return Err(Error::InvalidConfig { field: "quad_order", reason: "must be at least 16".into() });
    }
    let rho = rho_pair.matrix();
    let coarse = s2_at_order(rho, grid_size, quad_order);
    let fine = s2_at_order(rho, grid_size, 2 * quad_order);
    let change = coarse.iter().zip(&fine).map(|(a, b)| (a.1 - b.1).abs()).fold(0.0, f64::max);
    if !(change <= HUSIMI_CONVERGENCE_TOL) {
        return Err(Error::QuadratureNotConverged { change });
    }
    Ok(coarse)
}
