//! Network Hamiltonian, Liouvillian assembly and steady-state solvers.
//!
//! Density matrices are vectorized by column stacking, `vec(A X B) =
//! (Bᵀ ⊗ A) vec(X)`, so `ρ[a, b]` sits at index `a + b·d`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::sparse::CsrMatrix;
use crate::spin::{embed, hilbert_dim, spin1_operators, total_magnetization, SiteOperator};
use crate::{Error, Result};

mod density;
mod evolve;
mod hermitian;
mod steady;

pub use density::DensityMatrix;
pub use evolve::{
    evolve_to_convergence, probe_fixed_points, time_evolve, uniqueness_probe, uniqueness_probe_with,
    ConvergedEvolution, ConvergenceOptions, UniquenessReport, MAX_STEP_SCALE, UNIQUENESS_TOL,
};
pub use steady::{solve_steady_state, steady_state, SolveMethod, SolverOptions, SteadyState};

/// Largest supported number of leaves. Five sites already give a
/// 59049-dimensional Liouvillian.
pub const MAX_LEAVES: usize = 4;

/// Physical parameters of one star network, in units of a reference rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Number of leaves `N`; `0` is an isolated hub.
    pub n_leaves: usize,
    /// Hub detuning `Δ = ω_hub − ω_leaf`.
    pub delta: f64,
    /// Hub–leaf hopping strength `V`.
    pub coupling: f64,
    pub hub_gain: f64,
    pub hub_damp: f64,
    pub leaf_gain: f64,
    pub leaf_damp: f64,
}

impl NetworkConfig {
    /// Resonant network with the same gain and damping on every site.
    pub fn identical(n_leaves: usize, gain: f64, damp: f64, coupling: f64) -> Self {
        Self {
            n_leaves,
            delta: 0.0,
            coupling,
            hub_gain: gain,
            hub_damp: damp,
            leaf_gain: gain,
            leaf_damp: damp,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_leaves + 1
    }

    /// Gain and damping rates of a site.
    pub fn rates(&self, site: usize) -> (f64, f64) {
        if site == 0 {
            (self.hub_gain, self.hub_damp)
        } else {
            (self.leaf_gain, self.leaf_damp)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_leaves > MAX_LEAVES {
            return Err(Error::InvalidConfig {
                field: "n_leaves",
                reason: format!("{} exceeds the supported maximum {MAX_LEAVES}", self.n_leaves),
            });
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidConfig { field: "delta", reason: "must be finite".into() });
        }
        let nonneg = [
            ("coupling", self.coupling),
            ("hub_gain", self.hub_gain),
            ("hub_damp", self.hub_damp),
            ("leaf_gain", self.leaf_gain),
            ("leaf_damp", self.leaf_damp),
        ];
        for (field, value) in nonneg {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidConfig {
                    field,
                    reason: format!("must be finite and nonnegative, got {value}"),
                });
            }
        }
        if self.hub_gain + self.hub_damp <= 0.0 {
            return Err(Error::InvalidConfig {
                field: "hub_gain",
                reason: "hub needs a nonzero gain or damping rate".into(),
            });
        }
        if self.n_leaves > 0 && self.leaf_gain + self.leaf_damp <= 0.0 {
            return Err(Error::InvalidConfig {
                field: "leaf_gain",
                reason: "leaves need a nonzero gain or damping rate".into(),
            });
        }
        Ok(())
    }
}

/// `H = Δ S^z_0 + V Σ_j (S^+_0 S^-_j + S^-_0 S^+_j)`.
pub fn build_hamiltonian(config: &NetworkConfig) -> Result<CsrMatrix> {
    config.validate()?;
    let n = config.n_sites();
    let ops = spin1_operators();
    let real = |x: f64| Complex64::new(x, 0.0);
    let sz0 = embed(&ops.sz, 0, n)?.into_matrix();
    let mut terms = vec![(real(config.delta), sz0)];
    if config.coupling != 0.0 {
        let sp0 = embed(&ops.splus, 0, n)?.into_matrix();
        let sm0 = embed(&ops.sminus, 0, n)?.into_matrix();
        for j in 1..n {
            let spj = embed(&ops.splus, j, n)?.into_matrix();
            let smj = embed(&ops.sminus, j, n)?.into_matrix();
            let hop = sp0.matmul(&smj);
            let back = sm0.matmul(&spj);
            terms.push((real(config.coupling), hop));
            terms.push((real(config.coupling), back));
        }
    }
    let refs: Vec<_> = terms.iter().map(|(c, m)| (*c, m)).collect();
    Ok(CsrMatrix::linear_combination(&refs))
}

/// A jump operator on the full Hilbert space with its rate.
#[derive(Debug, Clone)]
pub struct Dissipator {
    pub rate: f64,
    pub jump: CsrMatrix,
}

/// Gain and damping dissipators of every site of the network.
pub fn network_dissipators(config: &NetworkConfig) -> Result<Vec<Dissipator>> {
    config.validate()?;
    let n = config.n_sites();
    let ops = spin1_operators();
    let mut out = Vec::with_capacity(2 * n);
    for site in 0..n {
        let (gain, damp) = config.rates(site);
        for (rate, op) in [(gain, &ops.jump_gain), (damp, &ops.jump_damp)] {
            if rate > 0.0 {
                out.push(Dissipator { rate, jump: embed(op, site, n)?.into_matrix() });
            }
        }
    }
    Ok(out)
}

/// Sparse Lindblad generator acting on column-stacked density matrices.
///
/// Besides the full matrix it keeps the principal block on the zero
/// "magnetization-difference" sector, i.e. the entries `ρ[a, b]` with equal
/// total `m` on both sides. The Hamiltonian conserves total `m` and every
/// jump shifts it by the same amount on both sides of `ρ`, so the generator
/// never couples this block to the rest and the steady state lives inside it.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    n_sites: usize,
    matrix: CsrMatrix,
    sector: Vec<usize>,
    sector_matrix: CsrMatrix,
    scale: f64,
}

impl Liouvillian {
    /// Assembles `-i(I⊗H − Hᵀ⊗I) + Σ γ [J̄⊗J − ½ I⊗J†J − ½ (J†J)ᵀ⊗I]`.
    pub fn from_parts(n_sites: usize, hamiltonian: &CsrMatrix, dissipators: &[Dissipator]) -> Self {
        let d = hilbert_dim(n_sites);
        assert_eq!(hamiltonian.nrows(), d, "Hamiltonian dimension mismatch");
        let mut triplets = Vec::new();
        let minus_i = Complex64::new(0.0, -1.0);
        let eye = CsrMatrix::identity(d);
        push_kron(&mut triplets, &eye, hamiltonian, minus_i);
        push_kron(&mut triplets, &hamiltonian.transpose(), &eye, -minus_i);
        for diss in dissipators {
            let gamma = Complex64::new(diss.rate, 0.0);
            let jdj = diss.jump.adjoint().matmul(&diss.jump);
            push_kron(&mut triplets, &diss.jump.conj(), &diss.jump, gamma);
            push_kron(&mut triplets, &eye, &jdj, -0.5 * gamma);
            push_kron(&mut triplets, &jdj.transpose(), &eye, -0.5 * gamma);
        }
        let matrix = CsrMatrix::from_triplets(d * d, d * d, triplets);

        let magnetization: Vec<i32> = (0..d).map(|a| total_magnetization(a, n_sites)).collect();
        let sector: Vec<usize> = (0..d * d)
            .filter(|v| magnetization[v % d] == magnetization[v / d])
            .collect();
        let sector_matrix = matrix.principal_submatrix(&sector);
        let scale = matrix.max_row_abs_sum();
        Self { n_sites, matrix, sector, sector_matrix, scale }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Hilbert-space dimension `d`; the superoperator is `d² × d²`.
    pub fn hilbert_dim(&self) -> usize {
        hilbert_dim(self.n_sites)
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Vectorized indices of the zero magnetization-difference sector, sorted.
    pub fn sector_indices(&self) -> &[usize] {
        &self.sector
    }

    pub fn sector_matrix(&self) -> &CsrMatrix {
        &self.sector_matrix
    }

    /// `‖L‖_scale`: the largest absolute row sum.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Vectorized trace functional `t` with `tᵀ vec(ρ) = tr ρ`.
    pub fn trace_functional(&self) -> Vec<Complex64> {
        let d = self.hilbert_dim();
        let mut t = vec![Complex64::new(0.0, 0.0); d * d];
        for a in 0..d {
            t[a + a * d] = Complex64::new(1.0, 0.0);
        }
        t
    }

    /// `L(ρ)` as a density-shaped matrix (not necessarily a state).
    pub fn apply(&self, rho: &DensityMatrix) -> ndarray::Array2<Complex64> {
        let out = self.matrix.mul_vec(&rho.to_vec());
        let d = self.hilbert_dim();
        ndarray::Array2::from_shape_fn((d, d), |(a, b)| out[a + b * d])
    }

    /// `‖L vec(ρ)‖₂`.
    pub fn residual_norm(&self, rho: &DensityMatrix) -> f64 {
        self.matrix.mul_vec(&rho.to_vec()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn push_kron(
    out: &mut Vec<(usize, usize, Complex64)>,
    a: &CsrMatrix,
    b: &CsrMatrix,
    coeff: Complex64,
) {
    let (br, bc) = (b.nrows(), b.ncols());
    for (r1, c1, x) in a.iter() {
        let x = coeff * x;
        for (r2, c2, y) in b.iter() {
            out.push((r1 * br + r2, c1 * bc + c2, x * y));
        }
    }
}

pub fn build_liouvillian(config: &NetworkConfig) -> Result<Liouvillian> {
    let h = build_hamiltonian(config)?;
    let dissipators = network_dissipators(config)?;
    Ok(Liouvillian::from_parts(config.n_sites(), &h, &dissipators))
}

/// Single-site Liouvillian for an isolated oscillator with the given rates.
pub fn single_site_liouvillian(delta: f64, gain: f64, damp: f64) -> Liouvillian {
    let ops = spin1_operators();
    let h = CsrMatrix::from_dense(ops.sz.matrix()).scale(Complex64::new(delta, 0.0));
    let as_matrix = |op: &SiteOperator| CsrMatrix::from_dense(op.matrix());
    let dissipators = [
        Dissipator { rate: gain, jump: as_matrix(&ops.jump_gain) },
        Dissipator { rate: damp, jump: as_matrix(&ops.jump_damp) },
    ];
    Liouvillian::from_parts(1, &h, &dissipators)
}
