use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hermitian::HermitianSystem;
use super::{DensityMatrix, Liouvillian};
use crate::sparse::CsrMatrix;
use crate::{Error, Result, C64_ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// Real sparse LU with a trace row on the zero magnetization-difference
    /// block, in Hermitian coordinates.
    #[default]
    Sector,
    /// Complex sparse LU with a trace row on the full superoperator.
    Full,
    /// Shifted inverse iteration on the sector block.
    InverseIteration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    /// Accept when `‖L vec(ρ)‖₂ ≤ tol · ‖L‖_scale`.
    pub tol: f64,
    /// Budget for refinement sweeps and inverse-iteration steps.
    pub max_iterations: usize,
    pub method: SolveMethod,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iterations: 50, method: SolveMethod::Sector }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// `‖L vec(ρ)‖₂ / ‖L‖_scale` of the returned (Hermitized, normalized) state.
    pub residual: f64,
    /// Which route produced the state; differs from the requested method
    /// when the direct solve fell back to inverse iteration.
    pub method: SolveMethod,
}

/// Steady state with default options and the given relative tolerance.
pub fn steady_state(l: &Liouvillian, tol: f64) -> Result<DensityMatrix> {
    let opts = SolverOptions { tol, ..SolverOptions::default() };
    solve_steady_state(l, &opts).map(|s| s.rho)
}

pub fn solve_steady_state(l: &Liouvillian, opts: &SolverOptions) -> Result<SteadyState> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidConfig { field: "tol", reason: "must be positive".into() });
    }
    let d = l.hilbert_dim();
    let (matrix, positions): (&CsrMatrix, Vec<usize>) = match opts.method {
        SolveMethod::Full => (l.matrix(), (0..d * d).collect()),
        _ => (l.sector_matrix(), l.sector_indices().to_vec()),
    };
    // Sector positions of the diagonal entries ρ[a, a].
    let diagonal: Vec<usize> = positions
        .iter()
        .enumerate()
        .filter(|(_, &v)| v % d == v / d)
        .map(|(k, _)| k)
        .collect();

    let mut method = opts.method;
    let mut x = match opts.method {
        SolveMethod::InverseIteration => inverse_iteration(l, matrix, &diagonal, opts, None)?,
        _ => {
            let x = match opts.method {
                SolveMethod::Sector => hermitian_solve(l, &diagonal, opts)?,
                _ => trace_row_solve(l, matrix, &diagonal, opts)?,
            };
            if relative_residual(l, matrix, &x, &diagonal) <= opts.tol {
                x
            } else {
                method = SolveMethod::InverseIteration;
                inverse_iteration(l, matrix, &diagonal, opts, Some(x))?
            }
        }
    };
    normalize_by_trace(&mut x, &diagonal);

    let mut full = vec![C64_ZERO; d * d];
    for (k, &v) in positions.iter().enumerate() {
        full[v] = x[k];
    }
    let mut rho = DensityMatrix::from_vec(l.n_sites(), &full)?;
    rho.hermitize();
    rho.normalize_trace();
    let residual = l.residual_norm(&rho) / l.scale();
    if !residual.is_finite() || residual > opts.tol {
        return Err(Error::NotConverged { residual });
    }
    Ok(SteadyState { rho, residual, method })
}

fn relative_residual(l: &Liouvillian, matrix: &CsrMatrix, x: &[Complex64], diagonal: &[usize]) -> f64 {
    let trace: Complex64 = diagonal.iter().map(|&k| x[k]).sum();
    if trace.norm() == 0.0 || x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return f64::INFINITY;
    }
    let lx = matrix.mul_vec(x);
    lx.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / trace.norm() / l.scale()
}

fn normalize_by_trace(x: &mut [Complex64], diagonal: &[usize]) {
    let trace: Complex64 = diagonal.iter().map(|&k| x[k]).sum();
    x.iter_mut().for_each(|z| *z /= trace);
}

fn factorize(m: &CsrMatrix) -> Result<Lu<usize, Complex64>> {
    m.to_faer().sp_lu().map_err(|e| Error::Factorization(format!("{e:?}")))
}

fn lu_solve(lu: &Lu<usize, Complex64>, rhs: &[Complex64]) -> Vec<Complex64> {
    let b = Mat::<Complex64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
    let x = lu.solve(&b);
    (0..rhs.len()).map(|i| x[(i, 0)]).collect()
}

fn is_finite(x: &[Complex64]) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn real_solve(lu: &Lu<usize, f64>, rhs: &[f64]) -> Vec<f64> {
    let b = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
    let x = lu.solve(&b);
    (0..rhs.len()).map(|i| x[(i, 0)]).collect()
}

/// [`trace_row_solve`] on the real Hermitian-coordinate form of the sector.
fn hermitian_solve(l: &Liouvillian, diagonal: &[usize], opts: &SolverOptions) -> Result<Vec<Complex64>> {
    let sys = HermitianSystem::new(l);
    let matrix = l.sector_matrix();
    let lu = match sys.bordered.to_faer().sp_lu() {
        Ok(lu) => lu,
        Err(e) => return Err(Error::Degenerate(format!("bordered Liouvillian is singular ({e:?})"))),
    };
    let mut rhs = vec![0.0; sys.dim()];
    rhs[sys.pivot] = 1.0;
    let mut y = real_solve(&lu, &rhs);
    if y.iter().any(|v| !v.is_finite() || v.abs() > 1e12) {
        return Err(Error::Degenerate("bordered Liouvillian is numerically singular".into()));
    }
    let mut x = sys.to_sector(&y);
    let mut best = relative_residual(l, matrix, &x, diagonal);
    for _ in 0..opts.max_iterations {
        if best <= opts.tol * 1e-2 {
            break;
        }
        let ay = sys.bordered.mul_vec(&y);
        let r: Vec<f64> = rhs.iter().zip(&ay).map(|(b, v)| b - v).collect();
        let dy = real_solve(&lu, &r);
        let candidate: Vec<f64> = y.iter().zip(&dy).map(|(a, b)| a + b).collect();
        let cx = sys.to_sector(&candidate);
        let res = relative_residual(l, matrix, &cx, diagonal);
        if !(res < best) {
            break;
        }
        (y, x, best) = (candidate, cx, res);
    }
    Ok(x)
}

/// Replaces the first diagonal row of `L` by the trace functional and solves
/// `L' x = e`, followed by iterative refinement on the bordered system.
///
/// The replaced row is a linear combination of the other diagonal rows
/// (`tᵀ L = 0`), so `L'` is singular exactly when `L` has a traceless null
/// vector, i.e. when the steady state is not unique.
fn trace_row_solve(
    l: &Liouvillian,
    matrix: &CsrMatrix,
    diagonal: &[usize],
    opts: &SolverOptions,
) -> Result<Vec<Complex64>> {
    let pivot_row = diagonal[0];
    let trace_row: Vec<_> = diagonal.iter().map(|&k| (k, Complex64::new(1.0, 0.0))).collect();
    let bordered = matrix.with_row_replaced(pivot_row, &trace_row);
    let lu = match factorize(&bordered) {
        Ok(lu) => lu,
        Err(e) => return Err(Error::Degenerate(format!("bordered Liouvillian is singular ({e})"))),
    };
    let mut rhs = vec![C64_ZERO; matrix.nrows()];
    rhs[pivot_row] = Complex64::new(1.0, 0.0);
    let mut x = lu_solve(&lu, &rhs);
    if !is_finite(&x) || x.iter().map(|z| z.norm()).fold(0.0, f64::max) > 1e12 {
        return Err(Error::Degenerate("bordered Liouvillian is numerically singular".into()));
    }
    let mut best = relative_residual(l, matrix, &x, diagonal);
    for _ in 0..opts.max_iterations {
        if best <= opts.tol * 1e-2 {
            break;
        }
        let bx = bordered.mul_vec(&x);
        let r: Vec<_> = rhs.iter().zip(&bx).map(|(b, y)| b - y).collect();
        let dx = lu_solve(&lu, &r);
        let candidate: Vec<_> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let res = relative_residual(l, matrix, &candidate, diagonal);
        if !(res < best) {
            break;
        }
        x = candidate;
        best = res;
    }
    Ok(x)
}

/// Inverse iteration with a small negative shift, converging to the
/// eigenvector of the eigenvalue closest to zero.
fn inverse_iteration(
    l: &Liouvillian,
    matrix: &CsrMatrix,
    diagonal: &[usize],
    opts: &SolverOptions,
    start: Option<Vec<Complex64>>,
) -> Result<Vec<Complex64>> {
    let n = matrix.nrows();
    let shift = -1e-9 * l.scale();
    let shifted = matrix.sub(&CsrMatrix::identity(n).scale(Complex64::new(shift, 0.0)));
    let lu = factorize(&shifted)?;
    let mut x = match start {
        Some(x) if is_finite(&x) => x,
        _ => {
            // Maximally mixed start: weight only on diagonal positions.
            let mut x = vec![C64_ZERO; n];
            for &k in diagonal {
                x[k] = Complex64::new(1.0, 0.0);
            }
            x
        }
    };
    let mut best = f64::INFINITY;
    let mut best_x = x.clone();
    for _ in 0..opts.max_iterations.max(1) {
        let y = lu_solve(&lu, &x);
        let norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            break;
        }
        x = y.into_iter().map(|z| z / norm).collect();
        let res = relative_residual(l, matrix, &x, diagonal);
        if res < best {
            best = res;
            best_x = x.clone();
        }
        if best <= opts.tol * 1e-2 {
            break;
        }
    }
    if best > opts.tol {
        return Err(Error::NotConverged { residual: best });
    }
    Ok(best_x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{build_liouvillian, single_site_liouvillian, Dissipator, NetworkConfig};
    use crate::spin::{hilbert_dim, spin1_operators};

    fn asym(n: usize, coupling: f64) -> NetworkConfig {
        NetworkConfig { n_leaves: n, delta: 0.7, coupling, hub_gain: 0.3, hub_damp: 1.0, leaf_gain: 1.1, leaf_damp: 0.2 }
    }

    #[test]
    fn single_site_relaxes_to_m_zero() {
        let l = single_site_liouvillian(0.4, 1.0, 1.0);
        let rho = steady_state(&l, 1e-10).unwrap();
        let expected = DensityMatrix::pure_product(&[1]);
        assert!(rho.max_abs_diff(&expected) < 1e-10);
    }

    #[test]
    fn uncoupled_pair_is_product_of_m_zero() {
        let l = build_liouvillian(&asym(1, 0.0)).unwrap();
        let rho = steady_state(&l, 1e-10).unwrap();
        assert!(rho.max_abs_diff(&DensityMatrix::pure_product(&[1, 1])) < 1e-10);
    }

    #[test]
    fn methods_agree() {
        for n in 1..=2 {
            let l = build_liouvillian(&asym(n, 0.15)).unwrap();
            let mut states = Vec::new();
            for method in [SolveMethod::Sector, SolveMethod::Full, SolveMethod::InverseIteration] {
                let opts = SolverOptions { method, ..SolverOptions::default() };
                let s = solve_steady_state(&l, &opts).unwrap();
                assert!(s.residual <= 1e-10, "{method:?}: {}", s.residual);
                assert_eq!(s.method, method);
                s.rho.validate().unwrap();
                states.push(s.rho);
            }
            assert!(states[0].max_abs_diff(&states[1]) < 1e-10);
            assert!(states[0].max_abs_diff(&states[2]) < 1e-9);
        }
    }

    #[test]
    fn coupled_state_has_correlations_and_meets_tolerance() {
        let cfg = NetworkConfig {
            n_leaves: 1,
            delta: 0.0,
            coupling: 0.05,
            hub_gain: 1.0,
            hub_damp: 0.1,
            leaf_gain: 0.1,
            leaf_damp: 1.0,
        };
        let l = build_liouvillian(&cfg).unwrap();
        let s = solve_steady_state(&l, &SolverOptions::default()).unwrap();
        assert!(s.residual <= 1e-10);
        let ops = spin1_operators();
        let a = crate::spin::embed(&ops.splus, 0, 2).unwrap();
        let b = crate::spin::embed(&ops.sminus, 1, 2).unwrap();
        let c1 = s.rho.expectation(&a.matrix().matmul(b.matrix()));
        assert!(c1.norm() > 1e-4, "|c1| = {}", c1.norm());
    }

    #[test]
    fn pure_hamiltonian_generator_is_degenerate() {
        let ops = spin1_operators();
        let h = crate::spin::embed(&ops.sz, 0, 2).unwrap().into_matrix();
        let l = Liouvillian::from_parts(2, &h, &[]);
        assert!(matches!(steady_state(&l, 1e-10), Err(Error::Degenerate(_))));
    }

    #[test]
    fn decoupled_leaf_without_dissipation_is_degenerate() {
        // Hub dissipates, leaf is completely free: every leaf population is stationary.
        let ops = spin1_operators();
        let n = 2;
        let h = CsrMatrix::zeros(hilbert_dim(n), hilbert_dim(n));
        let diss = vec![
            Dissipator { rate: 1.0, jump: crate::spin::embed(&ops.jump_gain, 0, n).unwrap().into_matrix() },
            Dissipator { rate: 1.0, jump: crate::spin::embed(&ops.jump_damp, 0, n).unwrap().into_matrix() },
        ];
        let l = Liouvillian::from_parts(n, &h, &diss);
        assert!(matches!(steady_state(&l, 1e-10), Err(Error::Degenerate(_))));
    }

    #[test]
    fn nonpositive_tolerance_is_rejected() {
        let l = single_site_liouvillian(0.0, 1.0, 1.0);
        assert!(steady_state(&l, 0.0).is_err());
    }
}
