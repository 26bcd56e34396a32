//! Fixed-step RK4 propagation of the master equation.
//!
//! Serves as an independent route to the steady state: nothing here shares
//! code with the LU solve except the assembled generator itself.

use num_complex::Complex64;

use super::{DensityMatrix, Liouvillian};
use crate::sparse::CsrMatrix;
use crate::spin::M_ZERO;
use crate::{Error, Result, C64_ZERO};

/// Largest allowed `dt · ‖L‖_scale`.
pub const MAX_STEP_SCALE: f64 = 0.1;

const TRACE_DRIFT_TOL: f64 = 1e-6;

/// Generator restricted to the support of the initial state.
struct Propagator<'a> {
    matrix: &'a CsrMatrix,
    positions: Option<&'a [usize]>,
    diagonal: Vec<usize>,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl<'a> Propagator<'a> {
    /// Picks the sector block when `rho0` has no weight outside it.
    fn new(l: &'a Liouvillian, rho0: &DensityMatrix) -> (Self, Vec<Complex64>) {
        let d = l.hilbert_dim();
        let full = rho0.to_vec();
        let mut in_sector = vec![false; d * d];
        for &v in l.sector_indices() {
            in_sector[v] = true;
        }
        let confined = full.iter().enumerate().all(|(v, z)| in_sector[v] || *z == C64_ZERO);
        let (matrix, positions, x) = if confined {
            let x = l.sector_indices().iter().map(|&v| full[v]).collect();
            (l.sector_matrix(), Some(l.sector_indices()), x)
        } else {
            (l.matrix(), None, full)
        };
        let diagonal = match positions {
            Some(p) => p.iter().enumerate().filter(|(_, &v)| v % d == v / d).map(|(k, _)| k).collect(),
            None => (0..d).map(|a| a + a * d).collect(),
        };
        let n = matrix.nrows();
        let zeros = || vec![C64_ZERO; n];
        let prop = Self { matrix, positions, diagonal, k: [zeros(), zeros(), zeros(), zeros()], tmp: zeros() };
        (prop, x)
    }

    /// One classical RK4 step; returns `‖L x‖₂` at the start of the step.
    fn step(&mut self, x: &mut [Complex64], h: f64) -> f64 {
        let [k1, k2, k3, k4] = &mut self.k;
        self.matrix.mul_vec_into(x, k1);
        for ((t, xi), ki) in self.tmp.iter_mut().zip(x.iter()).zip(k1.iter()) {
            *t = xi + ki * (0.5 * h);
        }
        self.matrix.mul_vec_into(&self.tmp, k2);
        for ((t, xi), ki) in self.tmp.iter_mut().zip(x.iter()).zip(k2.iter()) {
            *t = xi + ki * (0.5 * h);
        }
        self.matrix.mul_vec_into(&self.tmp, k3);
        for ((t, xi), ki) in self.tmp.iter_mut().zip(x.iter()).zip(k3.iter()) {
            *t = xi + ki * h;
        }
        self.matrix.mul_vec_into(&self.tmp, k4);
        let residual = k1.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        residual
    }

    fn trace(&self, x: &[Complex64]) -> Complex64 {
        self.diagonal.iter().map(|&k| x[k]).sum()
    }

    fn to_density(&self, l: &Liouvillian, x: &[Complex64]) -> Result<DensityMatrix> {
        match self.positions {
            Some(p) => {
                let d = l.hilbert_dim();
                let mut full = vec![C64_ZERO; d * d];
                for (k, &v) in p.iter().enumerate() {
                    full[v] = x[k];
                }
                DensityMatrix::from_vec(l.n_sites(), &full)
            }
            None => DensityMatrix::from_vec(l.n_sites(), x),
        }
    }
}

fn check_step(l: &Liouvillian, dt: f64) -> Result<()> {
    let max_dt = MAX_STEP_SCALE / l.scale();
    if !(dt > 0.0) || dt > max_dt * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, max_dt });
    }
    Ok(())
}

fn check_dims(l: &Liouvillian, rho0: &DensityMatrix) -> Result<()> {
    if rho0.n_sites() != l.n_sites() {
        return Err(Error::InvalidState(format!(
            "state has {} sites, generator has {}",
            rho0.n_sites(),
            l.n_sites()
        )));
    }
    Ok(())
}

/// Propagates `rho0` to `t_final` with RK4 steps no longer than `dt`.
///
/// `dt` must satisfy `dt ≤ 0.1 / ‖L‖_scale`. Fails if the trace drifts by
/// more than `1e-6`.
pub fn time_evolve(rho0: &DensityMatrix, l: &Liouvillian, t_final: f64, dt: f64) -> Result<DensityMatrix> {
    check_dims(l, rho0)?;
    check_step(l, dt)?;
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::InvalidConfig { field: "t_final", reason: "must be finite and nonnegative".into() });
    }
    let steps = (t_final / dt).ceil() as usize;
    let (mut prop, mut x) = Propagator::new(l, rho0);
    let tr0 = prop.trace(&x);
    if steps > 0 {
        let h = t_final / steps as f64;
        for _ in 0..steps {
            prop.step(&mut x, h);
        }
    }
    let drift = (prop.trace(&x) - tr0).norm();
    if !(drift <= TRACE_DRIFT_TOL) {
        return Err(Error::TraceDrift { drift });
    }
    prop.to_density(l, &x)
}

#[derive(Debug, Clone, Copy)]
pub struct ConvergenceOptions {
    /// Step size; `None` uses the largest allowed step.
    pub dt: Option<f64>,
    /// Stop once the estimated max distance to the fixed point drops below this.
    pub distance_tol: f64,
    /// Give up (indeterminate) after this much simulated time.
    pub t_max: f64,
    /// Length of the residual-monitoring window.
    pub window: f64,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self { dt: None, distance_tol: 1e-9, t_max: 5e3, window: 2.0 }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergedEvolution {
    pub rho: DensityMatrix,
    pub time: f64,
    /// `‖L vec(ρ)‖₂` at the end of the run.
    pub residual: f64,
    /// Decay rate of the residual envelope over the last window.
    pub gap_estimate: f64,
    /// `residual / gap_estimate`, a bound on the remaining distance.
    pub distance_estimate: f64,
}

/// Evolves until the residual-based distance estimate falls below
/// `distance_tol` for two consecutive windows.
///
/// The residual `‖L x‖` of a relaxing state decays like `exp(-g t)` with `g`
/// the spectral gap, and the distance to the fixed point is bounded by
/// `‖L x‖ / g`. Both are read off the residual envelope, so `t_final`
/// adapts to the gap of each generator.
pub fn evolve_to_convergence(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    opts: &ConvergenceOptions,
) -> Result<ConvergedEvolution> {
    check_dims(l, rho0)?;
    let dt = opts.dt.unwrap_or(MAX_STEP_SCALE / l.scale());
    check_step(l, dt)?;
    let steps_per_window = ((opts.window / dt).ceil() as usize).max(1);
    let window = steps_per_window as f64 * dt;
    let (mut prop, mut x) = Propagator::new(l, rho0);
    let tr0 = prop.trace(&x);

    let mut time = 0.0;
    let mut previous_envelope: Option<f64> = None;
    let mut hits = 0;
    let mut gap: f64;
    let mut distance = f64::INFINITY;
    loop {
        let mut envelope: f64 = 0.0;
        for _ in 0..steps_per_window {
            envelope = envelope.max(prop.step(&mut x, dt));
        }
        time += window;
        if envelope == 0.0 {
            gap = f64::INFINITY;
            distance = 0.0;
            break;
        }
        if let Some(prev) = previous_envelope {
            gap = (prev / envelope).ln() / window;
            distance = if gap > 0.0 { envelope / gap } else { f64::INFINITY };
            if distance < opts.distance_tol {
                hits += 1;
                if hits >= 2 {
                    break;
                }
            } else {
                hits = 0;
            }
        }
        previous_envelope = Some(envelope);
        if time >= opts.t_max {
            return Err(Error::Indeterminate { t_max: opts.t_max, distance });
        }
    }
    let drift = (prop.trace(&x) - tr0).norm();
    if !(drift <= TRACE_DRIFT_TOL) {
        return Err(Error::TraceDrift { drift });
    }
    let residual = {
        let lx = prop.matrix.mul_vec(&x);
        lx.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    };
    Ok(ConvergedEvolution {
        rho: prop.to_density(l, &x)?,
        time,
        residual,
        gap_estimate: gap,
        distance_estimate: distance,
    })
}

/// Max-abs disagreement above which the probe reports non-uniqueness.
pub const UNIQUENESS_TOL: f64 = 1e-6;

/// Evolves the all-`m=0` product and the maximally mixed state to
/// convergence and reports whether they reach the same fixed point.
///
/// Non-convergence is reported as [`Error::Indeterminate`], distinct from a
/// `false` answer.
pub fn uniqueness_probe(l: &Liouvillian) -> Result<bool> {
    uniqueness_probe_with(l, &ConvergenceOptions::default())
}

pub fn uniqueness_probe_with(l: &Liouvillian, opts: &ConvergenceOptions) -> Result<bool> {
    Ok(probe_fixed_points(l, opts)?.unique)
}

/// Both runs of the uniqueness probe.
#[derive(Debug, Clone)]
pub struct UniquenessReport {
    pub unique: bool,
    /// Evolution from the all-`m=0` product state.
    pub from_ground: ConvergedEvolution,
    pub from_mixed: ConvergedEvolution,
}

pub fn probe_fixed_points(l: &Liouvillian, opts: &ConvergenceOptions) -> Result<UniquenessReport> {
    let n = l.n_sites();
    let ground = DensityMatrix::pure_product(&vec![M_ZERO; n]);
    let mixed = DensityMatrix::maximally_mixed(n);
    let from_ground = evolve_to_convergence(&ground, l, opts)?;
    let from_mixed = evolve_to_convergence(&mixed, l, opts)?;
    let unique = from_ground.rho.max_abs_diff(&from_mixed.rho) < UNIQUENESS_TOL;
    Ok(UniquenessReport { unique, from_ground, from_mixed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{build_liouvillian, single_site_liouvillian, steady_state, NetworkConfig};
    use rand::{Rng, SeedableRng};

    fn random_state(n_sites: usize, seed: u64) -> DensityMatrix {
        let d = crate::spin::hilbert_dim(n_sites);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = ndarray::Array2::from_shape_fn((d, d), |_| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let m = a.dot(&a.t().mapv(|z| z.conj()));
        let mut rho = DensityMatrix::from_matrix(n_sites, m).unwrap();
        rho.normalize_trace();
        rho
    }

    #[test]
    fn steady_state_is_a_fixed_point() {
        let cfg = NetworkConfig { n_leaves: 1, delta: 0.5, coupling: 0.2, hub_gain: 0.3, hub_damp: 1.0, leaf_gain: 0.3, leaf_damp: 1.0 };
        let l = build_liouvillian(&cfg).unwrap();
        let rho = steady_state(&l, 1e-12).unwrap();
        let dt = MAX_STEP_SCALE / l.scale();
        let out = time_evolve(&rho, &l, 5.0, dt).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-11);
    }

    #[test]
    fn damping_empties_the_upper_level() {
        let l = single_site_liouvillian(0.0, 1.0, 1.0);
        let rho0 = DensityMatrix::pure_product(&[0]);
        let out = time_evolve(&rho0, &l, 40.0, MAX_STEP_SCALE / l.scale()).unwrap();
        assert!(out.max_abs_diff(&DensityMatrix::pure_product(&[M_ZERO])) < 1e-12);
    }

    #[test]
    fn random_start_reaches_the_solved_steady_state() {
        let cfg = NetworkConfig { n_leaves: 1, delta: 0.0, coupling: 0.05, hub_gain: 1.0, hub_damp: 0.1, leaf_gain: 0.1, leaf_damp: 1.0 };
        let l = build_liouvillian(&cfg).unwrap();
        let solved = steady_state(&l, 1e-10).unwrap();
        let start = random_state(2, 11);
        let evolved = evolve_to_convergence(&start, &l, &ConvergenceOptions::default()).unwrap();
        assert!(evolved.gap_estimate > 0.0);
        assert!(evolved.rho.max_abs_diff(&solved) < 1e-6, "{}", evolved.rho.max_abs_diff(&solved));
        // The full-space path was used since the random state has coherences
        // between magnetization sectors; trace must still be preserved.
        assert!((evolved.rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn trace_is_preserved_over_a_long_run() {
        let cfg = NetworkConfig { n_leaves: 2, delta: 1.3, coupling: 0.3, hub_gain: 0.2, hub_damp: 0.9, leaf_gain: 0.5, leaf_damp: 0.5 };
        let l = build_liouvillian(&cfg).unwrap();
        let start = random_state(3, 3);
        let out = time_evolve(&start, &l, 30.0, MAX_STEP_SCALE / l.scale()).unwrap();
        assert!((out.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let l = single_site_liouvillian(0.0, 1.0, 1.0);
        let rho0 = DensityMatrix::maximally_mixed(1);
        let dt = 2.0 * MAX_STEP_SCALE / l.scale();
        assert!(matches!(time_evolve(&rho0, &l, 1.0, dt), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn probe_confirms_unique_product_fixed_point() {
        let cfg = NetworkConfig::identical(1, 1.0, 1.0, 0.0);
        let l = build_liouvillian(&cfg).unwrap();
        assert!(uniqueness_probe(&l).unwrap());
    }

    #[test]
    fn probe_detects_degenerate_generator() {
        // Hub dissipates, the leaf does not: populations of the leaf are conserved.
        let ops = crate::spin::spin1_operators();
        let n = 2;
        let d = crate::spin::hilbert_dim(n);
        let diss = vec![
            crate::lindblad::Dissipator { rate: 1.0, jump: crate::spin::embed(&ops.jump_gain, 0, n).unwrap().into_matrix() },
            crate::lindblad::Dissipator { rate: 1.0, jump: crate::spin::embed(&ops.jump_damp, 0, n).unwrap().into_matrix() },
        ];
        let l = Liouvillian::from_parts(n, &CsrMatrix::zeros(d, d), &diss);
        assert!(!uniqueness_probe(&l).unwrap());
    }

    #[test]
    fn probe_reports_indeterminate_on_tiny_budget() {
        let cfg = NetworkConfig::identical(1, 0.1, 1.0, 0.2);
        let l = build_liouvillian(&cfg).unwrap();
        let opts = ConvergenceOptions { t_max: 1.0, ..ConvergenceOptions::default() };
        assert!(matches!(uniqueness_probe_with(&l, &opts), Err(Error::Indeterminate { .. })));
    }
}
