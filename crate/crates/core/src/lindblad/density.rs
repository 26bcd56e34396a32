use ndarray::Array2;
use num_complex::Complex64;

use crate::sparse::CsrMatrix;
use crate::spin::{basis_index, hilbert_dim, site_levels, SITE_DIM};
use crate::{Error, Result};

/// Tolerances a density matrix must meet to count as a physical state.
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const MIN_EIGENVALUE_TOL: f64 = -1e-8;

/// Dense density matrix on `n_sites` spin-1 sites.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_sites: usize,
    data: Array2<Complex64>,
}

impl DensityMatrix {
    /// Wraps a matrix without checking the state invariants; see [`Self::validate`].
    pub fn from_matrix(n_sites: usize, data: Array2<Complex64>) -> Result<Self> {
        let d = hilbert_dim(n_sites);
        if data.dim() != (d, d) {
            return Err(Error::InvalidState(format!(
                "expected {d}x{d} for {n_sites} sites, got {:?}",
                data.dim()
            )));
        }
        Ok(Self { n_sites, data })
    }

    /// Inverse of [`Self::to_vec`].
    pub fn from_vec(n_sites: usize, vec: &[Complex64]) -> Result<Self> {
        let d = hilbert_dim(n_sites);
        if vec.len() != d * d {
            return Err(Error::InvalidState(format!("vector length {} is not {}", vec.len(), d * d)));
        }
        Ok(Self { n_sites, data: Array2::from_shape_fn((d, d), |(a, b)| vec[a + b * d]) })
    }

    pub fn maximally_mixed(n_sites: usize) -> Self {
        let d = hilbert_dim(n_sites);
        Self { n_sites, data: Array2::eye(d).mapv(|x: Complex64| x / d as f64) }
    }

    /// `|l_0 l_1 …⟩⟨l_0 l_1 …|` for per-site basis levels.
    pub fn pure_product(levels: &[usize]) -> Self {
        let n = levels.len();
        let d = hilbert_dim(n);
        let mut data = Array2::zeros((d, d));
        let k = basis_index(levels);
        data[[k, k]] = Complex64::new(1.0, 0.0);
        Self { n_sites: n, data }
    }

    /// Tensor product of single-site 3x3 states, hub first.
    pub fn product(sites: &[Array2<Complex64>]) -> Self {
        let mut data = Array2::from_elem((1, 1), Complex64::new(1.0, 0.0));
        for s in sites {
            assert_eq!(s.dim(), (SITE_DIM, SITE_DIM));
            let d = data.nrows();
            data = Array2::from_shape_fn((d * SITE_DIM, d * SITE_DIM), |(r, c)| {
                data[[r / SITE_DIM, c / SITE_DIM]] * s[[r % SITE_DIM, c % SITE_DIM]]
            });
        }
        Self { n_sites: sites.len(), data }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> Array2<Complex64> {
        self.data
    }

    /// Column-stacked vectorization.
    pub fn to_vec(&self) -> Vec<Complex64> {
        self.data.t().iter().copied().collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.data.diag().sum()
    }

    /// Largest `|ρ[a,b] − conj(ρ[b,a])|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in a..d {
                worst = worst.max((self.data[[a, b]] - self.data[[b, a]].conj()).norm());
            }
        }
        worst
    }

    /// `(ρ + ρ†) / 2`.
    pub fn hermitize(&mut self) {
        let d = self.dim();
        for a in 0..d {
            for b in a..d {
                let avg = (self.data[[a, b]] + self.data[[b, a]].conj()) * 0.5;
                self.data[[a, b]] = avg;
                self.data[[b, a]] = avg.conj();
            }
        }
    }

    pub fn normalize_trace(&mut self) {
        let tr = self.trace();
        self.data.mapv_inplace(|z| z / tr);
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim();
        let m = faer::Mat::<Complex64>::from_fn(d, d, |a, b| {
            (self.data[[a, b]] + self.data[[b, a]].conj()) * 0.5
        });
        m.self_adjoint_eigenvalues(faer::Side::Lower)
            .expect("Hermitian eigendecomposition of a finite matrix")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Checks Hermiticity, unit trace and positivity within the state tolerances.
    pub fn validate(&self) -> Result<()> {
        if self.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let herm = self.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("hermiticity error {herm:.3e}")));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < MIN_EIGENVALUE_TOL {
            return Err(Error::InvalidState(format!("minimum eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// `tr(ρ A)`.
    pub fn expectation(&self, op: &CsrMatrix) -> Complex64 {
        op.iter().map(|(r, c, v)| v * self.data[[c, r]]).sum()
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.data.iter().zip(other.data.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// State with tensor factors reordered: factor `k` of the result is
    /// factor `perm[k]` of `self`.
    pub fn permute_sites(&self, perm: &[usize]) -> Self {
        let n = self.n_sites;
        assert_eq!(perm.len(), n);
        let d = self.dim();
        let map: Vec<usize> = (0..d)
            .map(|new| {
                let new_levels = site_levels(new, n);
                let mut old_levels = vec![0; n];
                for (k, &p) in perm.iter().enumerate() {
                    old_levels[p] = new_levels[k];
                }
                basis_index(&old_levels)
            })
            .collect();
        let data = Array2::from_shape_fn((d, d), |(a, b)| self.data[[map[a], map[b]]]);
        Self { n_sites: n, data }
    }

    /// Populations of each site level `(m=+1, m=0, m=-1)`, hub first.
    pub fn site_populations(&self) -> Vec<[f64; SITE_DIM]> {
        let n = self.n_sites;
        let mut pops = vec![[0.0; SITE_DIM]; n];
        for a in 0..self.dim() {
            let p = self.data[[a, a]].re;
            for (site, level) in site_levels(a, n).into_iter().enumerate() {
                pops[site][level] += p;
            }
        }
        pops
    }
}
