//! Spin-1 site operators and their embedding into the network Hilbert space.
//!
//! Basis order on every site is `(m=+1, m=0, m=-1)`. Site 0 (the hub) is the
//! leftmost, slowest-varying tensor factor.

use ndarray::{array, Array2};
use num_complex::Complex64;

use crate::sparse::CsrMatrix;
use crate::{Error, Result, C64_ZERO};

/// Local dimension of a spin-1 site.
pub const SITE_DIM: usize = 3;

/// Index of the `m = 0` level in the site basis.
pub const M_ZERO: usize = 1;

/// Magnetic quantum number of a site basis index.
pub fn magnetic_number(level: usize) -> i32 {
    1 - level as i32
}

/// A dense 3x3 operator on a single spin-1 site.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteOperator(Array2<Complex64>);

impl SiteOperator {
    pub fn from_matrix(m: Array2<Complex64>) -> Self {
        assert_eq!(m.dim(), (SITE_DIM, SITE_DIM), "site operators are 3x3");
        Self(m)
    }

    pub fn identity() -> Self {
        Self(Array2::eye(SITE_DIM))
    }

    /// `|row><col|`.
    pub fn projector(row: usize, col: usize) -> Self {
        let mut m = Array2::zeros((SITE_DIM, SITE_DIM));
        m[[row, col]] = Complex64::new(1.0, 0.0);
        Self(m)
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.0
    }

    pub fn dot(&self, other: &SiteOperator) -> SiteOperator {
        Self(self.0.dot(&other.0))
    }

    pub fn adjoint(&self) -> SiteOperator {
        Self(self.0.t().mapv(|z| z.conj()))
    }

    pub fn commutator(&self, other: &SiteOperator) -> SiteOperator {
        Self(self.0.dot(&other.0) - other.0.dot(&self.0))
    }

    pub fn nnz(&self) -> usize {
        self.0.iter().filter(|z| **z != C64_ZERO).count()
    }
}

/// The five site operators the model is built from.
#[derive(Debug, Clone)]
pub struct Spin1Operators {
    pub sz: SiteOperator,
    pub splus: SiteOperator,
    pub sminus: SiteOperator,
    /// Gain jump `|m=0><m=-1|`.
    pub jump_gain: SiteOperator,
    /// Damping jump `|m=0><m=+1|`.
    pub jump_damp: SiteOperator,
}

pub fn spin1_operators() -> Spin1Operators {
    let r = |x: f64| Complex64::new(x, 0.0);
    let s2 = std::f64::consts::SQRT_2;
    let sz = SiteOperator(array![[r(1.0), r(0.0), r(0.0)], [r(0.0), r(0.0), r(0.0)], [r(0.0), r(0.0), r(-1.0)]]);
    let splus = SiteOperator(array![[r(0.0), r(s2), r(0.0)], [r(0.0), r(0.0), r(s2)], [r(0.0), r(0.0), r(0.0)]]);
    let sminus = splus.adjoint();
    Spin1Operators {
        sz,
        splus,
        sminus,
        jump_gain: SiteOperator::projector(M_ZERO, 2),
        jump_damp: SiteOperator::projector(M_ZERO, 0),
    }
}

/// `S^y = (S^+ - S^-) / 2i`.
pub fn spin1_sy() -> SiteOperator {
    let ops = spin1_operators();
    let diff = &ops.splus.0 - &ops.sminus.0;
    SiteOperator(diff.mapv(|z| z / Complex64::new(0.0, 2.0)))
}

/// A site operator embedded as `I ⊗ … ⊗ A ⊗ … ⊗ I`.
#[derive(Debug, Clone)]
pub struct EmbeddedOperator {
    n_sites: usize,
    site: usize,
    matrix: CsrMatrix,
}

impl EmbeddedOperator {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn site(&self) -> usize {
        self.site
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CsrMatrix {
        self.matrix
    }
}

/// Hilbert-space dimension of `n_sites` spin-1 sites.
pub fn hilbert_dim(n_sites: usize) -> usize {
    SITE_DIM.pow(n_sites as u32)
}

pub fn embed(op: &SiteOperator, site: usize, n_sites: usize) -> Result<EmbeddedOperator> {
    if site >= n_sites {
        return Err(Error::SiteOutOfRange { site, n_sites });
    }
    let left = hilbert_dim(site);
    let right = hilbert_dim(n_sites - site - 1);
    // Direct index arithmetic: basis index = (l * 3 + s) * right + r.
    let mut triplets = Vec::with_capacity(op.nnz() * left * right);
    for ((a, b), &v) in op.0.indexed_iter() {
        if v == C64_ZERO {
            continue;
        }
        for l in 0..left {
            for r in 0..right {
                triplets.push(((l * SITE_DIM + a) * right + r, (l * SITE_DIM + b) * right + r, v));
            }
        }
    }
    let dim = hilbert_dim(n_sites);
    Ok(EmbeddedOperator { n_sites, site, matrix: CsrMatrix::from_triplets(dim, dim, triplets) })
}

/// Site levels (digits) of a network basis index, hub first.
pub fn site_levels(index: usize, n_sites: usize) -> Vec<usize> {
    let mut levels = vec![0; n_sites];
    let mut rest = index;
    for k in (0..n_sites).rev() {
        levels[k] = rest % SITE_DIM;
        rest /= SITE_DIM;
    }
    levels
}

/// Network basis index of the given per-site levels, hub first.
pub fn basis_index(levels: &[usize]) -> usize {
    levels.iter().fold(0, |acc, &l| acc * SITE_DIM + l)
}

/// Total magnetic quantum number of a network basis state.
pub fn total_magnetization(index: usize, n_sites: usize) -> i32 {
    site_levels(index, n_sites).into_iter().map(magnetic_number).sum()
}
