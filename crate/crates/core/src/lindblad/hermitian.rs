//! The sector block of a Liouvillian as a real map on Hermitian matrices.
//!
//! A Lindblad generator maps Hermitian matrices to Hermitian matrices, so on
//! the real coordinates `Re ρ[a, a]`, `Re ρ[a, b]`, `Im ρ[a, b]` (`a < b`) it
//! is a real square matrix of the same size as the complex sector block.
//! Real sparse LU on it is several times cheaper than complex LU.

use num_complex::Complex64;

use super::Liouvillian;
use crate::C64_ZERO;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Re,
    Im,
}

/// Real CSR matrix, just enough for refinement products.
#[derive(Debug, Clone)]
pub(crate) struct RealCsr {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl RealCsr {
    fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|t| (t.0, t.1));
        let mut indptr = vec![0; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        Self { n, indptr, indices, values }
    }

    pub(crate) fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                (self.indptr[r]..self.indptr[r + 1]).map(|k| self.values[k] * x[self.indices[k]]).sum()
            })
            .collect()
    }

    pub(crate) fn to_faer(&self) -> faer::sparse::SparseColMat<usize, f64> {
        use faer::sparse::{SparseColMat, Triplet};
        let mut triplets = Vec::with_capacity(self.values.len());
        for r in 0..self.n {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k] != 0.0 {
                    triplets.push(Triplet::new(r, self.indices[k], self.values[k]));
                }
            }
        }
        SparseColMat::try_new_from_triplets(self.n, self.n, &triplets)
            .expect("triplets come from a valid CSR matrix")
    }
}

/// Bordered real system `A y = e` whose solution is the steady state.
#[derive(Debug, Clone)]
pub(crate) struct HermitianSystem {
    /// Sector index and part behind each real coordinate.
    coords: Vec<(usize, Part)>,
    /// Sector index of the transposed entry `ρ[b, a]`.
    mirror: Vec<usize>,
    pub(crate) bordered: RealCsr,
    pub(crate) pivot: usize,
}

impl HermitianSystem {
    pub(crate) fn new(l: &Liouvillian) -> Self {
        let d = l.hilbert_dim();
        let sector = l.sector_indices();
        let mut position = vec![usize::MAX; d * d];
        for (k, &v) in sector.iter().enumerate() {
            position[v] = k;
        }
        let mirror: Vec<usize> = sector.iter().map(|&v| position[v / d + (v % d) * d]).collect();

        let mut coords = Vec::with_capacity(sector.len());
        let mut re_of = vec![usize::MAX; sector.len()];
        let mut im_of = vec![usize::MAX; sector.len()];
        for (k, &v) in sector.iter().enumerate() {
            let (a, b) = (v % d, v / d);
            if a <= b {
                re_of[k] = coords.len();
                coords.push((k, Part::Re));
            }
            if a < b {
                im_of[k] = coords.len();
                coords.push((k, Part::Im));
            }
        }
        let n = coords.len();

        // Column k of the sector block is row k of its transpose.
        let columns = l.sector_matrix().transpose();
        let i = Complex64::new(0.0, 1.0);
        let mut triplets = Vec::with_capacity(l.sector_matrix().nnz());
        for (j, &(k, part)) in coords.iter().enumerate() {
            let (v, km) = (sector[k], mirror[k]);
            let diagonal = v % d == v / d;
            // L(X) for X = E_ab + E_ba, i E_ab − i E_ba, or E_aa.
            let (w, wm) = match part {
                Part::Re if diagonal => (Complex64::new(1.0, 0.0), C64_ZERO),
                Part::Re => (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
                Part::Im => (i, -i),
            };
            let mut push = |col: usize, weight: Complex64| {
                let (rows, vals) = columns.row(col);
                for (&r, &val) in rows.iter().zip(vals) {
                    let z = weight * val;
                    if re_of[r] != usize::MAX {
                        triplets.push((re_of[r], j, z.re));
                    }
                    if im_of[r] != usize::MAX {
                        triplets.push((im_of[r], j, z.im));
                    }
                }
            };
            push(k, w);
            if !diagonal {
                push(km, wm);
            }
        }
        let diagonal_coords: Vec<usize> = (0..n)
            .filter(|&j| {
                let v = sector[coords[j].0];
                v % d == v / d
            })
            .collect();
        let pivot = diagonal_coords[0];
        triplets.retain(|t| t.0 != pivot && t.2 != 0.0);
        triplets.extend(diagonal_coords.iter().map(|&j| (pivot, j, 1.0)));
        Self { coords, mirror, bordered: RealCsr::from_triplets(n, triplets), pivot }
    }

    pub(crate) fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Complex sector vector of the Hermitian matrix with coordinates `y`.
    pub(crate) fn to_sector(&self, y: &[f64]) -> Vec<Complex64> {
        let mut x = vec![C64_ZERO; self.coords.len()];
        for (&(k, part), &value) in self.coords.iter().zip(y) {
            match part {
                Part::Re => {
                    x[k].re += value;
                    if self.mirror[k] != k {
                        x[self.mirror[k]].re += value;
                    }
                }
                Part::Im => {
                    x[k].im += value;
                    x[self.mirror[k]].im -= value;
                }
            }
        }
        x
    }
}
