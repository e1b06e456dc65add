//! Dense complex linear algebra shared by the rest of the crate.
//!
//! Everything works on `nalgebra::DMatrix<Complex64>`; dimensions of interest
//! are small (a few hundred at most), so no attempt is made at sparsity.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::DensityMatrix;

pub type CMatrix = DMatrix<Complex64>;

/// Hermiticity tolerance (max-abs deviation from the adjoint).
pub const TOL_HERM: f64 = 1e-9;
/// Eigendecomposition reconstruction tolerance.
pub const TOL_EIG: f64 = 1e-9;
/// Smallest admissible eigenvalue of a positive semidefinite matrix.
pub const TOL_PSD: f64 = -1e-9;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zeros(d: usize) -> CMatrix {
    CMatrix::zeros(d, d)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// |i⟩⟨j| in dimension d.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = zeros(d);
    m[(i, j)] = c64(1.0, 0.0);
    m
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_offdiag_abs(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

pub fn max_hermitian_deviation(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..=j.min(m.nrows().saturating_sub(1)) {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// (A + A†)/2
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl HermitianEigen {
    /// V Λ V†
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for k in 0..n {
            let lambda = self.eigenvalues[k];
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= lambda);
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }
}

pub fn hermitian_eigendecomposition(m: &CMatrix) -> Result<HermitianEigen> {
    ensure_square(m)?;
    let deviation = max_hermitian_deviation(m);
    if deviation > TOL_HERM {
        return Err(Error::NotHermitian {
            deviation,
            tolerance: TOL_HERM,
        });
    }
    Ok(eigh_unchecked(m))
}

/// Eigendecomposition of the Hermitian part of `m`, without validation.
pub(crate) fn eigh_unchecked(m: &CMatrix) -> HermitianEigen {
    let n = m.nrows();
    if n == 0 {
        return HermitianEigen {
            eigenvalues: Vec::new(),
            eigenvectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermitianEigen {
        eigenvalues,
        eigenvectors,
    }
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    hermitian_eigendecomposition(m).map(|e| e.eigenvalues)
}

/// Sum of singular values of a Hermitian matrix, i.e. Σ|λ|.
pub fn trace_norm_hermitian(m: &CMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.iter().map(|l| l.abs()).sum())
}

/// Tr√((ρ−σ)²). Ranges over [0, 2].
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: sigma.dim(),
        });
    }
    trace_norm_hermitian(&(rho.matrix() - sigma.matrix()))
}

/// Shannon entropy in bits; entries within |TOL_PSD| of zero count as zero.
pub fn shannon_entropy_bits<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > TOL_PSD.abs())
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    shannon_entropy_bits(eigh_unchecked(rho.matrix()).eigenvalues)
}

/// Transpose on the second tensor factor of a d²×d² matrix indexed (a, i) → a·d + i.
pub fn partial_transpose(m: &CMatrix, d: usize) -> Result<CMatrix> {
    let n = ensure_square(m)?;
    if n != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            actual: n,
        });
    }
    let mut out = CMatrix::zeros(n, n);
    for a in 0..d {
        for i in 0..d {
            for b in 0..d {
                for j in 0..d {
                    out[(a * d + i, b * d + j)] = m[(a * d + j, b * d + i)];
                }
            }
        }
    }
    Ok(out)
}

/// Traceless Hermitian generators of su(d), normalized to Tr[Λ_i Λ_j] = 2δ_ij.
///
/// Ordering: for each index pair (j, k) with j < k, taken lexicographically,
/// the symmetric generator |j⟩⟨k| + |k⟩⟨j| is followed by the antisymmetric
/// one −i|j⟩⟨k| + i|k⟩⟨j|. The d − 1 diagonal generators come last. For d = 2
/// this gives (σx, σy, σz).
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    generators: Vec<CMatrix>,
    pairs: Vec<(usize, usize)>,
}

impl HermitianBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Index pairs (j, k), j < k, in generator order; pair r owns slots 2r and 2r+1.
    pub fn offdiag_pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Largest violation of hermiticity, tracelessness and Tr[Λ_iΛ_j] = 2δ_ij.
    pub fn max_invariant_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, gi) in self.generators.iter().enumerate() {
            worst = worst.max(max_hermitian_deviation(gi));
            worst = worst.max(trace(gi).norm());
            for (j, gj) in self.generators.iter().enumerate().skip(i) {
                let target = if i == j { 2.0 } else { 0.0 };
                worst = worst.max((trace(&(gi * gj)) - c64(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Σ_i x_i Λ_i
    pub fn combine(&self, coords: &[f64]) -> Result<CMatrix> {
        if coords.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: coords.len(),
            });
        }
        let mut out = zeros(self.dim);
        for (x, g) in coords.iter().zip(&self.generators) {
            out += g.scale(*x);
        }
        Ok(out)
    }
}

pub fn generalized_gell_mann(d: usize) -> Result<HermitianBasis> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let mut generators = Vec::with_capacity(d * d - 1);
    let mut pairs = Vec::with_capacity(d * (d - 1) / 2);
    for j in 0..d {
        for k in (j + 1)..d {
            let mut sym = zeros(d);
            sym[(j, k)] = c64(1.0, 0.0);
            sym[(k, j)] = c64(1.0, 0.0);
            let mut anti = zeros(d);
            anti[(j, k)] = c64(0.0, -1.0);
            anti[(k, j)] = c64(0.0, 1.0);
            generators.push(sym);
            generators.push(anti);
            pairs.push((j, k));
        }
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = zeros(d);
        for m in 0..l {
            diag[(m, m)] = c64(norm, 0.0);
        }
        diag[(l, l)] = c64(-(l as f64) * norm, 0.0);
        generators.push(diag);
    }
    Ok(HermitianBasis {
        dim: d,
        generators,
        pairs,
    })
}
