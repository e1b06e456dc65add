//! Coherence quantifiers in the computational reference basis.

use crate::linalg::{self, max_offdiag_abs, shannon_entropy_bits, von_neumann_entropy, CMatrix};
use crate::states::DensityMatrix;

/// Default tolerance for deciding that a state is incoherent.
pub const DEFAULT_INCOHERENCE_TOL: f64 = 1e-9;

/// Σ_{i≠j} |ρ_ij|
pub fn c_l1(rho: &DensityMatrix) -> f64 {
    l1_offdiag(rho.matrix())
}

/// Sum of absolute off-diagonal entries of any square matrix.
pub fn l1_offdiag(m: &CMatrix) -> f64 {
    let mut total = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j {
                total += m[(i, j)].norm();
            }
        }
    }
    total
}

/// S(Δ(ρ)) − S(ρ) in bits.
pub fn c_relative_entropy(rho: &DensityMatrix) -> f64 {
    let diag = shannon_entropy_bits(rho.matrix().diagonal().iter().map(|z| z.re));
    (diag - von_neumann_entropy(rho)).max(0.0)
}

/// Diagonal part of ρ.
pub fn dephase(rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_trusted(dephase_matrix(rho.matrix()))
}

pub fn dephase_matrix(m: &CMatrix) -> CMatrix {
    let mut out = linalg::zeros(m.nrows());
    for i in 0..m.nrows() {
        out[(i, i)] = m[(i, i)];
    }
    out
}

pub fn is_incoherent_state(rho: &DensityMatrix, tol: f64) -> bool {
    max_offdiag_abs(rho.matrix()) <= tol
}
