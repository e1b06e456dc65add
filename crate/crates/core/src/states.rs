//! Density matrices, Bloch coordinates and Haar-random pure states.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    self, c64, eigh_unchecked, max_hermitian_deviation, CMatrix, HermitianBasis, TOL_HERM,
    TOL_PSD,
};

pub type CVector = DVector<Complex64>;

/// Trace tolerance for validated density matrices.
pub const TOL_TRACE: f64 = 1e-10;

/// A d×d Hermitian, unit-trace, positive semidefinite matrix in the
/// computational (reference) basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let deviation = max_hermitian_deviation(&matrix);
        if deviation > TOL_HERM {
            return Err(Error::NotHermitian {
                deviation,
                tolerance: TOL_HERM,
            });
        }
        let tr = linalg::trace(&matrix);
        if (tr - c64(1.0, 0.0)).norm() > TOL_TRACE {
            return Err(Error::NotDensityMatrix(format!("trace {tr} is not 1")));
        }
        let min_eig = eigh_unchecked(&matrix).min_eigenvalue();
        if min_eig < TOL_PSD {
            return Err(Error::NotDensityMatrix(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix already known to be a state up to round-off.
    pub(crate) fn from_trusted(matrix: CMatrix) -> Self {
        Self {
            matrix: linalg::hermitian_part(&matrix),
        }
    }

    /// |ψ⟩⟨ψ| for a nonzero vector, normalized first.
    pub fn from_pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if psi.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotDensityMatrix("zero state vector".into()));
        }
        let unit = psi.unscale(norm);
        Ok(Self::from_trusted(&unit * unit.adjoint()))
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Self {
            matrix: linalg::identity(d).unscale(d as f64),
        })
    }

    pub fn basis_state(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: i + 1,
            });
        }
        Ok(Self {
            matrix: linalg::matrix_unit(d, i, i),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    /// Tr[ρ²]
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// (Tr[ρσx], Tr[ρσy], Tr[ρσz]) for a qubit.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: self.dim(),
            });
        }
        let r01 = self.matrix[(0, 1)];
        Ok([
            2.0 * r01.re,
            -2.0 * r01.im,
            self.matrix[(0, 0)].re - self.matrix[(1, 1)].re,
        ])
    }
}

/// ρ = (I + r·σ)/2
pub fn from_bloch(r: [f64; 3]) -> Result<DensityMatrix> {
    let len = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if len > 1.0 + 1e-12 || !len.is_finite() {
        return Err(Error::BlochOutOfBall(len));
    }
    Ok(DensityMatrix {
        matrix: bloch_operator(r),
    })
}

/// (I + r·σ)/2 without the unit-ball check.
pub(crate) fn bloch_operator(r: [f64; 3]) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            c64(0.5 * (1.0 + r[2]), 0.0),
            c64(0.5 * r[0], -0.5 * r[1]),
            c64(0.5 * r[0], 0.5 * r[1]),
            c64(0.5 * (1.0 - r[2]), 0.0),
        ],
    )
}

/// Generalized Bloch coordinates x_i = Tr[ρΛ_i] split as x = χ n̂.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedBloch {
    pub dim: usize,
    pub coords: Vec<f64>,
    pub chi: f64,
    /// `None` when χ = 0 and the direction is undefined.
    pub unit_dir: Option<Vec<f64>>,
}

impl GeneralizedBloch {
    /// Largest admissible χ for dimension d: √(2(d−1)/d).
    pub fn chi_max(d: usize) -> f64 {
        (2.0 * (d as f64 - 1.0) / d as f64).sqrt()
    }
}

pub fn to_generalized_bloch(rho: &DensityMatrix, basis: &HermitianBasis) -> Result<GeneralizedBloch> {
    to_generalized_bloch_operator(rho.matrix(), basis)
}

/// Same as [`to_generalized_bloch`] for any Hermitian operator.
pub fn to_generalized_bloch_operator(m: &CMatrix, basis: &HermitianBasis) -> Result<GeneralizedBloch> {
    if m.nrows() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            actual: m.nrows(),
        });
    }
    let coords: Vec<f64> = basis
        .generators()
        .iter()
        .map(|g| linalg::trace(&(m * g)).re)
        .collect();
    let chi = coords.iter().map(|x| x * x).sum::<f64>().sqrt();
    let unit_dir = (chi > 0.0).then(|| coords.iter().map(|x| x / chi).collect());
    Ok(GeneralizedBloch {
        dim: basis.dim(),
        coords,
        chi,
        unit_dir,
    })
}

/// I/d + ½ Σ x_i Λ_i. Not checked for positivity.
pub fn from_generalized_coords(coords: &[f64], basis: &HermitianBasis) -> Result<CMatrix> {
    let d = basis.dim();
    Ok(linalg::identity(d).unscale(d as f64) + basis.combine(coords)?.scale(0.5))
}

/// Projector onto (1/√d) Σ_j e^{iθ_j} |j⟩.
pub fn maximally_coherent(d: usize, thetas: &[f64]) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if thetas.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: thetas.len(),
        });
    }
    let amp = 1.0 / (d as f64).sqrt();
    let psi = CVector::from_iterator(d, thetas.iter().map(|t| Complex64::from_polar(amp, *t)));
    Ok(DensityMatrix::from_trusted(&psi * psi.adjoint()))
}

/// Phases of the k-th Fourier state: θ_j = 2πjk/d.
pub fn fourier_phases(d: usize, k: usize) -> Vec<f64> {
    (0..d)
        .map(|j| 2.0 * std::f64::consts::PI * ((j * k) % d) as f64 / d as f64)
        .collect()
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sub-seed for worker `index` of a run seeded with `seed`.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    seed ^ index
}

/// Unit vector drawn from the unitarily invariant measure: d standard
/// complex Gaussians, normalized. The global phase is fixed so the first
/// nonzero amplitude is real and nonnegative.
pub fn haar_random_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CVector {
    loop {
        let mut psi = CVector::from_fn(d, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            c64(re, im)
        });
        let norm = psi.norm();
        if norm == 0.0 {
            continue;
        }
        psi.unscale_mut(norm);
        if let Some(first) = psi.iter().find(|z| z.norm() > 0.0).copied() {
            let phase = first.conj() / first.norm();
            psi.iter_mut().for_each(|z| *z *= phase);
        }
        return psi;
    }
}

pub fn haar_random_pure(d: usize, seed: u64) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let mut rng = rng_from_seed(seed);
    Ok(haar_random_pure_with(&mut rng, d))
}

pub fn haar_random_pure_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix {
    let psi = haar_random_vector(rng, d);
    DensityMatrix::from_trusted(&psi * psi.adjoint())
}

/// Σ_k w_k |ψ_k⟩⟨ψ_k| with `rank` Haar-random vectors and Dirichlet-like
/// weights; used to probe mixed inputs in tests and checks.
pub fn random_mixed_with<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> DensityMatrix {
    let mut weights: Vec<f64> = (0..rank.max(1))
        .map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln())
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut m = linalg::zeros(d);
    for w in weights {
        let psi = haar_random_vector(rng, d);
        m += (&psi * psi.adjoint()).scale(w);
    }
    DensityMatrix::from_trusted(m)
}
