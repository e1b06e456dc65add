//! Iterated channels: coherence-breaking index, stroboscopic coherence
//! trajectories and the l1-coherence factorization through a probe state.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channels::{KrausChannel, QubitAffine};
use crate::classifiers::{is_cbc, is_incoherent_kraus};
use crate::coherence::{c_l1, l1_offdiag};
use crate::error::{Error, Result};
use crate::linalg::{self, eigh_unchecked, max_offdiag_abs, CMatrix, HermitianBasis, TOL_PSD};
use crate::states::{from_generalized_coords, maximally_coherent, to_generalized_bloch, DensityMatrix};

pub const DEFAULT_INDEX_CAP: usize = 64;
pub const DEFAULT_SUDDEN_DEATH_TOL: f64 = 1e-9;

/// Coherence-breaking index: the least n with Φⁿ coherence breaking, or a
/// marker that no such n ≤ cap exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexValue {
    Finite(usize),
    ExceedsCap,
}

impl IndexValue {
    pub fn finite(self) -> Option<usize> {
        match self {
            IndexValue::Finite(n) => Some(n),
            IndexValue::ExceedsCap => None,
        }
    }
}

impl std::fmt::Display for IndexValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IndexValue::Finite(n) => write!(f, "{n}"),
            IndexValue::ExceedsCap => f.write_str("exceeds-cap"),
        }
    }
}

impl Serialize for IndexValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            IndexValue::Finite(n) => serializer.serialize_u64(*n as u64),
            IndexValue::ExceedsCap => serializer.serialize_str("exceeds-cap"),
        }
    }
}

impl<'de> Deserialize<'de> for IndexValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(usize),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(n) => Ok(IndexValue::Finite(n)),
            Raw::Text(s) if s == "exceeds-cap" => Ok(IndexValue::ExceedsCap),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("unknown index marker {s:?}"))),
        }
    }
}

/// `residuals[k]` is the coherence-breaking residual of Φ^{k+1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexResult {
    pub value: IndexValue,
    pub cap: usize,
    pub residuals: Vec<f64>,
}

/// Kraus operators certifying that the channel is incoherent: the given
/// ones if they pass, otherwise the Choi-extracted set.
pub fn incoherent_certificate(channel: &KrausChannel, tol: f64) -> Option<KrausChannel> {
    if is_incoherent_kraus(channel, tol).holds {
        return Some(channel.clone());
    }
    let canonical = channel.choi().kraus_with_coupling_threshold(tol);
    is_incoherent_kraus(&canonical, tol).holds.then_some(canonical)
}

pub fn coherence_breaking_index(channel: &KrausChannel, cap: usize, tol: f64) -> Result<IndexResult> {
    if cap == 0 {
        return Err(Error::out_of_range("cap", 0.0, "cap >= 1"));
    }
    let Some(base) = incoherent_certificate(channel, tol) else {
        let violation = is_incoherent_kraus(channel, tol).violation;
        return Err(Error::NotIncoherentChannel(match violation {
            Some(v) => format!("Kraus operator {} has {} nonzero entries in column {}", v.operator, v.count, v.index),
            None => "no incoherent Kraus decomposition found".into(),
        }));
    };
    let mut power = base.clone();
    let mut residuals = Vec::new();
    for n in 1..=cap {
        if n > 1 {
            power = KrausChannel::compose(&base, &power)?.pruned();
        }
        let check = is_cbc(&power, tol);
        residuals.push(check.residual);
        if check.holds {
            return Ok(IndexResult {
                value: IndexValue::Finite(n),
                cap,
                residuals,
            });
        }
    }
    Ok(IndexResult {
        value: IndexValue::ExceedsCap,
        cap,
        residuals,
    })
}

/// Distance of an affine rep from the coherence-breaking form.
pub fn affine_cbc_residual(rep: &QubitAffine) -> f64 {
    let m = rep.m();
    let n = rep.shift();
    m[0].iter()
        .chain(m[1].iter())
        .chain([n[0], n[1]].iter())
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
}

pub fn coherence_breaking_index_affine(rep: &QubitAffine, cap: usize, tol: f64) -> Result<IndexResult> {
    if cap == 0 {
        return Err(Error::out_of_range("cap", 0.0, "cap >= 1"));
    }
    let mut residuals = Vec::new();
    let mut power = rep.clone();
    for n in 1..=cap {
        if n > 1 {
            power = compose_affine(rep, &power);
        }
        let residual = affine_cbc_residual(&power);
        residuals.push(residual);
        if residual <= tol {
            return Ok(IndexResult {
                value: IndexValue::Finite(n),
                cap,
                residuals,
            });
        }
    }
    Ok(IndexResult {
        value: IndexValue::ExceedsCap,
        cap,
        residuals,
    })
}

/// outer ∘ inner: (M_o M_i, M_o n_i + n_o)
fn compose_affine(outer: &QubitAffine, inner: &QubitAffine) -> QubitAffine {
    let m = outer.matrix() * inner.matrix();
    let n = outer.matrix() * inner.shift_vector() + outer.shift_vector();
    let mut rows = [[0.0; 3]; 3];
    for (r, row) in rows.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            *x = m[(r, c)];
        }
    }
    QubitAffine::from_parts(rows, [n[0], n[1], n[2]])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub c_l1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceTrajectory {
    pub steps: Vec<TrajectoryPoint>,
    pub sudden_death_step: Option<usize>,
    pub tolerance: f64,
}

impl CoherenceTrajectory {
    pub fn values(&self) -> Vec<f64> {
        self.steps.iter().map(|p| p.c_l1).collect()
    }

    /// First step whose coherence is at most `tol`.
    pub fn sudden_death_at(&self, tol: f64) -> Option<usize> {
        self.steps.iter().find(|p| p.c_l1 <= tol).map(|p| p.step)
    }
}

/// c_l1 of Φ^j(ρ) for j = 0..=steps.
pub fn evolve(state: &DensityMatrix, channel: &KrausChannel, steps: usize, tol: f64) -> Result<CoherenceTrajectory> {
    if steps == 0 {
        return Err(Error::out_of_range("steps", 0.0, "steps >= 1"));
    }
    if state.dim() != channel.dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.dim(),
            actual: state.dim(),
        });
    }
    let mut current = state.clone();
    let mut points = vec![TrajectoryPoint {
        step: 0,
        c_l1: c_l1(&current),
    }];
    for step in 1..=steps {
        current = channel.apply(&current)?;
        points.push(TrajectoryPoint {
            step,
            c_l1: c_l1(&current),
        });
    }
    let mut trajectory = CoherenceTrajectory {
        steps: points,
        sudden_death_step: None,
        tolerance: tol,
    };
    trajectory.sudden_death_step = trajectory.sudden_death_at(tol);
    Ok(trajectory)
}

/// Probe operator I/d + ½χ_P n̂·Λ sharing the direction n̂ of a state.
///
/// The operator always has unit trace and unit l1 coherence but need not be
/// positive; `is_positive` records whether it is a density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeState {
    pub operator: CMatrix,
    pub chi_p: f64,
    pub unit_dir: Vec<f64>,
    pub is_positive: bool,
}

impl ProbeState {
    pub fn state(&self) -> Option<DensityMatrix> {
        self.is_positive.then(|| DensityMatrix::from_trusted(self.operator.clone()))
    }
}

pub fn probe_state(state: &DensityMatrix, basis: &HermitianBasis) -> Result<ProbeState> {
    let bloch = to_generalized_bloch(state, basis)?;
    let unit_dir = bloch.unit_dir.ok_or(Error::IncoherentInput)?;
    let pair_norm: f64 = (0..basis.offdiag_pairs().len())
        .map(|r| unit_dir[2 * r].hypot(unit_dir[2 * r + 1]))
        .sum();
    if pair_norm <= 1e-14 {
        return Err(Error::IncoherentInput);
    }
    let chi_p = 1.0 / pair_norm;
    let coords: Vec<f64> = unit_dir.iter().map(|n| n * chi_p).collect();
    let operator = from_generalized_coords(&coords, basis)?;
    let is_positive = eigh_unchecked(&operator).min_eigenvalue() >= TOL_PSD;
    Ok(ProbeState {
        operator,
        chi_p,
        unit_dir,
        is_positive,
    })
}

/// Maximally coherent qubit state (|0⟩ + e^{−iθ}|1⟩)/√2 whose coherence
/// carries the phase θ of ρ₀₁.
pub fn qubit_probe(state: &DensityMatrix) -> Result<DensityMatrix> {
    if state.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: state.dim(),
        });
    }
    let rho01 = state.get(0, 1);
    if rho01.norm() == 0.0 {
        return Err(Error::IncoherentInput);
    }
    maximally_coherent(2, &[0.0, -rho01.arg()])
}

/// Which hypothesis of the factorization law was verified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certification {
    /// A Kraus decomposition with at most one nonzero per column exists.
    IncoherentKraus,
    /// Only Φ(I/d) was found to be diagonal.
    MaximallyMixedDiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorizationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub certification: Certification,
}

/// Compares c_l1(Φ(ρ)) with c_l1(ρ)·c_l1(Φ(ρ_P)).
pub fn factorization_check(state: &DensityMatrix, channel: &KrausChannel, tol: f64) -> Result<FactorizationCheck> {
    let d = channel.dim();
    if state.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: state.dim(),
        });
    }
    let certification = if incoherent_certificate(channel, tol).is_some() {
        Certification::IncoherentKraus
    } else {
        let image = channel.apply_unchecked(&linalg::identity(d).unscale(d as f64));
        let off = max_offdiag_abs(&image);
        if off > tol {
            return Err(Error::HypothesisViolated(off));
        }
        Certification::MaximallyMixedDiagonal
    };
    let basis = linalg::generalized_gell_mann(d)?;
    let probe = probe_state(state, &basis)?;
    let lhs = c_l1(&channel.apply(state)?);
    let rhs = c_l1(state) * l1_offdiag(&channel.apply_unchecked(&probe.operator));
    Ok(FactorizationCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        certification,
    })
}
