//! Membership tests for channel classes defined relative to the computational
//! basis: incoherent, strictly incoherent (SIO), dephasing-covariant (DIO),
//! coherence breaking (CBC and its Kraus form SCBC), quantum-classical (QC)
//! and entanglement breaking (EB).

use serde::{Deserialize, Serialize};

use crate::channels::{KrausChannel, QubitAffine};
use crate::coherence::dephase_matrix;
use crate::error::{Error, Result};
use crate::linalg::{self, eigh_unchecked, max_abs, max_offdiag_abs, partial_transpose, CMatrix};

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Column,
}

/// First Kraus operator breaking a sparsity pattern: `count` entries above
/// tolerance along the given row or column (or `count` nonzero rows when
/// `axis` is `Row` and `index` is the operator's second nonzero row).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KrausViolation {
    pub operator: usize,
    pub axis: Axis,
    pub index: usize,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternCheck {
    pub holds: bool,
    pub violation: Option<KrausViolation>,
}

impl PatternCheck {
    fn from_violation(violation: Option<KrausViolation>) -> Self {
        Self {
            holds: violation.is_none(),
            violation,
        }
    }
}

/// Worst matrix unit |i⟩⟨j| for a matrix-unit criterion and its residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitCheck {
    pub holds: bool,
    pub unit: (usize, usize),
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorCheck {
    pub holds: bool,
    pub max_commutator: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PptCheck {
    pub verdict: Verdict,
    pub min_eigenvalue: f64,
}

fn is_nonzero(z: &num_complex::Complex64, tol: f64) -> bool {
    z.norm() > tol
}

fn column_violation(ops: &[CMatrix], tol: f64) -> Option<KrausViolation> {
    for (n, k) in ops.iter().enumerate() {
        for c in 0..k.ncols() {
            let count = k.column(c).iter().filter(|z| is_nonzero(z, tol)).count();
            if count > 1 {
                return Some(KrausViolation {
                    operator: n,
                    axis: Axis::Column,
                    index: c,
                    count,
                });
            }
        }
    }
    None
}

fn row_violation(ops: &[CMatrix], tol: f64) -> Option<KrausViolation> {
    for (n, k) in ops.iter().enumerate() {
        for r in 0..k.nrows() {
            let count = k.row(r).iter().filter(|z| is_nonzero(z, tol)).count();
            if count > 1 {
                return Some(KrausViolation {
                    operator: n,
                    axis: Axis::Row,
                    index: r,
                    count,
                });
            }
        }
    }
    None
}

/// Every Kraus operator has at most one entry above `tol` per column.
pub fn is_incoherent_kraus(channel: &KrausChannel, tol: f64) -> PatternCheck {
    PatternCheck::from_violation(column_violation(channel.ops(), tol))
}

/// At most one entry above `tol` per column and per row.
pub fn is_sio(channel: &KrausChannel, tol: f64) -> PatternCheck {
    PatternCheck::from_violation(
        column_violation(channel.ops(), tol).or_else(|| row_violation(channel.ops(), tol)),
    )
}

/// Every Kraus operator is supported on a single row, i.e. K = |i⟩⟨φ|.
pub fn is_scbc(channel: &KrausChannel, tol: f64) -> PatternCheck {
    for (n, k) in channel.ops().iter().enumerate() {
        let rows: Vec<usize> = (0..k.nrows())
            .filter(|&r| k.row(r).iter().any(|z| is_nonzero(z, tol)))
            .collect();
        if rows.len() > 1 {
            return PatternCheck::from_violation(Some(KrausViolation {
                operator: n,
                axis: Axis::Row,
                index: rows[1],
                count: rows.len(),
            }));
        }
    }
    PatternCheck::from_violation(None)
}

fn unit_scan<F: Fn(usize, usize, &CMatrix) -> f64>(channel: &KrausChannel, tol: f64, residual_of: F) -> UnitCheck {
    let d = channel.dim();
    let images = channel.matrix_unit_images();
    let mut worst = UnitCheck {
        holds: true,
        unit: (0, 0),
        residual: 0.0,
    };
    for i in 0..d {
        for j in 0..d {
            let r = residual_of(i, j, &images[i * d + j]);
            if r > worst.residual {
                worst.unit = (i, j);
                worst.residual = r;
            }
        }
    }
    worst.holds = worst.residual <= tol;
    worst
}

/// Φ(|i⟩⟨j|) is diagonal for every matrix unit.
pub fn is_cbc(channel: &KrausChannel, tol: f64) -> UnitCheck {
    unit_scan(channel, tol, |_, _, image| max_offdiag_abs(image))
}

/// Δ∘Φ = Φ∘Δ, checked on matrix units.
pub fn is_dio(channel: &KrausChannel, tol: f64) -> UnitCheck {
    unit_scan(channel, tol, |i, j, image| {
        let lhs = dephase_matrix(image);
        if i == j {
            max_abs(&(lhs - image))
        } else {
            max_abs(&lhs)
        }
    })
}

/// Rows x and y of M vanish and the shift is along z.
pub fn is_cbc_affine(rep: &QubitAffine, tol: f64) -> bool {
    let m = rep.m();
    let n = rep.shift();
    m[0].iter().chain(m[1].iter()).all(|x| x.abs() <= tol) && n[0].abs() <= tol && n[1].abs() <= tol
}

/// Images of a Hermitian basis pairwise commute. The commutator threshold is
/// 2·d·tol since ‖[A,B]‖ grows with the norms of the operands.
pub fn is_qc(channel: &KrausChannel, tol: f64) -> CommutatorCheck {
    let d = channel.dim();
    let threshold = 2.0 * d as f64 * tol;
    let basis = linalg::generalized_gell_mann(d).expect("dimension of a valid channel is >= 1");
    let mut images = vec![channel.apply_unchecked(&linalg::identity(d))];
    images.extend(basis.generators().iter().map(|g| channel.apply_unchecked(g)));
    let mut max_commutator: f64 = 0.0;
    for a in 0..images.len() {
        for b in (a + 1)..images.len() {
            max_commutator = max_commutator.max(max_abs(&linalg::commutator(&images[a], &images[b])));
        }
    }
    CommutatorCheck {
        holds: max_commutator <= threshold,
        max_commutator,
        threshold,
    }
}

/// Positive-partial-transpose test on the Choi matrix. Decisive for qubits;
/// for d ≥ 3 a PPT Choi matrix gives `Inconclusive`.
pub fn is_entanglement_breaking(channel: &KrausChannel, tol: f64) -> PptCheck {
    let d = channel.dim();
    let choi = channel.choi();
    let pt = partial_transpose(choi.matrix(), d).expect("Choi matrix is d²×d²");
    let min_eigenvalue = eigh_unchecked(&pt).min_eigenvalue();
    let verdict = if min_eigenvalue < -tol {
        Verdict::No
    } else if d <= 2 {
        Verdict::Yes
    } else {
        Verdict::Inconclusive
    };
    PptCheck {
        verdict,
        min_eigenvalue,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decomposition {
    Given,
    Canonical,
}

/// Result of a Kraus-pattern test, recording which decomposition decided it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternEvidence {
    pub decomposition: Decomposition,
    pub violation: Option<KrausViolation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub incoherent: Verdict,
    pub sio: Verdict,
    pub dio: Verdict,
    pub scbc: Verdict,
    pub cbc: Verdict,
    pub qc: Verdict,
    pub entanglement_breaking: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub incoherent: PatternEvidence,
    pub sio: PatternEvidence,
    pub scbc: PatternEvidence,
    pub cbc: UnitCheck,
    pub dio: UnitCheck,
    pub qc: CommutatorCheck,
    pub entanglement_breaking: PptCheck,
    pub kraus_count: usize,
    pub canonical_kraus_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub dim: usize,
    pub tolerance: f64,
    pub verdicts: Verdicts,
    pub evidence: Evidence,
}

impl ClassificationReport {
    /// CBC ⟹ QC, CBC ⟹ EB ≠ no, and SCBC agrees with CBC.
    pub fn check_consistency(&self) -> Result<()> {
        let v = &self.verdicts;
        if v.cbc == Verdict::Yes && v.qc != Verdict::Yes {
            return Err(Error::InconsistentVerdicts(format!(
                "cbc=yes but qc={} (max commutator {:.3e})",
                v.qc, self.evidence.qc.max_commutator
            )));
        }
        if v.cbc == Verdict::Yes && v.entanglement_breaking == Verdict::No {
            return Err(Error::InconsistentVerdicts(format!(
                "cbc=yes but entanglement_breaking=no (min PPT eigenvalue {:.3e})",
                self.evidence.entanglement_breaking.min_eigenvalue
            )));
        }
        if v.scbc != Verdict::Inconclusive && v.cbc != Verdict::Inconclusive && v.scbc != v.cbc {
            return Err(Error::InconsistentVerdicts(format!(
                "scbc={} but cbc={} (matrix-unit residual {:.3e})",
                v.scbc, v.cbc, self.evidence.cbc.residual
            )));
        }
        Ok(())
    }
}

fn pattern_with_retry<F: Fn(&KrausChannel, f64) -> PatternCheck>(
    given: &KrausChannel,
    canonical: &KrausChannel,
    tol: f64,
    test: F,
) -> (Verdict, PatternEvidence) {
    let first = test(given, tol);
    if first.holds {
        return (
            Verdict::Yes,
            PatternEvidence {
                decomposition: Decomposition::Given,
                violation: None,
            },
        );
    }
    let second = test(canonical, tol);
    let verdict = Verdict::from_bool(second.holds);
    let violation = if second.holds { None } else { first.violation };
    let decomposition = if second.holds {
        Decomposition::Canonical
    } else {
        Decomposition::Given
    };
    (verdict, PatternEvidence { decomposition, violation })
}

/// Runs every predicate with a single tolerance. Decomposition-level tests
/// that fail on the given Kraus set are retried on the Choi-extracted set
/// before a `no` is reported.
pub fn classify(channel: &KrausChannel, tol: f64) -> Result<ClassificationReport> {
    let canonical = channel.choi().kraus_with_coupling_threshold(tol);
    let (incoherent, incoherent_ev) = pattern_with_retry(channel, &canonical, tol, is_incoherent_kraus);
    let (sio, sio_ev) = pattern_with_retry(channel, &canonical, tol, is_sio);
    let (scbc, scbc_ev) = pattern_with_retry(channel, &canonical, tol, is_scbc);
    let cbc = is_cbc(channel, tol);
    let dio = is_dio(channel, tol);
    let qc = is_qc(channel, tol);
    let eb = is_entanglement_breaking(channel, tol);
    let report = ClassificationReport {
        dim: channel.dim(),
        tolerance: tol,
        verdicts: Verdicts {
            incoherent,
            sio,
            dio: Verdict::from_bool(dio.holds),
            scbc,
            cbc: Verdict::from_bool(cbc.holds),
            qc: Verdict::from_bool(qc.holds),
            entanglement_breaking: eb.verdict,
        },
        evidence: Evidence {
            incoherent: incoherent_ev,
            sio: sio_ev,
            scbc: scbc_ev,
            cbc,
            dio,
            qc,
            entanglement_breaking: eb,
            kraus_count: channel.len(),
            canonical_kraus_count: canonical.len(),
        },
    };
    report.check_consistency()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{cbc_from_povm, gad_channel, random_channel, random_povm, y_to_x_transfer};
    use crate::linalg::c64;
    use crate::states::rng_from_seed;

    fn hadamard() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_row_slice(2, 2, &[c64(s, 0.0), c64(s, 0.0), c64(s, 0.0), c64(-s, 0.0)])
    }

    fn permutation(d: usize, shift: usize) -> CMatrix {
        let mut p = linalg::zeros(d);
        for j in 0..d {
            p[((j + shift) % d, j)] = c64(1.0, 0.0);
        }
        p
    }

    #[test]
    fn incoherent_kraus_examples() {
        let delta = KrausChannel::dephasing(3).unwrap();
        assert!(is_incoherent_kraus(&delta, DEFAULT_TOL).holds);
        let h = KrausChannel::unitary(hadamard()).unwrap();
        let check = is_incoherent_kraus(&h, DEFAULT_TOL);
        assert!(!check.holds);
        let v = check.violation.unwrap();
        assert_eq!((v.operator, v.axis, v.index, v.count), (0, Axis::Column, 0, 2));
        let mut rng = rng_from_seed(1);
        let ch = cbc_from_povm(&random_povm(&mut rng, 3, 3)).unwrap();
        assert!(is_incoherent_kraus(&ch, DEFAULT_TOL).holds);
    }

    #[test]
    fn sio_examples() {
        let p = KrausChannel::unitary(permutation(4, 1)).unwrap();
        assert!(is_sio(&p, DEFAULT_TOL).holds);
        let one = c64(1.0, 0.0);
        let zero = c64(0.0, 0.0);
        let merge = CMatrix::from_row_slice(2, 2, &[one, one, zero, zero]);
        let check = is_sio(&KrausChannel::from_trusted(2, vec![merge]), DEFAULT_TOL);
        assert!(!check.holds);
        assert_eq!(check.violation.unwrap().axis, Axis::Row);
    }

    #[test]
    fn scbc_examples() {
        assert!(is_scbc(&KrausChannel::dephasing(2).unwrap(), DEFAULT_TOL).holds);
        assert!(!is_scbc(&KrausChannel::identity(2).unwrap(), DEFAULT_TOL).holds);
        let mut rng = rng_from_seed(2);
        for d in 2..=4 {
            let ch = cbc_from_povm(&random_povm(&mut rng, d, d)).unwrap();
            assert!(is_scbc(&ch, DEFAULT_TOL).holds);
        }
    }

    #[test]
    fn cbc_examples() {
        assert!(is_cbc(&KrausChannel::dephasing(3).unwrap(), DEFAULT_TOL).holds);
        let check = is_cbc(&KrausChannel::identity(2).unwrap(), DEFAULT_TOL);
        assert!(!check.holds);
        assert_eq!(check.unit, (0, 1));
        assert_eq!(check.residual, 1.0);
        let rep = QubitAffine::new([[0.0; 3], [0.0; 3], [0.3, -0.2, 0.4]], [0.0, 0.0, 0.1]).unwrap();
        assert!(is_cbc(&rep.to_kraus().unwrap(), DEFAULT_TOL).holds);
    }

    #[test]
    fn cbc_affine_examples() {
        let delta = QubitAffine::new([[0.0; 3], [0.0; 3], [0.0, 0.0, 1.0]], [0.0; 3]).unwrap();
        assert!(is_cbc_affine(&delta, DEFAULT_TOL));
        let gad = QubitAffine::from_kraus(&gad_channel(0.7, 1.0).unwrap()).unwrap();
        assert!(!is_cbc_affine(&gad, DEFAULT_TOL));
        let transfer = y_to_x_transfer(0.5).unwrap();
        assert!(!is_cbc_affine(&transfer, DEFAULT_TOL));
        assert!(is_cbc_affine(&transfer.iterate(2).unwrap(), DEFAULT_TOL));
    }

    #[test]
    fn dio_examples() {
        assert!(is_dio(&KrausChannel::dephasing(3).unwrap(), DEFAULT_TOL).holds);
        assert!(is_dio(&KrausChannel::unitary(permutation(3, 2)).unwrap(), DEFAULT_TOL).holds);
        // K_ij = √p_ij |i⟩⟨j| with columns of p summing to one
        let p = [[0.2, 0.5, 0.1], [0.3, 0.25, 0.6], [0.5, 0.25, 0.3]];
        let mut ops = Vec::new();
        for (i, row) in p.iter().enumerate() {
            for (j, &pij) in row.iter().enumerate() {
                ops.push(linalg::matrix_unit(3, i, j).scale(f64::sqrt(pij)));
            }
        }
        let ch = KrausChannel::new(ops).unwrap();
        assert!(is_dio(&ch, DEFAULT_TOL).holds);
        assert!(is_cbc(&ch, DEFAULT_TOL).holds);
        assert!(!is_dio(&KrausChannel::unitary(hadamard()).unwrap(), DEFAULT_TOL).holds);
    }

    #[test]
    fn qc_examples() {
        let mut rng = rng_from_seed(3);
        let cbc = cbc_from_povm(&random_povm(&mut rng, 3, 3)).unwrap();
        assert!(is_qc(&cbc, DEFAULT_TOL).holds);
        let rotated = KrausChannel::compose(
            &KrausChannel::unitary(hadamard()).unwrap(),
            &KrausChannel::dephasing(2).unwrap(),
        )
        .unwrap();
        assert!(is_qc(&rotated, DEFAULT_TOL).holds);
        assert!(!is_cbc(&rotated, DEFAULT_TOL).holds);
        assert!(!is_qc(&KrausChannel::identity(2).unwrap(), DEFAULT_TOL).holds);
    }

    #[test]
    fn entanglement_breaking_examples() {
        let delta = is_entanglement_breaking(&KrausChannel::dephasing(2).unwrap(), DEFAULT_TOL);
        assert_eq!(delta.verdict, Verdict::Yes);
        let id = is_entanglement_breaking(&KrausChannel::identity(2).unwrap(), DEFAULT_TOL);
        assert_eq!(id.verdict, Verdict::No);
        assert!((id.min_eigenvalue + 0.5).abs() < 1e-12);
        let mut rng = rng_from_seed(4);
        let qutrit = cbc_from_povm(&random_povm(&mut rng, 3, 3)).unwrap();
        assert_ne!(is_entanglement_breaking(&qutrit, DEFAULT_TOL).verdict, Verdict::No);
    }

    #[test]
    fn classify_examples() {
        let report = classify(&KrausChannel::dephasing(2).unwrap(), DEFAULT_TOL).unwrap();
        let all_yes = Verdicts {
            incoherent: Verdict::Yes,
            sio: Verdict::Yes,
            dio: Verdict::Yes,
            scbc: Verdict::Yes,
            cbc: Verdict::Yes,
            qc: Verdict::Yes,
            entanglement_breaking: Verdict::Yes,
        };
        assert_eq!(report.verdicts, all_yes);

        // the identity is a (strictly) incoherent, dephasing-covariant unitary
        // but belongs to none of the breaking classes
        let v = classify(&KrausChannel::identity(2).unwrap(), DEFAULT_TOL).unwrap().verdicts;
        assert_eq!((v.incoherent, v.sio, v.dio), (Verdict::Yes, Verdict::Yes, Verdict::Yes));
        assert_eq!((v.scbc, v.cbc, v.qc, v.entanglement_breaking), (Verdict::No, Verdict::No, Verdict::No, Verdict::No));

        let v = classify(&gad_channel(0.7, 1.0).unwrap(), DEFAULT_TOL).unwrap().verdicts;
        assert_eq!((v.incoherent, v.cbc, v.qc), (Verdict::Yes, Verdict::No, Verdict::No));
    }

    #[test]
    fn classify_retries_with_canonical_kraus() {
        // Δ written in the Hadamard-rotated Kraus decomposition {(I ± Z)/2 mixed}
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p0 = linalg::matrix_unit(2, 0, 0);
        let p1 = linalg::matrix_unit(2, 1, 1);
        let ops = vec![(&p0 + &p1).scale(s), (&p0 - &p1).scale(s)];
        let ch = KrausChannel::new(ops).unwrap();
        assert!(!is_scbc(&ch, DEFAULT_TOL).holds);
        let report = classify(&ch, DEFAULT_TOL).unwrap();
        assert_eq!(report.verdicts.scbc, Verdict::Yes);
        assert_eq!(report.evidence.scbc.decomposition, Decomposition::Canonical);
    }

    #[test]
    fn report_serializes_lowercase_verdicts() {
        let report = classify(&KrausChannel::dephasing(2).unwrap(), DEFAULT_TOL).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"cbc\":\"yes\""));
        let back: ClassificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn random_channels_classify_consistently() {
        let mut rng = rng_from_seed(5);
        for d in 2..=3 {
            for _ in 0..20 {
                let ch = random_channel(&mut rng, d, 2);
                let report = classify(&ch, DEFAULT_TOL).unwrap();
                assert_eq!(report.verdicts.cbc, Verdict::No);
            }
        }
    }
}
