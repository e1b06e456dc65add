//! Channel representations (Kraus, Choi, qubit affine) and conversions.
//!
//! Choi convention: ρ_Φ = (Φ ⊗ id)(|β⟩⟨β|) with |β⟩ = d^{-1/2} Σ_i |ii⟩. The
//! output factor comes first, so entry ((a,i),(b,j)) sits at row a·d + i,
//! column b·d + j and equals ⟨a|Φ(|i⟩⟨j|)|b⟩ / d.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    self, c64, eigh_unchecked, hermitian_eigendecomposition, max_abs, CMatrix, TOL_HERM, TOL_PSD,
};
use crate::states::{bloch_operator, CVector, DensityMatrix};

/// Completeness tolerance on Σ K†K − I (max-abs entry).
pub const TOL_CPTP: f64 = 1e-9;
/// Choi eigenvalues below this are dropped when extracting Kraus operators.
pub const RANK_CUTOFF: f64 = 1e-10;
/// Choi entries at or below this magnitude do not couple basis indices when
/// splitting the Choi matrix into independent blocks.
const BLOCK_CUTOFF: f64 = 1e-12;

/// Ordered, nonempty list of d×d Kraus operators with Σ K†K = I.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::format("kraus", "empty Kraus list"))?;
        let dim = first.nrows();
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        for k in &ops {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: if k.nrows() != dim { k.nrows() } else { k.ncols() },
                });
            }
        }
        let channel = Self { dim, ops };
        let residual = channel.completeness_residual();
        if residual.is_nan() || residual > TOL_CPTP {
            return Err(Error::NotTracePreserving(residual));
        }
        Ok(channel)
    }

    pub(crate) fn from_trusted(dim: usize, ops: Vec<CMatrix>) -> Self {
        Self { dim, ops }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// max |Σ K†K − I|
    pub fn completeness_residual(&self) -> f64 {
        let mut sum = linalg::zeros(self.dim);
        for k in &self.ops {
            sum += k.adjoint() * k;
        }
        max_abs(&(sum - linalg::identity(self.dim)))
    }

    pub fn identity(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Self::from_trusted(d, vec![linalg::identity(d)]))
    }

    /// Complete dephasing Δ with Kraus operators |i⟩⟨i|.
    pub fn dephasing(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Self::from_trusted(
            d,
            (0..d).map(|i| linalg::matrix_unit(d, i, i)).collect(),
        ))
    }

    /// ρ ↦ qρ + (1−q)Δ(ρ)
    pub fn partial_dephasing(d: usize, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::out_of_range("q", q, "0 <= q <= 1"));
        }
        let mut ops = vec![linalg::identity(d).scale(q.sqrt())];
        ops.extend((0..d).map(|i| linalg::matrix_unit(d, i, i).scale((1.0 - q).sqrt())));
        Self::new(ops)
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// Σ K ρ K†
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_dim(rho.dim())?;
        Ok(DensityMatrix::from_trusted(self.apply_unchecked(rho.matrix())))
    }

    /// Linear extension of the channel to an arbitrary d×d operator.
    pub fn apply_operator(&self, a: &CMatrix) -> Result<CMatrix> {
        self.check_dim(a.nrows())?;
        self.check_dim(a.ncols())?;
        Ok(self.apply_unchecked(a))
    }

    pub(crate) fn apply_unchecked(&self, a: &CMatrix) -> CMatrix {
        let mut out = linalg::zeros(self.dim);
        for k in &self.ops {
            out += k * a * k.adjoint();
        }
        out
    }

    /// Φ(|ψ⟩⟨ψ|) as Σ (Kψ)(Kψ)†.
    pub fn apply_pure(&self, psi: &CVector) -> Result<CMatrix> {
        self.check_dim(psi.len())?;
        let mut out = linalg::zeros(self.dim);
        for k in &self.ops {
            let v = k * psi;
            out += &v * v.adjoint();
        }
        Ok(out)
    }

    /// Φ(|i⟩⟨j|) for all matrix units, indexed i·d + j.
    pub fn matrix_unit_images(&self) -> Vec<CMatrix> {
        let d = self.dim;
        let mut images = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut out = linalg::zeros(d);
                for k in &self.ops {
                    let col_i = k.column(i);
                    let col_j = k.column(j);
                    out += col_i * col_j.adjoint();
                }
                images.push(out);
            }
        }
        images
    }

    /// outer ∘ inner, with every product K_outer·K_inner as a Kraus operator.
    pub fn compose(outer: &KrausChannel, inner: &KrausChannel) -> Result<KrausChannel> {
        if outer.dim != inner.dim {
            return Err(Error::DimensionMismatch {
                expected: outer.dim,
                actual: inner.dim,
            });
        }
        let ops = outer
            .ops
            .iter()
            .flat_map(|a| inner.ops.iter().map(move |b| a * b))
            .collect();
        Ok(Self::from_trusted(outer.dim, ops))
    }

    /// n-fold composition. Powers carrying more than d² operators are
    /// re-extracted from their Choi matrix.
    pub fn iterate(&self, n: usize) -> Result<KrausChannel> {
        if n == 0 {
            return Err(Error::out_of_range("n", 0.0, "n >= 1"));
        }
        let mut power = self.clone();
        for _ in 1..n {
            power = Self::compose(self, &power)?.pruned();
        }
        Ok(power)
    }

    /// Canonical form when the operator count exceeds d², otherwise unchanged.
    pub fn pruned(self) -> KrausChannel {
        if self.ops.len() > self.dim * self.dim {
            self.canonical()
        } else {
            self
        }
    }

    /// Kraus set re-extracted from the Choi matrix (at most d² operators).
    pub fn canonical(&self) -> KrausChannel {
        self.choi().kraus_unchecked()
    }

    pub fn choi(&self) -> ChoiMatrix {
        kraus_to_choi(self)
    }

    /// Φ ⊗ Ψ on the joint space, first factor most significant.
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let ops = self
            .ops
            .iter()
            .flat_map(|a| other.ops.iter().map(move |b| linalg::kron(a, b)))
            .collect();
        Self::from_trusted(self.dim * other.dim, ops)
    }

    /// Φ^{⊗n}
    pub fn tensor_power(&self, n: usize) -> Result<KrausChannel> {
        if n == 0 {
            return Err(Error::out_of_range("n", 0.0, "n >= 1"));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self);
        }
        Ok(out)
    }

    fn check_dim(&self, actual: usize) -> Result<()> {
        if actual != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual,
            });
        }
        Ok(())
    }
}

/// d²×d² Choi matrix of a channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: CMatrix,
}

impl ChoiMatrix {
    /// Validates positivity and Tr_out ρ_Φ = I/d.
    pub fn new(matrix: CMatrix, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension(d));
        }
        if matrix.nrows() != d * d || matrix.ncols() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                actual: matrix.nrows().max(matrix.ncols()),
            });
        }
        let eig = hermitian_eigendecomposition(&matrix)?;
        if eig.min_eigenvalue() < TOL_PSD {
            return Err(Error::NotPsd(eig.min_eigenvalue()));
        }
        let choi = Self { dim: d, matrix };
        let reduced = choi.partial_trace_output();
        let residual = max_abs(&(reduced - linalg::identity(d).unscale(d as f64)));
        if residual > TOL_CPTP {
            return Err(Error::NotTracePreserving(residual));
        }
        Ok(choi)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Builds the Choi matrix of the linear map `f` from its action on matrix units.
    pub(crate) fn from_linear_map<F: Fn(&CMatrix) -> CMatrix>(d: usize, f: F) -> Self {
        let mut matrix = CMatrix::zeros(d * d, d * d);
        let scale = 1.0 / d as f64;
        for i in 0..d {
            for j in 0..d {
                let image = f(&linalg::matrix_unit(d, i, j));
                for a in 0..d {
                    for b in 0..d {
                        matrix[(a * d + i, b * d + j)] = image[(a, b)] * scale;
                    }
                }
            }
        }
        Self { dim: d, matrix }
    }

    /// Trace over the output factor; I/d for a trace-preserving map.
    pub fn partial_trace_output(&self) -> CMatrix {
        let d = self.dim;
        let mut out = linalg::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = c64(0.0, 0.0);
                for a in 0..d {
                    acc += self.matrix[(a * d + i, a * d + j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// Kraus operators √(dλ)·reshape(v) from eigenpairs of the Choi matrix.
    ///
    /// The matrix is first split into blocks of basis indices coupled by
    /// nonzero entries; each block is diagonalized on its own, so the
    /// sparsity pattern of the channel survives in the extracted operators
    /// even when eigenvalues are degenerate across blocks.
    pub(crate) fn kraus_unchecked(&self) -> KrausChannel {
        self.kraus_with_coupling_threshold(BLOCK_CUTOFF * max_abs(&self.matrix).max(1.0))
    }

    /// As [`Self::kraus_unchecked`], treating entries of magnitude at most
    /// `cutoff` as non-coupling.
    pub(crate) fn kraus_with_coupling_threshold(&self, cutoff: f64) -> KrausChannel {
        let d = self.dim;
        let n = d * d;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for u in 0..n {
            for v in (u + 1)..n {
                if self.matrix[(u, v)].norm() > cutoff || self.matrix[(v, u)].norm() > cutoff {
                    let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                    if ru != rv {
                        parent[ru.max(rv)] = ru.min(rv);
                    }
                }
            }
        }
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut block_of_root = vec![usize::MAX; n];
        for u in 0..n {
            let r = find(&mut parent, u);
            if block_of_root[r] == usize::MAX {
                block_of_root[r] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[block_of_root[r]].push(u);
        }

        let mut ops = Vec::new();
        for block in &blocks {
            let m = block.len();
            let sub = CMatrix::from_fn(m, m, |r, c| self.matrix[(block[r], block[c])]);
            let eig = eigh_unchecked(&sub);
            for k in (0..m).rev() {
                let lambda = eig.eigenvalues[k];
                if lambda <= RANK_CUTOFF {
                    continue;
                }
                let amp = (d as f64 * lambda).sqrt();
                let mut op = linalg::zeros(d);
                for (r, &idx) in block.iter().enumerate() {
                    op[(idx / d, idx % d)] = eig.eigenvectors[(r, k)] * amp;
                }
                ops.push(canonical_phase(op));
            }
        }
        if ops.is_empty() {
            ops.push(linalg::zeros(d));
        }
        KrausChannel::from_trusted(d, ops)
    }
}

/// Multiplies by a phase so the largest-magnitude entry is real positive.
fn canonical_phase(mut op: CMatrix) -> CMatrix {
    let mut best = c64(0.0, 0.0);
    for z in op.iter() {
        if z.norm() > best.norm() + 1e-12 {
            best = *z;
        }
    }
    if best.norm() > 0.0 {
        let phase = best.conj() / best.norm();
        op.iter_mut().for_each(|z| *z *= phase);
    }
    op
}

pub fn kraus_to_choi(channel: &KrausChannel) -> ChoiMatrix {
    let d = channel.dim;
    let mut matrix = CMatrix::zeros(d * d, d * d);
    for k in &channel.ops {
        let v = CVector::from_iterator(d * d, (0..d * d).map(|idx| k[(idx / d, idx % d)]));
        matrix += &v * v.adjoint();
    }
    ChoiMatrix {
        dim: d,
        matrix: matrix.unscale(d as f64),
    }
}

/// Validated Choi → Kraus conversion.
pub fn choi_to_kraus(choi: &ChoiMatrix) -> Result<KrausChannel> {
    let checked = ChoiMatrix::new(choi.matrix.clone(), choi.dim)?;
    let kraus = checked.kraus_unchecked();
    let residual = kraus.completeness_residual();
    if residual > TOL_CPTP {
        return Err(Error::NotTracePreserving(residual));
    }
    Ok(kraus)
}

pub fn pauli(k: usize) -> CMatrix {
    let z = c64(0.0, 0.0);
    let one = c64(1.0, 0.0);
    match k {
        0 => linalg::identity(2),
        1 => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        2 => CMatrix::from_row_slice(2, 2, &[z, c64(0.0, -1.0), c64(0.0, 1.0), z]),
        3 => CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        _ => panic!("pauli index {k} out of range"),
    }
}

/// Qubit channel acting on Bloch vectors as r ↦ M r + n.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitAffine {
    m: Matrix3<f64>,
    shift: Vector3<f64>,
}

impl QubitAffine {
    /// Checks that the unit ball is mapped into itself (sampled on the sphere,
    /// where the image ellipsoid attains its extremes).
    pub fn new(m: [[f64; 3]; 3], shift: [f64; 3]) -> Result<Self> {
        let rep = Self::from_parts(m, shift);
        let worst = rep.max_image_norm(2000);
        if worst.is_nan() || worst > 1.0 + 1e-9 {
            return Err(Error::BlochOutOfBall(worst));
        }
        Ok(rep)
    }

    pub(crate) fn from_parts(m: [[f64; 3]; 3], shift: [f64; 3]) -> Self {
        Self {
            m: Matrix3::from_fn(|r, c| m[r][c]),
            shift: Vector3::from_column_slice(&shift),
        }
    }

    pub fn m(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = self.m[(r, c)];
            }
        }
        out
    }

    pub fn shift(&self) -> [f64; 3] {
        [self.shift[0], self.shift[1], self.shift[2]]
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn shift_vector(&self) -> &Vector3<f64> {
        &self.shift
    }

    /// M_jk = ½Tr[σ_j Φ(σ_k)], n_j = ½Tr[σ_j Φ(I)].
    pub fn from_kraus(channel: &KrausChannel) -> Result<Self> {
        if channel.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: channel.dim(),
            });
        }
        let image_of_identity = channel.apply_unchecked(&pauli(0));
        let mut m = [[0.0; 3]; 3];
        let mut shift = [0.0; 3];
        for k in 1..=3 {
            let image = channel.apply_unchecked(&pauli(k));
            for j in 1..=3 {
                m[j - 1][k - 1] = 0.5 * linalg::trace(&(pauli(j) * &image)).re;
            }
        }
        for (j, n) in shift.iter_mut().enumerate() {
            *n = 0.5 * linalg::trace(&(pauli(j + 1) * &image_of_identity)).re;
        }
        Ok(Self::from_parts(m, shift))
    }

    pub fn apply_bloch(&self, r: [f64; 3]) -> [f64; 3] {
        let out = self.m * Vector3::from_column_slice(&r) + self.shift;
        [out[0], out[1], out[2]]
    }

    /// Action on an arbitrary 2×2 operator A = (a₀I + a·σ)/2 by linearity.
    pub fn apply_operator(&self, a: &CMatrix) -> CMatrix {
        let a0 = linalg::trace(a);
        let coords: Vec<Complex64> = (1..=3).map(|k| linalg::trace(&(a * pauli(k)))).collect();
        let mut out = pauli(0) * a0;
        for j in 0..3 {
            let mut cj = a0 * self.shift[j];
            for (k, ak) in coords.iter().enumerate() {
                cj += ak * self.m[(j, k)];
            }
            out += pauli(j + 1) * cj;
        }
        out.scale(0.5)
    }

    /// (Mⁿ, Σ_{k<n} Mᵏ n̄)
    pub fn iterate(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::out_of_range("n", 0.0, "n >= 1"));
        }
        let mut power = Matrix3::identity();
        let mut shift_sum = Vector3::zeros();
        for _ in 0..n {
            shift_sum += power * self.shift;
            power *= self.m;
        }
        Ok(Self {
            m: power,
            shift: shift_sum,
        })
    }

    pub fn choi(&self) -> ChoiMatrix {
        ChoiMatrix::from_linear_map(2, |a| self.apply_operator(a))
    }

    /// Kraus form via the Choi matrix; fails with `NotPsd` when the affine map
    /// is not completely positive.
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        choi_to_kraus(&self.choi())
    }

    /// Largest |M r + n| over a Fibonacci lattice of `points` unit vectors.
    pub fn max_image_norm(&self, points: usize) -> f64 {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let mut worst = self.shift.norm();
        for k in 0..points {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / points as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            let image = self.apply_bloch([rho * phi.cos(), rho * phi.sin(), z]);
            worst = worst.max(image.iter().map(|x| x * x).sum::<f64>().sqrt());
        }
        worst
    }
}

/// Image of the Bloch vector r as a density-matrix operator.
pub fn affine_image_state(rep: &QubitAffine, r: [f64; 3]) -> CMatrix {
    bloch_operator(rep.apply_bloch(r))
}

/// Generalized amplitude damping D_{p,t}: coherences scale by √p and the
/// populations relax toward (t, 1−t).
pub fn gad_channel(p: f64, t: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::out_of_range("p", p, "0 <= p <= 1"));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::out_of_range("t", t, "0 <= t <= 1"));
    }
    let z = c64(0.0, 0.0);
    let r = |x: f64| c64(x, 0.0);
    let (st, su) = (t.sqrt(), (1.0 - t).sqrt());
    let (sp, sq) = (p.sqrt(), (1.0 - p).sqrt());
    let candidates = [
        CMatrix::from_row_slice(2, 2, &[r(st), z, z, r(st * sp)]),
        CMatrix::from_row_slice(2, 2, &[z, r(st * sq), z, z]),
        CMatrix::from_row_slice(2, 2, &[r(su * sp), z, z, r(su)]),
        CMatrix::from_row_slice(2, 2, &[z, z, r(su * sq), z]),
    ];
    let ops: Vec<CMatrix> = candidates.into_iter().filter(|k| max_abs(k) > 0.0).collect();
    KrausChannel::new(ops)
}

/// Φ(ρ) = Σ_i |i⟩⟨i| Tr(ρF_i) with Kraus operators √λ_ik |i⟩⟨φ_ik|.
pub fn cbc_from_povm(effects: &[CMatrix]) -> Result<KrausChannel> {
    let first = effects
        .first()
        .ok_or_else(|| Error::NotPovm("no effects".into()))?;
    let d = first.nrows();
    if effects.len() > d {
        return Err(Error::NotPovm(format!(
            "{} effects but only {d} output levels",
            effects.len()
        )));
    }
    let mut total = linalg::zeros(d);
    let mut ops = Vec::new();
    for (i, f) in effects.iter().enumerate() {
        if f.nrows() != d || f.ncols() != d {
            return Err(Error::NotPovm(format!("effect {i} has wrong shape")));
        }
        if linalg::max_hermitian_deviation(f) > TOL_HERM {
            return Err(Error::NotPovm(format!("effect {i} is not Hermitian")));
        }
        let eig = eigh_unchecked(f);
        if eig.min_eigenvalue() < TOL_PSD {
            return Err(Error::NotPovm(format!(
                "effect {i} has negative eigenvalue {:.3e}",
                eig.min_eigenvalue()
            )));
        }
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda <= RANK_CUTOFF {
                continue;
            }
            let phi = eig.eigenvectors.column(k);
            let mut op = linalg::zeros(d);
            for c in 0..d {
                op[(i, c)] = phi[c].conj() * lambda.sqrt();
            }
            ops.push(op);
        }
        total += f;
    }
    let residual = max_abs(&(total - linalg::identity(d)));
    if residual > 1e-9 {
        return Err(Error::NotPovm(format!("effects sum to I only within {residual:.3e}")));
    }
    if ops.is_empty() {
        return Err(Error::NotPovm("all effects vanish".into()));
    }
    KrausChannel::new(ops)
}

/// Qubit affine map with M = α·e_x e_yᵀ and n̄ = 0: the y Bloch component is
/// moved to x and everything else is erased. Completely positive for |α| ≤ 1.
pub fn y_to_x_transfer(alpha: f64) -> Result<QubitAffine> {
    if alpha.abs() > 1.0 {
        return Err(Error::out_of_range("alpha", alpha, "|alpha| <= 1"));
    }
    QubitAffine::new([[0.0, alpha, 0.0], [0.0; 3], [0.0; 3]], [0.0; 3])
}

/// M with α at (x, y) and β at (z, x), shift (0, 0, n_z).
pub fn y_to_x_transfer_with_feed(alpha: f64, beta: f64, n_z: f64) -> Result<QubitAffine> {
    let rep = QubitAffine::new([[0.0, alpha, 0.0], [0.0; 3], [beta, 0.0, 0.0]], [0.0, 0.0, n_z])?;
    rep.to_kraus()?;
    Ok(rep)
}

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im)
    })
}

/// A^{-1/2} for a positive definite A.
fn inverse_sqrt(a: &CMatrix) -> CMatrix {
    let eig = eigh_unchecked(a);
    let mut scaled = eig.eigenvectors.clone();
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        let s = 1.0 / lambda.max(1e-300).sqrt();
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= s);
    }
    scaled * eig.eigenvectors.adjoint()
}

/// rows×cols matrix with orthonormal columns drawn from the Haar measure.
fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let g = gaussian_matrix(rng, rows, cols);
    let gram = g.adjoint() * &g;
    g * inverse_sqrt(&gram)
}

/// Random CPTP map with `kraus_count` operators cut from a Haar isometry.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, d: usize, kraus_count: usize) -> KrausChannel {
    let k = kraus_count.max(1);
    let v = random_isometry(rng, d * k, d);
    let ops = (0..k).map(|n| v.rows(n * d, d).into_owned()).collect();
    KrausChannel::from_trusted(d, ops)
}

/// Random POVM with `outcomes` full-rank effects.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, d: usize, outcomes: usize) -> Vec<CMatrix> {
    let raw: Vec<CMatrix> = (0..outcomes.max(1))
        .map(|_| {
            let a = gaussian_matrix(rng, d, d);
            &a * a.adjoint()
        })
        .collect();
    let mut total = linalg::zeros(d);
    for g in &raw {
        total += g;
    }
    let s = inverse_sqrt(&total);
    raw.iter().map(|g| linalg::hermitian_part(&(&s * g * &s))).collect()
}

/// Random incoherent channel. Each branch picks a map f: [d] → [d] and an
/// isometry W, and contributes operators Σ_j W_rj |f(j)⟩⟨j|; every operator
/// thus has at most one nonzero entry per column.
pub fn random_incoherent_channel<R: Rng + ?Sized>(rng: &mut R, d: usize, branches: usize) -> KrausChannel {
    random_patterned_channel(rng, d, branches, false)
}

/// Like [`random_incoherent_channel`] with every f a permutation, so each
/// operator is also row-sparse (strictly incoherent).
pub fn random_strictly_incoherent_channel<R: Rng + ?Sized>(rng: &mut R, d: usize, branches: usize) -> KrausChannel {
    random_patterned_channel(rng, d, branches, true)
}

fn random_patterned_channel<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    branches: usize,
    permutations: bool,
) -> KrausChannel {
    let b = branches.max(1);
    let mut weights: Vec<f64> = (0..b)
        .map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln())
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut ops = Vec::new();
    for w in weights {
        let f: Vec<usize> = if permutations {
            let mut p: Vec<usize> = (0..d).collect();
            p.shuffle(rng);
            p
        } else {
            (0..d).map(|_| rng.random_range(0..d)).collect()
        };
        let rows = rng.random_range(d..=2 * d);
        let iso = random_isometry(rng, rows, d);
        for r in 0..rows {
            let mut op = linalg::zeros(d);
            for j in 0..d {
                op[(f[j], j)] = iso[(r, j)] * w.sqrt();
            }
            ops.push(op);
        }
    }
    KrausChannel::from_trusted(d, ops).pruned_if_large()
}

impl KrausChannel {
    /// Keeps the given decomposition unless it is very long.
    fn pruned_if_large(self) -> Self {
        if self.ops.len() > 4 * self.dim * self.dim {
            self.canonical()
        } else {
            self
        }
    }
}
