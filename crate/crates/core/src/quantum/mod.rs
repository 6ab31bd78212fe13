//! Finite-dimensional quantum states, effects and channels over labelled tensor factors.
//!
//! Composite indices are big-endian: the leftmost factor is the most significant digit.

mod basis;
mod channel;
mod linalg;
pub mod random;

use nalgebra::DMatrix;
use num::complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use basis::{hermitian_basis, matrix_unit, shift_clock};
pub use channel::{
    channel_from_choi, choi_distance, choi_from_map, choi_transform, hs_adjoint, kraus_from_choi, stinespring, trace_distance,
    unitary_choi_distance, validate_channel, Channel, ChannelValidation, Dilation, HeisenbergMap,
};
pub use linalg::{
    c, commutator_norm, complete_isometry, eigh, embed, hermitian_part, identity, is_hermitian, kron, max_abs, orthonormalize,
    partial_trace, permute, positive_projector, psd_ok, sqrt_psd, trace, trace_norm,
};

pub type CMatrix = DMatrix<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_REL_TOL: f64 = 1e-9;
pub const EQ_TOL: f64 = 1e-10;
pub const KRAUS_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown factor label `{0}`")]
    UnknownFactor(String),
    #[error("factor label `{0}` appears more than once")]
    DuplicateFactor(String),
    #[error("factor `{0}` has dimension zero")]
    ZeroDimension(String),
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (minimum eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("operator exceeds the identity (maximum eigenvalue {0})")]
    NotAnEffect(f64),
    #[error("operator is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("channel is not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),
    #[error("channel increases trace (largest eigenvalue of the Kraus sum {0})")]
    TraceIncreasing(f64),
    #[error("channel has no Kraus operators")]
    NoKraus,
}

/// One labelled tensor factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// An ordered list of labelled factors.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TensorSpace {
    factors: Vec<Factor>,
}

impl TensorSpace {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self, QuantumError> {
        let factors: Vec<Factor> = factors.into_iter().map(|(l, d)| Factor { label: l.into(), dim: d }).collect();
        for (i, f) in factors.iter().enumerate() {
            if f.dim == 0 {
                return Err(QuantumError::ZeroDimension(f.label.clone()));
            }
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(QuantumError::DuplicateFactor(f.label.clone()));
            }
        }
        Ok(Self { factors })
    }

    pub fn single(label: &str, dim: usize) -> Self {
        Self::new([(label, dim)]).expect("one factor is always valid")
    }

    /// Qubit factors with the given labels.
    pub fn qubits(labels: &[&str]) -> Self {
        Self::new(labels.iter().map(|l| (*l, 2))).expect("distinct labels")
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn labels(&self) -> Vec<&str> {
        self.factors.iter().map(|f| f.label.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn position(&self, label: &str) -> Result<usize, QuantumError> {
        self.factors.iter().position(|f| f.label == label).ok_or_else(|| QuantumError::UnknownFactor(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.factors.iter().any(|f| f.label == label)
    }

    pub fn dim_of(&self, label: &str) -> Result<usize, QuantumError> {
        Ok(self.factors[self.position(label)?].dim)
    }

    /// The factors with the given labels, in the listed order.
    pub fn select(&self, labels: &[&str]) -> Result<TensorSpace, QuantumError> {
        let fs = labels.iter().map(|l| Ok(self.factors[self.position(l)?].clone())).collect::<Result<Vec<_>, QuantumError>>()?;
        TensorSpace::new(fs.into_iter().map(|f| (f.label, f.dim)))
    }

    /// The factors with the given labels, in this space's order.
    pub fn restrict(&self, labels: &[&str]) -> Result<TensorSpace, QuantumError> {
        for l in labels {
            self.position(l)?;
        }
        Ok(Self { factors: self.factors.iter().filter(|f| labels.contains(&f.label.as_str())).cloned().collect() })
    }

    /// Labels not in `labels`, in this space's order.
    pub fn complement(&self, labels: &[&str]) -> Vec<&str> {
        self.factors.iter().map(|f| f.label.as_str()).filter(|l| !labels.contains(l)).collect()
    }

    pub fn concat(&self, other: &TensorSpace) -> Result<TensorSpace, QuantumError> {
        TensorSpace::new(self.factors.iter().chain(other.factors.iter()).map(|f| (f.label.clone(), f.dim)))
    }

    /// Big-endian digits of a composite index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(self.factors.iter()).rev() {
            *slot = index % f.dim;
            index /= f.dim;
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(self.factors.iter()).fold(0, |acc, (d, f)| acc * f.dim + d)
    }
}

impl std::fmt::Display for TensorSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|x| format!("{}:{}", x.label, x.dim)).collect();
        write!(f, "({})", parts.join(", "))
    }
}

fn check_square(m: &CMatrix, dim: usize) -> Result<(), QuantumError> {
    if m.nrows() != dim {
        return Err(QuantumError::DimensionMismatch { expected: dim, found: m.nrows() });
    }
    if m.ncols() != dim {
        return Err(QuantumError::DimensionMismatch { expected: dim, found: m.ncols() });
    }
    Ok(())
}

/// A density operator on a tensor space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityOp {
    space: TensorSpace,
    #[serde(with = "serde_cmatrix")]
    mat: CMatrix,
}

impl DensityOp {
    pub fn new(space: TensorSpace, mat: CMatrix) -> Result<Self, QuantumError> {
        check_square(&mat, space.dim())?;
        let herm = max_abs(&(&mat - mat.adjoint()));
        if herm > HERMITIAN_TOL {
            return Err(QuantumError::NotHermitian(herm));
        }
        let mat = hermitian_part(&mat);
        let tr = trace(&mat).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(QuantumError::BadTrace(tr));
        }
        let (vals, _) = eigh(&mat);
        if !psd_ok(&vals) {
            return Err(QuantumError::NotPsd(vals[0]));
        }
        Ok(Self { space, mat })
    }

    /// Accepts a matrix produced by a trusted computation, repairing rounding in the trace.
    pub fn normalized(space: TensorSpace, mat: CMatrix) -> Result<Self, QuantumError> {
        let tr = trace(&mat).re;
        if tr.abs() < 1e-300 {
            return Err(QuantumError::BadTrace(tr));
        }
        Self::new(space, hermitian_part(&mat).unscale(tr))
    }

    pub fn pure(space: TensorSpace, psi: &[Complex64]) -> Result<Self, QuantumError> {
        let v = nalgebra::DVector::from_column_slice(psi);
        let norm = v.norm();
        let v = v.unscale(norm);
        Self::new(space, &v * v.adjoint())
    }

    /// The basis state with the given big-endian digits.
    pub fn basis(space: TensorSpace, digits: &[usize]) -> Result<Self, QuantumError> {
        let mut psi = vec![c(0.0, 0.0); space.dim()];
        psi[space.index(digits)] = c(1.0, 0.0);
        Self::pure(space, &psi)
    }

    pub fn maximally_mixed(space: TensorSpace) -> Self {
        let d = space.dim();
        let mat = identity(d).unscale(d as f64);
        Self { space, mat }
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> CMatrix {
        self.mat
    }

    pub fn tensor(&self, other: &DensityOp) -> Result<DensityOp, QuantumError> {
        Ok(DensityOp { space: self.space.concat(&other.space)?, mat: kron(&self.mat, &other.mat) })
    }

    pub fn reduced(&self, keep: &[&str]) -> Result<DensityOp, QuantumError> {
        let space = self.space.restrict(keep)?;
        let mat = partial_trace(&self.mat, &self.space, keep)?;
        Ok(DensityOp { space, mat })
    }

    /// `Tr(ρ a)`.
    pub fn expect(&self, a: &CMatrix) -> Complex64 {
        (&self.mat * a).trace()
    }
}

/// An operator `0 ≤ E ≤ 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Effect {
    space: TensorSpace,
    #[serde(with = "serde_cmatrix")]
    mat: CMatrix,
}

impl Effect {
    pub fn new(space: TensorSpace, mat: CMatrix) -> Result<Self, QuantumError> {
        check_square(&mat, space.dim())?;
        let herm = max_abs(&(&mat - mat.adjoint()));
        if herm > HERMITIAN_TOL.max(EQ_TOL) {
            return Err(QuantumError::NotHermitian(herm));
        }
        let mat = hermitian_part(&mat);
        let (vals, _) = eigh(&mat);
        if !psd_ok(&vals) {
            return Err(QuantumError::NotPsd(vals[0]));
        }
        let top = vals.last().copied().unwrap_or(0.0);
        if top > 1.0 + PSD_REL_TOL {
            return Err(QuantumError::NotAnEffect(top));
        }
        Ok(Self { space, mat })
    }

    pub fn identity(space: TensorSpace) -> Self {
        let mat = identity(space.dim());
        Self { space, mat }
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn complement(&self) -> Effect {
        Effect { space: self.space.clone(), mat: identity(self.space.dim()) - &self.mat }
    }

    pub fn is_identity(&self) -> bool {
        max_abs(&(&self.mat - identity(self.space.dim()))) <= EQ_TOL
    }
}

/// A unitary operator on a tensor space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnitaryOp {
    space: TensorSpace,
    #[serde(with = "serde_cmatrix")]
    mat: CMatrix,
}

impl UnitaryOp {
    pub fn new(space: TensorSpace, mat: CMatrix) -> Result<Self, QuantumError> {
        check_square(&mat, space.dim())?;
        let dev = max_abs(&(mat.adjoint() * &mat - identity(space.dim())));
        if dev > EQ_TOL {
            return Err(QuantumError::NotUnitary(dev));
        }
        Ok(Self { space, mat })
    }

    pub fn identity(space: TensorSpace) -> Self {
        let mat = identity(space.dim());
        Self { space, mat }
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn adjoint(&self) -> UnitaryOp {
        UnitaryOp { space: self.space.clone(), mat: self.mat.adjoint() }
    }

    /// `self · other` on a shared space.
    pub fn then_after(&self, other: &UnitaryOp) -> Result<UnitaryOp, QuantumError> {
        if self.space != other.space {
            return Err(QuantumError::DimensionMismatch { expected: self.space.dim(), found: other.space.dim() });
        }
        Ok(UnitaryOp { space: self.space.clone(), mat: &self.mat * &other.mat })
    }

    /// The same operator acting on `labels` of a larger space, identity elsewhere.
    pub fn embedded(&self, space: &TensorSpace) -> Result<UnitaryOp, QuantumError> {
        let labels = self.space.labels();
        Ok(UnitaryOp { space: space.clone(), mat: embed(&self.mat, &labels, space)? })
    }

    pub fn tensor(&self, other: &UnitaryOp) -> Result<UnitaryOp, QuantumError> {
        Ok(UnitaryOp { space: self.space.concat(&other.space)?, mat: kron(&self.mat, &other.mat) })
    }
}

/// Complex matrices as nested arrays of `[re, im]` pairs.
pub mod serde_cmatrix {
    use super::CMatrix;
    use num::complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
    }

    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix, String> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if let Some(i) = rows.iter().position(|r| r.len() != m) {
            return Err(format!("row {i} has {} entries, expected {m}", rows[i].len()));
        }
        for (i, r) in rows.iter().enumerate() {
            for (j, e) in r.iter().enumerate() {
                if !e[0].is_finite() || !e[1].is_finite() {
                    return Err(format!("entry ({i}, {j}) is not finite"));
                }
            }
        }
        Ok(CMatrix::from_fn(n, m, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
    }

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
