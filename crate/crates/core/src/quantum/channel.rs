use nalgebra::DVector;
use num::complex::Complex64;
use serde::{Serialize, Serializer};

use super::{
    c, complete_isometry, eigh, embed, identity, kron, matrix_unit, max_abs, psd_ok, serde_cmatrix, trace_norm, CMatrix,
    DensityOp, QuantumError, TensorSpace, UnitaryOp, EQ_TOL, KRAUS_CUTOFF,
};

fn serialize_kraus<S: Serializer>(ks: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<_> = ks.iter().map(serde_cmatrix::to_rows).collect();
    rows.serialize(s)
}

/// A completely positive, trace-nonincreasing map in Kraus form: `ρ ↦ Σ K ρ K†`.
#[derive(Clone, Debug, Serialize)]
pub struct Channel {
    space_in: TensorSpace,
    space_out: TensorSpace,
    #[serde(serialize_with = "serialize_kraus")]
    kraus: Vec<CMatrix>,
    #[serde(skip)]
    choi: CMatrix,
    nonselective: bool,
}

fn kraus_sum(kraus: &[CMatrix], din: usize) -> CMatrix {
    kraus.iter().fold(CMatrix::zeros(din, din), |acc, k| acc + k.adjoint() * k)
}

impl Channel {
    pub fn new(space_in: TensorSpace, space_out: TensorSpace, kraus: Vec<CMatrix>) -> Result<Self, QuantumError> {
        let (din, dout) = (space_in.dim(), space_out.dim());
        if kraus.is_empty() {
            return Err(QuantumError::NoKraus);
        }
        for k in &kraus {
            if k.ncols() != din {
                return Err(QuantumError::DimensionMismatch { expected: din, found: k.ncols() });
            }
            if k.nrows() != dout {
                return Err(QuantumError::DimensionMismatch { expected: dout, found: k.nrows() });
            }
        }
        let sum = kraus_sum(&kraus, din);
        let top = eigh(&sum).0.last().copied().unwrap_or(0.0);
        if top > 1.0 + EQ_TOL {
            return Err(QuantumError::TraceIncreasing(top));
        }
        let nonselective = max_abs(&(sum - identity(din))) <= EQ_TOL;
        let choi = choi_of_kraus(&kraus, din, dout);
        Ok(Self { space_in, space_out, kraus, choi, nonselective })
    }

    /// Same input and output space.
    pub fn on(space: TensorSpace, kraus: Vec<CMatrix>) -> Result<Self, QuantumError> {
        Self::new(space.clone(), space, kraus)
    }

    pub fn identity(space: TensorSpace) -> Self {
        let d = space.dim();
        Self::on(space, vec![identity(d)]).expect("identity is a channel")
    }

    /// `ρ ↦ u ρ u†`.
    pub fn unitary(u: &UnitaryOp) -> Self {
        Self::on(u.space().clone(), vec![u.mat().clone()]).expect("unitary conjugation is a channel")
    }

    pub fn space_in(&self) -> &TensorSpace {
        &self.space_in
    }

    pub fn space_out(&self) -> &TensorSpace {
        &self.space_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    pub fn is_nonselective(&self) -> bool {
        self.nonselective
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let dout = self.space_out.dim();
        self.kraus.iter().fold(CMatrix::zeros(dout, dout), |acc, k| acc + k * rho * k.adjoint())
    }

    pub fn apply_state(&self, rho: &DensityOp) -> Result<DensityOp, QuantumError> {
        if rho.space().dim() != self.space_in.dim() {
            return Err(QuantumError::DimensionMismatch { expected: self.space_in.dim(), found: rho.space().dim() });
        }
        DensityOp::normalized(self.space_out.clone(), self.apply(rho.mat()))
    }

    /// Heisenberg picture: `a ↦ Σ K† a K`.
    pub fn dual(&self, a: &CMatrix) -> CMatrix {
        let din = self.space_in.dim();
        self.kraus.iter().fold(CMatrix::zeros(din, din), |acc, k| acc + k.adjoint() * a * k)
    }

    /// `after ∘ self`, with the Kraus list compressed through the Choi matrix.
    pub fn then(&self, after: &Channel) -> Result<Channel, QuantumError> {
        if after.space_in.dim() != self.space_out.dim() {
            return Err(QuantumError::DimensionMismatch { expected: self.space_out.dim(), found: after.space_in.dim() });
        }
        let kraus: Vec<CMatrix> = after.kraus.iter().flat_map(|b| self.kraus.iter().map(move |a| b * a)).collect();
        Channel::new(self.space_in.clone(), after.space_out.clone(), kraus)?.compressed()
    }

    /// `self ⊗ other` on the concatenated spaces.
    pub fn tensor(&self, other: &Channel) -> Result<Channel, QuantumError> {
        let kraus = self.kraus.iter().flat_map(|a| other.kraus.iter().map(move |b| kron(a, b))).collect();
        Channel::new(self.space_in.concat(&other.space_in)?, self.space_out.concat(&other.space_out)?, kraus)
    }

    /// This channel acting on its own factors of a larger space, identity on the rest.
    pub fn embedded(&self, space: &TensorSpace) -> Result<Channel, QuantumError> {
        if self.space_in != self.space_out {
            return Err(QuantumError::DimensionMismatch { expected: self.space_in.dim(), found: self.space_out.dim() });
        }
        let labels = self.space_in.labels();
        let kraus = self.kraus.iter().map(|k| embed(k, &labels, space)).collect::<Result<Vec<_>, _>>()?;
        Channel::on(space.clone(), kraus)
    }

    /// Relabel input and output spaces without changing the matrices.
    pub fn relabeled(&self, space_in: TensorSpace, space_out: TensorSpace) -> Result<Channel, QuantumError> {
        if space_in.dim() != self.space_in.dim() || space_out.dim() != self.space_out.dim() {
            return Err(QuantumError::DimensionMismatch { expected: self.space_in.dim(), found: space_in.dim() });
        }
        Ok(Channel { space_in, space_out, ..self.clone() })
    }

    /// Minimal Kraus list read off the Choi matrix.
    pub fn compressed(&self) -> Result<Channel, QuantumError> {
        channel_from_choi(&self.choi, self.space_in.clone(), self.space_out.clone())
    }
}

fn choi_of_kraus(kraus: &[CMatrix], din: usize, dout: usize) -> CMatrix {
    let n = din * dout;
    let mut j = CMatrix::zeros(n, n);
    for k in kraus {
        let v = DVector::from_fn(n, |r, _| k[(r % dout, r / dout)]);
        j += &v * v.adjoint();
    }
    j
}

/// `Σ_ij E_ij ⊗ f(E_ij)`, input factor on the left.
pub fn choi_from_map(din: usize, dout: usize, f: impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
    let mut j = CMatrix::zeros(din * dout, din * dout);
    for a in 0..din {
        for b in 0..din {
            let out = f(&matrix_unit(din, a, b));
            j.view_mut((a * dout, b * dout), (dout, dout)).copy_from(&out);
        }
    }
    j
}

pub fn choi_transform(ch: &Channel) -> CMatrix {
    ch.choi.clone()
}

/// Kraus operators from the spectral decomposition of a Choi matrix; eigenvalues below the cutoff are dropped.
pub fn kraus_from_choi(j: &CMatrix, din: usize, dout: usize) -> Result<Vec<CMatrix>, QuantumError> {
    let n = din * dout;
    if j.nrows() != n || j.ncols() != n {
        return Err(QuantumError::DimensionMismatch { expected: n, found: j.nrows() });
    }
    let herm = max_abs(&(j - j.adjoint()));
    if herm > EQ_TOL * (1.0 + max_abs(j)) {
        return Err(QuantumError::NotHermitian(herm));
    }
    let (vals, vecs) = eigh(j);
    if !psd_ok(&vals) {
        return Err(QuantumError::NotPsd(vals[0]));
    }
    let mut kraus: Vec<CMatrix> = vals
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, l)| **l > KRAUS_CUTOFF)
        .map(|(k, l)| {
            let s = l.sqrt();
            CMatrix::from_fn(dout, din, |o, i| vecs[(i * dout + o, k)] * s)
        })
        .collect();
    if kraus.is_empty() {
        kraus.push(CMatrix::zeros(dout, din));
    }
    Ok(kraus)
}

pub fn channel_from_choi(j: &CMatrix, space_in: TensorSpace, space_out: TensorSpace) -> Result<Channel, QuantumError> {
    let kraus = kraus_from_choi(j, space_in.dim(), space_out.dim())?;
    Channel::new(space_in, space_out, kraus)
}

/// `½‖J₁ − J₂‖₁ / d_in`.
pub fn choi_distance(a: &Channel, b: &Channel) -> Result<f64, QuantumError> {
    if a.space_in.dim() != b.space_in.dim() || a.space_out.dim() != b.space_out.dim() {
        return Err(QuantumError::DimensionMismatch { expected: a.choi.nrows(), found: b.choi.nrows() });
    }
    Ok(0.5 * trace_norm(&(&a.choi - &b.choi)) / a.space_in.dim() as f64)
}

/// Choi distance between the unitary channels `ρ ↦ uρu†` and `ρ ↦ vρv†`.
///
/// Uses the phase-aligned difference `‖u − e^{iθ}v‖` so that nearly equal unitaries keep full precision.
pub fn unitary_choi_distance(u: &CMatrix, v: &CMatrix) -> f64 {
    let d = u.nrows() as f64;
    let z = (u.adjoint() * v).trace();
    let phase = if z.norm() > 0.0 { z.conj() / z.norm() } else { c(1.0, 0.0) };
    let delta = (u - v * phase).norm() / d.sqrt();
    (delta * (1.0 - delta * delta / 4.0).max(0.0).sqrt()).min(1.0)
}

/// `½ Σ |λ(a − b)|`.
pub fn trace_distance(a: &DensityOp, b: &DensityOp) -> Result<f64, QuantumError> {
    if a.space().dim() != b.space().dim() {
        return Err(QuantumError::DimensionMismatch { expected: a.space().dim(), found: b.space().dim() });
    }
    Ok(0.5 * trace_norm(&(a.mat() - b.mat())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ChannelValidation {
    pub cp: bool,
    pub tp: bool,
    pub trace_nonincreasing: bool,
    pub unital_dual: bool,
    pub unital: bool,
}

/// `cp`: Choi PSD. `tp`: `Σ K†K = 1`. `unital_dual`: the Heisenberg map sends 1 to 1, which is `tp` again.
/// `unital`: the Schrödinger map sends 1 to 1, i.e. `Σ K K† = 1`.
pub fn validate_channel(ch: &Channel) -> ChannelValidation {
    let din = ch.space_in.dim();
    let dout = ch.space_out.dim();
    let cp = psd_ok(&eigh(&ch.choi).0);
    let sum = kraus_sum(&ch.kraus, din);
    let tp = max_abs(&(&sum - identity(din))) <= EQ_TOL;
    let trace_nonincreasing = eigh(&sum).0.last().is_none_or(|l| *l <= 1.0 + EQ_TOL);
    let unital_dual = max_abs(&(ch.dual(&identity(dout)) - identity(din))) <= EQ_TOL;
    let unital = din == dout && max_abs(&(ch.apply(&identity(din)) - identity(dout))) <= EQ_TOL;
    ChannelValidation { cp, tp, trace_nonincreasing, unital_dual, unital }
}

/// The Heisenberg-picture map `a ↦ Σ K† a K`.
#[derive(Clone, Debug)]
pub struct HeisenbergMap {
    pub space_in: TensorSpace,
    pub space_out: TensorSpace,
    kraus: Vec<CMatrix>,
}

impl HeisenbergMap {
    /// Takes observables on `space_out` to observables on `space_in`.
    pub fn apply(&self, a: &CMatrix) -> CMatrix {
        let din = self.space_in.dim();
        self.kraus.iter().fold(CMatrix::zeros(din, din), |acc, k| acc + k.adjoint() * a * k)
    }
}

pub fn hs_adjoint(ch: &Channel) -> HeisenbergMap {
    HeisenbergMap { space_in: ch.space_in.clone(), space_out: ch.space_out.clone(), kraus: ch.kraus.clone() }
}

/// `𝓛(ρ) = Tr_env(u (ρ ⊗ τ) u†)` with `τ = |0⟩⟨0|`.
#[derive(Clone, Debug, Serialize)]
pub struct Dilation {
    pub env: TensorSpace,
    pub tau: DensityOp,
    pub u: UnitaryOp,
}

/// Unitary dilation of a trace-preserving channel with equal input and output dimension.
///
/// The unitary acts on `space_in ⊗ env`, with the environment one factor of dimension equal to the
/// number of Kraus operators.
pub fn stinespring(ch: &Channel, env_label: &str) -> Result<Dilation, QuantumError> {
    if !ch.nonselective {
        let dev = max_abs(&(kraus_sum(&ch.kraus, ch.space_in.dim()) - identity(ch.space_in.dim())));
        return Err(QuantumError::NotTracePreserving(dev));
    }
    let d = ch.space_in.dim();
    if ch.space_out.dim() != d {
        return Err(QuantumError::DimensionMismatch { expected: d, found: ch.space_out.dim() });
    }
    let m = ch.kraus.len();
    let env = TensorSpace::single(env_label, m);
    let space = ch.space_in.concat(&env)?;
    let fixed: Vec<(usize, DVector<Complex64>)> = (0..d)
        .map(|i| {
            let v = DVector::from_fn(d * m, |r, _| ch.kraus[r % m][(r / m, i)]);
            (i * m, v)
        })
        .collect();
    let mat = complete_isometry(d * m, &orthonormal_columns(fixed));
    let u = UnitaryOp::new(space, mat)?;
    let tau = DensityOp::basis(env.clone(), &[0])?;
    Ok(Dilation { env, tau, u })
}

// Re-orthonormalise isometry columns against rounding so the completion stays unitary to machine precision.
fn orthonormal_columns(mut cols: Vec<(usize, DVector<Complex64>)>) -> Vec<(usize, DVector<Complex64>)> {
    for k in 0..cols.len() {
        let (head, tail) = cols.split_at_mut(k);
        let v = &mut tail[0].1;
        for (_, b) in head.iter() {
            let p = b.dotc(v);
            *v -= b * p;
        }
        let n = v.norm();
        *v /= c(n, 0.0);
    }
    cols
}

impl Dilation {
    /// Rebuild the channel by tracing out the environment.
    pub fn reduce(&self, rho: &CMatrix) -> Result<CMatrix, QuantumError> {
        let space = self.u.space();
        let joint = kron(rho, self.tau.mat());
        let out = self.u.mat() * joint * self.u.mat().adjoint();
        let keep: Vec<&str> = space.complement(&self.env.labels());
        super::partial_trace(&out, space, &keep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{random, shift_clock};

    fn qubit() -> TensorSpace {
        TensorSpace::single("A", 2)
    }

    fn phase_flip() -> Channel {
        let s = 0.5f64.sqrt();
        Channel::on(qubit(), vec![identity(2).scale(s), shift_clock(2, 0, 1).scale(s)]).unwrap()
    }

    #[test]
    fn identity_choi_is_twice_omega() {
        let id = Channel::identity(qubit());
        let j = choi_transform(&id);
        let omega = DVector::from_vec(vec![c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]).unscale(2f64.sqrt());
        let expected = (&omega * omega.adjoint()).scale(2.0);
        assert!(max_abs(&(j - expected)) < 1e-15);
    }

    #[test]
    fn depolarizing_choi_has_identity_marginal() {
        let j = choi_from_map(2, 2, |e| identity(2).scale(e.trace().re / 2.0));
        let s = TensorSpace::new([("in", 2), ("out", 2)]).unwrap();
        let marginal = super::super::partial_trace(&j, &s, &["in"]).unwrap();
        assert!(max_abs(&(marginal - identity(2))) < 1e-15);
        let ch = channel_from_choi(&j, qubit(), qubit()).unwrap();
        assert_eq!(ch.kraus().len(), 4);
        assert!(validate_channel(&ch).tp);
    }

    #[test]
    fn validator_cases() {
        let v = validate_channel(&Channel::identity(qubit()));
        assert!(v.cp && v.tp && v.trace_nonincreasing && v.unital_dual && v.unital);
        let v = validate_channel(&phase_flip());
        assert!(v.cp && v.tp);
        let half = Channel::on(qubit(), vec![identity(2).scale(0.5)]).unwrap();
        let v = validate_channel(&half);
        assert!(v.trace_nonincreasing && !v.tp && !half.is_nonselective());
    }

    #[test]
    fn trace_increasing_is_rejected() {
        assert!(matches!(Channel::on(qubit(), vec![identity(2).scale(1.1)]), Err(QuantumError::TraceIncreasing(_))));
    }

    #[test]
    fn corrupted_choi_is_rejected() {
        let ch = random::random_channel(&qubit(), &qubit(), 2, 3);
        let (vals, vecs) = eigh(ch.choi());
        let v = vecs.column(0);
        let bad = ch.choi() - (&v * v.adjoint()).scale(vals[0] + 1e-3);
        assert!(matches!(channel_from_choi(&bad, qubit(), qubit()), Err(QuantumError::NotPsd(_))));
    }

    #[test]
    fn choi_round_trip() {
        let s = TensorSpace::new([("A", 2), ("B", 3)]).unwrap();
        let ch = random::random_channel(&s, &s, 3, 11);
        let back = channel_from_choi(ch.choi(), s.clone(), s.clone()).unwrap();
        assert!(choi_distance(&ch, &back).unwrap() <= 1e-10);
        for i in 0..6 {
            for j in 0..6 {
                let e = matrix_unit(6, i, j);
                assert!(max_abs(&(ch.apply(&e) - back.apply(&e))) <= 1e-10);
            }
        }
    }

    #[test]
    fn trace_distance_examples() {
        let zero = DensityOp::basis(qubit(), &[0]).unwrap();
        let one = DensityOp::basis(qubit(), &[1]).unwrap();
        let mixed = DensityOp::maximally_mixed(qubit());
        assert!(trace_distance(&zero, &zero).unwrap().abs() < 1e-15);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-15);
        assert!((trace_distance(&zero, &mixed).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn adjoint_of_unitary_channel() {
        let u = random::random_unitary(&qubit(), 5);
        let h = hs_adjoint(&Channel::unitary(&u));
        let a = shift_clock(2, 1, 0);
        let expected = u.mat().adjoint() * &a * u.mat();
        assert!(max_abs(&(h.apply(&a) - expected)) < 1e-14);
        let pf = phase_flip();
        let hp = hs_adjoint(&pf);
        let b = random::random_hermitian(2, 9);
        assert!(max_abs(&(hp.apply(&b) - pf.apply(&b))) < 1e-15);
    }

    fn reconstruction_error(ch: &Channel) -> f64 {
        let dil = stinespring(ch, "E").unwrap();
        let d = ch.space_in().dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let e = matrix_unit(d, i, j);
                worst = worst.max(max_abs(&(dil.reduce(&e).unwrap() - ch.apply(&e))));
            }
        }
        worst
    }

    #[test]
    fn stinespring_examples() {
        let id = Channel::identity(qubit());
        let dil = stinespring(&id, "E").unwrap();
        assert_eq!(dil.env.dim(), 1);
        assert!(max_abs(&(dil.u.mat() - identity(2))) < 1e-15);
        let pf = phase_flip();
        assert_eq!(stinespring(&pf, "E").unwrap().env.dim(), 2);
        assert!(reconstruction_error(&pf) <= 1e-10);
        let j = choi_from_map(2, 2, |e| identity(2).scale(e.trace().re / 2.0));
        let dep = channel_from_choi(&j, qubit(), qubit()).unwrap();
        assert_eq!(stinespring(&dep, "E").unwrap().env.dim(), 4);
        assert!(reconstruction_error(&dep) <= 1e-10);
    }

    #[test]
    fn stinespring_requires_trace_preservation() {
        let half = Channel::on(qubit(), vec![identity(2).scale(0.5)]).unwrap();
        assert!(matches!(stinespring(&half, "E"), Err(QuantumError::NotTracePreserving(_))));
    }

    #[test]
    fn unitary_distance_agrees_with_choi_route() {
        let s = TensorSpace::qubits(&["A", "B"]);
        let mut rng = random::rng(3);
        for _ in 0..10 {
            let u = random::unitary(&mut rng, &s);
            let v = random::unitary(&mut rng, &s);
            let direct = choi_distance(&Channel::unitary(&u), &Channel::unitary(&v)).unwrap();
            assert!((unitary_choi_distance(u.mat(), v.mat()) - direct).abs() < 1e-10);
        }
        let u = random::unitary(&mut rng, &s);
        let phased = u.mat() * c(0.0, 1.0);
        assert!(unitary_choi_distance(u.mat(), &phased) < 1e-15);
    }
}
