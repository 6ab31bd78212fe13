//! Causality classification of non-selective operations on a bipartite system.
//!
//! An operation is no-signalling from `A` to `C` when `C`'s marginal after it does not depend on
//! any earlier non-selective operation on `A`. The decision uses the dual condition
//! `𝓛†(1_A ⊗ c) ∈ 1_A ⊗ 𝓑(H_C)`; a failed check is turned into an explicit witness.

pub mod catalog;
pub mod harness;
mod sorkin;

pub use sorkin::{run_sorkin, Alternative, CharlieState, PairDistance, SorkinReport, SorkinScenario};

use nalgebra::DVector;
use num::complex::Complex64;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::fv::{fresh_label, semilocal_channel, FvError, SemilocalisableDecomposition};
use crate::geometry::GeometryError;
use crate::quantum::{
    c, channel_from_choi, choi_distance, choi_from_map, complete_isometry, eigh, embed, hermitian_basis, identity,
    kraus_from_choi, kron, matrix_unit, max_abs, orthonormalize, partial_trace, permute, positive_projector, random, shift_clock,
    trace_norm, validate_channel, CMatrix, Channel, DensityOp, Effect, QuantumError, TensorSpace, UnitaryOp,
};

/// Tolerance of the dual no-signalling check.
pub const NOSIG_TOL: f64 = 1e-9;
/// Largest Choi distance accepted for a semilocal reconstruction.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Restarts of the witness search.
pub const WITNESS_RESTARTS: usize = 64;
const WITNESS_ROUNDS: usize = 30;
const WITNESS_SEED: u64 = 0x5eed;

#[derive(Debug, Error)]
pub enum CausalityError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Fv(#[from] FvError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("operation is not trace preserving")]
    NotNonselective,
    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),
    #[error("constructed map is not a channel (cp: {cp}, tp: {tp})")]
    InvalidChannel { cp: bool, tp: bool },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("{0}")]
    CertifiedFailure(Box<CertifiedFailure>),
}

/// The system factors split between the sender side `A` and the receiver side `C`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bipartition {
    pub a_labels: Vec<String>,
    pub c_labels: Vec<String>,
}

impl Bipartition {
    pub fn new<S: Into<String>>(a: impl IntoIterator<Item = S>, c: impl IntoIterator<Item = S>) -> Result<Self, CausalityError> {
        let a_labels: Vec<String> = a.into_iter().map(Into::into).collect();
        let c_labels: Vec<String> = c.into_iter().map(Into::into).collect();
        if a_labels.is_empty() || c_labels.is_empty() {
            return Err(CausalityError::InvalidBipartition("both sides must be non-empty".into()));
        }
        if let Some(l) = a_labels.iter().find(|l| c_labels.contains(l)) {
            return Err(CausalityError::InvalidBipartition(format!("`{l}` is on both sides")));
        }
        Ok(Self { a_labels, c_labels })
    }

    pub fn a(&self) -> Vec<&str> {
        self.a_labels.iter().map(String::as_str).collect()
    }

    pub fn c(&self) -> Vec<&str> {
        self.c_labels.iter().map(String::as_str).collect()
    }

    /// `A` labels followed by `C` labels.
    pub fn order(&self) -> Vec<&str> {
        self.a().into_iter().chain(self.c()).collect()
    }

    pub fn reversed(&self) -> Self {
        Self { a_labels: self.c_labels.clone(), c_labels: self.a_labels.clone() }
    }

    /// Checks that the two sides cover `space` exactly.
    pub fn check(&self, space: &TensorSpace) -> Result<(), CausalityError> {
        for l in self.order() {
            if !space.contains(l) {
                return Err(CausalityError::InvalidBipartition(format!("`{l}` is not a factor of the system")));
            }
        }
        if self.order().len() != space.len() {
            let missing = space.complement(&self.order()).join(", ");
            return Err(CausalityError::InvalidBipartition(format!("factors {missing} are on neither side")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AToC,
    CToA,
}

impl Direction {
    /// `(sender, receiver)` labels.
    fn sides(self, p: &Bipartition) -> (Vec<&str>, Vec<&str>) {
        match self {
            Direction::AToC => (p.a(), p.c()),
            Direction::CToA => (p.c(), p.a()),
        }
    }
}

/// A prior operation on the sender and a state under which the receiver's marginal changes.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub lambda: Channel,
    pub rho: DensityOp,
    /// Receiver effect with the largest expectation gap.
    pub effect: Effect,
    /// Trace distance between the receiver marginals with and without `lambda`.
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CausalityReport {
    pub nosig_a_to_c: bool,
    pub nosig_c_to_a: bool,
    /// Largest entry of `X − 1 ⊗ Tr_A X / d_A` over the basis of receiver observables.
    pub residual_a_to_c: f64,
    pub residual_c_to_a: f64,
    pub witness_a_to_c: Option<Witness>,
    pub witness_c_to_a: Option<Witness>,
}

/// Why a decomposition could not be produced, with the evidence.
#[derive(Clone, Debug, Serialize, Error)]
#[error("certified failure at {stage}: residual {residual:.3e}")]
pub struct CertifiedFailure {
    pub stage: String,
    pub residual: f64,
    pub witness: Option<Witness>,
}

impl From<CertifiedFailure> for CausalityError {
    fn from(f: CertifiedFailure) -> Self {
        CausalityError::CertifiedFailure(Box::new(f))
    }
}

fn require_nonselective(ch: &Channel) -> Result<(), CausalityError> {
    if ch.space_in() != ch.space_out() || !ch.is_nonselective() {
        return Err(CausalityError::NotNonselective);
    }
    Ok(())
}

/// Largest deviation of `𝓛†(1 ⊗ h)` from the form `1_sender ⊗ y` over a basis of receiver observables,
/// with the worst basis element.
fn dual_residual(ch: &Channel, sender: &[&str], receiver: &[&str]) -> Result<(f64, CMatrix), CausalityError> {
    let space = ch.space_in();
    let ds = space.select(sender)?.dim();
    let dr = space.select(receiver)?.dim();
    let mut worst = (0.0, identity(dr));
    for (_, h) in hermitian_basis(dr) {
        let x = ch.dual(&embed(&h, receiver, space)?);
        let order = space.restrict(receiver)?;
        let (reduced, _) = permute(&partial_trace(&x, space, receiver)?, &order, receiver)?;
        let dev = max_abs(&(&x - embed(&reduced.unscale(ds as f64), receiver, space)?));
        if dev > worst.0 {
            worst = (dev, h);
        }
    }
    Ok(worst)
}

/// Receiver marginal in the receiver's label order.
fn marginal(ch: &Channel, rho: &CMatrix, receiver: &[&str]) -> Result<CMatrix, QuantumError> {
    let space = ch.space_out();
    let out = partial_trace(&ch.apply(rho), space, receiver)?;
    Ok(permute(&out, &space.restrict(receiver)?, receiver)?.0)
}

/// The trace distance between receiver marginals of `ρ` and `(Λ ⊗ id)ρ`.
pub fn signalling_deviation(
    ch: &Channel,
    p: &Bipartition,
    direction: Direction,
    lambda: &Channel,
    rho: &DensityOp,
) -> Result<f64, CausalityError> {
    let (_, receiver) = direction.sides(p);
    let space = ch.space_in();
    let rho = permute(rho.mat(), rho.space(), &space.labels())?.0;
    let before = marginal(ch, &rho, &receiver)?;
    let moved = lambda.embedded(space)?.apply(&rho);
    let after = marginal(ch, &moved, &receiver)?;
    Ok(0.5 * trace_norm(&(before - after)))
}

/// Recomputes a witness's deviation.
pub fn replay_witness(ch: &Channel, p: &Bipartition, direction: Direction, w: &Witness) -> Result<f64, CausalityError> {
    signalling_deviation(ch, p, direction, &w.lambda, &w.rho)
}

fn top_eigenvector(h: &CMatrix) -> DVector<Complex64> {
    let (_, vecs) = eigh(h);
    vecs.column(h.nrows() - 1).into_owned()
}

/// Random-restart alternating search for a sender unitary and pure state maximising the marginal gap.
fn search_witness(ch: &Channel, sender: &[&str], receiver: &[&str], seed_effect: &CMatrix) -> Result<Witness, CausalityError> {
    let space = ch.space_in();
    let s_space = space.select(sender)?;
    let r_space = space.select(receiver)?;
    let ds = s_space.dim();
    let mut rng = random::rng(WITNESS_SEED);

    let mut candidates: Vec<CMatrix> = (0..ds)
        .flat_map(|a| (0..ds).map(move |b| (a, b)))
        .filter(|&ab| ab != (0, 0))
        .map(|(a, b)| shift_clock(ds, a, b))
        .take(WITNESS_RESTARTS)
        .collect();
    while candidates.len() < WITNESS_RESTARTS {
        candidates.push(random::unitary_matrix(&mut rng, ds));
    }

    let mut best: Option<(f64, CMatrix, DVector<Complex64>)> = None;
    let start = positive_projector(seed_effect);
    for lam in candidates {
        let u = embed(&lam, sender, space)?;
        let mut effect = start.clone();
        let mut psi = DVector::zeros(space.dim());
        let mut value = f64::NEG_INFINITY;
        for _ in 0..WITNESS_ROUNDS {
            let y = ch.dual(&embed(&effect, receiver, space)?);
            psi = top_eigenvector(&(&y - u.adjoint() * &y * &u));
            let rho = &psi * psi.adjoint();
            let diff = marginal(ch, &rho, receiver)? - marginal(ch, &(&u * &rho * u.adjoint()), receiver)?;
            let gap = 0.5 * trace_norm(&diff);
            effect = positive_projector(&diff);
            if gap <= value + 1e-14 {
                value = value.max(gap);
                break;
            }
            value = gap;
        }
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, lam, psi));
        }
    }
    let (_, lam, psi) = best.expect("at least one restart");
    let lambda = Channel::unitary(&UnitaryOp::new(s_space, lam)?);
    let psi: Vec<Complex64> = psi.iter().copied().collect();
    let rho = DensityOp::pure(space.clone(), &psi)?;
    let u = lambda.embedded(space)?;
    let diff = marginal(ch, rho.mat(), receiver)? - marginal(ch, &u.apply(rho.mat()), receiver)?;
    let effect = Effect::new(r_space, positive_projector(&diff))?;
    let deviation = 0.5 * trace_norm(&diff);
    Ok(Witness { lambda, rho, effect, deviation })
}

fn classify_direction(ch: &Channel, p: &Bipartition, direction: Direction) -> Result<(f64, Option<Witness>), CausalityError> {
    let (sender, receiver) = direction.sides(p);
    let (residual, worst) = dual_residual(ch, &sender, &receiver)?;
    if residual <= NOSIG_TOL {
        return Ok((residual, None));
    }
    Ok((residual, Some(search_witness(ch, &sender, &receiver, &worst)?)))
}

/// Decides no-signalling in both directions.
pub fn classify_nosignalling(ch: &Channel, p: &Bipartition) -> Result<CausalityReport, CausalityError> {
    require_nonselective(ch)?;
    p.check(ch.space_in())?;
    let (residual_a_to_c, witness_a_to_c) = classify_direction(ch, p, Direction::AToC)?;
    let (residual_c_to_a, witness_c_to_a) = classify_direction(ch, p, Direction::CToA)?;
    Ok(CausalityReport {
        nosig_a_to_c: witness_a_to_c.is_none(),
        nosig_c_to_a: witness_c_to_a.is_none(),
        residual_a_to_c,
        residual_c_to_a,
        witness_a_to_c,
        witness_c_to_a,
    })
}

fn checked(ch: Channel) -> Result<Channel, CausalityError> {
    let v = validate_channel(&ch);
    if !(v.cp && v.tp) {
        return Err(CausalityError::InvalidChannel { cp: v.cp, tp: v.tp });
    }
    Ok(ch)
}

/// Labels of `ch` outside `aux`, in `ch`'s order.
fn own_space(ch: &Channel, aux: &TensorSpace) -> Result<TensorSpace, QuantumError> {
    let labels: Vec<&str> = ch.space_in().labels().into_iter().filter(|l| !aux.contains(l)).collect();
    ch.space_in().select(&labels)
}

/// `ρ_AC ↦ Tr_RS((L_AR ⊗ L_CS)(ρ_AC ⊗ ρ_RS))`.
pub fn make_localisable(l_ar: &Channel, l_cs: &Channel, rho_rs: &DensityOp) -> Result<Channel, CausalityError> {
    require_nonselective(l_ar)?;
    require_nonselective(l_cs)?;
    let aux = rho_rs.space();
    let system = own_space(l_ar, aux)?.concat(&own_space(l_cs, aux)?)?;
    let joint = system.concat(aux)?;
    let covered = l_ar.space_in().len() + l_cs.space_in().len();
    if covered != joint.len() {
        return Err(QuantumError::DimensionMismatch { expected: joint.len(), found: covered }.into());
    }
    let (first, second) = (l_ar.embedded(&joint)?, l_cs.embedded(&joint)?);
    let keep = system.labels();
    let d = system.dim();
    let j = choi_from_map(d, d, |x| {
        let y = second.apply(&first.apply(&kron(x, rho_rs.mat())));
        partial_trace(&y, &joint, &keep).expect("labels come from the joint space")
    });
    checked(channel_from_choi(&j, system.clone(), system)?)
}

/// `ρ_AC ↦ Tr_B((L_AB ⊗ id_C)(id_A ⊗ L_BC)(ρ_AC ⊗ ρ_B))`.
pub fn make_semilocalisable(l_bc: &Channel, l_ab: &Channel, rho_b: &DensityOp) -> Result<Channel, CausalityError> {
    require_nonselective(l_bc)?;
    require_nonselective(l_ab)?;
    if rho_b.space().len() != 1 {
        return Err(CausalityError::PreconditionViolated("the ancilla must be a single factor".into()));
    }
    let aux = rho_b.space();
    let system = own_space(l_ab, aux)?.concat(&own_space(l_bc, aux)?)?;
    checked(semilocal_channel(&system, l_bc, l_ab, rho_b)?)
}

/// Kraus operators of `ch` with the factors reordered to `order`.
fn reordered_kraus(ch: &Channel, order: &[&str]) -> Result<Vec<CMatrix>, QuantumError> {
    ch.kraus().iter().map(|k| Ok(permute(k, ch.space_in(), order)?.0)).collect()
}

/// Nearest isometry in the polar sense.
fn polar_isometry(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    svd.u.expect("requested") * svd.v_t.expect("requested")
}

/// A semilocal decomposition with communication from `C` to `A`.
///
/// `Tr_A 𝓛(1/d_A ⊗ σ)` is dilated by an isometry `W: C → C ⊗ E`; the ancilla is `B = E`, `L_BC`
/// completes `W`, and `L_AB` is read off the isometry `Y: A ⊗ E → A ⊗ F` with `V = (1_C ⊗ Y)(1_A ⊗ W)`
/// for the Stinespring isometry `V` of `𝓛`.
pub fn decompose_semilocalisable(ch: &Channel, p: &Bipartition) -> Result<SemilocalisableDecomposition, CausalityError> {
    require_nonselective(ch)?;
    p.check(ch.space_in())?;
    let (residual, witness) = classify_direction(ch, p, Direction::AToC)?;
    if let Some(w) = witness {
        return Err(CertifiedFailure { stage: "classification".into(), residual, witness: Some(w) }.into());
    }

    let system = ch.space_in().clone();
    let order = p.order();
    let (a, c_labels) = (p.a(), p.c());
    let ordered = system.select(&order)?;
    let a_space = system.select(&a)?;
    let c_space = system.select(&c_labels)?;
    let (da, dc) = (a_space.dim(), c_space.dim());

    let kraus = reordered_kraus(&ch.compressed()?, &order)?;
    let reduced = choi_from_map(dc, dc, |x| {
        let y = kraus
            .iter()
            .fold(CMatrix::zeros(da * dc, da * dc), |acc, k| acc + k * kron(&identity(da).unscale(da as f64), x) * k.adjoint());
        partial_trace(&y, &ordered, &c_labels).expect("labels come from the space")
    });
    let w = kraus_from_choi(&reduced, dc, dc)?;
    let de = w.len();

    let gram = CMatrix::from_fn(de, de, |i, j| (w[i].adjoint() * &w[j]).trace());
    let gram_inv = gram.try_inverse().ok_or_else(|| CertifiedFailure {
        stage: "dilation".into(),
        residual: f64::INFINITY,
        witness: None,
    })?;
    let df = kraus.len();
    let mut y = CMatrix::zeros(da * df, da * de);
    for (f, k) in kraus.iter().enumerate() {
        for a_out in 0..da {
            for a_in in 0..da {
                let x = CMatrix::from_fn(dc, dc, |co, ci| k[(a_out * dc + co, a_in * dc + ci)]);
                let h = DVector::from_fn(de, |e, _| (w[e].adjoint() * &x).trace());
                let coeff = &gram_inv * h;
                for e in 0..de {
                    y[(a_out * df + f, a_in * de + e)] = coeff[e];
                }
            }
        }
    }
    let y = polar_isometry(&y);

    let b_label = fresh_label("B", &system.labels());
    let b_space = TensorSpace::single(&b_label, de);
    let cols = CMatrix::from_fn(de * dc, dc, |row, col| w[row / dc][(row % dc, col)]);
    let cols = orthonormalize(&cols, 1e-9);
    if cols.ncols() != dc {
        return Err(CertifiedFailure { stage: "dilation".into(), residual: (dc - cols.ncols()) as f64, witness: None }.into());
    }
    let fixed: Vec<(usize, DVector<Complex64>)> = (0..dc).map(|i| (i, cols.column(i).into_owned())).collect();
    let u_bc = UnitaryOp::new(b_space.concat(&c_space)?, complete_isometry(de * dc, &fixed))?;
    let l_bc = Channel::unitary(&u_bc);

    let l_ab_kraus: Vec<CMatrix> = (0..df)
        .map(|f| {
            CMatrix::from_fn(da * de, da * de, |row, col| {
                let (a_out, b_out) = (row / de, row % de);
                let (a_in, b_in) = (col / de, col % de);
                if b_out == 0 {
                    y[(a_out * df + f, a_in * de + b_in)]
                } else {
                    c(0.0, 0.0)
                }
            })
        })
        .collect();
    let l_ab = Channel::on(a_space.concat(&b_space)?, l_ab_kraus)?.compressed()?;
    let rho_b = DensityOp::new(b_space, matrix_unit(de, 0, 0))?;

    let d = SemilocalisableDecomposition { system, b_dim: de, rho_b, l_bc, l_ab };
    let residual = choi_distance(&d.channel()?, ch)?;
    if residual > RECONSTRUCTION_TOL {
        return Err(CertifiedFailure { stage: "reconstruction".into(), residual, witness: None }.into());
    }
    Ok(d)
}

/// A random channel on `space` with between one and `max_kraus` Kraus operators.
pub(crate) fn random_channel<R: Rng>(rng: &mut R, space: &TensorSpace, max_kraus: usize) -> Channel {
    let k = rng.gen_range(1..=max_kraus);
    random::channel(rng, space, space, k)
}

#[cfg(test)]
mod tests;
