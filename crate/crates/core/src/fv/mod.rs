//! Measurements made through a probe coupled to the system inside a bounded zone.
//!
//! A scattering morphism is stored as the evolution unitary `S` on system ⊗ probe: observables
//! transform as `Θ(a) = S† a S`, states as `ρ ↦ S ρ S†`. The retarded response is the identity,
//! so `S` is the whole coupled dynamics. When a probe route crosses several worldlines, the
//! per-crossing unitaries compose in event order, `S = U_n ⋯ U_1`.

pub mod suite;

use std::cell::RefCell;
use std::collections::BTreeSet;

use nalgebra::DVector;
use num::complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{check_causal_order, find_probe_route, worldline_intersections, Diamond, GeometryError, Point, Worldline};
use crate::hybrid::{HybridNet, WorldlineSystem};
use crate::quantum::{
    c, channel_from_choi, choi_from_map, complete_isometry, eigh, embed, hermitian_basis, hermitian_part, identity,
    kraus_from_choi, kron, matrix_unit, max_abs, orthonormalize, partial_trace, permute, stinespring, unitary_choi_distance,
    CMatrix, Channel, DensityOp, Effect, QuantumError, TensorSpace, UnitaryOp,
};

/// Below this probability a post-selected state is not formed.
pub const ZERO_PROBABILITY: f64 = 1e-12;
/// Tolerance for the factorisation checks.
pub const FACTOR_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FvError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("crossing at {event} lies outside the coupling zone")]
    CrossingOutsideCouplingZone { event: Point },
    #[error("unitary {index} acts on `{label}`, which the probe does not meet at that crossing")]
    NonlocalUnitary { index: usize, label: String },
    #[error("the route has {expected} crossings but {found} unitaries were supplied")]
    UnitaryCount { expected: usize, found: usize },
    #[error("scattering does not factor: check `{witness}` deviates by {deviation:.3e}")]
    NotFactorable { witness: String, deviation: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("no probe route meets gamma_C and then gamma_A between O_A and O_C")]
    RouteNotFound,
}

/// A point where the probe meets system worldlines, with the factors involved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Interaction {
    pub event: Point,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScatteringMorphism {
    evolution: UnitaryOp,
    interactions: Vec<Interaction>,
}

impl ScatteringMorphism {
    pub fn new(evolution: UnitaryOp, interactions: Vec<Interaction>) -> Result<Self, FvError> {
        for i in &interactions {
            for l in &i.labels {
                evolution.space().position(l)?;
            }
        }
        Ok(Self { evolution, interactions })
    }

    pub fn identity(space: TensorSpace) -> Self {
        Self { evolution: UnitaryOp::identity(space), interactions: Vec::new() }
    }

    pub fn space(&self) -> &TensorSpace {
        self.evolution.space()
    }

    pub fn evolution(&self) -> &UnitaryOp {
        &self.evolution
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    /// Every factor named in some interaction.
    pub fn touched(&self) -> BTreeSet<String> {
        self.interactions.iter().flat_map(|i| i.labels.iter().cloned()).collect()
    }

    /// `Θ(a) = S† a S`.
    pub fn apply(&self, a: &CMatrix) -> CMatrix {
        let s = self.evolution.mat();
        s.adjoint() * a * s
    }

    /// `Θ` of an operator given on the listed factors.
    pub fn apply_on(&self, a: &CMatrix, labels: &[&str]) -> Result<CMatrix, FvError> {
        Ok(self.apply(&embed(a, labels, self.space())?))
    }

    /// `Θ ⊗ id` on the space extended by `extra`.
    pub fn extended(&self, extra: &TensorSpace) -> Result<Self, FvError> {
        let space = self.space().concat(extra)?;
        let evolution = self.evolution.embedded(&space)?;
        Ok(Self { evolution, interactions: self.interactions.clone() })
    }
}

/// `S` reordered to (system, probe), with the system space and the joint space.
struct Split {
    s: CMatrix,
    system: TensorSpace,
    joint: TensorSpace,
}

impl Split {
    fn new(theta: &ScatteringMorphism, probe: &TensorSpace) -> Result<Self, FvError> {
        let space = theta.space();
        for f in probe.factors() {
            let d = space.dim_of(&f.label)?;
            if d != f.dim {
                return Err(QuantumError::DimensionMismatch { expected: d, found: f.dim }.into());
            }
        }
        let probe_labels = probe.labels();
        let system_labels = space.complement(&probe_labels);
        let system = space.select(&system_labels)?;
        let order: Vec<&str> = system_labels.iter().chain(&probe_labels).copied().collect();
        let (s, joint) = permute(theta.evolution().mat(), space, &order)?;
        Ok(Self { s, system, joint })
    }

    fn system_labels(&self) -> Vec<&str> {
        self.system.labels()
    }

    /// `Tr_P[S (x ⊗ σ) S† (1 ⊗ b)]`.
    fn push(&self, x: &CMatrix, sigma: &CMatrix, b: Option<&CMatrix>) -> Result<CMatrix, FvError> {
        let mut m = &self.s * kron(x, sigma) * self.s.adjoint();
        if let Some(b) = b {
            m *= kron(&identity(self.system.dim()), b);
        }
        Ok(partial_trace(&m, &self.joint, &self.system_labels())?)
    }

    /// `Tr_P[(1 ⊗ σ) S† (1 ⊗ b) S]`.
    fn pull(&self, sigma: &CMatrix, b: &CMatrix) -> Result<CMatrix, FvError> {
        let one = identity(self.system.dim());
        let x = self.s.adjoint() * kron(&one, b) * &self.s;
        let m = kron(&one, sigma) * x;
        Ok(hermitian_part(&partial_trace(&m, &self.joint, &self.system_labels())?))
    }
}

/// `m` on `from` re-expressed in the factor order of `to`.
fn align(m: &CMatrix, from: &TensorSpace, to: &TensorSpace) -> Result<CMatrix, FvError> {
    if from == to {
        return Ok(m.clone());
    }
    let (out, space) = permute(m, from, &to.labels())?;
    if &space != to {
        return Err(QuantumError::DimensionMismatch { expected: to.dim(), found: from.dim() }.into());
    }
    Ok(out)
}

/// `ε_σ(b)`: the system effect whose expectation gives the probe's readout.
pub fn induced_observable(theta: &ScatteringMorphism, sigma: &DensityOp, b: &Effect) -> Result<CMatrix, FvError> {
    let split = Split::new(theta, sigma.space())?;
    let b = align(b.mat(), b.space(), sigma.space())?;
    split.pull(sigma.mat(), &b)
}

#[derive(Clone, Debug, Serialize)]
pub struct SelectiveUpdate {
    pub space: TensorSpace,
    #[serde(with = "crate::quantum::serde_cmatrix")]
    pub unnormalized: CMatrix,
    pub probability: f64,
    /// `None` when the probability is at most [`ZERO_PROBABILITY`].
    pub postselected: Option<DensityOp>,
}

pub fn update_selective(
    theta: &ScatteringMorphism,
    sigma: &DensityOp,
    b: &Effect,
    omega: &DensityOp,
) -> Result<SelectiveUpdate, FvError> {
    let split = Split::new(theta, sigma.space())?;
    let b = align(b.mat(), b.space(), sigma.space())?;
    let w = align(omega.mat(), omega.space(), &split.system)?;
    let unnormalized = hermitian_part(&split.push(&w, sigma.mat(), Some(&b))?);
    let probability = unnormalized.trace().re;
    let postselected = if probability > ZERO_PROBABILITY {
        Some(DensityOp::normalized(split.system.clone(), unnormalized.clone())?)
    } else {
        None
    };
    Ok(SelectiveUpdate { space: split.system, unnormalized, probability, postselected })
}

pub fn update_nonselective(theta: &ScatteringMorphism, sigma: &DensityOp, omega: &DensityOp) -> Result<DensityOp, FvError> {
    let split = Split::new(theta, sigma.space())?;
    let w = align(omega.mat(), omega.space(), &split.system)?;
    Ok(DensityOp::normalized(split.system.clone(), split.push(&w, sigma.mat(), None)?)?)
}

/// [`choi_from_map`] for a fallible map.
fn try_choi<E>(din: usize, dout: usize, f: impl Fn(&CMatrix) -> Result<CMatrix, E>) -> Result<CMatrix, E> {
    let failure = RefCell::new(None);
    let j = choi_from_map(din, dout, |x| {
        f(x).unwrap_or_else(|e| {
            failure.borrow_mut().get_or_insert(e);
            CMatrix::zeros(dout, dout)
        })
    });
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(j),
    }
}

/// The non-selective update as a channel on the system.
pub fn nonselective_channel(theta: &ScatteringMorphism, sigma: &DensityOp) -> Result<Channel, FvError> {
    let split = Split::new(theta, sigma.space())?;
    let d = split.system.dim();
    let j = try_choi(d, d, |x| split.push(x, sigma.mat(), None))?;
    Ok(channel_from_choi(&j, split.system.clone(), split.system.clone())?)
}

/// A probe, its coupling zone, the scattering morphism, the probe preparation and the effect read out.
#[derive(Clone, Debug, Serialize)]
pub struct FvMeasurement {
    pub probe: Vec<WorldlineSystem>,
    pub zone: Diamond,
    pub theta: ScatteringMorphism,
    pub sigma: DensityOp,
    pub b: Effect,
}

impl FvMeasurement {
    pub fn new(
        probe: Vec<WorldlineSystem>,
        zone: Diamond,
        theta: ScatteringMorphism,
        sigma: DensityOp,
        b: Effect,
    ) -> Result<Self, FvError> {
        let declared: BTreeSet<&str> = probe.iter().map(|p| p.label.as_str()).collect();
        let prepared: BTreeSet<&str> = sigma.space().labels().into_iter().collect();
        if declared != prepared {
            return Err(FvError::PreconditionViolated("sigma must live on exactly the probe factors".into()));
        }
        for p in &probe {
            if theta.space().dim_of(&p.label)? != p.dim {
                return Err(QuantumError::DimensionMismatch { expected: theta.space().dim_of(&p.label)?, found: p.dim }.into());
            }
        }
        align(b.mat(), b.space(), sigma.space())?;
        Split::new(&theta, sigma.space())?;
        let closed = zone.closure();
        if let Some(i) = theta.interactions().iter().find(|i| !closed.contains(&i.event)) {
            return Err(FvError::CrossingOutsideCouplingZone { event: i.event.clone() });
        }
        Ok(Self { probe, zone, theta, sigma, b })
    }

    pub fn is_nonselective(&self) -> bool {
        self.b.is_identity()
    }

    /// The same measurement with the readout discarded.
    pub fn nonselective(&self) -> Self {
        Self { b: Effect::identity(self.sigma.space().clone()), ..self.clone() }
    }

    pub fn with_effect(&self, b: Effect) -> Result<Self, FvError> {
        Self::new(self.probe.clone(), self.zone.clone(), self.theta.clone(), self.sigma.clone(), b)
    }

    pub fn system_space(&self) -> TensorSpace {
        let space = self.theta.space();
        let probe = self.sigma.space().labels();
        space.select(&space.complement(&probe)).expect("labels come from the space")
    }

    pub fn induced_observable(&self) -> Result<CMatrix, FvError> {
        induced_observable(&self.theta, &self.sigma, &self.b)
    }

    pub fn update_selective(&self, omega: &DensityOp) -> Result<SelectiveUpdate, FvError> {
        update_selective(&self.theta, &self.sigma, &self.b, omega)
    }

    pub fn update_nonselective(&self, omega: &DensityOp) -> Result<DensityOp, FvError> {
        update_nonselective(&self.theta, &self.sigma, omega)
    }

    pub fn channel(&self) -> Result<Channel, FvError> {
        nonselective_channel(&self.theta, &self.sigma)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Composition {
    pub space: TensorSpace,
    /// Joint selective update applied in causal order.
    #[serde(with = "crate::quantum::serde_cmatrix")]
    pub unnormalized: CMatrix,
    pub probability: f64,
    /// `E_i`: party `i`'s expectation after the non-selective updates of the earlier parties.
    pub expectations: Vec<f64>,
    /// Largest change from swapping adjacent measurements whose zones are causally disjoint.
    pub swap_deviation: f64,
    pub swaps_tested: usize,
}

struct Prepared<'a> {
    split: Split,
    m: &'a FvMeasurement,
    b: CMatrix,
}

impl Prepared<'_> {
    fn update(&self, x: &CMatrix, selective: bool) -> Result<CMatrix, FvError> {
        let b = selective.then_some(&self.b);
        Ok(hermitian_part(&self.split.push(x, self.m.sigma.mat(), b)?))
    }
}

/// Applies the measurements in list order, which must be a causal order of their zones.
pub fn compose_measurements(measurements: &[FvMeasurement], omega: &DensityOp) -> Result<Composition, FvError> {
    let zones: Vec<Diamond> = measurements.iter().map(|m| m.zone.clone()).collect();
    if !check_causal_order(&zones) {
        return Err(FvError::PreconditionViolated("coupling zones are not causally ordered in list order".into()));
    }
    let space = omega.space().clone();
    let prepared = measurements
        .iter()
        .map(|m| {
            let split = Split::new(&m.theta, m.sigma.space())?;
            if split.system != space {
                return Err(FvError::PreconditionViolated("measurements act on different system spaces".into()));
            }
            let b = align(m.b.mat(), m.b.space(), m.sigma.space())?;
            Ok(Prepared { split, m, b })
        })
        .collect::<Result<Vec<_>, FvError>>()?;

    let mut selective = omega.mat().clone();
    let mut plain = omega.mat().clone();
    let mut expectations = Vec::with_capacity(prepared.len());
    for p in &prepared {
        let eps = p.split.pull(p.m.sigma.mat(), &p.b)?;
        expectations.push((&plain * eps).trace().re);
        selective = p.update(&selective, true)?;
        plain = p.update(&plain, false)?;
    }

    let mut swap_deviation: f64 = 0.0;
    let mut swaps_tested = 0;
    for (i, pair) in prepared.windows(2).enumerate() {
        if !crate::geometry::causally_disjoint(&zones[i], &zones[i + 1]) {
            continue;
        }
        swaps_tested += 1;
        let w = omega.mat();
        let forward = pair[1].update(&pair[0].update(w, true)?, true)?;
        let backward = pair[0].update(&pair[1].update(w, true)?, true)?;
        swap_deviation = swap_deviation.max(max_abs(&(forward - backward)));
    }

    let probability = selective.trace().re;
    Ok(Composition { space, unnormalized: selective, probability, expectations, swap_deviation, swaps_tested })
}

/// Crossings of `route` with the system worldlines, grouped by event and sorted by time.
pub fn route_crossings(route: &Worldline, system: &HybridNet) -> Result<Vec<Interaction>, FvError> {
    let mut out: Vec<Interaction> = Vec::new();
    for s in system.systems() {
        for event in worldline_intersections(route, &s.worldline)? {
            match out.iter_mut().find(|i| i.event == event) {
                Some(i) => i.labels.push(s.label.clone()),
                None => out.push(Interaction { event, labels: vec![s.label.clone()] }),
            }
        }
    }
    out.sort_by(|a, b| a.event.cmp(&b.event));
    Ok(out)
}

fn check_factor_dims(u: &UnitaryOp, space: &TensorSpace) -> Result<(), FvError> {
    for f in u.space().factors() {
        let d = space.dim_of(&f.label)?;
        if d != f.dim {
            return Err(QuantumError::DimensionMismatch { expected: d, found: f.dim }.into());
        }
    }
    Ok(())
}

/// The scattering morphism of a probe travelling along `route` and interacting at each crossing.
///
/// `unitaries[i]` is the evolution at the `i`-th crossing and may act only on the probe and the
/// factors met there. With no crossings, each unitary must act on a single factor.
pub fn scattering_from_route(
    route: &Worldline,
    system: &HybridNet,
    probe_label: &str,
    probe_dim: usize,
    zone: &Diamond,
    unitaries: &[UnitaryOp],
) -> Result<ScatteringMorphism, FvError> {
    let space = system.space().concat(&TensorSpace::new([(probe_label, probe_dim)])?)?;
    let crossings = route_crossings(route, system)?;
    let closed = zone.closure();
    if let Some(i) = crossings.iter().find(|i| !closed.contains(&i.event)) {
        return Err(FvError::CrossingOutsideCouplingZone { event: i.event.clone() });
    }

    let mut s = identity(space.dim());
    if crossings.is_empty() {
        for (index, u) in unitaries.iter().enumerate() {
            let labels = u.space().labels();
            if labels.len() > 1 {
                return Err(FvError::NonlocalUnitary { index, label: labels[1].to_string() });
            }
            check_factor_dims(u, &space)?;
            s = embed(u.mat(), &labels, &space)? * s;
        }
        return Ok(ScatteringMorphism { evolution: UnitaryOp::new(space, s)?, interactions: Vec::new() });
    }

    if unitaries.len() != crossings.len() {
        return Err(FvError::UnitaryCount { expected: crossings.len(), found: unitaries.len() });
    }
    let mut interactions = Vec::with_capacity(crossings.len());
    for (index, (crossing, u)) in crossings.into_iter().zip(unitaries).enumerate() {
        let labels = u.space().labels();
        if let Some(l) = labels.iter().find(|l| **l != probe_label && !crossing.labels.iter().any(|c| c == *l)) {
            return Err(FvError::NonlocalUnitary { index, label: l.to_string() });
        }
        check_factor_dims(u, &space)?;
        s = embed(u.mat(), &labels, &space)? * s;
        let mut touched = vec![probe_label.to_string()];
        touched.extend(crossing.labels);
        interactions.push(Interaction { event: crossing.event, labels: touched });
    }
    Ok(ScatteringMorphism { evolution: UnitaryOp::new(space, s)?, interactions })
}

/// `S = (χ_AB ⊗ 1_C)(1_A ⊗ ψ_BC)` in evolution form: `ψ_BC` acts first.
#[derive(Clone, Debug, Serialize)]
pub struct Factorization {
    pub psi_bc: UnitaryOp,
    pub chi_ab: UnitaryOp,
    pub reconstruction: f64,
}

/// `Tr` over the first of two blocks of dimensions `(d1, d2)`.
fn trace_first(m: &CMatrix, d1: usize, d2: usize) -> CMatrix {
    CMatrix::from_fn(d2, d2, |i, j| (0..d1).map(|k| m[(k * d2 + i, k * d2 + j)]).sum::<Complex64>())
}

/// `Tr` over the second of two blocks of dimensions `(d1, d2)`.
fn trace_last(m: &CMatrix, d1: usize, d2: usize) -> CMatrix {
    CMatrix::from_fn(d1, d1, |i, j| (0..d2).map(|k| m[(i * d2 + k, j * d2 + k)]).sum::<Complex64>())
}

/// Nearest unitary in the polar sense.
fn polar_unitary(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    svd.u.expect("requested") * svd.v_t.expect("requested")
}

/// Splits a scattering morphism into an interaction of `B` with `C` followed by one of `A` with `B`.
pub fn factor_scattering(
    theta: &ScatteringMorphism,
    a: &[&str],
    b: &[&str],
    c_labels: &[&str],
) -> Result<Factorization, FvError> {
    let space = theta.space();
    let order: Vec<&str> = a.iter().chain(b).chain(c_labels).copied().collect();
    if order.len() != space.len() {
        return Err(FvError::PreconditionViolated("the partition must list every factor exactly once".into()));
    }
    let (s, _) = permute(theta.evolution().mat(), space, &order)?;
    let (sa, sb, sc) = (space.select(a)?, space.select(b)?, space.select(c_labels)?);
    let (da, db, dc) = (sa.dim(), sb.dim(), sc.dim());
    let dbc = db * dc;
    let heis = |x: &CMatrix| s.adjoint() * kron(&identity(da * db), x) * &s;

    for (name, cm) in hermitian_basis(dc) {
        let x = heis(&cm);
        let reduced = trace_first(&x, da, dbc).unscale(da as f64);
        let deviation = max_abs(&(&x - kron(&identity(da), &reduced)));
        if deviation > FACTOR_TOL {
            return Err(FvError::NotFactorable { witness: name, deviation });
        }
    }
    let gamma = |k: usize, l: usize| trace_first(&heis(&matrix_unit(dc, k, l)), da, dbc).unscale(da as f64);

    let (vals, vecs) = eigh(&gamma(0, 0));
    let range: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 0.5).collect();
    if range.len() != db {
        return Err(FvError::NotFactorable { witness: "multiplicity".into(), deviation: (range.len() as f64 - db as f64).abs() });
    }
    let lowering: Vec<CMatrix> = (0..dc).map(|k| gamma(k, 0)).collect();
    let mut v = CMatrix::zeros(dbc, dbc);
    for (j, &col) in range.iter().enumerate() {
        let f = vecs.column(col).into_owned();
        for (k, g) in lowering.iter().enumerate() {
            v.set_column(j * dc + k, &(g * &f));
        }
    }
    let v = polar_unitary(&v);

    let w = &s * kron(&identity(da), &v);
    let chi = trace_last(&w, da * db, dc).unscale(dc as f64);
    let deviation = max_abs(&(&w - kron(&chi, &identity(dc))));
    if deviation > FACTOR_TOL {
        return Err(FvError::NotFactorable { witness: "commutant".into(), deviation });
    }
    let chi = polar_unitary(&chi);
    let psi = v.adjoint();
    let rebuilt = kron(&chi, &identity(dc)) * kron(&identity(da), &psi);
    let reconstruction = unitary_choi_distance(&s, &rebuilt);
    if reconstruction > FACTOR_TOL {
        return Err(FvError::NotFactorable { witness: "reconstruction".into(), deviation: reconstruction });
    }
    let bc: Vec<&str> = b.iter().chain(c_labels).copied().collect();
    let ab: Vec<&str> = a.iter().chain(b).copied().collect();
    Ok(Factorization {
        psi_bc: UnitaryOp::new(space.select(&bc)?, psi)?,
        chi_ab: UnitaryOp::new(space.select(&ab)?, chi)?,
        reconstruction,
    })
}

/// Local operations with one-way quantum communication from `C` to `A` through an ancilla `B`.
///
/// `l_bc` acts on `B` and the `C` factors, `l_ab` on the `A` factors and `B`.
#[derive(Clone, Debug, Serialize)]
pub struct SemilocalisableDecomposition {
    pub system: TensorSpace,
    pub b_dim: usize,
    pub rho_b: DensityOp,
    pub l_bc: Channel,
    pub l_ab: Channel,
}

impl SemilocalisableDecomposition {
    pub fn b_label(&self) -> &str {
        &self.rho_b.space().factors()[0].label
    }

    pub fn a_labels(&self) -> Vec<&str> {
        let b = self.b_label();
        self.system.labels().into_iter().filter(|l| *l != b && self.l_ab.space_in().contains(l)).collect()
    }

    pub fn c_labels(&self) -> Vec<&str> {
        let b = self.b_label();
        self.system.labels().into_iter().filter(|l| *l != b && self.l_bc.space_in().contains(l)).collect()
    }

    /// `ρ ↦ Tr_B((L_AB ⊗ id_C)(id_A ⊗ L_BC)(ρ ⊗ ρ_B))`.
    pub fn channel(&self) -> Result<Channel, QuantumError> {
        semilocal_channel(&self.system, &self.l_bc, &self.l_ab, &self.rho_b)
    }
}

/// The semilocal composite on `system`, built from its Choi matrix.
pub fn semilocal_channel(
    system: &TensorSpace,
    l_bc: &Channel,
    l_ab: &Channel,
    rho_b: &DensityOp,
) -> Result<Channel, QuantumError> {
    let joint = system.concat(rho_b.space())?;
    let first = l_bc.embedded(&joint)?;
    let second = l_ab.embedded(&joint)?;
    let keep = system.labels();
    let d = system.dim();
    let j = try_choi(d, d, |x| {
        let y = second.apply(&first.apply(&kron(x, rho_b.mat())));
        partial_trace(&y, &joint, &keep)
    })?;
    channel_from_choi(&j, system.clone(), system.clone())
}

pub(crate) fn fresh_label(base: &str, taken: &[&str]) -> String {
    if !taken.contains(&base) {
        return base.to_string();
    }
    (1..).map(|i| format!("{base}{i}")).find(|l| !taken.contains(&l.as_str())).expect("unbounded")
}

/// Unitary on `A ⊗ B ⊗ E` sending `|ψ⟩|0⟩_E` to `Σ_f T_f|ψ⟩ ⊗ |f⟩`, with `f` written as `(b', e)`.
fn isometry_unitary(kraus: &[CMatrix], da: usize, db: usize, de: usize) -> CMatrix {
    let n = da * db * de;
    let inputs = da * db;
    let cols = CMatrix::from_fn(n, inputs, |row, i| {
        let (a_out, f) = (row / (db * de), row % (db * de));
        kraus.get(f).map_or(c(0.0, 0.0), |t| t[(a_out, i)])
    });
    let basis = orthonormalize(&cols, 1e-9);
    let fixed: Vec<(usize, DVector<Complex64>)> = (0..inputs).map(|i| (i * de, basis.column(i).into_owned())).collect();
    complete_isometry(n, &fixed)
}

/// An FV measurement whose non-selective update is the decomposition's channel.
///
/// The probe meets `gamma_c` first and `gamma_a` afterwards, between `O_A` and `O_C`. Its single
/// factor carries the ancilla together with both dilation environments.
pub fn fv_from_semilocalisable(
    d: &SemilocalisableDecomposition,
    o_a: &Diamond,
    o_c: &Diamond,
    gamma_a: &Worldline,
    gamma_c: &Worldline,
) -> Result<FvMeasurement, FvError> {
    let route = find_probe_route(o_a, o_c, gamma_a, gamma_c).ok_or(FvError::RouteNotFound)?;
    let system_labels = d.system.labels();
    let a_labels = d.a_labels();
    let c_labels = d.c_labels();
    let b_label = d.b_label().to_string();
    if a_labels.len() + c_labels.len() != system_labels.len() {
        return Err(FvError::PreconditionViolated("every system factor must belong to A or C".into()));
    }
    let mut taken = system_labels.clone();
    taken.push(&b_label);
    let e1 = fresh_label("E1", &taken);
    taken.push(&e1);
    let e2 = fresh_label("E2", &taken);
    taken.push(&e2);
    let probe_label = fresh_label("P", &taken);

    // L_BC as a unitary with environment E1.
    let dil = stinespring(&d.l_bc, &e1)?;

    // T = Tr_B ∘ L_AB with input ordered (A…, B).
    let ab_order: Vec<&str> = a_labels.iter().copied().chain([b_label.as_str()]).collect();
    let ab = d.l_ab.space_in().select(&ab_order)?;
    let a_space = d.system.select(&a_labels)?;
    let (da, db) = (a_space.dim(), d.b_dim);
    let choi = try_choi(da * db, da, |x| -> Result<CMatrix, QuantumError> {
        let (native, _) = permute(x, &ab, &d.l_ab.space_in().labels())?;
        let y = partial_trace(&d.l_ab.apply(&native), d.l_ab.space_out(), &a_labels)?;
        let order = d.l_ab.space_out().restrict(&a_labels)?;
        Ok(permute(&y, &order, &a_labels)?.0)
    })?;
    let t = kraus_from_choi(&choi, da * db, da)?;
    let de = t.len().div_ceil(db).max(1);

    let temp = d.system.concat(&TensorSpace::new([(b_label.as_str(), db), (e1.as_str(), dil.env.dim()), (e2.as_str(), de)])?)?;
    let u1 = embed(dil.u.mat(), &dil.u.space().labels(), &temp)?;
    let mut q_labels = ab_order.clone();
    q_labels.push(&e2);
    let u2 = embed(&isometry_unitary(&t, da, db, de), &q_labels, &temp)?;

    let dp = db * dil.env.dim() * de;
    let full = d.system.concat(&TensorSpace::single(&probe_label, dp))?;
    let probe_parts = [b_label.as_str(), e1.as_str(), e2.as_str()];
    let local = |u: &CMatrix, side: &[&str], rest: usize| -> Result<UnitaryOp, FvError> {
        let keep: Vec<&str> = system_labels.iter().copied().filter(|l| side.contains(l)).chain(probe_parts).collect();
        let m = partial_trace(u, &temp, &keep)?.unscale(rest as f64);
        let ordered: Vec<&str> =
            system_labels.iter().copied().filter(|l| side.contains(l)).chain([probe_label.as_str()]).collect();
        Ok(UnitaryOp::new(full.select(&ordered)?, polar_unitary(&m))?)
    };
    let c_space = d.system.select(&c_labels)?;
    let u_c = local(&u1, &c_labels, a_space.dim())?;
    let u_a = local(&u2, &a_labels, c_space.dim())?;

    let net = HybridNet::new(
        system_labels
            .iter()
            .map(|l| WorldlineSystem {
                label: l.to_string(),
                worldline: if a_labels.contains(l) { gamma_a.clone() } else { gamma_c.clone() },
                dim: d.system.dim_of(l).expect("label from the space"),
            })
            .collect(),
    )?;
    let probe_space = TensorSpace::single(&probe_label, dp);
    let unitaries: Vec<UnitaryOp> = route_crossings(&route.route, &net)?
        .iter()
        .map(|i| {
            if i.event == route.entry {
                u_c.clone()
            } else if i.event == route.exit {
                u_a.clone()
            } else {
                UnitaryOp::identity(probe_space.clone())
            }
        })
        .collect();
    let zone = route.zone();
    let theta = scattering_from_route(&route.route, &net, &probe_label, dp, &zone, &unitaries)?;

    let zero = |n: usize| matrix_unit(n, 0, 0);
    let sigma = DensityOp::new(probe_space.clone(), kron(&kron(d.rho_b.mat(), &zero(dil.env.dim())), &zero(de)))?;
    let probe = vec![WorldlineSystem { label: probe_label, worldline: route.route.clone(), dim: dp }];
    FvMeasurement::new(probe, zone, theta, sigma, Effect::identity(probe_space))
}

#[cfg(test)]
mod tests;
