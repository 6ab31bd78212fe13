//! Randomised checks of the no-signalling theorems and of the classifier itself.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::catalog::{cnot, pauli_x};
use super::{
    classify_nosignalling, decompose_semilocalisable, make_localisable, make_semilocalisable, random_channel,
    signalling_deviation, Bipartition, CausalityError, Direction,
};
use crate::fv::{
    compose_measurements, fv_from_semilocalisable, route_crossings, scattering_from_route, FvMeasurement, Interaction,
    ScatteringMorphism,
};
use crate::geometry::{
    check_causal_order, find_probe_route, int, rat, sample, sorkin_geometry_check, Constraint, Diamond, Point, Rational,
    Transform, Worldline,
};
use crate::hybrid::{HybridNet, WorldlineSystem};
use crate::quantum::{
    choi_distance, complete_isometry, identity, kron, matrix_unit, random, sqrt_psd, stinespring, CMatrix, Channel, DensityOp,
    Effect, TensorSpace, UnitaryOp,
};
use crate::Tally;

/// Tolerance of the expectation comparisons in [`verify_bfr`].
pub const BFR_TOL: f64 = 1e-10;
/// Tolerance of the FV realisation in [`verify_hybrid_equivalence`].
pub const FV_REALISATION_TOL: f64 = 1e-9;
/// Smallest deviation the unordered control must show.
pub const CONTROL_MIN: f64 = 0.49;
/// Largest sampled deviation allowed under a no-signalling verdict.
pub const SOUND_NOSIG_TOL: f64 = 1e-9;
/// Smallest witness deviation expected under a signalling verdict.
pub const SOUND_SIG_MIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BfrDims {
    pub a: usize,
    pub c: usize,
    pub probe: usize,
}

impl Default for BfrDims {
    fn default() -> Self {
        Self { a: 2, c: 2, probe: 2 }
    }
}

/// Expectation comparisons for one arrangement of the three regions.
#[derive(Clone, Debug, Serialize)]
pub struct OrderCheck {
    pub order: String,
    pub tally: Tally,
    pub max_deviation: f64,
}

impl OrderCheck {
    fn new(order: &str) -> Self {
        Self { order: order.into(), tally: Tally::default(), max_deviation: 0.0 }
    }

    fn record(&mut self, deviation: f64) {
        self.tally.check(deviation <= BFR_TOL);
        self.max_deviation = self.max_deviation.max(deviation);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BfrReport {
    pub trials: usize,
    pub seed: u64,
    pub dims: BfrDims,
    pub tolerance: f64,
    /// `max |(Γ_B∘Γ_A(ω))(c) − (Γ_B(ω))(c)|` over all trials.
    pub max_deviation: f64,
    pub violations: usize,
    pub orders: Vec<OrderCheck>,
    /// Trials whose geometry could not be arranged in a required order.
    pub geometry_failures: usize,
    /// The same comparison with Bob replaced by a controlled-NOT from `A` to `C`.
    pub control_deviation: f64,
    pub passed: bool,
}

/// Regions and worldlines of one trial, before the random transform.
struct Template {
    o_a: Diamond,
    o_c: Diamond,
    gamma_a: Worldline,
    gamma_c: Worldline,
    c_early: Diamond,
    a_late: Diamond,
    c_late: Diamond,
}

fn on_line(t: i64, x: i64) -> Diamond {
    Diamond::open(Point::ints(t, x), Point::ints(t + 1, x)).expect("timelike")
}

fn template() -> Template {
    Template {
        o_a: on_line(0, -2),
        o_c: on_line(3, 3),
        gamma_a: Worldline::stationary(int(-2)),
        gamma_c: Worldline::stationary(int(3)),
        c_early: on_line(-30, 3),
        a_late: on_line(30, -2),
        c_late: on_line(30, 3),
    }
}

fn random_transform<R: Rng>(rng: &mut R) -> Transform {
    let scales = [rat(1, 2), int(1), rat(3, 2), int(2)];
    let boosts = [rat(1, 2), rat(2, 3), int(1), rat(3, 2), int(2)];
    Transform {
        scale: scales[rng.gen_range(0..scales.len())].clone(),
        boost: boosts[rng.gen_range(0..boosts.len())].clone(),
        shift_t: sample::grid(rng, -5, 5, 4),
        shift_x: sample::grid(rng, -5, 5, 4),
    }
}

fn apply(tr: &Transform, t: &Template) -> Template {
    Template {
        o_a: tr.diamond(&t.o_a),
        o_c: tr.diamond(&t.o_c),
        gamma_a: tr.worldline(&t.gamma_a),
        gamma_c: tr.worldline(&t.gamma_c),
        c_early: tr.diamond(&t.c_early),
        a_late: tr.diamond(&t.a_late),
        c_late: tr.diamond(&t.c_late),
    }
}

/// An open diamond slightly larger than `k` that still sits between `o_a` and `o_c`.
fn enlarge(k: &Diamond, o_a: &Diamond, o_c: &Diamond) -> Option<Diamond> {
    let mut eps = (&k.top.t - &k.bottom.t) / int(64);
    let zero = int(0);
    for _ in 0..16 {
        let b = Diamond::open(k.bottom.translated(&-eps.clone(), &zero), k.top.translated(&eps, &zero)).ok()?;
        if sorkin_geometry_check(o_a, &b, o_c, 0, 0).admissible() {
            return Some(b);
        }
        eps /= int(2);
    }
    None
}

/// A diamond on `gamma_c` after it leaves the past of `o_a` and before it enters the future of `o_b`.
fn between_on(gamma_c: &Worldline, o_a: &Diamond, o_b: &Diamond) -> Option<Diamond> {
    let lo: Rational = gamma_c.span_where(&Constraint::past_of(&o_a.top, false))?.hi_value()?.clone();
    let hi: Rational = gamma_c.span_where(&Constraint::future_of(&o_b.bottom, false))?.lo_value()?.clone();
    if lo >= hi {
        return None;
    }
    let span = &hi - &lo;
    let bottom = gamma_c.point_at(&(&lo + &span / int(4)));
    let top = gamma_c.point_at(&(&lo + &span * rat(3, 4)));
    Diamond::open(bottom, top).ok()
}

/// A measurement whose probe meets `system` once, at the centre of `region`.
fn local_measurement(
    net: &HybridNet,
    system: &str,
    region: &Diamond,
    u: &UnitaryOp,
    sigma: &DensityOp,
    b: &Effect,
) -> Result<FvMeasurement, CausalityError> {
    let probe = &sigma.space().factors()[0];
    let space = net.space().concat(sigma.space())?;
    let worldline = net.system(system).expect("system on the net").worldline.clone();
    let event = region.centre();
    let theta = ScatteringMorphism::new(
        u.embedded(&space)?,
        vec![Interaction { event, labels: vec![probe.label.clone(), system.to_string()] }],
    )?;
    let probe = vec![WorldlineSystem { label: probe.label.clone(), worldline, dim: probe.dim }];
    Ok(FvMeasurement::new(probe, region.clone(), theta, sigma.clone(), b.clone())?)
}

/// `|ψ⟩|0⟩ ↦ √e|ψ⟩|0⟩ + √(1−e)|ψ⟩|1⟩` on `system ⊗ R`, so that reading `|0⟩⟨0|_R` measures `e`.
fn naimark(e: &CMatrix, system: &str, probe: &str) -> Result<UnitaryOp, CausalityError> {
    let d = e.nrows();
    let yes = sqrt_psd(e);
    let no = sqrt_psd(&(identity(d) - e));
    let fixed = (0..d)
        .map(|i| {
            let v = nalgebra::DVector::from_fn(2 * d, |row, _| {
                let (out, r) = (row / 2, row % 2);
                if r == 0 {
                    yes[(out, i)]
                } else {
                    no[(out, i)]
                }
            });
            (2 * i, v)
        })
        .collect::<Vec<_>>();
    Ok(UnitaryOp::new(TensorSpace::new([(system, d), (probe, 2)])?, complete_isometry(2 * d, &fixed))?)
}

fn expectation(rho: &CMatrix, obs: &CMatrix) -> f64 {
    (rho * obs).trace().re
}

/// `|(Γ_B∘Γ_A(ω))(1⊗c) − (Γ_B(ω))(1⊗c)|`.
fn bfr_gap(bob: &Channel, gamma_a: &Channel, omega: &CMatrix, c_obs: &CMatrix) -> f64 {
    (expectation(&bob.apply(&gamma_a.apply(omega)), c_obs) - expectation(&bob.apply(omega), c_obs)).abs()
}

/// The negative control: Bob as a controlled-NOT from `A` to `C`, with `ω = |00⟩`, `Γ_A = X`, `c = |0⟩⟨0|`.
pub fn unordered_control() -> Result<f64, CausalityError> {
    let space = TensorSpace::qubits(&["A", "C"]);
    let bob = cnot("A", "C")?;
    let flip = Channel::on(TensorSpace::single("A", 2), vec![pauli_x()])?.embedded(&space)?;
    let omega = DensityOp::basis(space, &[0, 0])?;
    let c_obs = kron(&identity(2), &matrix_unit(2, 0, 0));
    Ok(bfr_gap(&bob, &flip, omega.mat(), &c_obs))
}

/// Randomised check that an FV measurement between `O_A` and `O_C` does not let Alice signal to Charlie.
pub fn verify_bfr(trials: usize, seed: u64, dims: BfrDims) -> Result<BfrReport, CausalityError> {
    let mut rng = random::rng(seed);
    let mut max_deviation: f64 = 0.0;
    let mut violations = 0;
    let mut geometry_failures = 0;
    let mut orders = vec![OrderCheck::new("A<B<C"), OrderCheck::new("C<A<B"), OrderCheck::new("A<C<B"), OrderCheck::new("B<A<C")];

    for _ in 0..trials {
        let g = apply(&random_transform(&mut rng), &template());
        let Some(route) = find_probe_route(&g.o_a, &g.o_c, &g.gamma_a, &g.gamma_c) else {
            geometry_failures += 1;
            continue;
        };
        let zone = route.zone();
        let Some(o_b) = enlarge(&zone, &g.o_a, &g.o_c) else {
            geometry_failures += 1;
            continue;
        };
        let Some(c_mid) = between_on(&g.gamma_c, &g.o_a, &o_b) else {
            geometry_failures += 1;
            continue;
        };

        let net = HybridNet::new(vec![
            WorldlineSystem { label: "A".into(), worldline: g.gamma_a.clone(), dim: dims.a },
            WorldlineSystem { label: "C".into(), worldline: g.gamma_c.clone(), dim: dims.c },
        ])?;
        let space = net.space().clone();

        let p_space = TensorSpace::single("P", dims.probe);
        let unitaries: Vec<UnitaryOp> = route_crossings(&route.route, &net)?
            .iter()
            .map(|i| {
                let mut factors = vec![("P".to_string(), dims.probe)];
                factors.extend(i.labels.iter().map(|l| (l.clone(), space.dim_of(l).expect("net label"))));
                Ok(random::unitary(&mut rng, &TensorSpace::new(factors)?))
            })
            .collect::<Result<_, CausalityError>>()?;
        let theta = scattering_from_route(&route.route, &net, "P", dims.probe, &zone, &unitaries)?;
        let sigma = random::state(&mut rng, &p_space);
        let b = random::effect(&mut rng, &p_space);
        let probe = vec![WorldlineSystem { label: "P".into(), worldline: route.route.clone(), dim: dims.probe }];
        let bob = FvMeasurement::new(probe, o_b.clone(), theta, sigma, b)?;

        let a_space = TensorSpace::single("A", dims.a);
        let gamma_a = random_channel(&mut rng, &a_space, 2);
        let dil = stinespring(&gamma_a, "Q")?;
        let idle = UnitaryOp::identity(dil.u.space().clone());
        let q_one = Effect::identity(dil.tau.space().clone());
        let omega = random::state(&mut rng, &space);
        let c_eff = random::effect(&mut rng, &TensorSpace::single("C", dims.c));
        let c_obs = kron(&identity(dims.a), c_eff.mat());
        let reader = naimark(c_eff.mat(), "C", "R")?;
        let r_zero = DensityOp::basis(TensorSpace::single("R", 2), &[0])?;
        let r_yes = Effect::new(TensorSpace::single("R", 2), matrix_unit(2, 0, 0))?;

        let deviation = bfr_gap(&bob.channel()?, &gamma_a.embedded(&space)?, omega.mat(), &c_obs);
        max_deviation = max_deviation.max(deviation);
        if deviation > BFR_TOL {
            violations += 1;
        }

        let alice = |region: &Diamond, u: &UnitaryOp| local_measurement(&net, "A", region, u, &dil.tau, &q_one);
        let charlie = |region: &Diamond| local_measurement(&net, "C", region, &reader, &r_zero, &r_yes);
        let arrangements: [(Vec<FvMeasurement>, Vec<FvMeasurement>, usize); 4] = [
            (
                vec![alice(&g.o_a, &dil.u)?, bob.clone(), charlie(&g.o_c)?],
                vec![alice(&g.o_a, &idle)?, bob.clone(), charlie(&g.o_c)?],
                2,
            ),
            (
                vec![charlie(&g.c_early)?, alice(&g.o_a, &dil.u)?, bob.clone()],
                vec![charlie(&g.c_early)?, alice(&g.o_a, &idle)?, bob.clone()],
                0,
            ),
            (
                vec![alice(&g.o_a, &dil.u)?, charlie(&c_mid)?, bob.clone()],
                vec![alice(&g.o_a, &idle)?, charlie(&c_mid)?, bob.clone()],
                1,
            ),
            (
                vec![bob.clone(), alice(&g.a_late, &dil.u)?, charlie(&g.c_late)?],
                vec![bob.clone(), alice(&g.a_late, &idle)?, charlie(&g.c_late)?],
                2,
            ),
        ];
        for (k, (with, without, reader_at)) in arrangements.iter().enumerate() {
            let zones: Vec<Diamond> = with.iter().map(|m| m.zone.clone()).collect();
            if !check_causal_order(&zones) {
                geometry_failures += 1;
                continue;
            }
            let e_with = compose_measurements(with, &omega)?.expectations[*reader_at];
            let e_without = compose_measurements(without, &omega)?.expectations[*reader_at];
            orders[k].record((e_with - e_without).abs());
            if k == 2 {
                orders[k].record((e_with - expectation(omega.mat(), &c_obs)).abs());
            }
        }
    }

    let control_deviation = unordered_control()?;
    let passed =
        violations == 0 && geometry_failures == 0 && orders.iter().all(|o| o.tally.passed()) && control_deviation >= CONTROL_MIN;
    Ok(BfrReport {
        trials,
        seed,
        dims,
        tolerance: BFR_TOL,
        max_deviation,
        violations,
        orders,
        geometry_failures,
        control_deviation,
        passed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HybridDims {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl Default for HybridDims {
    fn default() -> Self {
        Self { a: 2, b: 2, c: 2 }
    }
}

/// Regions and worldlines for Alice and Charlie.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HybridGeometry {
    pub o_a: Diamond,
    pub o_c: Diamond,
    pub gamma_a: Worldline,
    pub gamma_c: Worldline,
}

impl Default for HybridGeometry {
    fn default() -> Self {
        let t = template();
        Self { o_a: t.o_a, o_c: t.o_c, gamma_a: t.gamma_a, gamma_c: t.gamma_c }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HybridTrial {
    pub classified_nosig: bool,
    pub b_dim: Option<usize>,
    pub reconstruction: Option<f64>,
    pub fv_distance: Option<f64>,
}

impl HybridTrial {
    pub fn passed(&self) -> bool {
        self.classified_nosig
            && self.reconstruction.is_some_and(|r| r <= super::RECONSTRUCTION_TOL)
            && self.fv_distance.is_some_and(|d| d <= FV_REALISATION_TOL)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HybridReport {
    pub trials: usize,
    pub seed: u64,
    pub dims: HybridDims,
    pub hypothesis_met: bool,
    pub classification: Tally,
    pub decomposition: Tally,
    pub realisation: Tally,
    pub max_reconstruction: f64,
    pub max_fv_distance: f64,
    pub controls: usize,
    pub controls_flagged: usize,
    pub controls_certified: usize,
    pub passed: bool,
}

/// Runs the three legs of the equivalence on one channel.
pub fn hybrid_trial(ch: &Channel, p: &Bipartition, geometry: &HybridGeometry) -> Result<HybridTrial, CausalityError> {
    let report = classify_nosignalling(ch, p)?;
    let mut trial = HybridTrial { classified_nosig: report.nosig_a_to_c, b_dim: None, reconstruction: None, fv_distance: None };
    let d = match decompose_semilocalisable(ch, p) {
        Ok(d) => d,
        Err(CausalityError::CertifiedFailure(_)) => return Ok(trial),
        Err(e) => return Err(e),
    };
    trial.b_dim = Some(d.b_dim);
    trial.reconstruction = Some(choi_distance(&d.channel()?, ch)?);
    let m = fv_from_semilocalisable(&d, &geometry.o_a, &geometry.o_c, &geometry.gamma_a, &geometry.gamma_c)?;
    trial.fv_distance = Some(choi_distance(&m.channel()?, ch)?);
    Ok(trial)
}

/// A random channel built from local operations and one-way communication from `C` to `A`.
pub fn random_semilocalisable<R: Rng>(rng: &mut R, dims: HybridDims) -> Result<Channel, CausalityError> {
    let l_bc = random_channel(rng, &TensorSpace::new([("B", dims.b), ("C", dims.c)])?, 2);
    let l_ab = random_channel(rng, &TensorSpace::new([("A", dims.a), ("B", dims.b)])?, 2);
    let rho_b = random::state(rng, &TensorSpace::single("B", dims.b));
    make_semilocalisable(&l_bc, &l_ab, &rho_b)
}

/// Semilocalisable channels pass all three legs; signalling unitaries are rejected with a certified failure.
pub fn verify_hybrid_equivalence(
    trials: usize,
    controls: usize,
    seed: u64,
    dims: HybridDims,
    geometry: &HybridGeometry,
) -> Result<HybridReport, CausalityError> {
    let mut report = HybridReport {
        trials,
        seed,
        dims,
        hypothesis_met: find_probe_route(&geometry.o_a, &geometry.o_c, &geometry.gamma_a, &geometry.gamma_c).is_some(),
        classification: Tally::new(trials),
        decomposition: Tally::new(trials),
        realisation: Tally::new(trials),
        max_reconstruction: 0.0,
        max_fv_distance: 0.0,
        controls,
        controls_flagged: 0,
        controls_certified: 0,
        passed: false,
    };
    if !report.hypothesis_met {
        return Ok(report);
    }
    let p = Bipartition::new(["A"], ["C"])?;
    let mut rng = random::rng(seed);
    for _ in 0..trials {
        let ch = random_semilocalisable(&mut rng, dims)?;
        let t = hybrid_trial(&ch, &p, geometry)?;
        report.classification.check(t.classified_nosig);
        report.decomposition.check(t.reconstruction.is_some_and(|r| r <= super::RECONSTRUCTION_TOL));
        report.realisation.check(t.fv_distance.is_some_and(|d| d <= FV_REALISATION_TOL));
        report.max_reconstruction = report.max_reconstruction.max(t.reconstruction.unwrap_or(f64::INFINITY));
        report.max_fv_distance = report.max_fv_distance.max(t.fv_distance.unwrap_or(f64::INFINITY));
    }

    let space = TensorSpace::new([("A", dims.a), ("C", dims.c)])?;
    let mut attempts = 0;
    while report.controls_flagged < controls && attempts < 10 * controls.max(1) {
        attempts += 1;
        let ch = Channel::unitary(&random::unitary(&mut rng, &space));
        if classify_nosignalling(&ch, &p)?.nosig_a_to_c {
            continue;
        }
        report.controls_flagged += 1;
        if let Err(CausalityError::CertifiedFailure(_)) = decompose_semilocalisable(&ch, &p) {
            report.controls_certified += 1;
        }
    }
    report.passed = report.classification.passed()
        && report.decomposition.passed()
        && report.realisation.passed()
        && report.controls_flagged == controls
        && report.controls_certified == controls;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct SoundnessReport {
    pub channels: usize,
    pub samples: usize,
    pub nosig_verdicts: usize,
    pub signalling_verdicts: usize,
    /// Largest sampled deviation in a direction classified no-signalling.
    pub max_nosig_sample: f64,
    /// Smallest witness deviation in a direction classified signalling.
    pub min_signalling_witness: f64,
    pub contradictions: usize,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.contradictions == 0 && self.channels > 0
    }
}

/// Test channels drawn in rotation from semilocal (both directions), localisable and generic families.
fn soundness_channel<R: Rng>(rng: &mut R, k: usize) -> Result<Channel, CausalityError> {
    let dims = HybridDims::default();
    let ch = match k % 5 {
        0 => random_semilocalisable(rng, dims)?,
        1 => {
            let l_ba = random_channel(rng, &TensorSpace::qubits(&["B", "A"]), 2);
            let l_cb = random_channel(rng, &TensorSpace::qubits(&["C", "B"]), 2);
            let rho_b = random::state(rng, &TensorSpace::single("B", 2));
            let ch = make_semilocalisable(&l_ba, &l_cb, &rho_b)?;
            let (space, order) = (TensorSpace::qubits(&["A", "C"]), ["A", "C"]);
            let kraus = super::reordered_kraus(&ch, &order)?;
            Channel::on(space, kraus)?
        }
        2 => {
            let l_ar = random_channel(rng, &TensorSpace::qubits(&["A", "R"]), 2);
            let l_cs = random_channel(rng, &TensorSpace::qubits(&["C", "S"]), 2);
            let rho_rs = random::state(rng, &TensorSpace::qubits(&["R", "S"]));
            make_localisable(&l_ar, &l_cs, &rho_rs)?
        }
        3 => Channel::unitary(&random::unitary(rng, &TensorSpace::qubits(&["A", "C"]))),
        _ => random_channel(rng, &TensorSpace::qubits(&["A", "C"]), 3),
    };
    Ok(ch)
}

/// Compares classifier verdicts with direct probing by random prior operations and states.
pub fn classifier_soundness(channels: usize, samples: usize, seed: u64) -> Result<SoundnessReport, CausalityError> {
    let mut rng = random::rng(seed);
    let p = Bipartition::new(["A"], ["C"])?;
    let mut report = SoundnessReport {
        channels,
        samples,
        nosig_verdicts: 0,
        signalling_verdicts: 0,
        max_nosig_sample: 0.0,
        min_signalling_witness: f64::INFINITY,
        contradictions: 0,
    };
    for k in 0..channels {
        let ch = soundness_channel(&mut rng, k)?;
        let verdict = classify_nosignalling(&ch, &p)?;
        for (direction, witness) in [(Direction::AToC, &verdict.witness_a_to_c), (Direction::CToA, &verdict.witness_c_to_a)] {
            let (sender, _) = direction.sides(&p);
            let s_space = ch.space_in().select(&sender)?;
            let mut sampled: f64 = 0.0;
            for _ in 0..samples {
                let lambda = random_channel(&mut rng, &s_space, 3);
                let rho = random::state(&mut rng, ch.space_in());
                sampled = sampled.max(signalling_deviation(&ch, &p, direction, &lambda, &rho)?);
            }
            match witness {
                None => {
                    report.nosig_verdicts += 1;
                    report.max_nosig_sample = report.max_nosig_sample.max(sampled);
                    if sampled > SOUND_NOSIG_TOL {
                        report.contradictions += 1;
                    }
                }
                Some(w) => {
                    report.signalling_verdicts += 1;
                    report.min_signalling_witness = report.min_signalling_witness.min(w.deviation);
                    if w.deviation <= SOUND_SIG_MIN {
                        report.contradictions += 1;
                    }
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct HierarchyReport {
    /// Localisable channels classified no-signalling both ways.
    pub localisable: Tally,
    /// Semilocalisable channels classified no-signalling from `A` to `C`.
    pub semilocalisable: Tally,
}

impl HierarchyReport {
    pub fn passed(&self) -> bool {
        self.localisable.passed() && self.semilocalisable.passed()
    }
}

pub fn hierarchy(trials: usize, seed: u64) -> Result<HierarchyReport, CausalityError> {
    let mut rng = random::rng(seed);
    let p = Bipartition::new(["A"], ["C"])?;
    let mut report = HierarchyReport { localisable: Tally::new(trials), semilocalisable: Tally::new(trials) };
    for _ in 0..trials {
        let loc = soundness_channel(&mut rng, 2)?;
        let v = classify_nosignalling(&loc, &p)?;
        report.localisable.check(v.nosig_a_to_c && v.nosig_c_to_a);
        let semi = random_semilocalisable(&mut rng, HybridDims::default())?;
        report.semilocalisable.check(classify_nosignalling(&semi, &p)?.nosig_a_to_c);
    }
    Ok(report)
}
