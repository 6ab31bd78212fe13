//! One function per command; each returns a serialisable result and whether its assertions held.

use std::fmt::Display;

use causal_core::causality::harness::{self, BfrDims, HybridDims, HybridGeometry};
use causal_core::causality::{
    classify_nosignalling, decompose_semilocalisable, replay_witness, run_sorkin, Alternative, Bipartition, CausalityError,
    CausalityReport, CertifiedFailure, Direction, SorkinReport, SorkinScenario, NOSIG_TOL, RECONSTRUCTION_TOL,
};
use causal_core::fv::{compose_measurements, suite as fv_suite, Composition, Interaction};
use causal_core::geometry::{
    causally_disjoint, check_causal_order, cover_segment, find_probe_route, future_envelope, int, past_envelope,
    separating_cauchy_surface, sorkin_geometry_check, suite as geometry_suite, validate_cover, worldline_intersections,
    CauchyGraph, CoverValidation, Diamond, Point, ProbeRoute, Rational, SorkinGeometryReport, SpacelikeInterval,
};
use causal_core::hybrid::{interval_labels, net_axiom_check, region_labels};
use causal_core::quantum::{choi_distance, serde_cmatrix, Channel};
use serde::Serialize;

use crate::scenario::{ClassifyTarget, Region, Resolved, Verdict};
use crate::InputError;

/// Largest Charlie-state distance tolerated when Bob's operation does not signal.
pub const SORKIN_NOSIG_TOL: f64 = 1e-10;
/// Largest change from reordering spacelike separated measurements.
pub const SWAP_TOL: f64 = 1e-10;
/// Abscissae sampled per separating Cauchy surface.
pub const CAUCHY_SAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyTarget {
    Bfr,
    Hybrid,
    Axioms,
    Geometry,
    Fv,
    Factorisation,
    Soundness,
    Hierarchy,
}

impl VerifyTarget {
    pub fn name(self) -> &'static str {
        match self {
            VerifyTarget::Bfr => "bfr",
            VerifyTarget::Hybrid => "hybrid",
            VerifyTarget::Axioms => "axioms",
            VerifyTarget::Geometry => "geometry",
            VerifyTarget::Fv => "fv",
            VerifyTarget::Factorisation => "factorisation",
            VerifyTarget::Soundness => "soundness",
            VerifyTarget::Hierarchy => "hierarchy",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            VerifyTarget::Bfr => 200,
            VerifyTarget::Hybrid => 50,
            VerifyTarget::Axioms | VerifyTarget::Fv | VerifyTarget::Factorisation => 100,
            VerifyTarget::Geometry => 10_000,
            VerifyTarget::Soundness => 50,
            VerifyTarget::Hierarchy => 20,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    CheckGeometry,
    ClassifyChannel,
    Sorkin,
    SimulateFv,
    Verify(VerifyTarget),
}

impl Command {
    pub fn name(self) -> String {
        match self {
            Command::CheckGeometry => "check-geometry".into(),
            Command::ClassifyChannel => "classify-channel".into(),
            Command::Sorkin => "sorkin".into(),
            Command::SimulateFv => "simulate-fv".into(),
            Command::Verify(t) => format!("verify {}", t.name()),
        }
    }

    pub fn needs_scenario(self) -> bool {
        !matches!(
            self,
            Command::Verify(
                VerifyTarget::Bfr
                    | VerifyTarget::Hybrid
                    | VerifyTarget::Geometry
                    | VerifyTarget::Fv
                    | VerifyTarget::Factorisation
                    | VerifyTarget::Soundness
                    | VerifyTarget::Hierarchy
            )
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Options {
    pub seed: u64,
    pub trials: Option<usize>,
}

pub struct Outcome {
    pub passed: bool,
    pub result: serde_json::Value,
}

impl Outcome {
    fn new<T: Serialize>(passed: bool, result: &T) -> Self {
        Self { passed, result: serde_json::to_value(result).expect("results serialize") }
    }
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> InputError {
    InputError::Invalid { path: path.into(), message: message.into() }
}

fn failed<E: Display>(path: &'static str) -> impl Fn(E) -> InputError {
    move |e| invalid(path, e.to_string())
}

fn missing(section: &str) -> InputError {
    invalid(format!("commands.{section}"), "section is required by this command")
}

pub fn execute(command: Command, scenario: Option<&Resolved>, options: Options) -> Result<Outcome, InputError> {
    let need = || scenario.ok_or_else(|| InputError::Usage(format!("`{}` needs a scenario file", command.name())));
    match command {
        Command::CheckGeometry => check_geometry(need()?, options),
        Command::ClassifyChannel => classify_channel(need()?),
        Command::Sorkin => sorkin(need()?, options),
        Command::SimulateFv => simulate_fv(need()?),
        Command::Verify(target) => verify(target, scenario, options),
    }
}

#[derive(Serialize)]
struct RegionPair {
    first: String,
    second: String,
    causally_disjoint: bool,
    first_before_second: bool,
    second_before_first: bool,
}

#[derive(Serialize)]
struct RegionSystems {
    region: String,
    systems: Vec<String>,
}

#[derive(Serialize)]
struct Crossings {
    first: String,
    second: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<Vec<Point>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct OrderCheck {
    regions: Vec<String>,
    holds: bool,
}

#[derive(Serialize)]
struct CauchyCheck {
    past: String,
    future: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    surface: Option<CauchyGraph>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    lipschitz: bool,
    samples: usize,
    envelope_violations: usize,
}

impl CauchyCheck {
    fn ok(&self) -> bool {
        self.surface.is_some() && self.lipschitz && self.envelope_violations == 0
    }
}

#[derive(Serialize)]
struct CoverCheck {
    gamma: String,
    delta: String,
    zone: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    intervals: Option<Vec<SpacelikeInterval>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation: Option<CoverValidation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct RouteCheck {
    o_a: String,
    o_c: String,
    gamma_a: String,
    gamma_c: String,
    route: Option<ProbeRoute>,
}

#[derive(Serialize)]
struct GeometryResult {
    pairs: Vec<RegionPair>,
    region_systems: Vec<RegionSystems>,
    crossings: Vec<Crossings>,
    causal_order: Vec<OrderCheck>,
    cauchy: Vec<CauchyCheck>,
    covers: Vec<CoverCheck>,
    routes: Vec<RouteCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sorkin: Option<SorkinGeometryReport>,
}

/// `count + 1` evenly spaced abscissae from `lo` to `hi`.
fn grid(lo: &Rational, hi: &Rational, count: usize) -> Vec<Rational> {
    let n = int(count as i64);
    (0..=count).map(|i| lo + (hi - lo) * int(i as i64) / &n).collect()
}

fn cauchy_check(past: &str, future: &str, k: &Diamond, l: &Diamond) -> CauchyCheck {
    let mut check = CauchyCheck {
        past: past.into(),
        future: future.into(),
        surface: None,
        error: None,
        lipschitz: false,
        samples: 0,
        envelope_violations: 0,
    };
    match separating_cauchy_surface(k, l) {
        Ok(g) => {
            let reach = [&k.bottom, &k.top, &l.bottom, &l.top]
                .iter()
                .flat_map(|p| [p.x.clone(), p.t.clone()])
                .map(|q| if q < int(0) { -q } else { q })
                .max()
                .unwrap_or_else(|| int(0))
                + int(1);
            let mut xs: Vec<Rational> = g.breakpoints.iter().map(|p| p.x.clone()).collect();
            xs.extend(grid(&(-&reach * int(2)), &(&reach * int(2)), CAUCHY_SAMPLES - 1));
            check.samples = xs.len();
            check.envelope_violations = xs
                .iter()
                .filter(|x| {
                    let f = g.eval(x);
                    !(past_envelope(k, x) < f && f < future_envelope(l, x))
                })
                .count();
            check.lipschitz = g.is_lipschitz();
            check.surface = Some(g);
        }
        Err(e) => check.error = Some(e.to_string()),
    }
    check
}

fn check_geometry(res: &Resolved, options: Options) -> Result<Outcome, InputError> {
    let spec = res.scenario.commands.check_geometry.clone().unwrap_or_default();
    let diamonds: Vec<(&str, &Diamond)> = res
        .regions
        .iter()
        .filter_map(|(n, r)| match r {
            Region::Diamond(d) => Some((n.as_str(), d)),
            Region::Interval(_) => None,
        })
        .collect();

    let mut pairs = Vec::new();
    for (i, (a, da)) in diamonds.iter().enumerate() {
        for (b, db) in &diamonds[i + 1..] {
            pairs.push(RegionPair {
                first: a.to_string(),
                second: b.to_string(),
                causally_disjoint: causally_disjoint(da, db),
                first_before_second: check_causal_order(&[(*da).clone(), (*db).clone()]),
                second_before_first: check_causal_order(&[(*db).clone(), (*da).clone()]),
            });
        }
    }

    let region_systems = res
        .regions
        .iter()
        .map(|(n, r)| RegionSystems {
            region: n.clone(),
            systems: match r {
                Region::Diamond(d) => region_labels(&res.net, d),
                Region::Interval(iv) => interval_labels(&res.net, iv),
            },
        })
        .collect();

    let systems = res.net.systems();
    let mut crossings = Vec::new();
    for (i, a) in systems.iter().enumerate() {
        for b in &systems[i + 1..] {
            let found = worldline_intersections(&a.worldline, &b.worldline);
            crossings.push(Crossings {
                first: a.label.clone(),
                second: b.label.clone(),
                error: found.as_ref().err().map(ToString::to_string),
                points: found.ok(),
            });
        }
    }

    let mut causal_order = Vec::new();
    for (i, names) in spec.causal_order.iter().enumerate() {
        let regions = names
            .iter()
            .enumerate()
            .map(|(k, n)| res.diamond(&format!("commands.check_geometry.causal_order[{i}][{k}]"), n).cloned())
            .collect::<Result<Vec<_>, _>>()?;
        causal_order.push(OrderCheck { regions: names.clone(), holds: check_causal_order(&regions) });
    }

    let mut cauchy = Vec::new();
    for (i, [k, l]) in spec.cauchy.iter().enumerate() {
        let path = format!("commands.check_geometry.cauchy[{i}]");
        cauchy.push(cauchy_check(k, l, res.diamond(&path, k)?, res.diamond(&path, l)?));
    }

    let mut covers = Vec::new();
    for (i, c) in spec.covers.iter().enumerate() {
        let path = format!("commands.check_geometry.covers[{i}]");
        let gamma = res.system_worldline(&format!("{path}.gamma"), &c.gamma)?;
        let delta = res.system_worldline(&format!("{path}.delta"), &c.delta)?;
        let zone = res.diamond(&format!("{path}.zone"), &c.zone)?;
        let mut check = CoverCheck {
            gamma: c.gamma.clone(),
            delta: c.delta.clone(),
            zone: c.zone.clone(),
            intervals: None,
            validation: None,
            error: None,
        };
        match cover_segment(gamma, delta, zone) {
            Ok(ivs) => {
                check.validation = Some(validate_cover(gamma, delta, zone, &ivs));
                check.intervals = Some(ivs);
            }
            Err(e) => check.error = Some(e.to_string()),
        }
        covers.push(check);
    }

    let mut routes = Vec::new();
    for (i, r) in spec.routes.iter().enumerate() {
        let path = format!("commands.check_geometry.routes[{i}]");
        let route = find_probe_route(
            res.diamond(&format!("{path}.o_a"), &r.o_a)?,
            res.diamond(&format!("{path}.o_c"), &r.o_c)?,
            res.system_worldline(&format!("{path}.gamma_a"), &r.gamma_a)?,
            res.system_worldline(&format!("{path}.gamma_c"), &r.gamma_c)?,
        );
        routes.push(RouteCheck {
            o_a: r.o_a.clone(),
            o_c: r.o_c.clone(),
            gamma_a: r.gamma_a.clone(),
            gamma_c: r.gamma_c.clone(),
            route,
        });
    }

    let sorkin = match &spec.sorkin {
        Some([a, b, c]) => {
            let path = "commands.check_geometry.sorkin";
            let (a, b, c) = (res.diamond(path, a)?, res.diamond(path, b)?, res.diamond(path, c)?);
            Some(sorkin_geometry_check(a, b, c, spec.samples, options.seed))
        }
        None => None,
    };

    let passed = causal_order.iter().all(|o| o.holds)
        && cauchy.iter().all(CauchyCheck::ok)
        && covers.iter().all(|c| c.validation.is_some_and(|v| v.ok()))
        && routes.iter().all(|r| r.route.is_some())
        && sorkin.as_ref().is_none_or(SorkinGeometryReport::admissible);
    let result = GeometryResult { pairs, region_systems, crossings, causal_order, cauchy, covers, routes, sorkin };
    Ok(Outcome::new(passed, &result))
}

#[derive(Serialize)]
struct Decomposed {
    b_dim: usize,
    reconstruction: f64,
}

#[derive(Serialize)]
struct Classified {
    channel: String,
    classification: CausalityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    replay_a_to_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    replay_c_to_a: Option<f64>,
    expectations_met: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    decomposition: Option<Decomposed>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certified_failure: Option<CertifiedFailure>,
}

impl Classified {
    fn passed(&self) -> bool {
        let replays = [
            (&self.classification.witness_a_to_c, self.replay_a_to_c),
            (&self.classification.witness_c_to_a, self.replay_c_to_a),
        ];
        self.expectations_met
            && replays.iter().all(|(w, r)| match (w, r) {
                (Some(w), Some(r)) => (w.deviation - r).abs() <= NOSIG_TOL,
                _ => true,
            })
            && self.certified_failure.is_none()
            && self.decomposition.as_ref().is_none_or(|d| d.reconstruction <= RECONSTRUCTION_TOL)
    }
}

fn verdict(nosig: bool) -> Verdict {
    if nosig {
        Verdict::NoSignalling
    } else {
        Verdict::Signalling
    }
}

fn classify_one(ch: &Channel, p: &Bipartition, target: &ClassifyTarget, decompose: bool) -> Result<Classified, CausalityError> {
    let report = classify_nosignalling(ch, p)?;
    let replay = |direction, w: &Option<_>| w.as_ref().map(|w| replay_witness(ch, p, direction, w)).transpose();
    let replay_a_to_c = replay(Direction::AToC, &report.witness_a_to_c)?;
    let replay_c_to_a = replay(Direction::CToA, &report.witness_c_to_a)?;
    let expectations_met = target.expect_a_to_c.is_none_or(|v| v == verdict(report.nosig_a_to_c))
        && target.expect_c_to_a.is_none_or(|v| v == verdict(report.nosig_c_to_a));
    let (mut decomposition, mut certified_failure) = (None, None);
    if decompose && report.nosig_a_to_c {
        match decompose_semilocalisable(ch, p) {
            Ok(d) => {
                let rebuilt = d.channel()?;
                decomposition = Some(Decomposed { b_dim: d.b_dim, reconstruction: choi_distance(&rebuilt, ch)? });
            }
            Err(CausalityError::CertifiedFailure(f)) => certified_failure = Some(*f),
            Err(e) => return Err(e),
        }
    }
    Ok(Classified {
        channel: target.channel.clone(),
        classification: report,
        replay_a_to_c,
        replay_c_to_a,
        expectations_met,
        decomposition,
        certified_failure,
    })
}

fn classify_channel(res: &Resolved) -> Result<Outcome, InputError> {
    let spec = res.scenario.commands.classify_channel.as_ref().ok_or_else(|| missing("classify_channel"))?;
    let p = Bipartition::new(spec.a.clone(), spec.c.clone()).map_err(failed("commands.classify_channel"))?;
    let mut results = Vec::with_capacity(spec.targets.len());
    for (i, t) in spec.targets.iter().enumerate() {
        let path = format!("commands.classify_channel.targets[{i}]");
        let ch = res.channel(&format!("{path}.channel"), &t.channel)?;
        results.push(classify_one(ch, &p, t, spec.decompose).map_err(|e| invalid(&path, e.to_string()))?);
    }
    let passed = results.iter().all(Classified::passed);
    Ok(Outcome::new(passed, &results))
}

#[derive(Serialize)]
struct SorkinResult {
    bob_operation: String,
    bob_classification: CausalityReport,
    /// Charlie-state distance allowed when Bob's operation does not signal from Alice to Charlie.
    tolerance: f64,
    sorkin: SorkinReport,
}

fn sorkin(res: &Resolved, options: Options) -> Result<Outcome, InputError> {
    let spec = res.scenario.commands.sorkin.as_ref().ok_or_else(|| missing("sorkin"))?;
    let alice = res.party("commands.sorkin.alice", &spec.alice)?;
    let bob = res.party("commands.sorkin.bob", &spec.bob)?;
    let charlie = res.party("commands.sorkin.charlie", &spec.charlie)?;
    let omega = res.state("commands.sorkin.state", &spec.state)?;
    let (bob_name, bob_op) = bob
        .operation
        .as_ref()
        .ok_or_else(|| invalid("commands.sorkin.bob", format!("party `{}` declares no operation", bob.label)))?;
    let bob_channel = if bob_op.space_in() == omega.space() {
        bob_op.clone()
    } else {
        bob_op.embedded(omega.space()).map_err(failed("commands.sorkin.bob"))?
    };
    let partition = Bipartition::new(alice.factors.clone(), charlie.factors.clone()).map_err(failed("commands.sorkin"))?;
    let bob_classification = classify_nosignalling(&bob_channel, &partition).map_err(failed("commands.sorkin.bob"))?;
    let scenario = SorkinScenario {
        o_a: alice.region.clone(),
        o_b: bob.region.clone(),
        o_c: charlie.region.clone(),
        partition,
        omega: omega.clone(),
        alternatives: alice
            .alternatives
            .iter()
            .map(|(name, channel)| Alternative { name: name.clone(), channel: channel.clone() })
            .collect(),
        bob: bob_channel,
    };
    let report = run_sorkin(&scenario, spec.samples, options.seed).map_err(failed("commands.sorkin"))?;
    let passed = !bob_classification.nosig_a_to_c || report.max_distance <= SORKIN_NOSIG_TOL;
    let result =
        SorkinResult { bob_operation: bob_name.clone(), bob_classification, tolerance: SORKIN_NOSIG_TOL, sorkin: report };
    Ok(Outcome::new(passed, &result))
}

#[derive(Serialize)]
struct MeasurementSummary {
    name: String,
    zone: Diamond,
    interactions: Vec<Interaction>,
    selective: bool,
    #[serde(serialize_with = "rows")]
    induced_observable: causal_core::quantum::CMatrix,
}

fn rows<S: serde::Serializer>(m: &causal_core::quantum::CMatrix, s: S) -> Result<S::Ok, S::Error> {
    serde_cmatrix::serialize(m, s)
}

#[derive(Serialize)]
struct Simulation {
    measurements: Vec<MeasurementSummary>,
    composition: Composition,
    swap_tolerance: f64,
}

fn simulate_fv(res: &Resolved) -> Result<Outcome, InputError> {
    let spec = res.scenario.commands.simulate_fv.as_ref().ok_or_else(|| missing("simulate_fv"))?;
    let omega = res.state("commands.simulate_fv.state", &spec.state)?;
    let mut measurements = Vec::with_capacity(spec.measurements.len());
    let mut summaries = Vec::with_capacity(spec.measurements.len());
    for (i, name) in spec.measurements.iter().enumerate() {
        let m = res.measurement(&format!("commands.simulate_fv.measurements[{i}]"), name)?;
        summaries.push(MeasurementSummary {
            name: name.clone(),
            zone: m.zone.clone(),
            interactions: m.theta.interactions().to_vec(),
            selective: !m.is_nonselective(),
            induced_observable: m.induced_observable().map_err(failed("commands.simulate_fv"))?,
        });
        measurements.push(m.clone());
    }
    let composition = compose_measurements(&measurements, omega).map_err(failed("commands.simulate_fv"))?;
    let passed = composition.swap_deviation <= SWAP_TOL;
    Ok(Outcome::new(passed, &Simulation { measurements: summaries, composition, swap_tolerance: SWAP_TOL }))
}

fn hybrid_geometry(res: Option<&Resolved>) -> Result<HybridGeometry, InputError> {
    let Some(res) = res else { return Ok(HybridGeometry::default()) };
    let Some(spec) = &res.scenario.commands.verify.hybrid else { return Ok(HybridGeometry::default()) };
    let mut g = HybridGeometry::default();
    if let Some([a, c]) = &spec.regions {
        g.o_a = res.diamond("commands.verify.hybrid.regions[0]", a)?.clone();
        g.o_c = res.diamond("commands.verify.hybrid.regions[1]", c)?.clone();
    }
    if let Some([a, c]) = &spec.worldlines {
        g.gamma_a = res.system_worldline("commands.verify.hybrid.worldlines[0]", a)?.clone();
        g.gamma_c = res.system_worldline("commands.verify.hybrid.worldlines[1]", c)?.clone();
    }
    Ok(g)
}

fn verify(target: VerifyTarget, res: Option<&Resolved>, options: Options) -> Result<Outcome, InputError> {
    let trials = options.trials.unwrap_or(target.default_trials());
    let seed = options.seed;
    let verify_spec = res.map(|r| r.scenario.commands.verify.clone()).unwrap_or_default();
    match target {
        VerifyTarget::Bfr => {
            let dims = verify_spec.bfr.map_or_else(BfrDims::default, |b| BfrDims { a: b.a, c: b.c, probe: b.probe });
            let r = harness::verify_bfr(trials, seed, dims).map_err(failed("verify bfr"))?;
            Ok(Outcome::new(r.passed, &r))
        }
        VerifyTarget::Hybrid => {
            let (controls, dims) = match &verify_spec.hybrid {
                Some(h) => (h.controls, HybridDims { a: h.a, b: h.b, c: h.c }),
                None => (20, HybridDims::default()),
            };
            let geometry = hybrid_geometry(res)?;
            let r =
                harness::verify_hybrid_equivalence(trials, controls, seed, dims, &geometry).map_err(failed("verify hybrid"))?;
            Ok(Outcome::new(r.passed, &r))
        }
        VerifyTarget::Axioms => {
            let res = res.ok_or_else(|| InputError::Usage("`verify axioms` needs a scenario file".into()))?;
            let r = net_axiom_check(&res.net, trials, seed);
            Ok(Outcome::new(r.passed(), &r))
        }
        VerifyTarget::Geometry => {
            let (instances, samples) = verify_spec.geometry.map_or((100, 1000), |g| (g.instances, g.samples));
            let r = geometry_suite::run(trials, instances, samples, seed);
            Ok(Outcome::new(r.passed(), &r))
        }
        VerifyTarget::Fv => {
            let r = fv_suite::run(trials, seed).map_err(failed("verify fv"))?;
            Ok(Outcome::new(r.passed(), &r))
        }
        VerifyTarget::Factorisation => {
            let r = fv_suite::factorisation(trials, trials, [2, 2, 2], seed).map_err(failed("verify factorisation"))?;
            Ok(Outcome::new(r.passed(), &r))
        }
        VerifyTarget::Soundness => {
            let r = harness::classifier_soundness(trials, 200, seed).map_err(failed("verify soundness"))?;
            Ok(Outcome::new(r.passed(), &r))
        }
        VerifyTarget::Hierarchy => {
            let r = harness::hierarchy(trials, seed).map_err(failed("verify hierarchy"))?;
            Ok(Outcome::new(r.passed(), &r))
        }
    }
}
