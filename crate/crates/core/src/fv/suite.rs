//! Randomised locality checks for FV measurements on a three-worldline net.

use num::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    factor_scattering, induced_observable, route_crossings, scattering_from_route, FvError, FvMeasurement, ScatteringMorphism,
    FACTOR_TOL,
};
use crate::geometry::{
    domain_of_dependence, in_chronological_future, int, rat, sample, Diamond, Point, Rational, SpacelikeInterval, Worldline,
};
use crate::hybrid::{complement_labels, interval_labels, region_labels, HybridNet, SubalgebraDescriptor, WorldlineSystem};
use crate::quantum::{embed, identity, kron, max_abs, random, CMatrix, Effect, TensorSpace};
use crate::Tally;

/// Observables transformed by `Θ` must stay put to this tolerance.
pub const FIXED_TOL: f64 = 1e-12;
/// Expectation values outside the coupling zone's influence.
pub const EXPECTATION_TOL: f64 = 1e-10;
/// Residual after projecting onto the target subalgebra.
pub const PROJECTION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LocalityCheck {
    pub tally: Tally,
    pub max_deviation: f64,
}

impl LocalityCheck {
    fn new(trials: usize) -> Self {
        Self { tally: Tally::new(trials), max_deviation: 0.0 }
    }

    fn record(&mut self, deviation: f64, tol: f64) {
        self.max_deviation = self.max_deviation.max(deviation);
        self.tally.check(deviation <= tol);
    }

    pub fn passed(&self) -> bool {
        self.tally.passed() && self.tally.checks > 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FvSuiteReport {
    pub outside_zone_expectations: LocalityCheck,
    pub untouched_fixed: LocalityCheck,
    pub idle_probe_effects: LocalityCheck,
    pub late_to_early: LocalityCheck,
}

impl FvSuiteReport {
    pub fn passed(&self) -> bool {
        self.outside_zone_expectations.passed()
            && self.untouched_fixed.passed()
            && self.idle_probe_effects.passed()
            && self.late_to_early.passed()
    }
}

const SYSTEM_X: [i64; 3] = [-4, 0, 4];
const PROBE: &str = "P";

struct Instance {
    net: HybridNet,
    with_probe: HybridNet,
    measurement: FvMeasurement,
}

fn system_net() -> HybridNet {
    let systems = SYSTEM_X
        .iter()
        .enumerate()
        .map(|(i, &x)| WorldlineSystem { label: format!("S{i}"), worldline: Worldline::stationary(int(x)), dim: 2 })
        .collect();
    HybridNet::new(systems).expect("distinct labels")
}

fn probe_x<R: Rng>(rng: &mut R) -> Rational {
    loop {
        let x = sample::grid(rng, -6, 6, 4);
        if !SYSTEM_X.iter().any(|s| x == int(*s)) {
            return x;
        }
    }
}

/// A probe on a slanted segment, interacting with every system it crosses.
fn instance<R: Rng>(rng: &mut R) -> Result<Instance, FvError> {
    let net = system_net();
    let start = probe_x(rng);
    let end = loop {
        let x = probe_x(rng);
        if x != start {
            break x;
        }
    };
    let t0 = sample::grid(rng, -2, 0, 4);
    let dt = (&end - &start).abs() * rat(rng.gen_range(5..=8), 4);
    let top = Point::new(&t0 + &dt, end);
    let route = Worldline::new(vec![Point::new(t0, start), top], int(0), int(0))?;

    let crossings = route_crossings(&route, &net)?;
    let zone = match (crossings.first(), crossings.last()) {
        (Some(first), Some(last)) => {
            Diamond::closed(first.event.translated(&int(-1), &int(0)), last.event.translated(&int(1), &int(0)))?
        }
        _ => {
            let v = route.vertices();
            let mid = Point::new((&v[0].t + &v[1].t) / int(2), (&v[0].x + &v[1].x) / int(2));
            Diamond::centred(mid.t, mid.x, int(1), true)?
        }
    };
    let unitaries = if crossings.is_empty() {
        vec![random::unitary(rng, &TensorSpace::single(PROBE, 2))]
    } else {
        crossings
            .iter()
            .map(|c| {
                let mut factors = vec![(PROBE.to_string(), 2)];
                factors.extend(c.labels.iter().map(|l| (l.clone(), 2)));
                random::unitary(rng, &TensorSpace::new(factors).expect("distinct labels"))
            })
            .collect()
    };
    let theta = scattering_from_route(&route, &net, PROBE, 2, &zone, &unitaries)?;
    let probe_space = TensorSpace::single(PROBE, 2);
    let sigma = random::state(rng, &probe_space);
    let b = random::effect(rng, &probe_space);
    let probe = WorldlineSystem { label: PROBE.into(), worldline: route, dim: 2 };
    let mut all = net.systems().to_vec();
    all.push(probe.clone());
    let with_probe = HybridNet::new(all)?;
    let measurement = FvMeasurement::new(vec![probe], zone, theta, sigma, b)?;
    Ok(Instance { net, with_probe, measurement })
}

fn hermitian_on<R: Rng>(rng: &mut R, labels: &[String], space: &TensorSpace) -> CMatrix {
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let local = space.select(&refs).expect("labels from the net");
    embed(&random::hermitian_matrix(rng, local.dim()), &refs, space).expect("labels from the net")
}

/// Non-selective updates leave observables localised in the causal complement of the zone unchanged.
pub fn outside_zone_expectations(trials: usize, seed: u64) -> Result<LocalityCheck, FvError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = LocalityCheck::new(trials);
    for _ in 0..trials {
        let inst = instance(&mut rng)?;
        let space = inst.net.space();
        let labels = complement_labels(&inst.net, &inst.measurement.zone);
        if labels.is_empty() {
            continue;
        }
        let a = hermitian_on(&mut rng, &labels, space);
        let omega = random::state(&mut rng, space);
        let after = inst.measurement.update_nonselective(&omega)?;
        out.record((after.expect(&a) - omega.expect(&a)).norm(), EXPECTATION_TOL);
    }
    Ok(out)
}

/// `Θ(c ⊗ 1) = c ⊗ 1` for `c` on factors no interaction touches; the causal complement's
/// factors must be among them.
pub fn untouched_fixed(trials: usize, seed: u64) -> Result<LocalityCheck, FvError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = LocalityCheck::new(trials);
    for _ in 0..trials {
        let inst = instance(&mut rng)?;
        let theta = &inst.measurement.theta;
        let touched = theta.touched();
        let outside = complement_labels(&inst.net, &inst.measurement.zone);
        out.tally.check(outside.iter().all(|l| !touched.contains(l)));
        let idle: Vec<String> = inst.net.labels().into_iter().filter(|l| !touched.contains(l)).collect();
        if idle.is_empty() {
            continue;
        }
        let c = hermitian_on(&mut rng, &idle, theta.space());
        out.record(max_abs(&(theta.apply(&c) - &c)), FIXED_TOL);
    }
    Ok(out)
}

/// A second probe that never meets a system worldline yields `ε_σ(b) = σ(b)·1`.
pub fn idle_probe_effects(trials: usize, seed: u64) -> Result<LocalityCheck, FvError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = LocalityCheck::new(trials);
    let idle = WorldlineSystem { label: "Q".into(), worldline: Worldline::stationary(int(20)), dim: 2 };
    for _ in 0..trials {
        let inst = instance(&mut rng)?;
        out.tally.check(route_crossings(&idle.worldline, &inst.with_probe)?.is_empty());
        let q = TensorSpace::single(&idle.label, idle.dim);
        let theta = inst.measurement.theta.extended(&q)?;
        let probes = TensorSpace::qubits(&[PROBE, "Q"]);
        let sigma = random::state(&mut rng, &probes);
        let bq = random::effect(&mut rng, &q);
        let b = Effect::new(probes.clone(), kron(&identity(2), bq.mat()))?;
        let eps = induced_observable(&theta, &sigma, &b)?;
        let expected = identity(eps.nrows()).scale(sigma.expect(b.mat()).re);
        out.record(max_abs(&(eps - expected)), FIXED_TOL);
    }
    Ok(out)
}

fn late_region<R: Rng>(rng: &mut R, dependence: &Diamond, zone: &Diamond) -> Option<Diamond> {
    (0..1000).find_map(|_| {
        let t = sample::between(rng, &(&zone.bottom.t - int(4)), &(&zone.top.t + int(6)), 80);
        let bottom = Point::new(t, sample::grid(rng, -8, 8, 4));
        let r = rat(rng.gen_range(1..=12), 4);
        let top = Point::new(&bottom.t + &r * int(2), bottom.x.clone());
        let l = Diamond::open(bottom, top).ok()?;
        let inside = dependence.contains(&l.bottom) && dependence.contains(&l.top);
        (inside && !in_chronological_future(&l.bottom, &zone.top)).then_some(l)
    })
}

/// For `L⁺` outside `J⁻(K)` inside the domain of dependence of an interval `L⁻` before `K`,
/// `Θ` maps the algebra of `L⁺` into that of `L⁻`.
pub fn late_to_early(trials: usize, seed: u64) -> Result<LocalityCheck, FvError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = LocalityCheck::new(trials);
    for _ in 0..trials {
        let inst = instance(&mut rng)?;
        let zone = &inst.measurement.zone;
        let t = &zone.bottom.t - rat(rng.gen_range(1..=8), 4);
        let half = int(rng.gen_range(30..=40));
        let centre = sample::grid(&mut rng, -2, 2, 4);
        let iv = SpacelikeInterval::new(t, &centre - &half, &centre + &half)?;
        let dependence = domain_of_dependence(&iv);
        let Some(late) = late_region(&mut rng, &dependence, zone) else { continue };
        let source = region_labels(&inst.with_probe, &late);
        if source.is_empty() {
            continue;
        }
        let target = SubalgebraDescriptor::plain(interval_labels(&inst.with_probe, &iv));
        let theta = &inst.measurement.theta;
        let x = SubalgebraDescriptor::plain(source).sample(&mut rng, theta.space())?;
        out.record(target.residual(&theta.apply(&x), theta.space())?, PROJECTION_TOL);
    }
    Ok(out)
}

pub fn run(trials: usize, seed: u64) -> Result<FvSuiteReport, FvError> {
    Ok(FvSuiteReport {
        outside_zone_expectations: outside_zone_expectations(trials, seed)?,
        untouched_fixed: untouched_fixed(trials, seed.wrapping_add(1))?,
        idle_probe_effects: idle_probe_effects(trials, seed.wrapping_add(2))?,
        late_to_early: late_to_early(trials, seed.wrapping_add(3))?,
    })
}

/// Factorisation of structured products against Haar-random three-factor unitaries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorisationReport {
    pub structured: Tally,
    pub max_reconstruction: f64,
    pub haar: Tally,
    /// The check that rejected each Haar-random unitary, in trial order.
    pub haar_witnesses: Vec<String>,
}

impl FactorisationReport {
    pub fn passed(&self) -> bool {
        self.structured.passed() && self.haar.passed()
    }
}

/// `(u_AB ⊗ 1)(1 ⊗ u_BC)` must factor with reconstruction below [`FACTOR_TOL`]; Haar unitaries must not factor.
pub fn factorisation(structured: usize, haar: usize, dims: [usize; 3], seed: u64) -> Result<FactorisationReport, FvError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = TensorSpace::new([("A", dims[0]), ("B", dims[1]), ("C", dims[2])])?;
    let (ab, bc) = (space.select(&["A", "B"])?, space.select(&["B", "C"])?);
    let mut report = FactorisationReport {
        structured: Tally::new(structured),
        max_reconstruction: 0.0,
        haar: Tally::new(haar),
        haar_witnesses: Vec::with_capacity(haar),
    };
    for _ in 0..structured {
        let u_ab = random::unitary(&mut rng, &ab).embedded(&space)?;
        let u_bc = random::unitary(&mut rng, &bc).embedded(&space)?;
        let theta = ScatteringMorphism::new(u_ab.then_after(&u_bc)?, vec![])?;
        match factor_scattering(&theta, &["A"], &["B"], &["C"]) {
            Ok(f) => {
                report.max_reconstruction = report.max_reconstruction.max(f.reconstruction);
                report.structured.check(f.reconstruction <= FACTOR_TOL);
            }
            Err(FvError::NotFactorable { .. }) => report.structured.check(false),
            Err(e) => return Err(e),
        }
    }
    for _ in 0..haar {
        let theta = ScatteringMorphism::new(random::unitary(&mut rng, &space), vec![])?;
        match factor_scattering(&theta, &["A"], &["B"], &["C"]) {
            Ok(_) => report.haar.check(false),
            Err(FvError::NotFactorable { witness, .. }) => {
                report.haar.check(true);
                report.haar_witnesses.push(witness);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorisation_separates_products_from_haar() {
        let r = factorisation(6, 6, [2, 3, 2], 4).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.haar_witnesses.len(), 6);
    }

    #[test]
    fn instances_cover_all_crossing_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut seen = [false; 4];
        for _ in 0..200 {
            let inst = instance(&mut rng).unwrap();
            seen[inst.measurement.theta.interactions().len()] = true;
        }
        assert!(seen.iter().all(|s| *s), "{seen:?}");
    }

    #[test]
    fn locality_suite_passes() {
        let report = run(100, 7).unwrap();
        assert!(report.passed(), "{report:#?}");
    }

    #[test]
    fn residual_detects_nonlocal_scattering() {
        // The probe is coupled to a system it never meets.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = system_net();
        let space = net.space().concat(&TensorSpace::single(PROBE, 2)).unwrap();
        let far = random::unitary(&mut rng, &TensorSpace::qubits(&["S2", PROBE]));
        let theta = super::super::ScatteringMorphism::new(far.embedded(&space).unwrap(), vec![]).unwrap();
        let iv = SpacelikeInterval::new(int(0), int(-1), int(1)).unwrap();
        let target = SubalgebraDescriptor::plain(interval_labels(&net, &iv));
        let x = SubalgebraDescriptor::plain(vec!["S2".into()]).sample(&mut rng, &space).unwrap();
        assert!(target.residual(&theta.apply(&x), &space).unwrap() > 1e-3);
    }
}
