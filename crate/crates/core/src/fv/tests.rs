use super::*;
use crate::geometry::{int, rat};
use crate::quantum::{choi_distance, random};

fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

fn proj(d: usize, k: usize) -> CMatrix {
    matrix_unit(d, k, k)
}

fn swap() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        m[(i, j)] = c(1., 0.);
    }
    m
}

fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(i, j)] = c(1., 0.);
    }
    m
}

fn sp() -> TensorSpace {
    TensorSpace::qubits(&["S", "P"])
}

fn probe() -> TensorSpace {
    TensorSpace::single("P", 2)
}

fn theta_of(m: CMatrix) -> ScatteringMorphism {
    ScatteringMorphism::new(UnitaryOp::new(sp(), m).unwrap(), vec![]).unwrap()
}

#[test]
fn identity_scattering_induces_scalar_effects() {
    let mut rng = random::rng(1);
    let theta = ScatteringMorphism::identity(sp());
    let sigma = random::state(&mut rng, &probe());
    let b = random::effect(&mut rng, &probe());
    let eps = induced_observable(&theta, &sigma, &b).unwrap();
    let expected = identity(2).scale(sigma.expect(b.mat()).re);
    assert!(max_abs(&(eps - expected)) < 1e-14);
}

#[test]
fn swap_transplants_the_probe_effect() {
    let mut rng = random::rng(2);
    let theta = theta_of(swap());
    let sigma = random::state(&mut rng, &probe());
    let b = random::effect(&mut rng, &probe());
    let eps = induced_observable(&theta, &sigma, &b).unwrap();
    assert!(max_abs(&(eps - b.mat())) < 1e-14);
    let omega = random::state(&mut rng, &TensorSpace::single("S", 2));
    let out = update_nonselective(&theta, &sigma, &omega).unwrap();
    assert!(max_abs(&(out.mat() - sigma.mat())) < 1e-14);
}

#[test]
fn induced_observables_are_unital_and_effects() {
    let mut rng = random::rng(3);
    let space = TensorSpace::new([("S", 2), ("P", 3)]).unwrap();
    let p = TensorSpace::single("P", 3);
    for _ in 0..100 {
        let theta = ScatteringMorphism::new(random::unitary(&mut rng, &space), vec![]).unwrap();
        let sigma = random::state(&mut rng, &p);
        let one = induced_observable(&theta, &sigma, &Effect::identity(p.clone())).unwrap();
        assert!(max_abs(&(one - identity(2))) < 1e-12);
        let eps = induced_observable(&theta, &sigma, &random::effect(&mut rng, &p)).unwrap();
        let (vals, _) = eigh(&eps);
        assert!(vals[0] > -1e-12 && vals[vals.len() - 1] < 1.0 + 1e-12);
    }
}

#[test]
fn selective_update_with_trivial_scattering() {
    let mut rng = random::rng(4);
    let theta = ScatteringMorphism::identity(sp());
    let sigma = random::state(&mut rng, &probe());
    let b = random::effect(&mut rng, &probe());
    let omega = random::state(&mut rng, &TensorSpace::single("S", 2));
    let up = update_selective(&theta, &sigma, &b, &omega).unwrap();
    let p = sigma.expect(b.mat()).re;
    assert!(max_abs(&(&up.unnormalized - omega.mat().scale(p))) < 1e-14);
    assert!(max_abs(&(up.postselected.unwrap().mat() - omega.mat())) < 1e-12);
}

#[test]
fn complementary_effects_have_total_probability_one() {
    let mut rng = random::rng(5);
    for _ in 0..20 {
        let theta = ScatteringMorphism::new(random::unitary(&mut rng, &sp()), vec![]).unwrap();
        let sigma = random::state(&mut rng, &probe());
        let b = random::effect(&mut rng, &probe());
        let omega = random::state(&mut rng, &TensorSpace::single("S", 2));
        let yes = update_selective(&theta, &sigma, &b, &omega).unwrap();
        let no = update_selective(&theta, &sigma, &b.complement(), &omega).unwrap();
        assert!((yes.probability + no.probability - 1.0).abs() < 1e-12);
        let ns = update_nonselective(&theta, &sigma, &omega).unwrap();
        assert!(max_abs(&(yes.unnormalized + no.unnormalized - ns.mat())) < 1e-12);
    }
}

#[test]
fn impossible_outcome_is_not_postselected() {
    let theta = ScatteringMorphism::identity(sp());
    let sigma = DensityOp::basis(probe(), &[0]).unwrap();
    let b = Effect::new(probe(), proj(2, 1)).unwrap();
    let omega = DensityOp::maximally_mixed(TensorSpace::single("S", 2));
    let up = update_selective(&theta, &sigma, &b, &omega).unwrap();
    assert_eq!(up.probability, 0.0);
    assert!(up.postselected.is_none());
}

fn bell_plus() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        m[(i, j)] = c(0.5, 0.);
    }
    m
}

#[test]
fn incomplete_bell_measurement_in_fv_form() {
    let ac = TensorSpace::qubits(&["A", "C"]);
    let p = bell_plus();
    let bob = Channel::on(ac.clone(), vec![p.clone(), identity(4) - &p]).unwrap();
    let dil = stinespring(&bob, "E").unwrap();
    let theta = ScatteringMorphism::new(dil.u.clone(), vec![]).unwrap();
    let omega = DensityOp::basis(ac.clone(), &[0, 0]).unwrap();
    let out = update_nonselective(&theta, &dil.tau, &omega).unwrap();
    assert!(max_abs(&(out.mat() - bob.apply(omega.mat()))) < 1e-12);
    let charlie = out.reduced(&["C"]).unwrap();
    assert!(max_abs(&(charlie.mat() - identity(2).scale(0.5))) < 1e-12);
}

#[test]
fn dilated_phase_flip_matches_kraus_form() {
    let s = TensorSpace::single("S", 2);
    let z = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
    let flip = Channel::on(s.clone(), vec![identity(2).scale(0.8f64.sqrt()), z.scale(0.2f64.sqrt())]).unwrap();
    let dil = stinespring(&flip, "P").unwrap();
    let theta = ScatteringMorphism::new(dil.u.clone(), vec![]).unwrap();
    let mut rng = random::rng(6);
    for _ in 0..10 {
        let omega = random::state(&mut rng, &s);
        let out = update_nonselective(&theta, &dil.tau, &omega).unwrap();
        assert!(max_abs(&(out.mat() - flip.apply(omega.mat()))) < 1e-12);
    }
    let ch = nonselective_channel(&theta, &dil.tau).unwrap();
    assert!(choi_distance(&ch, &flip).unwrap() < 1e-12);
}

#[test]
fn nonselective_outputs_are_states() {
    let mut rng = random::rng(7);
    let space = TensorSpace::new([("S", 3), ("P", 2)]).unwrap();
    let theta = ScatteringMorphism::new(random::unitary(&mut rng, &space), vec![]).unwrap();
    let sigma = random::state(&mut rng, &probe());
    for _ in 0..100 {
        let omega = random::state(&mut rng, &TensorSpace::single("S", 3));
        let out = update_nonselective(&theta, &sigma, &omega).unwrap();
        assert!(DensityOp::new(out.space().clone(), out.mat().clone()).is_ok());
    }
}

fn stationary(label: &str, x: i64, dim: usize) -> WorldlineSystem {
    WorldlineSystem { label: label.into(), worldline: Worldline::stationary(int(x)), dim }
}

fn ac_net() -> HybridNet {
    HybridNet::new(vec![stationary("A", -2, 2), stationary("C", 2, 2)]).unwrap()
}

/// `x = 3 − t/2`: meets C at (2, 2), then A at (10, −2).
fn slanted_route() -> Worldline {
    Worldline::line(Point::new(int(0), int(3)), rat(-1, 2)).unwrap()
}

fn route_zone() -> Diamond {
    Diamond::closed(Point::ints(1, 2), Point::ints(11, -2)).unwrap()
}

#[test]
fn route_composes_later_crossings_on_the_left() {
    let mut rng = random::rng(8);
    let u_bc = random::unitary(&mut rng, &TensorSpace::qubits(&["P", "C"]));
    let u_ab = random::unitary(&mut rng, &TensorSpace::qubits(&["A", "P"]));
    let theta = scattering_from_route(&slanted_route(), &ac_net(), "P", 2, &route_zone(), &[u_bc.clone(), u_ab.clone()]).unwrap();
    assert_eq!(theta.space().labels(), vec!["A", "C", "P"]);
    let events: Vec<Point> = theta.interactions().iter().map(|i| i.event.clone()).collect();
    assert_eq!(events, vec![Point::ints(2, 2), Point::ints(10, -2)]);

    // Built by hand in A, P, C order: S = (u_AP ⊗ 1)(1 ⊗ u_PC).
    let by_hand = kron(u_ab.mat(), &identity(2)) * kron(&identity(2), u_bc.mat());
    let (s, _) = permute(theta.evolution().mat(), theta.space(), &["A", "P", "C"]).unwrap();
    assert!(max_abs(&(s - &by_hand)) < 1e-14);

    let f = factor_scattering(&theta, &["A"], &["P"], &["C"]).unwrap();
    assert!(f.reconstruction < 1e-9);

    // Θ(1 ⊗ c_C) never involves A.
    let cz = random::hermitian_matrix(&mut rng, 2);
    let x = theta.apply_on(&cz, &["C"]).unwrap();
    let reduced = partial_trace(&x, theta.space(), &["C", "P"]).unwrap().unscale(2.0);
    assert!(max_abs(&(x - embed(&reduced, &["C", "P"], theta.space()).unwrap())) < 1e-12);
}

#[test]
fn route_without_crossings_is_a_local_product() {
    let mut rng = random::rng(9);
    let far = Worldline::stationary(int(20));
    let u = random::unitary(&mut rng, &probe());
    let zone = Diamond::closed(Point::ints(-1, 20), Point::ints(1, 20)).unwrap();
    let theta = scattering_from_route(&far, &ac_net(), "P", 2, &zone, &[u.clone()]).unwrap();
    assert!(theta.interactions().is_empty());
    let expected = kron(&identity(4), u.mat());
    assert!(max_abs(&(theta.evolution().mat() - expected)) < 1e-15);

    let two = random::unitary(&mut rng, &TensorSpace::qubits(&["A", "P"]));
    assert!(matches!(
        scattering_from_route(&far, &ac_net(), "P", 2, &zone, &[two]),
        Err(FvError::NonlocalUnitary { index: 0, .. })
    ));
}

#[test]
fn route_rejects_nonlocal_and_misplaced_interactions() {
    let mut rng = random::rng(10);
    let u_pa = random::unitary(&mut rng, &TensorSpace::qubits(&["P", "A"]));
    let u_pc = random::unitary(&mut rng, &TensorSpace::qubits(&["P", "C"]));
    let err = scattering_from_route(&slanted_route(), &ac_net(), "P", 2, &route_zone(), &[u_pa.clone(), u_pc.clone()]);
    assert!(matches!(err, Err(FvError::NonlocalUnitary { index: 0, ref label }) if label == "A"));

    let small = Diamond::closed(Point::ints(1, 2), Point::ints(5, 2)).unwrap();
    let err = scattering_from_route(&slanted_route(), &ac_net(), "P", 2, &small, &[u_pc.clone(), u_pa.clone()]);
    assert!(matches!(err, Err(FvError::CrossingOutsideCouplingZone { ref event }) if *event == Point::ints(10, -2)));

    let err = scattering_from_route(&slanted_route(), &ac_net(), "P", 2, &route_zone(), &[u_pc]);
    assert!(matches!(err, Err(FvError::UnitaryCount { expected: 2, found: 1 })));
}

#[test]
fn product_with_idle_c_factors_trivially() {
    let mut rng = random::rng(11);
    let space = TensorSpace::qubits(&["A", "B", "C"]);
    let u_ab = random::unitary(&mut rng, &TensorSpace::qubits(&["A", "B"]));
    let theta = ScatteringMorphism::new(u_ab.embedded(&space).unwrap(), vec![]).unwrap();
    let f = factor_scattering(&theta, &["A"], &["B"], &["C"]).unwrap();
    assert!(f.reconstruction < 1e-9);
    // Unique only up to a unitary w on B: psi = w ⊗ 1, chi = u_ab (1 ⊗ w†).
    let psi = f.psi_bc.mat();
    let w = CMatrix::from_fn(2, 2, |i, j| (psi[(2 * i, 2 * j)] + psi[(2 * i + 1, 2 * j + 1)]) / 2.0);
    assert!(max_abs(&(psi - kron(&w, &identity(2)))) < 1e-9);
    let expected = u_ab.mat() * kron(&identity(2), &w.adjoint());
    assert!(unitary_choi_distance(f.chi_ab.mat(), &expected) < 1e-9);
}

#[test]
fn cnot_from_a_to_c_does_not_factor() {
    let ac = TensorSpace::qubits(&["A", "C"]);
    let theta = ScatteringMorphism::new(UnitaryOp::new(ac, cnot()).unwrap(), vec![]).unwrap();
    match factor_scattering(&theta, &["A"], &[], &["C"]) {
        Err(FvError::NotFactorable { witness, deviation }) => {
            assert_eq!(witness, "Z");
            assert!((deviation - 1.0).abs() < 1e-12);
        }
        other => panic!("expected NotFactorable, got {other:?}"),
    }
}

#[test]
fn structured_products_round_trip() {
    let mut rng = random::rng(12);
    let space = TensorSpace::new([("A", 2), ("B", 3), ("C", 2)]).unwrap();
    for _ in 0..10 {
        let u_ab = random::unitary(&mut rng, &space.select(&["A", "B"]).unwrap());
        let u_bc = random::unitary(&mut rng, &space.select(&["B", "C"]).unwrap());
        let s = u_ab.embedded(&space).unwrap().then_after(&u_bc.embedded(&space).unwrap()).unwrap();
        let theta = ScatteringMorphism::new(s, vec![]).unwrap();
        let f = factor_scattering(&theta, &["A"], &["B"], &["C"]).unwrap();
        let rebuilt = f.chi_ab.embedded(&space).unwrap().then_after(&f.psi_bc.embedded(&space).unwrap()).unwrap();
        assert!(unitary_choi_distance(theta.evolution().mat(), rebuilt.mat()) < 1e-9);
    }
}

#[test]
fn partition_must_cover_the_space() {
    let theta = ScatteringMorphism::identity(TensorSpace::qubits(&["A", "B", "C"]));
    assert!(matches!(factor_scattering(&theta, &["A"], &[], &["C"]), Err(FvError::PreconditionViolated(_))));
}

fn sorkin_layout() -> (Diamond, Diamond, Worldline, Worldline) {
    let o_a = Diamond::open(Point::ints(-1, -2), Point::ints(1, -2)).unwrap();
    let o_c = Diamond::open(Point::ints(-1, 2), Point::ints(1, 2)).unwrap();
    (o_a, o_c, Worldline::stationary(int(-2)), Worldline::stationary(int(2)))
}

fn decomposition(l_bc: Channel, l_ab: Channel, b_dim: usize) -> SemilocalisableDecomposition {
    SemilocalisableDecomposition {
        system: TensorSpace::qubits(&["A", "C"]),
        b_dim,
        rho_b: DensityOp::basis(TensorSpace::single("B", b_dim), &[0]).unwrap(),
        l_bc,
        l_ab,
    }
}

#[test]
fn trivial_decomposition_gives_trivial_measurement() {
    let d = decomposition(
        Channel::identity(TensorSpace::new([("B", 1), ("C", 2)]).unwrap()),
        Channel::identity(TensorSpace::new([("A", 2), ("B", 1)]).unwrap()),
        1,
    );
    let (o_a, o_c, ga, gc) = sorkin_layout();
    let m = fv_from_semilocalisable(&d, &o_a, &o_c, &ga, &gc).unwrap();
    assert!(unitary_choi_distance(m.theta.evolution().mat(), &identity(m.theta.space().dim())) < 1e-9);
    let id = Channel::identity(TensorSpace::qubits(&["A", "C"]));
    assert!(choi_distance(&m.channel().unwrap(), &id).unwrap() < 1e-9);
}

/// `ρ ↦ Σ_i (X^i ⊗ P_i) ρ (X^i ⊗ P_i)` on (A, C).
fn conditional_flip() -> Channel {
    let x = pauli_x();
    let k0 = kron(&identity(2), &proj(2, 0));
    let k1 = kron(&x, &proj(2, 1));
    Channel::on(TensorSpace::qubits(&["A", "C"]), vec![k0, k1]).unwrap()
}

#[test]
fn conditional_flip_is_realised_by_an_fv_measurement() {
    let l_bc = Channel::unitary(&UnitaryOp::new(TensorSpace::qubits(&["C", "B"]), cnot()).unwrap());
    let l_ab = Channel::unitary(&UnitaryOp::new(TensorSpace::qubits(&["B", "A"]), cnot()).unwrap());
    let d = decomposition(l_bc, l_ab, 2);
    let target = conditional_flip();
    assert!(choi_distance(&d.channel().unwrap(), &target).unwrap() < 1e-12);

    let (o_a, o_c, ga, gc) = sorkin_layout();
    let m = fv_from_semilocalisable(&d, &o_a, &o_c, &ga, &gc).unwrap();
    assert!(m.is_nonselective());
    assert!(choi_distance(&m.channel().unwrap(), &target).unwrap() < 1e-9);
    let touched: Vec<Vec<String>> = m.theta.interactions().iter().map(|i| i.labels.clone()).collect();
    assert_eq!(touched, vec![vec!["P".to_string(), "C".into()], vec!["P".to_string(), "A".into()]]);
    assert!(m.theta.interactions().iter().all(|i| m.zone.contains(&i.event)));
}

#[test]
fn missing_route_is_reported() {
    let d = decomposition(
        Channel::identity(TensorSpace::new([("B", 1), ("C", 2)]).unwrap()),
        Channel::identity(TensorSpace::new([("A", 2), ("B", 1)]).unwrap()),
        1,
    );
    let o_c = Diamond::open(Point::ints(-1, 0), Point::ints(1, 0)).unwrap();
    let o_a = Diamond::open(Point::ints(9, 0), Point::ints(11, 0)).unwrap();
    let ga = Worldline::stationary(rat(-1, 2));
    let gc = Worldline::stationary(rat(1, 2));
    assert!(matches!(fv_from_semilocalisable(&d, &o_a, &o_c, &ga, &gc), Err(FvError::RouteNotFound)));
}

fn local_measurement(rng: &mut rand_chacha::ChaCha8Rng, label: &str, x: i64, zone: Diamond) -> FvMeasurement {
    let net = HybridNet::new(vec![stationary("S0", -3, 2), stationary("S1", 3, 2)]).unwrap();
    let route = Worldline::stationary(int(x) + rat(1, 2));
    let crossing = route_crossings(&route, &net).unwrap();
    assert!(crossing.is_empty());
    let local = random::unitary(rng, &TensorSpace::single(label, 2));
    let mut theta = scattering_from_route(&route, &net, label, 2, &zone, &[local]).unwrap();
    // Couple the probe to the nearby system by hand; the zone bookkeeping is what matters here.
    let system = if x < 0 { "S0" } else { "S1" };
    let u = random::unitary(rng, &TensorSpace::qubits(&[system, label]));
    theta = ScatteringMorphism::new(
        u.embedded(theta.space()).unwrap().then_after(theta.evolution()).unwrap(),
        vec![Interaction { event: zone.centre(), labels: vec![system.into(), label.into()] }],
    )
    .unwrap();
    let p = TensorSpace::single(label, 2);
    let sigma = random::state(rng, &p);
    let b = random::effect(rng, &p);
    let probe = vec![WorldlineSystem { label: label.into(), worldline: route, dim: 2 }];
    FvMeasurement::new(probe, zone, theta, sigma, b).unwrap()
}

#[test]
fn disjoint_measurements_commute() {
    let mut rng = random::rng(13);
    let z0 = Diamond::closed(Point::ints(-1, -3), Point::ints(1, -3)).unwrap();
    let z1 = Diamond::closed(Point::ints(-1, 3), Point::ints(1, 3)).unwrap();
    let m0 = local_measurement(&mut rng, "P", -3, z0);
    let m1 = local_measurement(&mut rng, "P", 3, z1);
    let omega = random::state(&mut rng, &TensorSpace::qubits(&["S0", "S1"]));
    let comp = compose_measurements(&[m0.clone(), m1.clone()], &omega).unwrap();
    assert_eq!(comp.swaps_tested, 1);
    assert!(comp.swap_deviation < 1e-10);

    let single = compose_measurements(&[m0.clone()], &omega).unwrap();
    let direct = m0.update_selective(&omega).unwrap();
    assert!(max_abs(&(single.unnormalized - direct.unnormalized)) < 1e-14);
    assert!((single.expectations[0] - direct.probability).abs() < 1e-14);
}

#[test]
fn unordered_zones_are_rejected() {
    let mut rng = random::rng(14);
    let early = Diamond::closed(Point::ints(-1, -3), Point::ints(1, -3)).unwrap();
    let late = Diamond::closed(Point::ints(9, -3), Point::ints(11, -3)).unwrap();
    let m0 = local_measurement(&mut rng, "P", -3, early);
    let m1 = local_measurement(&mut rng, "P", -3, late);
    let omega = random::state(&mut rng, &TensorSpace::qubits(&["S0", "S1"]));
    assert!(compose_measurements(&[m0.clone(), m1.clone()], &omega).is_ok());
    assert!(matches!(compose_measurements(&[m1, m0], &omega), Err(FvError::PreconditionViolated(_))));
}

#[test]
fn later_party_sees_only_nonselective_earlier_updates() {
    let mut rng = random::rng(15);
    let early = Diamond::closed(Point::ints(-1, -3), Point::ints(1, -3)).unwrap();
    let late = Diamond::closed(Point::ints(9, -3), Point::ints(11, -3)).unwrap();
    let m0 = local_measurement(&mut rng, "P", -3, early);
    let m1 = local_measurement(&mut rng, "P", -3, late);
    let omega = random::state(&mut rng, &TensorSpace::qubits(&["S0", "S1"]));
    let comp = compose_measurements(&[m0.clone(), m1.clone()], &omega).unwrap();
    let after = m0.update_nonselective(&omega).unwrap();
    let expected = after.expect(&m1.induced_observable().unwrap()).re;
    assert!((comp.expectations[1] - expected).abs() < 1e-12);
}
