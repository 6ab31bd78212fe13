use super::catalog::*;
use super::harness::*;
use super::*;
use crate::fv::fv_from_semilocalisable;
use crate::geometry::{Diamond, Point};
use crate::quantum::{trace_distance, DensityOp};

fn ac() -> Bipartition {
    Bipartition::new(["A"], ["C"]).unwrap()
}

fn qubits_ac() -> TensorSpace {
    TensorSpace::qubits(&["A", "C"])
}

fn flip_a() -> Channel {
    Channel::on(TensorSpace::single("A", 2), vec![pauli_x()]).unwrap()
}

fn swap_qubits(a: &str, b: &str) -> Channel {
    let mut m = CMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            m[(j * 2 + i, i * 2 + j)] = c(1.0, 0.0);
        }
    }
    Channel::on(TensorSpace::qubits(&[a, b]), vec![m]).unwrap()
}

fn sorkin(bob: Channel, alternatives: Vec<Alternative>) -> SorkinScenario {
    SorkinScenario {
        o_a: Diamond::open(Point::ints(0, -2), Point::ints(1, -2)).unwrap(),
        o_b: Diamond::open(Point::ints(1, 0), Point::ints(2, 0)).unwrap(),
        o_c: Diamond::open(Point::ints(3, 3), Point::ints(4, 3)).unwrap(),
        partition: ac(),
        omega: DensityOp::basis(qubits_ac(), &[0, 0]).unwrap(),
        alternatives,
        bob,
    }
}

fn abstain_or_flip() -> Vec<Alternative> {
    vec![
        Alternative { name: "abstain".into(), channel: Channel::identity(TensorSpace::single("A", 2)) },
        Alternative { name: "flip".into(), channel: flip_a() },
    ]
}

#[test]
fn identity_is_nosignalling_both_ways() {
    let r = classify_nosignalling(&Channel::identity(qubits_ac()), &ac()).unwrap();
    assert!(r.nosig_a_to_c && r.nosig_c_to_a);
    assert!(r.witness_a_to_c.is_none() && r.witness_c_to_a.is_none());
}

#[test]
fn incomplete_bell_measurement_signals_both_ways() {
    let ch = incomplete_bell_measurement("A", "C").unwrap();
    let r = classify_nosignalling(&ch, &ac()).unwrap();
    assert!(!r.nosig_a_to_c && !r.nosig_c_to_a);
    for (direction, w) in [(Direction::AToC, r.witness_a_to_c.unwrap()), (Direction::CToA, r.witness_c_to_a.unwrap())] {
        assert!(w.deviation >= 0.49, "{direction:?}: {}", w.deviation);
        let replayed = replay_witness(&ch, &ac(), direction, &w).unwrap();
        assert!((replayed - w.deviation).abs() < 1e-9);
    }
}

#[test]
fn flipping_before_the_incomplete_bell_measurement_moves_charlie_by_half() {
    let ch = incomplete_bell_measurement("A", "C").unwrap();
    let rho = DensityOp::basis(qubits_ac(), &[0, 0]).unwrap();
    let d = signalling_deviation(&ch, &ac(), Direction::AToC, &flip_a(), &rho).unwrap();
    assert!((d - 0.5).abs() < 1e-12);
}

#[test]
fn classical_readout_of_c_signals_only_towards_a() {
    let ch = classical_c_to_a("A", "C").unwrap();
    let r = classify_nosignalling(&ch, &ac()).unwrap();
    assert!(r.nosig_a_to_c);
    assert!(!r.nosig_c_to_a);
    assert!(r.witness_c_to_a.unwrap().deviation > 0.49);
}

#[test]
fn complete_bell_measurement_is_nosignalling_and_localisable() {
    let direct = complete_bell_measurement("A", "C").unwrap();
    let built = localised_bell_measurement("A", "C").unwrap();
    assert!(choi_distance(&direct, &built).unwrap() < 1e-12);
    for ch in [&direct, &built] {
        let r = classify_nosignalling(ch, &ac()).unwrap();
        assert!(r.nosig_a_to_c && r.nosig_c_to_a);
    }
}

#[test]
fn local_identities_compose_to_the_identity() {
    let rho_rs = DensityOp::basis(TensorSpace::qubits(&["R", "S"]), &[0, 1]).unwrap();
    let loc = make_localisable(
        &Channel::identity(TensorSpace::qubits(&["A", "R"])),
        &Channel::identity(TensorSpace::qubits(&["C", "S"])),
        &rho_rs,
    )
    .unwrap();
    assert!(choi_distance(&loc, &Channel::identity(qubits_ac())).unwrap() < 1e-12);

    let rho_b = DensityOp::basis(TensorSpace::single("B", 2), &[1]).unwrap();
    let semi = make_semilocalisable(
        &Channel::identity(TensorSpace::qubits(&["B", "C"])),
        &Channel::identity(TensorSpace::qubits(&["A", "B"])),
        &rho_b,
    )
    .unwrap();
    assert_eq!(semi.space_in().labels(), vec!["A", "C"]);
    assert!(choi_distance(&semi, &Channel::identity(qubits_ac())).unwrap() < 1e-12);
}

/// `U_AB U_BC` on `A ⊗ C ⊗ B` as explicit permutation matrices, then the trace over `B` by index loops.
fn brute_force_swaps(x: &CMatrix, rho_b: &CMatrix) -> CMatrix {
    let idx = |a: usize, cc: usize, b: usize| a * 4 + cc * 2 + b;
    let mut u_bc = CMatrix::zeros(8, 8);
    let mut u_ab = CMatrix::zeros(8, 8);
    for a in 0..2 {
        for cc in 0..2 {
            for b in 0..2 {
                u_bc[(idx(a, b, cc), idx(a, cc, b))] = c(1.0, 0.0);
                u_ab[(idx(b, cc, a), idx(a, cc, b))] = c(1.0, 0.0);
            }
        }
    }
    let u = &u_ab * &u_bc;
    let full = &u * kron(x, rho_b) * u.adjoint();
    CMatrix::from_fn(4, 4, |i, j| (0..2).map(|b| full[(i * 2 + b, j * 2 + b)]).sum())
}

#[test]
fn swap_chain_matches_a_dense_evaluation() {
    let rho_b = DensityOp::pure(TensorSpace::single("B", 2), &[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
    let ch = make_semilocalisable(&swap_qubits("B", "C"), &swap_qubits("A", "B"), &rho_b).unwrap();
    let mut expected = CMatrix::zeros(16, 16);
    for i in 0..4 {
        for j in 0..4 {
            let out = brute_force_swaps(&matrix_unit(4, i, j), rho_b.mat());
            expected.view_mut((i * 4, j * 4), (4, 4)).copy_from(&out);
        }
    }
    assert!(max_abs(&(ch.choi() - expected)) < 1e-12);

    let rho = random::random_state(&qubits_ac(), 3);
    let out = DensityOp::normalized(qubits_ac(), ch.apply(rho.mat())).unwrap();
    let moved = rho.reduced(&["C"]).unwrap().mat().clone();
    assert!(max_abs(&(out.reduced(&["A"]).unwrap().mat() - moved)) < 1e-12);
    assert!(max_abs(&(out.reduced(&["C"]).unwrap().mat() - rho_b.mat())) < 1e-12);
}

#[test]
fn identity_decomposes_with_a_trivial_ancilla() {
    let d = decompose_semilocalisable(&Channel::identity(qubits_ac()), &ac()).unwrap();
    assert_eq!(d.b_dim, 1);
    assert!(choi_distance(&d.channel().unwrap(), &Channel::identity(qubits_ac())).unwrap() < 1e-12);
}

#[test]
fn classical_readout_decomposes() {
    let ch = classical_c_to_a("A", "C").unwrap();
    let d = decompose_semilocalisable(&ch, &ac()).unwrap();
    assert!(choi_distance(&d.channel().unwrap(), &ch).unwrap() <= RECONSTRUCTION_TOL);
    assert_eq!(d.a_labels(), vec!["A"]);
    assert_eq!(d.c_labels(), vec!["C"]);
}

#[test]
fn signalling_channel_is_a_certified_failure() {
    let ch = incomplete_bell_measurement("A", "C").unwrap();
    match decompose_semilocalisable(&ch, &ac()) {
        Err(CausalityError::CertifiedFailure(f)) => {
            assert_eq!(f.stage, "classification");
            assert!(f.witness.unwrap().deviation >= 0.49);
        }
        other => panic!("expected a certified failure, got {other:?}"),
    }
}

#[test]
fn decomposition_respects_a_reordered_partition() {
    let mut rng = random::rng(21);
    let semi = harness::random_semilocalisable(&mut rng, HybridDims::default()).unwrap();
    let flipped = Channel::on(
        TensorSpace::qubits(&["C", "A"]),
        semi.kraus().iter().map(|k| permute(k, semi.space_in(), &["C", "A"]).unwrap().0).collect(),
    )
    .unwrap();
    let d = decompose_semilocalisable(&flipped, &ac()).unwrap();
    assert!(choi_distance(&d.channel().unwrap(), &flipped).unwrap() <= RECONSTRUCTION_TOL);
}

#[test]
fn bipartitions_are_validated() {
    assert!(Bipartition::new(Vec::<String>::new(), vec!["C".into()]).is_err());
    assert!(Bipartition::new(["A"], ["A"]).is_err());
    let three = Channel::identity(TensorSpace::qubits(&["A", "C", "D"]));
    assert!(matches!(classify_nosignalling(&three, &ac()), Err(CausalityError::InvalidBipartition(_))));
    let lossy = Channel::on(TensorSpace::qubits(&["A", "C"]), vec![matrix_unit(4, 0, 0)]).unwrap();
    assert!(matches!(classify_nosignalling(&lossy, &ac()), Err(CausalityError::NotNonselective)));
}

#[test]
fn sorkin_example_reproduces_the_charlie_states() {
    let r = run_sorkin(&sorkin(incomplete_bell_measurement("A", "C").unwrap(), abstain_or_flip()), 8, 1).unwrap();
    let mixed = DensityOp::maximally_mixed(TensorSpace::single("C", 2));
    let zero = DensityOp::basis(TensorSpace::single("C", 2), &[0]).unwrap();
    assert!(max_abs(&(r.charlie_states[0].state.mat() - mixed.mat())) < 1e-12);
    assert!(max_abs(&(r.charlie_states[1].state.mat() - zero.mat())) < 1e-12);
    assert!((r.max_distance - 0.5).abs() < 1e-12);
    let e = r.distinguishing_effect.unwrap();
    assert!(max_abs(&(e.mat() - matrix_unit(2, 1, 1))) < 1e-12);
}

#[test]
fn complete_bell_measurement_hides_alices_choice() {
    let r = run_sorkin(&sorkin(complete_bell_measurement("A", "C").unwrap(), abstain_or_flip()), 8, 1).unwrap();
    assert!(r.max_distance <= 1e-12);
}

#[test]
fn fv_bob_hides_alices_choice() {
    let mut rng = random::rng(5);
    let semi = harness::random_semilocalisable(&mut rng, HybridDims::default()).unwrap();
    let d = decompose_semilocalisable(&semi, &ac()).unwrap();
    let g = HybridGeometry::default();
    let m = fv_from_semilocalisable(&d, &g.o_a, &g.o_c, &g.gamma_a, &g.gamma_c).unwrap();
    let mut s = sorkin(m.channel().unwrap(), abstain_or_flip());
    s.o_b = Diamond::open(m.zone.bottom.clone(), m.zone.top.clone()).unwrap();
    s.omega = random::random_state(&qubits_ac(), 6);
    s.alternatives.push(Alternative {
        name: "scramble".into(),
        channel: random::random_channel(&TensorSpace::single("A", 2), &TensorSpace::single("A", 2), 2, 7),
    });
    let r = run_sorkin(&s, 8, 1).unwrap();
    assert!(r.max_distance <= 1e-10, "{}", r.max_distance);
}

#[test]
fn sorkin_requires_ordered_regions() {
    let mut s = sorkin(complete_bell_measurement("A", "C").unwrap(), abstain_or_flip());
    s.o_c = Diamond::open(Point::ints(3, -1), Point::ints(4, -1)).unwrap();
    assert!(matches!(run_sorkin(&s, 8, 1), Err(CausalityError::PreconditionViolated(_))));
    let mut s = sorkin(complete_bell_measurement("A", "C").unwrap(), abstain_or_flip());
    s.alternatives.push(Alternative { name: "charlie".into(), channel: Channel::identity(TensorSpace::single("C", 2)) });
    assert!(matches!(run_sorkin(&s, 8, 1), Err(CausalityError::PreconditionViolated(_))));
}

#[test]
fn nosignalling_bobs_never_reveal_the_alternative() {
    let mut rng = random::rng(8);
    for _ in 0..10 {
        let bob = harness::random_semilocalisable(&mut rng, HybridDims::default()).unwrap();
        let mut s = sorkin(bob, abstain_or_flip());
        s.omega = random::state(&mut rng, &qubits_ac());
        s.alternatives.push(Alternative {
            name: "random".into(),
            channel: random::channel(&mut rng, &TensorSpace::single("A", 2), &TensorSpace::single("A", 2), 2),
        });
        let r = run_sorkin(&s, 0, 0).unwrap();
        assert!(r.max_distance <= 1e-10);
        let first = &r.charlie_states[0].state;
        for st in &r.charlie_states {
            assert!(trace_distance(first, &st.state).unwrap() <= 1e-10);
        }
    }
}

#[test]
fn bfr_harness_without_trials_is_empty() {
    let r = verify_bfr(0, 1, BfrDims::default()).unwrap();
    assert_eq!(r.max_deviation, 0.0);
    assert!(r.orders.iter().all(|o| o.tally.checks == 0));
    assert!(r.control_deviation >= 0.49);
}

#[test]
fn bfr_harness_passes_a_few_trials() {
    let r = verify_bfr(6, 3, BfrDims::default()).unwrap();
    assert!(r.passed, "{r:?}");
    assert!(r.orders.iter().all(|o| o.tally.checks >= 6));
}

#[test]
fn unordered_control_signals() {
    assert!((unordered_control().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn hybrid_equivalence_on_a_few_trials() {
    let r = verify_hybrid_equivalence(4, 3, 2, HybridDims::default(), &HybridGeometry::default()).unwrap();
    assert!(r.passed, "{r:?}");
    assert!(r.max_fv_distance <= 1e-9);
}

#[test]
fn trivial_channel_passes_with_a_trivial_ancilla() {
    let t = hybrid_trial(&Channel::identity(qubits_ac()), &ac(), &HybridGeometry::default()).unwrap();
    assert!(t.passed());
    assert_eq!(t.b_dim, Some(1));
}

#[test]
fn hybrid_hypothesis_can_fail() {
    let mut g = HybridGeometry::default();
    g.o_c = Diamond::open(Point::ints(-10, 3), Point::ints(-9, 3)).unwrap();
    let r = verify_hybrid_equivalence(2, 1, 0, HybridDims::default(), &g).unwrap();
    assert!(!r.hypothesis_met && !r.passed);
}

#[test]
fn classifier_agrees_with_sampling() {
    let r = classifier_soundness(10, 40, 4).unwrap();
    assert!(r.passed(), "{r:?}");
    assert!(r.nosig_verdicts > 0 && r.signalling_verdicts > 0);
}

#[test]
fn localisable_and_semilocalisable_channels_do_not_signal() {
    let r = hierarchy(10, 9).unwrap();
    assert!(r.passed(), "{r:?}");
}
