use causal_core::quantum::{
    c, channel_from_choi, eigh, embed, hs_adjoint, kron, matrix_unit, max_abs, partial_trace, random, stinespring, trace,
    validate_channel, CMatrix, QuantumError, TensorSpace,
};
use proptest::prelude::*;

fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_channels_validate_and_corruptions_do_not(seed in any::<u64>(), d in 2usize..4, k in 1usize..5) {
        let s = TensorSpace::single("A", d);
        let ch = random::random_channel(&s, &s, k, seed);
        let v = validate_channel(&ch);
        prop_assert!(v.cp && v.tp && v.unital_dual, "{:?}", v);

        // Push the smallest Choi eigenvalue to -1e-3.
        let (vals, vecs) = eigh(ch.choi());
        let low = vecs.column(0);
        let bad = ch.choi() - (&low * low.adjoint()).scale(vals[0] + 1e-3);
        prop_assert!(matches!(channel_from_choi(&bad, s.clone(), s), Err(QuantumError::NotPsd(_))));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn heisenberg_dual_matches_schroedinger(seed in any::<u64>(), d in 2usize..4) {
        let s = TensorSpace::single("A", d);
        let ch = random::random_channel(&s, &s, 3, seed);
        let rho = random::random_state(&s, seed ^ 1);
        let a = random::random_hermitian(d, seed ^ 2);
        let lhs = trace(&(ch.apply(rho.mat()) * &a));
        let rhs = trace(&(rho.mat() * hs_adjoint(&ch).apply(&a)));
        prop_assert!((lhs - rhs).norm() <= 1e-10, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn product_expectations_factor(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
        let space = TensorSpace::new([("A", da), ("B", db)]).unwrap();
        let rho = random::random_state(&TensorSpace::single("A", da), seed);
        let sigma = random::random_state(&TensorSpace::single("B", db), seed ^ 1);
        let a = random::random_hermitian(da, seed ^ 2);
        let joint = kron(rho.mat(), sigma.mat());
        let lifted = embed(&a, &["A"], &space).unwrap();
        let lhs = trace(&(&lifted * &joint));
        let rhs = trace(&(&a * rho.mat()));
        prop_assert!((lhs - rhs).norm() <= 1e-10);
        let reduced = partial_trace(&joint, &space, &["A"]).unwrap();
        prop_assert!(max_abs(&(reduced - rho.mat())) <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn stinespring_reconstructs_on_matrix_units(seed in any::<u64>(), d in 2usize..4, k in 1usize..4) {
        let s = TensorSpace::single("A", d);
        let ch = random::random_channel(&s, &s, k, seed);
        let dil = stinespring(&ch, "E").unwrap();
        for i in 0..d {
            for j in 0..d {
                let e = matrix_unit(d, i, j);
                let gap = max_abs(&(dil.reduce(&e).unwrap() - ch.apply(&e)));
                prop_assert!(gap <= 1e-10, "E_{}{}: {:e}", i, j, gap);
            }
        }
    }
}

#[test]
fn embedding_is_big_endian() {
    let space = TensorSpace::qubits(&["A", "C"]);
    let x_a = embed(&pauli_x(), &["A"], &space).unwrap();
    let z_c = embed(&pauli_z(), &["C"], &space).unwrap();
    let both = embed(&kron(&pauli_x(), &pauli_z()), &["A", "C"], &space).unwrap();
    let product = &x_a * &z_c;
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(product[(i, j)], both[(i, j)], "({i}, {j})");
        }
    }
    // |00⟩ ↦ |10⟩: A is the most significant digit.
    assert_eq!(x_a[(2, 0)], c(1.0, 0.0));
    assert_eq!(z_c[(1, 1)], c(-1.0, 0.0));
}
