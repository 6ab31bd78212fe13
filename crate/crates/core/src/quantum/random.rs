//! Seeded random states, unitaries, effects and channels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{c, eigh, hermitian_part, CMatrix, Channel, DensityOp, Effect, TensorSpace, UnitaryOp};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries i.i.d. standard complex Gaussian.
pub fn ginibre<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * s, im * s)
    })
}

/// Columns of a Gaussian matrix orthonormalised by QR with the phase of `R`'s diagonal removed.
fn isometry<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let g = ginibre(rng, rows, cols);
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Haar-distributed unitary matrix.
pub fn unitary_matrix<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    isometry(rng, d, d)
}

pub fn unitary<R: Rng>(rng: &mut R, space: &TensorSpace) -> UnitaryOp {
    UnitaryOp::new(space.clone(), unitary_matrix(rng, space.dim())).expect("QR yields a unitary")
}

/// Full-rank state from the Hilbert–Schmidt ensemble.
pub fn state<R: Rng>(rng: &mut R, space: &TensorSpace) -> DensityOp {
    let d = space.dim();
    let g = ginibre(rng, d, d);
    DensityOp::normalized(space.clone(), &g * g.adjoint()).expect("Gram matrices are positive")
}

pub fn pure_state<R: Rng>(rng: &mut R, space: &TensorSpace) -> DensityOp {
    let v = ginibre(rng, space.dim(), 1);
    let psi: Vec<_> = v.iter().copied().collect();
    DensityOp::pure(space.clone(), &psi).expect("a nonzero vector")
}

pub fn hermitian_matrix<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    hermitian_part(&ginibre(rng, d, d))
}

/// An effect with Haar eigenbasis and uniform eigenvalues in `[0, 1]`.
pub fn effect<R: Rng>(rng: &mut R, space: &TensorSpace) -> Effect {
    let d = space.dim();
    let u = unitary_matrix(rng, d);
    let diag = CMatrix::from_fn(d, d, |i, j| if i == j { c(rng.gen::<f64>(), 0.0) } else { c(0.0, 0.0) });
    let m = hermitian_part(&(&u * diag * u.adjoint()));
    Effect::new(space.clone(), m).expect("eigenvalues in [0, 1]")
}

/// Trace-preserving channel with `kraus_count` operators cut from a Haar isometry.
///
/// The count is raised when needed so that the stacked operators can form an isometry.
pub fn channel<R: Rng>(rng: &mut R, space_in: &TensorSpace, space_out: &TensorSpace, kraus_count: usize) -> Channel {
    let (din, dout) = (space_in.dim(), space_out.dim());
    let k = kraus_count.max(din.div_ceil(dout)).max(1);
    let v = isometry(rng, k * dout, din);
    let kraus = (0..k).map(|i| v.rows(i * dout, dout).into_owned()).collect();
    Channel::new(space_in.clone(), space_out.clone(), kraus).expect("isometry blocks form a channel")
}

pub fn random_unitary(space: &TensorSpace, seed: u64) -> UnitaryOp {
    unitary(&mut rng(seed), space)
}

pub fn random_state(space: &TensorSpace, seed: u64) -> DensityOp {
    state(&mut rng(seed), space)
}

pub fn random_channel(space_in: &TensorSpace, space_out: &TensorSpace, kraus_count: usize, seed: u64) -> Channel {
    channel(&mut rng(seed), space_in, space_out, kraus_count)
}

pub fn random_hermitian(d: usize, seed: u64) -> CMatrix {
    hermitian_matrix(&mut rng(seed), d)
}

/// Smallest eigenvalue, for quick positivity checks in tests.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigh(m).0.first().copied().unwrap_or(0.0)
}
