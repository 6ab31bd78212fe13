//! Reference operations on two qubits.

use super::{make_localisable, CausalityError};
use crate::quantum::{c, identity, kron, CMatrix, Channel, DensityOp, QuantumError, TensorSpace};

fn real(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    CMatrix::from_row_slice(rows, cols, &entries.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>())
}

pub fn pauli_x() -> CMatrix {
    real(2, 2, &[0., 1., 1., 0.])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z() -> CMatrix {
    real(2, 2, &[1., 0., 0., -1.])
}

/// Projectors onto `|φ±⟩, |ψ±⟩`.
pub fn bell_projectors() -> Vec<CMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [[h, 0., 0., h], [h, 0., 0., -h], [0., h, h, 0.], [0., h, -h, 0.]]
        .iter()
        .map(|v| {
            let v = real(4, 1, v);
            &v * v.adjoint()
        })
        .collect()
}

/// `ρ ↦ PρP + (1−P)ρ(1−P)` with `P = |φ+⟩⟨φ+|` on the qubits `a ⊗ c`.
pub fn incomplete_bell_measurement(a: &str, c_label: &str) -> Result<Channel, QuantumError> {
    let p = bell_projectors().swap_remove(0);
    let q = identity(4) - &p;
    Channel::on(TensorSpace::qubits(&[a, c_label]), vec![p, q])
}

/// Non-selective measurement in the full Bell basis.
pub fn complete_bell_measurement(a: &str, c_label: &str) -> Result<Channel, QuantumError> {
    Channel::on(TensorSpace::qubits(&[a, c_label]), bell_projectors())
}

/// The local pieces realising the complete Bell measurement from a shared entangled pair.
///
/// `R` and `S` share `Σ_k |kk⟩/2` in dimension four; each side applies `X^i Z^j` (with `k = 2i + j`)
/// to its qubit controlled on its half. Tracing out the pair leaves the uniform twirl over
/// `{1, X⊗X, Y⊗Y, Z⊗Z}`, which dephases in the Bell basis.
pub struct BellProtocol {
    pub l_ar: Channel,
    pub l_cs: Channel,
    pub rho_rs: DensityOp,
}

fn controlled_paulis(target: &str, control: &str) -> Result<Channel, QuantumError> {
    let paulis = [identity(2), pauli_x(), pauli_y(), pauli_z()];
    let mut u = CMatrix::zeros(8, 8);
    for (k, p) in paulis.iter().enumerate() {
        let mut proj = CMatrix::zeros(4, 4);
        proj[(k, k)] = c(1.0, 0.0);
        u += kron(p, &proj);
    }
    Channel::on(TensorSpace::new([(target, 2), (control, 4)])?, vec![u])
}

pub fn bell_protocol(a: &str, c_label: &str, r: &str, s: &str) -> Result<BellProtocol, QuantumError> {
    let mut psi = vec![c(0.0, 0.0); 16];
    for k in 0..4 {
        psi[k * 4 + k] = c(0.5, 0.0);
    }
    Ok(BellProtocol {
        l_ar: controlled_paulis(a, r)?,
        l_cs: controlled_paulis(c_label, s)?,
        rho_rs: DensityOp::pure(TensorSpace::new([(r, 4), (s, 4)])?, &psi)?,
    })
}

/// The complete Bell measurement assembled by [`make_localisable`] from [`bell_protocol`].
pub fn localised_bell_measurement(a: &str, c_label: &str) -> Result<Channel, CausalityError> {
    let p = bell_protocol(a, c_label, "R", "S")?;
    make_localisable(&p.l_ar, &p.l_cs, &p.rho_rs)
}

/// `ρ ↦ Σ_i (X^i ⊗ P_i) ρ (X^i ⊗ P_i)`: `C` is read in the computational basis and the outcome flips `A`.
pub fn classical_c_to_a(a: &str, c_label: &str) -> Result<Channel, QuantumError> {
    let p0 = real(2, 2, &[1., 0., 0., 0.]);
    let p1 = real(2, 2, &[0., 0., 0., 1.]);
    Channel::on(TensorSpace::qubits(&[a, c_label]), vec![kron(&identity(2), &p0), kron(&pauli_x(), &p1)])
}

/// Controlled-NOT with control `a` and target `c`.
pub fn cnot(a: &str, c_label: &str) -> Result<Channel, QuantumError> {
    let m = real(4, 4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.]);
    Channel::on(TensorSpace::qubits(&[a, c_label]), vec![m])
}
