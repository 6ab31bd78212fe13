use std::f64::consts::PI;

use super::{c, CMatrix};

/// `E_ij` in dimension `d`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = c(1.0, 0.0);
    m
}

/// The generalised Pauli `X^a Z^b` in dimension `d`.
pub fn shift_clock(d: usize, a: usize, b: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for k in 0..d {
        let phase = 2.0 * PI * ((b * k) % d) as f64 / d as f64;
        m[((k + a) % d, k)] = c(phase.cos(), phase.sin());
    }
    m
}

/// Traceless Hermitian basis of `B(ℂ^d)`, orthogonal in the Hilbert–Schmidt product.
///
/// The diagonal elements come first, so for `d = 2` the order is `Z, X, Y`.
pub fn hermitian_basis(d: usize) -> Vec<(String, CMatrix)> {
    let mut out = Vec::new();
    for k in 1..d {
        let norm = (2.0 / (k * (k + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for j in 0..k {
            m[(j, j)] = c(norm, 0.0);
        }
        m[(k, k)] = c(-(k as f64) * norm, 0.0);
        let name = if d == 2 { "Z".to_string() } else { format!("diag{k}") };
        out.push((name, m));
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut x = CMatrix::zeros(d, d);
            x[(j, k)] = c(1.0, 0.0);
            x[(k, j)] = c(1.0, 0.0);
            let mut y = CMatrix::zeros(d, d);
            y[(j, k)] = c(0.0, -1.0);
            y[(k, j)] = c(0.0, 1.0);
            let (xn, yn) =
                if d == 2 { ("X".to_string(), "Y".to_string()) } else { (format!("sym{j}{k}"), format!("asym{j}{k}")) };
            out.push((xn, x));
            out.push((yn, y));
        }
    }
    out
}
