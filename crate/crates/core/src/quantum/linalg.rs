use nalgebra::{DVector, SymmetricEigen};
use num::complex::Complex64;

use super::{CMatrix, QuantumError, TensorSpace, PSD_REL_TOL};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.trace()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= tol
}

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(m.nrows(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    (vals, vecs)
}

/// Positive semidefinite up to the relative tolerance `-1e-9 · max(1, λ_max)`.
pub fn psd_ok(ascending: &[f64]) -> bool {
    match (ascending.first(), ascending.last()) {
        (Some(lo), Some(hi)) => *lo >= -PSD_REL_TOL * hi.max(1.0),
        _ => true,
    }
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(h: &CMatrix) -> f64 {
    eigh(h).0.iter().map(|l| l.abs()).sum()
}

/// Projector onto the strictly positive eigenspace.
pub fn positive_projector(h: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(h);
    let n = h.nrows();
    let mut p = CMatrix::zeros(n, n);
    for (k, l) in vals.iter().enumerate() {
        if *l > 0.0 {
            let v = vecs.column(k);
            p += &v * v.adjoint();
        }
    }
    p
}

pub fn sqrt_psd(h: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(h);
    let d = CMatrix::from_diagonal(&DVector::from_iterator(vals.len(), vals.iter().map(|l| c(l.max(0.0).sqrt(), 0.0))));
    &vecs * d * vecs.adjoint()
}

/// Frobenius norm of `ab − ba`.
pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    (a * b - b * a).norm()
}

fn positions(space: &TensorSpace, labels: &[&str]) -> Result<Vec<usize>, QuantumError> {
    let pos = labels.iter().map(|l| space.position(l)).collect::<Result<Vec<_>, _>>()?;
    for (i, p) in pos.iter().enumerate() {
        if pos[..i].contains(p) {
            return Err(QuantumError::DuplicateFactor(labels[i].to_string()));
        }
    }
    Ok(pos)
}

/// `op` acting on the listed factors (in the listed order), identity on the rest.
pub fn embed(op: &CMatrix, labels: &[&str], space: &TensorSpace) -> Result<CMatrix, QuantumError> {
    let pos = positions(space, labels)?;
    let dims = space.dims();
    let sub: Vec<usize> = pos.iter().map(|&p| dims[p]).collect();
    let ds: usize = sub.iter().product();
    if op.nrows() != ds || op.ncols() != ds {
        return Err(QuantumError::DimensionMismatch { expected: ds, found: op.nrows() });
    }
    let n = space.dim();
    let mut out = CMatrix::zeros(n, n);
    let mut col_digits = vec![0; dims.len()];
    for r in 0..n {
        let dr = space.digits(r);
        let sr = pos.iter().zip(&sub).fold(0, |acc, (&p, &d)| acc * d + dr[p]);
        col_digits.copy_from_slice(&dr);
        for sc in 0..ds {
            let mut rest = sc;
            for (&p, &d) in pos.iter().zip(&sub).rev() {
                col_digits[p] = rest % d;
                rest /= d;
            }
            let z = op[(sr, sc)];
            if z != c(0.0, 0.0) {
                out[(r, space.index(&col_digits))] = z;
            }
        }
    }
    Ok(out)
}

/// Partial trace onto `keep`; the result is ordered as in `space`.
pub fn partial_trace(m: &CMatrix, space: &TensorSpace, keep: &[&str]) -> Result<CMatrix, QuantumError> {
    let n = space.dim();
    if m.nrows() != n || m.ncols() != n {
        return Err(QuantumError::DimensionMismatch { expected: n, found: m.nrows() });
    }
    let pos = positions(space, keep)?;
    let dims = space.dims();
    let kept: Vec<usize> = (0..dims.len()).filter(|i| pos.contains(i)).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !pos.contains(i)).collect();
    let dk: usize = kept.iter().map(|&i| dims[i]).product();
    let dt: usize = traced.iter().map(|&i| dims[i]).product();
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(dk); dt];
    for idx in 0..n {
        let d = space.digits(idx);
        let k = kept.iter().fold(0, |acc, &i| acc * dims[i] + d[i]);
        let t = traced.iter().fold(0, |acc, &i| acc * dims[i] + d[i]);
        groups[t].push((idx, k));
    }
    let mut out = CMatrix::zeros(dk, dk);
    for g in &groups {
        for &(r, kr) in g {
            for &(cc, kc) in g {
                out[(kr, kc)] += m[(r, cc)];
            }
        }
    }
    Ok(out)
}

/// Re-express `m` with its factors listed in `order` (which must name every factor once).
pub fn permute(m: &CMatrix, space: &TensorSpace, order: &[&str]) -> Result<(CMatrix, TensorSpace), QuantumError> {
    let target = space.select(order)?;
    if target.len() != space.len() {
        return Err(QuantumError::DimensionMismatch { expected: space.len(), found: target.len() });
    }
    let pos = positions(space, order)?;
    let n = space.dim();
    let old: Vec<usize> = (0..n)
        .map(|i| {
            let d = target.digits(i);
            let mut od = vec![0; pos.len()];
            for (k, &p) in pos.iter().enumerate() {
                od[p] = d[k];
            }
            space.index(&od)
        })
        .collect();
    Ok((CMatrix::from_fn(n, n, |i, j| m[(old[i], old[j])]), target))
}

/// Orthonormal basis of the column span, dropping directions with residual norm below `tol`.
pub fn orthonormalize(cols: &CMatrix, tol: f64) -> CMatrix {
    let mut basis: Vec<DVector<Complex64>> = Vec::new();
    for j in 0..cols.ncols() {
        let mut v: DVector<Complex64> = cols.column(j).into_owned();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        if norm > tol {
            basis.push(v.unscale(norm));
        }
    }
    if basis.is_empty() {
        return CMatrix::zeros(cols.nrows(), 0);
    }
    CMatrix::from_columns(&basis)
}

/// A unitary whose columns at the given positions are the given orthonormal vectors.
pub fn complete_isometry(n: usize, fixed: &[(usize, DVector<Complex64>)]) -> CMatrix {
    let mut basis: Vec<DVector<Complex64>> = fixed.iter().map(|(_, v)| v.clone()).collect();
    let mut extra = Vec::new();
    for e in 0..n {
        if basis.len() + extra.len() == n {
            break;
        }
        let mut v = DVector::from_fn(n, |i, _| if i == e { c(1.0, 0.0) } else { c(0.0, 0.0) });
        for _ in 0..2 {
            for b in basis.iter().chain(extra.iter()) {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            extra.push(v.unscale(norm));
        }
    }
    basis.extend(extra.iter().cloned());
    let mut out = CMatrix::zeros(n, n);
    let mut free = extra.into_iter();
    for j in 0..n {
        let col = match fixed.iter().find(|(p, _)| *p == j) {
            Some((_, v)) => v.clone(),
            None => free.next().expect("enough complementary directions"),
        };
        out.set_column(j, &col);
    }
    out
}
