//! Dense complex linear algebra helpers built on `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;
/// Dense complex column vector.
pub type CVector = DVector<C64>;
/// Dense complex matrix.
pub type CMatrix = DMatrix<C64>;

/// The imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// Shorthand for a real value lifted to the complex plane.
#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Kronecker product `a ⊗ b`; the index of `b` varies fastest.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of two vectors; the index of `b` varies fastest.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (k, y) in b.iter().enumerate() {
            out[i * b.len() + k] = x * y;
        }
    }
    out
}

/// Largest absolute deviation of `m` from its adjoint.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let adj = m.adjoint();
    (m - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest absolute entry of `U†U − I`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    let g = u.adjoint() * u - CMatrix::identity(n, n);
    g.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !h.is_square() {
        return Err(Error::Dimension {
            expected: h.nrows(),
            got: h.ncols(),
        });
    }
    check_finite(h)?;
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(h.nrows(), h.nrows(), |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// `V diag(f(λ)) V†`, applying a scalar function through a spectral decomposition.
pub fn spectral_apply(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let mut scaled = vectors.clone();
    for (j, &lam) in values.iter().enumerate() {
        let s = f(lam);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= s;
        }
    }
    scaled * vectors.adjoint()
}

/// `exp(−i t H)` for Hermitian `H`, exactly unitary up to rounding.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(h)?;
    Ok(spectral_apply(&values, &vectors, |lam| {
        C64::from_polar(1.0, -t * lam)
    }))
}

/// General matrix exponential by Padé scaling and squaring.
pub fn expm(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::Dimension {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    check_finite(m)?;
    let out = m.exp();
    check_finite(&out)?;
    Ok(out)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Euclidean norm of a complex slice.
pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨u|v⟩` with the first argument conjugated.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Returns `v/‖v‖`, failing on a zero or non-finite vector.
pub fn normalized(v: &CVector) -> Result<CVector> {
    let n = v.norm();
    if !n.is_finite() || n == 0.0 {
        return Err(Error::Numerical(format!("cannot normalize vector of norm {n}")));
    }
    Ok(v / re(n))
}

/// Rejects matrices containing NaN or infinite entries.
pub fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical("non-finite matrix entry".into()))
    }
}

/// Computational basis vector `|k⟩` of dimension `dim`.
pub fn basis(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = re(1.0);
    v
}
