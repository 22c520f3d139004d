//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

/// Eigenvalues of a real symmetric matrix, ascending, with matching
/// eigenvectors as columns.
pub fn symmetric_eigh(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Ascending eigenvalues of a complex hermitian matrix.
pub fn hermitian_eigenvalues(m: DMatrix<Complex64>) -> Vec<f64> {
    let eig = SymmetricEigen::new(m);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// `exp(K)` for a real antisymmetric `K`.
///
/// `iK` is hermitian; with `iK = V Λ V†` we get `exp(K) = V exp(-iΛ) V†`,
/// whose imaginary part vanishes up to rounding.
pub fn expm_antisymmetric(k: &DMatrix<f64>) -> DMatrix<f64> {
    let n = k.nrows();
    if k.iter().all(|&x| x == 0.0) {
        return DMatrix::identity(n, n);
    }
    let h = DMatrix::from_fn(n, n, |r, c| Complex64::new(0.0, k[(r, c)]));
    let eig = SymmetricEigen::new(h);
    let v = &eig.eigenvectors;
    let mut out = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let phase = Complex64::new(0.0, -eig.eigenvalues[j]).exp();
        for r in 0..n {
            let vr = v[(r, j)] * phase;
            for c in 0..n {
                out[(r, c)] += (vr * v[(c, j)].conj()).re;
            }
        }
    }
    out
}

/// Principal real logarithm of a proper orthogonal matrix; the result is
/// antisymmetric. Fails for rotation angles at π where the log is not unique.
pub fn logm_orthogonal(u: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = u.nrows();
    let (q, t) = Schur::new(u.clone()).unpack();
    let mut l = DMatrix::<f64>::zeros(n, n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].abs() > 1e-13 {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let phi = (0.5 * (c - b)).atan2(0.5 * (a + d));
            l[(i, i + 1)] = -phi;
            l[(i + 1, i)] = phi;
            i += 2;
        } else {
            if t[(i, i)] < 0.0 {
                return Err(Error::Numerical(
                    "orthogonal matrix has eigenvalue -1; logarithm is not unique".into(),
                ));
            }
            i += 1;
        }
    }
    let k = &q * l * q.transpose();
    Ok((&k - k.transpose()) * 0.5)
}
