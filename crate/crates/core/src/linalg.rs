//! Dense symmetric solves for the barrier Newton systems.
//!
//! Matrices are row-major `n × n` slices. Only the lower triangle is read.

/// Returned when a matrix is not numerically positive definite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotPositiveDefinite;

/// In-place Cholesky factorisation `A = L Lᵀ`; `L` overwrites the lower triangle.
pub fn cholesky(a: &mut [f64], n: usize) -> Result<(), NotPositiveDefinite> {
    assert_eq!(a.len(), n * n);
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(NotPositiveDefinite);
        }
        let d = libm::sqrt(d);
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Ok(())
}

/// Solves `L Lᵀ x = b` given the factor from [`cholesky`]; `b` is overwritten with `x`.
pub fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// `LDLᵀ` factorisation without pivoting. Returns the unit lower factor
/// (row-major) and the pivots; a pivot below `-tol · max|A_ii|` means the
/// matrix is indefinite.
pub fn ldl(a: &[f64], n: usize) -> (alloc::vec::Vec<f64>, alloc::vec::Vec<f64>) {
    let mut l = alloc::vec![0.0; n * n];
    let mut d = alloc::vec![0.0; n];
    let scale = (0..n).fold(0.0f64, |m, i| m.max(libm::fabs(a[i * n + i])));
    let tiny = 1e-14 * if scale > 0.0 { scale } else { 1.0 };
    for j in 0..n {
        let mut dj = a[j * n + j];
        for k in 0..j {
            dj -= l[j * n + k] * l[j * n + k] * d[k];
        }
        d[j] = dj;
        l[j * n + j] = 1.0;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k] * d[k];
            }
            l[i * n + j] = if libm::fabs(dj) > tiny { s / dj } else { 0.0 };
        }
    }
    (l, d)
}

/// Pivots of [`ldl`].
pub fn ldl_pivots(a: &[f64], n: usize) -> alloc::vec::Vec<f64> {
    ldl(a, n).1
}
