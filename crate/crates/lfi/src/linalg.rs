//! Dense linear algebra for the small matrices this crate works with
//! (parameter dimensions up to ~20). Everything is written directly against
//! `ndarray` arrays; there is no BLAS backend.

use ndarray::{Array1, Array2};

/// Cholesky factorization `a = L Lᵀ` with `L` lower triangular.
///
/// Returns `None` when `a` is not (numerically) positive definite, which
/// callers use as the canonical PD test.
pub fn cholesky_lower(a: &Array2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "cholesky requires a square matrix");
    let mut l = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l[[i, i]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    Some(l)
}

/// Forward substitution: solve `L y = b` for lower-triangular `L`.
pub fn solve_lower(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = l.nrows();
    assert_eq!(b.len(), n, "dimension mismatch in triangular solve");
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= l[[i, j]] * y[j];
        }
        y[i] = s / l[[i, i]];
    }
    y
}

/// Back substitution: solve `U y = b` for upper-triangular `U`.
pub fn solve_upper(u: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = u.nrows();
    assert_eq!(b.len(), n, "dimension mismatch in triangular solve");
    let mut y = Array1::zeros(n);
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= u[[i, j]] * y[j];
        }
        y[i] = s / u[[i, i]];
    }
    y
}

/// Inverse of an upper-triangular matrix, again upper triangular.
pub fn invert_upper(u: &Array2<f64>) -> Array2<f64> {
    let n = u.nrows();
    let mut inv = Array2::zeros((n, n));
    for col in (0..n).rev() {
        inv[[col, col]] = 1.0 / u[[col, col]];
        for i in (0..col).rev() {
            let mut s = 0.0;
            for j in i + 1..=col {
                s += u[[i, j]] * inv[[j, col]];
            }
            inv[[i, col]] = -s / u[[i, i]];
        }
    }
    inv
}

/// Inverse of a symmetric positive definite matrix via its Cholesky factor.
pub fn spd_inverse(a: &Array2<f64>) -> Option<Array2<f64>> {
    let l = cholesky_lower(a)?;
    let n = a.nrows();
    // A⁻¹ = L⁻ᵀ L⁻¹, assembled column by column from unit vectors.
    let mut inv = Array2::zeros((n, n));
    for col in 0..n {
        let mut e = Array1::zeros(n);
        e[col] = 1.0;
        let y = solve_lower(&l, &e);
        let x = solve_upper(&l.t().to_owned(), &y);
        inv.column_mut(col).assign(&x);
    }
    // Symmetrize to wash out the last bits of rounding noise.
    let inv_t = inv.t().to_owned();
    Some((&inv + &inv_t) * 0.5)
}

/// `log Σ exp(v)`, stable against overflow; `-inf` for an effectively
/// empty sum.
pub fn logsumexp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = v.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}
