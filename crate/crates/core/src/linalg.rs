//! Dense LU solve with partial pivoting.

use crate::{Error, Result, Scalar};

/// Solves `A X = B` for row-major `A` (`n x n`) and `B` (`n x k`), returning `X` row-major.
///
/// Fails with [`Error::SingularSystem`] when a pivot falls below `1e-12`
/// times the infinity norm of `A` (or a few ulps, for low-precision scalars).
pub(crate) fn solve<T: Scalar>(mut a: Vec<T>, n: usize, mut b: Vec<T>, k: usize) -> Result<Vec<T>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n * k);
    let norm = (0..n)
        .map(|r| a[r * n..(r + 1) * n].iter().map(|v| v.abs()).sum::<T>())
        .fold(T::zero(), T::max);
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0)) * norm;

    for col in 0..n {
        let (piv_row, piv_abs) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs.is_nan() || piv_abs <= tol {
            return Err(Error::SingularSystem(format!("pivot {piv_abs:e} in column {col} below tolerance {tol:e}")));
        }
        if piv_row != col {
            for c in 0..n {
                a.swap(col * n + c, piv_row * n + c);
            }
            for c in 0..k {
                b.swap(col * k + c, piv_row * k + c);
            }
        }
        let piv = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / piv;
            if f == T::zero() {
                continue;
            }
            a[r * n + col] = T::zero();
            for c in col + 1..n {
                a[r * n + c] = a[r * n + c] - f * a[col * n + c];
            }
            for c in 0..k {
                b[r * k + c] = b[r * k + c] - f * b[col * k + c];
            }
        }
    }

    let mut x = vec![T::zero(); n * k];
    for r in (0..n).rev() {
        for c in 0..k {
            let mut acc = b[r * k + c];
            for j in r + 1..n {
                acc = acc - a[r * n + j] * x[j * k + c];
            }
            x[r * k + c] = acc / a[r * n + r];
        }
    }
    Ok(x)
}
