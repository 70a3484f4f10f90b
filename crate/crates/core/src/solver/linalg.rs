//! Dense row-major factorizations for the small systems the solvers produce.

use crate::num::Real;

/// Solves `a x = b` for symmetric positive definite `a` (n x n, row-major).
/// Returns `None` when the matrix is not numerically positive definite.
pub(crate) fn cholesky_solve<T: Real>(a: &[T], n: usize, b: &[T]) -> Option<Vec<T>> {
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > T::zero()) || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let t = l[i * n + k] * y[k];
            y[i] -= t;
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let t = l[k * n + i] * y[k];
            y[i] -= t;
        }
        y[i] /= l[i * n + i];
    }
    Some(y)
}

/// Solves `a x = b` by LU with partial pivoting. `None` if `a` is singular.
pub(crate) fn lu_solve<T: Real>(a: &[T], n: usize, b: &[T]) -> Option<Vec<T>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    // Singularity is judged per column so that badly scaled but regular
    // systems (barrier KKT matrices) still factor.
    let col_scale: Vec<T> = (0..n)
        .map(|c| (0..n).fold(T::zero(), |acc, r| acc.max(m[r * n + c].abs())))
        .collect();
    let eps_n = T::epsilon() * T::from_usize(n.max(1)).unwrap();
    for col in 0..n {
        let tiny = col_scale[col] * eps_n;
        let (p, pv) = (col..n)
            .map(|r| (r, m[r * n + col].abs()))
            .fold((col, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pv > tiny) {
            return None;
        }
        if p != col {
            for k in 0..n {
                m.swap(p * n + k, col * n + k);
            }
            x.swap(p, col);
        }
        let d = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                let t = f * m[col * n + k];
                m[r * n + k] -= t;
            }
            let t = f * x[col];
            x[r] -= t;
        }
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let t = m[i * n + k] * x[k];
            x[i] -= t;
        }
        x[i] /= m[i * n + i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_systems() {
        let a = [4.0, 2.0, 2.0, 3.0];
        let x = cholesky_solve(&a, 2, &[2.0, 1.0]).unwrap();
        assert!((4.0 * x[0] + 2.0 * x[1] - 2.0f64).abs() < 1e-14);
        assert!((2.0 * x[0] + 3.0 * x[1] - 1.0f64).abs() < 1e-14);
        let y = lu_solve(&a, 2, &[2.0, 1.0]).unwrap();
        assert!((x[0] - y[0]).abs() < 1e-14 && (x[1] - y[1]).abs() < 1e-14);

        let b = [0.0, 1.0, 1.0, 0.0];
        assert!(cholesky_solve(&b, 2, &[1.0, 2.0]).is_none());
        assert_eq!(lu_solve(&b, 2, &[1.0, 2.0]).unwrap(), vec![2.0, 1.0]);
        assert!(lu_solve(&[1.0, 2.0, 2.0, 4.0], 2, &[1.0, 1.0]).is_none());
    }
}
