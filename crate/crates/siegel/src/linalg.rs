//! Small dense complex linear algebra (determinants and solves) for the
//! matrix sizes that occur here (n <= 8). Partial-pivot LU, nothing fancy.

use num_complex::Complex64;

/// Determinant of an n x n complex matrix given in row-major order.
/// Consumes the buffer.
pub(crate) fn det(n: usize, a: &mut [Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), n * n);
    let mut d = Complex64::new(1.0, 0.0);
    for k in 0..n {
        // pivot on the largest remaining entry in column k
        let mut piv = k;
        let mut best = a[k * n + k].norm_sqr();
        for r in (k + 1)..n {
            let m = a[r * n + k].norm_sqr();
            if m > best {
                best = m;
                piv = r;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            d = -d;
        }
        let pivot = a[k * n + k];
        d *= pivot;
        for r in (k + 1)..n {
            let f = a[r * n + k] / pivot;
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for c in k..n {
                let sub = f * a[k * n + c];
                a[r * n + c] -= sub;
            }
        }
    }
    d
}

/// Solves A X = B for X, where A is n x n and B is n x m, both row-major.
/// Returns None when A is numerically singular.
pub(crate) fn solve(n: usize, a: &mut [Complex64], b: &mut [Complex64], m: usize) -> Option<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n * m);
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].norm_sqr();
        for r in (k + 1)..n {
            let mag = a[r * n + k].norm_sqr();
            if mag > best {
                best = mag;
                piv = r;
            }
        }
        if best == 0.0 {
            return None;
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            for c in 0..m {
                b.swap(k * m + c, piv * m + c);
            }
        }
        let pivot = a[k * n + k];
        for r in (k + 1)..n {
            let f = a[r * n + k] / pivot;
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for c in k..n {
                let sub = f * a[k * n + c];
                a[r * n + c] -= sub;
            }
            for c in 0..m {
                let sub = f * b[k * m + c];
                b[r * m + c] -= sub;
            }
        }
    }
    // back substitution
    for k in (0..n).rev() {
        let pivot = a[k * n + k];
        for c in 0..m {
            let mut s = b[k * m + c];
            for j in (k + 1)..n {
                s -= a[k * n + j] * b[j * m + c];
            }
            b[k * m + c] = s / pivot;
        }
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn det_2x2() {
        let mut a = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)];
        let d = det(2, &mut a);
        assert!((d - c(-2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn det_complex_diag() {
        // det(i E_2) = -1
        let mut a = vec![c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)];
        let d = det(2, &mut a);
        assert!((d - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn solve_roundtrip() {
        let a0 = vec![c(2.0, 1.0), c(0.5, 0.0), c(-1.0, 3.0), c(4.0, -2.0)];
        let x0 = vec![c(1.0, -1.0), c(0.0, 2.0)];
        // b = a0 * x0
        let b0 = vec![
            a0[0] * x0[0] + a0[1] * x0[1],
            a0[2] * x0[0] + a0[3] * x0[1],
        ];
        let mut a = a0.clone();
        let mut b = b0.clone();
        solve(2, &mut a, &mut b, 1).unwrap();
        assert!((b[0] - x0[0]).norm() < 1e-12);
        assert!((b[1] - x0[1]).norm() < 1e-12);
    }
}
