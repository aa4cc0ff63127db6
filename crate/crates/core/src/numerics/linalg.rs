//! Small dense linear algebra on row-major square matrices.

use crate::error::{Error, Result};
use crate::Scalar;

/// LU factorisation with partial pivoting; returns `(lu, perm, sign)`.
fn lu<T: Scalar>(a: &[T], n: usize) -> Option<(Vec<T>, Vec<usize>, T)> {
    let mut m = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = T::one();
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, m[i * n + k].abs()))
            .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot == T::zero() {
            return None;
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
            sign = -sign;
        }
        let d = m[k * n + k];
        for i in (k + 1)..n {
            let f = m[i * n + k] / d;
            m[i * n + k] = f;
            for j in (k + 1)..n {
                let v = m[k * n + j];
                m[i * n + j] -= f * v;
            }
        }
    }
    Some((m, perm, sign))
}

pub fn determinant<T: Scalar>(a: &[T], n: usize) -> T {
    match lu(a, n) {
        None => T::zero(),
        Some((m, _, sign)) => (0..n).fold(sign, |acc, i| acc * m[i * n + i]),
    }
}

pub fn inverse<T: Scalar>(a: &[T], n: usize) -> Result<Vec<T>> {
    let (m, perm, _) = lu(a, n).ok_or(Error::SingularBasis(0.0))?;
    let mut inv = vec![T::zero(); n * n];
    for col in 0..n {
        // solve L U x = P e_col
        let mut x: Vec<T> = (0..n).map(|i| if perm[i] == col { T::one() } else { T::zero() }).collect();
        for i in 0..n {
            for j in 0..i {
                let v = m[i * n + j] * x[j];
                x[i] -= v;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let v = m[i * n + j] * x[j];
                x[i] -= v;
            }
            x[i] /= m[i * n + i];
        }
        for i in 0..n {
            inv[i * n + col] = x[i];
        }
    }
    Ok(inv)
}

pub fn transpose<T: Scalar>(a: &[T], n: usize) -> Vec<T> {
    let mut t = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

pub fn matmul<T: Scalar>(a: &[T], b: &[T], n: usize) -> Vec<T> {
    let mut c = vec![T::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

/// Maximum absolute column sum.
pub fn norm_one<T: Scalar>(a: &[T], n: usize) -> T {
    (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].abs()).fold(T::zero(), |s, v| s + v))
        .fold(T::zero(), T::max)
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// sorted ascending.
pub fn symmetric_eigenvalues<T: Scalar>(a: &[T], n: usize) -> Vec<T> {
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .fold(T::zero(), |s, v| s + v);
        let diag: T = (0..n).map(|i| m[i * n + i] * m[i * n + i]).fold(T::zero(), |s, v| s + v);
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

/// Smallest eigenvalue of a Hermitian matrix given as real and imaginary
/// parts, via the real symmetric embedding `[[A, -B], [B, A]]`.
pub fn hermitian_min_eigenvalue<T: Scalar>(re: &[T], im: &[T], n: usize) -> T {
    let k = 2 * n;
    let mut big = vec![T::zero(); k * k];
    for i in 0..n {
        for j in 0..n {
            big[i * k + j] = re[i * n + j];
            big[(i + n) * k + (j + n)] = re[i * n + j];
            big[i * k + (j + n)] = -im[i * n + j];
            big[(i + n) * k + j] = im[i * n + j];
        }
    }
    symmetric_eigenvalues(&big, k).first().copied().unwrap_or(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_inverse() {
        let a: [f64; 9] = [2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0];
        assert!((determinant(&a, 3) - 18.0).abs() < 1e-12);
        let inv = inverse(&a, 3).unwrap();
        let id = matmul(&a, &inv, 3);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[i * 3 + j] - want).abs() < 1e-14);
            }
        }
        assert!(inverse(&[1.0_f64, 2.0, 2.0, 4.0], 2).is_err());
    }

    #[test]
    fn jacobi_eigenvalues() {
        let a: [f64; 4] = [2.0, 1.0, 1.0, 2.0];
        let ev = symmetric_eigenvalues(&a, 2);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        // Hermitian [[2, i], [-i, 2]] has eigenvalues 1, 3
        let re: [f64; 4] = [2.0, 0.0, 0.0, 2.0];
        let im: [f64; 4] = [0.0, 1.0, -1.0, 0.0];
        assert!((hermitian_min_eigenvalue(&re, &im, 2) - 1.0).abs() < 1e-13);
    }
}
