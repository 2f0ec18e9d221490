//! Real eigensolver for small dense matrices: Householder reduction to
//! Hessenberg form, Francis double-shift QR for the eigenvalues, inverse
//! iteration for the eigenvectors.

use super::matrix::{Lu, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_QR_ITERATIONS: usize = 60;

/// Reduces a square matrix to upper Hessenberg form by Householder reflections.
pub(crate) fn hessenberg<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let norm = ((k + 1)..n)
            .fold(T::zero(), |s, i| s + h[(i, k)] * h[(i, k)])
            .sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if h[(k + 1, k)] > T::zero() {
            -norm
        } else {
            norm
        };
        let mut v = vec![T::zero(); n];
        v[k + 1] = h[(k + 1, k)] - alpha;
        for i in (k + 2)..n {
            v[i] = h[(i, k)];
        }
        let vv = v.iter().fold(T::zero(), |s, x| s + *x * *x);
        if vv == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        // H ← (I − 2vvᵀ/vᵀv) H (I − 2vvᵀ/vᵀv)
        for j in 0..n {
            let dot = ((k + 1)..n).fold(T::zero(), |s, i| s + v[i] * h[(i, j)]);
            let f = two * dot / vv;
            for i in (k + 1)..n {
                h[(i, j)] = h[(i, j)] - f * v[i];
            }
        }
        for i in 0..n {
            let dot = ((k + 1)..n).fold(T::zero(), |s, j| s + h[(i, j)] * v[j]);
            let f = two * dot / vv;
            for j in (k + 1)..n {
                h[(i, j)] = h[(i, j)] - f * v[j];
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = T::zero();
        }
    }
    h
}

fn sign<T: Real>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues `(re, im)` of an upper Hessenberg matrix; `h` is destroyed.
pub(crate) fn hessenberg_eigenvalues<T: Real>(h: &mut Matrix<T>) -> Result<Vec<(T, T)>> {
    let n = h.rows();
    let mut wr = vec![T::zero(); n];
    let mut wi = vec![T::zero(); n];
    if n == 0 {
        return Ok(Vec::new());
    }
    let eps = T::epsilon();
    let mut anorm = T::zero();
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm = anorm + h[(i, j)].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut shift = T::zero();
    while nn >= 0 {
        let u = nn as usize;
        let mut its = 0;
        loop {
            let mut l = u;
            while l >= 1 {
                let mut s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
                if s == T::zero() {
                    s = anorm;
                }
                if h[(l, l - 1)].abs() <= eps * s {
                    h[(l, l - 1)] = T::zero();
                    break;
                }
                l -= 1;
            }
            let mut x = h[(u, u)];
            if l == u {
                wr[u] = x + shift;
                wi[u] = T::zero();
                nn -= 1;
                break;
            }
            let mut y = h[(u - 1, u - 1)];
            let mut w = h[(u, u - 1)] * h[(u - 1, u)];
            if l == u - 1 {
                let p = T::lit(0.5) * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x = x + shift;
                if q >= T::zero() {
                    let z = p + sign(z, p);
                    wr[u - 1] = x + z;
                    wr[u] = if z != T::zero() { x - w / z } else { x + z };
                    wi[u - 1] = T::zero();
                    wi[u] = T::zero();
                } else {
                    wr[u - 1] = x + p;
                    wr[u] = x + p;
                    wi[u - 1] = -z;
                    wi[u] = z;
                }
                nn -= 2;
                break;
            }
            if its == MAX_QR_ITERATIONS {
                return Err(Error::Dimension(format!(
                    "QR iteration did not converge for eigenvalue {u}"
                )));
            }
            if its == 10 || its == 20 {
                // exceptional shift
                shift = shift + x;
                for i in 0..=u {
                    h[(i, i)] = h[(i, i)] - x;
                }
                let s = h[(u, u - 1)].abs() + h[(u - 1, u - 2)].abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            its += 1;

            let mut m = u - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = h[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - rr - ss;
                r = h[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p = p / s;
                q = q / s;
                r = r / s;
                if m == l {
                    break;
                }
                let lhs = h[(m, m - 1)].abs() * (q.abs() + r.abs());
                let rhs = p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs());
                if lhs <= eps * rhs {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=u {
                h[(i, i - 2)] = T::zero();
                if i != m + 2 {
                    h[(i, i - 3)] = T::zero();
                }
            }
            let mut k = m;
            while k < u {
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if k + 1 != u {
                        h[(k + 2, k - 1)]
                    } else {
                        T::zero()
                    };
                    x = p.abs() + q.abs() + r.abs();
                    if x != T::zero() {
                        p = p / x;
                        q = q / x;
                        r = r / x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != T::zero() {
                    if k == m {
                        if l != m {
                            h[(k, k - 1)] = -h[(k, k - 1)];
                        }
                    } else {
                        h[(k, k - 1)] = -s * x;
                    }
                    p = p + s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q = q / p;
                    r = r / p;
                    for j in k..=u {
                        let mut pp = h[(k, j)] + q * h[(k + 1, j)];
                        if k + 1 != u {
                            pp = pp + r * h[(k + 2, j)];
                            h[(k + 2, j)] = h[(k + 2, j)] - pp * z;
                        }
                        h[(k + 1, j)] = h[(k + 1, j)] - pp * y;
                        h[(k, j)] = h[(k, j)] - pp * x;
                    }
                    let mmin = if u < k + 3 { u } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * h[(i, k)] + y * h[(i, k + 1)];
                        if k + 1 != u {
                            pp = pp + z * h[(i, k + 2)];
                            h[(i, k + 2)] = h[(i, k + 2)] - pp * r;
                        }
                        h[(i, k + 1)] = h[(i, k + 1)] - pp * q;
                        h[(i, k)] = h[(i, k)] - pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).collect())
}

/// All eigenvalues `(re, im)` of a square matrix.
pub fn eigenvalues<T: Real>(a: &Matrix<T>) -> Result<Vec<(T, T)>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let mut h = hessenberg(a);
    hessenberg_eigenvalues(&mut h)
}

fn normalize<T: Real>(v: &mut [T]) -> T {
    let norm = v.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt();
    if norm > T::zero() {
        v.iter_mut().for_each(|x| *x = *x / norm);
    }
    norm
}

/// Unit eigenvector for the real eigenvalue `lambda` by inverse iteration,
/// kept orthogonal to `against` (earlier vectors of the same cluster).
pub(crate) fn inverse_iteration<T: Real>(
    a: &Matrix<T>,
    lambda: T,
    seed: usize,
    against: &[Vec<T>],
) -> Result<Vec<T>> {
    let n = a.rows();
    let scale = a.norm_max().max(T::one());
    // a slightly perturbed shift keeps the factorization regular
    let mut shift = lambda + T::lit(1e-10) * scale;
    let mut lu = None;
    for _ in 0..8 {
        let mut m = a.clone();
        for i in 0..n {
            m[(i, i)] = m[(i, i)] - shift;
        }
        match Lu::new(&m) {
            Ok(f) => {
                lu = Some(f);
                break;
            }
            Err(_) => shift = shift + T::lit(1e-9) * scale,
        }
    }
    let lu = lu.ok_or(Error::DefectiveMatrix {
        condition: f64::INFINITY,
    })?;
    let mut v: Vec<T> = (0..n)
        .map(|i| T::one() + T::lit(0.37) * T::from_count((i * 7 + seed * 3) % 11) / T::lit(11.0))
        .collect();
    let project = |v: &mut Vec<T>| {
        for u in against {
            let dot = u
                .iter()
                .zip(v.iter())
                .fold(T::zero(), |s, (a, b)| s + *a * *b);
            for (x, y) in v.iter_mut().zip(u) {
                *x = *x - dot * *y;
            }
        }
    };
    project(&mut v);
    normalize(&mut v);
    for _ in 0..6 {
        let mut w = lu.solve(&v);
        project(&mut w);
        if normalize(&mut w) == T::zero() {
            return Err(Error::DefectiveMatrix {
                condition: f64::INFINITY,
            });
        }
        v = w;
    }
    // fix the sign: the largest component is positive
    let big = v
        .iter()
        .copied()
        .fold(T::zero(), |m, x| if x.abs() > m.abs() { x } else { m });
    if big < T::zero() {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(v)
}
