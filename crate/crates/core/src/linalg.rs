use num_complex::Complex;

use crate::eigen::Mat;
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::scalar::Real;

/// Solves `(z I − A) w = b` by Gaussian elimination with partial pivoting.
pub fn solve_shifted<T: Real>(a: &Mat<T>, z: Complex<T>, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    let n = a.dim();
    let mut m: Vec<Complex<T>> = Vec::with_capacity(n * n);
    let mut norm = T::zero();
    for i in 0..n {
        for j in 0..n {
            let mut v = Complex::new(-a[(i, j)], T::zero());
            if i == j {
                v = v + z;
            }
            norm = norm.max(v.norm());
            m.push(v);
        }
    }
    let mut x = b.to_vec();
    let pole = || Error::Pole { re: z.re.as_f64(), im: z.im.as_f64() };
    let tiny = T::lit(64.0) * T::epsilon() * norm.max(T::min_positive_value());
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[i * n + k].norm().partial_cmp(&m[j * n + k].norm()).unwrap())
            .unwrap();
        if !(m[piv * n + k].norm() > tiny) {
            return Err(pole());
        }
        if piv != k {
            for j in 0..n {
                m.swap(k * n + j, piv * n + j);
            }
            x.swap(k, piv);
        }
        let d = m[k * n + k];
        for i in (k + 1)..n {
            let f = m[i * n + k] / d;
            if f.norm() == T::zero() {
                continue;
            }
            for j in k..n {
                let v = m[k * n + j];
                m[i * n + j] = m[i * n + j] - f * v;
            }
            let v = x[k];
            x[i] = x[i] - f * v;
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in (k + 1)..n {
            s = s - m[k * n + j] * x[j];
        }
        x[k] = s / m[k * n + k];
    }
    Ok(x)
}

/// Faddeev–LeVerrier: characteristic polynomial `det(θI − A)` and the matrix
/// coefficients `M_1..M_m` with `adj(θI − A) = Σ_k M_k θ^{m−k}`.
pub fn faddeev_leverrier<T: Real>(a: &Mat<T>) -> (Polynomial<T>, Vec<Mat<T>>) {
    let n = a.dim();
    let mut c = vec![T::zero(); n + 1];
    c[n] = T::one();
    let mut ms = Vec::with_capacity(n);
    let mut prev = Mat::zeros(n);
    for k in 1..=n {
        let mut mk = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = T::zero();
                for l in 0..n {
                    s += a[(i, l)] * prev[(l, j)];
                }
                mk[(i, j)] = s;
            }
            mk[(i, i)] += c[n + 1 - k];
        }
        let mut tr = T::zero();
        for i in 0..n {
            for l in 0..n {
                tr += a[(i, l)] * mk[(l, i)];
            }
        }
        c[n - k] = -tr / T::lit(k as f64);
        ms.push(mk.clone());
        prev = mk;
    }
    (Polynomial::new(c), ms)
}
