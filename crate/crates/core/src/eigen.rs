//! Eigenvalues of real upper Hessenberg matrices (balancing plus the
//! EISPACK `hqr` double-shift QR iteration, eigenvalues only).

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    n: usize,
    a: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![T::zero(); n * n] }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "matrix must be square");
            for (j, &v) in r.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| self.a[i * self.n..(i + 1) * self.n].to_vec()).collect()
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.a[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.a[i * self.n + j]
    }
}

/// Diagonal similarity scaling (radix 2) that equalises row and column norms.
pub fn balance<T: Real>(h: &mut Mat<T>) {
    let n = h.dim();
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = T::zero();
            let mut c = T::zero();
            for j in 0..n {
                if j != i {
                    c += h[(j, i)].abs();
                    r += h[(i, j)].abs();
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let mut g = r / radix;
            let mut f = T::one();
            let s = c + r;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < T::lit(0.95) * s {
                done = false;
                let gi = T::one() / f;
                for j in 0..n {
                    h[(i, j)] *= gi;
                }
                for j in 0..n {
                    h[(j, i)] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix. The matrix is overwritten.
pub fn hqr<T: Real>(h: &mut Mat<T>) -> Result<Vec<Complex<T>>> {
    let nn = h.dim() as isize;
    let mut wr = vec![T::zero(); nn as usize];
    let mut wi = vec![T::zero(); nn as usize];
    if nn == 0 {
        return Ok(Vec::new());
    }
    let eps = T::epsilon();
    let two = T::lit(2.0);
    let mut norm = T::zero();
    for i in 0..nn {
        for j in (i - 1).max(0)..nn {
            norm += h[(i as usize, j as usize)].abs();
        }
    }
    let at = |h: &Mat<T>, i: isize, j: isize| h[(i as usize, j as usize)];

    let mut n = nn - 1;
    let mut exshift = T::zero();
    let (mut p, mut q, mut r) = (T::zero(), T::zero(), T::zero());
    let (mut s, mut z);
    let (mut w, mut x, mut y);
    let mut iter = 0usize;
    let mut total = 0usize;

    while n >= 0 {
        let mut l = n;
        while l > 0 {
            s = at(h, l - 1, l - 1).abs() + at(h, l, l).abs();
            if s == T::zero() {
                s = norm;
            }
            if at(h, l, l - 1).abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            wr[n as usize] = at(h, n, n) + exshift;
            wi[n as usize] = T::zero();
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            w = at(h, n, n - 1) * at(h, n - 1, n);
            p = (at(h, n - 1, n - 1) - at(h, n, n)) / two;
            q = p * p + w;
            z = q.abs().sqrt();
            x = at(h, n, n) + exshift;
            if q >= T::zero() {
                z = if p >= T::zero() { p + z } else { p - z };
                wr[(n - 1) as usize] = x + z;
                wr[n as usize] = if z != T::zero() { x - w / z } else { x + z };
                wi[(n - 1) as usize] = T::zero();
                wi[n as usize] = T::zero();
            } else {
                wr[(n - 1) as usize] = x + p;
                wr[n as usize] = x + p;
                wi[(n - 1) as usize] = z;
                wi[n as usize] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            x = at(h, n, n);
            y = T::zero();
            w = T::zero();
            if l < n {
                y = at(h, n - 1, n - 1);
                w = at(h, n, n - 1) * at(h, n - 1, n);
            }
            if iter == 10 {
                exshift += x;
                for i in 0..=n {
                    h[(i as usize, i as usize)] -= x;
                }
                s = at(h, n, n - 1).abs() + at(h, n - 1, n - 2).abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            if iter == 30 {
                s = (y - x) / two;
                s = s * s + w;
                if s > T::zero() {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / two + s);
                    for i in 0..=n {
                        h[(i as usize, i as usize)] -= s;
                    }
                    exshift += s;
                    x = T::lit(0.964);
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            total += 1;
            if total > 100 * nn as usize + 100 {
                return Err(Error::NoConvergence("Hessenberg QR iteration".into()));
            }

            let mut m = n - 2;
            while m >= l {
                z = at(h, m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / at(h, m + 1, m) + at(h, m, m + 1);
                q = at(h, m + 1, m + 1) - z - r - s;
                r = at(h, m + 2, m + 1);
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if at(h, m, m - 1).abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (at(h, m - 1, m - 1).abs() + z.abs() + at(h, m + 1, m + 1).abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=n {
                h[(i as usize, (i - 2) as usize)] = T::zero();
                if i > m + 2 {
                    h[(i as usize, (i - 3) as usize)] = T::zero();
                }
            }

            let mut k = m;
            while k <= n - 1 {
                let notlast = k != n - 1;
                if k != m {
                    p = at(h, k, k - 1);
                    q = at(h, k + 1, k - 1);
                    r = if notlast { at(h, k + 2, k - 1) } else { T::zero() };
                    x = p.abs() + q.abs() + r.abs();
                    if x == T::zero() {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < T::zero() {
                    s = -s;
                }
                if s != T::zero() {
                    if k != m {
                        h[(k as usize, (k - 1) as usize)] = -s * x;
                    } else if l != m {
                        let v = at(h, k, k - 1);
                        h[(k as usize, (k - 1) as usize)] = -v;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn {
                        let (ku, ju) = (k as usize, j as usize);
                        p = h[(ku, ju)] + q * h[(ku + 1, ju)];
                        if notlast {
                            p += r * h[(ku + 2, ju)];
                            h[(ku + 2, ju)] -= p * z;
                        }
                        h[(ku, ju)] -= p * x;
                        h[(ku + 1, ju)] -= p * y;
                    }
                    for i in 0..=n.min(k + 3) {
                        let (iu, ku) = (i as usize, k as usize);
                        p = x * h[(iu, ku)] + y * h[(iu, ku + 1)];
                        if notlast {
                            p += z * h[(iu, ku + 2)];
                            h[(iu, ku + 2)] -= p * r;
                        }
                        h[(iu, ku)] -= p;
                        h[(iu, ku + 1)] -= p * q;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex::new(re, im)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_matrix_eigenvalues_are_its_diagonal() {
        let mut h = Mat::<f64>::from_rows(&[vec![1.0, 2.0, 3.0], vec![0.0, 4.0, 5.0], vec![0.0, 0.0, 6.0]]);
        let mut ev: Vec<f64> = hqr(&mut h).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.iter().zip([1.0, 4.0, 6.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_block_gives_conjugate_pair() {
        let mut h = Mat::<f64>::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]);
        let ev = hqr(&mut h).unwrap();
        assert!(ev.iter().all(|z| z.re.abs() < 1e-14 && (z.im.abs() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn balancing_preserves_trace() {
        let mut h = Mat::<f64>::from_rows(&[vec![1.0, 1e6, 0.0], vec![1e-6, 2.0, 3.0], vec![0.0, 4.0, 5.0]]);
        balance(&mut h);
        assert!((h[(0, 0)] + h[(1, 1)] + h[(2, 2)] - 8.0).abs() < 1e-12);
        assert!(h[(0, 1)].abs() < 1e6);
    }
}
