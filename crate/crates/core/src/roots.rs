use crate::error::{Error, Result};
use crate::scalar::Real;

/// Root of an increasing function on `[lo, hi]` with `f(lo) ≤ 0 ≤ f(hi)`:
/// Newton steps are taken when they stay inside the bracket, bisection otherwise.
pub fn newton_bisect<T: Real, F>(mut f: F, mut lo: T, mut hi: T, tol: T) -> Result<T>
where
    F: FnMut(T) -> Result<(T, T)>,
{
    let half = T::lit(0.5);
    let mut x = (lo + hi) * half;
    for _ in 0..500 {
        let (fx, dfx) = f(x)?;
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx < T::zero() {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx > T::zero() && newton > lo && newton < hi { newton } else { (lo + hi) * half };
        if next == x || hi - lo <= T::epsilon() * (T::one() + x.abs()) {
            return Ok(x);
        }
        x = next;
    }
    Err(Error::NoConvergence("hybrid Newton/bisection".into()))
}

/// Expands `[-1, 1]` by doubling until an increasing function changes sign.
pub fn expand_bracket<T: Real, F>(mut f: F, max_doublings: usize) -> Result<(T, T, T, T)>
where
    F: FnMut(T) -> Result<T>,
{
    let mut lo = -T::one();
    let mut hi = T::one();
    let mut flo = f(lo)?;
    let mut fhi = f(hi)?;
    for _ in 0..max_doublings {
        if flo <= T::zero() && fhi >= T::zero() {
            return Ok((lo, hi, flo, fhi));
        }
        let w = hi - lo;
        if flo > T::zero() {
            hi = lo;
            fhi = flo;
            lo = lo - w - w;
            flo = f(lo)?;
        } else {
            lo = hi;
            flo = fhi;
            hi = hi + w + w;
            fhi = f(hi)?;
        }
    }
    Err(Error::BracketFailure(format!("no sign change within [{lo}, {hi}]")))
}

/// Bisection for the boundary of `{f > level}` of an increasing function:
/// returns a point `x` with `f(x − w) ≤ level < f(x)` up to bracket width `width`.
pub fn bisect_level<T: Real, F>(mut f: F, mut lo: T, mut hi: T, level: T, width: T) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    let half = T::lit(0.5);
    for _ in 0..400 {
        if hi - lo <= width {
            break;
        }
        let mid = (lo + hi) * half;
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? > level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo + hi) * half)
}
