//! Bessel functions of the first kind of integer order and their zeros.
//!
//! Small arguments use the power series, arguments below the order use
//! Miller's backward recurrence normalized by `J_0 + 2 sum J_2k = 1`, and
//! arguments above the order use the Hankel expansion for `J_0`, `J_1`
//! followed by forward recurrence.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Largest accepted argument magnitude.
pub const MAX_ARGUMENT: f64 = 1.0e6;
/// Largest accepted order.
pub const MAX_ORDER: u32 = 200;

const SERIES_LIMIT: f64 = 2.0;
const HANKEL_LIMIT: f64 = 25.0;
const RESCALE: f64 = 1.0e250;

/// Which function's zeros to locate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RootOf {
    /// Zeros of `J_m`.
    Function,
    /// Positive zeros of `J_m'`.
    Derivative,
}

fn check(order: u32, x: f64) -> Result<()> {
    if !x.is_finite() || x.abs() > MAX_ARGUMENT || order > MAX_ORDER {
        return Err(Error::BesselDomain { order, x });
    }
    Ok(())
}

/// `J_order(x)`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    check(order, x)?;
    let sign = if x < 0.0 && order % 2 == 1 { -1.0 } else { 1.0 };
    Ok(sign * j_window(order, order, x.abs())[0])
}

/// `J_order'(x)`.
pub fn bessel_j_prime(order: u32, x: f64) -> Result<f64> {
    check(order + 1, x)?;
    let (_, d) = bessel_j_and_prime(order, x.abs());
    let sign = if x < 0.0 && order.is_multiple_of(2) { -1.0 } else { 1.0 };
    Ok(sign * d)
}

/// `(J_m(x), J_m'(x))` for `x >= 0` without domain checks.
pub(crate) fn bessel_j_and_prime(order: u32, x: f64) -> (f64, f64) {
    if order == 0 {
        let w = j_window(0, 1, x);
        (w[0], -w[1])
    } else {
        let w = j_window(order - 1, order + 1, x);
        (w[1], 0.5 * (w[0] - w[2]))
    }
}

/// `J_lo(x), ..., J_hi(x)` for `x >= 0`.
pub(crate) fn j_window(lo: u32, hi: u32, x: f64) -> Vec<f64> {
    debug_assert!(lo <= hi && x >= 0.0);
    if x == 0.0 {
        return (lo..=hi).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect();
    }
    if x <= SERIES_LIMIT {
        return (lo..=hi).map(|k| series(k, x)).collect();
    }
    if (hi as f64) < x {
        forward(lo, hi, x)
    } else {
        miller(lo, hi, x)
    }
}

fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=n {
        term *= half / i as f64;
    }
    let q = half * half;
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * (k + n as f64));
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() || term == 0.0 {
            break;
        }
    }
    sum
}

fn forward(lo: u32, hi: u32, x: f64) -> Vec<f64> {
    let (j0, j1) = j01(x);
    let mut out = Vec::with_capacity((hi - lo + 1) as usize);
    let (mut prev, mut cur) = (j0, j1);
    if lo == 0 {
        out.push(j0);
    }
    if lo <= 1 && hi >= 1 {
        out.push(j1);
    }
    for k in 1..hi {
        let next = 2.0 * k as f64 / x * cur - prev;
        prev = cur;
        cur = next;
        if k + 1 >= lo {
            out.push(cur);
        }
    }
    out
}

fn j01(x: f64) -> (f64, f64) {
    if x >= HANKEL_LIMIT {
        (hankel(0, x), hankel(1, x))
    } else {
        let w = miller(0, 1, x);
        (w[0], w[1])
    }
}

fn hankel(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut term = 1.0;
    let (mut p, mut q) = (1.0, 0.0);
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let phase = (0.5 * nu as f64 + 0.25) * PI;
    let (s, c) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = c * cp + s * sp;
    let sin_chi = s * cp - c * sp;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

fn miller(lo: u32, hi: u32, x: f64) -> Vec<f64> {
    let top = (hi as f64).max(x.ceil());
    let mut start = (top + 30.0 + (160.0 * top).sqrt()) as u32;
    start += start % 2;
    let mut out = vec![0.0; (hi - lo + 1) as usize];
    let tox = 2.0 / x;
    let (mut bjp, mut bj) = (0.0_f64, 1.0_f64);
    let mut sum = 0.0;
    let mut even = false;
    for j in (1..=start).rev() {
        let bjm = j as f64 * tox * bj - bjp;
        bjp = bj;
        bj = bjm;
        if bj.abs() > RESCALE {
            bj /= RESCALE;
            bjp /= RESCALE;
            sum /= RESCALE;
            for v in out.iter_mut() {
                *v /= RESCALE;
            }
        }
        if even {
            sum += bj;
        }
        even = !even;
        // bj now holds the unnormalized J_{j-1}
        let k = j - 1;
        if k >= lo && k <= hi {
            out[(k - lo) as usize] = bj;
        }
    }
    let norm = 2.0 * sum - bj;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

fn root_fn(order: u32, kind: RootOf, x: f64) -> f64 {
    match kind {
        RootOf::Function => j_window(order, order, x)[0],
        RootOf::Derivative => bessel_j_and_prime(order, x).1,
    }
}

fn scan_start(order: u32, kind: RootOf) -> f64 {
    match (kind, order) {
        (RootOf::Derivative, 0) => 0.5,
        _ => order as f64,
    }
}

const SCAN_STEP: f64 = 0.25;

fn bisect(order: u32, kind: RootOf, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 4.0 * f64::EPSILON * hi || mid <= lo || mid >= hi {
            break;
        }
        let fm = root_fn(order, kind, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The `rank`-th positive zero (1-based) of `J_order` or `J_order'`.
///
/// Zeros of the derivative exclude `x = 0`.
pub fn bessel_root(order: u32, rank: u32, kind: RootOf) -> Result<f64> {
    if rank == 0 {
        return Err(Error::InvalidArgument("root rank starts at 1".into()));
    }
    check(order + 1, 0.0)?;
    let start = scan_start(order, kind);
    let limit = order as f64 + (rank as f64 + 0.5 * order as f64 + 2.0) * PI + 10.0;
    let mut found = 0;
    let mut a = start;
    let mut fa = root_fn(order, kind, a);
    while a < limit {
        let b = a + SCAN_STEP;
        let fb = root_fn(order, kind, b);
        if fb == 0.0 || (fa < 0.0) != (fb < 0.0) {
            found += 1;
            if found == rank {
                return Ok(if fb == 0.0 { b } else { bisect(order, kind, a, b, fa) });
            }
            if fb == 0.0 {
                // step past an exact zero so the next bracket starts clean
                a = b + 1e-9;
                fa = root_fn(order, kind, a);
                continue;
            }
        }
        a = b;
        fa = fb;
    }
    Err(Error::BracketFailure { order, rank, lo: start, hi: limit })
}

/// All positive zeros of `J_order` (or `J_order'`) not exceeding `limit`, ascending.
pub fn bessel_roots_below(order: u32, kind: RootOf, limit: f64) -> Result<Vec<f64>> {
    check(order + 1, limit)?;
    let mut roots = Vec::new();
    let mut a = scan_start(order, kind);
    if a >= limit {
        return Ok(roots);
    }
    let mut fa = root_fn(order, kind, a);
    while a < limit {
        let b = (a + SCAN_STEP).min(limit + SCAN_STEP);
        let fb = root_fn(order, kind, b);
        if fb == 0.0 || (fa < 0.0) != (fb < 0.0) {
            let r = if fb == 0.0 { b } else { bisect(order, kind, a, b, fa) };
            if r <= limit {
                roots.push(r);
            }
        }
        a = b;
        fa = if fb == 0.0 { root_fn(order, kind, b + 1e-9) } else { fb };
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Bessel's integral (1/pi) int_0^pi cos(m t - x sin t) dt via the
    // trapezoid rule on the periodic integrand, which converges geometrically.
    fn integral_oracle(m: u32, x: f64) -> f64 {
        let n = 4 * (x.abs() as usize + m as usize) + 400;
        let h = 2.0 * PI / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            let t = i as f64 * h;
            s += (m as f64 * t - x * t.sin()).cos();
        }
        s / n as f64
    }

    #[test]
    fn matches_integral_representation() {
        for &m in &[0u32, 1, 2, 5, 10, 30, 64, 129] {
            for &x in &[0.01, 0.7, 1.9, 2.1, 5.0, 13.3, 24.9, 25.1, 40.0, 77.7, 140.0, 260.0] {
                let got = bessel_j(m, x).unwrap();
                let want = integral_oracle(m, x);
                assert!((got - want).abs() < 1e-12, "J_{m}({x}) = {got} vs {want}");
            }
        }
    }

    #[test]
    fn small_argument_power_series() {
        // J_1(x) = x/2 - x^3/16 + x^5/384 - ...
        let x: f64 = 1e-3;
        let want = x / 2.0 - x.powi(3) / 16.0 + x.powi(5) / 384.0;
        assert!((bessel_j(1, x).unwrap() - want).abs() < 1e-18);
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn large_argument_reference() {
        // J_0 near 1e5 checked against the integral representation
        let x = 1.0e5 + 0.37;
        let want = integral_oracle(0, x);
        assert!((bessel_j(0, x).unwrap() - want).abs() < 1e-12);
        assert!(bessel_j(0, 2.0e6).is_err());
        assert!(bessel_j(MAX_ORDER + 1, 1.0).is_err());
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        for &m in &[0u32, 1, 4, 17] {
            for &x in &[0.5, 3.0, 11.0, 33.0] {
                let h = 1e-5;
                let fd = (bessel_j(m, x + h).unwrap() - bessel_j(m, x - h).unwrap()) / (2.0 * h);
                assert!((bessel_j_prime(m, x).unwrap() - fd).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn first_zeros() {
        let j01 = bessel_root(0, 1, RootOf::Function).unwrap();
        assert!((j01 - 2.404_825_557_695_773).abs() < 1e-12);
        let j11 = bessel_root(1, 1, RootOf::Function).unwrap();
        assert!((j11 - 3.831_705_970_207_512).abs() < 1e-12);
        let d11 = bessel_root(1, 1, RootOf::Derivative).unwrap();
        assert!((d11 - 1.841_183_781_340_659).abs() < 1e-12);
        let d01 = bessel_root(0, 1, RootOf::Derivative).unwrap();
        assert!((d01 - j11).abs() < 1e-12);
    }

    #[test]
    fn roots_below_agree_with_ranked_roots() {
        for &m in &[0u32, 3, 20] {
            for kind in [RootOf::Function, RootOf::Derivative] {
                let roots = bessel_roots_below(m, kind, 60.0).unwrap();
                for (i, r) in roots.iter().enumerate() {
                    let ranked = bessel_root(m, i as u32 + 1, kind).unwrap();
                    assert!((r - ranked).abs() < 1e-12);
                    assert!(root_fn(m, kind, *r).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_rank_rejected() {
        assert!(bessel_root(0, 0, RootOf::Function).is_err());
    }
}
