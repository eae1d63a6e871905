//! One-dimensional quadrature rules.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * pp * pp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| h * v).collect())
}

/// Midpoint rule with `n` cells on `[a, b]`.
pub fn midpoint_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let h = (b - a) / n as f64;
    ((0..n).map(|i| a + (i as f64 + 0.5) * h).collect(), vec![h; n])
}

/// Gauss-Legendre node count that integrates an entire function of
/// exponential type `omega` (in units of the mapped interval `[-1, 1]`)
/// to double precision.
pub fn nodes_for_bandwidth(omega: f64) -> usize {
    let omega = omega.max(0.0);
    ((omega + 8.0 * omega.cbrt() + 21.0) / 2.0).ceil() as usize
}

/// Smallest integer `>= n` whose only prime factors are 2, 3 and 5.
pub fn fft_friendly(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Time quadrature on a finite interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum TimeRule {
    /// Composite trapezoid with the given number of intervals.
    Trapezoid { intervals: usize },
    /// Gauss-Legendre with the given number of nodes.
    GaussLegendre { nodes: usize },
}

impl TimeRule {
    pub fn nodes_weights(&self, t0: f64, t1: f64) -> (Vec<f64>, Vec<f64>) {
        match *self {
            TimeRule::Trapezoid { intervals } => {
                let n = intervals.max(1);
                let h = (t1 - t0) / n as f64;
                let t = (0..=n).map(|i| t0 + i as f64 * h).collect();
                let mut w = vec![h; n + 1];
                w[0] *= 0.5;
                w[n] *= 0.5;
                (t, w)
            }
            TimeRule::GaussLegendre { nodes } => gauss_legendre_on(nodes.max(1), t0, t1),
        }
    }

    /// The same rule with twice the resolution.
    pub fn refined(&self) -> TimeRule {
        match *self {
            TimeRule::Trapezoid { intervals } => TimeRule::Trapezoid { intervals: 2 * intervals },
            TimeRule::GaussLegendre { nodes } => TimeRule::GaussLegendre { nodes: 2 * nodes },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 101] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - want).abs() < 1e-13, "n={n} deg={deg}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn bandwidth_rule_integrates_oscillation() {
        for &omega in &[3.0, 40.0, 300.0, 900.0] {
            let n = nodes_for_bandwidth(omega);
            let (x, w) = gauss_legendre(n);
            let got: f64 = x.iter().zip(&w).map(|(t, wi)| wi * (omega * t).cos()).sum();
            let want = 2.0 * omega.sin() / omega;
            assert!((got - want).abs() < 1e-14, "omega={omega}");
        }
    }

    #[test]
    fn trapezoid_weights_sum_to_length() {
        let (t, w) = TimeRule::Trapezoid { intervals: 64 }.nodes_weights(0.0, 2.0);
        assert_eq!(t.len(), 65);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-15);
        assert_eq!(TimeRule::Trapezoid { intervals: 64 }.refined(), TimeRule::Trapezoid { intervals: 128 });
    }

    #[test]
    fn fft_friendly_sizes() {
        assert_eq!(fft_friendly(513), 540);
        assert_eq!(fft_friendly(64), 64);
        assert_eq!(fft_friendly(7), 8);
    }
}
