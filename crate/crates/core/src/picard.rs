//! Picard iteration for the Duhamel map and its contraction diagnostics.

use crate::error::{Error, Result};
use crate::evolution::{check_dealias, coeff_mass, flow_coeffs, project_q, QuadraticNonlinearity, Trajectory};
use crate::field::{japanese, sobolev_norm, SpectralField};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PicardOptions {
    /// Sobolev index of the reported increments.
    pub s: f64,
    pub max_iter: usize,
    /// Stop once the L2 increment falls below this value.
    pub tol: f64,
    /// Time exponents entering `theta_1 = 1 - b - b'`.
    pub b: f64,
    pub b_prime: f64,
    /// Linear-estimate constant entering the ball radius `R = 2 c0 ||u0||_{H^s}`.
    pub c0: f64,
    pub dealias: bool,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { s: 1.0, max_iter: 30, tol: 1e-14, b: 0.55, b_prime: 0.40, c0: 1.0, dealias: true }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    /// `max_t ||u^{(j+1)} - u^{(j)}||_{L2}`.
    pub increments_l2: Vec<f64>,
    /// The same in `H^s`.
    pub increments_hs: Vec<f64>,
    /// Successive increment ratios above the rounding floor.
    pub ratios: Vec<f64>,
    /// Median of `ratios`.
    pub kappa: f64,
    /// Set when the increment grew three times in a row.
    pub non_contraction: bool,
    pub converged: bool,
    pub iterations: usize,
    pub radius: f64,
    pub theta1: f64,
}

fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn time_grid(t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t_end.is_finite() && t_end > 0.0 && dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("need T > 0 and dt > 0, got T = {t_end}, dt = {dt}")));
    }
    let n = (t_end / dt).round().max(1.0) as usize;
    let h = t_end / n as f64;
    Ok((0..=n).map(|j| j as f64 * h).collect())
}

/// One application of the Duhamel map, trapezoid rule in time.
fn duhamel(u0: &SpectralField, q: &QuadraticNonlinearity, times: &[f64], iterate: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let basis = u0.basis();
    let qs: Vec<Vec<Complex64>> = iterate.par_iter().map(|c| project_q(basis, c, q)).collect();
    // g_k(tau) = e^{i lambda_k tau} Q_k(tau)
    let g: Vec<Vec<Complex64>> = qs.iter().zip(times).map(|(qc, &t)| flow_coeffs(basis, qc, -t)).collect();
    let k = basis.len();
    let mut acc = vec![Complex64::new(0.0, 0.0); k];
    let mut out = Vec::with_capacity(times.len());
    for (j, &t) in times.iter().enumerate() {
        if j > 0 {
            let h = times[j] - times[j - 1];
            for m in 0..k {
                acc[m] += (g[j - 1][m] + g[j][m]) * (0.5 * h);
            }
        }
        let inner: Vec<Complex64> = u0.coeffs().iter().zip(&acc).map(|(c, a)| c - Complex64::new(0.0, 1.0) * a).collect();
        out.push(flow_coeffs(basis, &inner, t));
    }
    out
}

/// Iterates the Duhamel map from the free solution on `[0, T]` with step `dt`.
pub fn picard_solve(
    u0: &SpectralField,
    q: &QuadraticNonlinearity,
    t_end: f64,
    dt: f64,
    opts: &PicardOptions,
) -> Result<(Trajectory, ContractionReport)> {
    let times = time_grid(t_end, dt)?;
    let basis = u0.basis().clone();
    if opts.dealias {
        check_dealias(&basis)?;
    }
    let weights: Vec<f64> = basis.modes().iter().map(|m| japanese(m.mu).powf(2.0 * opts.s)).collect();
    let scale = 1.0 + u0.l2_norm();
    let floor = 1e-13 * scale;
    let mut current: Vec<Vec<Complex64>> = times.iter().map(|&t| flow_coeffs(&basis, u0.coeffs(), t)).collect();
    let (mut d_l2, mut d_hs, mut ratios) = (Vec::new(), Vec::new(), Vec::new());
    let mut converged = false;
    let mut rises = 0usize;
    let mut non_contraction = false;
    for _ in 0..opts.max_iter {
        let next = duhamel(u0, q, &times, &current);
        let (mut l2, mut hs) = (0.0_f64, 0.0_f64);
        for (a, b) in next.iter().zip(&current) {
            let (mut sl, mut sh) = (0.0, 0.0);
            for ((x, y), w) in a.iter().zip(b).zip(&weights) {
                let d = (x - y).norm_sqr();
                sl += d;
                sh += w * d;
            }
            l2 = l2.max(sl.sqrt());
            hs = hs.max(sh.sqrt());
        }
        if !l2.is_finite() || coeff_mass(next.last().expect("non-empty grid")).sqrt() > crate::evolution::BLOW_UP_NORM {
            return Err(Error::BlowUp { t: t_end, norm: l2 });
        }
        if let Some(&prev) = d_l2.last() {
            if prev > floor && l2 > floor {
                ratios.push(l2 / prev);
            }
            if l2 > prev && prev > floor {
                rises += 1;
                non_contraction |= rises >= 3;
            } else {
                rises = 0;
            }
        }
        d_l2.push(l2);
        d_hs.push(hs);
        current = next;
        if l2 <= opts.tol {
            converged = true;
            break;
        }
    }
    let report = ContractionReport {
        kappa: median(&ratios),
        iterations: d_l2.len(),
        increments_l2: d_l2,
        increments_hs: d_hs,
        ratios,
        non_contraction,
        converged,
        radius: 2.0 * opts.c0 * sobolev_norm(u0, opts.s),
        theta1: 1.0 - opts.b - opts.b_prime,
    };
    Ok((Trajectory::from_parts(basis, times, current), report))
}

/// `sup_t ||u(t) - v(t)||_{H^s} / ||u0 - v0||_{H^s}` for Picard solutions;
/// zero for identical data.
pub fn lipschitz_probe(
    u0: &SpectralField,
    v0: &SpectralField,
    q: &QuadraticNonlinearity,
    t_end: f64,
    dt: f64,
    opts: &PicardOptions,
) -> Result<f64> {
    let diff0 = sobolev_norm(&u0.sub(v0)?, opts.s);
    if diff0 == 0.0 {
        return Ok(0.0);
    }
    let (tu, _) = picard_solve(u0, q, t_end, dt, opts)?;
    let (tv, _) = picard_solve(v0, q, t_end, dt, opts)?;
    let mut worst: f64 = 0.0;
    for i in 0..tu.len() {
        worst = worst.max(sobolev_norm(&tu.state(i).sub(&tv.state(i))?, opts.s));
    }
    Ok(worst / diff0)
}
