//! Space-time fields on a periodic time window and Bourgain-space norms.
//!
//! Time transforms are taken in the interaction picture: mode `k` is
//! demodulated by `e^{i lambda_k t}` before the FFT, so its spectrum lives on
//! the lattice `tau = -lambda_k + 2 pi n / W` and the modulation variable
//! `sigma = tau + lambda_k` runs over `2 pi n / W` for every mode. A free
//! solution `psi(t) e^{it Delta} f` therefore has modulation profile
//! `psi_hat`, independent of the eigenvalues.

use crate::error::{Error, Result};
use crate::evolution::{flow_coeffs, Trajectory};
use crate::field::{japanese, SpectralField};
use crate::manifold::SpectralBasis;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

/// Mode coefficients sampled at `t_j = t0 + j W / n_t`, `j < n_t`.
#[derive(Clone, Debug)]
pub struct SpaceTimeField {
    basis: Arc<SpectralBasis>,
    t0: f64,
    window: f64,
    samples: Vec<Vec<Complex64>>,
}

fn check_lattice(n_t: usize, window: f64) -> Result<()> {
    if n_t < 16 || !n_t.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("time samples must be a power of two >= 16, got {n_t}")));
    }
    if !(window.is_finite() && window > 0.0) {
        return Err(Error::InvalidArgument(format!("window length must be positive, got {window}")));
    }
    Ok(())
}

impl SpaceTimeField {
    pub fn new(basis: Arc<SpectralBasis>, t0: f64, window: f64, samples: Vec<Vec<Complex64>>) -> Result<Self> {
        check_lattice(samples.len(), window)?;
        if let Some(bad) = samples.iter().find(|s| s.len() != basis.len()) {
            return Err(Error::DimensionMismatch { expected: basis.len(), got: bad.len() });
        }
        Ok(SpaceTimeField { basis, t0, window, samples })
    }

    /// Samples `f(t)` at the lattice times.
    pub fn from_fn(
        basis: Arc<SpectralBasis>,
        t0: f64,
        window: f64,
        n_t: usize,
        mut f: impl FnMut(f64) -> Vec<Complex64>,
    ) -> Result<Self> {
        check_lattice(n_t, window)?;
        let dt = window / n_t as f64;
        let samples = (0..n_t).map(|j| f(t0 + j as f64 * dt)).collect();
        Self::new(basis, t0, window, samples)
    }

    /// `psi(t) e^{it Delta} u0`.
    pub fn windowed_free(u0: &SpectralField, psi: impl Fn(f64) -> f64, t0: f64, window: f64, n_t: usize) -> Result<Self> {
        let basis = u0.basis().clone();
        Self::from_fn(basis.clone(), t0, window, n_t, |t| {
            let p = psi(t);
            flow_coeffs(&basis, u0.coeffs(), t).into_iter().map(|c| c * p).collect()
        })
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn n_t(&self) -> usize {
        self.samples.len()
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.window / self.n_t() as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_t()).map(|j| self.t0 + j as f64 * self.dt()).collect()
    }

    pub fn samples(&self) -> &[Vec<Complex64>] {
        &self.samples
    }

    pub fn sample(&self, j: usize) -> SpectralField {
        SpectralField::new(self.basis.clone(), self.samples[j].clone()).expect("sample length matches basis")
    }

    fn compatible(&self, other: &SpaceTimeField) -> Result<()> {
        if !(Arc::ptr_eq(&self.basis, &other.basis) || self.basis.fingerprint() == other.basis.fingerprint()) {
            return Err(Error::BasisMismatch);
        }
        if self.n_t() != other.n_t() || self.window != other.window || self.t0 != other.t0 {
            return Err(Error::InvalidArgument("space-time fields live on different time lattices".into()));
        }
        Ok(())
    }

    /// `int int u conj(v) dx dt` on the lattice.
    pub fn inner(&self, other: &SpaceTimeField) -> Result<Complex64> {
        self.compatible(other)?;
        let mut s = Complex64::new(0.0, 0.0);
        for (a, b) in self.samples.iter().zip(&other.samples) {
            s += a.iter().zip(b).map(|(x, y)| x * y.conj()).sum::<Complex64>();
        }
        Ok(s * self.dt())
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.samples.iter().flat_map(|c| c.iter()).map(|z| z.norm_sqr()).sum();
        (s * self.dt()).sqrt()
    }

    /// Applies a spatial multiplier `f(mu_k)` to every sample.
    pub fn map_space(&self, f: impl Fn(f64) -> f64) -> SpaceTimeField {
        let w: Vec<f64> = self.basis.modes().iter().map(|m| f(m.mu)).collect();
        let samples = self.samples.iter().map(|c| c.iter().zip(&w).map(|(z, x)| z * x).collect()).collect();
        SpaceTimeField { samples, ..self.clone() }
    }
}

/// Per-mode time spectra in the interaction picture.
#[derive(Clone, Debug)]
pub struct TimeSpectrum {
    basis: Arc<SpectralBasis>,
    t0: f64,
    window: f64,
    /// `data[k][n]`, FFT order in `n`.
    data: Vec<Vec<Complex64>>,
}

impl TimeSpectrum {
    pub fn n_t(&self) -> usize {
        self.data.first().map_or(0, |d| d.len())
    }

    /// Modulation frequency `sigma_n = tau + lambda_k` of FFT slot `n`.
    pub fn sigma(&self, n: usize) -> f64 {
        let nt = self.n_t();
        let signed = if n < nt / 2 { n as f64 } else { n as f64 - nt as f64 };
        2.0 * PI * signed / self.window
    }

    /// Time frequency `tau` of slot `n` for mode `k`.
    pub fn tau(&self, k: usize, n: usize) -> f64 {
        self.sigma(n) - self.basis.modes()[k].lambda
    }

    pub fn mode(&self, k: usize) -> &[Complex64] {
        &self.data[k]
    }

    /// Multiplies entry `(k, n)` by `f(mu_k, sigma_n)`.
    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> TimeSpectrum {
        let sig: Vec<f64> = (0..self.n_t()).map(|n| self.sigma(n)).collect();
        let data = self
            .data
            .iter()
            .zip(self.basis.modes())
            .map(|(row, m)| row.iter().zip(&sig).map(|(z, s)| z * f(m.mu, *s)).collect())
            .collect();
        TimeSpectrum { data, ..self.clone() }
    }

    /// CSV with columns `k,tau_index,re,im`; `tau_index` is the signed lattice index.
    pub fn to_csv(&self) -> String {
        use crate::report::fmt17;
        let nt = self.n_t() as i64;
        let mut out = String::from("k,tau_index,re,im\n");
        for (k, row) in self.data.iter().enumerate() {
            for (n, z) in row.iter().enumerate() {
                let signed = if (n as i64) < nt / 2 { n as i64 } else { n as i64 - nt };
                out.push_str(&format!("{},{},{},{}\n", k, signed, fmt17(z.re), fmt17(z.im)));
            }
        }
        out
    }

    /// Inverse transform back to lattice samples.
    pub fn inverse(&self) -> SpaceTimeField {
        let nt = self.n_t();
        let dt = self.window / nt as f64;
        let fft = FftPlanner::new().plan_fft_inverse(nt);
        let k_modes = self.basis.len();
        let mut samples = vec![vec![Complex64::new(0.0, 0.0); k_modes]; nt];
        let mut buf = vec![Complex64::new(0.0, 0.0); nt];
        for (k, row) in self.data.iter().enumerate() {
            for n in 0..nt {
                buf[n] = row[n] * Complex64::from_polar(1.0 / (nt as f64 * dt), self.sigma(n) * self.t0);
            }
            fft.process(&mut buf);
            let lam = self.basis.modes()[k].lambda;
            for (j, s) in samples.iter_mut().enumerate() {
                let t = self.t0 + j as f64 * dt;
                s[k] = buf[j] * Complex64::from_polar(1.0, -lam * t);
            }
        }
        SpaceTimeField { basis: self.basis.clone(), t0: self.t0, window: self.window, samples }
    }
}

/// `u_hat_k(tau) = dt sum_j u_k(t_j) e^{-i tau t_j}` on each mode's lattice.
pub fn time_fourier(u: &SpaceTimeField) -> TimeSpectrum {
    let nt = u.n_t();
    let dt = u.dt();
    let fft = FftPlanner::new().plan_fft_forward(nt);
    let mut data = Vec::with_capacity(u.basis.len());
    let mut buf = vec![Complex64::new(0.0, 0.0); nt];
    for (k, m) in u.basis.modes().iter().enumerate() {
        for (j, b) in buf.iter_mut().enumerate() {
            let t = u.t0 + j as f64 * dt;
            *b = u.samples[j][k] * Complex64::from_polar(1.0, m.lambda * t);
        }
        fft.process(&mut buf);
        let row: Vec<Complex64> = buf
            .iter()
            .enumerate()
            .map(|(n, z)| {
                let signed = if n < nt / 2 { n as f64 } else { n as f64 - nt as f64 };
                let sigma = 2.0 * PI * signed / u.window;
                z * Complex64::from_polar(dt, -sigma * u.t0)
            })
            .collect();
        data.push(row);
    }
    TimeSpectrum { basis: u.basis.clone(), t0: u.t0, window: u.window, data }
}

/// `(sum_k sum_tau <tau + lambda_k>^{2b} <mu_k>^{2s} |u_hat_k(tau)|^2 / W)^{1/2}`.
pub fn xsb_norm(u: &SpaceTimeField, s: f64, b: f64) -> f64 {
    let spec = time_fourier(u);
    let nt = spec.n_t();
    let tw: Vec<f64> = (0..nt).map(|n| japanese(spec.sigma(n)).powf(2.0 * b)).collect();
    let mut total = 0.0;
    for (row, m) in spec.data.iter().zip(u.basis.modes()) {
        let sw = japanese(m.mu).powf(2.0 * s);
        total += sw * row.iter().zip(&tw).map(|(z, w)| w * z.norm_sqr()).sum::<f64>();
    }
    (total / u.window).sqrt()
}

fn check_level(level: u32) -> Result<()> {
    if level == 0 || !level.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("modulation level must be a power of two, got {level}")));
    }
    Ok(())
}

/// Keeps the entries with `L <= <tau + lambda_k> < 2L`.
pub fn modulation_project(u: &SpaceTimeField, level: u32) -> Result<SpaceTimeField> {
    check_level(level)?;
    let l = level as f64;
    Ok(time_fourier(u).map(|_, sigma| {
        let w = japanese(sigma);
        if w >= l && w < 2.0 * l {
            1.0
        } else {
            0.0
        }
    }).inverse())
}

/// Dyadic modulation levels whose bands cover the lattice of `u`.
pub fn modulation_levels(u: &SpaceTimeField) -> Vec<u32> {
    let sigma_max = PI * u.n_t() as f64 / u.window;
    let top = japanese(sigma_max);
    let mut levels = vec![1u32];
    while 2.0 * (*levels.last().expect("non-empty") as f64) <= top {
        let next = levels.last().expect("non-empty") * 2;
        levels.push(next);
    }
    levels
}

/// `Lambda^b`: multiplies by `<tau + lambda_k>^b`.
pub fn apply_lambda_b(u: &SpaceTimeField, b: f64) -> SpaceTimeField {
    time_fourier(u).map(|_, sigma| japanese(sigma).powf(b)).inverse()
}

/// `J^s` applied at every time sample.
pub fn apply_js_spacetime(u: &SpaceTimeField, s: f64) -> SpaceTimeField {
    u.map_space(|mu| japanese(mu).powf(0.5 * s))
}

/// `|<J^s Lambda^b v, J^{-s} Lambda^{-b} u> - <v, u>|`.
pub fn duality_pairing_check(u: &SpaceTimeField, v: &SpaceTimeField, s: f64, b: f64) -> Result<f64> {
    let lhs_v = apply_js_spacetime(&apply_lambda_b(v, b), s);
    let lhs_u = apply_js_spacetime(&apply_lambda_b(u, -b), -s);
    let pairing = lhs_v.inner(&lhs_u)?;
    let plain = v.inner(u)?;
    Ok((pairing - plain).norm())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EmbeddingReport {
    /// `(int ||u(t)||^3 dt)^{1/3}`.
    pub l3_l2: f64,
    pub x0_sixth: f64,
    /// `l3_l2 / x0_sixth`.
    pub l3_ratio: f64,
    /// `max_t ||u(t)||_{H^s}`.
    pub sup_hs: f64,
    pub xsb_high: f64,
    /// `sup_hs / xsb_high`.
    pub sup_ratio: f64,
}

/// Records the constants in `L^3_t L^2 <= C X^{0,1/6}` and
/// `C_t H^s <= C X^{s,b}` for `b > 1/2`.
pub fn embedding_checks(u: &SpaceTimeField, s: f64, b_high: f64) -> Result<EmbeddingReport> {
    if b_high <= 0.5 {
        return Err(Error::InvalidArgument(format!("continuity embedding needs b > 1/2, got {b_high}")));
    }
    let dt = u.dt();
    let l3 = (u.samples.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().powi(3)).sum::<f64>() * dt).cbrt();
    let x0 = xsb_norm(u, 0.0, 1.0 / 6.0);
    let sup = (0..u.n_t()).map(|j| crate::field::sobolev_norm(&u.sample(j), s)).fold(0.0, f64::max);
    let xh = xsb_norm(u, s, b_high);
    Ok(EmbeddingReport { l3_l2: l3, x0_sixth: x0, l3_ratio: l3 / x0, sup_hs: sup, xsb_high: xh, sup_ratio: sup / xh })
}

/// `C^2` cutoff equal to one on `[0, plateau]`, ramping to zero over `ramp`
/// on both sides with the quintic smoothstep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cutoff {
    pub plateau: f64,
    pub ramp: f64,
}

impl Cutoff {
    /// Plateau `[0, T]` with ramps of width `T/2`.
    pub fn for_interval(t: f64) -> Self {
        Cutoff { plateau: t, ramp: 0.5 * t }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let step = |x: f64| x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
        if t >= 0.0 && t <= self.plateau {
            1.0
        } else if t < 0.0 && t > -self.ramp {
            step((t + self.ramp) / self.ramp)
        } else if t > self.plateau && t < self.plateau + self.ramp {
            step((self.plateau + self.ramp - t) / self.ramp)
        } else {
            0.0
        }
    }
}

/// Time lattice used to evaluate restriction norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowSpec {
    pub window: f64,
    pub n_t: usize,
}

/// Upper estimate of `||u||_{X^{s,b}_T}` for the trajectory restricted to
/// `[0, t_end]`: the trajectory is extended by free evolution outside
/// `[0, t_end]`, multiplied by each cutoff of the family whose plateau covers
/// `[0, t_end]`, and the smallest resulting `X^{s,b}` norm is returned.
pub fn restriction_norm_estimate(
    traj: &Trajectory,
    t_end: f64,
    s: f64,
    b: f64,
    family: &[Cutoff],
    window: WindowSpec,
) -> Result<f64> {
    let last = *traj.times().last().ok_or_else(|| Error::InvalidArgument("empty trajectory".into()))?;
    if !(t_end > 0.0 && t_end <= last + 1e-12) {
        return Err(Error::InvalidArgument(format!("restriction time {t_end} outside trajectory [0, {last}]")));
    }
    let usable: Vec<&Cutoff> = family.iter().filter(|c| c.plateau >= t_end).collect();
    if usable.is_empty() {
        return Err(Error::InvalidArgument("no cutoff in the family covers [0, T]".into()));
    }
    let span = usable.iter().map(|c| c.plateau).fold(0.0, f64::max);
    if span > window.window / 4.0 {
        return Err(Error::InvalidArgument(format!("window {} shorter than 4 T = {}", window.window, 4.0 * span)));
    }
    let t0 = -(window.window - span) / 2.0;
    let end_state = traj.at(t_end);
    let extended = |t: f64| -> Vec<Complex64> {
        if t > t_end {
            flow_coeffs(traj.basis(), end_state.coeffs(), t - t_end)
        } else {
            traj.at(t).into_coeffs()
        }
    };
    let mut best = f64::INFINITY;
    for c in usable {
        let field = SpaceTimeField::from_fn(traj.basis().clone(), t0, window.window, window.n_t, |t| {
            let w = c.eval(t);
            if w == 0.0 {
                vec![Complex64::new(0.0, 0.0); traj.basis().len()]
            } else {
                extended(t).into_iter().map(|z| z * w).collect()
            }
        })?;
        best = best.min(xsb_norm(&field, s, b));
    }
    Ok(best)
}

/// One row of the linear-estimate probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearEstimateSample {
    pub horizon: f64,
    /// Restriction-norm estimate of the free solution over `||u0||_{H^s}`.
    pub ratio: f64,
    /// `ratio * T^{b - 1/2}`, expected to stay bounded as `T` shrinks.
    pub scaled: f64,
}

/// Restriction norms of `e^{itDelta} u0` on `[0, T]` for each horizon `T`,
/// normalized by `||u0||_{H^s}` and by the predicted factor `T^{1/2 - b}`.
pub fn linear_estimate_probe(
    u0: &SpectralField,
    s: f64,
    b: f64,
    horizons: &[f64],
    window: WindowSpec,
) -> Result<Vec<LinearEstimateSample>> {
    let h = crate::field::sobolev_norm(u0, s);
    if h == 0.0 {
        return Err(Error::InvalidArgument("initial datum is zero".into()));
    }
    horizons
        .iter()
        .map(|&t| {
            let traj = Trajectory::linear(u0, &[0.0, t]);
            let r = restriction_norm_estimate(&traj, t, s, b, &[Cutoff::for_interval(t)], window)? / h;
            Ok(LinearEstimateSample { horizon: t, ratio: r, scaled: r * t.powf(b - 0.5) })
        })
        .collect()
}
