//! Randomized and deterministic checks of the bilinear Strichartz estimates,
//! the dyadic summation lemma, the interpolation-parameter construction and
//! the frequency identity obtained from Green's theorem.

use crate::error::{Error, Result};
use crate::evolution::flow_coeffs;
use crate::field::{apply_t, gradient_nodal, laplacian, same_basis, DyadicBand, SpectralField};
use crate::grid::{Component, SeparableGrid};
use crate::manifold::{GridPlan, SpectralBasis};
use crate::quadrature::{nodes_for_bandwidth, TimeRule};
use crate::spacetime::{xsb_norm, Cutoff, SpaceTimeField};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Mixes a master seed with a path of integers (SplitMix64 finalizer per step).
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    path.iter().fold(mix(master), |acc, p| mix(acc ^ mix(*p)))
}

/// Coefficient distribution of random band fields.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientLaw {
    /// Independent standard complex Gaussians.
    #[default]
    Gaussian,
    /// Independent uniformly distributed phases of modulus one.
    Unimodular,
}

/// Unit-L2 field with random coefficients in the closed band `[level, 2 level]`.
pub fn random_band_field(basis: &Arc<SpectralBasis>, level: u32, seed: u64) -> Result<SpectralField> {
    random_band_field_with(basis, level, seed, CoefficientLaw::Gaussian)
}

pub fn random_band_field_with(basis: &Arc<SpectralBasis>, level: u32, seed: u64, law: CoefficientLaw) -> Result<SpectralField> {
    let band = DyadicBand::closed(level)?;
    if 2.0 * level as f64 > basis.mu_max() {
        return Err(Error::InvalidArgument(format!("band top {} exceeds mu_max {}", 2 * level, basis.mu_max())));
    }
    let idx = band.mode_indices(basis);
    if idx.is_empty() {
        return Err(Error::EmptyBand { lo: level as f64, hi: 2.0 * level as f64 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = vec![Complex64::new(0.0, 0.0); basis.len()];
    for k in idx {
        c[k] = match law {
            CoefficientLaw::Gaussian => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            }
            CoefficientLaw::Unimodular => Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)),
        };
    }
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    c.iter_mut().for_each(|z| *z /= norm);
    SpectralField::new(basis.clone(), c)
}

/// Grid integrating the quartic expressions of fields with spectral tops
/// `top_f`, `top_h`.
pub fn product_grid(basis: &SpectralBasis, top_f: f64, top_h: f64) -> SeparableGrid {
    basis.make_grid(GridPlan::Product { exactness: 2.0 * (top_f + top_h) })
}

fn density(grid: &SeparableGrid, basis: &SpectralBasis, c: &[Complex64], t: f64, gradient: bool) -> Vec<f64> {
    let ct = flow_coeffs(basis, c, t);
    if gradient {
        let g1 = grid.synthesize(&ct, Component::Grad1);
        let g2 = grid.synthesize(&ct, Component::Grad2);
        g1.iter().zip(&g2).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect()
    } else {
        grid.synthesize(&ct, Component::Value).iter().map(|z| z.norm_sqr()).collect()
    }
}

fn weighted(grid: &SeparableGrid, mut d: Vec<f64>) -> Vec<f64> {
    for (i, v) in d.iter_mut().enumerate() {
        *v *= grid.weight(i);
    }
    d
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(int_0^1 int |D e^{itDelta} f|^2 |e^{itDelta} h|^2)^{1/2}` with `D` the
/// identity or the gradient, on a caller-supplied grid and time rule.
pub fn bilinear_integral(
    grid: &SeparableGrid,
    f: &SpectralField,
    h: &SpectralField,
    rule: TimeRule,
    gradient: bool,
) -> Result<f64> {
    same_basis(f, h)?;
    let need = 2.0 * (f.spectral_top() + h.spectral_top());
    if grid.exactness() + 1e-9 < need {
        return Err(Error::UnderResolved { have: grid.exactness(), need });
    }
    let basis = f.basis();
    let (ts, ws) = rule.nodes_weights(0.0, 1.0);
    let total: f64 = ts
        .iter()
        .zip(&ws)
        .map(|(&t, &w)| {
            let df = weighted(grid, density(grid, basis, f.coeffs(), t, gradient));
            let dh = density(grid, basis, h.coeffs(), t, false);
            w * dot(&df, &dh)
        })
        .sum();
    Ok(total.max(0.0).sqrt())
}

/// Gauss-Legendre time rule resolving the temporal bandwidth of `|u|^2 |v|^2`.
pub fn resolved_time_rule(f: &SpectralField, h: &SpectralField) -> TimeRule {
    let (a, b) = f.eigenvalue_span();
    let (c, d) = h.eigenvalue_span();
    let spread = (b - a) + (d - c);
    TimeRule::GaussLegendre { nodes: nodes_for_bandwidth(0.5 * spread).max(64) }
}

/// Tolerance of the time-resolution gate.
pub const TIME_GATE: f64 = 1e-8;

fn gated(f: &SpectralField, h: &SpectralField, gradient: bool) -> Result<f64> {
    let grid = product_grid(f.basis(), f.spectral_top(), h.spectral_top());
    let rule = resolved_time_rule(f, h);
    let coarse = bilinear_integral(&grid, f, h, rule, gradient)?;
    let fine = bilinear_integral(&grid, f, h, rule.refined(), gradient)?;
    if (fine - coarse).abs() > TIME_GATE {
        return Err(Error::NotConverged(format!("time quadrature changed by {:e} under doubling", (fine - coarse).abs())));
    }
    Ok(fine)
}

/// `||e^{itDelta} f e^{itDelta} h||_{L2([0,1] x M)}`, time-resolution gated.
pub fn bilinear_lhs(f: &SpectralField, h: &SpectralField) -> Result<f64> {
    gated(f, h, false)
}

/// `|| |grad e^{itDelta} f| e^{itDelta} h ||_{L2([0,1] x M)}`, time-resolution gated.
pub fn gradient_bilinear_lhs(f: &SpectralField, h: &SpectralField) -> Result<f64> {
    gated(f, h, true)
}

/// `int_0^1 int |e^{itDelta} f|^4`, evaluated from the fourth power directly.
pub fn l4_fourth_power(f: &SpectralField, rule: TimeRule) -> f64 {
    let top = f.spectral_top();
    let grid = product_grid(f.basis(), top, top);
    let (ts, ws) = rule.nodes_weights(0.0, 1.0);
    ts.iter()
        .zip(&ws)
        .map(|(&t, &w)| {
            let ct = flow_coeffs(f.basis(), f.coeffs(), t);
            let q: Vec<f64> = grid.synthesize(&ct, Component::Value).iter().map(|z| z.norm_sqr().powi(2)).collect();
            w * grid.integrate_real(&q)
        })
        .sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct L4Report {
    pub level: u32,
    pub s: f64,
    /// `||e^{itDelta} f||_{L4}^2 / level^s` per trial.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// Largest `| ||u||_{L4}^2 - bilinear_lhs(f, f) |`.
    pub consistency: f64,
}

/// The `L^4` Strichartz corollary on random band fields.
pub fn l4_check(basis: &Arc<SpectralBasis>, level: u32, trials: usize, seed: u64, s: f64) -> Result<L4Report> {
    let mut ratios = Vec::with_capacity(trials);
    let mut consistency: f64 = 0.0;
    for trial in 0..trials {
        let f = random_band_field(basis, level, derive_seed(seed, &[trial as u64]))?;
        let rule = resolved_time_rule(&f, &f).refined();
        let l4_sq = l4_fourth_power(&f, rule).sqrt();
        let bil = bilinear_lhs(&f, &f)?;
        consistency = consistency.max((l4_sq - bil).abs());
        ratios.push(l4_sq / (level as f64).powf(s));
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(L4Report { level, s, ratios, max_ratio, consistency })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Bilinear,
    GradientBilinear,
    XsbBilinear,
    XsbGradient,
}

impl SweepKind {
    pub fn gradient(&self) -> bool {
        matches!(self, SweepKind::GradientBilinear | SweepKind::XsbGradient)
    }

    pub fn windowed(&self) -> bool {
        matches!(self, SweepKind::XsbBilinear | SweepKind::XsbGradient)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub kind: SweepKind,
    /// Exponent used for the reported ratios.
    pub s: f64,
    pub bands: Vec<u32>,
    pub trials: usize,
    pub seed: u64,
    /// Time samples: trapezoid intervals on `[0, 1]`, or lattice size of the
    /// windowed kinds.
    pub n_t: usize,
    /// Time exponent of the windowed kinds.
    pub b: f64,
    pub law: CoefficientLaw,
}

impl SweepConfig {
    pub fn new(kind: SweepKind, bands: Vec<u32>, trials: usize, seed: u64) -> Self {
        SweepConfig { kind, s: 0.75, bands, trials, seed, n_t: 64, b: 0.55, law: CoefficientLaw::Gaussian }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimateSample {
    pub gamma: u32,
    pub lambda: u32,
    pub trial: usize,
    pub lhs: f64,
    pub rhs_factor: f64,
    pub ratio: f64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub s_hat: f64,
    pub c_hat: f64,
    pub residual: f64,
    pub n_samples: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub samples: Vec<EstimateSample>,
    pub fit: ExponentFit,
    pub max_ratio: f64,
}

impl SweepResult {
    /// CSV with columns `gamma,lambda,trial,lhs,rhs_factor,ratio,seed`.
    pub fn to_csv(&self) -> String {
        use crate::report::fmt17;
        let mut out = String::from("gamma,lambda,trial,lhs,rhs_factor,ratio,seed\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                s.gamma,
                s.lambda,
                s.trial,
                fmt17(s.lhs),
                fmt17(s.rhs_factor),
                fmt17(s.ratio),
                s.seed
            ));
        }
        out
    }
}

/// Least-squares line through `(x, y)`; returns (slope, intercept, rms residual).
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return Err(Error::DegenerateFit(format!("need matching abscissae and ordinates, got {} and {}", n, y.len())));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 1e-12 * n as f64 {
        return Err(Error::DegenerateFit("all abscissae equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>() / n as f64).sqrt();
    Ok((slope, intercept, rms))
}

/// Fits `log(lhs / norms)` against `log min(gamma, lambda)`, norms including
/// the extra `lambda` of the gradient kinds.
pub fn fit_exponent(samples: &[EstimateSample], s: f64, gradient: bool) -> Result<ExponentFit> {
    if samples.len() < 8 {
        return Err(Error::DegenerateFit(format!("{} samples, need at least 8", samples.len())));
    }
    let x: Vec<f64> = samples.iter().map(|p| (p.gamma.min(p.lambda) as f64).ln()).collect();
    let y: Vec<f64> = samples
        .iter()
        .map(|p| {
            let min = p.gamma.min(p.lambda) as f64;
            let norms = p.rhs_factor / (min.powf(s) * if gradient { p.lambda as f64 } else { 1.0 });
            let extra = if gradient { p.lambda as f64 } else { 1.0 };
            (p.lhs / (norms * extra)).ln()
        })
        .collect();
    let (s_hat, intercept, residual) = least_squares(&x, &y)?;
    Ok(ExponentFit { s_hat, c_hat: intercept.exp(), residual, n_samples: samples.len() })
}

struct TrialFields {
    seed: u64,
    f: Vec<SpectralField>,
    h: Vec<SpectralField>,
}

fn trial_fields(basis: &Arc<SpectralBasis>, cfg: &SweepConfig, trial: usize) -> Result<TrialFields> {
    let seed = derive_seed(cfg.seed, &[trial as u64]);
    let mut f = Vec::with_capacity(cfg.bands.len());
    let mut h = Vec::with_capacity(cfg.bands.len());
    for &level in &cfg.bands {
        f.push(random_band_field_with(basis, level, derive_seed(seed, &[0, level as u64]), cfg.law)?);
        h.push(random_band_field_with(basis, level, derive_seed(seed, &[1, level as u64]), cfg.law)?);
    }
    Ok(TrialFields { seed, f, h })
}

/// Squared lhs for every ordered band pair `[i_f][i_h]` over shared time nodes.
fn pair_integrals(
    grid: &SeparableGrid,
    basis: &SpectralBasis,
    fields: &TrialFields,
    nodes: &[(f64, f64)],
    gradient: bool,
) -> Vec<Vec<f64>> {
    let nb = fields.f.len();
    let mut acc = vec![vec![0.0; nb]; nb];
    for &(t, w) in nodes {
        let df: Vec<Vec<f64>> = fields.f.iter().map(|f| weighted(grid, density(grid, basis, f.coeffs(), t, gradient))).collect();
        let dh: Vec<Vec<f64>> = fields.h.iter().map(|h| density(grid, basis, h.coeffs(), t, false)).collect();
        for i in 0..nb {
            for j in 0..nb {
                acc[i][j] += w * dot(&df[i], &dh[j]);
            }
        }
    }
    acc
}

/// Empirical check of the bilinear estimates over all band pairs and trials.
///
/// Fields are drawn once per (trial, role, band) and shared across pairs.
/// The `[0, 1]` kinds use the composite trapezoid with `n_t` intervals. The
/// windowed kinds multiply free solutions by a `C^2` cutoff equal to one on
/// `[0, 1]`, sample them on a lattice of `n_t` points over a window of length
/// 4, and measure the right side with `X^{0,b}` norms.
pub fn run_sweep(basis: &Arc<SpectralBasis>, cfg: &SweepConfig) -> Result<SweepResult> {
    if cfg.trials < 4 {
        return Err(Error::InvalidArgument(format!("sweeps need at least 4 trials, got {}", cfg.trials)));
    }
    if cfg.bands.is_empty() {
        return Err(Error::InvalidArgument("no bands given".into()));
    }
    let distinct: std::collections::BTreeSet<u32> = cfg.bands.iter().copied().collect();
    if distinct.len() < 2 {
        return Err(Error::DegenerateFit("a single band gives a constant abscissa".into()));
    }
    let top = 2.0 * *cfg.bands.iter().max().expect("non-empty") as f64;
    let grid = product_grid(basis, top, top);
    let gradient = cfg.kind.gradient();
    let window = 4.0;
    let t0 = -1.5;
    let cutoff = Cutoff::for_interval(1.0);
    let nodes: Vec<(f64, f64)> = if cfg.kind.windowed() {
        let dt = window / cfg.n_t as f64;
        (0..cfg.n_t)
            .map(|j| t0 + j as f64 * dt)
            .filter_map(|t| {
                let p = cutoff.eval(t);
                (p != 0.0).then_some((t, dt * p.powi(4)))
            })
            .collect()
    } else {
        let (ts, ws) = TimeRule::Trapezoid { intervals: cfg.n_t }.nodes_weights(0.0, 1.0);
        ts.into_iter().zip(ws).collect()
    };
    let per_trial: Vec<Result<Vec<EstimateSample>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let fields = trial_fields(basis, cfg, trial)?;
            let acc = pair_integrals(&grid, basis, &fields, &nodes, gradient);
            let norms = |fl: &[SpectralField]| -> Result<Vec<f64>> {
                if cfg.kind.windowed() {
                    fl.iter()
                        .map(|f| Ok(xsb_norm(&SpaceTimeField::windowed_free(f, |t| cutoff.eval(t), t0, window, cfg.n_t)?, 0.0, cfg.b)))
                        .collect()
                } else {
                    Ok(fl.iter().map(|f| f.l2_norm()).collect())
                }
            };
            let nf = norms(&fields.f)?;
            let nh = norms(&fields.h)?;
            let mut out = Vec::new();
            for (i, &lambda) in cfg.bands.iter().enumerate() {
                for (j, &gamma) in cfg.bands.iter().enumerate() {
                    let lhs = acc[i][j].max(0.0).sqrt();
                    let min = gamma.min(lambda) as f64;
                    let extra = if gradient { lambda as f64 } else { 1.0 };
                    let rhs_factor = min.powf(cfg.s) * extra * nf[i] * nh[j];
                    out.push(EstimateSample { gamma, lambda, trial, lhs, rhs_factor, ratio: lhs / rhs_factor, seed: fields.seed });
                }
            }
            Ok(out)
        })
        .collect();
    let mut samples = Vec::new();
    for r in per_trial {
        samples.extend(r?);
    }
    let fit = fit_exponent(&samples, cfg.s, gradient)?;
    let max_ratio = samples.iter().map(|p| p.ratio).fold(0.0, f64::max);
    Ok(SweepResult { samples, fit, max_ratio })
}

/// Parameters produced by the interpolation-lemma construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InterpolationParams {
    pub s_prime: f64,
    pub delta: f64,
    pub theta: f64,
    pub epsilon: f64,
    pub b: f64,
    pub b_prime: f64,
}

/// Threshold regularity of the bilinear estimates.
pub const S0: f64 = 2.0 / 3.0;

/// Builds `(delta, theta, epsilon, b, b')` for `2/3 < s' < 2`, taking `theta`
/// at half of its admissible bound, and re-verifies the two interpolation
/// inequalities before returning.
pub fn interpolation_params(s_prime: f64) -> Result<InterpolationParams> {
    if !(s_prime > S0 && s_prime < 2.0) {
        return Err(Error::InvalidArgument(format!("s' must lie in (2/3, 2), got {s_prime}")));
    }
    let delta = (s_prime - S0) / 2.0;
    let theta = if delta < 5.0 / 6.0 {
        ((s_prime - (S0 + delta)) / (5.0 / 6.0 - delta)).min(1.0) / 2.0
    } else {
        0.5
    };
    let epsilon = theta / (2.0 * (9.0 - 3.0 * theta));
    let b = 0.5 + epsilon;
    let b_prime = 0.5 - 2.0 * epsilon;
    let p = InterpolationParams { s_prime, delta, theta, epsilon, b, b_prime };
    verify_interpolation(&p)?;
    Ok(p)
}

/// Checks `s' > 3 theta/2 + (s0 + delta)(1 - theta)`,
/// `b' > theta/6 + (1/2 + epsilon)(1 - theta)`, `b + b' < 1` and
/// `0 < b' < 1/2 < b`.
pub fn verify_interpolation(p: &InterpolationParams) -> Result<()> {
    let first = 1.5 * p.theta + (S0 + p.delta) * (1.0 - p.theta);
    if !(p.s_prime > first) {
        return Err(Error::Verification(format!("s' = {} not above {}", p.s_prime, first)));
    }
    let second = p.theta / 6.0 + (0.5 + p.epsilon) * (1.0 - p.theta);
    if !(p.b_prime > second) {
        return Err(Error::Verification(format!("b' = {} not above {}", p.b_prime, second)));
    }
    if !(p.b + p.b_prime < 1.0 && p.b_prime > 0.0 && p.b_prime < 0.5 && p.b > 0.5) {
        return Err(Error::Verification(format!("exponents b = {}, b' = {} not admissible", p.b, p.b_prime)));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DyadicSummation {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `sum_{N <= gamma N'} (N/N')^theta c_N d_N'` against `||c||_2 ||d||_2`,
/// where entry `i` of each sequence sits at `N = 2^i`.
pub fn dyadic_summation_check(theta: f64, gamma: f64, c: &[f64], d: &[f64]) -> Result<DyadicSummation> {
    if !(theta > 0.0 && gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("theta and gamma must be positive, got {theta}, {gamma}")));
    }
    if c.iter().chain(d).any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidArgument("sequences must be nonnegative".into()));
    }
    let mut lhs = 0.0;
    for (i, ci) in c.iter().enumerate() {
        for (j, dj) in d.iter().enumerate() {
            let ratio = 2f64.powi(i as i32 - j as i32);
            if ratio <= gamma {
                lhs += ratio.powf(theta) * ci * dj;
            }
        }
    }
    let rhs = (c.iter().map(|v| v * v).sum::<f64>() * d.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(DyadicSummation { lhs, rhs, ratio })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GreenReport {
    pub direct: Complex64,
    pub i1: Complex64,
    pub i2: Complex64,
    pub i3: Complex64,
    /// `|direct - (i1 + i2 + i3)| / (1 + |direct|)`.
    pub residual: f64,
}

/// Compares `int u1 u2 conj(u0)` with its Green's-theorem decomposition
/// `-N0^{-2} int T(conj u0) Delta(u1 u2) = I1 + I2 + I3`, where `u0` lives in
/// the closed band of level `n0`. Fields evolve freely and the identity is
/// integrated against `rule` over `[0, t_end]`; `None` evaluates at `t = 0`.
pub fn green_identity_on_fields(
    u0: &SpectralField,
    u1: &SpectralField,
    u2: &SpectralField,
    n0: u32,
    time: Option<(TimeRule, f64)>,
) -> Result<GreenReport> {
    same_basis(u0, u1)?;
    same_basis(u0, u2)?;
    let basis = u0.basis();
    let need = u0.spectral_top() + u1.spectral_top() + u2.spectral_top();
    if basis.grid().exactness() + 1e-9 < need {
        return Err(Error::UnderResolved { have: basis.grid().exactness(), need });
    }
    let (ts, ws) = match time {
        Some((rule, t_end)) => rule.nodes_weights(0.0, t_end),
        None => (vec![0.0], vec![1.0]),
    };
    let grid = basis.grid();
    let scale = -1.0 / (n0 as f64).powi(2);
    let zero = Complex64::new(0.0, 0.0);
    let (mut direct, mut i1, mut i2, mut i3) = (zero, zero, zero, zero);
    for (&t, &w) in ts.iter().zip(&ws) {
        let a0 = crate::evolution::linear_flow(u0, t);
        let a1 = crate::evolution::linear_flow(u1, t);
        let a2 = crate::evolution::linear_flow(u2, t);
        let v0: Vec<Complex64> = a0.synthesize().iter().map(|z| z.conj()).collect();
        let tv0: Vec<Complex64> = apply_t(&a0, n0)?.synthesize().iter().map(|z| z.conj()).collect();
        let v1 = a1.synthesize();
        let v2 = a2.synthesize();
        let l1 = laplacian(&a1).synthesize();
        let l2 = laplacian(&a2).synthesize();
        let [g11, g12] = gradient_nodal(&a1);
        let [g21, g22] = gradient_nodal(&a2);
        let n = v0.len();
        let d: Vec<Complex64> = (0..n).map(|p| v1[p] * v2[p] * v0[p]).collect();
        let e1: Vec<Complex64> = (0..n).map(|p| tv0[p] * v1[p] * l2[p]).collect();
        let e2: Vec<Complex64> = (0..n).map(|p| tv0[p] * v2[p] * l1[p]).collect();
        let e3: Vec<Complex64> = (0..n).map(|p| tv0[p] * (g11[p] * g21[p] + g12[p] * g22[p])).collect();
        direct += grid.integrate(&d) * w;
        i1 += grid.integrate(&e1) * (w * scale);
        i2 += grid.integrate(&e2) * (w * scale);
        i3 += grid.integrate(&e3) * (2.0 * w * scale);
    }
    let residual = (direct - (i1 + i2 + i3)).norm() / (1.0 + direct.norm());
    Ok(GreenReport { direct, i1, i2, i3, residual })
}

/// `green_identity_on_fields` for random fields in the closed bands `levels`.
pub fn green_identity_check(
    basis: &Arc<SpectralBasis>,
    levels: [u32; 3],
    seed: u64,
    time: Option<(TimeRule, f64)>,
) -> Result<GreenReport> {
    let u: Vec<SpectralField> = levels
        .iter()
        .enumerate()
        .map(|(i, &l)| random_band_field(basis, l, derive_seed(seed, &[i as u64, l as u64])))
        .collect::<Result<_>>()?;
    green_identity_on_fields(&u[0], &u[1], &u[2], levels[0], time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::project_band;
    use crate::manifold::{build_basis, Boundary, ManifoldSpec, ModeLabel};
    use std::f64::consts::PI;

    #[test]
    fn random_fields_are_normalized_band_limited_and_seeded() {
        let b = build_basis(&ManifoldSpec::unit_disk(Boundary::Dirichlet), 16.0).unwrap();
        let f = random_band_field(&b, 4, 11).unwrap();
        assert!((f.l2_norm() - 1.0).abs() < 1e-12);
        let p = project_band(&f, DyadicBand::closed(4).unwrap());
        assert!(p.sub(&f).unwrap().l2_norm() == 0.0);
        let g = random_band_field(&b, 4, 12).unwrap();
        assert!(f.inner(&g).unwrap().norm() < 1.0);
        let again = random_band_field(&b, 4, 11).unwrap();
        assert_eq!(f.coeffs(), again.coeffs());
        assert!(random_band_field(&b, 16, 1).is_err());
        let u = random_band_field_with(&b, 4, 3, CoefficientLaw::Unimodular).unwrap();
        assert!((u.l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_band_rejected() {
        // Dirichlet unit disk has no eigenvalue with mu in [1, 2]
        let b = build_basis(&ManifoldSpec::unit_disk(Boundary::Dirichlet), 4.0).unwrap();
        assert!(matches!(random_band_field(&b, 1, 0), Err(Error::EmptyBand { .. })));
    }

    #[test]
    fn e11_closed_form() {
        let b = build_basis(&ManifoldSpec::square(Boundary::Dirichlet), 4.0).unwrap();
        let e = SpectralField::from_label(b, ModeLabel::Rect { m: 1, n: 1 }).unwrap();
        let v = bilinear_lhs(&e, &e).unwrap();
        assert!((v - 3.0 / (2.0 * PI)).abs() < 1e-12);
        let l4 = l4_fourth_power(&e, TimeRule::GaussLegendre { nodes: 8 });
        assert!((l4 - 9.0 / (4.0 * PI * PI)).abs() < 1e-13);
    }

    #[test]
    fn gradient_of_constant_vanishes_and_scaling_is_homogeneous() {
        let b = build_basis(&ManifoldSpec::unit_disk(Boundary::Neumann), 8.0).unwrap();
        let c = SpectralField::mode(b.clone(), 0).unwrap();
        let h = random_band_field(&b, 2, 5).unwrap();
        assert!(gradient_bilinear_lhs(&c, &h).unwrap() < 1e-14);
        let f = random_band_field(&b, 2, 6).unwrap();
        let g1 = gradient_bilinear_lhs(&f, &h).unwrap();
        let g3 = gradient_bilinear_lhs(&f.scaled(Complex64::new(0.0, -3.0)), &h).unwrap();
        assert!((g3 - 3.0 * g1).abs() < 1e-12 * g3);
    }

    #[test]
    fn dyadic_enumeration_example() {
        let r = dyadic_summation_check(1.0, 1.0, &[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]).unwrap();
        // admissible pairs N <= N' among {1, 2, 4}
        let ns = [1.0, 2.0, 4.0];
        let mut want = 0.0;
        for n in ns {
            for np in ns {
                if n <= np {
                    want += n / np;
                }
            }
        }
        assert!((r.lhs - want).abs() < 1e-15);
        assert_eq!(r.rhs, 3.0);
        assert!(dyadic_summation_check(1.0, 1.0, &[-1.0], &[1.0]).is_err());
        assert_eq!(dyadic_summation_check(1.0, 1.0, &[0.0; 3], &[1.0; 3]).unwrap().lhs, 0.0);
    }

    #[test]
    fn interpolation_at_one() {
        let p = interpolation_params(1.0).unwrap();
        assert!((p.delta - 1.0 / 6.0).abs() < 1e-15);
        assert!((p.theta - 1.0 / 8.0).abs() < 1e-15);
        assert!((p.epsilon - (1.0 / 8.0) / (2.0 * (9.0 - 3.0 / 8.0))).abs() < 1e-15);
        assert!(interpolation_params(2.0 / 3.0).is_err());
        assert!(interpolation_params(2.0).is_err());
        let near = interpolation_params(2.0 / 3.0 + 1e-9).unwrap();
        assert!(near.theta > 0.0 && near.epsilon > 0.0);
    }

    #[test]
    fn fit_recovers_slope_and_rejects_degenerate_input() {
        let mut samples = Vec::new();
        for (g, l) in [(4u32, 4u32), (4, 8), (8, 8), (8, 16), (16, 16), (16, 32), (32, 32), (4, 32)] {
            let min = g.min(l) as f64;
            samples.push(EstimateSample { gamma: g, lambda: l, trial: 0, lhs: 2.0 * min.powf(0.4), rhs_factor: min.powf(0.75), ratio: 0.0, seed: 0 });
        }
        let fit = fit_exponent(&samples, 0.75, false).unwrap();
        assert!((fit.s_hat - 0.4).abs() < 1e-12 && (fit.c_hat - 2.0).abs() < 1e-12 && fit.residual < 1e-12);
        let same: Vec<EstimateSample> = samples.iter().map(|p| EstimateSample { gamma: 8, lambda: 8, ..*p }).collect();
        assert!(matches!(fit_exponent(&same, 0.75, false), Err(Error::DegenerateFit(_))));
        let b = build_basis(&ManifoldSpec::square(Boundary::Dirichlet), 16.0).unwrap();
        let cfg = SweepConfig::new(SweepKind::Bilinear, vec![4, 4], 4, 1);
        assert!(matches!(run_sweep(&b, &cfg), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn green_identity_small() {
        for spec in [ManifoldSpec::square(Boundary::Neumann), ManifoldSpec::unit_disk(Boundary::Dirichlet)] {
            let b = build_basis(&spec, 8.0).unwrap();
            let r = green_identity_check(&b, [2, 2, 4], 9, None).unwrap();
            assert!(r.residual < 1e-10, "{spec:?}: {}", r.residual);
        }
    }

    #[test]
    fn green_with_constant_mode() {
        let b = build_basis(&ManifoldSpec::unit_disk(Boundary::Neumann), 8.0).unwrap();
        let u0 = random_band_field(&b, 2, 1).unwrap();
        let u1 = random_band_field(&b, 2, 2).unwrap();
        let c = SpectralField::mode(b.clone(), 0).unwrap();
        let r = green_identity_on_fields(&u0, &u1, &c, 2, None).unwrap();
        assert!(r.i1.norm() < 1e-15 && r.i3.norm() < 1e-13);
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn small_sweep_runs() {
        let b = build_basis(&ManifoldSpec::square(Boundary::Dirichlet), 16.0).unwrap();
        let res = run_sweep(&b, &SweepConfig::new(SweepKind::Bilinear, vec![2, 4, 8], 4, 3)).unwrap();
        assert_eq!(res.samples.len(), 36);
        assert!(res.samples.iter().all(|p| p.lhs > 0.0 && p.ratio.is_finite()));
        assert_eq!(res.fit.n_samples, 36);
        let csv = res.to_csv();
        assert!(csv.starts_with("gamma,lambda,trial,lhs,rhs_factor,ratio,seed\n"));
    }
}
