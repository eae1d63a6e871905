//! Linear Schrodinger flow, the quadratic nonlinearity, and time stepping for
//! `i u_t + Delta u = alpha u^2 + beta conj(u)^2 + gamma |u|^2`.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Component;
use crate::manifold::SpectralBasis;
use crate::report::fmt17;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::sync::Arc;

/// Divergence threshold on the L2 norm.
pub const BLOW_UP_NORM: f64 = 1.0e6;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `Q(w) = alpha w^2 + beta conj(w)^2 + gamma |w|^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticNonlinearity {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
}

impl QuadraticNonlinearity {
    pub fn real(alpha: f64, beta: f64, gamma: f64) -> Self {
        QuadraticNonlinearity { alpha: alpha.into(), beta: beta.into(), gamma: gamma.into() }
    }

    #[inline]
    pub fn eval(&self, w: Complex64) -> Complex64 {
        let w2 = w * w;
        self.alpha * w2 + self.beta * w2.conj() + self.gamma * w.norm_sqr()
    }

    pub fn is_zero(&self) -> bool {
        self.alpha == Complex64::default() && self.beta == Complex64::default() && self.gamma == Complex64::default()
    }
}

/// `e^{it Delta}`: `c_k -> e^{-i lambda_k t} c_k`.
pub fn linear_flow(u: &SpectralField, t: f64) -> SpectralField {
    let coeffs = flow_coeffs(u.basis(), u.coeffs(), t);
    u.with_coeffs(coeffs).expect("length preserved")
}

pub(crate) fn flow_coeffs(basis: &SpectralBasis, c: &[Complex64], t: f64) -> Vec<Complex64> {
    c.iter().zip(basis.modes()).map(|(c, m)| c * Complex64::from_polar(1.0, -m.lambda * t)).collect()
}

pub(crate) fn check_dealias(basis: &SpectralBasis) -> Result<()> {
    let need = 3.0 * basis.mu_max();
    let have = basis.grid().exactness();
    if have < need {
        return Err(Error::UnderResolved { have, need });
    }
    Ok(())
}

/// Galerkin projection of `Q(u)` onto the basis.
///
/// With `dealias` set, the basis grid must integrate triple products of
/// resolved modes exactly so that the projection carries no aliasing error.
pub fn nonlinearity(u: &SpectralField, q: &QuadraticNonlinearity, dealias: bool) -> Result<SpectralField> {
    if dealias {
        check_dealias(u.basis())?;
    }
    u.with_coeffs(project_q(u.basis(), u.coeffs(), q))
}

pub(crate) fn project_q(basis: &SpectralBasis, c: &[Complex64], q: &QuadraticNonlinearity) -> Vec<Complex64> {
    let grid = basis.grid();
    let mut w = grid.synthesize(c, Component::Value);
    for v in w.iter_mut() {
        *v = q.eval(*v);
    }
    grid.analyze(&w)
}

/// Relative mass of coefficient vectors, `sum |c_k|^2`.
pub(crate) fn coeff_mass(c: &[Complex64]) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum()
}

/// `int |u|^2`.
pub fn mass(u: &SpectralField) -> f64 {
    coeff_mass(u.coeffs())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionParams {
    pub nonlinearity: QuadraticNonlinearity,
    pub dt: f64,
    pub dealias: bool,
    /// Runge-Kutta substeps per nonlinear half of a Strang step.
    pub substeps: usize,
}

impl EvolutionParams {
    pub fn new(nonlinearity: QuadraticNonlinearity, dt: f64) -> Self {
        EvolutionParams { nonlinearity, dt, dealias: true, substeps: 2 }
    }
}

/// States at increasing times over a shared basis.
#[derive(Clone, Debug)]
pub struct Trajectory {
    basis: Arc<SpectralBasis>,
    times: Vec<f64>,
    states: Vec<Vec<Complex64>>,
}

impl Trajectory {
    pub(crate) fn from_parts(basis: Arc<SpectralBasis>, times: Vec<f64>, states: Vec<Vec<Complex64>>) -> Self {
        debug_assert_eq!(times.len(), states.len());
        Trajectory { basis, times, states }
    }

    /// Free evolution `e^{it Delta} u0` sampled at `times`.
    pub fn linear(u0: &SpectralField, times: &[f64]) -> Self {
        let states = times.iter().map(|&t| flow_coeffs(u0.basis(), u0.coeffs(), t)).collect();
        Trajectory { basis: u0.basis().clone(), times: times.to_vec(), states }
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn coeffs(&self, i: usize) -> &[Complex64] {
        &self.states[i]
    }

    pub fn state(&self, i: usize) -> SpectralField {
        SpectralField::new(self.basis.clone(), self.states[i].clone()).expect("trajectory states match basis")
    }

    pub fn last(&self) -> SpectralField {
        self.state(self.len() - 1)
    }

    /// State at an arbitrary time, by free evolution from the nearest stored
    /// sample; exact for linear trajectories.
    pub fn at(&self, t: f64) -> SpectralField {
        let idx = match self.times.binary_search_by(|s| s.total_cmp(&t)) {
            Ok(i) => i,
            Err(i) => {
                if i == 0 {
                    0
                } else if i == self.len() || t - self.times[i - 1] <= self.times[i] - t {
                    i - 1
                } else {
                    i
                }
            }
        };
        let c = flow_coeffs(&self.basis, &self.states[idx], t - self.times[idx]);
        SpectralField::new(self.basis.clone(), c).expect("trajectory states match basis")
    }

    /// Largest relative deviation of the mass from its initial value.
    pub fn mass_drift(&self) -> f64 {
        let m0 = coeff_mass(&self.states[0]);
        self.states.iter().map(|c| (coeff_mass(c) - m0).abs()).fold(0.0, f64::max) / m0.max(f64::MIN_POSITIVE)
    }

    /// CSV with columns `t,mode,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mode,re,im\n");
        for (t, c) in self.times.iter().zip(&self.states) {
            for (k, z) in c.iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{}", fmt17(*t), k, fmt17(z.re), fmt17(z.im));
            }
        }
        out
    }
}

fn rk4_galerkin(basis: &SpectralBasis, c: &mut [Complex64], q: &QuadraticNonlinearity, h: f64) {
    let rhs = |x: &[Complex64]| -> Vec<Complex64> { project_q(basis, x, q).into_iter().map(|z| -I * z).collect() };
    let axpy = |x: &[Complex64], k: &[Complex64], s: f64| -> Vec<Complex64> { x.iter().zip(k).map(|(a, b)| a + b * s).collect() };
    let k1 = rhs(c);
    let k2 = rhs(&axpy(c, &k1, 0.5 * h));
    let k3 = rhs(&axpy(c, &k2, 0.5 * h));
    let k4 = rhs(&axpy(c, &k3, h));
    for (i, z) in c.iter_mut().enumerate() {
        *z += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
    }
}

/// Strang splitting: half linear step, nonlinear step, half linear step.
///
/// The nonlinear step integrates `i c' = P Q(c)` with classical Runge-Kutta on
/// the Galerkin system, so every stage is projected onto the basis.
pub fn split_step_evolve(u0: &SpectralField, params: &EvolutionParams, n_steps: usize) -> Result<Trajectory> {
    let dt = params.dt;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    if params.substeps == 0 {
        return Err(Error::InvalidArgument("at least one nonlinear substep required".into()));
    }
    let basis = u0.basis().clone();
    if params.dealias {
        check_dealias(&basis)?;
    }
    let half_phase: Vec<Complex64> = basis.modes().iter().map(|m| Complex64::from_polar(1.0, -m.lambda * 0.5 * dt)).collect();
    let h = dt / params.substeps as f64;
    let nonlinear = !params.nonlinearity.is_zero();
    let mut c = u0.coeffs().to_vec();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    times.push(0.0);
    states.push(c.clone());
    for step in 1..=n_steps {
        c.iter_mut().zip(&half_phase).for_each(|(z, p)| *z *= p);
        if nonlinear {
            for _ in 0..params.substeps {
                rk4_galerkin(&basis, &mut c, &params.nonlinearity, h);
            }
        }
        c.iter_mut().zip(&half_phase).for_each(|(z, p)| *z *= p);
        let t = step as f64 * dt;
        let norm = coeff_mass(&c).sqrt();
        if !norm.is_finite() || norm > BLOW_UP_NORM {
            return Err(Error::BlowUp { t, norm });
        }
        times.push(t);
        states.push(c.clone());
    }
    Ok(Trajectory::from_parts(basis, times, states))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{energy_gradient, sobolev_norm};
    use crate::manifold::{build_basis, build_basis_with_exactness, Boundary, ManifoldSpec, ModeLabel};
    use std::f64::consts::PI;

    fn small_rect() -> Arc<SpectralBasis> {
        build_basis(&ManifoldSpec::square(Boundary::Dirichlet), 4.0).unwrap()
    }

    #[test]
    fn free_flow_phase_and_unitarity() {
        let b = small_rect();
        let e = SpectralField::from_label(b.clone(), ModeLabel::Rect { m: 1, n: 1 }).unwrap();
        let v = linear_flow(&e, 0.3);
        let k = b.index_of(ModeLabel::Rect { m: 1, n: 1 }).unwrap();
        assert!((v.coeffs()[k] - Complex64::from_polar(1.0, -0.6)).norm() < 1e-15);
        assert!((sobolev_norm(&v, 1.0) - sobolev_norm(&e, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn nonlinearity_matches_closed_form() {
        // alpha = 1 on e11: coefficient on e_mn is (2/pi)^3 S(m) S(n),
        // S(k) = int_0^pi sin^2(x) sin(kx) dx, zero for even k
        let s2 = |k: u32| {
            if k.is_multiple_of(2) {
                0.0
            } else {
                let k = k as f64;
                1.0 / k - 0.5 * (1.0 / (k + 2.0) + 1.0 / (k - 2.0))
            }
        };
        let b = build_basis(&ManifoldSpec::square(Boundary::Dirichlet), 6.0).unwrap();
        let e = SpectralField::from_label(b.clone(), ModeLabel::Rect { m: 1, n: 1 }).unwrap();
        let q = nonlinearity(&e, &QuadraticNonlinearity::real(1.0, 0.0, 0.0), true).unwrap();
        for (mode, c) in b.modes().iter().zip(q.coeffs()) {
            let ModeLabel::Rect { m, n } = mode.label else { unreachable!() };
            let want = (2.0 / PI).powi(3) * s2(m) * s2(n);
            assert!((c.re - want).abs() < 1e-13 && c.im.abs() < 1e-15, "{m},{n}");
        }
        let k22 = b.index_of(ModeLabel::Rect { m: 2, n: 2 }).unwrap();
        assert!(q.coeffs()[k22].norm() < 1e-15);
    }

    #[test]
    fn dealias_requires_triple_exact_grid() {
        let b = build_basis_with_exactness(&ManifoldSpec::square(Boundary::Dirichlet), 4.0, 8.0).unwrap();
        let e = SpectralField::mode(b, 0).unwrap();
        let q = QuadraticNonlinearity::real(1.0, 0.0, 0.0);
        assert!(matches!(nonlinearity(&e, &q, true), Err(Error::UnderResolved { .. })));
        assert!(nonlinearity(&e, &q, false).is_ok());
    }

    #[test]
    fn zero_nonlinearity_reduces_to_free_flow() {
        let b = small_rect();
        let u0 = SpectralField::new(b.clone(), (0..b.len()).map(|k| Complex64::new(1.0 / (k + 1) as f64, 0.1)).collect()).unwrap();
        let p = EvolutionParams::new(QuadraticNonlinearity::real(0.0, 0.0, 0.0), 0.01);
        let traj = split_step_evolve(&u0, &p, 25).unwrap();
        let exact = linear_flow(&u0, 0.25);
        assert!(traj.last().sub(&exact).unwrap().l2_norm() < 1e-13);
    }

    #[test]
    fn gauge_invariant_mass_is_conserved() {
        let b = small_rect();
        let u0 = SpectralField::new(b.clone(), (0..b.len()).map(|k| Complex64::new(0.3 / (k + 1) as f64, 0.0)).collect()).unwrap();
        let p = EvolutionParams::new(QuadraticNonlinearity::real(1.0, 0.0, 1.0), 0.005);
        let traj = split_step_evolve(&u0, &p, 100).unwrap();
        assert!(traj.mass_drift() < 1e-9, "{}", traj.mass_drift());
        assert!(energy_gradient(&traj.last()).is_finite());
    }

    #[test]
    fn blow_up_detected() {
        let b = small_rect();
        let u0 = SpectralField::mode(b, 0).unwrap().scaled(Complex64::new(1000.0, 0.0));
        let p = EvolutionParams::new(QuadraticNonlinearity { alpha: Complex64::new(0.0, 1.0), beta: 0.0.into(), gamma: 0.0.into() }, 1e-4);
        assert!(matches!(split_step_evolve(&u0, &p, 500), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn csv_layout() {
        let b = small_rect();
        let traj = Trajectory::linear(&SpectralField::mode(b.clone(), 0).unwrap(), &[0.0, 0.5]);
        let csv = traj.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,mode,re,im");
        assert_eq!(lines.len(), 1 + 2 * b.len());
        assert!(!csv.contains('\r'));
    }
}
