//! Fields expanded in a spectral basis and the spectral multipliers acting on them.

use crate::error::{Error, Result};
use crate::grid::Component;
use crate::manifold::{ModeLabel, SpectralBasis};
use num_complex::Complex64;
use std::sync::Arc;

/// `<x> = sqrt(1 + x^2)`.
pub fn japanese(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// Coefficient vector over a shared basis.
#[derive(Clone, Debug)]
pub struct SpectralField {
    basis: Arc<SpectralBasis>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(basis: Arc<SpectralBasis>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), got: coeffs.len() });
        }
        Ok(SpectralField { basis, coeffs })
    }

    pub fn zeros(basis: Arc<SpectralBasis>) -> Self {
        let n = basis.len();
        SpectralField { basis, coeffs: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// The `k`-th eigenfunction.
    pub fn mode(basis: Arc<SpectralBasis>, k: usize) -> Result<Self> {
        if k >= basis.len() {
            return Err(Error::InvalidArgument(format!("mode index {k} out of range {}", basis.len())));
        }
        let mut f = Self::zeros(basis);
        f.coeffs[k] = Complex64::new(1.0, 0.0);
        Ok(f)
    }

    pub fn from_label(basis: Arc<SpectralBasis>, label: ModeLabel) -> Result<Self> {
        let k = basis.index_of(label).ok_or_else(|| Error::InvalidArgument(format!("no mode {label:?} in basis")))?;
        Self::mode(basis, k)
    }

    /// Quadrature projection of nodal values on the basis grid.
    pub fn from_nodal(basis: Arc<SpectralBasis>, values: &[Complex64]) -> Result<Self> {
        let coeffs = basis.analyze(values)?;
        Ok(SpectralField { basis, coeffs })
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn with_coeffs(&self, coeffs: Vec<Complex64>) -> Result<Self> {
        Self::new(self.basis.clone(), coeffs)
    }

    /// Nodal values on the basis grid.
    pub fn synthesize(&self) -> Vec<Complex64> {
        self.basis.grid().synthesize(&self.coeffs, Component::Value)
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self, other> = sum_k a_k conj(b_k)`.
    pub fn inner(&self, other: &SpectralField) -> Result<Complex64> {
        same_basis(self, other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b.conj()).sum())
    }

    pub fn scaled(&self, s: Complex64) -> SpectralField {
        SpectralField { basis: self.basis.clone(), coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &SpectralField, s: Complex64) -> Result<SpectralField> {
        same_basis(self, other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b * s).collect();
        Ok(SpectralField { basis: self.basis.clone(), coeffs })
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.add_scaled(other, Complex64::new(-1.0, 0.0))
    }

    /// Diagonal multiplier `c_k -> f(mu_k) c_k`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> SpectralField {
        let coeffs = self.coeffs.iter().zip(self.basis.modes()).map(|(c, m)| c * f(m.mu)).collect();
        SpectralField { basis: self.basis.clone(), coeffs }
    }

    /// Largest `mu_k` carrying a nonzero coefficient.
    pub fn spectral_top(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(self.basis.modes())
            .filter(|(c, _)| c.norm_sqr() > 0.0)
            .map(|(_, m)| m.mu)
            .fold(0.0, f64::max)
    }

    /// Smallest and largest eigenvalue carrying a nonzero coefficient.
    pub fn eigenvalue_span(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (c, m) in self.coeffs.iter().zip(self.basis.modes()) {
            if c.norm_sqr() > 0.0 {
                lo = lo.min(m.lambda);
                hi = hi.max(m.lambda);
            }
        }
        if lo > hi {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }
}

pub(crate) fn same_basis(a: &SpectralField, b: &SpectralField) -> Result<()> {
    if Arc::ptr_eq(&a.basis, &b.basis) || a.basis.fingerprint() == b.basis.fingerprint() {
        Ok(())
    } else {
        Err(Error::BasisMismatch)
    }
}

/// Dyadic frequency band with level `N = 2^j`.
///
/// Closed bands are `N <= mu <= 2N`. Half-open bands are `N <= mu < 2N` and
/// tile the spectrum; the half-open band of level 1 also absorbs `mu < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicBand {
    level: u32,
    closed: bool,
}

impl DyadicBand {
    fn checked(level: u32, closed: bool) -> Result<Self> {
        if level == 0 || !level.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("band level must be a power of two, got {level}")));
        }
        Ok(DyadicBand { level, closed })
    }

    pub fn closed(level: u32) -> Result<Self> {
        Self::checked(level, true)
    }

    pub fn half_open(level: u32) -> Result<Self> {
        Self::checked(level, false)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn contains(&self, mu: f64) -> bool {
        let n = self.level as f64;
        if self.closed {
            mu >= n && mu <= 2.0 * n
        } else {
            (mu >= n || self.level == 1) && mu < 2.0 * n
        }
    }

    /// Indices of the basis modes inside the band.
    pub fn mode_indices(&self, basis: &SpectralBasis) -> Vec<usize> {
        basis.modes().iter().enumerate().filter(|(_, m)| self.contains(m.mu)).map(|(k, _)| k).collect()
    }
}

/// Half-open dyadic bands covering `[0, mu_max]`.
pub fn dyadic_partition(mu_max: f64) -> Vec<DyadicBand> {
    let mut bands = Vec::new();
    let mut level = 1u32;
    loop {
        bands.push(DyadicBand { level, closed: false });
        if 2.0 * level as f64 > mu_max {
            break;
        }
        level *= 2;
    }
    bands
}

/// Spectral projector onto the band.
pub fn project_band(u: &SpectralField, band: DyadicBand) -> SpectralField {
    let coeffs = u
        .coeffs
        .iter()
        .zip(u.basis.modes())
        .map(|(c, m)| if band.contains(m.mu) { *c } else { Complex64::new(0.0, 0.0) })
        .collect();
    SpectralField { basis: u.basis.clone(), coeffs }
}

/// `(sum_k <mu_k>^{2s} |c_k|^2)^{1/2}`.
pub fn sobolev_norm(u: &SpectralField, s: f64) -> f64 {
    u.coeffs
        .iter()
        .zip(u.basis.modes())
        .map(|(c, m)| japanese(m.mu).powf(2.0 * s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn check_band_support(u: &SpectralField, n: u32) -> Result<DyadicBand> {
    let band = DyadicBand::closed(n)?;
    let tol = 1e-12 * u.l2_norm().max(1.0);
    for (c, m) in u.coeffs.iter().zip(u.basis.modes()) {
        if !band.contains(m.mu) && c.norm() > tol {
            return Err(Error::OutOfBand { lo: n as f64, hi: 2.0 * n as f64 });
        }
    }
    Ok(band)
}

/// `T = N^2 (-Delta)^{-1}` on fields supported in the closed band of level `n`.
pub fn apply_t(u: &SpectralField, n: u32) -> Result<SpectralField> {
    let band = check_band_support(u, n)?;
    let nn = n as f64;
    Ok(u.map_spectrum(|mu| if band.contains(mu) { (nn / mu).powi(2) } else { 0.0 }))
}

/// `V = N^{-2} (-Delta)` on fields supported in the closed band of level `n`.
pub fn apply_v(u: &SpectralField, n: u32) -> Result<SpectralField> {
    let band = check_band_support(u, n)?;
    let nn = n as f64;
    Ok(u.map_spectrum(|mu| if band.contains(mu) { (mu / nn).powi(2) } else { 0.0 }))
}

/// `J^s`: multiplies mode `k` by `<mu_k>^{s/2}`.
pub fn apply_js(u: &SpectralField, s: f64) -> SpectralField {
    u.map_spectrum(|mu| japanese(mu).powf(0.5 * s))
}

/// `Delta u`, i.e. `c_k -> -lambda_k c_k`.
pub fn laplacian(u: &SpectralField) -> SpectralField {
    let coeffs = u.coeffs.iter().zip(u.basis.modes()).map(|(c, m)| c * -m.lambda).collect();
    SpectralField { basis: u.basis.clone(), coeffs }
}

/// Orthonormal-frame gradient components on the basis grid.
pub fn gradient_nodal(u: &SpectralField) -> [Vec<Complex64>; 2] {
    let g = u.basis.grid();
    [g.synthesize(&u.coeffs, Component::Grad1), g.synthesize(&u.coeffs, Component::Grad2)]
}

/// Nodal values of the bilinear pairing `grad u . grad v` (no conjugation).
pub fn gradient_pair(u: &SpectralField, v: &SpectralField) -> Result<Vec<Complex64>> {
    same_basis(u, v)?;
    let [u1, u2] = gradient_nodal(u);
    let [v1, v2] = gradient_nodal(v);
    Ok((0..u1.len()).map(|i| u1[i] * v1[i] + u2[i] * v2[i]).collect())
}

/// `int |grad u|^2` by quadrature of the nodal gradient.
pub fn energy_gradient(u: &SpectralField) -> f64 {
    let [g1, g2] = gradient_nodal(u);
    let dens: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect();
    u.basis.grid().integrate_real(&dens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{build_basis, Boundary, ManifoldSpec};
    use std::f64::consts::PI;

    fn sample_field(basis: &Arc<SpectralBasis>) -> SpectralField {
        let c = (0..basis.len()).map(|k| Complex64::new(((k * 7 + 3) % 11) as f64 - 5.0, ((k * 5) % 7) as f64 - 3.0)).collect();
        SpectralField::new(basis.clone(), c).unwrap()
    }

    #[test]
    fn partition_reproduces_mass() {
        let b = build_basis(&ManifoldSpec::unit_disk(Boundary::Neumann), 20.0).unwrap();
        let u = sample_field(&b);
        let total: f64 = dyadic_partition(b.mu_max()).iter().map(|band| project_band(&u, *band).l2_norm().powi(2)).sum();
        assert!((total - u.l2_norm().powi(2)).abs() < 1e-12 * total);
    }

    #[test]
    fn closed_band_includes_both_ends() {
        let band = DyadicBand::closed(4).unwrap();
        assert!(band.contains(4.0) && band.contains(8.0) && !band.contains(8.000001));
        let half = DyadicBand::half_open(4).unwrap();
        assert!(half.contains(4.0) && !half.contains(8.0));
        assert!(DyadicBand::half_open(1).unwrap().contains(0.0));
        assert!(DyadicBand::closed(3).is_err());
    }

    #[test]
    fn t_and_v_are_inverse_on_band() {
        let b = build_basis(&ManifoldSpec::square(Boundary::Dirichlet), 16.0).unwrap();
        let u = project_band(&sample_field(&b), DyadicBand::closed(4).unwrap());
        let back = apply_v(&apply_t(&u, 4).unwrap(), 4).unwrap();
        assert!(back.sub(&u).unwrap().l2_norm() < 1e-13 * u.l2_norm());
        let wide = sample_field(&b);
        assert!(matches!(apply_t(&wide, 4), Err(Error::OutOfBand { .. })));
    }

    #[test]
    fn gradient_energy_matches_eigenvalues() {
        for s in [
            ManifoldSpec::square(Boundary::Dirichlet),
            ManifoldSpec::rectangle(1.5, 2.5, Boundary::Neumann),
            ManifoldSpec::unit_disk(Boundary::Dirichlet),
            ManifoldSpec::unit_disk(Boundary::Neumann),
        ] {
            let b = build_basis(&s, 14.0).unwrap();
            for k in 0..b.len() {
                let e = SpectralField::mode(b.clone(), k).unwrap();
                let lam = b.modes()[k].lambda;
                assert!((energy_gradient(&e) - lam).abs() < 1e-8 * (1.0 + lam), "{s:?} k={k}");
            }
        }
    }

    #[test]
    fn basis_grid_integrates_triple_products() {
        // int_0^pi sin^2(x) sin(k x) dx for odd k, in closed form
        let s2 = |k: f64| 1.0 / k - 0.5 * (1.0 / (k + 2.0) + 1.0 / (k - 2.0));
        let b = build_basis(&ManifoldSpec::square(Boundary::Dirichlet), 12.0).unwrap();
        let g = b.grid();
        let e11 = g.mode_values(b.index_of(ModeLabel::Rect { m: 1, n: 1 }).unwrap(), Component::Value);
        for (m, n) in [(1u32, 1u32), (1, 3), (3, 5), (5, 7)] {
            let ek = g.mode_values(b.index_of(ModeLabel::Rect { m, n }).unwrap(), Component::Value);
            let prod: Vec<f64> = e11.iter().zip(&ek).map(|(a, c)| a * a * c).collect();
            let want = (2.0 / PI).powi(3) * s2(m as f64) * s2(n as f64);
            assert!((g.integrate_real(&prod) - want).abs() < 1e-13);
        }
    }

    #[test]
    fn disk_triple_products_converge() {
        let b = build_basis(&ManifoldSpec::unit_disk(Boundary::Dirichlet), 10.0).unwrap();
        let fine = b.make_grid(crate::manifold::GridPlan::Basis { exactness: 60.0 });
        let n = b.len();
        for (i, j, k) in [(0, 0, 0), (0, 1, 3), (2, 5, n - 1), (n - 1, n - 2, n - 3)] {
            let tri = |g: &crate::grid::SeparableGrid| {
                let (a, bb, c) = (g.mode_values(i, Component::Value), g.mode_values(j, Component::Value), g.mode_values(k, Component::Value));
                let p: Vec<f64> = (0..a.len()).map(|t| a[t] * bb[t] * c[t]).collect();
                g.integrate_real(&p)
            };
            assert!((tri(b.grid()) - tri(&fine)).abs() < 1e-13);
        }
    }

    #[test]
    fn js_composes_to_sobolev_weight() {
        let b = build_basis(&ManifoldSpec::unit_disk(Boundary::Dirichlet), 12.0).unwrap();
        let u = sample_field(&b);
        let twice = apply_js(&apply_js(&u, 1.0), 1.0);
        assert!((twice.l2_norm() - sobolev_norm(&u, 1.0)).abs() < 1e-12 * sobolev_norm(&u, 1.0));
    }

    #[test]
    fn mismatched_bases_rejected() {
        let a = build_basis(&ManifoldSpec::square(Boundary::Dirichlet), 5.0).unwrap();
        let b = build_basis(&ManifoldSpec::square(Boundary::Neumann), 5.0).unwrap();
        let u = SpectralField::mode(a, 0).unwrap();
        let v = SpectralField::mode(b, 0).unwrap();
        assert!(matches!(gradient_pair(&u, &v), Err(Error::BasisMismatch)));
        assert!(u.inner(&v).is_err());
    }
}
