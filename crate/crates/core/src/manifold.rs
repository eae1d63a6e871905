//! Model domains, their Laplace eigenpairs, and the spectral basis.

use crate::bessel::{bessel_j_and_prime, bessel_roots_below, j_window, RootOf};
use crate::error::{Error, Result};
use crate::grid::{Component, FirstAxisTables, SecondAxis, SeparableGrid, TrigFactor};
use crate::quadrature::{fft_friendly, gauss_legendre_on, midpoint_on, nodes_for_bandwidth};
use crate::report::num17;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Dirichlet,
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// `[0, side_x] x [0, side_y]`.
    Rectangle { side_x: f64, side_y: f64 },
    /// The unit disk.
    Disk,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub domain: Domain,
    pub boundary: Boundary,
}

impl ManifoldSpec {
    pub fn rectangle(side_x: f64, side_y: f64, boundary: Boundary) -> Self {
        ManifoldSpec { domain: Domain::Rectangle { side_x, side_y }, boundary }
    }

    /// The `pi x pi` square, whose eigenvalues are sums of two squares.
    pub fn square(boundary: Boundary) -> Self {
        Self::rectangle(PI, PI, boundary)
    }

    pub fn unit_disk(boundary: Boundary) -> Self {
        ManifoldSpec { domain: Domain::Disk, boundary }
    }

    pub fn validate(&self) -> Result<()> {
        if let Domain::Rectangle { side_x, side_y } = self.domain {
            if !(side_x.is_finite() && side_y.is_finite() && side_x > 0.0 && side_y > 0.0) {
                return Err(Error::InvalidSpec(format!("rectangle sides must be positive, got {side_x} x {side_y}")));
            }
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        match self.domain {
            Domain::Rectangle { side_x, side_y } => side_x * side_y,
            Domain::Disk => PI,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Cos,
    Sin,
}

/// Identifies an eigenfunction within its family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModeLabel {
    /// Product of the `m`-th x-factor and `n`-th y-factor.
    Rect { m: u32, n: u32 },
    /// Angular order `m`, radial rank `q`, angular parity.
    Disk { m: u32, q: u32, parity: Parity },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub label: ModeLabel,
    pub lambda: f64,
    pub mu: f64,
}

#[derive(Clone, Copy, Debug)]
struct RadialFactor {
    m: u32,
    root: f64,
    norm: f64,
}

impl RadialFactor {
    fn value_and_slope(&self, r: f64) -> (f64, f64) {
        if self.root == 0.0 {
            return (self.norm, 0.0);
        }
        let (j, dj) = bessel_j_and_prime(self.m, self.root * r);
        (self.norm * j, self.norm * self.root * dj)
    }
}

#[derive(Clone, Debug)]
enum Factors {
    Rect { lx: f64, ly: f64, xs: Vec<TrigFactor>, ys: Vec<TrigFactor> },
    Disk { radial: Vec<RadialFactor>, angular: Vec<TrigFactor> },
}

/// Layout of a quadrature grid relative to a basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridPlan {
    /// Gauss-Legendre along rectangle sides and disk radii, uniform in angle.
    /// Integrates every mode product of total frequency up to `exactness`.
    Basis { exactness: f64 },
    /// Uniform midpoint grids on rectangles (FFT in both directions is then
    /// available); identical to `Basis` on the disk. On rectangles this
    /// integrates products with an even number of sine factors per axis,
    /// which covers all quartic expressions `|u|^2 |v|^2`, `|grad u|^2 |v|^2`.
    Product { exactness: f64 },
}

/// Orthonormal Laplace eigenfunctions with `sqrt(lambda) <= mu_max`, sorted
/// by eigenvalue with ties broken by label, together with a quadrature grid.
pub struct SpectralBasis {
    spec: ManifoldSpec,
    mu_max: f64,
    modes: Vec<Mode>,
    factors: Factors,
    mode_a: Vec<usize>,
    mode_b: Vec<usize>,
    grid: SeparableGrid,
    fingerprint: String,
}

impl std::fmt::Debug for SpectralBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralBasis")
            .field("spec", &self.spec)
            .field("mu_max", &self.mu_max)
            .field("modes", &self.modes.len())
            .field("grid", &self.grid)
            .finish()
    }
}

/// Default ratio between grid exactness and `mu_max`: triple products of
/// resolved modes are integrated exactly.
pub const DEFAULT_EXACTNESS_FACTOR: f64 = 3.0;

/// Builds the basis with the default triple-product exact grid.
pub fn build_basis(spec: &ManifoldSpec, mu_max: f64) -> Result<Arc<SpectralBasis>> {
    build_basis_with_exactness(spec, mu_max, DEFAULT_EXACTNESS_FACTOR * mu_max)
}

/// Builds the basis with a grid integrating products up to total frequency
/// `exactness`, which must be at least `2 mu_max`.
pub fn build_basis_with_exactness(spec: &ManifoldSpec, mu_max: f64, exactness: f64) -> Result<Arc<SpectralBasis>> {
    spec.validate()?;
    if !(mu_max.is_finite() && mu_max > 0.0) {
        return Err(Error::InvalidArgument(format!("mu_max must be positive, got {mu_max}")));
    }
    if !(exactness >= 2.0 * mu_max) {
        return Err(Error::UnderResolved { have: exactness, need: 2.0 * mu_max });
    }
    let (mut entries, factors) = match spec.domain {
        Domain::Rectangle { side_x, side_y } => rect_modes(side_x, side_y, spec.boundary, mu_max),
        Domain::Disk => disk_modes(spec.boundary, mu_max)?,
    };
    if entries.is_empty() {
        return Err(Error::InvalidSpec(format!("no eigenvalues below mu_max = {mu_max}")));
    }
    entries.sort_by(|a, b| a.0.lambda.total_cmp(&b.0.lambda).then(a.0.label.cmp(&b.0.label)));
    let modes: Vec<Mode> = entries.iter().map(|e| e.0).collect();
    let mode_a: Vec<usize> = entries.iter().map(|e| e.1).collect();
    let mode_b: Vec<usize> = entries.iter().map(|e| e.2).collect();
    let grid = make_grid(&factors, &mode_a, &mode_b, mu_max, GridPlan::Basis { exactness });
    let mut basis = SpectralBasis { spec: *spec, mu_max, modes, factors, mode_a, mode_b, grid, fingerprint: String::new() };
    let digest = Sha256::digest(basis.record_json(false).to_string().as_bytes());
    basis.fingerprint = digest.iter().take(16).map(|b| format!("{b:02x}")).collect();
    Ok(Arc::new(basis))
}

fn rect_factor(index: u32, side: f64, boundary: Boundary) -> TrigFactor {
    let k = index as f64 * (PI / side);
    let (amp_cos, amp_sin) = match boundary {
        Boundary::Dirichlet => (0.0, (2.0 / side).sqrt()),
        Boundary::Neumann if index == 0 => ((1.0 / side).sqrt(), 0.0),
        Boundary::Neumann => ((2.0 / side).sqrt(), 0.0),
    };
    TrigFactor { k, freq: index as usize, amp_cos, amp_sin }
}

type Entry = (Mode, usize, usize);

fn rect_modes(lx: f64, ly: f64, boundary: Boundary, mu_max: f64) -> (Vec<Entry>, Factors) {
    let first = match boundary {
        Boundary::Dirichlet => 1,
        Boundary::Neumann => 0,
    };
    let mmax = (mu_max * lx / PI).floor() as u32 + 1;
    let nmax = (mu_max * ly / PI).floor() as u32 + 1;
    let lam_max = mu_max * mu_max;
    let mut entries = Vec::new();
    for m in first..=mmax {
        let kx = m as f64 * (PI / lx);
        for n in first..=nmax {
            let ky = n as f64 * (PI / ly);
            let lambda = kx * kx + ky * ky;
            if lambda <= lam_max {
                let mode = Mode { label: ModeLabel::Rect { m, n }, lambda, mu: lambda.sqrt() };
                entries.push((mode, m as usize, n as usize));
            }
        }
    }
    let xs = (0..=mmax).map(|m| rect_factor(m, lx, boundary)).collect();
    let ys = (0..=nmax).map(|n| rect_factor(n, ly, boundary)).collect();
    (entries, Factors::Rect { lx, ly, xs, ys })
}

fn angular_factor(m: u32, parity: Parity) -> TrigFactor {
    let (amp_cos, amp_sin) = match (m, parity) {
        (0, _) => (1.0 / (2.0 * PI).sqrt(), 0.0),
        (_, Parity::Cos) => (1.0 / PI.sqrt(), 0.0),
        (_, Parity::Sin) => (0.0, 1.0 / PI.sqrt()),
    };
    TrigFactor { k: m as f64, freq: m as usize, amp_cos, amp_sin }
}

fn disk_modes(boundary: Boundary, mu_max: f64) -> Result<(Vec<Entry>, Factors)> {
    let kind = match boundary {
        Boundary::Dirichlet => RootOf::Function,
        Boundary::Neumann => RootOf::Derivative,
    };
    let mut radial = Vec::new();
    let mut angular = Vec::new();
    let mut entries = Vec::new();
    if boundary == Boundary::Neumann {
        radial.push(RadialFactor { m: 0, root: 0.0, norm: 2.0_f64.sqrt() });
        angular.push(angular_factor(0, Parity::Cos));
        let mode = Mode { label: ModeLabel::Disk { m: 0, q: 0, parity: Parity::Cos }, lambda: 0.0, mu: 0.0 };
        entries.push((mode, 0, 0));
    }
    let mut m = 0u32;
    while (m as f64) <= mu_max {
        let roots = bessel_roots_below(m, kind, mu_max)?;
        if roots.is_empty() {
            break;
        }
        let cos_idx = angular.len();
        angular.push(angular_factor(m, Parity::Cos));
        let sin_idx = if m > 0 {
            angular.push(angular_factor(m, Parity::Sin));
            Some(angular.len() - 1)
        } else {
            None
        };
        for (qi, &root) in roots.iter().enumerate() {
            let norm = match boundary {
                Boundary::Dirichlet => 2.0_f64.sqrt() / j_window(m + 1, m + 1, root)[0].abs(),
                Boundary::Neumann => {
                    let jm = j_window(m, m, root)[0];
                    2.0_f64.sqrt() / (jm.abs() * (1.0 - (m as f64 / root).powi(2)).sqrt())
                }
            };
            let a_idx = radial.len();
            radial.push(RadialFactor { m, root, norm });
            let lambda = root * root;
            let q = qi as u32 + 1;
            entries.push((Mode { label: ModeLabel::Disk { m, q, parity: Parity::Cos }, lambda, mu: root }, a_idx, cos_idx));
            if let Some(s) = sin_idx {
                entries.push((Mode { label: ModeLabel::Disk { m, q, parity: Parity::Sin }, lambda, mu: root }, a_idx, s));
            }
        }
        m += 1;
    }
    Ok((entries, Factors::Disk { radial, angular }))
}

fn trig_tables(factors: &[TrigFactor], nodes: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let vals = factors.iter().map(|f| nodes.iter().map(|y| f.eval(*y)).collect()).collect();
    let ders = factors.iter().map(|f| nodes.iter().map(|y| f.derivative().eval(*y)).collect()).collect();
    (vals, ders)
}

fn make_grid(factors: &Factors, mode_a: &[usize], mode_b: &[usize], mu_max: f64, plan: GridPlan) -> SeparableGrid {
    let (exactness, product) = match plan {
        GridPlan::Basis { exactness } => (exactness, false),
        GridPlan::Product { exactness } => (exactness, true),
    };
    match factors {
        Factors::Rect { lx, ly, xs, ys } => {
            if product {
                let nx = fft_friendly((exactness * lx / (2.0 * PI)).floor() as usize + 1);
                let ny = fft_friendly((exactness * ly / (2.0 * PI)).floor() as usize + 1);
                let (x, wx) = midpoint_on(nx, 0.0, *lx);
                let (y, wy) = midpoint_on(ny, 0.0, *ly);
                let (vals, ders) = trig_tables(xs, &x);
                let a = FirstAxisTables { scaled: vals.clone(), vals, ders };
                let second = SeparableGrid::uniform_axis(2 * ny, 0.5, ys.clone());
                SeparableGrid::new(x, wx, a, y, wy, second, mode_a.to_vec(), mode_b.to_vec(), exactness)
            } else {
                let nx = nodes_for_bandwidth(exactness * lx / 2.0);
                let ny = nodes_for_bandwidth(exactness * ly / 2.0);
                let (x, wx) = gauss_legendre_on(nx, 0.0, *lx);
                let (y, wy) = gauss_legendre_on(ny, 0.0, *ly);
                let (vals, ders) = trig_tables(xs, &x);
                let a = FirstAxisTables { scaled: vals.clone(), vals, ders };
                let (bv, bd) = trig_tables(ys, &y);
                let second = SecondAxis::Dense { vals: bv, ders: bd };
                SeparableGrid::new(x, wx, a, y, wy, second, mode_a.to_vec(), mode_b.to_vec(), exactness)
            }
        }
        Factors::Disk { radial, angular } => {
            let nr = nodes_for_bandwidth(0.5 * exactness + 1.0);
            let (r, wr) = gauss_legendre_on(nr, 0.0, 1.0);
            let wr: Vec<f64> = wr.iter().zip(&r).map(|(w, ri)| w * ri).collect();
            let m_max = angular.iter().map(|f| f.freq).max().unwrap_or(0);
            let needed = (exactness.floor() as usize + 1).max(2 * m_max + 1);
            let _ = mu_max;
            let nt = fft_friendly(needed);
            let theta: Vec<f64> = (0..nt).map(|j| 2.0 * PI * j as f64 / nt as f64).collect();
            let wt = vec![2.0 * PI / nt as f64; nt];
            let mut vals = Vec::with_capacity(radial.len());
            let mut ders = Vec::with_capacity(radial.len());
            let mut scaled = Vec::with_capacity(radial.len());
            for f in radial {
                let (mut v, mut d, mut s) = (Vec::with_capacity(nr), Vec::with_capacity(nr), Vec::with_capacity(nr));
                for &ri in &r {
                    let (val, slope) = f.value_and_slope(ri);
                    v.push(val);
                    d.push(slope);
                    s.push(val / ri);
                }
                vals.push(v);
                ders.push(d);
                scaled.push(s);
            }
            let a = FirstAxisTables { vals, ders, scaled };
            let second = SeparableGrid::uniform_axis(nt, 0.0, angular.clone());
            SeparableGrid::new(r, wr, a, theta, wt, second, mode_a.to_vec(), mode_b.to_vec(), exactness)
        }
    }
}

impl SpectralBasis {
    pub fn spec(&self) -> &ManifoldSpec {
        &self.spec
    }

    pub fn mu_max(&self) -> f64 {
        self.mu_max
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    /// The basis quadrature grid.
    pub fn grid(&self) -> &SeparableGrid {
        &self.grid
    }

    /// Hex digest of the exported record; identifies the basis in manifests.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn index_of(&self, label: ModeLabel) -> Option<usize> {
        self.modes.iter().position(|m| m.label == label)
    }

    /// A grid over the same modes with a different layout or exactness.
    pub fn make_grid(&self, plan: GridPlan) -> SeparableGrid {
        make_grid(&self.factors, &self.mode_a, &self.mode_b, self.mu_max, plan)
    }

    /// Nodal values of `sum_k c_k e_k` on the basis grid.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(coeffs.len(), self.len())?;
        Ok(self.grid.synthesize(coeffs, Component::Value))
    }

    /// Quadrature projection onto the modes.
    pub fn analyze(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(values.len(), self.grid.n_nodes())?;
        Ok(self.grid.analyze(values))
    }

    fn check_len(&self, got: usize, expected: usize) -> Result<()> {
        if got != expected {
            return Err(Error::DimensionMismatch { expected, got });
        }
        Ok(())
    }

    /// Largest entry of `|G - I|` of the quadrature Gram matrix.
    pub fn orthonormality_residual(&self) -> f64 {
        self.grid.gram_residual()
    }

    /// Nodal coordinates of the basis grid in physical form (`x, y`) or
    /// (`r, theta`).
    pub fn grid_axes(&self) -> (&[f64], &[f64]) {
        (&self.grid.a_nodes, &self.grid.b_nodes)
    }

    fn record_json(&self, with_fingerprint: bool) -> serde_json::Value {
        let (na, nb) = self.grid.shape();
        let modes: Vec<serde_json::Value> = self
            .modes
            .iter()
            .enumerate()
            .map(|(i, m)| {
                serde_json::json!({
                    "index": i,
                    "label": m.label,
                    "lambda": num17(m.lambda),
                    "mu": num17(m.mu),
                })
            })
            .collect();
        let mut v = serde_json::json!({
            "spec": self.spec,
            "mu_max": num17(self.mu_max),
            "grid": { "shape": [na, nb], "exactness": num17(self.grid.exactness()) },
            "modes": modes,
        });
        if with_fingerprint {
            v["fingerprint"] = serde_json::Value::String(self.fingerprint.clone());
        }
        v
    }

    /// JSON description of the basis (spec, modes, grid shape, fingerprint).
    pub fn export_record(&self) -> serde_json::Value {
        self.record_json(true)
    }
}

/// Parsed form of an exported basis record.
#[derive(Clone, Debug, Deserialize)]
pub struct BasisRecord {
    pub spec: ManifoldSpec,
    pub mu_max: f64,
    pub fingerprint: String,
    pub modes: Vec<RecordMode>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct RecordMode {
    pub index: usize,
    pub label: ModeLabel,
    pub lambda: f64,
    pub mu: f64,
}

impl BasisRecord {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("basis record: {e}")))
    }

    /// Whether a freshly built basis reproduces this record.
    pub fn matches(&self, basis: &SpectralBasis) -> bool {
        self.fingerprint == basis.fingerprint()
            && self.modes.len() == basis.len()
            && self
                .modes
                .iter()
                .zip(basis.modes())
                .all(|(r, m)| r.label == m.label && r.lambda.to_bits() == m.lambda.to_bits())
    }
}
