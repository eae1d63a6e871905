//! Separable tensor grids and the transforms between mode coefficients and
//! nodal values.
//!
//! Every eigenfunction factors as `A(a) B(b)` over the two grid axes
//! (`x, y` on rectangles, `r, theta` on the disk). Synthesis first sums modes
//! sharing a second-axis factor along the first axis, then expands along the
//! second axis either densely or, on uniform periodic grids, through an FFT.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// `amp_cos * cos(k y) + amp_sin * sin(k y)`; on a uniform second axis
/// `k y_j = 2 pi freq (j + phase) / period`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct TrigFactor {
    pub k: f64,
    pub freq: usize,
    pub amp_cos: f64,
    pub amp_sin: f64,
}

impl TrigFactor {
    pub fn eval(&self, y: f64) -> f64 {
        let (s, c) = (self.k * y).sin_cos();
        self.amp_cos * c + self.amp_sin * s
    }

    pub fn derivative(&self) -> TrigFactor {
        TrigFactor { k: self.k, freq: self.freq, amp_cos: self.k * self.amp_sin, amp_sin: -self.k * self.amp_cos }
    }
}

/// Which nodal quantity to synthesize.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Value,
    /// `d/dx` on rectangles, `d/dr` on the disk.
    Grad1,
    /// `d/dy` on rectangles, `(1/r) d/dtheta` on the disk.
    Grad2,
}

pub(crate) enum SecondAxis {
    Dense { vals: Vec<Vec<f64>>, ders: Vec<Vec<f64>> },
    Uniform { period: usize, phase: f64, factors: Vec<TrigFactor>, fwd: Arc<dyn Fft<f64>>, inv: Arc<dyn Fft<f64>> },
}

pub(crate) struct FirstAxisTables {
    pub vals: Vec<Vec<f64>>,
    pub ders: Vec<Vec<f64>>,
    pub scaled: Vec<Vec<f64>>,
}

/// Tensor grid with weights `w_a[i] * w_b[j]`, nodal index `i * n_b + j`.
pub struct SeparableGrid {
    pub(crate) a_nodes: Vec<f64>,
    pub(crate) a_weights: Vec<f64>,
    pub(crate) b_nodes: Vec<f64>,
    pub(crate) b_weights: Vec<f64>,
    a: FirstAxisTables,
    second: SecondAxis,
    mode_a: Vec<usize>,
    mode_b: Vec<usize>,
    n_bf: usize,
    exactness: f64,
}

impl std::fmt::Debug for SeparableGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SeparableGrid")
            .field("n_a", &self.a_nodes.len())
            .field("n_b", &self.b_nodes.len())
            .field("exactness", &self.exactness)
            .finish()
    }
}

impl SeparableGrid {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        a_nodes: Vec<f64>,
        a_weights: Vec<f64>,
        a: FirstAxisTables,
        b_nodes: Vec<f64>,
        b_weights: Vec<f64>,
        second: SecondAxis,
        mode_a: Vec<usize>,
        mode_b: Vec<usize>,
        exactness: f64,
    ) -> Self {
        let n_bf = match &second {
            SecondAxis::Dense { vals, .. } => vals.len(),
            SecondAxis::Uniform { factors, .. } => factors.len(),
        };
        SeparableGrid { a_nodes, a_weights, b_nodes, b_weights, a, second, mode_a, mode_b, n_bf, exactness }
    }

    pub(crate) fn uniform_axis(period: usize, phase: f64, factors: Vec<TrigFactor>) -> SecondAxis {
        let mut planner = FftPlanner::new();
        SecondAxis::Uniform {
            period,
            phase,
            factors,
            fwd: planner.plan_fft_forward(period),
            inv: planner.plan_fft_inverse(period),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.a_nodes.len() * self.b_nodes.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.a_nodes.len(), self.b_nodes.len())
    }

    pub fn n_modes(&self) -> usize {
        self.mode_a.len()
    }

    /// Largest total frequency of products integrated exactly.
    pub fn exactness(&self) -> f64 {
        self.exactness
    }

    pub fn weight(&self, node: usize) -> f64 {
        let nb = self.b_nodes.len();
        self.a_weights[node / nb] * self.b_weights[node % nb]
    }

    /// Quadrature of nodal values.
    pub fn integrate(&self, values: &[Complex64]) -> Complex64 {
        let nb = self.b_nodes.len();
        let mut total = Complex64::new(0.0, 0.0);
        for (i, wa) in self.a_weights.iter().enumerate() {
            let row = &values[i * nb..(i + 1) * nb];
            let s: Complex64 = row.iter().zip(&self.b_weights).map(|(v, wb)| v * wb).sum();
            total += s * wa;
        }
        total
    }

    /// Quadrature of real nodal values.
    pub fn integrate_real(&self, values: &[f64]) -> f64 {
        let nb = self.b_nodes.len();
        let mut total = 0.0;
        for (i, wa) in self.a_weights.iter().enumerate() {
            let row = &values[i * nb..(i + 1) * nb];
            let s: f64 = row.iter().zip(&self.b_weights).map(|(v, wb)| v * wb).sum();
            total += s * wa;
        }
        total
    }

    fn first_table(&self, comp: Component) -> &[Vec<f64>] {
        match comp {
            Component::Value => &self.a.vals,
            Component::Grad1 => &self.a.ders,
            Component::Grad2 => &self.a.scaled,
        }
    }

    /// Nodal values of `sum_k c_k D e_k` for the chosen component `D`.
    pub fn synthesize(&self, coeffs: &[Complex64], comp: Component) -> Vec<Complex64> {
        let na = self.a_nodes.len();
        let nb = self.b_nodes.len();
        let table = self.first_table(comp);
        let mut stage = vec![Complex64::new(0.0, 0.0); self.n_bf * na];
        let mut used = vec![false; self.n_bf];
        for (k, c) in coeffs.iter().enumerate() {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let bf = self.mode_b[k];
            used[bf] = true;
            let row = &table[self.mode_a[k]];
            let dst = &mut stage[bf * na..(bf + 1) * na];
            for (d, a) in dst.iter_mut().zip(row) {
                *d += c * a;
            }
        }
        let second_derivative = comp == Component::Grad2;
        let mut out = vec![Complex64::new(0.0, 0.0); na * nb];
        match &self.second {
            SecondAxis::Dense { vals, ders } => {
                let tab = if second_derivative { ders } else { vals };
                for bf in 0..self.n_bf {
                    if !used[bf] {
                        continue;
                    }
                    let brow = &tab[bf];
                    for i in 0..na {
                        let s = stage[bf * na + i];
                        if s.re == 0.0 && s.im == 0.0 {
                            continue;
                        }
                        for (o, b) in out[i * nb..(i + 1) * nb].iter_mut().zip(brow) {
                            *o += s * b;
                        }
                    }
                }
            }
            SecondAxis::Uniform { period, phase, factors, inv, .. } => {
                let p = *period;
                let active: Vec<(usize, TrigFactor, Complex64)> = (0..self.n_bf)
                    .filter(|&bf| used[bf])
                    .map(|bf| {
                        let f = if second_derivative { factors[bf].derivative() } else { factors[bf] };
                        let rot = Complex64::from_polar(1.0, 2.0 * PI * f.freq as f64 * phase / p as f64);
                        (bf, f, rot)
                    })
                    .collect();
                let mut buf = vec![Complex64::new(0.0, 0.0); p];
                let mut scratch = vec![Complex64::new(0.0, 0.0); inv.get_inplace_scratch_len()];
                for i in 0..na {
                    buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
                    for (bf, f, rot) in &active {
                        let s = stage[bf * na + i];
                        let (ac, as_) = (s * f.amp_cos, s * f.amp_sin);
                        if f.freq == 0 {
                            buf[0] += ac;
                        } else {
                            let i_as = Complex64::new(-as_.im, as_.re);
                            buf[f.freq] += (ac - i_as) * 0.5 * rot;
                            buf[p - f.freq] += (ac + i_as) * 0.5 * rot.conj();
                        }
                    }
                    inv.process_with_scratch(&mut buf, &mut scratch);
                    out[i * nb..(i + 1) * nb].copy_from_slice(&buf[..nb]);
                }
            }
        }
        out
    }

    /// Discrete projection `c_k = sum_nodes w f e_k`.
    pub fn analyze(&self, values: &[Complex64]) -> Vec<Complex64> {
        let na = self.a_nodes.len();
        let nb = self.b_nodes.len();
        let mut stage = vec![Complex64::new(0.0, 0.0); self.n_bf * na];
        match &self.second {
            SecondAxis::Dense { vals, .. } => {
                for i in 0..na {
                    let row = &values[i * nb..(i + 1) * nb];
                    for (bf, brow) in vals.iter().enumerate() {
                        let mut s = Complex64::new(0.0, 0.0);
                        for ((v, b), w) in row.iter().zip(brow).zip(&self.b_weights) {
                            s += v * (b * w);
                        }
                        stage[bf * na + i] = s;
                    }
                }
            }
            SecondAxis::Uniform { period, phase, factors, fwd, .. } => {
                let p = *period;
                let mut buf = vec![Complex64::new(0.0, 0.0); p];
                let mut scratch = vec![Complex64::new(0.0, 0.0); fwd.get_inplace_scratch_len()];
                let rots: Vec<Complex64> = factors
                    .iter()
                    .map(|f| Complex64::from_polar(1.0, 2.0 * PI * f.freq as f64 * phase / p as f64))
                    .collect();
                for i in 0..na {
                    buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
                    for j in 0..nb {
                        buf[j] = values[i * nb + j] * self.b_weights[j];
                    }
                    fwd.process_with_scratch(&mut buf, &mut scratch);
                    for (bf, f) in factors.iter().enumerate() {
                        let m = f.freq;
                        let plus = rots[bf] * buf[(p - m) % p];
                        let minus = rots[bf].conj() * buf[m];
                        let cos_sum = (plus + minus) * 0.5;
                        let d = (plus - minus) * 0.5;
                        let sin_sum = Complex64::new(d.im, -d.re);
                        stage[bf * na + i] = cos_sum * f.amp_cos + sin_sum * f.amp_sin;
                    }
                }
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.mode_a.len()];
        for (k, o) in out.iter_mut().enumerate() {
            let arow = &self.a.vals[self.mode_a[k]];
            let srow = &stage[self.mode_b[k] * na..(self.mode_b[k] + 1) * na];
            let mut s = Complex64::new(0.0, 0.0);
            for ((a, st), w) in arow.iter().zip(srow).zip(&self.a_weights) {
                s += st * (a * w);
            }
            *o = s;
        }
        out
    }

    fn second_axis_values(&self) -> Vec<Vec<f64>> {
        match &self.second {
            SecondAxis::Dense { vals, .. } => vals.clone(),
            SecondAxis::Uniform { factors, .. } => {
                factors.iter().map(|f| self.b_nodes.iter().map(|y| f.eval(*y)).collect()).collect()
            }
        }
    }

    /// Largest entry of `|G - I|` for the discrete Gram matrix of the modes.
    pub fn gram_residual(&self) -> f64 {
        let ga = gram(&self.a.vals, &self.a_weights);
        let gb = gram(&self.second_axis_values(), &self.b_weights);
        let (na_f, nb_f) = (self.a.vals.len(), self.n_bf);
        let k = self.mode_a.len();
        let mut worst: f64 = 0.0;
        for p in 0..k {
            let (ap, bp) = (self.mode_a[p], self.mode_b[p]);
            for q in p..k {
                let g = ga[ap * na_f + self.mode_a[q]] * gb[bp * nb_f + self.mode_b[q]];
                let target = if p == q { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    /// Nodal values of a single mode.
    pub fn mode_values(&self, k: usize, comp: Component) -> Vec<f64> {
        let mut c = vec![Complex64::new(0.0, 0.0); self.mode_a.len()];
        c[k] = Complex64::new(1.0, 0.0);
        self.synthesize(&c, comp).into_iter().map(|z| z.re).collect()
    }
}

fn gram(tables: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let n = tables.len();
    let mut g = vec![0.0; n * n];
    for p in 0..n {
        for q in p..n {
            let s: f64 = tables[p].iter().zip(&tables[q]).zip(weights).map(|((a, b), w)| a * b * w).sum();
            g[p * n + q] = s;
            g[q * n + p] = s;
        }
    }
    g
}
