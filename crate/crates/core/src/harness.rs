//! Reproducible experiment runner behind the `xsblab` binary.
//!
//! A run reads one TOML file, resolves every default, writes its CSV and JSON
//! outputs into the output directory and finishes by atomically writing
//! `manifest.json`, which echoes the resolved configuration and lists every
//! file the run produced.

use crate::error::{Error, Result};
use crate::estimates::{
    derive_seed, dyadic_summation_check, green_identity_check, interpolation_params, l4_check, run_sweep, CoefficientLaw,
    SweepConfig, SweepKind,
};
use crate::evolution::{split_step_evolve, EvolutionParams, QuadraticNonlinearity, Trajectory};
use crate::field::{energy_gradient, sobolev_norm, SpectralField};
use crate::manifold::{build_basis_with_exactness, Boundary, ManifoldSpec, SpectralBasis, DEFAULT_EXACTNESS_FACTOR};
use crate::picard::{picard_solve, PicardOptions};
use crate::quadrature::TimeRule;
use crate::report::fmt17;
use crate::spacetime::{
    duality_pairing_check, embedding_checks, linear_estimate_probe, time_fourier, Cutoff, SpaceTimeField, WindowSpec,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

/// Environment variable overriding the configured output directory.
pub const OUT_ENV: &str = "XSBLAB_OUT";
pub const MANIFEST: &str = "manifest.json";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_ASSERTION: i32 = 3;
pub const EXIT_BLOW_UP: i32 = 4;

/// Largest fitted exponent accepted as consistent with the `s > 2/3` bound.
pub const EXPONENT_BOUND: f64 = 2.0 / 3.0 + 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Spectrum,
    Evolve,
    Picard,
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Evolve => "evolve",
            Command::Picard => "picard",
            Command::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Rectangle,
    Disk,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManifoldConfig {
    pub domain: DomainKind,
    pub side_x: f64,
    pub side_y: f64,
    pub boundary: Boundary,
    /// Frequency cutoff; the default depends on the experiment.
    pub mu_max: Option<f64>,
    /// Basis-grid exactness as a multiple of `mu_max`.
    pub exactness_factor: f64,
}

impl Default for ManifoldConfig {
    fn default() -> Self {
        ManifoldConfig {
            domain: DomainKind::Rectangle,
            side_x: std::f64::consts::PI,
            side_y: std::f64::consts::PI,
            boundary: Boundary::Dirichlet,
            mu_max: None,
            exactness_factor: DEFAULT_EXACTNESS_FACTOR,
        }
    }
}

impl ManifoldConfig {
    pub fn spec(&self) -> ManifoldSpec {
        match self.domain {
            DomainKind::Rectangle => ManifoldSpec::rectangle(self.side_x, self.side_y, self.boundary),
            DomainKind::Disk => ManifoldSpec::unit_disk(self.boundary),
        }
    }

    fn build(&self) -> Result<Arc<SpectralBasis>> {
        let mu_max = self.mu_max.expect("resolved before use");
        build_basis_with_exactness(&self.spec(), mu_max, self.exactness_factor * mu_max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    pub out_dir: String,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { seed: 0, out_dir: "xsblab-out".into() }
    }
}

/// Real number or `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Real(f64),
    Complex([f64; 2]),
}

impl Coefficient {
    pub fn value(&self) -> Complex64 {
        match *self {
            Coefficient::Real(x) => Complex64::new(x, 0.0),
            Coefficient::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// Initial datum of `evolve` and `picard`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// Gaussian coefficients on the modes with `mu <= top`, rescaled so that
    /// `||u0||_{H^norm_s} = norm`.
    Random {
        top: Option<f64>,
        norm: f64,
        #[serde(default)]
        norm_s: f64,
    },
    /// Explicit `[index, re, im]` coefficients.
    Modes { modes: Vec<(usize, f64, f64)> },
}

impl InitialData {
    fn resolve(&mut self, mu_max: f64) {
        if let InitialData::Random { top, .. } = self {
            top.get_or_insert(mu_max / 2.0);
        }
    }

    fn build(&self, basis: &Arc<SpectralBasis>, seed: u64) -> Result<SpectralField> {
        match self {
            InitialData::Random { top, norm, norm_s } => {
                let top = top.expect("resolved before use");
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let c: Vec<Complex64> = basis
                    .modes()
                    .iter()
                    .map(|m| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        if m.mu <= top { Complex64::new(re, im) } else { Complex64::new(0.0, 0.0) }
                    })
                    .collect();
                let u = SpectralField::new(basis.clone(), c)?;
                let h = sobolev_norm(&u, *norm_s);
                if h == 0.0 {
                    return Err(Error::Config(format!("no modes with mu <= {top}")));
                }
                Ok(u.scaled(Complex64::new(norm / h, 0.0)))
            }
            InitialData::Modes { modes } => {
                let mut c = vec![Complex64::new(0.0, 0.0); basis.len()];
                for &(k, re, im) in modes {
                    let slot = c.get_mut(k).ok_or_else(|| Error::Config(format!("mode index {k} beyond basis size {}", basis.len())))?;
                    *slot += Complex64::new(re, im);
                }
                SpectralField::new(basis.clone(), c)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub t_end: f64,
    pub dt: f64,
    pub alpha: Coefficient,
    pub beta: Coefficient,
    pub gamma: Coefficient,
    pub substeps: usize,
    pub dealias: bool,
    /// Write every `record_every`-th step to the trajectory file.
    pub record_every: usize,
    pub initial: InitialData,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            t_end: 0.5,
            dt: 1e-3,
            alpha: Coefficient::Real(0.5),
            beta: Coefficient::Real(0.0),
            gamma: Coefficient::Real(0.5),
            substeps: 2,
            dealias: true,
            record_every: 10,
            initial: InitialData::Random { top: None, norm: 0.5, norm_s: 0.0 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardConfig {
    pub t_end: f64,
    /// Trapezoid step; defaults to `t_end / 64`.
    pub dt: Option<f64>,
    pub alpha: Coefficient,
    pub beta: Coefficient,
    pub gamma: Coefficient,
    pub s: f64,
    pub b: f64,
    pub b_prime: f64,
    pub c0: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub dealias: bool,
    pub initial: InitialData,
}

impl Default for PicardConfig {
    fn default() -> Self {
        let o = PicardOptions::default();
        PicardConfig {
            t_end: 0.05,
            dt: None,
            alpha: Coefficient::Real(1.0),
            beta: Coefficient::Real(0.0),
            gamma: Coefficient::Real(1.0),
            s: o.s,
            b: o.b,
            b_prime: o.b_prime,
            c0: o.c0,
            max_iter: o.max_iter,
            tol: o.tol,
            dealias: o.dealias,
            initial: InitialData::Random { top: None, norm: 0.1, norm_s: 1.0 },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyKind {
    Bilinear,
    GradientBilinear,
    XsbBilinear,
    XsbGradient,
    L4,
    Dyadic,
    Interpolation,
    Green,
    Duality,
    Embeddings,
    LinearEstimates,
}

impl VerifyKind {
    fn sweep(&self) -> Option<SweepKind> {
        match self {
            VerifyKind::Bilinear => Some(SweepKind::Bilinear),
            VerifyKind::GradientBilinear => Some(SweepKind::GradientBilinear),
            VerifyKind::XsbBilinear => Some(SweepKind::XsbBilinear),
            VerifyKind::XsbGradient => Some(SweepKind::XsbGradient),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub kind: VerifyKind,
    /// Spatial exponent of ratios, norms and probes.
    pub s: f64,
    /// Time exponent of `X^{s,b}` norms.
    pub b: f64,
    /// Dyadic levels of sweeps, `l4` and `green`.
    pub bands: Vec<u32>,
    pub trials: usize,
    /// Time samples; the default depends on the kind.
    pub n_t: Option<usize>,
    pub law: CoefficientLaw,
    /// Regularities tested by `interpolation`.
    pub s_prime: Vec<f64>,
    /// Decay exponent and offset ratio of `dyadic`.
    pub theta: f64,
    pub gamma_ratio: f64,
    /// Number of dyadic levels of `dyadic` sequences.
    pub levels: usize,
    /// `green` integrates over `[0, t_end]` when positive.
    pub t_end: f64,
    /// Horizons of `linear-estimates`.
    pub horizons: Vec<f64>,
    /// Time window of the lattice kinds.
    pub window: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let third = (2.0 - 2.0 / 3.0) / 20.0;
        VerifyConfig {
            kind: VerifyKind::Bilinear,
            s: 0.75,
            b: 0.55,
            bands: vec![4, 8, 16, 32, 64],
            trials: 8,
            n_t: None,
            law: CoefficientLaw::Gaussian,
            s_prime: (0..20).map(|i| 2.0 / 3.0 + (i as f64 + 0.5) * third).collect(),
            theta: 0.5,
            gamma_ratio: 1.0,
            levels: 12,
            t_end: 0.0,
            horizons: vec![1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0],
            window: 4.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub manifold: ManifoldConfig,
    pub run: RunSection,
    pub evolve: EvolveConfig,
    pub picard: PicardConfig,
    pub verify: VerifyConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Fills experiment-dependent defaults and checks ranges.
    pub fn resolve(&mut self, command: Command) -> Result<()> {
        let v = &mut self.verify;
        let max_band = v.bands.iter().copied().max().unwrap_or(1) as f64;
        let default_mu = match (command, v.kind) {
            (Command::Verify, VerifyKind::Green) => 2.0 * max_band,
            (Command::Verify, k) if k.sweep().is_some() || k == VerifyKind::L4 => 2.0 * max_band,
            _ => 8.0,
        };
        let mu_max = *self.manifold.mu_max.get_or_insert(default_mu);
        if !(mu_max.is_finite() && mu_max > 0.0) {
            return Err(Error::Config(format!("mu_max must be positive, got {mu_max}")));
        }
        if !(self.manifold.exactness_factor >= 2.0) {
            return Err(Error::Config(format!("exactness_factor must be at least 2, got {}", self.manifold.exactness_factor)));
        }
        self.manifold.spec().validate()?;
        self.evolve.initial.resolve(mu_max);
        self.picard.initial.resolve(mu_max);
        self.picard.dt.get_or_insert(self.picard.t_end / 64.0);
        let default_nt = match v.kind {
            VerifyKind::LinearEstimates => 1024,
            _ => 64,
        };
        v.n_t.get_or_insert(default_nt);
        match command {
            Command::Evolve => {
                let e = &self.evolve;
                if !(e.t_end > 0.0 && e.dt > 0.0 && e.record_every > 0) {
                    return Err(Error::Config("evolve needs positive t_end, dt and record_every".into()));
                }
            }
            Command::Picard => {
                let p = &self.picard;
                if !(p.t_end > 0.0 && p.dt.unwrap_or(0.0) > 0.0) {
                    return Err(Error::Config("picard needs positive t_end and dt".into()));
                }
            }
            Command::Verify => {
                if v.trials == 0 {
                    return Err(Error::Config("trials must be positive".into()));
                }
                if v.bands.iter().any(|&l| l == 0 || !l.is_power_of_two()) {
                    return Err(Error::Config(format!("bands must be powers of two, got {:?}", v.bands)));
                }
            }
            Command::Spectrum => {}
        }
        Ok(())
    }

    /// Resolved sections relevant to `command`.
    fn echo(&self, command: Command) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("manifold".into(), json!(self.manifold));
        m.insert("run".into(), json!(self.run));
        match command {
            Command::Spectrum => {}
            Command::Evolve => {
                m.insert("evolve".into(), json!(self.evolve));
            }
            Command::Picard => {
                m.insert("picard".into(), json!(self.picard));
            }
            Command::Verify => {
                m.insert("verify".into(), json!(self.verify));
            }
        }
        Value::Object(m)
    }
}

/// One invocation of the runner.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    AssertionFailed,
    BlowUp,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Ok => EXIT_OK,
            Status::AssertionFailed => EXIT_ASSERTION,
            Status::BlowUp => EXIT_BLOW_UP,
        }
    }
}

/// Result of a completed run.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub out_dir: PathBuf,
    pub outputs: Vec<String>,
    pub summary: Value,
}

/// Exit code for errors raised before or during a run.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::Verification(_) | Error::NotConverged(_) => EXIT_ASSERTION,
        Error::BlowUp { .. } => EXIT_BLOW_UP,
        _ => EXIT_VALIDATION,
    }
}

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
}

impl Writer {
    fn put(&mut self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

struct Report {
    status: Status,
    summary: Value,
    fingerprint: Option<String>,
}

/// Loads, resolves and runs the configuration, writing all outputs.
pub fn execute(inv: &Invocation) -> Result<Outcome> {
    let mut cfg = RunConfig::load(&inv.config)?;
    if let Some(seed) = inv.seed {
        cfg.run.seed = seed;
    }
    let out_dir = match (&inv.out, std::env::var_os(OUT_ENV)) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => PathBuf::from(&cfg.run.out_dir),
    };
    cfg.run.out_dir = out_dir.display().to_string();
    cfg.resolve(inv.command)?;
    if inv.threads == Some(0) {
        return Err(Error::Config("threads must be positive".into()));
    }
    std::fs::create_dir_all(&out_dir)?;
    let mut writer = Writer { dir: out_dir.clone(), files: Vec::new() };
    let started = Instant::now();
    let report = match inv.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| dispatch(inv.command, &cfg, &mut writer))?,
        None => dispatch(inv.command, &cfg, &mut writer)?,
    };
    let manifest = json!({
        "tool": "xsblab",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": inv.command.name(),
        "status": report.status,
        "config": cfg.echo(inv.command),
        "basis_fingerprint": report.fingerprint,
        "summary": report.summary,
        "outputs": writer.files,
        "wall_time_seconds": started.elapsed().as_secs_f64(),
    });
    let tmp = out_dir.join(format!(".{MANIFEST}.tmp"));
    std::fs::write(&tmp, serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n")?;
    std::fs::rename(&tmp, out_dir.join(MANIFEST))?;
    Ok(Outcome { status: report.status, out_dir, outputs: writer.files, summary: report.summary })
}

fn dispatch(command: Command, cfg: &RunConfig, w: &mut Writer) -> Result<Report> {
    let basis = cfg.manifold.build()?;
    let fingerprint = Some(basis.fingerprint().to_string());
    let (status, summary) = match command {
        Command::Spectrum => spectrum(&basis, w)?,
        Command::Evolve => evolve(&basis, cfg, w)?,
        Command::Picard => picard(&basis, cfg, w)?,
        Command::Verify => verify(&basis, cfg, w)?,
    };
    Ok(Report { status, summary, fingerprint })
}

fn label_columns(label: &crate::manifold::ModeLabel) -> String {
    use crate::manifold::{ModeLabel, Parity};
    match *label {
        ModeLabel::Rect { m, n } => format!("rect,{m},{n},"),
        ModeLabel::Disk { m, q, parity } => {
            format!("disk,{m},{q},{}", if parity == Parity::Cos { "cos" } else { "sin" })
        }
    }
}

fn spectrum(basis: &Arc<SpectralBasis>, w: &mut Writer) -> Result<(Status, Value)> {
    let mut csv = String::from("index,family,m,n_or_q,parity,lambda,mu\n");
    for (k, m) in basis.modes().iter().enumerate() {
        let _ = writeln!(csv, "{k},{},{},{}", label_columns(&m.label), fmt17(m.lambda), fmt17(m.mu));
    }
    w.put("eigenvalues.csv", &csv)?;
    w.put("basis.json", &(serde_json::to_string_pretty(&basis.export_record()).expect("record serializes") + "\n"))?;
    let residual = basis.orthonormality_residual();
    let summary = json!({
        "modes": basis.len(),
        "lowest_eigenvalue": basis.modes().first().map(|m| m.lambda),
        "orthonormality_residual": residual,
        "grid_nodes": basis.grid().n_nodes(),
        "grid_exactness": basis.grid().exactness(),
    });
    Ok((Status::Ok, summary))
}

fn quadratic(alpha: Coefficient, beta: Coefficient, gamma: Coefficient) -> QuadraticNonlinearity {
    QuadraticNonlinearity { alpha: alpha.value(), beta: beta.value(), gamma: gamma.value() }
}

fn diagnostics_csv(traj: &Trajectory, every: usize) -> String {
    let m0 = crate::evolution::mass(&traj.state(0));
    let mut csv = String::from("t,mass,relative_mass_drift,energy\n");
    for i in (0..traj.len()).step_by(every).chain(std::iter::once(traj.len() - 1)).collect::<std::collections::BTreeSet<_>>() {
        let u = traj.state(i);
        let m = crate::evolution::mass(&u);
        let drift = if m0 > 0.0 { (m - m0).abs() / m0 } else { 0.0 };
        let _ = writeln!(csv, "{},{},{},{}", fmt17(traj.times()[i]), fmt17(m), fmt17(drift), fmt17(energy_gradient(&u)));
    }
    csv
}

fn thinned_csv(traj: &Trajectory, every: usize) -> String {
    let keep: std::collections::BTreeSet<usize> = (0..traj.len()).step_by(every).chain(std::iter::once(traj.len() - 1)).collect();
    let mut csv = String::from("t,mode,re,im\n");
    for i in keep {
        for (k, z) in traj.coeffs(i).iter().enumerate() {
            let _ = writeln!(csv, "{},{},{},{}", fmt17(traj.times()[i]), k, fmt17(z.re), fmt17(z.im));
        }
    }
    csv
}

fn evolve(basis: &Arc<SpectralBasis>, cfg: &RunConfig, w: &mut Writer) -> Result<(Status, Value)> {
    let e = &cfg.evolve;
    let u0 = e.initial.build(basis, derive_seed(cfg.run.seed, &[0]))?;
    let mut params = EvolutionParams::new(quadratic(e.alpha, e.beta, e.gamma), e.dt);
    params.substeps = e.substeps;
    params.dealias = e.dealias;
    let n_steps = (e.t_end / e.dt).round() as usize;
    if n_steps == 0 || ((n_steps as f64) * e.dt - e.t_end).abs() > 1e-9 * e.t_end {
        return Err(Error::Config(format!("t_end {} is not a positive multiple of dt {}", e.t_end, e.dt)));
    }
    match split_step_evolve(&u0, &params, n_steps) {
        Ok(traj) => {
            w.put("trajectory.csv", &thinned_csv(&traj, e.record_every))?;
            let diag = diagnostics_csv(&traj, 1);
            w.put("diagnostics.csv", &diag)?;
            let last = traj.last();
            let summary = json!({
                "steps": n_steps,
                "initial_mass": crate::evolution::mass(&u0),
                "final_mass": crate::evolution::mass(&last),
                "max_relative_mass_drift": traj.mass_drift(),
                "initial_energy": energy_gradient(&u0),
                "final_energy": energy_gradient(&last),
            });
            Ok((Status::Ok, summary))
        }
        Err(Error::BlowUp { t, norm }) => Ok((Status::BlowUp, json!({ "blow_up_time": t, "blow_up_norm": norm }))),
        Err(e) => Err(e),
    }
}

fn picard(basis: &Arc<SpectralBasis>, cfg: &RunConfig, w: &mut Writer) -> Result<(Status, Value)> {
    let p = &cfg.picard;
    let u0 = p.initial.build(basis, derive_seed(cfg.run.seed, &[0]))?;
    let opts = PicardOptions { s: p.s, max_iter: p.max_iter, tol: p.tol, b: p.b, b_prime: p.b_prime, c0: p.c0, dealias: p.dealias };
    let dt = p.dt.expect("resolved before use");
    let (traj, report) = picard_solve(&u0, &quadratic(p.alpha, p.beta, p.gamma), p.t_end, dt, &opts)?;
    w.put("trajectory.csv", &traj.to_csv())?;
    let mut csv = String::from("iteration,increment_l2,increment_hs\n");
    for (j, (a, b)) in report.increments_l2.iter().zip(&report.increments_hs).enumerate() {
        let _ = writeln!(csv, "{},{},{}", j + 1, fmt17(*a), fmt17(*b));
    }
    w.put("contraction.csv", &csv)?;
    let summary = json!({
        "initial_hs_norm": sobolev_norm(&u0, p.s),
        "kappa": report.kappa,
        "ratios": report.ratios,
        "non_contraction": report.non_contraction,
        "converged": report.converged,
        "iterations": report.iterations,
        "radius": report.radius,
        "theta1": report.theta1,
        "final_mass": crate::evolution::mass(&traj.last()),
    });
    Ok((Status::Ok, summary))
}

fn status_of(ok: bool) -> Status {
    if ok { Status::Ok } else { Status::AssertionFailed }
}

fn random_spacetime(basis: &Arc<SpectralBasis>, seed: u64, window: f64, n_t: usize) -> Result<SpaceTimeField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vec<Complex64>> = (0..n_t)
        .map(|_| {
            (0..basis.len())
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect();
    SpaceTimeField::new(basis.clone(), -0.5 * window, window, samples)
}

fn full_random_field(basis: &Arc<SpectralBasis>, seed: u64) -> Result<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<Complex64> = (0..basis.len())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let u = SpectralField::new(basis.clone(), c)?;
    let n = u.l2_norm();
    Ok(u.scaled(Complex64::new(1.0 / n, 0.0)))
}

/// Schur-test bound for the dyadic summation kernel.
pub fn dyadic_schur_bound(theta: f64, gamma: f64) -> f64 {
    let top = gamma.log2().floor();
    2f64.powf(top * theta) / (1.0 - 2f64.powf(-theta))
}

fn verify(basis: &Arc<SpectralBasis>, cfg: &RunConfig, w: &mut Writer) -> Result<(Status, Value)> {
    let v = &cfg.verify;
    let seed = cfg.run.seed;
    let n_t = v.n_t.expect("resolved before use");
    if let Some(kind) = v.kind.sweep() {
        let sc = SweepConfig { kind, s: v.s, bands: v.bands.clone(), trials: v.trials, seed, n_t, b: v.b, law: v.law };
        let res = run_sweep(basis, &sc)?;
        w.put("samples.csv", &res.to_csv())?;
        let summary = json!({
            "fit": res.fit,
            "max_ratio": res.max_ratio,
            "exponent_bound": EXPONENT_BOUND,
            "exponent_within_bound": res.fit.s_hat <= EXPONENT_BOUND,
        });
        return Ok((Status::Ok, summary));
    }
    match v.kind {
        VerifyKind::L4 => {
            let mut csv = String::from("level,trial,ratio\n");
            let mut worst: f64 = 0.0;
            let mut per_level = Vec::new();
            for &level in &v.bands {
                let r = l4_check(basis, level, v.trials, derive_seed(seed, &[level as u64]), v.s)?;
                for (t, x) in r.ratios.iter().enumerate() {
                    let _ = writeln!(csv, "{level},{t},{}", fmt17(*x));
                }
                worst = worst.max(r.consistency);
                per_level.push(json!({ "level": level, "max_ratio": r.max_ratio }));
            }
            w.put("l4.csv", &csv)?;
            Ok((status_of(worst <= 1e-8), json!({ "levels": per_level, "max_consistency_gap": worst })))
        }
        VerifyKind::Dyadic => {
            let bound = dyadic_schur_bound(v.theta, v.gamma_ratio);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut csv = String::from("trial,lhs,rhs,ratio\n");
            let mut max_ratio: f64 = 0.0;
            for t in 0..v.trials {
                let mut draw = || -> Vec<f64> {
                    (0..v.levels)
                        .map(|_| {
                            let x: f64 = StandardNormal.sample(&mut rng);
                            x.abs()
                        })
                        .collect()
                };
                let c = draw();
                let d = draw();
                let r = dyadic_summation_check(v.theta, v.gamma_ratio, &c, &d)?;
                max_ratio = max_ratio.max(r.ratio);
                let _ = writeln!(csv, "{t},{},{},{}", fmt17(r.lhs), fmt17(r.rhs), fmt17(r.ratio));
            }
            w.put("dyadic.csv", &csv)?;
            Ok((status_of(max_ratio <= bound * (1.0 + 1e-12)), json!({ "max_ratio": max_ratio, "schur_bound": bound })))
        }
        VerifyKind::Interpolation => {
            let mut csv = String::from("s_prime,delta,theta,epsilon,b,b_prime\n");
            let mut failures = Vec::new();
            for &sp in &v.s_prime {
                if !(sp > 2.0 / 3.0 && sp < 2.0) {
                    return Err(Error::Config(format!("s_prime {sp} outside (2/3, 2)")));
                }
                match interpolation_params(sp) {
                    Ok(p) => {
                        let _ = writeln!(
                            csv,
                            "{},{},{},{},{},{}",
                            fmt17(p.s_prime),
                            fmt17(p.delta),
                            fmt17(p.theta),
                            fmt17(p.epsilon),
                            fmt17(p.b),
                            fmt17(p.b_prime)
                        );
                    }
                    Err(Error::Verification(msg)) => failures.push(json!({ "s_prime": sp, "reason": msg })),
                    Err(e) => return Err(e),
                }
            }
            w.put("interpolation.csv", &csv)?;
            Ok((status_of(failures.is_empty()), json!({ "checked": v.s_prime.len(), "failures": failures })))
        }
        VerifyKind::Green => {
            let time = (v.t_end > 0.0).then_some((TimeRule::GaussLegendre { nodes: 16 }, v.t_end));
            let mut csv = String::from("n0,n1,n2,direct_re,direct_im,residual\n");
            let mut worst: f64 = 0.0;
            for &a in &v.bands {
                for &b in &v.bands {
                    for &c in &v.bands {
                        let r = green_identity_check(basis, [a, b, c], derive_seed(seed, &[a as u64, b as u64, c as u64]), time)?;
                        worst = worst.max(r.residual);
                        let _ = writeln!(csv, "{a},{b},{c},{},{},{}", fmt17(r.direct.re), fmt17(r.direct.im), fmt17(r.residual));
                    }
                }
            }
            w.put("green.csv", &csv)?;
            Ok((status_of(worst <= 1e-8), json!({ "max_residual": worst, "tolerance": 1e-8 })))
        }
        VerifyKind::Duality => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s_dist = Uniform::new(-2.0, 2.0).expect("valid range");
            let b_dist = Uniform::new(-1.0, 1.0).expect("valid range");
            let mut csv = String::from("trial,s,b,residual\n");
            let mut worst: f64 = 0.0;
            for t in 0..v.trials {
                let s = s_dist.sample(&mut rng);
                let b = b_dist.sample(&mut rng);
                let u = random_spacetime(basis, derive_seed(seed, &[t as u64, 0]), v.window, n_t)?;
                let x = random_spacetime(basis, derive_seed(seed, &[t as u64, 1]), v.window, n_t)?;
                let r = duality_pairing_check(&u, &x, s, b)?;
                worst = worst.max(r);
                let _ = writeln!(csv, "{t},{},{},{}", fmt17(s), fmt17(b), fmt17(r));
            }
            w.put("duality.csv", &csv)?;
            Ok((status_of(worst <= 1e-10), json!({ "max_residual": worst, "tolerance": 1e-10 })))
        }
        VerifyKind::Embeddings => {
            let mut csv = String::from("trial,l3_l2,x0_sixth,l3_ratio,sup_hs,xsb_high,sup_ratio\n");
            let cutoff = Cutoff::for_interval(1.0);
            let t0 = -0.5 * (v.window - 1.0);
            let mut worst = (0.0f64, 0.0f64);
            for t in 0..v.trials {
                let f = full_random_field(basis, derive_seed(seed, &[t as u64]))?;
                let u = SpaceTimeField::windowed_free(&f, |x| cutoff.eval(x), t0, v.window, n_t)?;
                if t == 0 {
                    w.put("spectrum.csv", &time_fourier(&u).to_csv())?;
                }
                let r = embedding_checks(&u, v.s, v.b)?;
                worst = (worst.0.max(r.l3_ratio), worst.1.max(r.sup_ratio));
                let _ = writeln!(
                    csv,
                    "{t},{},{},{},{},{},{}",
                    fmt17(r.l3_l2),
                    fmt17(r.x0_sixth),
                    fmt17(r.l3_ratio),
                    fmt17(r.sup_hs),
                    fmt17(r.xsb_high),
                    fmt17(r.sup_ratio)
                );
            }
            w.put("embeddings.csv", &csv)?;
            Ok((Status::Ok, json!({ "max_l3_ratio": worst.0, "max_sup_ratio": worst.1 })))
        }
        VerifyKind::LinearEstimates => {
            let mut csv = String::from("trial,horizon,ratio,scaled\n");
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for t in 0..v.trials {
                let f = full_random_field(basis, derive_seed(seed, &[t as u64]))?;
                let rows = linear_estimate_probe(&f, v.s, v.b, &v.horizons, WindowSpec { window: v.window, n_t })?;
                for r in rows {
                    lo = lo.min(r.scaled);
                    hi = hi.max(r.scaled);
                    let _ = writeln!(csv, "{t},{},{},{}", fmt17(r.horizon), fmt17(r.ratio), fmt17(r.scaled));
                }
            }
            w.put("linear_estimates.csv", &csv)?;
            Ok((Status::Ok, json!({ "constant": hi, "spread": hi / lo })))
        }
        _ => unreachable!("sweep kinds handled above"),
    }
}
