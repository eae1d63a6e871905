//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;
use xsblab::estimates::{
    bilinear_lhs, derive_seed, fit_exponent, green_identity_check, interpolation_params, run_sweep, SweepConfig, SweepKind, S0,
};
use xsblab::evolution::{linear_flow, mass, split_step_evolve, EvolutionParams, QuadraticNonlinearity};
use xsblab::field::{japanese, sobolev_norm, SpectralField};
use xsblab::manifold::{build_basis, Boundary, ManifoldSpec, ModeLabel, SpectralBasis};
use xsblab::picard::{picard_solve, PicardOptions};
use xsblab::spacetime::{apply_lambda_b, duality_pairing_check, modulation_levels, modulation_project, xsb_norm, SpaceTimeField};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok { Ok(detail) } else { Err(detail) }
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

fn random_field(basis: &Arc<SpectralBasis>, top: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = basis.modes().iter().map(|m| if m.mu <= top { gaussian(&mut rng) } else { gaussian(&mut rng) * 0.0 }).collect();
    SpectralField::new(basis.clone(), c).unwrap()
}

fn all_domains() -> Vec<ManifoldSpec> {
    vec![
        ManifoldSpec::square(Boundary::Dirichlet),
        ManifoldSpec::square(Boundary::Neumann),
        ManifoldSpec::unit_disk(Boundary::Dirichlet),
        ManifoldSpec::unit_disk(Boundary::Neumann),
    ]
}

/// `J_0` from its integral representation, then bisection on `[2, 3]`.
fn first_zero_of_j0() -> f64 {
    let j0 = |x: f64| {
        let n = 400;
        (0..n).map(|i| (x * (PI * (i as f64 + 0.5) / n as f64).sin()).cos()).sum::<f64>() / n as f64
    };
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if j0(lo) * j0(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn eigenbasis_exactness() -> Outcome {
    for bc in [Boundary::Dirichlet, Boundary::Neumann] {
        let b = build_basis(&ManifoldSpec::square(bc), 64.0).map_err(|e| e.to_string())?;
        for m in b.modes() {
            let ModeLabel::Rect { m: i, n: j } = m.label else { return Err("rectangle label expected".into()) };
            if m.lambda != (i * i + j * j) as f64 {
                return Err(format!("{:?} has lambda {}", m.label, m.lambda));
            }
        }
    }
    let disk = build_basis(&ManifoldSpec::unit_disk(Boundary::Dirichlet), 8.0).map_err(|e| e.to_string())?;
    let want = first_zero_of_j0().powi(2);
    let lowest = disk.modes()[0].lambda;
    if (lowest - want).abs() > 1e-9 {
        return Err(format!("disk lowest {lowest} vs oracle {want}"));
    }
    let mut worst: f64 = 0.0;
    for spec in all_domains() {
        worst = worst.max(build_basis(&spec, 64.0).map_err(|e| e.to_string())?.orthonormality_residual());
    }
    ensure(worst <= 1e-10, format!("disk lambda_1 = {lowest:.12}, orthonormality residual {worst:.2e}"))
}

fn unitarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let bases: Vec<_> = all_domains().iter().map(|s| build_basis(s, 12.0).unwrap()).collect();
    let times = Uniform::new(-50.0, 50.0).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let b = &bases[i % bases.len()];
        let u = random_field(b, 12.0, derive_seed(2, &[i as u64]));
        let t = times.sample(&mut rng);
        let before = u.l2_norm().powi(2);
        worst = worst.max((linear_flow(&u, t).l2_norm().powi(2) - before).abs() / before.max(1.0));
    }
    ensure(worst <= 1e-12, format!("max |Δ mass| {worst:.2e}"))
}

fn closed_form_bilinear() -> Outcome {
    let b = build_basis(&ManifoldSpec::square(Boundary::Dirichlet), 4.0).unwrap();
    let e = SpectralField::from_label(b, ModeLabel::Rect { m: 1, n: 1 }).unwrap();
    let v = bilinear_lhs(&e, &e).map_err(|e| e.to_string())?;
    // |e_11|^4 = (2/pi)^4 sin^4 x sin^4 y and sin^4 integrates to 3 pi / 8 on [0, pi]
    let sin4 = 3.0 * PI / 8.0;
    let want = ((2.0 / PI).powi(4) * sin4 * sin4).sqrt();
    ensure((v - want).abs() <= 1e-8, format!("{v:.15} vs {want:.15}"))
}

const SWEEP_BANDS: [u32; 5] = [4, 8, 16, 32, 64];
const SWEEP_SEED: u64 = 20240611;

fn sweep_domains() -> Vec<(&'static str, ManifoldSpec)> {
    vec![("rectangle", ManifoldSpec::square(Boundary::Dirichlet)), ("disk", ManifoldSpec::unit_disk(Boundary::Dirichlet))]
}

struct LemmaA {
    s_hat: Vec<f64>,
}

fn lemma_a_scaling(record: &mut Option<LemmaA>) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut s_hats = Vec::new();
    for (name, spec) in sweep_domains() {
        let b = build_basis(&spec, 128.0).unwrap();
        let mut cfg = SweepConfig::new(SweepKind::Bilinear, SWEEP_BANDS.to_vec(), 16, SWEEP_SEED);
        let sixteen = run_sweep(&b, &cfg).map_err(|e| e.to_string())?;
        let eight: Vec<_> = sixteen.samples.iter().copied().filter(|p| p.trial < 8).collect();
        let fit = fit_exponent(&eight, cfg.s, false).map_err(|e| e.to_string())?;
        let max = |v: &[xsblab::estimates::EstimateSample]| v.iter().map(|p| p.ratio).fold(0.0, f64::max);
        let m8 = max(&eight);
        let m16 = sixteen.max_ratio;
        cfg.trials = 8;
        cfg.n_t = 128;
        let m128 = run_sweep(&b, &cfg).map_err(|e| e.to_string())?.max_ratio;
        let stable = (m16 / m8 - 1.0).abs() <= 0.2 && (m128 / m8 - 1.0).abs() <= 0.2;
        ok &= fit.s_hat <= 2.0 / 3.0 + 0.1 && stable && m8.is_finite();
        s_hats.push(fit.s_hat);
        lines.push(format!("{name}: s_hat {:.3}, max ratio {m8:.4} / 16 trials {m16:.4} / 2 n_t {m128:.4}", fit.s_hat));
    }
    *record = Some(LemmaA { s_hat: s_hats });
    ensure(ok, lines.join("; "))
}

fn lemma_c_scaling(record: &Option<LemmaA>) -> Outcome {
    let Some(a) = record else { return Err("criterion 4 produced no fits".into()) };
    let mut lines = Vec::new();
    let mut ok = true;
    for ((name, spec), s_bil) in sweep_domains().into_iter().zip(&a.s_hat) {
        let b = build_basis(&spec, 128.0).unwrap();
        let cfg = SweepConfig::new(SweepKind::GradientBilinear, SWEEP_BANDS.to_vec(), 8, SWEEP_SEED);
        let res = run_sweep(&b, &cfg).map_err(|e| e.to_string())?;
        ok &= (res.fit.s_hat - s_bil).abs() <= 0.15;
        lines.push(format!("{name}: gradient s_hat {:.3} vs {:.3}", res.fit.s_hat, s_bil));
    }
    ensure(ok, lines.join("; "))
}

fn green_identity() -> Outcome {
    let levels = [2u32, 4, 8];
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for spec in all_domains() {
        let b = build_basis(&spec, 16.0).unwrap();
        for &a in &levels {
            for &c in &levels {
                for &d in &levels {
                    let r = green_identity_check(&b, [a, c, d], derive_seed(6, &[a as u64, c as u64, d as u64]), None)
                        .map_err(|e| e.to_string())?;
                    worst = worst.max(r.residual);
                    count += 1;
                }
            }
        }
    }
    ensure(worst <= 1e-8, format!("{count} triples, max residual {worst:.2e}"))
}

fn random_spacetime(b: &Arc<SpectralBasis>, rng: &mut ChaCha8Rng) -> SpaceTimeField {
    SpaceTimeField::from_fn(b.clone(), -2.0, 4.0, 64, |_| (0..b.len()).map(|_| gaussian(rng)).collect()).unwrap()
}

fn duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let b = build_basis(&ManifoldSpec::unit_disk(Boundary::Neumann), 8.0).unwrap();
    let s_dist = Uniform::new(-2.0, 2.0).unwrap();
    let b_dist = Uniform::new(-1.0, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let u = random_spacetime(&b, &mut rng);
        let v = random_spacetime(&b, &mut rng);
        let (s, bb) = (s_dist.sample(&mut rng), b_dist.sample(&mut rng));
        worst = worst.max(duality_pairing_check(&u, &v, s, bb).map_err(|e| e.to_string())?);
    }
    ensure(worst <= 1e-10, format!("max residual {worst:.2e}"))
}

fn interpolation_constructor() -> Outcome {
    let mut worst_margin = f64::INFINITY;
    for i in 0..20 {
        let sp = S0 + (2.0 - S0) * (i as f64 + 0.5) / 20.0;
        let p = interpolation_params(sp).map_err(|e| e.to_string())?;
        let first = sp - (1.5 * p.theta + (S0 + p.delta) * (1.0 - p.theta));
        let second = p.b_prime - (p.theta / 6.0 + (0.5 + p.epsilon) * (1.0 - p.theta));
        let third = 1.0 - (p.b + p.b_prime);
        let admissible = p.b_prime > 0.0 && p.b_prime < 0.5 && p.b > 0.5 && p.epsilon < p.theta / (9.0 - 3.0 * p.theta);
        if !(first > 0.0 && second > 0.0 && third > 0.0 && admissible) {
            return Err(format!("s' = {sp}: margins {first:e}, {second:e}, {third:e}"));
        }
        worst_margin = worst_margin.min(first.min(second).min(third));
    }
    Ok(format!("20 values, smallest margin {worst_margin:.3e}"))
}

fn picard_contraction() -> Outcome {
    let b = build_basis(&ManifoldSpec::square(Boundary::Dirichlet), 4.0).unwrap();
    let u = random_field(&b, 4.0, 9);
    let u0 = u.scaled(Complex64::new(0.1 / sobolev_norm(&u, 1.0), 0.0));
    let q = QuadraticNonlinearity::real(1.0, 0.0, 1.0);
    let opts = PicardOptions::default();
    let mut kappas = Vec::new();
    let mut gap = 0.0;
    for t_end in [0.025, 0.05, 0.1] {
        let dt = t_end / 64.0;
        let (traj, rep) = picard_solve(&u0, &q, t_end, dt, &opts).map_err(|e| e.to_string())?;
        if t_end == 0.05 {
            let split = split_step_evolve(&u0, &EvolutionParams::new(q, dt), 64).map_err(|e| e.to_string())?;
            gap = traj.last().sub(&split.last()).unwrap().l2_norm();
        }
        kappas.push(rep.kappa);
    }
    let increasing = kappas.windows(2).all(|w| w[0] < w[1]);
    ensure(
        kappas[1] < 0.5 && gap <= 1e-6 && increasing,
        format!("kappa(T) = {:.3e}, {:.3e}, {:.3e}; terminal gap {gap:.2e}", kappas[0], kappas[1], kappas[2]),
    )
}

fn mass_conservation() -> Outcome {
    let b = build_basis(&ManifoldSpec::square(Boundary::Dirichlet), 8.0).unwrap();
    let u0 = SpectralField::mode(b.clone(), 0).unwrap().add_scaled(&SpectralField::mode(b, 1).unwrap(), Complex64::new(1.0, 0.0)).unwrap();
    let drift = |beta: f64| -> Result<f64, String> {
        let p = EvolutionParams::new(QuadraticNonlinearity::real(1.0, beta, 1.0), 1e-3);
        let traj = split_step_evolve(&u0, &p, 500).map_err(|e| e.to_string())?;
        let m0 = mass(&u0);
        Ok((0..traj.len()).map(|i| (mass(&traj.state(i)) - m0).abs() / m0).fold(0.0, f64::max))
    };
    let kept = drift(0.0)?;
    let broken = drift(0.3)?;
    ensure(kept <= 1e-7 && broken > 1e-4, format!("drift {kept:.2e} with beta = 0, {broken:.2e} with beta = 0.3"))
}

fn splitting_order() -> Outcome {
    let b = build_basis(&ManifoldSpec::unit_disk(Boundary::Dirichlet), 8.0).unwrap();
    let u = random_field(&b, 4.0, 11);
    let u0 = u.scaled(Complex64::new(0.5 / u.l2_norm(), 0.0));
    let q = QuadraticNonlinearity { alpha: Complex64::new(1.0, 0.3), beta: Complex64::new(0.5, 0.0), gamma: Complex64::new(-0.7, 0.2) };
    let t_end = 0.2;
    let run = |steps: usize| split_step_evolve(&u0, &EvolutionParams::new(q, t_end / steps as f64), steps).map(|t| t.last());
    let reference = run(80).map_err(|e| e.to_string())?;
    let e1 = run(10).map_err(|e| e.to_string())?.sub(&reference).unwrap().l2_norm();
    let e2 = run(20).map_err(|e| e.to_string())?.sub(&reference).unwrap().l2_norm();
    let order = (e1 / e2).log2();
    ensure((order - 2.0).abs() <= 0.2, format!("errors {e1:.3e}, {e2:.3e}; order {order:.3}"))
}

/// `||S(-t) u||_{H^b H^s}` by an explicit DFT of the interaction-picture samples.
fn xsb_by_definition(u: &SpaceTimeField, s: f64, b: f64) -> f64 {
    let nt = u.n_t();
    let dt = u.dt();
    let times = u.times();
    let mut total = 0.0;
    for (k, m) in u.basis().modes().iter().enumerate() {
        let pulled: Vec<Complex64> =
            times.iter().zip(u.samples()).map(|(t, c)| c[k] * Complex64::from_polar(1.0, m.lambda * t)).collect();
        for n in 0..nt {
            let signed = if n < nt / 2 { n as f64 } else { n as f64 - nt as f64 };
            let sigma = 2.0 * PI * signed / u.window();
            let hat: Complex64 = pulled.iter().zip(&times).map(|(z, t)| z * Complex64::from_polar(dt, -sigma * t)).sum();
            total += japanese(m.mu).powf(2.0 * s) * japanese(sigma).powf(2.0 * b) * hat.norm_sqr() / u.window();
        }
    }
    total.sqrt()
}

fn xsb_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let b = build_basis(&ManifoldSpec::square(Boundary::Neumann), 6.0).unwrap();
    let u = random_spacetime(&b, &mut rng);
    let mut two_way: f64 = 0.0;
    for (s, bb) in [(0.0, 0.0), (1.0, 0.55), (-0.5, 0.3), (2.0, -0.45)] {
        let direct = xsb_norm(&u, s, bb);
        let oracle = xsb_by_definition(&u, s, bb);
        two_way = two_way.max((direct - oracle).abs() / oracle);
    }
    let total = u.l2_norm().powi(2);
    let parts: f64 = modulation_levels(&u).iter().map(|&l| modulation_project(&u, l).unwrap().l2_norm().powi(2)).sum();
    let partition = (parts - total).abs() / total;
    let back = apply_lambda_b(&apply_lambda_b(&u, 0.55), -0.55);
    let inverse = u
        .samples()
        .iter()
        .zip(back.samples())
        .flat_map(|(a, c)| a.iter().zip(c).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max);
    ensure(
        two_way <= 1e-10 && partition <= 1e-10 && inverse <= 1e-12,
        format!("two-way {two_way:.2e}, partition {partition:.2e}, inverse {inverse:.2e}"),
    )
}

fn main() {
    let mut lemma_a = None;
    let mut failures = 0;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let out = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(d) => println!("PASS {n:>2} {name}: {d} ({secs:.1}s)"),
            Err(d) => {
                failures += 1;
                println!("FAIL {n:>2} {name}: {d} ({secs:.1}s)");
            }
        }
    };
    report(1, "eigenbasis exactness", &mut eigenbasis_exactness);
    report(2, "linear flow unitarity", &mut unitarity);
    report(3, "closed-form bilinear value", &mut closed_form_bilinear);
    report(4, "bilinear scaling", &mut || lemma_a_scaling(&mut lemma_a));
    report(5, "gradient bilinear scaling", &mut || lemma_c_scaling(&lemma_a));
    report(6, "green identity", &mut green_identity);
    report(7, "duality identity", &mut duality);
    report(8, "interpolation constructor", &mut interpolation_constructor);
    report(9, "picard contraction", &mut picard_contraction);
    report(10, "mass conservation", &mut mass_conservation);
    report(11, "splitting convergence", &mut splitting_order);
    report(12, "space-time norm consistency", &mut xsb_consistency);
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all 12 criteria passed");
}
