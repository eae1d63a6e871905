//! Picard iteration of the Duhamel map for small data: contraction factor as
//! a function of the time horizon, and agreement with the split-step solver.

use num_complex::Complex64;
use xsblab::evolution::{split_step_evolve, EvolutionParams, QuadraticNonlinearity};
use xsblab::field::{sobolev_norm, SpectralField};
use xsblab::manifold::{build_basis, Boundary, ManifoldSpec};
use xsblab::picard::{lipschitz_probe, picard_solve, PicardOptions};

fn main() -> xsblab::Result<()> {
    let basis = build_basis(&ManifoldSpec::square(Boundary::Dirichlet), 4.0)?;
    let raw = SpectralField::new(basis.clone(), (0..basis.len()).map(|k| Complex64::new(1.0, 0.5 * k as f64)).collect())?;
    let u0 = raw.scaled(Complex64::new(0.1 / sobolev_norm(&raw, 1.0), 0.0));
    let q = QuadraticNonlinearity::real(1.0, 0.0, 1.0);
    let opts = PicardOptions::default();
    for t_end in [0.025, 0.05, 0.1, 0.2] {
        let dt = t_end / 64.0;
        let (traj, report) = picard_solve(&u0, &q, t_end, dt, &opts)?;
        let split = split_step_evolve(&u0, &EvolutionParams::new(q, dt), 64)?;
        let gap = traj.last().sub(&split.last())?.l2_norm();
        println!(
            "T = {t_end:<5}  kappa {:.3e}  iterations {:>2}  radius {:.3}  picard vs split-step {gap:.2e}",
            report.kappa, report.iterations, report.radius
        );
    }
    let v0 = u0.add_scaled(&SpectralField::mode(basis, 1)?, Complex64::new(1e-3, 0.0))?;
    println!("Lipschitz ratio at T = 0.05: {:.4}", lipschitz_probe(&u0, &v0, &q, 0.05, 0.05 / 64.0, &opts)?);
    Ok(())
}
