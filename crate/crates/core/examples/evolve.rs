//! Split-step evolution of the quadratic equation on the unit disk. Mass is
//! conserved on the real diagonal `alpha = gamma`, `beta = 0` and drifts once
//! `beta` is switched on.

use num_complex::Complex64;
use xsblab::evolution::{split_step_evolve, EvolutionParams, QuadraticNonlinearity};
use xsblab::field::{energy_gradient, SpectralField};
use xsblab::manifold::{build_basis, Boundary, ManifoldSpec};

fn main() -> xsblab::Result<()> {
    let basis = build_basis(&ManifoldSpec::unit_disk(Boundary::Neumann), 8.0)?;
    let coeffs = (0..basis.len()).map(|k| Complex64::from_polar(1.0 / (1.0 + k as f64), 0.7 * k as f64)).collect();
    let u0 = SpectralField::new(basis.clone(), coeffs)?;
    let u0 = u0.scaled(Complex64::new(0.5 / u0.l2_norm(), 0.0));
    for beta in [0.0, 0.3] {
        let params = EvolutionParams::new(QuadraticNonlinearity::real(1.0, beta, 1.0), 1e-3);
        let traj = split_step_evolve(&u0, &params, 500)?;
        println!(
            "beta = {beta}: relative mass drift {:.3e}, gradient energy {:.6} -> {:.6}",
            traj.mass_drift(),
            energy_gradient(&u0),
            energy_gradient(&traj.last())
        );
    }
    Ok(())
}
