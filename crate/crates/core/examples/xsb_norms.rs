//! Bourgain-space norms on a periodic time window: a windowed free solution,
//! its modulation bands, restriction norms and the linear-estimate scaling.

use num_complex::Complex64;
use xsblab::evolution::Trajectory;
use xsblab::field::SpectralField;
use xsblab::manifold::{build_basis, Boundary, ManifoldSpec};
use xsblab::spacetime::{
    linear_estimate_probe, modulation_levels, modulation_project, restriction_norm_estimate, xsb_norm, Cutoff, SpaceTimeField,
    WindowSpec,
};

fn main() -> xsblab::Result<()> {
    let basis = build_basis(&ManifoldSpec::unit_disk(Boundary::Dirichlet), 10.0)?;
    let f = SpectralField::new(basis.clone(), (0..basis.len()).map(|k| Complex64::new(1.0, -(k as f64)).inv()).collect())?;
    let cutoff = Cutoff::for_interval(1.0);
    let u = SpaceTimeField::windowed_free(&f, |t| cutoff.eval(t), -1.5, 4.0, 128)?;
    for (s, b) in [(0.0, 0.0), (1.0, 0.0), (0.0, 0.55), (1.0, 0.55)] {
        println!("X^({s},{b}) norm {:.6}", xsb_norm(&u, s, b));
    }
    let total = u.l2_norm().powi(2);
    for level in modulation_levels(&u) {
        let part = modulation_project(&u, level)?.l2_norm().powi(2);
        println!("modulation band {level:>3}: {:.4}% of the mass", 100.0 * part / total);
    }
    let traj = Trajectory::linear(&f, &[0.0, 0.25]);
    let family = [Cutoff::for_interval(0.25), Cutoff::for_interval(0.5)];
    let r = restriction_norm_estimate(&traj, 0.25, 1.0, 0.55, &family, WindowSpec { window: 2.0, n_t: 512 })?;
    println!("restriction estimate on [0, 0.25]: {r:.6}");
    let rows = linear_estimate_probe(&f, 1.0, 0.55, &[1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0], WindowSpec { window: 2.0, n_t: 1024 })?;
    for row in rows {
        println!("T = {:<7} ratio {:.5}  ratio * T^(b - 1/2) {:.5}", row.horizon, row.ratio, row.scaled);
    }
    Ok(())
}
