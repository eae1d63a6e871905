//! Randomized sweep of the bilinear estimate over dyadic band pairs with a
//! least-squares fit of the growth exponent in the lower frequency.

use xsblab::estimates::{bilinear_lhs, random_band_field, run_sweep, SweepConfig, SweepKind};
use xsblab::manifold::{build_basis, Boundary, ManifoldSpec};

fn main() -> xsblab::Result<()> {
    let basis = build_basis(&ManifoldSpec::square(Boundary::Dirichlet), 64.0)?;
    let f = random_band_field(&basis, 16, 1)?;
    let h = random_band_field(&basis, 4, 2)?;
    println!("single pair (16, 4): {:.6}", bilinear_lhs(&f, &h)?);
    for kind in [SweepKind::Bilinear, SweepKind::GradientBilinear, SweepKind::XsbBilinear] {
        let res = run_sweep(&basis, &SweepConfig::new(kind, vec![2, 4, 8, 16, 32], 4, 42))?;
        println!(
            "{kind:?}: s_hat {:.3}  c_hat {:.3}  residual {:.3}  max ratio at s = 0.75 {:.4}  ({} samples)",
            res.fit.s_hat, res.fit.c_hat, res.fit.residual, res.max_ratio, res.fit.n_samples
        );
    }
    Ok(())
}
