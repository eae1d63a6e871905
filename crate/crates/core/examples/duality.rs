//! The pairing identity behind the dual description of the Bourgain spaces:
//! the weights of `J^s Lambda^b` and `J^{-s} Lambda^{-b}` cancel on the lattice.

use num_complex::Complex64;
use xsblab::manifold::{build_basis, Boundary, ManifoldSpec};
use xsblab::spacetime::{duality_pairing_check, SpaceTimeField};

fn main() -> xsblab::Result<()> {
    let basis = build_basis(&ManifoldSpec::square(Boundary::Neumann), 6.0)?;
    let n = basis.len();
    let u = SpaceTimeField::from_fn(basis.clone(), -2.0, 4.0, 64, |t| {
        (0..n).map(|k| Complex64::new((t * k as f64).cos(), (-t * t).exp())).collect()
    })?;
    let v = SpaceTimeField::from_fn(basis, -2.0, 4.0, 64, |t| (0..n).map(|k| Complex64::from_polar(1.0 / (1.0 + k as f64), t)).collect())?;
    for (s, b) in [(0.0, 0.0), (1.0, 0.55), (-1.5, 0.3), (2.0, -0.45)] {
        println!("s = {s:>5}, b = {b:>5}: residual {:.2e}", duality_pairing_check(&u, &v, s, b)?);
    }
    Ok(())
}
