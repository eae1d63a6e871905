//! The trilinear frequency identity obtained from Green's theorem, checked on
//! random band fields for both boundary conditions.

use xsblab::estimates::green_identity_check;
use xsblab::manifold::{build_basis, Boundary, ManifoldSpec};
use xsblab::quadrature::TimeRule;

fn main() -> xsblab::Result<()> {
    for (name, spec) in [("Neumann square", ManifoldSpec::square(Boundary::Neumann)), ("Dirichlet disk", ManifoldSpec::unit_disk(Boundary::Dirichlet))] {
        let basis = build_basis(&spec, 16.0)?;
        for levels in [[8, 2, 2], [4, 4, 8], [2, 8, 8]] {
            let r = green_identity_check(&basis, levels, 7, Some((TimeRule::GaussLegendre { nodes: 12 }, 0.5)))?;
            println!(
                "{name} {levels:?}: direct {:.6}  I1 {:.6}  I2 {:.6}  I3 {:.6}  residual {:.1e}",
                r.direct, r.i1, r.i2, r.i3, r.residual
            );
        }
    }
    Ok(())
}
