//! Eigenbases of the model domains: lowest eigenvalues, multiplicities and
//! orthonormality of the quadrature grid.

use xsblab::manifold::{build_basis, Boundary, ManifoldSpec};

fn main() -> xsblab::Result<()> {
    let domains = [
        ("pi x pi rectangle, Dirichlet", ManifoldSpec::square(Boundary::Dirichlet)),
        ("pi x pi rectangle, Neumann", ManifoldSpec::square(Boundary::Neumann)),
        ("unit disk, Dirichlet", ManifoldSpec::unit_disk(Boundary::Dirichlet)),
        ("unit disk, Neumann", ManifoldSpec::unit_disk(Boundary::Neumann)),
    ];
    for (name, spec) in domains {
        let basis = build_basis(&spec, 12.0)?;
        println!("{name}: {} modes with mu <= 12, fingerprint {}", basis.len(), basis.fingerprint());
        for m in basis.modes().iter().take(6) {
            println!("  {:>12.9}  {:?}", m.lambda, m.label);
        }
        println!("  orthonormality residual {:.2e}", basis.orthonormality_residual());
    }
    Ok(())
}
