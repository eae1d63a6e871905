use std::f64::consts::PI;
use xsblab::field::{japanese, SpectralField};
use xsblab::manifold::{build_basis, Boundary, ManifoldSpec};
use xsblab::spacetime::{xsb_norm, SpaceTimeField};

/// `||exp(-a t^2)||_{H^b(R)}` from the closed-form Fourier transform.
fn gaussian_hb(a: f64, b: f64) -> f64 {
    let n = 200_000;
    let top = 60.0;
    let h = 2.0 * top / n as f64;
    let total: f64 = (0..=n)
        .map(|i| {
            let s = -top + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * japanese(s).powf(2.0 * b) * (PI / a) * (-s * s / (2.0 * a)).exp()
        })
        .sum();
    (total * h / (2.0 * PI)).sqrt()
}

// the lattice sum over modulations converges like exp(-W) for the weight <sigma>^{2b}
#[test]
fn single_mode_norm_factorizes() {
    let basis = build_basis(&ManifoldSpec::unit_disk(Boundary::Neumann), 6.0).unwrap();
    let a = 2.0;
    for k in [0, 3, 7] {
        let e = SpectralField::mode(basis.clone(), k).unwrap();
        let u = SpaceTimeField::windowed_free(&e, |t| (-a * t * t).exp(), -16.0, 32.0, 512).unwrap();
        let mu = basis.modes()[k].mu;
        for (s, b) in [(0.0, 0.0), (1.0, 0.55), (2.0, 1.0), (0.5, -0.3)] {
            let want = japanese(mu).powf(s) * gaussian_hb(a, b);
            let got = xsb_norm(&u, s, b);
            assert!((got - want).abs() <= 1e-10 * want, "k {k} s {s} b {b}: {got} vs {want}");
        }
    }
}
