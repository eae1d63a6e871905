//! Exponent choices from the interpolation lemma and the dyadic summation
//! inequality used to sum the frequency-localized estimates.

use xsblab::estimates::{dyadic_summation_check, interpolation_params};

fn main() -> xsblab::Result<()> {
    println!("{:>8} {:>10} {:>10} {:>10} {:>10} {:>10}", "s'", "delta", "theta", "epsilon", "b", "b'");
    for s_prime in [0.7, 0.8, 1.0, 1.25, 1.5, 1.9] {
        let p = interpolation_params(s_prime)?;
        println!("{:>8} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6}", s_prime, p.delta, p.theta, p.epsilon, p.b, p.b_prime);
    }
    let c: Vec<f64> = (0..10).map(|i| 1.0 / (1.0 + i as f64)).collect();
    let d: Vec<f64> = (0..10).map(|i| ((i as f64) * 0.7).sin().abs()).collect();
    for (theta, gamma) in [(0.5, 1.0), (1.0, 1.0), (1.0, 4.0)] {
        let r = dyadic_summation_check(theta, gamma, &c, &d)?;
        println!("theta {theta}, gamma {gamma}: lhs {:.4}  rhs {:.4}  ratio {:.4}", r.lhs, r.rhs, r.ratio);
    }
    Ok(())
}
