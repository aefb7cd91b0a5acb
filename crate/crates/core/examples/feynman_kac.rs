//! Green function of the diffusion equation with a harmonic potential, by
//! Brownian bridges and by Crank-Nicolson.

use oneworld::one_world::feynman_kac::{crank_nicolson_green, feynman_kac_estimate, interpolate_uniform, FeynmanKacSettings};
use oneworld::*;

fn main() -> Result<()> {
    let potential = PotentialSpec::harmonic(1.0);
    let settings = FeynmanKacSettings {
        lambda: 1.0,
        diffusion_d: 0.5,
        t: 1.0,
        x_source: 0.0,
        n_samples: 20_000,
        bridge_steps: 200,
        seed: 5,
    };
    let (x, u) = crank_nicolson_green(&potential, 1.0, 0.5, 0.0, 1.0, 10.0, 2001, 1000, 2);
    println!("{:>6} {:>12} {:>10} {:>12} {:>7}", "x", "bridges", "std err", "CN", "z");
    for (k, target) in [-1.5, -0.5, 0.0, 0.5, 1.0, 2.0].into_iter().enumerate() {
        let e = feynman_kac_estimate(&potential, &settings, target, (k as u64) << 32)?;
        let reference = interpolate_uniform(&x, &u, target);
        println!(
            "{target:6.2} {:12.6} {:10.2e} {reference:12.6} {:7.2}",
            e.value,
            e.std_error,
            (e.value - reference) / e.std_error
        );
    }
    Ok(())
}
