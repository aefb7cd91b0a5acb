//! Coherent state in a harmonic well, propagated by both the complex and
//! the real-vector split-step routes.

use num_complex::Complex64;
use oneworld::observables::{continuity_residual, energy};
use oneworld::*;

fn main() -> Result<()> {
    let grid = Grid::line(-20.0, 20.0, 1024)?;
    let potential = PotentialSpec::harmonic(1.0);
    let f0 = init_coherent_state(&grid, &[2.0], &[0.0], &[Complex64::new(0.5, 0.0)], 1.0, 1.0)?;
    let dt = 1e-3;
    let e0 = energy(&f0, &potential)?;
    println!("{:>6} {:>10} {:>14} {:>12} {:>12}", "t", "<q>", "norm - 1", "energy", "route gap");
    let (mut a, mut b) = (f0.clone(), f0);
    for _ in 0..8 {
        a = propagate_complex(&a, &potential, dt, 785)?;
        b = propagate_real_vector(&b, &potential, dt, 785)?;
        println!(
            "{:6.3} {:10.6} {:14.2e} {:12.9} {:12.2e}",
            a.time,
            a.position_mean()[0],
            a.norm_sqr() - 1.0,
            energy(&a, &potential)?,
            a.distance(&b)?
        );
    }
    println!("energy at start {e0:.9}");
    let next = propagate_complex(&a, &potential, dt, 1)?;
    println!("continuity residual over one step: {:.2e}", continuity_residual(&a, &next)?);
    Ok(())
}
