//! A Gaussian in a harmonic well through two caustics, against the grid.

use num_complex::Complex64;
use oneworld::adf::{evaluate_adf, run_adf, AdfState};
use oneworld::*;

fn main() -> Result<()> {
    let potential = PotentialSpec::harmonic(1.0);
    let grid = Grid::line(-15.0, 15.0, 1024)?;
    let s0 = AdfState::new(1.0, 0.0, Complex64::new(2.0, 0.0), 1.0, 1.0)?;
    let mut psi = evaluate_adf(&s0, &grid)?;
    let n = 785;
    let dt = std::f64::consts::TAU / (8 * n) as f64;
    let mut s = s0;
    println!("{:>6} {:>9} {:>9} {:>7} {:>6} {:>10} {:>8}", "t", "q_cl", "sigma", "width", "maslov", "|overlap|", "phase");
    for _ in 0..8 {
        let (next, _) = run_adf(&s, &potential, dt, n, n)?;
        s = next;
        psi = propagate_complex(&psi, &potential, dt, n)?;
        let ov = psi.overlap(&evaluate_adf(&s, &grid)?)?;
        println!(
            "{:6.3} {:9.5} {:9.5} {:7.4} {:6} {:10.8} {:8.4}",
            s.time,
            s.center().q,
            s.sigma().0,
            s.width(),
            s.maslov(),
            ov.norm(),
            ov.arg()
        );
    }
    println!("Wronskian {:.12} (2 hbar/m = 2)", s.wronskian());
    Ok(())
}
