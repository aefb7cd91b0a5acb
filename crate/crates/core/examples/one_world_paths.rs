//! One-world paths riding a free Gaussian at rest. The drift is the
//! current velocity j/rho alone, so the ensemble spreads faster than
//! |psi|^2 by (hbar/m) t.

use num_complex::Complex64;
use oneworld::one_world::*;
use oneworld::*;

fn variance(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

fn main() -> Result<()> {
    let (hbar, mass) = (1.0, 1.0);
    let grid = Grid::line(-60.0, 60.0, 1024)?;
    let f0 = init_coherent_state(&grid, &[0.0], &[0.0], &[Complex64::new(0.01, 0.0)], hbar, mass)?;
    let dt = 1e-2;
    let sequence = FieldSequence::record(&f0, &PotentialSpec::Free, dt, 400, 1, None)?;
    let n = 10_000;
    let starts = sample_initial_positions(&f0, n, 21);
    let wiener = WienerConfig::quantum(hbar, mass, 21);
    let ensemble = sample_ensemble(&sequence, &starts, dt, 400, &wiener, 50)?;
    println!("{:>5} {:>10} {:>10} {:>16} {:>9}", "t", "ensemble", "grid", "growth difference", "hbar t/m");
    let mut start = None;
    for k in 0..ensemble[0].times.len() {
        let t = ensemble[0].times[k];
        let xs: Vec<f64> = ensemble.iter().map(|p| p.positions[k][0]).collect();
        let field = &sequence.fields[(t / dt).round() as usize];
        let mean = field.position_mean()[0];
        let rho = field.density();
        let grid_var = grid.axis(0).coords().iter().zip(&rho).map(|(x, r)| (x - mean).powi(2) * r).sum::<f64>()
            * grid.cell_volume();
        let v = variance(&xs);
        let (v0, g0) = *start.get_or_insert((v, grid_var));
        println!("{t:5.2} {v:10.4} {grid_var:10.4} {:16.4} {:9.4}", (v - v0) - (grid_var - g0), hbar * t / mass);
    }
    Ok(())
}
