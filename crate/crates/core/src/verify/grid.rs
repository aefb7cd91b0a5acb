use std::time::Instant;

use num_complex::Complex64;

use super::Outcome;
use crate::error::Result;
use crate::field::init_coherent_state;
use crate::grid::Grid;
use crate::observables::Observer;
use crate::potential::PotentialSpec;
use crate::propagate::{propagate_complex, propagate_real_vector, Propagator};

pub fn real_complex_equivalence() -> Result<Outcome> {
    let grid = Grid::line(-25.0, 25.0, 4096)?;
    let f0 = init_coherent_state(&grid, &[1.0], &[0.5], &[Complex64::new(0.5, 0.0)], 1.0, 1.0)?;
    let v = PotentialSpec::harmonic(1.0);
    let t0 = Instant::now();
    let a = propagate_real_vector(&f0, &v, 1e-3, 10_000)?;
    let b = propagate_complex(&f0, &v, 1e-3, 10_000)?;
    let secs = t0.elapsed().as_secs_f64();
    let dev = a
        .phi_r
        .iter()
        .zip(&b.phi_r)
        .chain(a.phi_c.iter().zip(&b.phi_c))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(Outcome::new(
        dev < 1e-12 && secs < 30.0,
        format!("max deviation {dev:.2e} (< 1e-12), both routes {secs:.1} s (< 30 s)"),
    ))
}

fn width(f: &crate::field::SchrodingerField) -> f64 {
    let xs = f.grid.axis(0).coords();
    let rho = f.density();
    let n = f.grid.integrate(&rho);
    let m1 = f.grid.integrate(&rho.iter().zip(&xs).map(|(r, x)| r * x).collect::<Vec<_>>()) / n;
    let m2 = f.grid.integrate(&rho.iter().zip(&xs).map(|(r, x)| r * (x - m1) * (x - m1)).collect::<Vec<_>>()) / n;
    m2.sqrt()
}

pub fn free_gaussian_analytics() -> Result<Outcome> {
    let (hbar, mass, w0) = (1.0, 1.0, 1.0);
    let grid = Grid::line(-30.0, 40.0, 2048)?;
    let gamma = 1.0 / (4.0 * w0 * w0);
    let f0 = init_coherent_state(&grid, &[0.0], &[1.0], &[Complex64::new(gamma, 0.0)], hbar, mass)?;
    let (dt, n) = (1e-3, 4000);
    let mut prop = Propagator::new(&grid, &PotentialSpec::Free, dt, hbar, mass, None)?;
    let mut obs = Observer::new(&grid);
    let e0 = obs.energy(&f0, &PotentialSpec::Free)?;
    let (mut f, mut worst_w, mut worst_n, mut worst_e) = (f0.clone(), 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n / 500 {
        f = prop.run_complex(&f, 500)?;
        let t = f.time;
        let exact = (w0 * w0 + (hbar * t / (2.0 * mass * w0)).powi(2)).sqrt();
        worst_w = worst_w.max((width(&f) - exact).abs() / exact);
        worst_n = worst_n.max((f.norm_sqr() - 1.0).abs());
        worst_e = worst_e.max((obs.energy(&f, &PotentialSpec::Free)? - e0).abs());
    }
    Ok(Outcome::new(
        worst_w < 1e-6 && worst_n < 1e-10 && worst_e < 1e-8,
        format!("width rel {worst_w:.2e} (< 1e-6), norm {worst_n:.2e} (< 1e-10), energy {worst_e:.2e} (< 1e-8)"),
    ))
}

pub fn continuity_order() -> Result<Outcome> {
    let grid = Grid::line(-20.0, 20.0, 1024)?;
    let f0 = init_coherent_state(&grid, &[-1.0], &[1.0], &[Complex64::new(0.5, 0.2)], 1.0, 1.0)?;
    let mut obs = Observer::new(&grid);
    let mut res = Vec::new();
    for dt in [1e-3, 5e-4, 2.5e-4] {
        let f1 = propagate_complex(&f0, &PotentialSpec::Free, dt, 1)?;
        res.push(obs.continuity_residual(&f0, &f1)?);
    }
    let orders: Vec<f64> = res.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(Outcome::new(
        orders.iter().all(|&o| o >= 1.9),
        format!("residuals {:.2e} {:.2e} {:.2e}, orders {:.3} {:.3} (>= 1.9)", res[0], res[1], res[2], orders[0], orders[1]),
    ))
}
