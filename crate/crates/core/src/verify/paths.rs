use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;

use super::Outcome;
use crate::error::Result;
use crate::field::{init_coherent_state, SchrodingerField};
use crate::grid::Grid;
use crate::one_world::double_slit::{compare_fringes, double_slit_run, DoubleSlitResult, DoubleSlitSettings};
use crate::one_world::feynman_kac::{crank_nicolson_green, feynman_kac_estimate, interpolate_uniform, FeynmanKacSettings};
use crate::one_world::paths::integrate_path;
use crate::one_world::stats::{chi_square_test, ks_distance, PiecewiseLinearDensity};
use crate::one_world::{classical_limit_trajectory, sample_ensemble, sample_initial_positions, FieldSequence, WienerConfig};
use crate::potential::PotentialSpec;
use crate::propagate::AbsorbingBoundary;

fn endpoint_ks(seq: &FieldSequence, x0: &[Vec<f64>], dt: f64, n_steps: usize, seed: u64) -> Result<f64> {
    let paths = sample_ensemble(seq, x0, dt, n_steps, &WienerConfig::quantum(1.0, 1.0, seed), n_steps)?;
    let ends: Vec<f64> = paths.iter().map(|p| p.final_position()[0]).collect();
    let last = seq.fields.last().expect("non-empty");
    let ax = last.grid.axis(0);
    let cdf = PiecewiseLinearDensity::new(ax.min, ax.spacing(), last.density());
    Ok(ks_distance(&ends, |x| cdf.cdf(x)))
}

pub fn ensemble_consistency() -> Result<Outcome> {
    let sigma = 5.0;
    let grid = Grid::line(-60.0, 60.0, 2048)?;
    let f0 = init_coherent_state(&grid, &[0.0], &[1.0], &[Complex64::new(1.0 / (4.0 * sigma * sigma), 0.0)], 1.0, 1.0)?;
    let (dt, n_steps) = (1e-3, 250);
    let seq = FieldSequence::record(&f0, &PotentialSpec::Free, dt, n_steps, 5, None)?;
    let n = 10_000;
    let t0 = Instant::now();
    let d1 = endpoint_ks(&seq, &sample_initial_positions(&f0, n, 41), dt, n_steps, 41)?;
    let secs = t0.elapsed().as_secs_f64();
    let d2 = endpoint_ks(&seq, &sample_initial_positions(&f0, 2 * n, 41), dt, n_steps, 41)?;
    let (b1, b2) = (2.5 / (n as f64).sqrt(), 2.5 / (2.0 * n as f64).sqrt());
    Ok(Outcome::new(
        d1 < b1 && d2 < b2 && secs < 30.0,
        format!("KS {d1:.4} at n = {n} (< {b1:.4}), {d2:.4} at 2n (< {b2:.4}), {secs:.1} s (< 30 s)"),
    ))
}

pub fn classical_limit() -> Result<Outcome> {
    let hbar = 0.01;
    let harmonic = PotentialSpec::harmonic(1.0);
    let grid = Grid::line(-2.5, 2.5, 1024)?;
    let (q0, p0) = (1.0, 0.0);
    let f0 = init_coherent_state(&grid, &[q0], &[p0], &[Complex64::new(0.5 / hbar, 0.0)], hbar, 1.0)?;
    let period = 2.0 * PI;
    let n_grid = 6400;
    let seq = FieldSequence::record(&f0, &harmonic, period / n_grid as f64, n_grid, 4, None)?;
    let n_path = 640_000;
    let dt = period / n_path as f64;
    let wiener = WienerConfig { diffusion_d: 0.0, seed: 0 };
    let path = integrate_path(&[q0], 0.0, &seq, dt, n_path, &wiener, 0, 100)?;
    let reference = classical_limit_trajectory(&[q0], &[p0], &harmonic, 1.0, dt, n_path);
    let dev = path
        .positions
        .iter()
        .zip(&path.times)
        .map(|(x, t)| {
            let k = (t / dt).round() as usize;
            (x[0] - reference.positions[k][0]).abs()
        })
        .fold(0.0, f64::max);
    Ok(Outcome::new(dev < 1e-4, format!("max deviation from leapfrog over one period {dev:.2e} (< 1e-4)")))
}

pub struct SlitSetup {
    pub initial: SchrodingerField,
    pub settings: DoubleSlitSettings,
}

/// Slits at y = +-1.2, width 0.8, wall at x = 0; detector line at x = 20.
pub fn slit_setup(centers: &[f64], n_paths: usize) -> Result<(SlitSetup, PotentialSpec)> {
    let grid = Grid::plane((-12.0, 36.0, 512), (-48.0, 48.0, 512))?;
    let potential = PotentialSpec::DoubleSlitMask {
        wall_position: 0.0,
        wall_thickness: 0.5,
        slit_centers: centers.to_vec(),
        slit_widths: vec![0.8; centers.len()],
        wall_height: 100.0,
    };
    let initial = init_coherent_state(
        &grid,
        &[-5.0, 0.0],
        &[4.0, 0.0],
        &[Complex64::new(0.5, 0.0), Complex64::new(0.0625, 0.0)],
        1.0,
        1.0,
    )?;
    let settings = DoubleSlitSettings {
        dt: 0.004,
        n_steps: 2000,
        n_paths,
        detector_x: 20.0,
        n_bins: 64,
        y_min: -48.0,
        y_max: 48.0,
        absorber: Some(AbsorbingBoundary { width: 4.0, strength: 5.0 }),
        seed: 3,
    };
    Ok((SlitSetup { initial, settings }, potential))
}

fn run_slits(centers: &[f64], n_paths: usize) -> Result<DoubleSlitResult> {
    let (s, pot) = slit_setup(centers, n_paths)?;
    let x0 = sample_initial_positions(&s.initial, n_paths, s.settings.seed);
    double_slit_run(&s.initial, &pot, &s.settings, &x0, |_, _| Ok(()))
}

pub fn double_slit() -> Result<Outcome> {
    let t0 = Instant::now();
    let two = run_slits(&[-1.2, 1.2], 100_000)?;
    let secs = t0.elapsed().as_secs_f64();
    let fringes = compare_fringes(&two.histogram, 0.1);
    let one = run_slits(&[1.2], 10_000)?;
    let counts: Vec<u64> = one.histogram.iter().map(|b| b.count).collect();
    let probs: Vec<f64> = two.histogram.iter().map(|b| b.reference_density * two.bin_width).collect();
    let (chi2, dof, p) = chi_square_test(&counts, &probs, 5.0);
    Ok(Outcome::new(
        fringes.within(1) && p < 0.01 && secs < 600.0,
        format!(
            "{} spots, {} fringe maxima, max offset {} bin(s) (<= 1); single-slit chi2 {chi2:.1} on {dof} dof, p = {p:.1e} (< 0.01); {secs:.0} s (< 600 s)",
            two.spots.len(),
            fringes.reference_maxima.len(),
            fringes.max_offset_bins
        ),
    ))
}

pub fn feynman_kac() -> Result<Outcome> {
    let pot = PotentialSpec::harmonic(1.0);
    let settings = FeynmanKacSettings {
        lambda: 1.0,
        diffusion_d: 0.5,
        t: 1.0,
        x_source: 0.0,
        n_samples: 100_000,
        bridge_steps: 200,
        seed: 11,
    };
    let (x, u) = crank_nicolson_green(&pot, 1.0, 0.5, 0.0, 1.0, 10.0, 4001, 2000, 2);
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (k, &target) in [-1.0, -0.5, 0.0, 0.5, 1.5].iter().enumerate() {
        let est = feynman_kac_estimate(&pot, &settings, target, (k as u64) << 32)?;
        let reference = interpolate_uniform(&x, &u, target);
        let z = (est.value - reference).abs() / est.std_error;
        worst = worst.max(z);
        parts.push(format!("{z:.2}"));
    }
    Ok(Outcome::new(worst < 3.0, format!("|MC - CN| / SE at 5 targets: {} (< 3)", parts.join(", "))))
}
