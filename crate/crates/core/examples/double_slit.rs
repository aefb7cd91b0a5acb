//! Reduced double slit: a 256 x 256 grid and a few thousand paths, with the
//! fringe histogram printed against the grid's time-integrated |psi|^2.

use num_complex::Complex64;
use oneworld::one_world::double_slit::{compare_fringes, double_slit_run, mirror_asymmetry, DoubleSlitSettings};
use oneworld::one_world::sample_initial_positions;
use oneworld::propagate::AbsorbingBoundary;
use oneworld::*;

fn main() -> Result<()> {
    let grid = Grid::plane((-12.0, 24.0, 256), (-32.0, 32.0, 256))?;
    let potential = PotentialSpec::DoubleSlitMask {
        wall_position: 0.0,
        wall_thickness: 0.5,
        slit_centers: vec![-1.2, 1.2],
        slit_widths: vec![0.8, 0.8],
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
        dt: 0.005,
        n_steps: 1000,
        n_paths: 5000,
        detector_x: 12.0,
        n_bins: 40,
        y_min: -32.0,
        y_max: 32.0,
        absorber: Some(AbsorbingBoundary { width: 3.0, strength: 5.0 }),
        seed: 8,
    };
    let starts = sample_initial_positions(&initial, settings.n_paths, settings.seed);
    let r = double_slit_run(&initial, &potential, &settings, &starts, |_, _| Ok(()))?;
    println!("{} spots, {} absorbed, {} left the grid", r.spots.len(), r.absorbed, r.exited);
    let total = r.spots.len().max(1) as f64;
    for b in &r.histogram {
        let observed = b.count as f64 / (total * r.bin_width);
        let bar = "#".repeat((observed * 400.0).round() as usize);
        println!("{:7.2} {:8.5} {:8.5} {bar}", b.center, observed, b.reference_density);
    }
    let f = compare_fringes(&r.histogram, 0.1);
    println!("maxima: grid {:?}, paths {:?}", f.reference_maxima, f.histogram_maxima);
    println!("mirror asymmetry {:.2} sigma", mirror_asymmetry(&r.histogram));
    Ok(())
}
