use num_complex::Complex64;
use oneworld::observables::{energy, flux, local_velocity, momentum_mean};
use oneworld::*;
use proptest::prelude::*;

fn packet(grid: &Grid, q0: f64, p0: f64, gamma: Complex64) -> SchrodingerField {
    init_coherent_state(grid, &[q0], &[p0], &[gamma], 1.0, 1.0).unwrap()
}

#[test]
fn norm_is_conserved_by_both_routes() {
    let grid = Grid::line(-20.0, 20.0, 512).unwrap();
    let f = packet(&grid, -1.0, 0.7, Complex64::new(0.8, 0.1));
    let v = PotentialSpec::GaussianBarrier { height: 0.5, width: 1.0, center: 0.0 };
    let a = propagate_complex(&f, &v, 2e-3, 500).unwrap();
    let b = propagate_real_vector(&f, &v, 2e-3, 500).unwrap();
    assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
    assert!((b.norm_sqr() - 1.0).abs() < 1e-12);
    assert!(a.distance(&b).unwrap() < 1e-11);
}

#[test]
fn flux_integrates_to_mean_momentum() {
    let grid = Grid::line(-15.0, 15.0, 512).unwrap();
    let f = packet(&grid, 0.5, 1.3, Complex64::new(0.6, -0.2));
    let j = flux(&f);
    let total = grid.integrate(&j[0]);
    let p = momentum_mean(&f)[0];
    assert!((total - p / f.mass).abs() < 1e-10, "{total} vs {p}");
}

#[test]
fn local_velocity_of_plane_wave_packet_is_uniform() {
    // A real-gamma packet has phase p0 x / hbar, so v = p0/m wherever rho is resolved.
    let grid = Grid::line(-10.0, 10.0, 256).unwrap();
    let f = packet(&grid, 0.0, 0.9, Complex64::new(1.0, 0.0));
    let v = local_velocity(&f);
    let xs = grid.axis(0).coords();
    let mut checked = 0;
    for (i, x) in xs.iter().enumerate() {
        if x.abs() < 2.0 {
            let vi = v.values[0][i];
            assert!((vi - 0.9).abs() < 1e-8, "v({x}) = {vi}");
            checked += 1;
        }
    }
    assert!(checked > 40);
}

#[test]
fn free_energy_matches_closed_form() {
    // E = p0^2/2m + hbar^2 |gamma|^2 / (2 m Re gamma) for exp(-gamma x^2).
    let grid = Grid::line(-20.0, 20.0, 1024).unwrap();
    let g = Complex64::new(0.7, 0.3);
    let f = packet(&grid, 0.0, 1.1, g);
    let e = energy(&f, &PotentialSpec::Free).unwrap();
    let expect = 0.5 * 1.1 * 1.1 + g.norm_sqr() / (2.0 * g.re);
    assert!((e - expect).abs() < 1e-10, "{e} vs {expect}");
}

#[test]
fn harmonic_energy_is_conserved() {
    let grid = Grid::line(-20.0, 20.0, 1024).unwrap();
    let v = PotentialSpec::harmonic(1.0);
    let f = packet(&grid, 1.5, -0.4, Complex64::new(0.3, 0.1));
    let e0 = energy(&f, &v).unwrap();
    let g = propagate_complex(&f, &v, 1e-3, 3000).unwrap();
    let e1 = energy(&g, &v).unwrap();
    assert!((e1 - e0).abs() / e0 < 1e-6, "{e0} -> {e1}");
}

#[test]
fn backward_step_undoes_forward_step() {
    let grid = Grid::line(-12.0, 12.0, 256).unwrap();
    let v = PotentialSpec::Eckart { height: 0.8, width: 0.7 };
    let f = packet(&grid, -2.0, 1.0, Complex64::new(1.0, 0.0));
    let fwd = Propagator::new(&grid, &v, 1e-2, 1.0, 1.0, None).unwrap().run_complex(&f, 100).unwrap();
    let back = Propagator::new(&grid, &v, -1e-2, 1.0, 1.0, None).unwrap().run_complex(&fwd, 100).unwrap();
    assert!(back.distance(&f).unwrap() < 1e-11);
}

#[test]
fn skew_product_is_preserved() {
    // The real-vector form is a symplectic map: phi_r . chi_c - phi_c . chi_r is constant.
    let grid = Grid::line(-12.0, 12.0, 256).unwrap();
    let v = PotentialSpec::harmonic(0.8);
    let a = packet(&grid, -1.0, 0.5, Complex64::new(0.9, 0.0));
    let b = packet(&grid, 1.0, -0.3, Complex64::new(0.5, 0.2));
    let skew = |x: &SchrodingerField, y: &SchrodingerField| {
        let s: f64 = (0..x.phi_r.len()).map(|i| x.phi_r[i] * y.phi_c[i] - x.phi_c[i] * y.phi_r[i]).sum();
        s * grid.cell_volume()
    };
    let s0 = skew(&a, &b);
    let a1 = propagate_real_vector(&a, &v, 5e-3, 400).unwrap();
    let b1 = propagate_real_vector(&b, &v, 5e-3, 400).unwrap();
    assert!((skew(&a1, &b1) - s0).abs() < 1e-12, "{s0} -> {}", skew(&a1, &b1));
}

#[test]
fn cfl_violation_is_rejected() {
    let grid = Grid::line(-1.0, 1.0, 1024).unwrap();
    let err = Propagator::new(&grid, &PotentialSpec::Free, 1.0, 1.0, 1.0, None).err().unwrap();
    assert!(matches!(err, Error::InvalidTimeStep(_)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn routes_agree_and_conserve_norm(
        q0 in -2.0f64..2.0,
        p0 in -2.0f64..2.0,
        gr in 0.3f64..2.0,
        gi in -0.5f64..0.5,
        omega in 0.2f64..1.5,
    ) {
        let grid = Grid::line(-16.0, 16.0, 256).unwrap();
        let f = packet(&grid, q0, p0, Complex64::new(gr, gi));
        let v = PotentialSpec::harmonic(omega);
        let a = propagate_complex(&f, &v, 5e-3, 100).unwrap();
        let b = propagate_real_vector(&f, &v, 5e-3, 100).unwrap();
        prop_assert!((a.norm_sqr() - f.norm_sqr()).abs() < 1e-12);
        prop_assert!(a.distance(&b).unwrap() < 1e-11);
    }

    #[test]
    fn flux_identity_holds(q0 in -2.0f64..2.0, p0 in -3.0f64..3.0, gr in 0.3f64..2.0, gi in -1.0f64..1.0) {
        let grid = Grid::line(-16.0, 16.0, 512).unwrap();
        let f = packet(&grid, q0, p0, Complex64::new(gr, gi));
        let total = grid.integrate(&flux(&f)[0]);
        prop_assert!((total - momentum_mean(&f)[0]).abs() < 1e-9);
    }
}
