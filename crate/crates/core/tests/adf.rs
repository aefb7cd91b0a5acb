use num_complex::Complex64;
use oneworld::adf::{adf_step, evaluate_adf, run_adf, AdfState};
use oneworld::*;
use proptest::prelude::*;

const TAU: f64 = 2.0 * std::f64::consts::PI;

#[test]
fn quadratic_potentials_match_the_grid() {
    let grid = Grid::line(-40.0, 40.0, 4096).unwrap();
    for pot in [PotentialSpec::Free, PotentialSpec::harmonic(1.0)] {
        let s0 = AdfState::new(-1.0, 0.8, Complex64::new(0.7, 0.2), 1.0, 1.0).unwrap();
        let dt = 1e-3;
        let n = 3000;
        let (s, _) = run_adf(&s0, &pot, dt, n, n).unwrap();
        let f0 = evaluate_adf(&s0, &grid).unwrap();
        let exact = propagate_complex(&f0, &pot, dt, n).unwrap();
        let ov = exact.overlap(&evaluate_adf(&s, &grid).unwrap()).unwrap();
        assert!(ov.norm() > 1.0 - 1e-6, "{pot:?}: {}", ov.norm());
    }
}

#[test]
fn phase_through_a_full_harmonic_period() {
    // Two caustics per period; the continuous branch carries the Maslov phase.
    let grid = Grid::line(-15.0, 15.0, 1024).unwrap();
    let pot = PotentialSpec::harmonic(1.0);
    let s0 = AdfState::new(1.0, 0.0, Complex64::new(2.0, 0.0), 1.0, 1.0).unwrap();
    let n = 6283;
    let dt = TAU / n as f64;
    let (s, records) = run_adf(&s0, &pot, dt, n, 1).unwrap();
    assert_eq!(s.maslov(), 2);
    assert!(records.windows(2).all(|w| w[1].maslov >= w[0].maslov));
    let f0 = evaluate_adf(&s0, &grid).unwrap();
    let exact = propagate_complex(&f0, &pot, dt, n).unwrap();
    let ov = exact.overlap(&evaluate_adf(&s, &grid).unwrap()).unwrap();
    assert!(ov.norm() > 1.0 - 1e-6);
    assert!(ov.arg().abs() < 1e-2, "phase {}", ov.arg());
}

#[test]
fn evaluated_norm_is_one_through_caustics() {
    let grid = Grid::line(-15.0, 15.0, 2048).unwrap();
    let pot = PotentialSpec::harmonic(1.0);
    let mut s = AdfState::new(0.5, 0.3, Complex64::new(3.0, -0.4), 1.0, 1.0).unwrap();
    for k in 0..4000 {
        s = adf_step(&s, &pot, 2e-3).unwrap();
        if k % 100 == 0 {
            let n = evaluate_adf(&s, &grid).unwrap().norm_sqr();
            assert!((n - 1.0).abs() < 1e-10, "t = {} norm {n}", s.time);
        }
    }
}

#[test]
fn c_over_sigma_squared_is_constant() {
    let pot = PotentialSpec::GaussianBarrier { height: 0.3, width: 2.0, center: 0.0 };
    let mut s = AdfState::new(-4.0, 1.0, Complex64::new(1.0, 0.5), 1.0, 1.0).unwrap();
    let k0 = s.exponent.kappa;
    for _ in 0..2000 {
        s = adf_step(&s, &pot, 1e-3).unwrap();
        if !s.exponent.zeta_mode {
            let (sigma, _) = s.sigma();
            let ratio = s.exponent.c / (sigma * sigma);
            assert!((ratio - k0).abs() < 1e-8 * k0, "t = {}: {ratio} vs {k0}", s.time);
        }
    }
}

#[test]
fn nonpositive_width_is_rejected() {
    assert!(matches!(
        AdfState::new(0.0, 0.0, Complex64::new(-1.0, 0.0), 1.0, 1.0),
        Err(Error::NonpositiveWidth(_))
    ));
}

#[test]
fn escaping_packet_is_reported() {
    let grid = Grid::line(-2.0, 2.0, 256).unwrap();
    let s = AdfState::new(1.9, 0.0, Complex64::new(1.0, 0.0), 1.0, 1.0).unwrap();
    assert!(matches!(evaluate_adf(&s, &grid), Err(Error::PacketEscapesGrid { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn wronskian_is_conserved(
        q0 in -4.0f64..-1.0,
        p0 in 0.2f64..2.0,
        gr in 0.2f64..3.0,
        gi in -1.0f64..1.0,
        height in 0.1f64..2.0,
        omega in 0.3f64..2.0,
    ) {
        for pot in [
            PotentialSpec::GaussianBarrier { height, width: 0.7, center: 0.0 },
            PotentialSpec::harmonic(omega),
        ] {
            let mut s = AdfState::new(q0, p0, Complex64::new(gr, gi), 1.0, 1.0).unwrap();
            let target = 2.0 * s.hbar / s.mass();
            for _ in 0..1500 {
                s = adf_step(&s, &pot, 2e-3).unwrap();
                prop_assert!((s.wronskian() - target).abs() < 1e-8);
            }
        }
    }
}
