use num_complex::Complex64;
use oneworld::param_space::flows::{circle_loop, flux_velocity};
use oneworld::param_space::*;
use oneworld::PotentialSpec;
use proptest::prelude::*;

fn coherent(pot: PotentialSpec) -> FamilyModel {
    FamilyModel::new(TrialFamily::CoherentState { alpha: 1.0 }, pot, 1.0, 1.0).unwrap()
}

fn skewed() -> FamilyModel {
    FamilyModel::new(TrialFamily::SkewedGaussian { skew: 0.3 }, PotentialSpec::harmonic(1.0), 1.0, 1.0).unwrap()
}

fn max_gap(a: &ParameterState, b: &ParameterState) -> f64 {
    a.to_vec().iter().zip(b.to_vec()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn dynamical_pairs_make_all_flows_coincide() {
    let m = coherent(PotentialSpec::harmonic(1.0));
    let s0 = ParameterState::new(vec![1.0], vec![0.5]).unwrap();
    assert!(dynamical_pair_check(&m, &s0, 1e-10).unwrap().iter().all(|&b| b));
    let dt = 1e-2;
    let (mut f, mut g) = (s0.clone(), s0.clone());
    for _ in 0..200 {
        f = hamilton_flow_step(&m, &f, dt).unwrap();
        g = flux_flow_step(&m, &g, dt).unwrap();
        assert!(dynamical_pair_check(&m, &g, 1e-10).unwrap()[0]);
    }
    let alt = alternate_compose(&m, &s0, dt, 200).unwrap().final_state().unwrap();
    assert!(max_gap(&f, &g) < 1e-9, "{}", max_gap(&f, &g));
    // The alternated flow takes half steps, so compare it with a reference of the same step count.
    let mut h = s0.clone();
    for _ in 0..400 {
        h = hamilton_flow_step(&m, &h, 0.5 * dt).unwrap();
    }
    assert!(max_gap(&alt, &h) < 1e-9, "{}", max_gap(&alt, &h));
}

#[test]
fn hamilton_flow_conserves_energy_per_period() {
    let m = coherent(PotentialSpec::harmonic(1.0));
    let s0 = ParameterState::new(vec![-0.7], vec![1.2]).unwrap();
    let r = hamilton_flow(&m, &s0, 2.0 * std::f64::consts::PI / 1000.0, 1000).unwrap();
    let e0 = r.rows[0].energy;
    assert!(r.rows.iter().all(|row| (row.energy - e0).abs() < 1e-8));
}

#[test]
fn flux_flow_conserves_norm() {
    let m = skewed();
    let s0 = ParameterState::new(vec![0.2, 0.6], vec![0.4, 0.1]).unwrap();
    let r = alternate_compose(&m, &s0, 1e-2, 40).unwrap();
    for row in &r.rows {
        assert!(row.norm_rate.abs() < 1e-8, "t = {} rate {}", row.time, row.norm_rate);
    }
}

#[test]
fn skewed_family_fails_pair_check_and_flows_separate() {
    let m = skewed();
    let s0 = ParameterState::new(vec![1.0, 0.5], vec![0.5, 0.0]).unwrap();
    assert!(!dynamical_pair_check(&m, &s0, 1e-10).unwrap().iter().all(|&b| b));
    let mut f = s0.clone();
    let mut g = s0.clone();
    for _ in 0..50 {
        f = hamilton_flow_step(&m, &f, 1e-2).unwrap();
        g = flux_flow_step(&m, &g, 1e-2).unwrap();
    }
    assert!(max_gap(&f, &g) > 1e-6);
}

#[test]
fn phase_rate_identity() {
    // -hbar Im<psi|psi_dot> from a finite difference of the normalized
    // wavefunction equals zdot . j along the flux-flow velocity.
    let m = skewed();
    let s = ParameterState::new(vec![0.3, 0.7], vec![0.8, -0.2]).unwrap();
    let w = flux_velocity(&m, &s).unwrap();
    let g = m.geometry(&s).unwrap();
    let predicted: f64 = g.j_u.iter().chain(&g.j_v).zip(&w).map(|(j, w)| j * w).sum();
    let xs: Vec<f64> = (0..8001).map(|k| -8.0 + 16.0 * k as f64 / 8000.0).collect();
    let dx = xs[1] - xs[0];
    let h = 1e-5;
    let shift = |sign: f64| {
        let z: Vec<f64> = s.to_vec().iter().zip(&w).map(|(z, w)| z + sign * h * w).collect();
        m.wavefunction(&ParameterState::from_vec(&z, 0.0), &xs).unwrap()
    };
    let (plus, minus) = (shift(1.0), shift(-1.0));
    let psi = m.wavefunction(&s, &xs).unwrap();
    let inner: Complex64 = (0..xs.len())
        .map(|k| psi[k].conj() * (plus[k] - minus[k]) / (2.0 * h))
        .sum::<Complex64>()
        * dx;
    let direct = -m.hbar * inner.im;
    assert!((direct - predicted).abs() < 1e-8, "{direct} vs {predicted}");
}

#[test]
fn loop_action_is_invariant_for_the_harmonic_coherent_loop() {
    let m = coherent(PotentialSpec::harmonic(1.0));
    let lp = circle_loop(0.5, 0.2, 0.3, 128);
    let r = loop_action_invariant(&m, &lp, 1e-2, 1.0).unwrap();
    assert!(((r.after - r.before) / r.before).abs() < 1e-3);
    // The enclosed area of a circle of radius 0.3, up to the polygon deficit.
    let area = std::f64::consts::PI * 0.09;
    assert!((r.before.abs() - area).abs() < 1e-3 * area);
}

#[test]
fn mismatched_state_is_rejected() {
    let m = skewed();
    let s = ParameterState::new(vec![0.0], vec![0.0]).unwrap();
    assert!(m.geometry(&s).is_err());
    assert!(ParameterState::new(vec![0.0, 1.0], vec![0.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn analytic_gradients_match_finite_differences(
        q in -1.5f64..1.5,
        ar in 0.3f64..1.5,
        p in -1.5f64..1.5,
        ai in -0.5f64..0.5,
    ) {
        let m = skewed();
        let s = ParameterState::new(vec![q, ar], vec![p, ai]).unwrap();
        prop_assert!(m.gradient_discrepancy(&s, 1e-5).unwrap() < 1e-6);
        let two = FamilyModel::new(
            TrialFamily::TwoGaussianSum { alpha: 1.0, coefficients: [1.0, 0.6] },
            PotentialSpec::GaussianBarrier { height: 0.5, width: 1.0, center: 0.0 },
            1.0,
            1.0,
        ).unwrap();
        let s2 = ParameterState::new(vec![q - 2.0, q + 2.0], vec![p, -p]).unwrap();
        prop_assert!(two.gradient_discrepancy(&s2, 1e-5).unwrap() < 1e-6);
    }

    #[test]
    fn coherent_flow_is_time_reversible(q in -2.0f64..2.0, p in -2.0f64..2.0) {
        let m = coherent(PotentialSpec::harmonic(0.8));
        let s = ParameterState::new(vec![q], vec![p]).unwrap();
        let f = hamilton_flow_step(&m, &s, 0.05).unwrap();
        let b = hamilton_flow_step(&m, &f, -0.05).unwrap();
        prop_assert!(max_gap(&s, &b) < 1e-13);
    }
}
