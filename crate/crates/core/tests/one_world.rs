use num_complex::Complex64;
use oneworld::observables::local_velocity;
use oneworld::one_world::classical::trajectory_energy;
use oneworld::one_world::feynman_kac::{feynman_kac_estimate, heat_kernel, FeynmanKacSettings};
use oneworld::one_world::sequence::AnalyticDrift;
use oneworld::one_world::stats::mean_and_stderr;
use oneworld::one_world::wiener::{stream_rng, Purpose};
use oneworld::one_world::*;
use oneworld::*;
use proptest::prelude::*;

fn zero_drift() -> AnalyticDrift<impl Fn(&[f64], f64) -> Vec<f64> + Sync> {
    AnalyticDrift { f: |_: &[f64], _| vec![0.0], dims: 1, span: (0.0, f64::INFINITY) }
}

#[test]
fn wiener_increments_have_variance_two_d_dt() {
    let drift = zero_drift();
    let wiener = WienerConfig { diffusion_d: 0.5, seed: 17 };
    let dt = 0.01;
    let mut squares = Vec::with_capacity(1_000_000);
    for stream in 0..100u64 {
        let mut rng = stream_rng(wiener.seed, Purpose::Noise, stream);
        let mut s = PathState::new(vec![0.0], 0.0);
        for _ in 0..10_000 {
            let next = step_path(&s, &drift, dt, &wiener, &mut rng).unwrap();
            squares.push((next.position[0] - s.position[0]).powi(2));
            s = next;
        }
    }
    let (mean, se) = mean_and_stderr(&squares);
    let expect = 2.0 * wiener.diffusion_d * dt;
    assert!((mean - expect).abs() < 3.0 * se, "{mean} vs {expect} (se {se})");
}

#[test]
fn quantum_diffusion_constant() {
    let w = WienerConfig::quantum(0.3, 2.0, 0);
    assert_eq!(w.diffusion_d, 0.075);
    assert_eq!(w.increment_std(2.0), 0.3f64.sqrt());
}

#[test]
fn variance_per_step_is_independent_of_dt() {
    // Ornstein-Uhlenbeck drift v = -x: <dX^2>/dt = 2D + O(dt), so the
    // ratio at two small steps agrees within the sampling error.
    let drift = AnalyticDrift { f: |x: &[f64], _| vec![-x[0]], dims: 1, span: (0.0, f64::INFINITY) };
    let wiener = WienerConfig { diffusion_d: 0.5, seed: 5 };
    let ratio = |dt: f64| {
        let mut r = Vec::new();
        for stream in 0..200u64 {
            let mut rng = stream_rng(wiener.seed, Purpose::Noise, stream);
            let mut s = PathState::new(vec![0.3], 0.0);
            for _ in 0..1000 {
                let next = step_path(&s, &drift, dt, &wiener, &mut rng).unwrap();
                r.push((next.position[0] - s.position[0]).powi(2) / dt);
                s = next;
            }
        }
        mean_and_stderr(&r)
    };
    let (a, sa) = ratio(1e-3);
    let (b, sb) = ratio(1e-4);
    assert!((a - b).abs() < 3.0 * (sa * sa + sb * sb).sqrt(), "{a} vs {b}");
    assert!((b - 1.0).abs() < 3.0 * sb);
}

#[test]
fn ensemble_variance_exceeds_the_grid_by_hbar_t_over_m() {
    // Broad rest Gaussian, t far below the spreading time 2 m sigma^2 / hbar = 50.
    let grid = Grid::line(-60.0, 60.0, 1024).unwrap();
    let f0 = init_coherent_state(&grid, &[0.0], &[0.0], &[Complex64::new(0.01, 0.0)], 1.0, 1.0).unwrap();
    let dt = 1e-2;
    let seq = FieldSequence::record(&f0, &PotentialSpec::Free, dt, 200, 1, None).unwrap();
    let n = 10_000;
    let starts = sample_initial_positions(&f0, n, 12);
    let ens = sample_ensemble(&seq, &starts, dt, 200, &WienerConfig::quantum(1.0, 1.0, 12), 200).unwrap();
    let x0: Vec<f64> = ens.iter().map(|p| p.positions[0][0]).collect();
    let x1: Vec<f64> = ens.iter().map(|p| p.final_position()[0]).collect();
    let (m0, m1) = (x0.iter().sum::<f64>() / n as f64, x1.iter().sum::<f64>() / n as f64);
    let growth: Vec<f64> = x0.iter().zip(&x1).map(|(a, b)| (b - m1).powi(2) - (a - m0).powi(2)).collect();
    let (g, se) = mean_and_stderr(&growth);
    let var = |f: &SchrodingerField| {
        let m = f.position_mean()[0];
        grid.axis(0).coords().iter().zip(f.density()).map(|(x, r)| (x - m).powi(2) * r).sum::<f64>() * grid.cell_volume()
    };
    let grid_growth = var(seq.fields.last().unwrap()) - var(&f0);
    let excess = g - grid_growth;
    assert!((excess - 2.0).abs() < 3.0 * se, "excess {excess} (se {se})");
}

#[test]
fn ensembles_are_bitwise_reproducible_across_thread_counts() {
    let drift = AnalyticDrift { f: |x: &[f64], t| vec![-x[0] * t.cos()], dims: 1, span: (0.0, 10.0) };
    let wiener = WienerConfig { diffusion_d: 0.5, seed: 99 };
    let starts: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64 * 0.01]).collect();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_ensemble(&drift, &starts, 1e-2, 200, &wiener, 7).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a, b);
    let single = oneworld::one_world::paths::integrate_path(&starts[5], 0.0, &drift, 1e-2, 200, &wiener, 5, 7).unwrap();
    assert_eq!(single, a[5]);
}

#[test]
fn empty_ensemble() {
    let drift = zero_drift();
    let w = WienerConfig { diffusion_d: 0.5, seed: 1 };
    assert!(sample_ensemble(&drift, &[], 1e-2, 10, &w, 1).unwrap().is_empty());
}

#[test]
fn paths_leaving_the_domain_are_truncated() {
    let grid = Grid::line(-6.0, 6.0, 128).unwrap();
    // Harmonic ground state: stationary, so the grid run stays inside.
    let f = init_coherent_state(&grid, &[0.0], &[0.0], &[Complex64::new(0.5, 0.0)], 1.0, 1.0).unwrap();
    let seq = FieldSequence::record(&f, &PotentialSpec::harmonic(1.0), 1e-3, 2000, 20, None).unwrap();
    let w = WienerConfig::quantum(1.0, 1.0, 3);
    let starts = vec![vec![5.9]; 8];
    let ens = sample_ensemble(&seq, &starts, 1e-3, 2000, &w, 100).unwrap();
    let exited: Vec<_> = ens.iter().filter(|p| p.status == PathStatus::Exited).collect();
    assert!(exited.len() >= 6, "{} of 8 exited", exited.len());
    for p in exited {
        assert!(p.times.windows(2).all(|t| t[1] > t[0]));
        assert!(*p.times.last().unwrap() < 2.0);
        assert!(!grid.contains(p.final_position()));
        assert_eq!(p.flag(), "exited");
    }
}

#[test]
fn drift_matches_local_velocity_at_snapshots() {
    let grid = Grid::line(-15.0, 15.0, 256).unwrap();
    let f = init_coherent_state(&grid, &[-1.0], &[0.8], &[Complex64::new(0.5, 0.2)], 1.0, 1.0).unwrap();
    let seq = FieldSequence::record(&f, &PotentialSpec::harmonic(0.7), 1e-2, 100, 10, None).unwrap();
    let xs = grid.axis(0).coords();
    for k in [0usize, 4, 10] {
        let v = local_velocity(&seq.fields[k]);
        let t = seq.fields[k].time;
        for i in (100..156).step_by(5) {
            let d = seq.drift_velocity(&[xs[i]], t).unwrap();
            assert!(!d.masked);
            assert!((d.v[0] - v.values[0][i]).abs() < 1e-6, "x = {} t = {t}", xs[i]);
        }
    }
    let mid = seq.drift_velocity(&[xs[128]], 0.05).unwrap().v[0];
    let (a, b) = (local_velocity(&seq.fields[0]).values[0][128], local_velocity(&seq.fields[1]).values[0][128]);
    assert!((mid - 0.5 * (a + b)).abs() < 1e-12);
}

#[test]
fn classical_trajectory_limits() {
    let v = PotentialSpec::harmonic(1.0);
    let dt = 2.5e-4;
    let n = (20.0 * std::f64::consts::PI / dt) as usize;
    let path = classical_limit_trajectory(&[1.0], &[0.0], &v, 1.0, dt, n);
    for (t, q) in path.times.iter().zip(&path.positions).step_by(3989) {
        assert!((q[0] - t.cos()).abs() < 1e-6, "t = {t}");
    }
    let long = classical_limit_trajectory(&[1.0], &[0.3], &v, 1.0, 1e-2, 100_000);
    let e = trajectory_energy(&long, &v, 1.0);
    let drift = e.iter().map(|x| (x - e[0]).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-4 * e[0] && drift < 1e-4);
    let free = classical_limit_trajectory(&[0.5], &[-2.0], &PotentialSpec::Free, 2.0, 0.25, 8);
    for (t, q) in free.times.iter().zip(&free.positions) {
        assert_eq!(q[0], 0.5 - t);
    }
}

#[test]
fn feynman_kac_free_and_constant_potentials() {
    let s = FeynmanKacSettings { lambda: 1.0, diffusion_d: 0.5, t: 0.8, x_source: 0.2, n_samples: 64, bridge_steps: 20, seed: 4 };
    let free = feynman_kac_estimate(&PotentialSpec::Free, &s, 1.1, 0).unwrap();
    assert!((free.value - heat_kernel(0.9, 0.5, 0.8)).abs() < 1e-15);
    assert_eq!(free.std_error, 0.0);
    let flat = PotentialSpec::Sampled { values: vec![0.7; 16], min: -50.0, max: 50.0 };
    let c = feynman_kac_estimate(&flat, &s, 1.1, 0).unwrap();
    let expect = heat_kernel(0.9, 0.5, 0.8) * (-0.7f64 * 0.8).exp();
    assert!((c.value - expect).abs() < 1e-12 * expect, "{} vs {expect}", c.value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn same_seed_and_stream_give_identical_paths(seed in any::<u64>(), stream in 0u64..1000, x0 in -2.0f64..2.0) {
        let drift = AnalyticDrift { f: |x: &[f64], _| vec![x[0].sin()], dims: 1, span: (0.0, f64::INFINITY) };
        let w = WienerConfig { diffusion_d: 0.25, seed };
        let run = || oneworld::one_world::paths::integrate_path(&[x0], 0.0, &drift, 1e-2, 50, &w, stream, 1).unwrap();
        let (a, b) = (run(), run());
        prop_assert_eq!(a.positions.iter().flatten().map(|x| x.to_bits()).collect::<Vec<_>>(),
                        b.positions.iter().flatten().map(|x| x.to_bits()).collect::<Vec<_>>());
    }
}
