//! Energy and flux flows in the parameter space of trial wavefunctions: a
//! coherent state, where both agree, and a skewed Gaussian, where they do not.

use oneworld::param_space::flows::{circle_loop, flux_flow_step};
use oneworld::param_space::*;
use oneworld::*;

fn main() -> Result<()> {
    let well = PotentialSpec::harmonic(1.0);
    let coherent = FamilyModel::new(TrialFamily::CoherentState { alpha: 1.0 }, well.clone(), 1.0, 1.0)?;
    let s0 = ParameterState::new(vec![1.0], vec![0.5])?;
    println!("coherent state pair check: {:?}", dynamical_pair_check(&coherent, &s0, 1e-10)?);
    let report = hamilton_flow(&coherent, &s0, 1e-2, 628)?;
    let e0 = report.rows[0].energy;
    let drift = report.rows.iter().map(|r| (r.energy - e0).abs()).fold(0.0, f64::max);
    let end = report.final_state().expect("rows");
    println!("one period: (q, p) = ({:.6}, {:.6}), energy drift {drift:.1e}", end.u[0], end.v[0]);

    let skewed = FamilyModel::new(TrialFamily::SkewedGaussian { skew: 0.3 }, well.clone(), 1.0, 1.0)?;
    let s1 = ParameterState::new(vec![1.0, 0.5], vec![0.5, 0.0])?;
    println!("skewed Gaussian pair check: {:?}", dynamical_pair_check(&skewed, &s1, 1e-10)?);
    let (mut f, mut g) = (s1.clone(), s1);
    for _ in 0..100 {
        f = hamilton_flow_step(&skewed, &f, 1e-2)?;
        g = flux_flow_step(&skewed, &g, 1e-2)?;
    }
    println!("after t = 1: energy flow u = {:.5?}, flux flow u = {:.5?}", f.u, g.u);
    let alt = alternate_compose(&skewed, &f, 1e-2, 50)?;
    let worst = alt.rows.iter().map(|r| r.norm_rate.abs()).fold(0.0, f64::max);
    println!("alternated flow: largest norm rate {worst:.1e}");

    let lp = circle_loop(0.5, 0.2, 0.3, 128);
    let t = loop_action_invariant(&coherent, &lp, 1e-2, std::f64::consts::TAU)?;
    println!("loop action {:.8} -> {:.8}", t.before, t.after);
    Ok(())
}
