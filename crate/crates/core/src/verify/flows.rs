use std::f64::consts::PI;

use super::Outcome;
use crate::error::Result;
use crate::param_space::flows::{circle_loop, loop_action_invariant};
use crate::param_space::{alternate_compose, dynamical_pair_check, hamilton_flow, FamilyModel, ParameterState, TrialFamily};
use crate::potential::PotentialSpec;

/// Alternated and pure flows must differ by more than this on the skewed family.
const MEASURABLE: f64 = 1e-6;

pub fn parameter_flows() -> Result<Outcome> {
    let harmonic = PotentialSpec::harmonic(1.0);
    let coherent = FamilyModel::new(TrialFamily::CoherentState { alpha: 1.0 }, harmonic.clone(), 1.0, 1.0)?;
    let s = ParameterState::new(vec![1.0], vec![0.5])?;
    let n = 62_830;
    let report = hamilton_flow(&coherent, &s, 10.0 * 2.0 * PI / n as f64, n)?;
    let e0 = report.rows[0].energy;
    let drift = report.rows.iter().map(|r| (r.energy - e0).abs()).fold(0.0, f64::max);
    let coherent_pairs = dynamical_pair_check(&coherent, &s, 1e-10)?;

    let skewed = FamilyModel::new(TrialFamily::SkewedGaussian { skew: 0.3 }, harmonic, 1.0, 1.0)?;
    let ss = ParameterState::new(vec![1.0, 0.5], vec![0.5, 0.0])?;
    let skewed_pairs = dynamical_pair_check(&skewed, &ss, 1e-10)?;
    let pure = hamilton_flow(&skewed, &ss, 1e-2, 300)?;
    let alt = alternate_compose(&skewed, &ss, 1e-2, 300)?;
    let gap = pure
        .rows
        .iter()
        .zip(&alt.rows)
        .flat_map(|(a, b)| a.u.iter().zip(&b.u).chain(a.v.iter().zip(&b.v)).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    let coherent_ok = coherent_pairs.iter().all(|&p| p);
    let skewed_fails = skewed_pairs.iter().any(|&p| !p);
    Ok(Outcome::new(
        drift < 1e-8 && coherent_ok && skewed_fails && gap > MEASURABLE,
        format!(
            "coherent <H> drift {drift:.2e} over 10 periods (< 1e-8), pair check {coherent_pairs:?}; skewed pair check {skewed_pairs:?}, alternated vs pure flow gap {gap:.2e} (> {MEASURABLE:e})"
        ),
    ))
}

pub fn loop_invariance() -> Result<Outcome> {
    let model = FamilyModel::new(TrialFamily::CoherentState { alpha: 1.0 }, PotentialSpec::harmonic(1.0), 1.0, 1.0)?;
    let lp = circle_loop(0.5, 0.2, 0.3, 256);
    let t = loop_action_invariant(&model, &lp, 1e-2, 2.0 * PI)?;
    let rel = (t.after - t.before).abs() / t.before.abs();
    Ok(Outcome::new(
        rel < 1e-3,
        format!("loop action {:.6} -> {:.6}, relative change {rel:.2e} (< 1e-3)", t.before, t.after),
    ))
}
