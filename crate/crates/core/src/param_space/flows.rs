//! Energy flow F, flux flow G, their alternation and the diagnostics built
//! on them.

use std::path::Path;

use rayon::prelude::*;

use super::family::FamilyModel;
use super::linalg::solve_conditioned;
use super::ParameterState;
use crate::error::{Error, Result};
use crate::io::Table;

/// Condition number of omega above which the flux flow refuses to step.
pub const CONDITION_LIMIT: f64 = 1e12;
const MIDPOINT_TOL: f64 = 1e-14;
const MIDPOINT_MAX_ITER: usize = 200;

fn add_scaled(z: &[f64], dz: &[f64], h: f64) -> Vec<f64> {
    z.iter().zip(dz).map(|(a, b)| a + h * b).collect()
}

fn yoshida_weights() -> [f64; 3] {
    let c = 2f64.powf(1.0 / 3.0);
    let w1 = 1.0 / (2.0 - c);
    [w1, -c * w1, w1]
}

fn leapfrog(model: &FamilyModel, s: &mut ParameterState, h: f64) -> Result<()> {
    let g = model.geometry(s)?;
    for (v, du) in s.v.iter_mut().zip(&g.grad_u) {
        *v -= 0.5 * h * du;
    }
    let g = model.geometry(s)?;
    for (u, dv) in s.u.iter_mut().zip(&g.grad_v) {
        *u += h * dv;
    }
    let g = model.geometry(s)?;
    for (v, du) in s.v.iter_mut().zip(&g.grad_u) {
        *v -= 0.5 * h * du;
    }
    Ok(())
}

/// Solves z1 = z0 + dt X((z0 + z1)/2) by fixed-point iteration.
fn implicit_midpoint(
    z0: &[f64],
    t: f64,
    dt: f64,
    velocity: impl Fn(&ParameterState) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    let mut z1 = add_scaled(z0, &velocity(&ParameterState::from_vec(z0, t))?, dt);
    let scale = 1.0 + z0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for _ in 0..MIDPOINT_MAX_ITER {
        let mid: Vec<f64> = z0.iter().zip(&z1).map(|(a, b)| 0.5 * (a + b)).collect();
        let next = add_scaled(z0, &velocity(&ParameterState::from_vec(&mid, t + 0.5 * dt))?, dt);
        let change = next.iter().zip(&z1).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        z1 = next;
        if change <= MIDPOINT_TOL * scale {
            return Ok(z1);
        }
    }
    Err(Error::Instability(format!("implicit midpoint did not converge at t = {t}")))
}

/// One step of du/dt = dH/dv, dv/dt = -dH/du. Separable H uses a 4th-order
/// Yoshida composition of leapfrog, otherwise implicit midpoint. Negative
/// `dt` steps backwards; zero is the identity.
pub fn hamilton_flow_step(model: &FamilyModel, state: &ParameterState, dt: f64) -> Result<ParameterState> {
    model.family.validate(state)?;
    if dt == 0.0 {
        return Ok(state.clone());
    }
    if model.is_separable() {
        let mut s = state.clone();
        for w in yoshida_weights() {
            leapfrog(model, &mut s, w * dt)?;
        }
        s.time = state.time + dt;
        return Ok(s);
    }
    let z = implicit_midpoint(&state.to_vec(), state.time, dt, |s| Ok(model.geometry(s)?.hamilton_velocity()))?;
    Ok(ParameterState::from_vec(&z, state.time + dt))
}

/// Velocity of the flux flow: omega^-1 grad H.
pub fn flux_velocity(model: &FamilyModel, state: &ParameterState) -> Result<Vec<f64>> {
    let g = model.geometry(state)?;
    solve_conditioned(&g.omega, &g.gradient(), CONDITION_LIMIT)
}

fn correction_step(model: &FamilyModel, state: &ParameterState, h: f64) -> Result<ParameterState> {
    let corr = |s: &ParameterState| -> Result<Vec<f64>> {
        let g = model.geometry(s)?;
        let w = solve_conditioned(&g.omega, &g.gradient(), CONDITION_LIMIT)?;
        Ok(w.iter().zip(g.hamilton_velocity()).map(|(a, b)| a - b).collect())
    };
    let z = state.to_vec();
    let c0 = corr(state)?;
    let mid = ParameterState::from_vec(&add_scaled(&z, &c0, 0.5 * h), state.time);
    let c1 = corr(&mid)?;
    Ok(ParameterState::from_vec(&add_scaled(&z, &c1, h), state.time))
}

/// One step of the flux flow, split as C(dt/2) F(dt) C(dt/2) where C is
/// the velocity correction omega^-1 grad H - J grad H. For dynamical pairs
/// C vanishes and the step equals [`hamilton_flow_step`].
pub fn flux_flow_step(model: &FamilyModel, state: &ParameterState, dt: f64) -> Result<ParameterState> {
    model.family.validate(state)?;
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let a = correction_step(model, state, 0.5 * dt)?;
    let b = hamilton_flow_step(model, &a, dt)?;
    let mut c = correction_step(model, &b, 0.5 * dt)?;
    c.time = state.time + dt;
    Ok(c)
}

/// det [[dH/du_i, dH/dv_i], [-dv_i/dt, du_i/dt]] per pair for a given
/// parameter velocity (du/dt, dv/dt).
pub fn wellposedness_determinant_with(
    model: &FamilyModel,
    state: &ParameterState,
    velocity: &[f64],
) -> Result<Vec<f64>> {
    let g = model.geometry(state)?;
    let n = state.pairs();
    if velocity.len() != 2 * n {
        return Err(Error::InvalidInput(format!("velocity needs {} components", 2 * n)));
    }
    Ok((0..n).map(|i| g.grad_u[i] * velocity[i] + g.grad_v[i] * velocity[n + i]).collect())
}

/// Per-pair determinant along the flux-flow velocity.
pub fn wellposedness_determinant(model: &FamilyModel, state: &ParameterState) -> Result<Vec<f64>> {
    let w = flux_velocity(model, state)?;
    wellposedness_determinant_with(model, state, &w)
}

/// Pair i passes when |j_u - v| <= tol and |j_v| <= tol.
pub fn dynamical_pair_check(model: &FamilyModel, state: &ParameterState, tol: f64) -> Result<Vec<bool>> {
    let g = model.geometry(state)?;
    Ok((0..state.pairs())
        .map(|i| (g.j_u[i] - state.v[i]).abs() <= tol && g.j_v[i].abs() <= tol)
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowRow {
    pub time: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub energy: f64,
    /// 2 Re<psi|psi_dot> along the flux-flow velocity.
    pub norm_rate: f64,
    pub det_pair: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct FlowReport {
    pub rows: Vec<FlowRow>,
}

impl FlowReport {
    pub fn final_state(&self) -> Option<ParameterState> {
        self.rows.last().map(|r| ParameterState { u: r.u.clone(), v: r.v.clone(), time: r.time })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let n = self.rows.first().map(|r| r.u.len()).unwrap_or(0);
        let mut header = vec!["time".to_string()];
        header.extend((0..n).map(|i| format!("u{i}")));
        header.extend((0..n).map(|i| format!("v{i}")));
        header.push("energy".into());
        header.push("norm_rate".into());
        header.extend((0..n).map(|i| format!("det_pair_{i}")));
        let mut t = Table::create(path, &header)?;
        for r in &self.rows {
            let mut cells = vec![format!("{:e}", r.time)];
            cells.extend(r.u.iter().chain(&r.v).map(|x| format!("{x:e}")));
            cells.push(format!("{:e}", r.energy));
            cells.push(format!("{:e}", r.norm_rate));
            cells.extend(r.det_pair.iter().map(|x| format!("{x:e}")));
            t.row(&cells)?;
        }
        t.finish()
    }
}

fn row(model: &FamilyModel, s: &ParameterState) -> Result<FlowRow> {
    let g = model.geometry(s)?;
    let w = solve_conditioned(&g.omega, &g.gradient(), CONDITION_LIMIT)?;
    let norm_rate = 2.0 * g.overlap.iter().zip(&w).map(|(o, w)| o.re * w).sum::<f64>();
    let det_pair = wellposedness_determinant_with(model, s, &w)?;
    Ok(FlowRow { time: s.time, u: s.u.clone(), v: s.v.clone(), energy: g.energy, norm_rate, det_pair })
}

/// `n` steps of the pure energy flow, one row per step.
pub fn hamilton_flow(model: &FamilyModel, state: &ParameterState, dt: f64, n: usize) -> Result<FlowReport> {
    model.validate_gradients(state)?;
    let mut s = state.clone();
    let mut rows = vec![row(model, &s)?];
    for _ in 0..n {
        s = hamilton_flow_step(model, &s, dt)?;
        rows.push(row(model, &s)?);
    }
    Ok(FlowReport { rows })
}

/// `n` macro-steps of F(dt/2) followed by G(dt/2).
pub fn alternate_compose(model: &FamilyModel, state: &ParameterState, dt: f64, n: usize) -> Result<FlowReport> {
    model.validate_gradients(state)?;
    let mut s = state.clone();
    let mut rows = vec![row(model, &s)?];
    for _ in 0..n {
        s = hamilton_flow_step(model, &s, 0.5 * dt)?;
        s = flux_flow_step(model, &s, 0.5 * dt)?;
        rows.push(row(model, &s)?);
    }
    Ok(FlowReport { rows })
}

/// Trapezoid sum of v . du around a closed polygon (first vertex = last).
pub fn loop_action(vertices: &[ParameterState]) -> Result<f64> {
    let (first, last) = match (vertices.first(), vertices.last()) {
        (Some(f), Some(l)) if vertices.len() >= 2 => (f, l),
        _ => return Err(Error::InvalidInput("a loop needs at least two vertices".into())),
    };
    if first.u != last.u || first.v != last.v {
        return Err(Error::InvalidInput("loop is not closed: first and last vertices differ".into()));
    }
    Ok(vertices
        .windows(2)
        .map(|w| {
            (0..w[0].pairs()).map(|i| 0.5 * (w[0].v[i] + w[1].v[i]) * (w[1].u[i] - w[0].u[i])).sum::<f64>()
        })
        .sum())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopTransport {
    pub before: f64,
    pub after: f64,
    pub transported: Vec<ParameterState>,
}

/// Carries every vertex by the alternated flow for time `t_total`.
pub fn loop_action_invariant(
    model: &FamilyModel,
    vertices: &[ParameterState],
    dt: f64,
    t_total: f64,
) -> Result<LoopTransport> {
    let before = loop_action(vertices)?;
    let n = (t_total / dt).round() as usize;
    let transported: Vec<ParameterState> = vertices
        .par_iter()
        .map(|v| {
            let mut s = v.clone();
            for _ in 0..n {
                s = hamilton_flow_step(model, &s, 0.5 * dt)?;
                s = flux_flow_step(model, &s, 0.5 * dt)?;
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let after = loop_action(&transported)?;
    Ok(LoopTransport { before, after, transported })
}

/// Loop snapshot as CSV `vertex_id,u...,v...`.
pub fn write_loop(path: &Path, vertices: &[ParameterState]) -> Result<()> {
    let n = vertices.first().map(|s| s.pairs()).unwrap_or(0);
    let mut header = vec!["vertex_id".to_string()];
    header.extend((0..n).map(|i| format!("u{i}")));
    header.extend((0..n).map(|i| format!("v{i}")));
    let mut t = Table::create(path, &header)?;
    for (k, s) in vertices.iter().enumerate() {
        let mut cells = vec![k.to_string()];
        cells.extend(s.u.iter().chain(&s.v).map(|x| format!("{x:e}")));
        t.row(&cells)?;
    }
    t.finish()
}

/// Closed circle of `n` segments around (q0, p0) with radius r.
pub fn circle_loop(q0: f64, p0: f64, r: f64, n: usize) -> Vec<ParameterState> {
    let mut pts: Vec<ParameterState> = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            ParameterState { u: vec![q0 + r * th.cos()], v: vec![p0 + r * th.sin()], time: 0.0 }
        })
        .collect();
    if let Some(f) = pts.first().cloned() {
        pts.push(f);
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param_space::TrialFamily;
    use crate::potential::PotentialSpec;

    fn harmonic() -> FamilyModel {
        FamilyModel::new(TrialFamily::CoherentState { alpha: 1.0 }, PotentialSpec::harmonic(1.0), 1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_dt_and_empty_loop() {
        let m = harmonic();
        let s = ParameterState::new(vec![1.0], vec![0.0]).unwrap();
        assert_eq!(flux_flow_step(&m, &s, 0.0).unwrap(), s);
        let r = alternate_compose(&m, &s, 1e-3, 0).unwrap();
        assert_eq!(r.final_state().unwrap(), s);
        let lp = circle_loop(0.5, 0.0, 0.0, 16);
        let t = loop_action_invariant(&m, &lp, 1e-2, 1.0).unwrap();
        assert_eq!((t.before, t.after), (0.0, 0.0));
    }

    #[test]
    fn open_loop_is_rejected() {
        let mut lp = circle_loop(0.0, 0.0, 1.0, 8);
        lp.pop();
        assert!(loop_action(&lp).is_err());
    }
}
