//! Euler-Maruyama one-world paths and ensembles.

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sequence::{DriftField, FieldSequence};
use super::stats::PiecewiseLinearDensity;
use super::wiener::{stream_rng, Purpose, WienerConfig};
use crate::error::{Error, Result};
use crate::field::SchrodingerField;
use crate::io::{header, Table};
use crate::potential::PotentialSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStatus {
    Active,
    /// Left the grid extent; the last recorded position is the exit point.
    Exited,
    /// Entered an opaque region (slit wall).
    Absorbed,
}

impl PathStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PathStatus::Active => "active",
            PathStatus::Exited => "exited",
            PathStatus::Absorbed => "absorbed",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathState {
    pub position: Vec<f64>,
    pub time: f64,
    pub status: PathStatus,
    /// Steps taken with a masked (low-density) drift.
    pub masked_steps: u64,
}

impl PathState {
    pub fn new(position: Vec<f64>, time: f64) -> Self {
        Self { position, time, status: PathStatus::Active, masked_steps: 0 }
    }

    pub fn flag(&self) -> &'static str {
        if self.status == PathStatus::Active && self.masked_steps > 0 {
            "low_density"
        } else {
            self.status.as_str()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OneWorldPath {
    pub stream_id: u64,
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub momenta: Option<Vec<Vec<f64>>>,
    pub status: PathStatus,
    pub masked_steps: u64,
}

impl OneWorldPath {
    pub fn final_position(&self) -> &[f64] {
        self.positions.last().expect("nonempty path")
    }

    pub fn flag(&self) -> &'static str {
        if self.status == PathStatus::Active && self.masked_steps > 0 {
            "low_density"
        } else {
            self.status.as_str()
        }
    }
}

/// One Euler-Maruyama step X <- X + v dt + sqrt(2 D dt) N(0, 1).
pub fn step_path(
    state: &PathState,
    drift: &dyn DriftField,
    dt: f64,
    wiener: &WienerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<PathState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidTimeStep(format!("dt = {dt}")));
    }
    if state.status != PathStatus::Active {
        return Ok(state.clone());
    }
    let d = drift.drift(&state.position, state.time)?;
    let sigma = wiener.increment_std(dt);
    let mut next = state.clone();
    for (x, v) in next.position.iter_mut().zip(&d.v) {
        let n: f64 = rng.sample(StandardNormal);
        *x += v * dt + sigma * n;
    }
    next.time += dt;
    if d.masked {
        next.masked_steps += 1;
    }
    if !drift.contains(&next.position) {
        next.status = PathStatus::Exited;
    }
    Ok(next)
}

/// Positions drawn from rho by inverse CDF on the grid; path `i` uses its own
/// stream so that the draw does not depend on how many paths are sampled.
pub fn sample_initial_positions(field: &SchrodingerField, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let grid = &field.grid;
    let rho = field.density();
    match grid.dims() {
        1 => {
            let a = grid.axis(0);
            let d = PiecewiseLinearDensity::new(a.min, a.spacing(), rho);
            (0..n)
                .map(|i| {
                    let mut rng = stream_rng(seed, Purpose::Initial, i as u64);
                    vec![d.sample(rng.gen::<f64>())]
                })
                .collect()
        }
        _ => {
            let (ax, ay) = (grid.axis(0), grid.axis(1));
            let ny = ay.n;
            let row_mass: Vec<f64> = (0..ax.n)
                .map(|i| {
                    let r = &rho[i * ny..(i + 1) * ny];
                    PiecewiseLinearDensity::new(ay.min, ay.spacing(), r.to_vec()).total()
                })
                .collect();
            let marginal = PiecewiseLinearDensity::new(ax.min, ax.spacing(), row_mass);
            (0..n)
                .map(|i| {
                    let mut rng = stream_rng(seed, Purpose::Initial, i as u64);
                    let x = marginal.sample(rng.gen::<f64>());
                    let s = ((x - ax.min) / ax.spacing()).max(0.0);
                    let k = (s.floor() as usize).min(ax.n - 2);
                    let w = s - k as f64;
                    let row: Vec<f64> = (0..ny)
                        .map(|j| (1.0 - w) * rho[k * ny + j] + w * rho[(k + 1) * ny + j])
                        .collect();
                    let y = PiecewiseLinearDensity::new(ay.min, ay.spacing(), row).sample(rng.gen::<f64>());
                    vec![x, y]
                })
                .collect()
        }
    }
}

/// Integrates one path for `n_steps`, recording every `record_every` steps
/// and at termination.
pub fn integrate_path(
    x0: &[f64],
    t0: f64,
    drift: &dyn DriftField,
    dt: f64,
    n_steps: usize,
    wiener: &WienerConfig,
    stream_id: u64,
    record_every: usize,
) -> Result<OneWorldPath> {
    let mut rng = stream_rng(wiener.seed, Purpose::Noise, stream_id);
    let mut state = PathState::new(x0.to_vec(), t0);
    let mut times = vec![t0];
    let mut positions = vec![x0.to_vec()];
    let every = record_every.max(1);
    for k in 1..=n_steps {
        state = step_path(&state, drift, dt, wiener, &mut rng)?;
        let done = state.status != PathStatus::Active;
        if k % every == 0 || k == n_steps || done {
            times.push(state.time);
            positions.push(state.position.clone());
        }
        if done {
            break;
        }
    }
    Ok(OneWorldPath {
        stream_id,
        times,
        positions,
        momenta: None,
        status: state.status,
        masked_steps: state.masked_steps,
    })
}

/// Independent paths from the given starting points, stream id = index.
pub fn sample_ensemble(
    drift: &dyn DriftField,
    initial_positions: &[Vec<f64>],
    dt: f64,
    n_steps: usize,
    wiener: &WienerConfig,
    record_every: usize,
) -> Result<Vec<OneWorldPath>> {
    wiener.validate()?;
    let t0 = drift.span().0;
    initial_positions
        .par_iter()
        .enumerate()
        .map(|(i, x0)| integrate_path(x0, t0, drift, dt, n_steps, wiener, i as u64, record_every))
        .collect()
}

/// Ensemble CSV `stream_id,time,x[,y],flag`. Rows before a path's last one
/// carry `active`; the last row carries the path's final flag.
pub fn write_ensemble(path: &Path, paths: &[OneWorldPath]) -> Result<()> {
    let dims = paths.first().map(|p| p.positions[0].len()).unwrap_or(1);
    let mut cols = vec!["stream_id", "time", "x"];
    if dims == 2 {
        cols.push("y");
    }
    cols.push("flag");
    let mut t = Table::create(path, &header(&cols))?;
    for p in paths {
        let last = p.times.len() - 1;
        for (k, (time, x)) in p.times.iter().zip(&p.positions).enumerate() {
            let mut row = vec![p.stream_id.to_string(), format!("{time:e}")];
            row.extend(x.iter().map(|v| format!("{v:e}")));
            row.push(if k == last { p.flag() } else { "active" }.to_string());
            t.row(&row)?;
        }
    }
    t.finish()
}

/// Path X_t together with the momentum-density record P, where
/// dP = -rho(X) grad V(X) dt and P(0) = m j(X_0). P is never fed back into X.
pub fn integrate_quantum_hamilton(
    x0: &[f64],
    sequence: &FieldSequence,
    potential: &PotentialSpec,
    dt: f64,
    n: usize,
    wiener: &WienerConfig,
    stream_id: u64,
) -> Result<OneWorldPath> {
    let mass = sequence.mass();
    let t0 = sequence.span().0;
    let mut rng = stream_rng(wiener.seed, Purpose::Noise, stream_id);
    let mut state = PathState::new(x0.to_vec(), t0);
    let rho0 = sequence.density_at(x0, t0)?;
    let v0 = sequence.drift_velocity(x0, t0)?;
    let mut p: Vec<f64> = v0.v.iter().map(|v| mass * rho0 * v).collect();
    let mut times = vec![t0];
    let mut positions = vec![x0.to_vec()];
    let mut momenta = vec![p.clone()];
    for _ in 0..n {
        let rho = sequence.density_at(&state.position, state.time)?;
        let g = potential.gradient(&state.position, mass);
        let next = step_path(&state, sequence, dt, wiener, &mut rng)?;
        for (pi, gi) in p.iter_mut().zip(&g) {
            *pi -= rho * gi * dt;
        }
        state = next;
        times.push(state.time);
        positions.push(state.position.clone());
        momenta.push(p.clone());
        if state.status != PathStatus::Active {
            break;
        }
    }
    Ok(OneWorldPath {
        stream_id,
        times,
        positions,
        momenta: Some(momenta),
        status: state.status,
        masked_steps: state.masked_steps,
    })
}
