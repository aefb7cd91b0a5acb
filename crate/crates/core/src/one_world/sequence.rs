//! Stored field snapshots and the interpolated drift velocity.

use crate::error::{Error, Result};
use crate::field::SchrodingerField;
use crate::grid::Grid;
use crate::observables::{Masked, Observer};
use crate::potential::{catmull_rom, PotentialSpec};
use crate::propagate::{AbsorbingBoundary, Propagator};

/// Drift at a point; `masked` is set when any interpolation node lies below
/// the density floor, in which case `v` is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Drift {
    pub v: Vec<f64>,
    pub masked: bool,
}

pub trait DriftField: Sync {
    fn dims(&self) -> usize;
    fn drift(&self, x: &[f64], t: f64) -> Result<Drift>;
    fn span(&self) -> (f64, f64);
    /// Whether `x` lies inside the domain the drift is defined on.
    fn contains(&self, x: &[f64]) -> bool;
}

/// Cubic (Catmull-Rom) interpolation of a masked vector field on a periodic
/// grid; `None` when a node in the stencil is masked.
pub fn interpolate_masked(grid: &Grid, field: &Masked<Vec<Vec<f64>>>, x: &[f64]) -> Option<Vec<f64>> {
    let dims = grid.dims();
    let stencil = |a: usize| -> (isize, f64) {
        let s = grid.axis(a).fractional_index(x[a]);
        let i = s.floor();
        (i as isize, s - i)
    };
    let wrap = |a: usize, i: isize| -> usize { i.rem_euclid(grid.axis(a).n as isize) as usize };
    match dims {
        1 => {
            let (i0, t) = stencil(0);
            let idx: [usize; 4] = std::array::from_fn(|o| wrap(0, i0 + o as isize - 1));
            if idx.iter().any(|&i| !field.mask[i]) {
                return None;
            }
            Some(
                field
                    .values
                    .iter()
                    .map(|v| catmull_rom(v[idx[0]], v[idx[1]], v[idx[2]], v[idx[3]], t))
                    .collect(),
            )
        }
        _ => {
            let ny = grid.axis(1).n;
            let (ix, tx) = stencil(0);
            let (iy, ty) = stencil(1);
            let xs: [usize; 4] = std::array::from_fn(|o| wrap(0, ix + o as isize - 1));
            let ys: [usize; 4] = std::array::from_fn(|o| wrap(1, iy + o as isize - 1));
            for &a in &xs {
                for &b in &ys {
                    if !field.mask[a * ny + b] {
                        return None;
                    }
                }
            }
            let mut out = Vec::with_capacity(2);
            for comp in &field.values {
                let mut col = [0.0; 4];
                for (k, &a) in xs.iter().enumerate() {
                    let r = a * ny;
                    col[k] = catmull_rom(comp[r + ys[0]], comp[r + ys[1]], comp[r + ys[2]], comp[r + ys[3]], ty);
                }
                out.push(catmull_rom(col[0], col[1], col[2], col[3], tx));
            }
            Some(out)
        }
    }
}

/// Snapshots at a uniform save interval with their precomputed velocity
/// fields. Between snapshots the drift is linear in time.
pub struct FieldSequence {
    pub fields: Vec<SchrodingerField>,
    velocities: Vec<Masked<Vec<Vec<f64>>>>,
    densities: Vec<Masked<Vec<Vec<f64>>>>,
    save_dt: f64,
}

impl FieldSequence {
    pub fn from_fields(fields: Vec<SchrodingerField>) -> Result<Self> {
        if fields.len() < 2 {
            return Err(Error::InvalidInput("a field sequence needs at least two snapshots".into()));
        }
        let grid = fields[0].grid.clone();
        let save_dt = fields[1].time - fields[0].time;
        if !(save_dt > 0.0) {
            return Err(Error::InvalidInput("snapshot times must increase".into()));
        }
        for (k, f) in fields.iter().enumerate() {
            grid.same_as(&f.grid)?;
            let expect = fields[0].time + k as f64 * save_dt;
            if (f.time - expect).abs() > 1e-9 * save_dt.max(1.0) {
                return Err(Error::InvalidInput(format!("snapshot {k} at t = {} breaks uniform spacing", f.time)));
            }
        }
        let mut obs = Observer::new(&grid);
        let velocities = fields.iter().map(|f| obs.local_velocity(f)).collect();
        let densities = fields
            .iter()
            .map(|f| Masked { values: vec![f.density()], mask: vec![true; grid.len()] })
            .collect();
        Ok(Self { fields, velocities, densities, save_dt })
    }

    /// Propagates `initial` and keeps every `save_every`-th field.
    pub fn record(
        initial: &SchrodingerField,
        potential: &PotentialSpec,
        dt: f64,
        n_steps: usize,
        save_every: usize,
        absorber: Option<AbsorbingBoundary>,
    ) -> Result<Self> {
        if save_every == 0 || n_steps % save_every != 0 {
            return Err(Error::InvalidInput(format!(
                "n_steps = {n_steps} must be a positive multiple of save_every = {save_every}"
            )));
        }
        let mut prop = Propagator::new(&initial.grid, potential, dt, initial.hbar, initial.mass, absorber)?;
        let mut fields = vec![initial.clone()];
        let mut current = initial.clone();
        for _ in 0..n_steps / save_every {
            current = prop.run_complex(&current, save_every)?;
            fields.push(current.clone());
        }
        Self::from_fields(fields)
    }

    pub fn grid(&self) -> &Grid {
        &self.fields[0].grid
    }

    pub fn save_dt(&self) -> f64 {
        self.save_dt
    }

    pub fn hbar(&self) -> f64 {
        self.fields[0].hbar
    }

    pub fn mass(&self) -> f64 {
        self.fields[0].mass
    }

    pub fn velocity_frame(&self, k: usize) -> &Masked<Vec<Vec<f64>>> {
        &self.velocities[k]
    }

    fn bracket(&self, t: f64) -> Result<(usize, f64)> {
        let (t0, t1) = self.span();
        if !(t >= t0 - 1e-12 && t <= t1 + 1e-12) {
            return Err(Error::OutOfSpan { t, start: t0, end: t1 });
        }
        let s = ((t - t0) / self.save_dt).max(0.0);
        let k = (s.floor() as usize).min(self.fields.len() - 2);
        Ok((k, (s - k as f64).clamp(0.0, 1.0)))
    }

    /// Density at (x, t), cubic in space and linear in time.
    pub fn density_at(&self, x: &[f64], t: f64) -> Result<f64> {
        let (k, w) = self.bracket(t)?;
        let grid = self.grid();
        let a = interpolate_masked(grid, &self.densities[k], x).expect("unmasked")[0];
        let b = interpolate_masked(grid, &self.densities[k + 1], x).expect("unmasked")[0];
        Ok((1.0 - w) * a + w * b)
    }

    /// Drift velocity at (x, t).
    pub fn drift_velocity(&self, x: &[f64], t: f64) -> Result<Drift> {
        let (k, w) = self.bracket(t)?;
        let grid = self.grid();
        let a = interpolate_masked(grid, &self.velocities[k], x);
        let b = interpolate_masked(grid, &self.velocities[k + 1], x);
        Ok(match (a, b) {
            (Some(a), Some(b)) => Drift { v: a.iter().zip(&b).map(|(a, b)| (1.0 - w) * a + w * b).collect(), masked: false },
            _ => Drift { v: vec![0.0; grid.dims()], masked: true },
        })
    }
}

impl DriftField for FieldSequence {
    fn dims(&self) -> usize {
        self.grid().dims()
    }

    fn drift(&self, x: &[f64], t: f64) -> Result<Drift> {
        self.drift_velocity(x, t)
    }

    fn span(&self) -> (f64, f64) {
        (self.fields[0].time, self.fields[self.fields.len() - 1].time)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.grid().contains(x)
    }
}

/// A closed-form drift, for tests and analytic comparisons.
pub struct AnalyticDrift<F: Fn(&[f64], f64) -> Vec<f64> + Sync> {
    pub f: F,
    pub dims: usize,
    pub span: (f64, f64),
}

impl<F: Fn(&[f64], f64) -> Vec<f64> + Sync> DriftField for AnalyticDrift<F> {
    fn dims(&self) -> usize {
        self.dims
    }

    fn drift(&self, x: &[f64], t: f64) -> Result<Drift> {
        Ok(Drift { v: (self.f)(x, t), masked: false })
    }

    fn span(&self) -> (f64, f64) {
        self.span
    }

    fn contains(&self, _x: &[f64]) -> bool {
        true
    }
}

/// Diagnostic -(D/rho) grad rho at `x` with D = hbar/2m. It never enters
/// the path update.
pub fn imaginary_drift(field: &SchrodingerField, x: &[f64]) -> Vec<f64> {
    let grid = &field.grid;
    let rho = field.density();
    let mut diff = crate::spectral::Differentiator::new(grid);
    let grad = diff.gradient_real(&rho);
    let d = field.hbar / (2.0 * field.mass);
    let mut values = grad;
    values.push(rho);
    let all = Masked { mask: vec![true; grid.len()], values };
    let interp = interpolate_masked(grid, &all, x).expect("unmasked");
    let r = interp[grid.dims()];
    if r <= 0.0 {
        return vec![0.0; grid.dims()];
    }
    interp[..grid.dims()].iter().map(|g| -d * g / r).collect()
}
