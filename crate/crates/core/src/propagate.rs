//! Symmetric split-step propagation, in complex and real-vector form.
//!
//! One step is K(dt/2) V(dt) K(dt/2). The complex route transforms psi; the
//! real-vector route transforms phi_r and phi_c separately and applies the
//! rotation exp(a J) with J = [[0, -1], [1, 0]] per mode and per point.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SchrodingerField;
use crate::grid::Grid;
use crate::potential::PotentialSpec;
use crate::spectral::SpectralPlan;

/// Upper bound on hbar dt / (m dx^2).
pub const CFL_LIMIT: f64 = 10.0;
/// Per-step norm change that is reported as an instability.
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;

/// cos^2-ramp absorbing layer on every boundary of width `width`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbsorbingBoundary {
    pub width: f64,
    pub strength: f64,
}

impl AbsorbingBoundary {
    /// Per-step damping factor exp(-strength dt sin^2(pi/2 (w - s)/w)) where
    /// s is the distance to the nearest edge.
    pub fn factors(&self, grid: &Grid, dt: f64) -> Vec<f64> {
        (0..grid.len())
            .map(|i| {
                let p = grid.point(i);
                let mut r: f64 = 0.0;
                for (a, axis) in grid.axes().iter().enumerate() {
                    let s = (p[a] - axis.min).min(axis.max - axis.spacing() - p[a]);
                    if s < self.width {
                        let u = (std::f64::consts::FRAC_PI_2 * (self.width - s) / self.width).sin();
                        r = r.max(u * u);
                    }
                }
                (-self.strength * dt.abs() * r).exp()
            })
            .collect()
    }
}

pub struct Propagator {
    grid: Grid,
    dt: f64,
    plan: SpectralPlan,
    half_kinetic: Vec<Complex64>,
    potential_phase: Vec<Complex64>,
    mask: Option<Vec<f64>>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    k: Vec<Vec<f64>>,
}

impl Propagator {
    /// Builds a propagator for fixed (potential, dt). A negative `dt` steps
    /// backwards in time.
    pub fn new(
        grid: &Grid,
        potential: &PotentialSpec,
        dt: f64,
        hbar: f64,
        mass: f64,
        absorber: Option<AbsorbingBoundary>,
    ) -> Result<Self> {
        if !dt.is_finite() || dt == 0.0 {
            return Err(Error::InvalidTimeStep(format!("dt = {dt}")));
        }
        let dx = grid.axes().iter().map(|a| a.spacing()).fold(f64::INFINITY, f64::min);
        let cfl = hbar * dt.abs() / (mass * dx * dx);
        if cfl >= CFL_LIMIT {
            return Err(Error::InvalidTimeStep(format!(
                "hbar*dt/(m*dx^2) = {cfl:.3} exceeds {CFL_LIMIT}"
            )));
        }
        let v = potential.on_grid(grid, mass)?;
        let mut k2 = vec![0.0; grid.len()];
        for a in 0..grid.dims() {
            for (s, k) in k2.iter_mut().zip(grid.wavenumber_field(a, false)) {
                *s += k * k;
            }
        }
        let half_kinetic = k2
            .iter()
            .map(|k2| Complex64::from_polar(1.0, -hbar * k2 * dt / (4.0 * mass)))
            .collect();
        let potential_phase = v.iter().map(|v| Complex64::from_polar(1.0, -v * dt / hbar)).collect();
        Ok(Self {
            grid: grid.clone(),
            dt,
            plan: SpectralPlan::new(grid),
            half_kinetic,
            potential_phase,
            mask: absorber.map(|ab| ab.factors(grid, dt)),
            a: vec![Complex64::default(); grid.len()],
            b: vec![Complex64::default(); grid.len()],
            k: Vec::new(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn has_absorber(&self) -> bool {
        self.mask.is_some()
    }

    pub fn step_complex(&mut self, psi: &mut [Complex64]) {
        self.plan.forward(psi);
        for (z, k) in psi.iter_mut().zip(&self.half_kinetic) {
            *z *= k;
        }
        self.plan.inverse(psi);
        for (z, v) in psi.iter_mut().zip(&self.potential_phase) {
            *z *= v;
        }
        self.plan.forward(psi);
        for (z, k) in psi.iter_mut().zip(&self.half_kinetic) {
            *z *= k;
        }
        self.plan.inverse(psi);
        if let Some(m) = &self.mask {
            for (z, m) in psi.iter_mut().zip(m) {
                *z *= *m;
            }
        }
    }

    /// One step with the absorbing mask applied first, so that the step ends
    /// in k-space and `grad[a]` (the spectral derivative along axis a of the
    /// new psi) costs one inverse transform per axis.
    pub fn step_with_gradient(&mut self, psi: &mut [Complex64], grad: &mut [Vec<Complex64>]) {
        if let Some(m) = &self.mask {
            for (z, m) in psi.iter_mut().zip(m) {
                *z *= *m;
            }
        }
        if self.k.is_empty() {
            self.k = (0..self.grid.dims()).map(|a| self.grid.wavenumber_field(a, true)).collect();
        }
        self.plan.forward(psi);
        for (z, k) in psi.iter_mut().zip(&self.half_kinetic) {
            *z *= k;
        }
        self.plan.inverse(psi);
        for (z, v) in psi.iter_mut().zip(&self.potential_phase) {
            *z *= v;
        }
        self.plan.forward(psi);
        for (z, k) in psi.iter_mut().zip(&self.half_kinetic) {
            *z *= k;
        }
        for (g, k) in grad.iter_mut().zip(&self.k) {
            for ((g, z), &k) in g.iter_mut().zip(psi.iter()).zip(k) {
                *g = Complex64::new(-z.im * k, z.re * k);
            }
            self.plan.inverse(g);
        }
        self.plan.inverse(psi);
    }

    pub fn step_real(&mut self, phi_r: &mut [f64], phi_c: &mut [f64]) {
        self.kinetic_real(phi_r, phi_c);
        for ((r, c), w) in phi_r.iter_mut().zip(phi_c.iter_mut()).zip(&self.potential_phase) {
            let (cs, sn) = (w.re, w.im);
            let (r0, c0) = (*r, *c);
            *r = cs * r0 - sn * c0;
            *c = sn * r0 + cs * c0;
        }
        self.kinetic_real(phi_r, phi_c);
        if let Some(m) = &self.mask {
            for ((r, c), m) in phi_r.iter_mut().zip(phi_c.iter_mut()).zip(m) {
                *r *= *m;
                *c *= *m;
            }
        }
    }

    fn kinetic_real(&mut self, phi_r: &mut [f64], phi_c: &mut [f64]) {
        for (z, &x) in self.a.iter_mut().zip(phi_r.iter()) {
            *z = Complex64::new(x, 0.0);
        }
        for (z, &x) in self.b.iter_mut().zip(phi_c.iter()) {
            *z = Complex64::new(x, 0.0);
        }
        self.plan.forward(&mut self.a);
        self.plan.forward(&mut self.b);
        for ((a, b), w) in self.a.iter_mut().zip(self.b.iter_mut()).zip(&self.half_kinetic) {
            let (cs, sn) = (w.re, w.im);
            let (a0, b0) = (*a, *b);
            *a = a0 * cs - b0 * sn;
            *b = a0 * sn + b0 * cs;
        }
        self.plan.inverse(&mut self.a);
        self.plan.inverse(&mut self.b);
        for (x, z) in phi_r.iter_mut().zip(&self.a) {
            *x = z.re;
        }
        for (x, z) in phi_c.iter_mut().zip(&self.b) {
            *x = z.re;
        }
    }

    fn check_norm(&self, before: f64, after: f64, step: usize) -> Result<()> {
        if self.mask.is_none() && (!(after.is_finite()) || (after - before).abs() > NORM_DRIFT_LIMIT) {
            return Err(Error::Instability(format!(
                "norm changed from {before:.15} to {after:.15} at step {step}"
            )));
        }
        Ok(())
    }

    pub fn run_complex(&mut self, field: &SchrodingerField, n_steps: usize) -> Result<SchrodingerField> {
        self.grid.same_as(&field.grid)?;
        let dv = self.grid.cell_volume();
        let mut psi = field.to_complex();
        let mut norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * dv;
        for step in 0..n_steps {
            self.step_complex(&mut psi);
            let after = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * dv;
            self.check_norm(norm, after, step)?;
            norm = after;
        }
        SchrodingerField::from_complex(
            field.grid.clone(),
            &psi,
            field.time + n_steps as f64 * self.dt,
            field.hbar,
            field.mass,
        )
    }

    pub fn run_real(&mut self, field: &SchrodingerField, n_steps: usize) -> Result<SchrodingerField> {
        self.grid.same_as(&field.grid)?;
        let dv = self.grid.cell_volume();
        let mut r = field.phi_r.clone();
        let mut c = field.phi_c.clone();
        let norm_of = |r: &[f64], c: &[f64]| r.iter().zip(c).map(|(a, b)| a * a + b * b).sum::<f64>() * dv;
        let mut norm = norm_of(&r, &c);
        for step in 0..n_steps {
            self.step_real(&mut r, &mut c);
            let after = norm_of(&r, &c);
            self.check_norm(norm, after, step)?;
            norm = after;
        }
        SchrodingerField::new(
            field.grid.clone(),
            r,
            c,
            field.time + n_steps as f64 * self.dt,
            field.hbar,
            field.mass,
        )
    }
}

fn positive_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidTimeStep(format!("dt = {dt} must be positive")));
    }
    Ok(())
}

/// Complex-form propagation over `n_steps` steps of size `dt`.
pub fn propagate_complex(
    field: &SchrodingerField,
    potential: &PotentialSpec,
    dt: f64,
    n_steps: usize,
) -> Result<SchrodingerField> {
    positive_dt(dt)?;
    Propagator::new(&field.grid, potential, dt, field.hbar, field.mass, None)?.run_complex(field, n_steps)
}

/// Real-vector propagation of (phi_r, phi_c) over `n_steps` steps.
pub fn propagate_real_vector(
    field: &SchrodingerField,
    potential: &PotentialSpec,
    dt: f64,
    n_steps: usize,
) -> Result<SchrodingerField> {
    positive_dt(dt)?;
    Propagator::new(&field.grid, potential, dt, field.hbar, field.mass, None)?.run_real(field, n_steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::init_coherent_state;

    fn packet() -> SchrodingerField {
        let g = Grid::line(-20.0, 20.0, 512).unwrap();
        init_coherent_state(&g, &[1.0], &[0.5], &[Complex64::new(0.5, 0.1)], 1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_steps_is_identity() {
        let f = packet();
        let v = PotentialSpec::harmonic(1.0);
        assert_eq!(propagate_real_vector(&f, &v, 1e-3, 0).unwrap().phi_r, f.phi_r);
        assert_eq!(propagate_complex(&f, &v, 1e-3, 0).unwrap().phi_c, f.phi_c);
    }

    #[test]
    fn routes_agree() {
        let f = packet();
        let v = PotentialSpec::GaussianBarrier { height: 1.0, width: 0.5, center: 2.0 };
        let a = propagate_complex(&f, &v, 2e-3, 300).unwrap();
        let b = propagate_real_vector(&f, &v, 2e-3, 300).unwrap();
        for i in 0..a.phi_r.len() {
            assert!((a.phi_r[i] - b.phi_r[i]).abs() < 1e-12);
            assert!((a.phi_c[i] - b.phi_c[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_steps() {
        let f = packet();
        assert!(propagate_complex(&f, &PotentialSpec::Free, -1.0, 1).is_err());
        assert!(propagate_complex(&f, &PotentialSpec::Free, 5.0, 1).is_err());
    }

    #[test]
    fn backward_step_inverts_forward() {
        let f = packet();
        let v = PotentialSpec::harmonic(1.0);
        let fwd = Propagator::new(&f.grid, &v, 1e-2, 1.0, 1.0, None).unwrap().run_complex(&f, 50).unwrap();
        let back = Propagator::new(&f.grid, &v, -1e-2, 1.0, 1.0, None).unwrap().run_complex(&fwd, 50).unwrap();
        assert!(back.distance(&f).unwrap() < 1e-12);
    }
}
