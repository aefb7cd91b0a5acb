//! The Schrödinger vector (phi_r, phi_c) on a grid.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Boundary-to-peak density ratio above which a packet is rejected.
pub const TAIL_LIMIT: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SchrodingerField {
    pub grid: Grid,
    pub phi_r: Vec<f64>,
    pub phi_c: Vec<f64>,
    pub time: f64,
    pub hbar: f64,
    pub mass: f64,
}

impl SchrodingerField {
    pub fn new(grid: Grid, phi_r: Vec<f64>, phi_c: Vec<f64>, time: f64, hbar: f64, mass: f64) -> Result<Self> {
        if phi_r.len() != grid.len() || phi_c.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "arrays of length {}/{} on a grid of {} points",
                phi_r.len(),
                phi_c.len(),
                grid.len()
            )));
        }
        if !(hbar > 0.0) || !(mass > 0.0) {
            return Err(Error::InvalidInput(format!("hbar = {hbar}, mass = {mass} must be positive")));
        }
        Ok(Self { grid, phi_r, phi_c, time, hbar, mass })
    }

    pub fn from_complex(grid: Grid, psi: &[Complex64], time: f64, hbar: f64, mass: f64) -> Result<Self> {
        let phi_r = psi.iter().map(|z| z.re).collect();
        let phi_c = psi.iter().map(|z| z.im).collect();
        Self::new(grid, phi_r, phi_c, time, hbar, mass)
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.phi_r.iter().zip(&self.phi_c).map(|(&r, &c)| Complex64::new(r, c)).collect()
    }

    pub fn density(&self) -> Vec<f64> {
        self.phi_r.iter().zip(&self.phi_c).map(|(r, c)| r * r + c * c).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid.integrate(&self.density())
    }

    pub fn normalize(mut self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidInput(format!("cannot normalize a field of norm {n}")));
        }
        let s = 1.0 / n.sqrt();
        self.phi_r.iter_mut().for_each(|x| *x *= s);
        self.phi_c.iter_mut().for_each(|x| *x *= s);
        Ok(self)
    }

    pub fn position_mean(&self) -> Vec<f64> {
        let rho = self.density();
        let norm: f64 = rho.iter().sum();
        (0..self.grid.dims())
            .map(|a| {
                rho.iter().enumerate().map(|(i, r)| r * self.grid.point(i)[a]).sum::<f64>() / norm
            })
            .collect()
    }

    /// Largest density on the outermost grid lines divided by the peak density.
    pub fn boundary_tail(&self) -> f64 {
        let rho = self.density();
        let peak = rho.iter().cloned().fold(0.0, f64::max);
        let edge = self.grid.boundary_indices().into_iter().map(|i| rho[i]).fold(0.0, f64::max);
        if peak > 0.0 { edge / peak } else { 0.0 }
    }

    /// L2 distance to another field on the same grid.
    pub fn distance(&self, other: &SchrodingerField) -> Result<f64> {
        self.grid.same_as(&other.grid)?;
        let d: Vec<f64> = (0..self.grid.len())
            .map(|i| {
                let a = self.phi_r[i] - other.phi_r[i];
                let b = self.phi_c[i] - other.phi_c[i];
                a * a + b * b
            })
            .collect();
        Ok(self.grid.integrate(&d).sqrt())
    }

    /// Inner product <self|other>.
    pub fn overlap(&self, other: &SchrodingerField) -> Result<Complex64> {
        self.grid.same_as(&other.grid)?;
        let dv = self.grid.cell_volume();
        let s: Complex64 = self
            .to_complex()
            .iter()
            .zip(other.to_complex())
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * dv)
    }
}

/// Normalized Gaussian packet exp(-gamma (q-q0)^2 + i p0 (q-q0)/hbar), one
/// factor per axis. `gamma` holds one entry per axis or a single shared one.
pub fn init_coherent_state(
    grid: &Grid,
    q0: &[f64],
    p0: &[f64],
    gamma: &[Complex64],
    hbar: f64,
    mass: f64,
) -> Result<SchrodingerField> {
    let dims = grid.dims();
    if q0.len() != dims || p0.len() != dims || !(gamma.len() == 1 || gamma.len() == dims) {
        return Err(Error::InvalidInput(format!(
            "q0/p0/gamma lengths {}/{}/{} do not match a {}D grid",
            q0.len(),
            p0.len(),
            gamma.len(),
            dims
        )));
    }
    let g = |a: usize| if gamma.len() == 1 { gamma[0] } else { gamma[a] };
    for a in 0..dims {
        if !(g(a).re > 0.0) {
            return Err(Error::NonpositiveWidth(g(a).re));
        }
    }
    let psi: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let p = grid.point(i);
            let mut e = Complex64::new(0.0, 0.0);
            for a in 0..dims {
                let d = p[a] - q0[a];
                e += -g(a) * d * d + Complex64::new(0.0, p0[a] * d / hbar);
            }
            e.exp()
        })
        .collect();
    let field = SchrodingerField::from_complex(grid.clone(), &psi, 0.0, hbar, mass)?.normalize()?;
    let tail = field.boundary_tail();
    if tail > TAIL_LIMIT {
        return Err(Error::PacketEscapesGrid { tail, limit: TAIL_LIMIT });
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherent_state_is_normalized() {
        let g = Grid::line(-20.0, 20.0, 512).unwrap();
        let f = init_coherent_state(&g, &[1.0], &[2.0], &[Complex64::new(0.5, 0.0)], 1.0, 1.0).unwrap();
        assert!((f.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((f.position_mean()[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn real_gamma_zero_momentum_is_real() {
        let g = Grid::line(-20.0, 20.0, 256).unwrap();
        let f = init_coherent_state(&g, &[0.0], &[0.0], &[Complex64::new(0.7, 0.0)], 1.0, 1.0).unwrap();
        assert!(f.phi_c.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn rejects_wide_packets_and_bad_width() {
        let g = Grid::line(-5.0, 5.0, 256).unwrap();
        let wide = init_coherent_state(&g, &[0.0], &[0.0], &[Complex64::new(0.01, 0.0)], 1.0, 1.0);
        assert!(matches!(wide, Err(Error::PacketEscapesGrid { .. })));
        let bad = init_coherent_state(&g, &[0.0], &[0.0], &[Complex64::new(-1.0, 0.0)], 1.0, 1.0);
        assert!(matches!(bad, Err(Error::NonpositiveWidth(_))));
    }
}
