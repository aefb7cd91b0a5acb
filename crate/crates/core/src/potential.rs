//! External potentials V(q).
//!
//! Barrier-type potentials depend on the first coordinate only. The harmonic
//! well needs the particle mass, so every evaluation takes it explicitly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Free,
    /// V = m omega^2 |q - center|^2 / 2.
    Harmonic {
        omega: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    /// V = height exp(-(x - center)^2 / (2 width^2)).
    GaussianBarrier {
        height: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// V = height / cosh^2(x / width).
    Eckart { height: f64, width: f64 },
    /// Opaque wall of finite thickness at x = wall_position with open slits in y.
    DoubleSlitMask {
        wall_position: f64,
        #[serde(default = "default_wall_thickness")]
        wall_thickness: f64,
        slit_centers: Vec<f64>,
        slit_widths: Vec<f64>,
        wall_height: f64,
    },
    /// Samples on a 1D periodic axis `[min, max)`, interpolated cubically.
    Sampled { values: Vec<f64>, min: f64, max: f64 },
}

fn default_wall_thickness() -> f64 {
    0.5
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec::Free
    }
}

impl PotentialSpec {
    pub fn harmonic(omega: f64) -> Self {
        PotentialSpec::Harmonic { omega, center: Vec::new() }
    }

    pub fn validate(&self, grid: Option<&Grid>) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        match self {
            PotentialSpec::Free => Ok(()),
            PotentialSpec::Harmonic { omega, center } => {
                if !omega.is_finite() {
                    return bad("harmonic omega must be finite".into());
                }
                if let Some(g) = grid {
                    if !center.is_empty() && center.len() != g.dims() {
                        return bad(format!("harmonic center has {} entries for a {}D grid", center.len(), g.dims()));
                    }
                }
                Ok(())
            }
            PotentialSpec::GaussianBarrier { height, width, .. } | PotentialSpec::Eckart { height, width } => {
                if !height.is_finite() {
                    return bad("barrier height must be finite".into());
                }
                if !(*width > 0.0) {
                    return bad("barrier width must be positive".into());
                }
                Ok(())
            }
            PotentialSpec::DoubleSlitMask { slit_centers, slit_widths, wall_height, wall_thickness, .. } => {
                if slit_centers.len() != slit_widths.len() {
                    return bad("slit_centers and slit_widths differ in length".into());
                }
                if !wall_height.is_finite() || !(*wall_thickness > 0.0) {
                    return bad("wall height must be finite and thickness positive".into());
                }
                if let Some(g) = grid {
                    if g.dims() != 2 {
                        return bad("double_slit_mask needs a 2D grid".into());
                    }
                }
                Ok(())
            }
            PotentialSpec::Sampled { values, min, max } => {
                if values.len() < 4 || !(max > min) || values.iter().any(|v| !v.is_finite()) {
                    return bad("sampled potential needs >= 4 finite values on a nonempty extent".into());
                }
                if let Some(g) = grid {
                    if g.dims() != 1 || g.len() != values.len() {
                        return bad(format!("sampled potential has {} values for a grid of {}", values.len(), g.len()));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, q: &[f64], mass: f64) -> f64 {
        let x = q[0];
        match self {
            PotentialSpec::Free => 0.0,
            PotentialSpec::Harmonic { omega, center } => {
                let r2: f64 = q
                    .iter()
                    .enumerate()
                    .map(|(i, &qi)| {
                        let d = qi - center.get(i).copied().unwrap_or(0.0);
                        d * d
                    })
                    .sum();
                0.5 * mass * omega * omega * r2
            }
            PotentialSpec::GaussianBarrier { height, width, center } => {
                let s = (x - center) / width;
                height * (-0.5 * s * s).exp()
            }
            PotentialSpec::Eckart { height, width } => {
                let c = (x / width).cosh();
                height / (c * c)
            }
            PotentialSpec::DoubleSlitMask { .. } => {
                if self.inside_wall(q) {
                    match self {
                        PotentialSpec::DoubleSlitMask { wall_height, .. } => *wall_height,
                        _ => unreachable!(),
                    }
                } else {
                    0.0
                }
            }
            PotentialSpec::Sampled { values, min, max } => sampled_value(values, *min, *max, x),
        }
    }

    /// Gradient of V. The slit mask has no usable gradient and returns zero.
    pub fn gradient(&self, q: &[f64], mass: f64) -> Vec<f64> {
        let x = q[0];
        let mut g = vec![0.0; q.len()];
        match self {
            PotentialSpec::Free | PotentialSpec::DoubleSlitMask { .. } => {}
            PotentialSpec::Harmonic { omega, center } => {
                for (i, gi) in g.iter_mut().enumerate() {
                    *gi = mass * omega * omega * (q[i] - center.get(i).copied().unwrap_or(0.0));
                }
            }
            PotentialSpec::GaussianBarrier { height, width, center } => {
                let s = (x - center) / width;
                g[0] = -height * s / width * (-0.5 * s * s).exp();
            }
            PotentialSpec::Eckart { height, width } => {
                let u = x / width;
                g[0] = -2.0 * height * u.tanh() / (width * u.cosh().powi(2));
            }
            PotentialSpec::Sampled { .. } => {
                let h = 1e-5 * (1.0 + x.abs());
                g[0] = (self.value(&[x + h], mass) - self.value(&[x - h], mass)) / (2.0 * h);
            }
        }
        g
    }

    /// 1D force -dV/dx.
    pub fn force_1d(&self, x: f64, mass: f64) -> f64 {
        -self.gradient(&[x], mass)[0]
    }

    pub fn value_1d(&self, x: f64, mass: f64) -> f64 {
        self.value(&[x], mass)
    }

    /// d^2V/dx^2 in 1D.
    pub fn curvature_1d(&self, x: f64, mass: f64) -> f64 {
        match self {
            PotentialSpec::Free => 0.0,
            PotentialSpec::Harmonic { omega, .. } => mass * omega * omega,
            PotentialSpec::GaussianBarrier { height, width, center } => {
                let s = (x - center) / width;
                height * (s * s - 1.0) / (width * width) * (-0.5 * s * s).exp()
            }
            _ => {
                let h = 1e-4 * (1.0 + x.abs());
                (self.value_1d(x + h, mass) - 2.0 * self.value_1d(x, mass) + self.value_1d(x - h, mass)) / (h * h)
            }
        }
    }

    /// True inside the opaque part of a slit wall.
    pub fn inside_wall(&self, q: &[f64]) -> bool {
        match self {
            PotentialSpec::DoubleSlitMask { wall_position, wall_thickness, slit_centers, slit_widths, .. } => {
                if (q[0] - wall_position).abs() > 0.5 * wall_thickness {
                    return false;
                }
                let y = q.get(1).copied().unwrap_or(0.0);
                !slit_centers
                    .iter()
                    .zip(slit_widths)
                    .any(|(c, w)| (y - c).abs() < 0.5 * w)
            }
            _ => false,
        }
    }

    pub fn on_grid(&self, grid: &Grid, mass: f64) -> Result<Vec<f64>> {
        self.validate(Some(grid))?;
        if let PotentialSpec::Sampled { values, .. } = self {
            return Ok(values.clone());
        }
        Ok((0..grid.len()).map(|i| self.value(&grid.point(i)[..grid.dims()], mass)).collect())
    }
}

fn sampled_value(values: &[f64], min: f64, max: f64, x: f64) -> f64 {
    let n = values.len();
    let h = (max - min) / n as f64;
    let s = (x - min) / h;
    let i = s.floor();
    let t = s - i;
    let at = |k: isize| values[(k.rem_euclid(n as isize)) as usize];
    let i = i as isize;
    catmull_rom(at(i - 1), at(i), at(i + 1), at(i + 2), t)
}

/// Cubic Catmull-Rom interpolation between `p1` (t = 0) and `p2` (t = 1).
#[inline]
pub fn catmull_rom(p0: f64, p1: f64, p2: f64, p3: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    0.5 * (2.0 * p1 + (p2 - p0) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 + (3.0 * p1 - p0 - 3.0 * p2 + p3) * t3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barrier_gradient_matches_difference() {
        let v = PotentialSpec::GaussianBarrier { height: 2.0, width: 0.3, center: 0.5 };
        for &x in &[-0.4, 0.2, 0.5, 0.9] {
            let h = 1e-6;
            let fd = (v.value_1d(x + h, 1.0) - v.value_1d(x - h, 1.0)) / (2.0 * h);
            assert!((v.gradient(&[x], 1.0)[0] - fd).abs() < 1e-7);
            let fd2 = (v.value_1d(x + 1e-4, 1.0) - 2.0 * v.value_1d(x, 1.0) + v.value_1d(x - 1e-4, 1.0)) / 1e-8;
            assert!((v.curvature_1d(x, 1.0) - fd2).abs() < 1e-4);
        }
    }

    #[test]
    fn eckart_gradient_matches_difference() {
        let v = PotentialSpec::Eckart { height: 1.0, width: 0.7 };
        let h = 1e-6;
        let fd = (v.value_1d(0.3 + h, 1.0) - v.value_1d(0.3 - h, 1.0)) / (2.0 * h);
        assert!((v.gradient(&[0.3], 1.0)[0] - fd).abs() < 1e-7);
    }

    #[test]
    fn slit_mask_geometry() {
        let v = PotentialSpec::DoubleSlitMask {
            wall_position: 0.0,
            wall_thickness: 0.5,
            slit_centers: vec![-1.0, 1.0],
            slit_widths: vec![0.5, 0.5],
            wall_height: 100.0,
        };
        assert!(v.inside_wall(&[0.0, 0.0]));
        assert!(!v.inside_wall(&[0.0, 1.1]));
        assert!(!v.inside_wall(&[1.0, 0.0]));
        assert_eq!(v.value(&[0.1, 3.0], 1.0), 100.0);
    }

    #[test]
    fn sampled_reproduces_nodes() {
        let g = Grid::line(-1.0, 1.0, 16).unwrap();
        let vals: Vec<f64> = g.axis(0).coords().iter().map(|x| x * x).collect();
        let v = PotentialSpec::Sampled { values: vals.clone(), min: -1.0, max: 1.0 };
        for (i, x) in g.axis(0).coords().iter().enumerate() {
            assert!((v.value_1d(*x, 1.0) - vals[i]).abs() < 1e-12);
        }
        assert_eq!(v.on_grid(&g, 1.0).unwrap(), vals);
    }
}
