//! Uniform periodic grids in one or two dimensions.
//!
//! Points are stored row-major with the last axis contiguous, so a 2D index
//! is `ix * ny + iy`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        let axis = Self { min, max, n };
        axis.validate()?;
        Ok(axis)
    }

    fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.max <= self.min {
            return Err(Error::InvalidGrid(format!(
                "extent [{}, {}] is empty or not finite",
                self.min, self.max
            )));
        }
        if self.n < 2 || !self.n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points = {} is not a power of two >= 2",
                self.n
            )));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.max - self.min
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.n as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.min + i as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = 2.0 * std::f64::consts::PI / self.length();
        let n = self.n as isize;
        (0..n)
            .map(|i| if i < n / 2 { i as f64 * dk } else { (i - n) as f64 * dk })
            .collect()
    }

    /// Wavenumbers for odd-order derivatives: the Nyquist mode is zeroed so
    /// that real input stays real.
    pub fn derivative_wavenumbers(&self) -> Vec<f64> {
        let mut k = self.wavenumbers();
        k[self.n / 2] = 0.0;
        k
    }

    /// Fractional index of `x`, not wrapped.
    pub fn fractional_index(&self, x: f64) -> f64 {
        (x - self.min) / self.spacing()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
    periodic: bool,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidGrid(format!("{} dimensions; only 1 or 2 supported", axes.len())));
        }
        for a in &axes {
            a.validate()?;
        }
        Ok(Self { axes, periodic: true })
    }

    pub fn line(min: f64, max: f64, n: usize) -> Result<Self> {
        Self::new(vec![Axis::new(min, max, n)?])
    }

    pub fn plane(x: (f64, f64, usize), y: (f64, f64, usize)) -> Result<Self> {
        Self::new(vec![Axis::new(x.0, x.1, x.2)?, Axis::new(y.0, y.1, y.2)?])
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    /// Coordinates of flat index `idx`.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        match self.dims() {
            1 => [self.axes[0].coord(idx), 0.0],
            _ => {
                let ny = self.axes[1].n;
                [self.axes[0].coord(idx / ny), self.axes[1].coord(idx % ny)]
            }
        }
    }

    /// Per-point values of one coordinate, laid out like a field.
    pub fn coordinate_field(&self, axis: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)[axis]).collect()
    }

    /// Per-point wavenumbers along `axis`, laid out like a field.
    pub fn wavenumber_field(&self, axis: usize, derivative: bool) -> Vec<f64> {
        let k = if derivative {
            self.axes[axis].derivative_wavenumbers()
        } else {
            self.axes[axis].wavenumbers()
        };
        match self.dims() {
            1 => k,
            _ => {
                let ny = self.axes[1].n;
                (0..self.len())
                    .map(|i| if axis == 0 { k[i / ny] } else { k[i % ny] })
                    .collect()
            }
        }
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        self.axes
            .iter()
            .zip(q)
            .all(|(a, &x)| x >= a.min && x <= a.max - a.spacing())
    }

    pub fn same_as(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.axes, other.axes)));
        }
        Ok(())
    }

    /// Trapezoid (equivalently rectangle, on a periodic grid) integral.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.cell_volume()
    }

    /// Flat indices of the outermost rows/columns.
    pub fn boundary_indices(&self) -> Vec<usize> {
        match self.dims() {
            1 => vec![0, self.axes[0].n - 1],
            _ => {
                let (nx, ny) = (self.axes[0].n, self.axes[1].n);
                let mut out = Vec::with_capacity(2 * (nx + ny));
                for iy in 0..ny {
                    out.push(iy);
                    out.push((nx - 1) * ny + iy);
                }
                for ix in 0..nx {
                    out.push(ix * ny);
                    out.push(ix * ny + ny - 1);
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_coords() {
        let g = Grid::line(-20.0, 20.0, 256).unwrap();
        assert_eq!(g.axis(0).spacing(), 40.0 / 256.0);
        assert_eq!(g.axis(0).coord(0), -20.0);
        assert_eq!(g.len(), 256);
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(Grid::line(0.0, 1.0, 100).is_err());
        assert!(Grid::line(1.0, 1.0, 128).is_err());
        assert!(Grid::new(vec![]).is_err());
    }

    #[test]
    fn wavenumber_ordering() {
        let a = Axis::new(0.0, 2.0 * std::f64::consts::PI, 8).unwrap();
        assert_eq!(a.wavenumbers(), vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
        assert_eq!(a.derivative_wavenumbers()[4], 0.0);
    }

    #[test]
    fn plane_layout() {
        let g = Grid::plane((0.0, 4.0, 4), (0.0, 8.0, 8)).unwrap();
        assert_eq!(g.point(9), [1.0, 1.0]);
        assert_eq!(g.boundary_indices().len(), 24);
    }
}
