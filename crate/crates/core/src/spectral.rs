//! FFT plans over a [`Grid`], with a transpose pass for the second axis.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

pub struct SpectralPlan {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    scratch: Vec<Complex64>,
    transposed: Vec<Complex64>,
    scale: f64,
}

impl SpectralPlan {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let shape = grid.shape();
        let forward: Vec<_> = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse: Vec<_> = shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let scratch_len = forward
            .iter()
            .chain(inverse.iter())
            .map(|f| f.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        let transposed = if shape.len() == 2 { vec![Complex64::default(); grid.len()] } else { Vec::new() };
        Self {
            scale: 1.0 / grid.len() as f64,
            shape,
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
            transposed,
        }
    }

    pub fn forward(&mut self, buf: &mut [Complex64]) {
        self.run(buf, true);
    }

    /// Normalized inverse transform.
    pub fn inverse(&mut self, buf: &mut [Complex64]) {
        self.run(buf, false);
        let s = self.scale;
        for z in buf.iter_mut() {
            *z *= s;
        }
    }

    fn run(&mut self, buf: &mut [Complex64], forward: bool) {
        let plans = if forward { &self.forward } else { &self.inverse };
        match self.shape.len() {
            1 => plans[0].process_with_scratch(buf, &mut self.scratch),
            _ => {
                let (nx, ny) = (self.shape[0], self.shape[1]);
                plans[1].process_with_scratch(buf, &mut self.scratch);
                transpose(buf, &mut self.transposed, nx, ny);
                plans[0].process_with_scratch(&mut self.transposed, &mut self.scratch);
                transpose(&self.transposed, buf, ny, nx);
            }
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const B: usize = 32;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            for r in r0..(r0 + B).min(rows) {
                for c in c0..(c0 + B).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// Spectral derivative operators on a fixed grid.
pub struct Differentiator {
    plan: SpectralPlan,
    k: Vec<Vec<f64>>,
    k2: Vec<f64>,
    work: Vec<Complex64>,
    spectrum: Vec<Complex64>,
}

impl Differentiator {
    pub fn new(grid: &Grid) -> Self {
        let k: Vec<Vec<f64>> = (0..grid.dims()).map(|a| grid.wavenumber_field(a, true)).collect();
        let mut k2 = vec![0.0; grid.len()];
        for a in 0..grid.dims() {
            for (s, kk) in k2.iter_mut().zip(grid.wavenumber_field(a, false)) {
                *s += kk * kk;
            }
        }
        Self {
            plan: SpectralPlan::new(grid),
            k,
            k2,
            work: vec![Complex64::default(); grid.len()],
            spectrum: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn plan(&mut self) -> &mut SpectralPlan {
        &mut self.plan
    }

    /// Gradient of a complex field, one array per axis.
    pub fn gradient(&mut self, psi: &[Complex64]) -> Vec<Vec<Complex64>> {
        self.spectrum.copy_from_slice(psi);
        self.plan.forward(&mut self.spectrum);
        let mut out = Vec::with_capacity(self.k.len());
        for a in 0..self.k.len() {
            for ((w, s), &k) in self.work.iter_mut().zip(&self.spectrum).zip(&self.k[a]) {
                *w = Complex64::new(-s.im * k, s.re * k);
            }
            self.plan.inverse(&mut self.work);
            out.push(self.work.clone());
        }
        out
    }

    /// Gradient of a real field.
    pub fn gradient_real(&mut self, f: &[f64]) -> Vec<Vec<f64>> {
        let z: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.gradient(&z).into_iter().map(|g| g.into_iter().map(|c| c.re).collect()).collect()
    }

    /// Divergence of a real vector field.
    pub fn divergence(&mut self, v: &[Vec<f64>]) -> Vec<f64> {
        let mut div = vec![0.0; self.work.len()];
        for (a, comp) in v.iter().enumerate() {
            for (w, &x) in self.work.iter_mut().zip(comp) {
                *w = Complex64::new(x, 0.0);
            }
            self.plan.forward(&mut self.work);
            for (w, &k) in self.work.iter_mut().zip(&self.k[a]) {
                *w = Complex64::new(-w.im * k, w.re * k);
            }
            self.plan.inverse(&mut self.work);
            for (d, w) in div.iter_mut().zip(&self.work) {
                *d += w.re;
            }
        }
        div
    }

    pub fn laplacian(&mut self, psi: &[Complex64]) -> Vec<Complex64> {
        self.work.copy_from_slice(psi);
        self.plan.forward(&mut self.work);
        for (w, &k2) in self.work.iter_mut().zip(&self.k2) {
            *w *= -k2;
        }
        self.plan.inverse(&mut self.work);
        self.work.clone()
    }

    /// Sum over modes of `weight(k) |psi_k|^2`, scaled so that a weight of
    /// one returns the grid sum of |psi|^2.
    pub fn spectral_moment(&mut self, psi: &[Complex64], weight: impl Fn(usize) -> f64) -> f64 {
        self.work.copy_from_slice(psi);
        self.plan.forward(&mut self.work);
        let n = self.work.len() as f64;
        self.work.iter().enumerate().map(|(i, z)| weight(i) * z.norm_sqr()).sum::<f64>() / n
    }

    pub fn k(&self, axis: usize) -> &[f64] {
        &self.k[axis]
    }

    pub fn k2(&self) -> &[f64] {
        &self.k2
    }
}

/// Fourth-order centered first derivative along `axis`. Periodic grids wrap;
/// otherwise the two outermost points on each side use one-sided stencils.
pub fn centered4(grid: &Grid, f: &[f64], axis: usize, periodic: bool) -> Vec<f64> {
    let shape = grid.shape();
    let n = shape[axis];
    let stride = if grid.dims() == 2 && axis == 0 { shape[1] } else { 1 };
    let h = grid.axis(axis).spacing();
    let mut out = vec![0.0; f.len()];
    let lines: Vec<usize> = if grid.dims() == 1 {
        vec![0]
    } else if axis == 0 {
        (0..shape[1]).collect()
    } else {
        (0..shape[0]).map(|i| i * shape[1]).collect()
    };
    for base in lines {
        let at = |i: usize| f[base + i * stride];
        for i in 0..n {
            let d = if periodic || (i >= 2 && i + 2 < n) {
                let w = |o: isize| at(((i as isize + o).rem_euclid(n as isize)) as usize);
                (w(-2) - 8.0 * w(-1) + 8.0 * w(1) - w(2)) / (12.0 * h)
            } else if i < 2 {
                (-25.0 * at(i) + 48.0 * at(i + 1) - 36.0 * at(i + 2) + 16.0 * at(i + 3) - 3.0 * at(i + 4))
                    / (12.0 * h)
            } else {
                (25.0 * at(i) - 48.0 * at(i - 1) + 36.0 * at(i - 2) - 16.0 * at(i - 3) + 3.0 * at(i - 4))
                    / (12.0 * h)
            };
            out[base + i * stride] = d;
        }
    }
    out
}
