//! Double-slit fringe accumulation: paths advance in lockstep with the grid
//! field and leave a spot where they first cross the detection line.

use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::paths::{step_path, PathState, PathStatus};
use super::sequence::{interpolate_masked, Drift, DriftField};
use super::wiener::{stream_rng, Purpose, WienerConfig};
use crate::error::{Error, Result};
use crate::field::SchrodingerField;
use crate::grid::Grid;
use crate::io::{header, Table};
use crate::observables::{velocity_from_gradient, Masked};
use crate::spectral::Differentiator;
use crate::potential::PotentialSpec;
use crate::propagate::{AbsorbingBoundary, Propagator};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleSlitSettings {
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub detector_x: f64,
    pub n_bins: usize,
    pub y_min: f64,
    pub y_max: f64,
    #[serde(default)]
    pub absorber: Option<AbsorbingBoundary>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spot {
    pub stream_id: u64,
    pub time: f64,
    pub y: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramBin {
    pub center: f64,
    pub count: u64,
    /// Time-integrated |psi|^2 on the detection line, normalized to unit
    /// integral over the histogram range.
    pub reference_density: f64,
}

#[derive(Clone, Debug)]
pub struct DoubleSlitResult {
    pub spots: Vec<Spot>,
    pub histogram: Vec<HistogramBin>,
    pub bin_width: f64,
    pub absorbed: usize,
    pub exited: usize,
    pub final_field: SchrodingerField,
}

struct FrameDrift<'a> {
    grid: &'a Grid,
    velocity: &'a Masked<Vec<Vec<f64>>>,
}

impl DriftField for FrameDrift<'_> {
    fn dims(&self) -> usize {
        2
    }

    fn drift(&self, x: &[f64], _t: f64) -> Result<Drift> {
        Ok(match interpolate_masked(self.grid, self.velocity, x) {
            Some(v) => Drift { v, masked: false },
            None => Drift { v: vec![0.0; 2], masked: true },
        })
    }

    fn span(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.grid.contains(x)
    }
}

struct Walker {
    state: PathState,
    rng: ChaCha8Rng,
    spot: Option<(f64, f64)>,
}

/// Runs the grid field and `initial_positions.len()` paths together. The drift
/// for the step from t_k uses the field at t_k. `on_step` sees every field
/// after it has been advanced.
pub fn double_slit_run(
    initial: &SchrodingerField,
    potential: &PotentialSpec,
    settings: &DoubleSlitSettings,
    initial_positions: &[Vec<f64>],
    mut on_step: impl FnMut(usize, &SchrodingerField) -> Result<()>,
) -> Result<DoubleSlitResult> {
    let grid = initial.grid.clone();
    if grid.dims() != 2 {
        return Err(Error::InvalidGrid("the double slit needs a 2D grid".into()));
    }
    if !matches!(potential, PotentialSpec::DoubleSlitMask { .. }) {
        return Err(Error::InvalidInput("the double slit needs a double_slit_mask potential".into()));
    }
    if settings.n_bins == 0 || !(settings.y_max > settings.y_min) {
        return Err(Error::InvalidInput("histogram needs n_bins > 0 and y_max > y_min".into()));
    }
    let (ax, ay) = (grid.axis(0).clone(), grid.axis(1).clone());
    let xs = ax.fractional_index(settings.detector_x);
    if !(xs >= 0.0 && xs < (ax.n - 1) as f64) {
        return Err(Error::InvalidInput(format!("detector_x = {} is off the grid", settings.detector_x)));
    }
    let (col, wcol) = (xs.floor() as usize, xs - xs.floor());
    let ny = ay.n;
    let wiener = WienerConfig::quantum(initial.hbar, initial.mass, settings.seed);
    let dt = settings.dt;
    let mut prop = Propagator::new(&grid, potential, dt, initial.hbar, initial.mass, settings.absorber)?;
    let mut psi = initial.to_complex();
    let mut grad = Differentiator::new(&grid).gradient(&psi);
    let mut velocity = velocity_from_gradient(&psi, &grad, initial.hbar, initial.mass);
    let mut line = vec![0.0; ny];
    let mut walkers: Vec<Walker> = initial_positions
        .iter()
        .enumerate()
        .map(|(i, x)| Walker {
            state: PathState::new(x.clone(), initial.time),
            rng: stream_rng(settings.seed, Purpose::Noise, i as u64),
            spot: None,
        })
        .collect();
    let xd = settings.detector_x;
    let dv = grid.cell_volume();
    let mut field = initial.clone();
    for k in 0..settings.n_steps {
        let drift = FrameDrift { grid: &grid, velocity: &velocity };
        walkers.par_iter_mut().try_for_each(|w| -> Result<()> {
            if w.state.status != PathStatus::Active || w.spot.is_some() {
                return Ok(());
            }
            let next = step_path(&w.state, &drift, dt, &wiener, &mut w.rng)?;
            let (x0, x1) = (w.state.position[0], next.position[0]);
            if x0 < xd && x1 >= xd {
                let s = (xd - x0) / (x1 - x0);
                let y = w.state.position[1] + s * (next.position[1] - w.state.position[1]);
                w.spot = Some((w.state.time + s * dt, y));
            }
            w.state = next;
            if w.spot.is_none() && w.state.status == PathStatus::Active && potential.inside_wall(&w.state.position) {
                w.state.status = PathStatus::Absorbed;
            }
            Ok(())
        })?;
        // Trapezoid in time for the reference line.
        let weight = if k == 0 { 0.5 * dt } else { dt };
        accumulate_line(&mut line, &psi, col, wcol, ny, weight);
        prop.step_with_gradient(&mut psi, &mut grad);
        velocity = velocity_from_gradient(&psi, &grad, initial.hbar, initial.mass);
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * dv;
        if !norm.is_finite() || (!prop.has_absorber() && (norm - 1.0).abs() > 1e-6) {
            return Err(Error::Instability(format!("norm {norm} at step {}", k + 1)));
        }
        let t = initial.time + (k + 1) as f64 * dt;
        field = SchrodingerField::from_complex(grid.clone(), &psi, t, initial.hbar, initial.mass)?;
        on_step(k + 1, &field)?;
    }
    if settings.n_steps > 0 {
        accumulate_line(&mut line, &psi, col, wcol, ny, 0.5 * dt);
    }
    let spots: Vec<Spot> = walkers
        .iter()
        .enumerate()
        .filter_map(|(i, w)| w.spot.map(|(time, y)| Spot { stream_id: i as u64, time, y }))
        .collect();
    let absorbed = walkers.iter().filter(|w| w.state.status == PathStatus::Absorbed).count();
    let exited = walkers.iter().filter(|w| w.spot.is_none() && w.state.status == PathStatus::Exited).count();
    let (histogram, bin_width) = bin_spots(&spots, &line, &grid, settings);
    Ok(DoubleSlitResult { spots, histogram, bin_width, absorbed, exited, final_field: field })
}

fn accumulate_line(line: &mut [f64], psi: &[num_complex::Complex64], col: usize, w: f64, ny: usize, weight: f64) {
    for (j, l) in line.iter_mut().enumerate() {
        let a = psi[col * ny + j].norm_sqr();
        let b = psi[(col + 1) * ny + j].norm_sqr();
        *l += weight * ((1.0 - w) * a + w * b);
    }
}

fn bin_spots(spots: &[Spot], line: &[f64], grid: &Grid, s: &DoubleSlitSettings) -> (Vec<HistogramBin>, f64) {
    let ay = grid.axis(1);
    let width = (s.y_max - s.y_min) / s.n_bins as f64;
    let mut counts = vec![0u64; s.n_bins];
    for spot in spots {
        let b = ((spot.y - s.y_min) / width).floor();
        if b >= 0.0 && (b as usize) < s.n_bins {
            counts[b as usize] += 1;
        }
    }
    // Reference: linear interpolation along y, integrated per bin by a
    // fine midpoint rule.
    let sub = 16;
    let line_at = |y: f64| -> f64 {
        let f = ay.fractional_index(y);
        let i = f.floor();
        let t = f - i;
        let n = ay.n as isize;
        let a = line[(i as isize).rem_euclid(n) as usize];
        let b = line[(i as isize + 1).rem_euclid(n) as usize];
        (1.0 - t) * a + t * b
    };
    let mass: Vec<f64> = (0..s.n_bins)
        .map(|b| {
            let y0 = s.y_min + b as f64 * width;
            (0..sub).map(|k| line_at(y0 + (k as f64 + 0.5) * width / sub as f64)).sum::<f64>() * width / sub as f64
        })
        .collect();
    let total: f64 = mass.iter().sum();
    let bins = (0..s.n_bins)
        .map(|b| HistogramBin {
            center: s.y_min + (b as f64 + 0.5) * width,
            count: counts[b],
            reference_density: if total > 0.0 { mass[b] / (total * width) } else { 0.0 },
        })
        .collect();
    (bins, width)
}

/// Indices of local maxima of `values` that reach `min_fraction` of the
/// global maximum. Plateaus report their first index.
pub fn local_maxima(values: &[f64], min_fraction: f64) -> Vec<usize> {
    let top = values.iter().cloned().fold(0.0, f64::max);
    let n = values.len();
    (0..n)
        .filter(|&i| {
            let left = if i == 0 { f64::NEG_INFINITY } else { values[i - 1] };
            let right = if i + 1 == n { f64::NEG_INFINITY } else { values[i + 1] };
            values[i] > left && values[i] >= right && values[i] >= min_fraction * top && top > 0.0
        })
        .collect()
}

/// Moving average over `radius` bins on each side, truncated at the ends.
pub fn smooth(values: &[f64], radius: usize) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius).min(n - 1);
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FringeComparison {
    pub reference_maxima: Vec<usize>,
    pub histogram_maxima: Vec<usize>,
    /// Largest distance in bins from a reference maximum to the nearest
    /// histogram maximum, and vice versa.
    pub max_offset_bins: usize,
}

impl FringeComparison {
    pub fn within(&self, bins: usize) -> bool {
        !self.reference_maxima.is_empty() && self.max_offset_bins <= bins
    }
}

/// Matches significant maxima of the smoothed histogram against maxima of
/// the reference profile, both ways.
pub fn compare_fringes(histogram: &[HistogramBin], min_fraction: f64) -> FringeComparison {
    let counts: Vec<f64> = histogram.iter().map(|b| b.count as f64).collect();
    let reference: Vec<f64> = histogram.iter().map(|b| b.reference_density).collect();
    let reference_maxima = local_maxima(&reference, min_fraction);
    let histogram_maxima = local_maxima(&smooth(&counts, 1), min_fraction);
    let nearest = |i: usize, set: &[usize]| set.iter().map(|&j| i.abs_diff(j)).min().unwrap_or(usize::MAX);
    let offset = reference_maxima
        .iter()
        .map(|&i| nearest(i, &histogram_maxima))
        .chain(histogram_maxima.iter().map(|&i| nearest(i, &reference_maxima)))
        .max()
        .unwrap_or(usize::MAX);
    FringeComparison { reference_maxima, histogram_maxima, max_offset_bins: offset }
}

/// Largest |c_i - c_mirror| / sqrt(c_i + c_mirror) over mirror bin pairs.
pub fn mirror_asymmetry(histogram: &[HistogramBin]) -> f64 {
    let n = histogram.len();
    (0..n / 2)
        .filter_map(|i| {
            let (a, b) = (histogram[i].count as f64, histogram[n - 1 - i].count as f64);
            (a + b > 0.0).then(|| (a - b).abs() / (a + b).sqrt())
        })
        .fold(0.0, f64::max)
}

pub fn write_spots(path: &Path, spots: &[Spot]) -> Result<()> {
    let mut t = Table::create(path, &header(&["stream_id", "y_detect"]))?;
    for s in spots {
        t.row(&[s.stream_id.to_string(), format!("{:e}", s.y)])?;
    }
    t.finish()
}

pub fn write_histogram(path: &Path, bins: &[HistogramBin]) -> Result<()> {
    let mut t = Table::create(path, &header(&["bin_center", "count", "reference_density"]))?;
    for b in bins {
        t.row(&[format!("{:e}", b.center), b.count.to_string(), format!("{:e}", b.reference_density)])?;
    }
    t.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maxima_and_smoothing() {
        let v = [0.0, 1.0, 0.0, 0.05, 0.0, 2.0, 2.0, 1.0];
        assert_eq!(local_maxima(&v, 0.1), vec![1, 5]);
        assert_eq!(smooth(&[0.0, 3.0, 0.0], 1), vec![1.5, 1.0, 1.5]);
    }

    #[test]
    fn fringe_offsets_both_ways() {
        let mk = |counts: &[u64], refs: &[f64]| -> Vec<HistogramBin> {
            counts
                .iter()
                .zip(refs)
                .enumerate()
                .map(|(i, (&c, &r))| HistogramBin { center: i as f64, count: c, reference_density: r })
                .collect()
        };
        let refs = [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let counts = [0, 0, 10, 90, 40, 0, 0, 10, 90, 40, 0, 0];
        let c = compare_fringes(&mk(&counts, &refs), 0.1);
        assert_eq!(c.max_offset_bins, 1);
        assert!(c.within(1));
    }
}
