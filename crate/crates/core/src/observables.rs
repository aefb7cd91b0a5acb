//! Field observables: flux, local velocity and energy, moments, Ehrenfest
//! rates, the continuity residual and the two-packet flux decomposition.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::SchrodingerField;
use crate::grid::Grid;
use crate::potential::PotentialSpec;
use crate::propagate::Propagator;
use crate::spectral::{centered4, Differentiator};

/// Relative density floor below which velocity and energy are masked.
pub const RHO_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeScheme {
    Spectral,
    Centered4,
}

/// Values with a per-point validity mask (`true` = valid).
#[derive(Clone, Debug, PartialEq)]
pub struct Masked<T> {
    pub values: T,
    pub mask: Vec<bool>,
}

impl<T> Masked<T> {
    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub time: f64,
    pub norm: f64,
    pub energy: f64,
    pub position_mean: Vec<f64>,
    pub momentum_mean: Vec<f64>,
    pub continuity_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EhrenfestRates {
    pub dq_dt: Vec<f64>,
    pub dp_dt: Vec<f64>,
    pub minus_grad_v: Vec<f64>,
}

pub fn density(field: &SchrodingerField) -> Vec<f64> {
    field.density()
}

/// Reusable derivative workspace for one grid.
pub struct Observer {
    grid: Grid,
    diff: Differentiator,
}

impl Observer {
    pub fn new(grid: &Grid) -> Self {
        Self { grid: grid.clone(), diff: Differentiator::new(grid) }
    }

    /// Gradients of phi_r and phi_c, per axis.
    pub fn gradients(&mut self, field: &SchrodingerField, scheme: DerivativeScheme) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        match scheme {
            DerivativeScheme::Spectral => {
                let g = self.diff.gradient(&field.to_complex());
                let gr = g.iter().map(|a| a.iter().map(|z| z.re).collect()).collect();
                let gc = g.iter().map(|a| a.iter().map(|z| z.im).collect()).collect();
                (gr, gc)
            }
            DerivativeScheme::Centered4 => {
                let p = self.grid.is_periodic();
                let gr = (0..self.grid.dims()).map(|a| centered4(&self.grid, &field.phi_r, a, p)).collect();
                let gc = (0..self.grid.dims()).map(|a| centered4(&self.grid, &field.phi_c, a, p)).collect();
                (gr, gc)
            }
        }
    }

    /// j = (hbar/m)(phi_r grad phi_c - phi_c grad phi_r).
    pub fn flux_with(&mut self, field: &SchrodingerField, scheme: DerivativeScheme) -> Vec<Vec<f64>> {
        let (gr, gc) = self.gradients(field, scheme);
        let s = field.hbar / field.mass;
        (0..self.grid.dims())
            .map(|a| {
                (0..self.grid.len())
                    .map(|i| s * (field.phi_r[i] * gc[a][i] - field.phi_c[i] * gr[a][i]))
                    .collect()
            })
            .collect()
    }

    pub fn flux(&mut self, field: &SchrodingerField) -> Vec<Vec<f64>> {
        self.flux_with(field, DerivativeScheme::Spectral)
    }

    pub fn local_velocity(&mut self, field: &SchrodingerField) -> Masked<Vec<Vec<f64>>> {
        let j = self.flux(field);
        velocity_from_flux(&field.density(), j)
    }

    /// Re(H psi / psi), masked below the density floor.
    pub fn local_energy(&mut self, field: &SchrodingerField, potential: &PotentialSpec) -> Result<Masked<Vec<f64>>> {
        let v = potential.on_grid(&self.grid, field.mass)?;
        let psi = field.to_complex();
        let lap = self.diff.laplacian(&psi);
        let rho = field.density();
        let mask = floor_mask(&rho);
        let k = -field.hbar * field.hbar / (2.0 * field.mass);
        let values = (0..psi.len())
            .map(|i| if mask[i] { v[i] + (k * lap[i] / psi[i]).re } else { 0.0 })
            .collect();
        Ok(Masked { values, mask })
    }

    pub fn momentum_mean(&mut self, field: &SchrodingerField) -> Vec<f64> {
        let psi = field.to_complex();
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        (0..self.grid.dims())
            .map(|a| {
                let k = self.diff.k(a).to_vec();
                field.hbar * self.diff.spectral_moment(&psi, |i| k[i]) / norm
            })
            .collect()
    }

    /// <H> with the kinetic part evaluated in momentum space.
    pub fn energy(&mut self, field: &SchrodingerField, potential: &PotentialSpec) -> Result<f64> {
        let v = potential.on_grid(&self.grid, field.mass)?;
        let psi = field.to_complex();
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let k2 = self.diff.k2().to_vec();
        let c = field.hbar * field.hbar / (2.0 * field.mass);
        let kinetic = c * self.diff.spectral_moment(&psi, |i| k2[i]);
        let pot: f64 = psi.iter().zip(&v).map(|(z, v)| v * z.norm_sqr()).sum();
        Ok((kinetic + pot) / norm)
    }

    pub fn minus_mean_gradient(&self, field: &SchrodingerField, potential: &PotentialSpec) -> Vec<f64> {
        let rho = field.density();
        let norm: f64 = rho.iter().sum();
        let dims = self.grid.dims();
        let mut out = vec![0.0; dims];
        for (i, r) in rho.iter().enumerate() {
            let g = potential.gradient(&self.grid.point(i)[..dims], field.mass);
            for a in 0..dims {
                out[a] -= r * g[a];
            }
        }
        out.iter().map(|x| x / norm).collect()
    }

    pub fn divergence(&mut self, j: &[Vec<f64>]) -> Vec<f64> {
        self.diff.divergence(j)
    }

    /// L2 norm of d rho/dt + div j with the divergence averaged over both
    /// ends, which is centered at the midpoint in time.
    pub fn continuity_residual(&mut self, f0: &SchrodingerField, f1: &SchrodingerField) -> Result<f64> {
        self.grid.same_as(&f0.grid)?;
        self.grid.same_as(&f1.grid)?;
        let dt = f1.time - f0.time;
        if !(dt > 0.0) {
            return Err(crate::error::Error::InvalidTimeStep(format!(
                "fields are not consecutive in time (dt = {dt})"
            )));
        }
        let (r0, r1) = (f0.density(), f1.density());
        let d0 = { let j = self.flux(f0); self.divergence(&j) };
        let d1 = { let j = self.flux(f1); self.divergence(&j) };
        let sq: Vec<f64> = (0..r0.len())
            .map(|i| {
                let r = (r1[i] - r0[i]) / dt + 0.5 * (d0[i] + d1[i]);
                r * r
            })
            .collect();
        Ok(self.grid.integrate(&sq).sqrt())
    }

    pub fn record(
        &mut self,
        field: &SchrodingerField,
        potential: &PotentialSpec,
        previous: Option<&SchrodingerField>,
    ) -> Result<ObservableRecord> {
        Ok(ObservableRecord {
            time: field.time,
            norm: field.norm_sqr(),
            energy: self.energy(field, potential)?,
            position_mean: field.position_mean(),
            momentum_mean: self.momentum_mean(field),
            continuity_residual: match previous {
                Some(p) => self.continuity_residual(p, field)?,
                None => 0.0,
            },
        })
    }
}

fn floor_mask(rho: &[f64]) -> Vec<bool> {
    let peak = rho.iter().cloned().fold(0.0, f64::max);
    rho.iter().map(|&r| r >= RHO_FLOOR * peak && r > 0.0).collect()
}

/// v = (hbar/m) Im(conj(psi) grad psi) / rho from a precomputed gradient.
pub fn velocity_from_gradient(psi: &[Complex64], grad: &[Vec<Complex64>], hbar: f64, mass: f64) -> Masked<Vec<Vec<f64>>> {
    let rho: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
    let mask = floor_mask(&rho);
    let s = hbar / mass;
    let values = grad
        .iter()
        .map(|g| {
            (0..psi.len())
                .map(|i| if mask[i] { s * (psi[i].conj() * g[i]).im / rho[i] } else { 0.0 })
                .collect()
        })
        .collect();
    Masked { values, mask }
}

pub fn velocity_from_flux(rho: &[f64], j: Vec<Vec<f64>>) -> Masked<Vec<Vec<f64>>> {
    let mask = floor_mask(rho);
    let values = j
        .into_iter()
        .map(|ja| ja.iter().zip(rho).zip(&mask).map(|((j, r), &m)| if m { j / r } else { 0.0 }).collect())
        .collect();
    Masked { values, mask }
}

pub fn flux(field: &SchrodingerField) -> Vec<Vec<f64>> {
    Observer::new(&field.grid).flux(field)
}

pub fn local_velocity(field: &SchrodingerField) -> Masked<Vec<Vec<f64>>> {
    Observer::new(&field.grid).local_velocity(field)
}

pub fn local_energy(field: &SchrodingerField, potential: &PotentialSpec) -> Result<Masked<Vec<f64>>> {
    Observer::new(&field.grid).local_energy(field, potential)
}

pub fn energy(field: &SchrodingerField, potential: &PotentialSpec) -> Result<f64> {
    Observer::new(&field.grid).energy(field, potential)
}

pub fn momentum_mean(field: &SchrodingerField) -> Vec<f64> {
    Observer::new(&field.grid).momentum_mean(field)
}

pub fn continuity_residual(f0: &SchrodingerField, f1: &SchrodingerField) -> Result<f64> {
    Observer::new(&f0.grid).continuity_residual(f0, f1)
}

/// Central differences of <q> and <p> over one step of size `dt`, taken
/// as half steps forward and backward, together with -<grad V>.
pub fn ehrenfest_rates(field: &SchrodingerField, potential: &PotentialSpec, dt: f64) -> Result<EhrenfestRates> {
    let (h, m) = (field.hbar, field.mass);
    let fwd = Propagator::new(&field.grid, potential, 0.5 * dt, h, m, None)?.run_complex(field, 1)?;
    let back = Propagator::new(&field.grid, potential, -0.5 * dt, h, m, None)?.run_complex(field, 1)?;
    let mut obs = Observer::new(&field.grid);
    let (qf, qb) = (fwd.position_mean(), back.position_mean());
    let (pf, pb) = (obs.momentum_mean(&fwd), obs.momentum_mean(&back));
    Ok(EhrenfestRates {
        dq_dt: qf.iter().zip(&qb).map(|(a, b)| (a - b) / dt).collect(),
        dp_dt: pf.iter().zip(&pb).map(|(a, b)| (a - b) / dt).collect(),
        minus_grad_v: obs.minus_mean_gradient(field, potential),
    })
}

/// Terms of m j for psi = R1 exp(i S1/hbar) + R2 exp(i S2/hbar), per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxDecomposition {
    /// R1^2 grad S1 + R2^2 grad S2.
    pub direct: Vec<Vec<f64>>,
    /// hbar (R2 grad R1 - R1 grad R2) sin((S1 - S2)/hbar).
    pub sine_cross: Vec<Vec<f64>>,
    /// R1 R2 (grad S1 + grad S2) cos((S1 - S2)/hbar).
    pub cosine_cross: Vec<Vec<f64>>,
}

impl FluxDecomposition {
    pub fn total(&self) -> Vec<Vec<f64>> {
        self.direct
            .iter()
            .zip(&self.sine_cross)
            .zip(&self.cosine_cross)
            .map(|((d, s), c)| d.iter().zip(s).zip(c).map(|((d, s), c)| d + s + c).collect())
            .collect()
    }
}

/// Amplitude and phase of one packet with their gradients (per axis).
pub struct PacketTerms<'a> {
    pub r: &'a [f64],
    pub grad_r: &'a [Vec<f64>],
    pub s: &'a [f64],
    pub grad_s: &'a [Vec<f64>],
}

pub fn flux_decomposition_from_gradients(p1: &PacketTerms, p2: &PacketTerms, hbar: f64) -> FluxDecomposition {
    let dims = p1.grad_r.len();
    let n = p1.r.len();
    let mut direct = vec![vec![0.0; n]; dims];
    let mut sine_cross = vec![vec![0.0; n]; dims];
    let mut cosine_cross = vec![vec![0.0; n]; dims];
    for i in 0..n {
        let (r1, r2) = (p1.r[i], p2.r[i]);
        let (sn, cs) = ((p1.s[i] - p2.s[i]) / hbar).sin_cos();
        for a in 0..dims {
            let (gs1, gs2) = (p1.grad_s[a][i], p2.grad_s[a][i]);
            direct[a][i] = r1 * r1 * gs1 + r2 * r2 * gs2;
            sine_cross[a][i] = hbar * (r2 * p1.grad_r[a][i] - r1 * p2.grad_r[a][i]) * sn;
            cosine_cross[a][i] = r1 * r2 * (gs1 + gs2) * cs;
        }
    }
    FluxDecomposition { direct, sine_cross, cosine_cross }
}

/// Decomposition from sampled R and S; gradients use 4th-order stencils
/// with one-sided edges, since S is not periodic in general.
pub fn two_packet_flux_decomposition(
    grid: &Grid,
    r1: &[f64],
    s1: &[f64],
    r2: &[f64],
    s2: &[f64],
    hbar: f64,
) -> FluxDecomposition {
    let grad = |f: &[f64]| -> Vec<Vec<f64>> { (0..grid.dims()).map(|a| centered4(grid, f, a, false)).collect() };
    let (gr1, gs1, gr2, gs2) = (grad(r1), grad(s1), grad(r2), grad(s2));
    flux_decomposition_from_gradients(
        &PacketTerms { r: r1, grad_r: &gr1, s: s1, grad_s: &gs1 },
        &PacketTerms { r: r2, grad_r: &gr2, s: s2, grad_s: &gs2 },
        hbar,
    )
}

/// Superposes two packets given in amplitude/phase form.
pub fn superpose_polar(r1: &[f64], s1: &[f64], r2: &[f64], s2: &[f64], hbar: f64) -> Vec<Complex64> {
    (0..r1.len())
        .map(|i| Complex64::from_polar(r1[i], s1[i] / hbar) + Complex64::from_polar(r2[i], s2[i] / hbar))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::init_coherent_state;

    #[test]
    fn plane_wave_flux_and_velocity() {
        let g = Grid::line(0.0, 2.0 * std::f64::consts::PI, 64).unwrap();
        let x = g.coordinate_field(0);
        let k = 3.0;
        let (hbar, m) = (1.0, 2.0);
        let f = SchrodingerField::new(
            g.clone(),
            x.iter().map(|x| (k * x).cos()).collect(),
            x.iter().map(|x| (k * x).sin()).collect(),
            0.0,
            hbar,
            m,
        )
        .unwrap();
        assert!(f.density().iter().all(|r| (r - 1.0).abs() < 1e-15));
        let v = local_velocity(&f);
        assert!(v.values[0].iter().all(|v| (v - hbar * k / m).abs() < 1e-12));
        let e = local_energy(&f, &PotentialSpec::Free).unwrap();
        let p0 = hbar * k;
        assert!(e.values.iter().all(|e| (e - p0 * p0 / (2.0 * m)).abs() < 1e-10));
    }

    #[test]
    fn real_field_has_no_flux() {
        let g = Grid::line(-10.0, 10.0, 128).unwrap();
        let f = init_coherent_state(&g, &[0.0], &[0.0], &[Complex64::new(1.0, 0.0)], 1.0, 1.0).unwrap();
        assert!(flux(&f)[0].iter().all(|&j| j.abs() < 1e-15));
    }

    #[test]
    fn momentum_of_coherent_state() {
        let g = Grid::line(-20.0, 20.0, 512).unwrap();
        let f = init_coherent_state(&g, &[0.0], &[2.0], &[Complex64::new(0.5, 0.0)], 1.0, 1.0).unwrap();
        assert!((momentum_mean(&f)[0] - 2.0).abs() < 1e-10);
        let j = flux(&f);
        assert!((g.integrate(&j[0]) - 2.0).abs() < 1e-8);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = Grid::line(-10.0, 10.0, 128).unwrap();
        let b = Grid::line(-10.0, 10.0, 256).unwrap();
        let fa = init_coherent_state(&a, &[0.0], &[0.0], &[Complex64::new(1.0, 0.0)], 1.0, 1.0).unwrap();
        let mut fb = init_coherent_state(&b, &[0.0], &[0.0], &[Complex64::new(1.0, 0.0)], 1.0, 1.0).unwrap();
        fb.time = 1.0;
        assert!(matches!(continuity_residual(&fa, &fb), Err(crate::error::Error::GridMismatch(_))));
    }
}
