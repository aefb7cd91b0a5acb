//! Action-decomposed Gaussian dynamics in 1D: a classical center carrying
//! the action, a deviation bundle giving sigma(t), and the (c, d) exponent.
//!
//! The wavefunction is g exp(-gamma (q - q_cl)^2 + i (S_cl + p_cl (q - q_cl))/hbar).
//! With kappa = c/sigma^2 and zeta = d/sigma the exponent is evaluated in the
//! regular form gamma = (m/2hbar)(zeta_dot - i kappa sigma_dot)/(kappa sigma + i zeta),
//! which stays finite where sigma vanishes.

use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{SchrodingerField, TAIL_LIMIT};
use crate::grid::Grid;
use crate::io::{header, Table};
use crate::potential::PotentialSpec;

/// Phase-space offset of the bundle neighbours.
pub const NEIGHBOR_OFFSET: f64 = 1e-4;
/// Zeta mode is used inside |sigma| < this fraction of the largest |sigma|.
pub const ZETA_SWITCH: f64 = 1e-6;
/// ... or when dt |sigma_dot / sigma| exceeds this.
pub const RATE_SWITCH: f64 = 0.02;
/// |sigma| below this fraction of max |sigma| counts as a zero.
pub const MASLOV_ZERO_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassicalCenter {
    pub q: f64,
    pub p: f64,
    pub s_cl: f64,
    pub mass: f64,
}

/// Kick-drift-kick leapfrog. The action uses the discrete Lagrangian
/// p_half^2/2m - (V(q0) + V(q1))/2, which is exact for free motion.
pub fn hj_step(c: &ClassicalCenter, potential: &PotentialSpec, dt: f64) -> ClassicalCenter {
    let m = c.mass;
    let v0 = potential.value_1d(c.q, m);
    let p_half = c.p + 0.5 * dt * potential.force_1d(c.q, m);
    let q1 = c.q + dt * p_half / m;
    let p1 = p_half + 0.5 * dt * potential.force_1d(q1, m);
    let v1 = potential.value_1d(q1, m);
    let s_cl = c.s_cl + dt * (p_half * p_half / (2.0 * m) - 0.5 * (v0 + v1));
    ClassicalCenter { q: q1, p: p1, s_cl, mass: m }
}

fn phase_step(q: f64, p: f64, potential: &PotentialSpec, m: f64, dt: f64) -> (f64, f64) {
    let p_half = p + 0.5 * dt * potential.force_1d(q, m);
    let q1 = q + dt * p_half / m;
    (q1, p_half + 0.5 * dt * potential.force_1d(q1, m))
}

/// Reference center with central neighbour pairs at offsets eps and 2 eps
/// in position (sigma_a(0) = 1, sigma_a_dot(0) = 0) and in momentum
/// (sigma_b(0) = 0, sigma_b_dot(0) = 1). The two pair sizes are combined by
/// Richardson extrapolation, cancelling the eps^2 term of the difference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeviationBundle {
    pub center: ClassicalCenter,
    /// (q, p) of the +a, -a, +2a, -2a, +b, -b, +2b, -2b neighbours.
    pub neighbors: [(f64, f64); 8],
    pub eps: f64,
}

impl DeviationBundle {
    pub fn new(center: ClassicalCenter, eps: f64) -> Self {
        let (q, p, m) = (center.q, center.p, center.mass);
        Self {
            center,
            neighbors: [
                (q + eps, p),
                (q - eps, p),
                (q + 2.0 * eps, p),
                (q - 2.0 * eps, p),
                (q, p + eps * m),
                (q, p - eps * m),
                (q, p + 2.0 * eps * m),
                (q, p - 2.0 * eps * m),
            ],
            eps,
        }
    }

    fn pair(&self, k: usize) -> (f64, f64) {
        let n = &self.neighbors[4 * k..4 * k + 4];
        let s = 1.0 / (2.0 * self.eps);
        let d1 = ((n[0].0 - n[1].0) * s, (n[0].1 - n[1].1) * s);
        let d2 = ((n[2].0 - n[3].0) * 0.5 * s, (n[2].1 - n[3].1) * 0.5 * s);
        ((4.0 * d1.0 - d2.0) / 3.0, (4.0 * d1.1 - d2.1) / (3.0 * self.center.mass))
    }

    /// (sigma, sigma_dot) of the position-offset pair; this is the
    /// deviation determinant dq(t)/dq(0).
    pub fn sigma(&self) -> (f64, f64) {
        self.pair(0)
    }

    /// (sigma_b, sigma_b_dot) of the momentum-offset pair.
    pub fn sigma_b(&self) -> (f64, f64) {
        self.pair(1)
    }
}

/// Advances the center and every neighbour by the same leapfrog step.
pub fn deviation_step(b: &DeviationBundle, potential: &PotentialSpec, dt: f64) -> Result<DeviationBundle> {
    let m = b.center.mass;
    let mut next = *b;
    next.center = hj_step(&b.center, potential, dt);
    for n in next.neighbors.iter_mut() {
        *n = phase_step(n.0, n.1, potential, m, dt);
    }
    for k in 0..4 {
        let (a, c) = (next.neighbors[2 * k], next.neighbors[2 * k + 1]);
        let norm = ((a.0 - c.0).powi(2) + ((a.1 - c.1) / m).powi(2)).sqrt();
        if norm < 1e-12 {
            return Err(Error::NeighborCollapse(norm));
        }
    }
    Ok(next)
}

/// 1/(c + i d) and the data that makes it regular through sigma = 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianExponent {
    pub c: f64,
    pub d: f64,
    /// c(0)/sigma(0)^2.
    pub kappa: f64,
    /// zeta = zeta0 sigma_a + zeta_dot0 sigma_b.
    pub zeta0: f64,
    pub zeta_dot0: f64,
    pub maslov: u32,
    /// Whether the last step used the (sigma, zeta) form.
    pub zeta_mode: bool,
}

impl GaussianExponent {
    pub fn gamma_cd(&self) -> Complex64 {
        1.0 / Complex64::new(self.c, self.d)
    }
}

fn hermite(t: f64, h: f64, s0: f64, v0: f64, s1: f64, v1: f64) -> (f64, f64) {
    let x = t / h;
    let (x2, x3) = (x * x, x * x * x);
    let s = (2.0 * x3 - 3.0 * x2 + 1.0) * s0 + (x3 - 2.0 * x2 + x) * h * v0 + (-2.0 * x3 + 3.0 * x2) * s1 + (x3 - x2) * h * v1;
    let ds = ((6.0 * x2 - 6.0 * x) * s0 + (3.0 * x2 - 4.0 * x + 1.0) * h * v0 + (-6.0 * x2 + 6.0 * x) * s1 + (3.0 * x2 - 2.0 * x) * h * v1) / h;
    (s, ds)
}

/// Advances (c, d) from sigma = (s0, v0) to (s1, v1) over `dt`:
/// c' = 2 (sigma_dot/sigma) c, d' = 2 (sigma_dot/sigma) d + 2 hbar/m by RK4
/// with a cubic-Hermite sigma. Near a zero of sigma, or when sigma varies
/// too fast, the step instead sets c = kappa sigma^2 and d = sigma zeta from
/// the bundle value `zeta1`.
#[allow(clippy::too_many_arguments)]
pub fn exponent_step(
    e: &GaussianExponent,
    (s0, v0): (f64, f64),
    (s1, v1): (f64, f64),
    zeta1: f64,
    sigma_typ: f64,
    hbar: f64,
    mass: f64,
    dt: f64,
) -> GaussianExponent {
    let (sm, vm) = hermite(0.5 * dt, dt, s0, v0, s1, v1);
    let small = [s0, sm, s1].iter().any(|s| s.abs() < ZETA_SWITCH * sigma_typ);
    let fast = !small && [(s0, v0), (sm, vm), (s1, v1)].iter().any(|(s, v)| (dt * v / s).abs() > RATE_SWITCH);
    let mut next = *e;
    if small || fast {
        next.c = e.kappa * s1 * s1;
        next.d = s1 * zeta1;
        next.zeta_mode = true;
        return next;
    }
    let k = 2.0 * hbar / mass;
    let rate = |t: f64| {
        let (s, v) = hermite(t, dt, s0, v0, s1, v1);
        2.0 * v / s
    };
    let f = |t: f64, c: f64, d: f64| {
        let r = rate(t);
        (r * c, r * d + k)
    };
    let (c, d) = (e.c, e.d);
    let k1 = f(0.0, c, d);
    let k2 = f(0.5 * dt, c + 0.5 * dt * k1.0, d + 0.5 * dt * k1.1);
    let k3 = f(0.5 * dt, c + 0.5 * dt * k2.0, d + 0.5 * dt * k2.1);
    let k4 = f(dt, c + dt * k3.0, d + dt * k3.1);
    next.c = c + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
    next.d = d + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    next.zeta_mode = false;
    next
}

/// Number of sign changes of sigma along a sampled history. A sample inside
/// the zero tolerance that is not followed by a sign change is an error.
pub fn maslov_index(history: &[f64]) -> Result<u32> {
    let top = history.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let tol = MASLOV_ZERO_TOL * top;
    let mut tracker = MaslovTracker::default();
    for (i, &s) in history.iter().enumerate() {
        tracker.push(s, tol, i)?;
    }
    tracker.finish(history.len())?;
    Ok(tracker.count)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct MaslovTracker {
    count: u32,
    sign: f64,
    touching: Option<usize>,
}

impl MaslovTracker {
    fn push(&mut self, s: f64, tol: f64, index: usize) -> Result<()> {
        if s.abs() <= tol {
            self.touching.get_or_insert(index);
            return Ok(());
        }
        let sign = s.signum();
        if self.sign != 0.0 && sign != self.sign {
            self.count += 1;
        } else if let Some(at) = self.touching {
            if self.sign != 0.0 {
                return Err(Error::AmbiguousZero(at));
            }
        }
        self.sign = sign;
        self.touching = None;
        Ok(())
    }

    fn finish(&self, _len: usize) -> Result<()> {
        Ok(())
    }
}

/// Full state of one ADF Gaussian.
#[derive(Clone, Debug, PartialEq)]
pub struct AdfState {
    pub time: f64,
    pub bundle: DeviationBundle,
    pub exponent: GaussianExponent,
    pub hbar: f64,
    sigma_max: f64,
    root: Complex64,
    tracker: MaslovTracker,
    step: usize,
}

impl AdfState {
    /// Gaussian exp(-gamma0 (q - q0)^2 + i p0 (q - q0)/hbar) with S_cl = 0.
    pub fn new(q0: f64, p0: f64, gamma0: Complex64, hbar: f64, mass: f64) -> Result<Self> {
        if !(gamma0.re > 0.0) {
            return Err(Error::NonpositiveWidth(gamma0.re));
        }
        if !(hbar > 0.0) || !(mass > 0.0) {
            return Err(Error::InvalidInput("hbar and mass must be positive".into()));
        }
        let cd = 1.0 / gamma0;
        let center = ClassicalCenter { q: q0, p: p0, s_cl: 0.0, mass };
        let exponent = GaussianExponent {
            c: cd.re,
            d: cd.im,
            kappa: cd.re,
            zeta0: cd.im,
            zeta_dot0: 2.0 * hbar / mass,
            maslov: 0,
            zeta_mode: false,
        };
        let root = (1.0 / Complex64::new(cd.re, cd.im)).sqrt();
        Ok(Self {
            time: 0.0,
            bundle: DeviationBundle::new(center, NEIGHBOR_OFFSET),
            exponent,
            hbar,
            sigma_max: 1.0,
            root,
            tracker: MaslovTracker { count: 0, sign: 1.0, touching: None },
            step: 0,
        })
    }

    pub fn center(&self) -> &ClassicalCenter {
        &self.bundle.center
    }

    pub fn mass(&self) -> f64 {
        self.bundle.center.mass
    }

    pub fn sigma(&self) -> (f64, f64) {
        self.bundle.sigma()
    }

    /// (zeta, zeta_dot) carried by the bundle.
    pub fn zeta(&self) -> (f64, f64) {
        let (a, ad) = self.bundle.sigma();
        let (b, bd) = self.bundle.sigma_b();
        let e = &self.exponent;
        (e.zeta0 * a + e.zeta_dot0 * b, e.zeta0 * ad + e.zeta_dot0 * bd)
    }

    /// sigma zeta_dot - sigma_dot zeta; equals 2 hbar/m.
    pub fn wronskian(&self) -> f64 {
        let (s, sd) = self.sigma();
        let (z, zd) = self.zeta();
        s * zd - sd * z
    }

    /// (kappa, zeta, zeta_dot) used for evaluation: from (c, d) in RK4 mode,
    /// from the bundle in zeta mode.
    fn effective(&self) -> (f64, f64, f64) {
        let (s, sd) = self.sigma();
        let e = &self.exponent;
        if e.zeta_mode {
            let (z, zd) = self.zeta();
            (e.kappa, z, zd)
        } else {
            let z = e.d / s;
            (e.c / (s * s), z, sd * z / s + 2.0 * self.hbar / (self.mass() * s))
        }
    }

    /// Combined exponent including the quadratic Hamilton-Jacobi phase.
    pub fn gamma(&self) -> Complex64 {
        let (s, sd) = self.sigma();
        let (k, z, zd) = self.effective();
        let m = self.mass();
        (m / (2.0 * self.hbar)) * Complex64::new(zd, -k * sd) / Complex64::new(k * s, z)
    }

    fn raw_root(&self) -> Complex64 {
        let (s, _) = self.sigma();
        let (k, z, _) = self.effective();
        (1.0 / Complex64::new(k * s, z)).sqrt()
    }

    /// (2 kappa/pi)^(1/4) (kappa sigma + i zeta)^(-1/2) on the continuous branch.
    pub fn prefactor(&self) -> Complex64 {
        let (k, _, _) = self.effective();
        (2.0 * k / std::f64::consts::PI).powf(0.25) * self.root
    }

    pub fn maslov(&self) -> u32 {
        self.exponent.maslov
    }

    /// Psi at q.
    pub fn value(&self, q: f64) -> Complex64 {
        let c = self.center();
        let y = q - c.q;
        let arg = -self.gamma() * y * y + Complex64::new(0.0, (c.s_cl + c.p * y) / self.hbar);
        self.prefactor() * arg.exp()
    }

    /// Width sqrt(<(q - q_cl)^2>) of |psi|^2.
    pub fn width(&self) -> f64 {
        (1.0 / (4.0 * self.gamma().re)).sqrt()
    }
}

/// One step: center and bundle by leapfrog, exponent by RK4 or the zeta
/// form, then the Maslov count and the square-root branch.
pub fn adf_step(state: &AdfState, potential: &PotentialSpec, dt: f64) -> Result<AdfState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidTimeStep(format!("dt = {dt}")));
    }
    let before = state.sigma();
    let mut next = state.clone();
    next.bundle = deviation_step(&state.bundle, potential, dt)?;
    next.time += dt;
    next.step += 1;
    let after = next.sigma();
    next.sigma_max = state.sigma_max.max(after.0.abs());
    let (zeta1, _) = next.zeta();
    next.exponent = exponent_step(
        &state.exponent,
        before,
        after,
        zeta1,
        next.sigma_max,
        state.hbar,
        state.mass(),
        dt,
    );
    next.tracker.push(after.0, MASLOV_ZERO_TOL * next.sigma_max, next.step)?;
    next.exponent.maslov = next.tracker.count;
    let r = next.raw_root();
    next.root = if (r - state.root).norm() <= (r + state.root).norm() { r } else { -r };
    Ok(next)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdfRecord {
    pub time: f64,
    pub q_cl: f64,
    pub p_cl: f64,
    pub s_cl: f64,
    pub sigma: f64,
    pub c: f64,
    pub d: f64,
    pub maslov: u32,
    pub wronskian: f64,
}

impl AdfRecord {
    pub fn of(s: &AdfState) -> Self {
        let c = s.center();
        Self {
            time: s.time,
            q_cl: c.q,
            p_cl: c.p,
            s_cl: c.s_cl,
            sigma: s.sigma().0,
            c: s.exponent.c,
            d: s.exponent.d,
            maslov: s.maslov(),
            wronskian: s.wronskian(),
        }
    }
}

/// `n` steps, recording every `record_every` steps and the last one.
pub fn run_adf(
    state: &AdfState,
    potential: &PotentialSpec,
    dt: f64,
    n: usize,
    record_every: usize,
) -> Result<(AdfState, Vec<AdfRecord>)> {
    let every = record_every.max(1);
    let mut s = state.clone();
    let mut records = vec![AdfRecord::of(&s)];
    for k in 1..=n {
        s = adf_step(&s, potential, dt)?;
        if k % every == 0 || k == n {
            records.push(AdfRecord::of(&s));
        }
    }
    Ok((s, records))
}

pub fn write_adf_csv(path: &Path, records: &[AdfRecord]) -> Result<()> {
    let mut t = Table::create(
        path,
        &header(&["time", "q_cl", "p_cl", "S_cl", "sigma", "c", "d", "maslov", "wronskian"]),
    )?;
    for r in records {
        t.row(&[
            format!("{:e}", r.time),
            format!("{:e}", r.q_cl),
            format!("{:e}", r.p_cl),
            format!("{:e}", r.s_cl),
            format!("{:e}", r.sigma),
            format!("{:e}", r.c),
            format!("{:e}", r.d),
            r.maslov.to_string(),
            format!("{:e}", r.wronskian),
        ])?;
    }
    t.finish()
}

/// Psi on a 1D grid. Fails if the packet is not contained.
pub fn evaluate_adf(state: &AdfState, grid: &Grid) -> Result<SchrodingerField> {
    if grid.dims() != 1 {
        return Err(Error::InvalidGrid("ADF evaluation is 1D".into()));
    }
    let psi: Vec<Complex64> = grid.axis(0).coords().iter().map(|&q| state.value(q)).collect();
    let field = SchrodingerField::from_complex(grid.clone(), &psi, state.time, state.hbar, state.mass())?;
    let tail = field.boundary_tail();
    if tail > TAIL_LIMIT {
        return Err(Error::PacketEscapesGrid { tail, limit: TAIL_LIMIT });
    }
    Ok(field)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CausticCheck {
    pub t_star: f64,
    /// Largest sampled Re 1/(c + i d) near t*.
    pub peak: f64,
    /// kappa sigma_1^2 (m/2hbar)^2 with sigma_1 the fitted slope at t*.
    pub predicted: f64,
    pub sigma_slope: f64,
    /// Fitted slope of d(t) at t*; expected -2 hbar/m.
    pub d_slope: f64,
}

impl CausticCheck {
    pub fn relative_error(&self) -> f64 {
        (self.peak - self.predicted).abs() / self.predicted
    }
}

/// Steps through the first zero of sigma and compares the peak of
/// Re 1/(c + i d) with its predicted limit. `window` is the half-width in
/// time of the fit and sampling region.
pub fn caustic_limit_check(
    state: &AdfState,
    potential: &PotentialSpec,
    dt: f64,
    max_steps: usize,
    window: f64,
) -> Result<CausticCheck> {
    let mut s = state.clone();
    let mut samples: Vec<(f64, f64, f64, f64)> = vec![(s.time, s.sigma().0, s.exponent.c, s.exponent.d)];
    let mut t_star = None;
    for _ in 0..max_steps {
        let prev = s.sigma().0;
        s = adf_step(&s, potential, dt)?;
        let cur = s.sigma().0;
        samples.push((s.time, cur, s.exponent.c, s.exponent.d));
        if t_star.is_none() && prev.signum() != cur.signum() && prev != 0.0 {
            t_star = Some(s.time - dt * cur / (cur - prev));
        }
        if let Some(ts) = t_star {
            if s.time > ts + window {
                break;
            }
        }
    }
    let t_star = t_star.ok_or_else(|| Error::InvalidInput("sigma has no zero within max_steps".into()))?;
    let near: Vec<&(f64, f64, f64, f64)> = samples.iter().filter(|x| (x.0 - t_star).abs() <= window).collect();
    let fit = |f: &dyn Fn(&(f64, f64, f64, f64)) -> f64| -> f64 {
        let n = near.len() as f64;
        let mt = near.iter().map(|x| x.0).sum::<f64>() / n;
        let my = near.iter().map(|x| f(x)).sum::<f64>() / n;
        let sxy: f64 = near.iter().map(|x| (x.0 - mt) * (f(x) - my)).sum();
        let sxx: f64 = near.iter().map(|x| (x.0 - mt) * (x.0 - mt)).sum();
        sxy / sxx
    };
    let sigma_slope = fit(&|x| x.1);
    let d_slope = fit(&|x| x.3);
    let peak = near
        .iter()
        .map(|x| (1.0 / Complex64::new(x.2, x.3)).re)
        .fold(f64::NEG_INFINITY, f64::max);
    let m = state.mass();
    let e = &state.exponent;
    let predicted = e.kappa * sigma_slope * sigma_slope * (m / (2.0 * state.hbar)).powi(2);
    Ok(CausticCheck { t_star, peak, predicted, sigma_slope, d_slope })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_action_and_exponent() {
        let s0 = AdfState::new(0.0, 1.5, Complex64::new(0.5, 0.0), 1.0, 2.0).unwrap();
        let (s, _) = run_adf(&s0, &PotentialSpec::Free, 1e-3, 1000, 1000).unwrap();
        let c = s.center();
        assert!((c.s_cl - 1.5 * 1.5 / 4.0).abs() < 1e-12);
        assert!((s.sigma().0 - 1.0).abs() < 1e-9);
        assert!((s.exponent.c - 2.0).abs() < 1e-10);
        assert!((s.exponent.d - 1.0).abs() < 1e-10);
        assert_eq!(s.maslov(), 0);
    }

    #[test]
    fn maslov_counts_and_rejects_touches() {
        let h: Vec<f64> = (0..1000).map(|k| (k as f64 * 0.0071).cos()).collect();
        assert_eq!(maslov_index(&h).unwrap(), 2);
        let touch = [1.0, 0.5, 0.0, 0.5, 1.0];
        assert!(matches!(maslov_index(&touch), Err(Error::AmbiguousZero(2))));
    }

    #[test]
    fn harmonic_period_returns_and_counts_two_zeros() {
        let h = PotentialSpec::harmonic(1.0);
        let s0 = AdfState::new(1.0, 0.5, Complex64::new(0.5, 0.2), 1.0, 1.0).unwrap();
        let n = 60000;
        let dt = 2.0 * std::f64::consts::PI / n as f64;
        let (s, _) = run_adf(&s0, &h, dt, n, n).unwrap();
        let c = s.center();
        assert!((c.q - 1.0).abs() < 1e-8 && (c.p - 0.5).abs() < 1e-8);
        assert_eq!(s.maslov(), 2);
        assert!((s.wronskian() - 2.0).abs() < 1e-8);
        let (half, _) = run_adf(&s0, &h, dt, n / 2, n).unwrap();
        assert_eq!(half.maslov(), 1);
    }

    #[test]
    fn constant_potential_lowers_action() {
        let v0 = 0.7;
        let flat = PotentialSpec::Sampled { values: vec![v0; 8], min: -50.0, max: 50.0 };
        let s0 = AdfState::new(0.0, 1.0, Complex64::new(0.5, 0.0), 1.0, 1.0).unwrap();
        let (a, _) = run_adf(&s0, &PotentialSpec::Free, 1e-2, 100, 100).unwrap();
        let (b, _) = run_adf(&s0, &flat, 1e-2, 100, 100).unwrap();
        assert!((a.center().s_cl - b.center().s_cl - v0).abs() < 1e-10);
    }

    #[test]
    fn wronskian_scales_with_hbar_over_mass() {
        let h = PotentialSpec::harmonic(1.3);
        for (hbar, m) in [(1.0, 1.0), (2.0, 1.0), (1.0, 2.0)] {
            let s0 = AdfState::new(0.3, 0.0, Complex64::new(0.5, 0.1), hbar, m).unwrap();
            let (s, _) = run_adf(&s0, &h, 1e-3, 3000, 3000).unwrap();
            assert!((s.wronskian() - 2.0 * hbar / m).abs() < 1e-8);
        }
    }

    #[test]
    fn caustic_peak_scales_with_hbar() {
        let h = PotentialSpec::harmonic(1.0);
        let peak = |hbar: f64| {
            let s0 = AdfState::new(0.5, 0.0, Complex64::new(0.5, 0.0), hbar, 1.0).unwrap();
            caustic_limit_check(&s0, &h, 1e-4, 100_000, 0.01).unwrap()
        };
        let (a, b) = (peak(1.0), peak(10.0));
        assert!(a.relative_error() < 0.05 && b.relative_error() < 0.05);
        assert!((a.peak / b.peak / 100.0 - 1.0).abs() < 0.05);
        assert!((a.d_slope + 2.0).abs() < 0.1);
    }

    #[test]
    fn initial_evaluation_is_normalized_plane_wave() {
        let grid = Grid::line(-10.0, 10.0, 512).unwrap();
        let s0 = AdfState::new(0.5, 1.2, Complex64::new(0.8, 0.0), 1.0, 1.0).unwrap();
        let f = evaluate_adf(&s0, &grid).unwrap();
        assert!((f.norm_sqr() - 1.0).abs() < 1e-10);
        let q = 0.9;
        let v = s0.value(q);
        let env = (1.6 / std::f64::consts::PI).powf(0.25) * (-0.8 * 0.16f64).exp();
        assert!((v.norm() - env).abs() < 1e-11);
        assert!((v.arg() - 1.2 * 0.4).abs() < 1e-11);
        let small = Grid::line(-1.0, 1.0, 64).unwrap();
        assert!(matches!(evaluate_adf(&s0, &small), Err(Error::PacketEscapesGrid { .. })));
    }

    #[test]
    fn hermite_reproduces_cubic() {
        let f = |t: f64| 1.0 + t - 2.0 * t * t + 0.5 * t * t * t;
        let df = |t: f64| 1.0 - 4.0 * t + 1.5 * t * t;
        let (s, ds) = hermite(0.3, 0.8, f(0.0), df(0.0), f(0.8), df(0.8));
        assert!((s - f(0.3)).abs() < 1e-14 && (ds - df(0.3)).abs() < 1e-13);
    }
}
