//! Trial families and their parameter-space geometry.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ParameterState;
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

/// Quadrature nodes for families without closed forms.
pub const QUADRATURE_NODES: usize = 2048;
/// Window half-width in units of 1/sqrt(Re a).
const WINDOW: f64 = 9.0;
const TAIL_LIMIT: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrialFamily {
    /// exp(-alpha (x-q0)^2 + i p0 (x-q0)/hbar) with fixed alpha; u = q0, v = p0.
    CoherentState { alpha: f64 },
    /// (1 + skew (x-q0)) exp(-(a_r + i a_i)(x-q0)^2 + i p0 (x-q0)/hbar);
    /// u = (q0, a_r), v = (p0, a_i).
    SkewedGaussian { skew: f64 },
    /// c_1 g(x; q1, p1) + c_2 g(x; q2, p2) with coherent-state g of fixed
    /// alpha; u = (q1, q2), v_j = w_j p_j with w_j = c_j^2 / (c_1^2 + c_2^2).
    TwoGaussianSum { alpha: f64, coefficients: [f64; 2] },
}

impl TrialFamily {
    pub fn pairs(&self) -> usize {
        match self {
            TrialFamily::CoherentState { .. } => 1,
            _ => 2,
        }
    }

    fn weights(c: &[f64; 2]) -> [f64; 2] {
        let s = c[0] * c[0] + c[1] * c[1];
        [c[0] * c[0] / s, c[1] * c[1] / s]
    }

    pub fn validate(&self, state: &ParameterState) -> Result<()> {
        state.validate()?;
        if state.pairs() != self.pairs() {
            return Err(Error::InvalidInput(format!(
                "family needs {} parameter pairs, state has {}",
                self.pairs(),
                state.pairs()
            )));
        }
        match self {
            TrialFamily::CoherentState { alpha } | TrialFamily::TwoGaussianSum { alpha, .. } if !(*alpha > 0.0) => {
                Err(Error::NonpositiveWidth(*alpha))
            }
            TrialFamily::TwoGaussianSum { coefficients, .. } if coefficients.iter().any(|c| *c == 0.0 || !c.is_finite()) => {
                Err(Error::InvalidInput("two-Gaussian coefficients must be nonzero".into()))
            }
            TrialFamily::SkewedGaussian { .. } if !(state.u[1] > 0.0) => Err(Error::NonpositiveWidth(state.u[1])),
            _ => Ok(()),
        }
    }

    fn window(&self, s: &ParameterState) -> (f64, f64) {
        match self {
            TrialFamily::CoherentState { alpha } => {
                let w = WINDOW / alpha.sqrt();
                (s.u[0] - w, s.u[0] + w)
            }
            TrialFamily::SkewedGaussian { .. } => {
                let w = WINDOW / s.u[1].sqrt();
                (s.u[0] - w, s.u[0] + w)
            }
            TrialFamily::TwoGaussianSum { alpha, .. } => {
                let w = WINDOW / alpha.sqrt();
                (s.u[0].min(s.u[1]) - w, s.u[0].max(s.u[1]) + w)
            }
        }
    }

    /// Unnormalized chi, chi' and their derivatives along z = (u, v).
    fn eval(&self, s: &ParameterState, x: f64, hbar: f64, out: &mut Sample) {
        match self {
            TrialFamily::CoherentState { alpha } => {
                let g = Component::new(x, s.u[0], s.v[0], Complex64::new(*alpha, 0.0), 0.0, hbar);
                out.chi = g.chi;
                out.dchi = g.dchi;
                out.d[0] = g.d_q();
                out.d[1] = g.d_p(hbar);
            }
            TrialFamily::SkewedGaussian { skew } => {
                let g = Component::new(x, s.u[0], s.v[0], Complex64::new(s.u[1], s.v[1]), *skew, hbar);
                out.chi = g.chi;
                out.dchi = g.dchi;
                out.d[0] = g.d_q();
                out.d[1] = g.d_a(Complex64::new(1.0, 0.0));
                out.d[2] = g.d_p(hbar);
                out.d[3] = g.d_a(Complex64::new(0.0, 1.0));
            }
            TrialFamily::TwoGaussianSum { alpha, coefficients: c } => {
                let w = Self::weights(c);
                let a = Complex64::new(*alpha, 0.0);
                let g1 = Component::new(x, s.u[0], s.v[0] / w[0], a, 0.0, hbar);
                let g2 = Component::new(x, s.u[1], s.v[1] / w[1], a, 0.0, hbar);
                out.chi = c[0] * g1.chi + c[1] * g2.chi;
                out.dchi = c[0] * g1.dchi + c[1] * g2.dchi;
                let scale = |p: (Complex64, Complex64), k: f64| (k * p.0, k * p.1);
                out.d[0] = scale(g1.d_q(), c[0]);
                out.d[1] = scale(g2.d_q(), c[1]);
                out.d[2] = scale(g1.d_p(hbar), c[0] / w[0]);
                out.d[3] = scale(g2.d_p(hbar), c[1] / w[1]);
            }
        }
    }
}

#[derive(Clone, Copy, Default)]
struct Sample {
    chi: Complex64,
    dchi: Complex64,
    /// (d chi / d z_i, d chi' / d z_i).
    d: [(Complex64, Complex64); 4],
}

/// P(y) exp(E(y)) with P = 1 + s y, E = -a y^2 + i k y, y = x - q, k = p/hbar.
struct Component {
    y: f64,
    chi: Complex64,
    dchi: Complex64,
    ddchi: Complex64,
}

impl Component {
    fn new(x: f64, q: f64, p: f64, a: Complex64, s: f64, hbar: f64) -> Self {
        let y = x - q;
        let k = Complex64::new(0.0, p / hbar);
        let e = (-a * y * y + k * y).exp();
        let pre = 1.0 + s * y;
        let de = -2.0 * a * y + k;
        let chi = pre * e;
        let dchi = (s + pre * de) * e;
        let ddchi = (2.0 * s * de + pre * (-2.0 * a) + pre * de * de) * e;
        Self { y, chi, dchi, ddchi }
    }

    fn d_q(&self) -> (Complex64, Complex64) {
        (-self.dchi, -self.ddchi)
    }

    fn d_p(&self, hbar: f64) -> (Complex64, Complex64) {
        let i = Complex64::new(0.0, 1.0 / hbar);
        (i * self.y * self.chi, i * self.chi + i * self.y * self.dchi)
    }

    /// Derivative along a -> a + t `dir`.
    fn d_a(&self, dir: Complex64) -> (Complex64, Complex64) {
        let y = self.y;
        (-dir * y * y * self.chi, -dir * (2.0 * y * self.chi + y * y * self.dchi))
    }
}

/// Energy, gradients, currents and the symplectic form at one state.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    pub energy: f64,
    pub grad_u: Vec<f64>,
    pub grad_v: Vec<f64>,
    pub j_u: Vec<f64>,
    pub j_v: Vec<f64>,
    /// omega_ij = -2 hbar Im<d_i psi|d_j psi> over z = (u, v).
    pub omega: Vec<Vec<f64>>,
    /// <psi|d_i psi> for the normalized psi.
    pub overlap: Vec<Complex64>,
}

impl Geometry {
    pub fn gradient(&self) -> Vec<f64> {
        self.grad_u.iter().chain(&self.grad_v).copied().collect()
    }

    /// J grad H = (dH/dv, -dH/du).
    pub fn hamilton_velocity(&self) -> Vec<f64> {
        self.grad_v.iter().copied().chain(self.grad_u.iter().map(|g| -g)).collect()
    }
}

/// A trial family bound to a potential and physical constants.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyModel {
    pub family: TrialFamily,
    pub potential: PotentialSpec,
    pub hbar: f64,
    pub mass: f64,
}

impl FamilyModel {
    pub fn new(family: TrialFamily, potential: PotentialSpec, hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0) || !(mass > 0.0) {
            return Err(Error::InvalidInput("hbar and mass must be positive".into()));
        }
        potential.validate(None)?;
        Ok(Self { family, potential, hbar, mass })
    }

    /// True when H(u, v) = T(v) + U(u).
    pub fn is_separable(&self) -> bool {
        matches!(self.family, TrialFamily::CoherentState { .. })
    }

    fn closed_form(&self) -> bool {
        matches!(self.family, TrialFamily::CoherentState { .. })
            && matches!(self.potential, PotentialSpec::Free | PotentialSpec::Harmonic { .. })
    }

    pub fn geometry(&self, s: &ParameterState) -> Result<Geometry> {
        self.family.validate(s)?;
        if self.closed_form() {
            return Ok(self.coherent_closed_form(s));
        }
        self.quadrature(s)
    }

    pub fn energy(&self, s: &ParameterState) -> Result<f64> {
        Ok(self.geometry(s)?.energy)
    }

    fn coherent_closed_form(&self, s: &ParameterState) -> Geometry {
        let TrialFamily::CoherentState { alpha } = self.family else { unreachable!() };
        let (q, p, m, h) = (s.u[0], s.v[0], self.mass, self.hbar);
        let mut energy = h * h * alpha / (2.0 * m) + p * p / (2.0 * m);
        let mut dq = 0.0;
        if let PotentialSpec::Harmonic { omega, center } = &self.potential {
            let c = center.first().copied().unwrap_or(0.0);
            let k = m * omega * omega;
            energy += 0.5 * k * ((q - c) * (q - c) + 1.0 / (4.0 * alpha));
            dq = k * (q - c);
        }
        Geometry {
            energy,
            grad_u: vec![dq],
            grad_v: vec![p / m],
            j_u: vec![p],
            j_v: vec![0.0],
            omega: vec![vec![0.0, -1.0], vec![1.0, 0.0]],
            overlap: vec![Complex64::new(0.0, -p / h), Complex64::new(0.0, 0.0)],
        }
    }

    fn quadrature(&self, s: &ParameterState) -> Result<Geometry> {
        let n_z = 2 * s.pairs();
        let (lo, hi) = self.family.window(s);
        let n = QUADRATURE_NODES;
        let h = (hi - lo) / (n - 1) as f64;
        let kappa = self.hbar * self.hbar / (2.0 * self.mass);
        let mut norm = 0.0;
        let mut t = vec![Complex64::default(); n_z];
        let mut h_chi = 0.0;
        let mut dh = vec![0.0; n_z];
        let mut g_im = vec![vec![0.0; n_z]; n_z];
        let mut sample = Sample::default();
        let mut peak: f64 = 0.0;
        let mut edge: f64 = 0.0;
        for k in 0..n {
            let x = lo + k as f64 * h;
            let w = if k == 0 || k == n - 1 { 0.5 * h } else { h };
            self.family.eval(s, x, self.hbar, &mut sample);
            let v = self.potential.value_1d(x, self.mass);
            let rho = sample.chi.norm_sqr();
            peak = peak.max(rho);
            if k == 0 || k == n - 1 {
                edge = edge.max(rho);
            }
            norm += w * rho;
            h_chi += w * (kappa * sample.dchi.norm_sqr() + v * rho);
            for i in 0..n_z {
                let (di, ddi) = sample.d[i];
                t[i] += w * sample.chi.conj() * di;
                dh[i] += 2.0 * w * (kappa * sample.dchi.conj() * ddi + v * sample.chi.conj() * di).re;
                for j in i + 1..n_z {
                    g_im[i][j] += w * (di.conj() * sample.d[j].0).im;
                }
            }
        }
        if edge > TAIL_LIMIT * peak {
            return Err(Error::PacketEscapesGrid { tail: edge / peak, limit: TAIL_LIMIT });
        }
        let energy = h_chi / norm;
        let dn: Vec<f64> = t.iter().map(|z| 2.0 * z.re).collect();
        let grad: Vec<f64> = (0..n_z).map(|i| dh[i] / norm - energy * dn[i] / norm).collect();
        let j: Vec<f64> = t.iter().map(|z| -self.hbar * z.im / norm).collect();
        let mut omega = vec![vec![0.0; n_z]; n_z];
        for i in 0..n_z {
            for jj in i + 1..n_z {
                let im = (g_im[i][jj] + 0.5 * (dn[jj] * t[i].im - dn[i] * t[jj].im) / norm) / norm;
                omega[i][jj] = -2.0 * self.hbar * im;
                omega[jj][i] = -omega[i][jj];
            }
        }
        let half = n_z / 2;
        Ok(Geometry {
            energy,
            grad_u: grad[..half].to_vec(),
            grad_v: grad[half..].to_vec(),
            j_u: j[..half].to_vec(),
            j_v: j[half..].to_vec(),
            omega,
            overlap: t.iter().map(|z| Complex64::new(0.0, z.im / norm)).collect(),
        })
    }

    /// Normalized psi at the given points.
    pub fn wavefunction(&self, s: &ParameterState, xs: &[f64]) -> Result<Vec<Complex64>> {
        self.family.validate(s)?;
        let (lo, hi) = self.family.window(s);
        let n = QUADRATURE_NODES;
        let h = (hi - lo) / (n - 1) as f64;
        let mut sample = Sample::default();
        let mut norm = 0.0;
        for k in 0..n {
            self.family.eval(s, lo + k as f64 * h, self.hbar, &mut sample);
            norm += if k == 0 || k == n - 1 { 0.5 * h } else { h } * sample.chi.norm_sqr();
        }
        let scale = 1.0 / norm.sqrt();
        Ok(xs
            .iter()
            .map(|&x| {
                self.family.eval(s, x, self.hbar, &mut sample);
                sample.chi * scale
            })
            .collect())
    }

    /// Largest relative gap between the analytic energy gradient and a
    /// central difference with step `h` (scaled by max(1, |z_i|)).
    pub fn gradient_discrepancy(&self, s: &ParameterState, h: f64) -> Result<f64> {
        let g = self.geometry(s)?.gradient();
        let z = s.to_vec();
        let mut worst: f64 = 0.0;
        for i in 0..z.len() {
            let step = h * z[i].abs().max(1.0);
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[i] += step;
            zm[i] -= step;
            let fd = (self.energy(&ParameterState::from_vec(&zp, s.time))?
                - self.energy(&ParameterState::from_vec(&zm, s.time))?)
                / (2.0 * step);
            worst = worst.max((fd - g[i]).abs() / g[i].abs().max(1.0));
        }
        Ok(worst)
    }

    pub fn validate_gradients(&self, s: &ParameterState) -> Result<()> {
        let d = self.gradient_discrepancy(s, 1e-5)?;
        if d > 1e-4 {
            return Err(Error::GradientValidation(format!("analytic and finite-difference gradients differ by {d:e}")));
        }
        Ok(())
    }
}
