//! Green function of u_t = D u_xx - lambda V u, by Monte Carlo over Brownian
//! bridges and by a Crank-Nicolson reference solve.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::stats::mean_and_stderr;
use super::wiener::{stream_rng, Purpose};
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeynmanKacEstimate {
    pub x: f64,
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeynmanKacSettings {
    pub lambda: f64,
    pub diffusion_d: f64,
    pub t: f64,
    #[serde(default)]
    pub x_source: f64,
    pub n_samples: usize,
    #[serde(default = "default_bridge_steps")]
    pub bridge_steps: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_bridge_steps() -> usize {
    200
}

pub fn heat_kernel(dx: f64, diffusion_d: f64, t: f64) -> f64 {
    (-dx * dx / (4.0 * diffusion_d * t)).exp() / (4.0 * std::f64::consts::PI * diffusion_d * t).sqrt()
}

/// G(x_target, t | x_source, 0) = heat kernel x E[exp(-lambda int V(B_s) ds)]
/// over Brownian bridges B from x_source to x_target, with a trapezoid rule
/// for the time integral. Sample k uses stream k.
pub fn feynman_kac_estimate(
    potential: &PotentialSpec,
    settings: &FeynmanKacSettings,
    x_target: f64,
    stream_offset: u64,
) -> Result<FeynmanKacEstimate> {
    let s = settings;
    if !(s.t > 0.0) || !(s.diffusion_d > 0.0) || s.n_samples < 2 || s.bridge_steps == 0 {
        return Err(Error::InvalidInput("need t > 0, D > 0, n_samples >= 2, bridge_steps >= 1".into()));
    }
    let n = s.bridge_steps;
    let h = s.t / n as f64;
    let sd = (2.0 * s.diffusion_d * h).sqrt();
    let mut w = vec![0.0; n + 1];
    let weights: Vec<f64> = (0..s.n_samples)
        .map(|k| {
            let mut rng = stream_rng(s.seed, Purpose::FeynmanKac, stream_offset + k as u64);
            for i in 1..=n {
                let z: f64 = StandardNormal.sample(&mut rng);
                w[i] = w[i - 1] + sd * z;
            }
            let end = w[n];
            let mut integral = 0.0;
            for i in 0..=n {
                let frac = i as f64 / n as f64;
                let b = s.x_source + w[i] - frac * (end - (x_target - s.x_source));
                let v = potential.value_1d(b, 1.0);
                integral += if i == 0 || i == n { 0.5 * v } else { v };
            }
            (-s.lambda * integral * h).exp()
        })
        .collect();
    let (mean, se) = mean_and_stderr(&weights);
    let k = heat_kernel(x_target - s.x_source, s.diffusion_d, s.t);
    Ok(FeynmanKacEstimate { x: x_target, value: k * mean, std_error: k * se, n_samples: s.n_samples })
}

/// Crank-Nicolson solution on [-half_width, half_width] with zero Dirichlet
/// edges, started from a discrete delta at `x_source` and smoothed by
/// `rannacher` implicit-Euler half steps. Returns (x nodes, u at time t).
pub fn crank_nicolson_green(
    potential: &PotentialSpec,
    lambda: f64,
    diffusion_d: f64,
    x_source: f64,
    t: f64,
    half_width: f64,
    n_nodes: usize,
    n_steps: usize,
    rannacher: usize,
) -> (Vec<f64>, Vec<f64>) {
    let h = 2.0 * half_width / (n_nodes - 1) as f64;
    let x: Vec<f64> = (0..n_nodes).map(|i| -half_width + i as f64 * h).collect();
    let v: Vec<f64> = x.iter().map(|&x| lambda * potential.value_1d(x, 1.0)).collect();
    let mut u = vec![0.0; n_nodes];
    let i0 = ((x_source + half_width) / h).round() as usize;
    u[i0] = 1.0 / h;
    let r = diffusion_d / (h * h);
    let dt = t / n_steps as f64;
    // theta = 1 for the Rannacher half steps, 1/2 afterwards.
    let advance = |u: &mut Vec<f64>, tau: f64, theta: f64| {
        let m = n_nodes;
        let mut rhs = vec![0.0; m];
        for i in 1..m - 1 {
            let lu = r * (u[i - 1] - 2.0 * u[i] + u[i + 1]) - v[i] * u[i];
            rhs[i] = u[i] + (1.0 - theta) * tau * lu;
        }
        let a = -theta * tau * r;
        let diag: Vec<f64> = (0..m).map(|i| 1.0 + theta * tau * (2.0 * r + v[i])).collect();
        *u = solve_tridiagonal(a, &diag, a, &rhs);
        u[0] = 0.0;
        u[m - 1] = 0.0;
    };
    let mut elapsed = 0.0;
    for _ in 0..rannacher {
        advance(&mut u, 0.5 * dt, 1.0);
        elapsed += 0.5 * dt;
    }
    let remaining = ((t - elapsed) / dt).round() as usize;
    let tail = (t - elapsed) / remaining.max(1) as f64;
    for _ in 0..remaining {
        advance(&mut u, tail, 0.5);
    }
    (x, u)
}

/// Thomas algorithm for constant off-diagonals; rows 0 and m-1 are identity.
fn solve_tridiagonal(lower: f64, diag: &[f64], upper: f64, rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    // Row 0: u0 = rhs0.
    c[0] = 0.0;
    d[0] = rhs[0];
    for i in 1..m {
        let (lo, up) = if i == m - 1 { (0.0, 0.0) } else { (lower, upper) };
        let (dg, rh) = if i == m - 1 { (1.0, rhs[i]) } else { (diag[i], rhs[i]) };
        let denom = dg - lo * c[i - 1];
        c[i] = up / denom;
        d[i] = (rh - lo * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Cubic interpolation on uniform nodes.
pub fn interpolate_uniform(x: &[f64], u: &[f64], at: f64) -> f64 {
    let h = x[1] - x[0];
    let s = (at - x[0]) / h;
    let i = (s.floor() as isize).clamp(1, x.len() as isize - 3) as usize;
    crate::potential::catmull_rom(u[i - 1], u[i], u[i + 1], u[i + 2], s - i as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(n: usize) -> FeynmanKacSettings {
        FeynmanKacSettings { lambda: 1.0, diffusion_d: 0.5, t: 1.0, x_source: 0.0, n_samples: n, bridge_steps: 50, seed: 7 }
    }

    #[test]
    fn free_case_is_the_heat_kernel() {
        let e = feynman_kac_estimate(&PotentialSpec::Free, &settings(100), 0.7, 0).unwrap();
        assert!((e.value - heat_kernel(0.7, 0.5, 1.0)).abs() < 1e-15);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn constant_potential_factorizes() {
        let v0 = 0.3;
        let v = PotentialSpec::Sampled { values: vec![v0; 8], min: -50.0, max: 50.0 };
        let e = feynman_kac_estimate(&v, &settings(50), -0.4, 0).unwrap();
        let expect = heat_kernel(-0.4, 0.5, 1.0) * (-v0).exp();
        assert!((e.value - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn tridiagonal_solver() {
        let diag = vec![1.0, 4.0, 4.0, 4.0, 1.0];
        let x_true = [0.0, 1.0, 2.0, 3.0, 0.0];
        let rhs: Vec<f64> = (0..5)
            .map(|i| {
                if i == 0 || i == 4 {
                    x_true[i]
                } else {
                    diag[i] * x_true[i] - x_true[i - 1] - x_true[i + 1]
                }
            })
            .collect();
        let x = solve_tridiagonal(-1.0, &diag, -1.0, &rhs);
        for i in 0..5 {
            assert!((x[i] - x_true[i]).abs() < 1e-12);
        }
    }
}
