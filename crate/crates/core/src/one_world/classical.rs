//! Noise-free limit: Hamilton's equations by leapfrog.

use super::paths::{OneWorldPath, PathStatus};
use crate::potential::PotentialSpec;

/// Kick-drift-kick leapfrog for dq/dt = p/m, dp/dt = -grad V.
pub fn classical_limit_trajectory(
    q0: &[f64],
    p0: &[f64],
    potential: &PotentialSpec,
    mass: f64,
    dt: f64,
    n: usize,
) -> OneWorldPath {
    let mut q = q0.to_vec();
    let mut p = p0.to_vec();
    let mut times = Vec::with_capacity(n + 1);
    let mut positions = Vec::with_capacity(n + 1);
    let mut momenta = Vec::with_capacity(n + 1);
    times.push(0.0);
    positions.push(q.clone());
    momenta.push(p.clone());
    let mut g = potential.gradient(&q, mass);
    for k in 1..=n {
        for (pi, gi) in p.iter_mut().zip(&g) {
            *pi -= 0.5 * dt * gi;
        }
        for (qi, pi) in q.iter_mut().zip(&p) {
            *qi += dt * pi / mass;
        }
        g = potential.gradient(&q, mass);
        for (pi, gi) in p.iter_mut().zip(&g) {
            *pi -= 0.5 * dt * gi;
        }
        times.push(k as f64 * dt);
        positions.push(q.clone());
        momenta.push(p.clone());
    }
    OneWorldPath {
        stream_id: 0,
        times,
        positions,
        momenta: Some(momenta),
        status: PathStatus::Active,
        masked_steps: 0,
    }
}

/// Total energy p^2/2m + V along a recorded trajectory.
pub fn trajectory_energy(path: &OneWorldPath, potential: &PotentialSpec, mass: f64) -> Vec<f64> {
    let momenta = path.momenta.as_ref().expect("momenta recorded");
    path.positions
        .iter()
        .zip(momenta)
        .map(|(q, p)| p.iter().map(|p| p * p).sum::<f64>() / (2.0 * mass) + potential.value(q, mass))
        .collect()
}
