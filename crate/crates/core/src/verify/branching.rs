use num_complex::Complex64;

use super::Outcome;
use crate::adf::{adf_step, caustic_limit_check, evaluate_adf, AdfState};
use crate::branching::{reconstruct, superpose, weierstrass_split, BranchTree, Leaf, SplitSettings, WeierstrassPlan};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::one_world::classical_limit_trajectory;
use crate::potential::PotentialSpec;
use crate::propagate::Propagator;

pub fn wronskian_caustic() -> Result<Outcome> {
    let runs = [
        ("free", PotentialSpec::Free),
        ("harmonic", PotentialSpec::harmonic(1.0)),
        ("barrier", PotentialSpec::GaussianBarrier { height: 1.0, width: 0.5, center: 0.0 }),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, pot) in &runs {
        let mut s = AdfState::new(-3.0, 1.0, Complex64::new(1.0, 0.3), 1.0, 1.0)?;
        let target = 2.0 * s.hbar / s.mass();
        let mut run_worst: f64 = 0.0;
        for _ in 0..10_000 {
            s = adf_step(&s, pot, 1e-3)?;
            run_worst = run_worst.max((s.wronskian() - target).abs());
        }
        worst = worst.max(run_worst);
        parts.push(format!("{name} {run_worst:.1e}"));
    }
    let s0 = AdfState::new(0.5, 0.0, Complex64::new(0.5, 0.0), 1.0, 1.0)?;
    let c = caustic_limit_check(&s0, &PotentialSpec::harmonic(1.0), 1e-4, 100_000, 0.01)?;
    let rel = c.relative_error();
    Ok(Outcome::new(
        worst < 1e-8 && c.peak.is_finite() && rel < 0.05,
        format!(
            "Wronskian error {} (< 1e-8); caustic peak {:.4} vs predicted {:.4}, relative {rel:.1e} (< 5%)",
            parts.join(", "),
            c.peak,
            c.predicted
        ),
    ))
}

pub fn weierstrass_exactness() -> Result<Outcome> {
    let grid = Grid::line(-20.0, 20.0, 4096)?;
    let mother = Leaf { node: 0, state: AdfState::new(0.0, 1.0, Complex64::new(1.0, 0.0), 1.0, 1.0)?, amp: Complex64::new(1.0, 0.0), generation: 0 };
    let plan = WeierstrassPlan::new(1.0, 2.0, 32)?;
    let (_, err) = reconstruct(&mother, &weierstrass_split(&mother, &plan)?, &grid)?;

    let chirped = AdfState::new(0.4, 1.3, Complex64::new(1.0, 0.7), 1.0, 1.0)?;
    let mut tree = BranchTree::new(chirped);
    let settings = SplitSettings { always: true, nodes: 32, ..Default::default() };
    tree.split_leaves(&PotentialSpec::Free, &settings)?;
    let children = &tree.nodes[1..];
    let mismatched = children
        .iter()
        .filter(|n| n.p.to_bits() != (n.p_parent - 2.0 * n.hbar * n.gamma_c * n.omega).to_bits())
        .count();
    Ok(Outcome::new(
        err < 1e-10 && mismatched == 0 && !children.is_empty(),
        format!(
            "32-node reconstruction L2 {err:.1e} (< 1e-10); momentum shift bitwise mismatches {mismatched} of {}",
            children.len()
        ),
    ))
}

/// Barrier scattering at small hbar: a focusing packet of width about 1 hits
/// a barrier of width 0.5 slightly below its mean energy. Leaves are tested
/// for the split trigger every `SPLIT_EVERY`, up to two generations deep.
/// Fidelity is asserted until the mother's classical center crosses the
/// barrier top and reported for one time unit after.
pub fn branching_fidelity() -> Result<Outcome> {
    const HBAR: f64 = 0.002;
    const DT: f64 = 1e-3;
    const SPLIT_EVERY: usize = 50;
    const CHECK_EVERY: usize = 250;
    let barrier = PotentialSpec::GaussianBarrier { height: 1.0, width: 0.5, center: 0.0 };
    let (q0, p0) = (-7.0, 1.5);
    let g0 = (0.15 / HBAR).powi(2);
    let gamma = Complex64::new(g0, 0.0) / Complex64::new(1.0, 2.0 * HBAR * g0 * 6.7);
    let mother = AdfState::new(q0, p0, gamma, HBAR, 1.0)?;

    let center = classical_limit_trajectory(&[q0], &[p0], &barrier, 1.0, DT, 20_000);
    let crossing = center
        .positions
        .iter()
        .position(|q| q[0] >= 0.0)
        .ok_or_else(|| Error::InvalidInput("the center never reaches the barrier top".into()))?;
    let horizon = crossing.div_ceil(CHECK_EVERY) * CHECK_EVERY;
    let n_steps = horizon + 1000;

    let grid = Grid::line(-17.0, 17.0, 16384)?;
    let mut prop = Propagator::new(&grid, &barrier, DT, HBAR, 1.0, None)?;
    let mut psi = evaluate_adf(&mother, &grid)?.to_complex();
    let mut tree = BranchTree::new(mother);
    let settings = SplitSettings {
        gamma2_ratio: 28.0,
        nodes: 300,
        max_generation: Some(2),
        prune_below: 1e-24,
        leaf_cap: 20_000,
        ..Default::default()
    };
    let h = grid.cell_volume();
    let mut worst_overlap: f64 = 1.0;
    let mut after = 1.0;
    for k in 0..=n_steps {
        if k % SPLIT_EVERY == 0 {
            tree.split_leaves(&barrier, &settings)?;
        }
        if k % CHECK_EVERY == 0 {
            let sp = superpose(&tree, &grid)?;
            let tree_psi = sp.field.to_complex();
            let ov: Complex64 = psi.iter().zip(&tree_psi).map(|(a, b)| a.conj() * b).sum::<Complex64>() * h;
            let grid_norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * h;
            let fidelity = ov.norm() / (grid_norm * sp.norm).sqrt();
            if k <= horizon {
                worst_overlap = worst_overlap.min(fidelity);
            } else {
                after = fidelity;
            }
        }
        if k < n_steps {
            prop.step_complex(&mut psi);
            tree.step(&barrier, DT)?;
        }
    }
    let worst_split = tree.splits.iter().map(|s| s.l2_error).fold(0.0, f64::max);
    let depth = tree.leaves.iter().map(|l| l.generation).max().unwrap_or(0);
    let transmitted: f64 =
        psi.iter().zip(grid.axis(0).coords()).filter(|(_, x)| *x > 0.0).map(|(z, _)| z.norm_sqr()).sum::<f64>() * h;
    Ok(Outcome::new(
        worst_overlap > 0.99 && worst_split < 1e-8 && depth == 2 && !tree.splits.is_empty(),
        format!(
            "min overlap {worst_overlap:.5} up to t = {:.2} (> 0.99), {:.5} at t = {:.2} (reported); \
             {} splits, worst identity {worst_split:.1e} (< 1e-8); depth {depth}, {} leaves; transmitted {transmitted:.2}",
            horizon as f64 * DT,
            after,
            n_steps as f64 * DT,
            tree.splits.len(),
            tree.leaves.len()
        ),
    ))
}
