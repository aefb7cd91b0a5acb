//! Splitting a complex Gaussian into a Gauss-Hermite family of narrower
//! Gaussians, propagating the resulting tree leaf by leaf, and summing the
//! leaves back onto a grid.
//!
//! A leaf is `amp * state(q)` with `state` a normalized ADF Gaussian. For a
//! mother exp(-(g_r + i g_c) y^2 + i p0 y/hbar) and a target real exponent
//! g2 > g_r,
//!
//!   exp(-g_r y^2) = sqrt((A + g2)/pi) * int exp(-A W^2) exp(-g2 (y - W)^2) dW,
//!   A = 1/(1/g_r - 1/g2),
//!
//! and moving the chirp and plane wave onto each shifted Gaussian gives a
//! daughter at q0 + W with momentum p0 - 2 hbar g_c W and exponent g2 + i g_c.

use std::io::Write;
use std::path::Path;

use gauss_quad::hermite::GaussHermite;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adf::{adf_step, AdfState};
use crate::error::{Error, Result};
use crate::field::{SchrodingerField, TAIL_LIMIT};
use crate::grid::Grid;
use crate::potential::PotentialSpec;

pub const DEFAULT_NODES: usize = 16;
pub const DEFAULT_LEAF_CAP: usize = 100_000;
/// Points of the trigger scan over +/-2 widths.
const TRIGGER_SAMPLES: usize = 33;
/// Quartic energy |V''''| w^4/24 below which a point never triggers.
const TRIGGER_ENERGY_FLOOR: f64 = 1e-8;
/// Sample points of the per-split identity check over +/-8 mother widths.
const AUDIT_SAMPLES: usize = 513;

#[derive(Clone, Debug, PartialEq)]
pub struct WeierstrassPlan {
    pub gamma1_r: f64,
    pub gamma2_r: f64,
    pub a: f64,
    /// Shifts W_k.
    pub nodes: Vec<f64>,
    /// Quadrature weights for int exp(-A W^2) f(W) dW.
    pub weights: Vec<f64>,
}

impl WeierstrassPlan {
    pub fn new(gamma1_r: f64, gamma2_r: f64, n_nodes: usize) -> Result<Self> {
        if !(gamma1_r > 0.0) || !gamma2_r.is_finite() || !(gamma2_r > gamma1_r) {
            return Err(Error::InvalidPlan(format!(
                "need 0 < gamma1_r < gamma2_r, got {gamma1_r} and {gamma2_r}"
            )));
        }
        let rule = GaussHermite::new(n_nodes).map_err(|e| Error::InvalidPlan(format!("{n_nodes} nodes: {e}")))?;
        let a = 1.0 / (1.0 / gamma1_r - 1.0 / gamma2_r);
        let s = a.sqrt();
        let mut pairs: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (x / s, w / s)).collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(Self {
            gamma1_r,
            gamma2_r,
            a,
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub node: usize,
    pub state: AdfState,
    pub amp: Complex64,
    pub generation: u32,
}

impl Leaf {
    pub fn value(&self, q: f64) -> Complex64 {
        self.amp * self.state.value(q)
    }
}

/// One daughter of a split before it is entered into a tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Daughter {
    pub leaf: Leaf,
    pub omega: f64,
    pub p_parent: f64,
    pub gamma_c: f64,
}

/// Splits `mother` with `plan`. Fails if the plan was built for a
/// different real exponent.
pub fn weierstrass_split(mother: &Leaf, plan: &WeierstrassPlan) -> Result<Vec<Daughter>> {
    let s = &mother.state;
    let gamma = s.gamma();
    if (gamma.re - plan.gamma1_r).abs() > 1e-12 * gamma.re {
        return Err(Error::InvalidPlan(format!(
            "plan built for gamma1_r = {}, leaf has {}",
            plan.gamma1_r, gamma.re
        )));
    }
    let hbar = s.hbar;
    let c = s.center();
    let (q0, p0) = (c.q, c.p);
    let gamma_c = gamma.im;
    let carried = mother.amp * s.prefactor() * Complex64::from_polar(1.0, c.s_cl / hbar);
    let norm = ((plan.a + plan.gamma2_r) / std::f64::consts::PI).sqrt();
    plan.nodes
        .iter()
        .zip(&plan.weights)
        .map(|(&omega, &w)| {
            let p = p0 - 2.0 * hbar * gamma_c * omega;
            let mut state = AdfState::new(q0 + omega, p, Complex64::new(plan.gamma2_r, gamma_c), hbar, s.mass())?;
            state.time = s.time;
            let phase = Complex64::from_polar(1.0, p0 * omega / hbar - gamma_c * omega * omega);
            let amp = carried * w * norm * phase / state.prefactor();
            Ok(Daughter {
                leaf: Leaf { node: mother.node, state, amp, generation: mother.generation + 1 },
                omega,
                p_parent: p0,
                gamma_c,
            })
        })
        .collect()
}

fn sum_leaves(leaves: &[Leaf], xs: &[f64]) -> Vec<Complex64> {
    xs.par_iter().map(|&q| leaves.iter().map(|l| l.value(q)).sum()).collect()
}

/// Relative L2 distance between `reference` and `approx` sampled on `xs`
/// (uniform spacing).
fn relative_l2(reference: &[Complex64], approx: &[Complex64]) -> f64 {
    let d: f64 = reference.iter().zip(approx).map(|(a, b)| (a - b).norm_sqr()).sum();
    let n: f64 = reference.iter().map(|a| a.norm_sqr()).sum();
    (d / n).sqrt()
}

/// Coherent sum of `daughters` on `grid` and its relative L2 distance to
/// `mother`.
pub fn reconstruct(mother: &Leaf, daughters: &[Daughter], grid: &Grid) -> Result<(SchrodingerField, f64)> {
    if grid.dims() != 1 {
        return Err(Error::InvalidGrid("branching is 1D".into()));
    }
    let xs = grid.axis(0).coords();
    let leaves: Vec<Leaf> = daughters.iter().map(|d| d.leaf.clone()).collect();
    let sum = sum_leaves(&leaves, &xs);
    let reference: Vec<Complex64> = xs.iter().map(|&q| mother.value(q)).collect();
    let err = relative_l2(&reference, &sum);
    let s = &mother.state;
    Ok((SchrodingerField::from_complex(grid.clone(), &sum, s.time, s.hbar, s.mass())?, err))
}

fn audit_split(mother: &Leaf, daughters: &[Daughter]) -> f64 {
    let w = mother.state.width();
    let q0 = mother.state.center().q;
    let h = 16.0 * w / (AUDIT_SAMPLES - 1) as f64;
    let xs: Vec<f64> = (0..AUDIT_SAMPLES).map(|i| q0 - 8.0 * w + i as f64 * h).collect();
    let leaves: Vec<Leaf> = daughters.iter().map(|d| d.leaf.clone()).collect();
    let reference: Vec<Complex64> = xs.iter().map(|&q| mother.value(q)).collect();
    relative_l2(&reference, &sum_leaves(&leaves, &xs))
}

/// Length scale sqrt(|V''/V''''|) of `potential` compared with the leaf
/// width 1/sqrt(Re gamma) over +/-2 widths around the center.
pub fn split_trigger(leaf: &Leaf, potential: &PotentialSpec, kappa: f64) -> bool {
    let s = &leaf.state;
    let m = s.mass();
    let width = 1.0 / s.gamma().re.sqrt();
    let q0 = s.center().q;
    let h = 4.0 * width / (TRIGGER_SAMPLES - 1) as f64;
    (0..TRIGGER_SAMPLES).any(|i| {
        let x = q0 - 2.0 * width + i as f64 * h;
        let v2 = potential.curvature_1d(x, m);
        let v4 = (potential.curvature_1d(x + h, m) - 2.0 * v2 + potential.curvature_1d(x - h, m)) / (h * h);
        if v4.abs() * width.powi(4) / 24.0 < TRIGGER_ENERGY_FLOOR {
            return false;
        }
        (v2 / v4).abs().sqrt() < kappa * width
    })
}

/// Node of the branch history, one line of the tree dump.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub t_split: f64,
    pub omega: f64,
    pub q: f64,
    pub p: f64,
    pub c: f64,
    pub d: f64,
    pub amp_re: f64,
    pub amp_im: f64,
    pub p_parent: f64,
    pub gamma_c: f64,
    pub hbar: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SplitRecord {
    pub time: f64,
    pub node: usize,
    pub daughters: usize,
    /// Relative L2 distance between mother and daughter sum.
    pub l2_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSettings {
    /// Daughter real exponent as a multiple of the mother's.
    #[serde(default = "default_ratio")]
    pub gamma2_ratio: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Split when the potential length scale is below kappa times the width.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Split every leaf at the scheduled times regardless of the trigger.
    #[serde(default)]
    pub always: bool,
    /// Leaves of this generation or later are never split.
    #[serde(default)]
    pub max_generation: Option<u32>,
    #[serde(default = "default_cap")]
    pub leaf_cap: usize,
    /// Leaves with |amp|^2 below this are dropped after a split.
    #[serde(default)]
    pub prune_below: f64,
    /// Drop the smallest leaves at the cap instead of failing.
    #[serde(default = "default_prune")]
    pub prune: bool,
}

fn default_ratio() -> f64 {
    2.0
}
fn default_nodes() -> usize {
    DEFAULT_NODES
}
fn default_kappa() -> f64 {
    1.0
}
fn default_cap() -> usize {
    DEFAULT_LEAF_CAP
}
fn default_prune() -> bool {
    true
}

impl Default for SplitSettings {
    fn default() -> Self {
        Self {
            gamma2_ratio: default_ratio(),
            nodes: DEFAULT_NODES,
            kappa: default_kappa(),
            always: false,
            max_generation: None,
            prune_below: 0.0,
            leaf_cap: DEFAULT_LEAF_CAP,
            prune: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchTree {
    pub nodes: Vec<BranchNode>,
    pub leaves: Vec<Leaf>,
    pub splits: Vec<SplitRecord>,
    /// Sum of per-split L2 errors.
    pub quadrature_budget: f64,
    /// Sum of |amp|^2 of pruned leaves.
    pub pruned_weight: f64,
}

impl BranchTree {
    pub fn new(root: AdfState) -> Self {
        let leaf = Leaf { node: 0, state: root, amp: Complex64::new(1.0, 0.0), generation: 0 };
        let node = node_record(0, None, &leaf, 0.0, leaf.state.center().p, leaf.state.gamma().im);
        Self { nodes: vec![node], leaves: vec![leaf], splits: Vec::new(), quadrature_budget: 0.0, pruned_weight: 0.0 }
    }

    pub fn time(&self) -> f64 {
        self.leaves.first().map_or(0.0, |l| l.state.time)
    }

    /// Splits every leaf for which `settings` asks for it; returns the
    /// number of leaves split.
    pub fn split_leaves(&mut self, potential: &PotentialSpec, settings: &SplitSettings) -> Result<usize> {
        if !(settings.gamma2_ratio > 1.0) {
            return Err(Error::InvalidPlan(format!("gamma2_ratio = {} must exceed 1", settings.gamma2_ratio)));
        }
        let old = std::mem::take(&mut self.leaves);
        let mut count = 0;
        for leaf in old {
            let open = settings.max_generation.map_or(true, |g| leaf.generation < g);
            if !open || !(settings.always || split_trigger(&leaf, potential, settings.kappa)) {
                self.leaves.push(leaf);
                continue;
            }
            let g = leaf.state.gamma().re;
            let plan = WeierstrassPlan::new(g, settings.gamma2_ratio * g, settings.nodes)?;
            let daughters = weierstrass_split(&leaf, &plan)?;
            let err = audit_split(&leaf, &daughters);
            let t = leaf.state.time;
            self.splits.push(SplitRecord { time: t, node: leaf.node, daughters: daughters.len(), l2_error: err });
            self.quadrature_budget += err;
            for mut d in daughters {
                let id = self.nodes.len();
                d.leaf.node = id;
                self.nodes.push(node_record(id, Some(leaf.node), &d.leaf, d.omega, d.p_parent, d.gamma_c));
                self.leaves.push(d.leaf);
            }
            count += 1;
        }
        self.enforce_cap(settings)?;
        Ok(count)
    }

    fn enforce_cap(&mut self, settings: &SplitSettings) -> Result<()> {
        if settings.prune_below > 0.0 {
            let mut pruned = 0.0;
            self.leaves.retain(|l| {
                let w = l.amp.norm_sqr();
                let keep = w >= settings.prune_below;
                if !keep {
                    pruned += w;
                }
                keep
            });
            self.pruned_weight += pruned;
        }
        let cap = settings.leaf_cap;
        if self.leaves.len() <= cap {
            return Ok(());
        }
        if !settings.prune {
            return Err(Error::BudgetExceeded(format!("{} leaves exceed the cap of {cap}", self.leaves.len())));
        }
        let mut order: Vec<usize> = (0..self.leaves.len()).collect();
        order.sort_by(|&i, &j| self.leaves[j].amp.norm().total_cmp(&self.leaves[i].amp.norm()).then(i.cmp(&j)));
        let mut keep = vec![false; self.leaves.len()];
        for &i in &order[..cap] {
            keep[i] = true;
        }
        let mut k = keep.iter();
        let mut pruned = 0.0;
        self.leaves.retain(|l| {
            let kept = *k.next().unwrap_or(&true);
            if !kept {
                pruned += l.amp.norm_sqr();
            }
            kept
        });
        self.pruned_weight += pruned;
        Ok(())
    }

    /// Advances every leaf by one ADF step.
    pub fn step(&mut self, potential: &PotentialSpec, dt: f64) -> Result<()> {
        self.leaves.par_iter_mut().try_for_each(|l| {
            l.state = adf_step(&l.state, potential, dt)?;
            Ok(())
        })
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        for n in &self.nodes {
            serde_json::to_writer(&mut w, n)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }
}

fn node_record(id: usize, parent: Option<usize>, leaf: &Leaf, omega: f64, p_parent: f64, gamma_c: f64) -> BranchNode {
    let s = &leaf.state;
    BranchNode {
        id,
        parent,
        t_split: s.time,
        omega,
        q: s.center().q,
        p: s.center().p,
        c: s.exponent.c,
        d: s.exponent.d,
        amp_re: leaf.amp.re,
        amp_im: leaf.amp.im,
        p_parent,
        gamma_c,
        hbar: s.hbar,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSchedule {
    /// Times at which leaves are tested and split.
    pub times: Vec<f64>,
    #[serde(default)]
    pub settings: SplitSettings,
}

/// Propagates the tree for `n_steps` steps of `dt`, splitting at the
/// scheduled times. `on_step` sees the tree after every step.
pub fn branch_propagate(
    mut tree: BranchTree,
    potential: &PotentialSpec,
    dt: f64,
    n_steps: usize,
    schedule: &SplitSchedule,
    mut on_step: impl FnMut(&BranchTree) -> Result<()>,
) -> Result<BranchTree> {
    if !(dt > 0.0) {
        return Err(Error::InvalidTimeStep(format!("dt = {dt}")));
    }
    let t0 = tree.time();
    let split_steps: Vec<usize> = schedule.times.iter().map(|t| ((t - t0) / dt).round().max(0.0) as usize).collect();
    for k in 0..n_steps {
        if split_steps.contains(&k) {
            tree.split_leaves(potential, &schedule.settings)?;
        }
        tree.step(potential, dt)?;
        on_step(&tree)?;
    }
    if split_steps.contains(&n_steps) {
        tree.split_leaves(potential, &schedule.settings)?;
    }
    Ok(tree)
}

#[derive(Clone, Debug)]
pub struct Superposition {
    pub field: SchrodingerField,
    pub norm: f64,
    /// Leaves whose density at a grid edge exceeds the tail limit times the
    /// peak superposed density.
    pub escaped: Vec<usize>,
}

/// Coherent sum of the leaves on a 1D grid. The field is not renormalized.
pub fn superpose(tree: &BranchTree, grid: &Grid) -> Result<Superposition> {
    if grid.dims() != 1 {
        return Err(Error::InvalidGrid("branching is 1D".into()));
    }
    let first = tree.leaves.first().ok_or_else(|| Error::InvalidInput("tree has no leaves".into()))?;
    let xs = grid.axis(0).coords();
    let sum = sum_leaves(&tree.leaves, &xs);
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let peak = sum.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let escaped = tree
        .leaves
        .iter()
        .filter(|l| l.value(lo).norm_sqr().max(l.value(hi).norm_sqr()) > TAIL_LIMIT * peak)
        .map(|l| l.node)
        .collect();
    let s = &first.state;
    let field = SchrodingerField::from_complex(grid.clone(), &sum, s.time, s.hbar, s.mass())?;
    let norm = field.norm_sqr();
    Ok(Superposition { field, norm, escaped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn root(q: f64, p: f64, g: Complex64) -> AdfState {
        AdfState::new(q, p, g, 1.0, 1.0).unwrap()
    }

    #[test]
    fn plan_arithmetic() {
        let plan = WeierstrassPlan::new(1.0, 2.0, 16).unwrap();
        assert!((plan.a - 2.0).abs() < 1e-15);
        let total: f64 = plan.weights.iter().sum();
        assert!((total - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-13);
        assert!(matches!(WeierstrassPlan::new(1.0, 1.0, 16), Err(Error::InvalidPlan(_))));
        assert!(matches!(WeierstrassPlan::new(2.0, 1.0, 16), Err(Error::InvalidPlan(_))));
    }

    #[test]
    fn momentum_shift_values() {
        let mother = Leaf { node: 0, state: root(0.0, 1.0, Complex64::new(1.0, 0.5)), amp: Complex64::new(1.0, 0.0), generation: 0 };
        let plan = WeierstrassPlan::new(1.0, 2.0, 8).unwrap();
        for d in weierstrass_split(&mother, &plan).unwrap() {
            assert_eq!(d.leaf.state.center().p.to_bits(), (d.p_parent - 2.0 * 1.0 * d.gamma_c * d.omega).to_bits());
            assert!((d.gamma_c - 0.5).abs() < 1e-15);
            assert!((d.leaf.state.gamma().im - d.gamma_c).abs() < 1e-15);
        }
        let real = Leaf { state: root(0.0, 1.0, Complex64::new(1.0, 0.0)), ..mother };
        for d in weierstrass_split(&real, &plan).unwrap() {
            assert_eq!(d.leaf.state.center().p, 1.0);
        }
    }

    #[test]
    fn reconstruction_error_falls_with_nodes() {
        let grid = Grid::line(-12.0, 12.0, 1024).unwrap();
        let mother = Leaf { node: 0, state: root(0.3, 1.1, Complex64::new(1.0, 0.4)), amp: Complex64::new(1.0, 0.0), generation: 0 };
        let mut last = f64::INFINITY;
        for n in [4, 8, 16, 32] {
            let plan = WeierstrassPlan::new(1.0, 2.0, n).unwrap();
            let (_, err) = reconstruct(&mother, &weierstrass_split(&mother, &plan).unwrap(), &grid).unwrap();
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-10);
    }

    #[test]
    fn free_split_matches_unsplit_propagation() {
        let grid = Grid::line(-20.0, 20.0, 1024).unwrap();
        let s0 = root(-1.0, 0.8, Complex64::new(0.6, -0.2));
        let schedule = SplitSchedule {
            times: vec![0.5],
            settings: SplitSettings { gamma2_ratio: 2.0, nodes: 32, always: true, ..SplitSettings::default() },
        };
        let tree = branch_propagate(BranchTree::new(s0.clone()), &PotentialSpec::Free, 1e-2, 150, &schedule, |_| Ok(())).unwrap();
        assert_eq!(tree.leaves.len(), 32);
        let sum = superpose(&tree, &grid).unwrap().field.to_complex();
        let mut single = s0;
        for _ in 0..150 {
            single = adf_step(&single, &PotentialSpec::Free, 1e-2).unwrap();
        }
        let one = evaluate_leaf(&single, &grid);
        let e = relative_l2(&one, &sum);
        assert!(e < 1e-8, "{e}");
    }

    fn evaluate_leaf(s: &AdfState, grid: &Grid) -> Vec<Complex64> {
        grid.axis(0).coords().iter().map(|&q| s.value(q)).collect()
    }

    #[test]
    fn trigger_examples() {
        let leaf = |g: f64| Leaf { node: 0, state: root(0.0, 0.0, Complex64::new(g, 0.0)), amp: Complex64::new(1.0, 0.0), generation: 0 };
        assert!(!split_trigger(&leaf(1.0), &PotentialSpec::Free, 1.0));
        assert!(!split_trigger(&leaf(4.0), &PotentialSpec::harmonic(0.1), 1.0));
        let barrier = PotentialSpec::GaussianBarrier { height: 1.0, width: 0.2, center: 0.0 };
        assert!(split_trigger(&leaf(1.0), &barrier, 1.0));
    }

    #[test]
    fn cap_prunes_smallest_or_fails() {
        let mut tree = BranchTree::new(root(0.0, 0.0, Complex64::new(1.0, 0.0)));
        let strict = SplitSettings { always: true, nodes: 8, leaf_cap: 4, prune: false, ..SplitSettings::default() };
        assert!(matches!(tree.clone().split_leaves(&PotentialSpec::Free, &strict), Err(Error::BudgetExceeded(_))));
        let loose = SplitSettings { prune: true, ..strict };
        tree.split_leaves(&PotentialSpec::Free, &loose).unwrap();
        assert_eq!(tree.leaves.len(), 4);
        assert!(tree.pruned_weight > 0.0);
        let kept = tree.leaves.iter().map(|l| l.amp.norm()).fold(f64::INFINITY, f64::min);
        assert!(kept > 0.0 && tree.leaves.iter().all(|l| l.state.center().q.abs() < 1.5));
    }
}
