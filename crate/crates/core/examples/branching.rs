//! A Gaussian split into narrower daughters before a barrier, propagated
//! leaf by leaf and summed back onto the grid.

use num_complex::Complex64;
use oneworld::adf::{evaluate_adf, AdfState};
use oneworld::branching::*;
use oneworld::*;

fn main() -> Result<()> {
    let hbar = 0.05;
    let barrier = PotentialSpec::GaussianBarrier { height: 1.0, width: 0.5, center: 0.0 };
    let grid = Grid::line(-12.0, 12.0, 4096)?;
    let mother = AdfState::new(-4.0, 1.5, Complex64::new(1.0, 0.0), hbar, 1.0)?;
    let mut psi = evaluate_adf(&mother, &grid)?;
    let dt = 1e-3;
    let schedule = SplitSchedule {
        times: vec![0.0],
        settings: SplitSettings { gamma2_ratio: 4.0, nodes: 48, always: true, ..Default::default() },
    };
    let mut tree = BranchTree::new(mother);
    let mut prop = Propagator::new(&grid, &barrier, dt, hbar, 1.0, None)?;
    println!("{:>5} {:>7} {:>11} {:>10}", "t", "leaves", "tree norm", "|overlap|");
    for chunk in 0..6 {
        let steps = 500;
        let start = if chunk == 0 { schedule.clone() } else { SplitSchedule { times: vec![], ..schedule.clone() } };
        tree = branch_propagate(tree, &barrier, dt, steps, &start, |_| Ok(()))?;
        psi = prop.run_complex(&psi, steps)?;
        let sp = superpose(&tree, &grid)?;
        let ov = psi.overlap(&sp.field)?.norm() / sp.norm.sqrt();
        println!("{:5.2} {:7} {:11.6} {:10.6}", tree.time(), tree.leaves.len(), sp.norm, ov);
    }
    let worst = tree.splits.iter().map(|s| s.l2_error).fold(0.0, f64::max);
    println!("{} splits, worst split identity error {worst:.1e}", tree.splits.len());
    Ok(())
}
