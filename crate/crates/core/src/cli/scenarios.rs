//! One runner per scenario. Each writes its files into the output directory
//! and returns their names.

use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use super::config::{FlowMode, Scenario, ScenarioConfig};
use super::RunError;
use crate::adf::{evaluate_adf, run_adf, write_adf_csv, AdfState};
use crate::branching::{branch_propagate, superpose, BranchTree, SplitSchedule};
use crate::error::Result;
use crate::field::{init_coherent_state, SchrodingerField};
use crate::io::{header, write_observables, write_snapshot, Table};
use crate::observables::Observer;
use crate::one_world::double_slit::{double_slit_run, write_histogram, write_spots, DoubleSlitSettings};
use crate::one_world::feynman_kac::{crank_nicolson_green, feynman_kac_estimate, interpolate_uniform};
use crate::one_world::{sample_ensemble, sample_initial_positions, write_ensemble, FieldSequence, WienerConfig};
use crate::param_space::flows::{circle_loop, loop_action_invariant, write_loop};
use crate::param_space::{alternate_compose, dynamical_pair_check, hamilton_flow, FamilyModel, ParameterState};
use crate::propagate::Propagator;
use crate::verify::run_suite;

pub(super) struct Outputs<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl<'a> Outputs<'a> {
    pub(super) fn new(dir: &'a Path) -> Self {
        Self { dir, files: Vec::new() }
    }

    fn path(&mut self, name: &str) -> std::path::PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(self.path(name), text)?;
        Ok(())
    }

    pub(super) fn into_files(self) -> Vec<String> {
        self.files
    }
}

// Blocks required by a scenario are checked in `validate`, so these unwraps
// only fire on a programming error.
fn initial_field(cfg: &ScenarioConfig) -> Result<SchrodingerField> {
    let grid = cfg.grid.as_ref().expect("validated").build()?;
    let init = cfg.initial.as_ref().expect("validated");
    init_coherent_state(&grid, &init.q0, &init.p0, &init.gamma(), cfg.physics.hbar, cfg.physics.mass)
}

fn adf_root(cfg: &ScenarioConfig) -> Result<AdfState> {
    let init = cfg.initial.as_ref().expect("validated");
    AdfState::new(init.q0[0], init.p0[0], init.gamma()[0], cfg.physics.hbar, cfg.physics.mass)
}

pub(super) fn run(cfg: &ScenarioConfig, scenario: Scenario, seed: u64, out: &mut Outputs) -> std::result::Result<(), RunError> {
    match scenario {
        Scenario::Grid => grid(cfg, out)?,
        Scenario::Paths => paths(cfg, seed, out)?,
        Scenario::DoubleSlit => double_slit(cfg, seed, out)?,
        Scenario::ParamFlow => param_flow(cfg, out)?,
        Scenario::Adf => adf(cfg, out)?,
        Scenario::Branch => branch(cfg, out)?,
        Scenario::FeynmanKac => feynman_kac(cfg, seed, out)?,
        Scenario::Verify => return verify(cfg, out),
    }
    Ok(())
}

fn grid(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<()> {
    let time = cfg.time.expect("validated");
    let f0 = initial_field(cfg)?;
    let mut prop = Propagator::new(&f0.grid, &cfg.potential, time.dt, f0.hbar, f0.mass, cfg.absorber)?;
    let mut obs = Observer::new(&f0.grid);
    let every = time.save_every();
    let mut records = vec![obs.record(&f0, &cfg.potential, None)?];
    write_snapshot(&f0, &out.path("field_00000.owf"))?;
    let mut current = f0;
    let mut done = 0;
    while done < time.n_steps {
        let n = every.min(time.n_steps - done);
        let next = prop.run_complex(&current, n)?;
        done += n;
        records.push(obs.record(&next, &cfg.potential, Some(&current))?);
        write_snapshot(&next, &out.path(&format!("field_{done:05}.owf")))?;
        current = next;
    }
    write_observables(&out.path("observables.csv"), &records)
}

fn paths(cfg: &ScenarioConfig, seed: u64, out: &mut Outputs) -> Result<()> {
    let time = cfg.time.expect("validated");
    let pc = cfg.paths.as_ref().expect("validated");
    let f0 = initial_field(cfg)?;
    let seq = FieldSequence::record(&f0, &cfg.potential, time.dt, time.n_steps, time.save_every(), cfg.absorber)?;
    let wiener = WienerConfig {
        diffusion_d: pc.diffusion_d.unwrap_or(cfg.physics.hbar / (2.0 * cfg.physics.mass)),
        seed,
    };
    let dt = pc.dt.unwrap_or(time.dt);
    let n_steps = (time.n_steps as f64 * time.dt / dt).round() as usize;
    let x0 = sample_initial_positions(&f0, pc.n_paths, seed);
    let ensemble = sample_ensemble(&seq, &x0, dt, n_steps, &wiener, pc.record_every)?;
    write_ensemble(&out.path("ensemble.csv"), &ensemble)?;
    write_snapshot(seq.fields.last().expect("non-empty"), &out.path("final.owf"))
}

fn double_slit(cfg: &ScenarioConfig, seed: u64, out: &mut Outputs) -> Result<()> {
    let time = cfg.time.expect("validated");
    let d = cfg.double_slit.as_ref().expect("validated");
    let f0 = initial_field(cfg)?;
    let settings = DoubleSlitSettings {
        dt: time.dt,
        n_steps: time.n_steps,
        n_paths: d.n_paths,
        detector_x: d.detector_x,
        n_bins: d.n_bins,
        y_min: d.y_min,
        y_max: d.y_max,
        absorber: cfg.absorber,
        seed,
    };
    let x0 = sample_initial_positions(&f0, d.n_paths, seed);
    let r = double_slit_run(&f0, &cfg.potential, &settings, &x0, |_, _| Ok(()))?;
    write_spots(&out.path("spots.csv"), &r.spots)?;
    write_histogram(&out.path("histogram.csv"), &r.histogram)?;
    write_snapshot(&r.final_field, &out.path("final.owf"))?;
    #[derive(Serialize)]
    struct Summary {
        spots: usize,
        absorbed: usize,
        exited: usize,
    }
    out.json("summary.json", &Summary { spots: r.spots.len(), absorbed: r.absorbed, exited: r.exited })
}

fn param_flow(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<()> {
    let time = cfg.time.expect("validated");
    let pf = cfg.param_flow.as_ref().expect("validated");
    let model = FamilyModel::new(pf.family.clone(), cfg.potential.clone(), cfg.physics.hbar, cfg.physics.mass)?;
    let state = ParameterState::new(pf.u.clone(), pf.v.clone())?;
    let report = match pf.mode {
        FlowMode::Hamilton => hamilton_flow(&model, &state, time.dt, time.n_steps)?,
        FlowMode::Alternate => alternate_compose(&model, &state, time.dt, time.n_steps)?,
    };
    report.write_csv(&out.path("flow.csv"))?;
    #[derive(Serialize)]
    struct Summary {
        pair_check: Vec<bool>,
        energy_drift: f64,
        loop_action: Option<[f64; 2]>,
    }
    let e0 = report.rows[0].energy;
    let energy_drift = report.rows.iter().map(|r| (r.energy - e0).abs()).fold(0.0, f64::max);
    let pair_check = dynamical_pair_check(&model, &state, pf.pair_tolerance.unwrap_or(1e-10))?;
    let loop_action = match &pf.loop_ {
        Some(l) => {
            let vertices = circle_loop(l.q0, l.p0, l.radius, l.vertices);
            let t = loop_action_invariant(&model, &vertices, time.dt, l.t_total)?;
            write_loop(&out.path("loop_start.csv"), &vertices)?;
            write_loop(&out.path("loop_end.csv"), &t.transported)?;
            Some([t.before, t.after])
        }
        None => None,
    };
    out.json("summary.json", &Summary { pair_check, energy_drift, loop_action })
}

fn adf(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<()> {
    let time = cfg.time.expect("validated");
    let every = cfg.adf.as_ref().map(|a| a.record_every).unwrap_or(10);
    let (state, records) = run_adf(&adf_root(cfg)?, &cfg.potential, time.dt, time.n_steps, every)?;
    write_adf_csv(&out.path("adf.csv"), &records)?;
    if let Some(g) = &cfg.grid {
        write_snapshot(&evaluate_adf(&state, &g.build()?)?, &out.path("adf_final.owf"))?;
    }
    Ok(())
}

fn branch(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<()> {
    let time = cfg.time.expect("validated");
    let b = cfg.branch.as_ref().expect("validated");
    let grid = cfg.grid.as_ref().expect("validated").build()?;
    let root = adf_root(cfg)?;
    let schedule = SplitSchedule { times: b.split_times.clone(), settings: b.split.clone() };
    let tree = branch_propagate(BranchTree::new(root.clone()), &cfg.potential, time.dt, time.n_steps, &schedule, |_| Ok(()))?;
    tree.write_jsonl(&out.path("tree.jsonl"))?;
    let mut splits = Table::create(&out.path("splits.csv"), &header(&["time", "node", "daughters", "l2_error"]))?;
    for s in &tree.splits {
        splits.row(&[format!("{:e}", s.time), s.node.to_string(), s.daughters.to_string(), format!("{:e}", s.l2_error)])?;
    }
    splits.finish()?;
    let sp = superpose(&tree, &grid)?;
    write_snapshot(&sp.field, &out.path("superposed.owf"))?;
    #[derive(Serialize)]
    struct Summary {
        leaves: usize,
        splits: usize,
        norm: f64,
        pruned_weight: f64,
        escaped_leaves: usize,
        grid_overlap: Option<f64>,
    }
    let grid_overlap = if b.compare_grid {
        let f0 = evaluate_adf(&root, &grid)?;
        let mut prop = Propagator::new(&grid, &cfg.potential, time.dt, root.hbar, root.mass(), cfg.absorber)?;
        let exact = prop.run_complex(&f0, time.n_steps)?;
        write_snapshot(&exact, &out.path("grid_final.owf"))?;
        let ov: Complex64 = exact.overlap(&sp.field)?;
        Some(ov.norm() / (exact.norm_sqr() * sp.norm).sqrt())
    } else {
        None
    };
    out.json(
        "summary.json",
        &Summary {
            leaves: tree.leaves.len(),
            splits: tree.splits.len(),
            norm: sp.norm,
            pruned_weight: tree.pruned_weight,
            escaped_leaves: sp.escaped.len(),
            grid_overlap,
        },
    )
}

fn feynman_kac(cfg: &ScenarioConfig, seed: u64, out: &mut Outputs) -> Result<()> {
    let fk = cfg.feynman_kac.as_ref().expect("validated");
    let settings = fk.settings(&cfg.physics, seed);
    let reference = fk.reference.as_ref().map(|r| {
        crank_nicolson_green(
            &cfg.potential,
            settings.lambda,
            settings.diffusion_d,
            settings.x_source,
            settings.t,
            r.half_width,
            r.nodes,
            r.steps,
            r.rannacher,
        )
    });
    let mut t = Table::create(&out.path("green.csv"), &header(&["x", "estimate", "std_error", "reference"]))?;
    for (k, &x) in fk.targets.iter().enumerate() {
        let est = feynman_kac_estimate(&cfg.potential, &settings, x, (k as u64) << 32)?;
        let r = reference.as_ref().map(|(xs, u)| format!("{:e}", interpolate_uniform(xs, u, x))).unwrap_or_default();
        t.row(&[format!("{x:e}"), format!("{:e}", est.value), format!("{:e}", est.std_error), r])?;
    }
    t.finish()
}

fn verify(cfg: &ScenarioConfig, out: &mut Outputs) -> std::result::Result<(), RunError> {
    let filter = cfg.verify.as_ref().and_then(|v| v.filter.clone());
    let reports = run_suite(filter.as_deref(), |r| println!("{}", r.line()));
    // Wall-clock times would break byte-identical reruns.
    let stable: Vec<_> = reports.iter().map(|r| (r.id, &r.name, r.passed)).collect();
    out.json("verify.json", &stable)?;
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.name.clone()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(RunError::Verification(failed))
    }
}
