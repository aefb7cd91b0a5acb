//! Scenario configuration files (TOML).

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::branching::SplitSettings;
use crate::grid::{Axis, Grid};
use crate::one_world::feynman_kac::FeynmanKacSettings;
use crate::param_space::TrialFamily;
use crate::potential::PotentialSpec;
use crate::propagate::AbsorbingBoundary;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Scenario {
    Grid,
    Paths,
    DoubleSlit,
    ParamFlow,
    Adf,
    Branch,
    FeynmanKac,
    Verify,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Grid => "grid",
            Scenario::Paths => "paths",
            Scenario::DoubleSlit => "double_slit",
            Scenario::ParamFlow => "param_flow",
            Scenario::Adf => "adf",
            Scenario::Branch => "branch",
            Scenario::FeynmanKac => "feynman_kac",
            Scenario::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub mass: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for Physics {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub axes: Vec<Axis>,
}

impl GridConfig {
    pub fn build(&self) -> crate::Result<Grid> {
        Grid::new(self.axes.clone())
    }
}

/// Coherent state exp(-gamma (q - q0)^2 + i p0 (q - q0) / hbar) per axis.
/// Each gamma entry is `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub q0: Vec<f64>,
    pub p0: Vec<f64>,
    pub gamma: Vec<[f64; 2]>,
}

impl InitialConfig {
    pub fn gamma(&self) -> Vec<Complex64> {
        self.gamma.iter().map(|g| Complex64::new(g[0], g[1])).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub n_steps: usize,
    #[serde(default)]
    pub save_every: usize,
}

impl TimeConfig {
    /// `save_every`, with 0 meaning "only the final state".
    pub fn save_every(&self) -> usize {
        if self.save_every == 0 { self.n_steps.max(1) } else { self.save_every }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub n_paths: usize,
    /// Path step; defaults to the grid step.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    /// Diffusion constant; defaults to hbar / 2m.
    #[serde(default)]
    pub diffusion_d: Option<f64>,
}

fn default_record_every() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleSlitConfig {
    pub n_paths: usize,
    pub detector_x: f64,
    pub n_bins: usize,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMode {
    #[default]
    Hamilton,
    Alternate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopConfig {
    pub q0: f64,
    pub p0: f64,
    pub radius: f64,
    pub vertices: usize,
    pub t_total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFlowConfig {
    pub family: TrialFamily,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    #[serde(default)]
    pub mode: FlowMode,
    #[serde(default)]
    pub pair_tolerance: Option<f64>,
    #[serde(default, rename = "loop")]
    pub loop_: Option<LoopConfig>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdfConfig {
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    /// Times at which every leaf is offered a split.
    pub split_times: Vec<f64>,
    #[serde(default)]
    pub split: SplitSettings,
    /// Also propagate the grid solution and report the overlap.
    #[serde(default)]
    pub compare_grid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    pub half_width: f64,
    pub nodes: usize,
    pub steps: usize,
    #[serde(default = "default_rannacher")]
    pub rannacher: usize,
}

fn default_rannacher() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeynmanKacConfig {
    pub lambda: f64,
    /// Defaults to hbar / 2m.
    #[serde(default)]
    pub diffusion_d: Option<f64>,
    pub t: f64,
    #[serde(default)]
    pub x_source: f64,
    pub n_samples: usize,
    #[serde(default = "default_bridge_steps")]
    pub bridge_steps: usize,
    pub targets: Vec<f64>,
    #[serde(default)]
    pub reference: Option<ReferenceConfig>,
}

fn default_bridge_steps() -> usize {
    200
}

impl FeynmanKacConfig {
    pub fn settings(&self, physics: &Physics, seed: u64) -> FeynmanKacSettings {
        FeynmanKacSettings {
            lambda: self.lambda,
            diffusion_d: self.diffusion_d.unwrap_or(physics.hbar / (2.0 * physics.mass)),
            t: self.t,
            x_source: self.x_source,
            n_samples: self.n_samples,
            bridge_steps: self.bridge_steps,
            seed,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default)]
    pub filter: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub scenario: Option<Scenario>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub physics: Physics,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub initial: Option<InitialConfig>,
    #[serde(default)]
    pub time: Option<TimeConfig>,
    #[serde(default)]
    pub absorber: Option<AbsorbingBoundary>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub paths: Option<PathsConfig>,
    #[serde(default)]
    pub double_slit: Option<DoubleSlitConfig>,
    #[serde(default)]
    pub param_flow: Option<ParamFlowConfig>,
    #[serde(default)]
    pub adf: Option<AdfConfig>,
    #[serde(default)]
    pub branch: Option<BranchConfig>,
    #[serde(default)]
    pub feynman_kac: Option<FeynmanKacConfig>,
    #[serde(default)]
    pub verify: Option<VerifyConfig>,
}

/// One problem found in a config file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Dotted key path, empty for whole-file problems.
    pub key: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.key.is_empty(), self.line) {
            (false, Some(l)) => write!(f, "{} (line {l}): {}", self.key, self.message),
            (false, None) => write!(f, "{}: {}", self.key, self.message),
            (true, Some(l)) => write!(f, "line {l}: {}", self.message),
            (true, None) => write!(f, "{}", self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn single(key: &str, message: impl Into<String>) -> Self {
        Self { violations: vec![Violation { key: key.into(), line: None, message: message.into() }] }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Suggests the expected name closest to `unknown` for serde's
/// "unknown field `x`, expected one of `a`, `b`" messages.
fn suggestion(message: &str) -> Option<String> {
    let unknown = message.split('`').nth(1)?;
    let (_, expected) = message.split_once("expected")?;
    expected
        .split('`')
        .skip(1)
        .step_by(2)
        .map(|cand| (strsim::levenshtein(unknown, cand), cand))
        .filter(|(d, cand)| *d <= unknown.len().max(cand.len()) / 2 + 1)
        .min()
        .map(|(_, c)| c.to_string())
}

pub fn parse_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let de = toml::Deserializer::new(text);
    let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.inner();
        let line = inner.span().map(|s| line_of(text, s.start));
        let mut message = inner.message().trim().to_string();
        if message.starts_with("unknown field") {
            if let Some(s) = suggestion(&message) {
                message = format!("{message}; did you mean `{s}`?");
            }
        }
        let key = if key == "." { String::new() } else { key };
        ConfigError { violations: vec![Violation { key, line, message }] }
    })?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::single("", format!("cannot read {}: {e}", path.display())))?;
    parse_str(&text)
}

struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn fail(&mut self, key: &str, message: impl Into<String>) {
        self.violations.push(Violation { key: key.into(), line: None, message: message.into() });
    }

    fn positive(&mut self, key: &str, x: f64) {
        if !(x > 0.0 && x.is_finite()) {
            self.fail(key, format!("must be positive and finite, got {x}"));
        }
    }

    fn finite(&mut self, key: &str, xs: &[f64]) {
        if xs.iter().any(|x| !x.is_finite()) {
            self.fail(key, "must be finite");
        }
    }

    fn require<T>(&mut self, key: &str, block: &Option<T>, scenario: Scenario) {
        if block.is_none() {
            self.fail(key, format!("required by the {} scenario", scenario.as_str()));
        }
    }
}

impl ScenarioConfig {
    /// Checks the blocks `scenario` needs and every value range, reporting
    /// all problems at once.
    pub fn validate(&self, scenario: Scenario) -> Result<(), ConfigError> {
        let mut c = Checker { violations: Vec::new() };
        if let Some(s) = self.scenario {
            if s != scenario {
                c.fail("scenario", format!("file declares `{}` but `{}` was requested", s.as_str(), scenario.as_str()));
            }
        }
        c.positive("physics.hbar", self.physics.hbar);
        c.positive("physics.mass", self.physics.mass);
        if let Some(t) = &self.time {
            c.positive("time.dt", t.dt);
            if t.save_every > 0 && t.n_steps % t.save_every != 0 {
                c.fail("time.save_every", format!("must divide time.n_steps = {}", t.n_steps));
            }
        }
        if let Some(g) = &self.grid {
            if g.axes.is_empty() || g.axes.len() > 2 {
                c.fail("grid.axes", format!("need 1 or 2 axes, got {}", g.axes.len()));
            }
            for (i, a) in g.axes.iter().enumerate() {
                if let Err(e) = Axis::new(a.min, a.max, a.n) {
                    c.fail(&format!("grid.axes[{i}]"), e.to_string());
                }
            }
        }
        if let Err(e) = self.potential.validate(self.grid.as_ref().and_then(|g| g.build().ok()).as_ref()) {
            c.fail("potential", e.to_string());
        }
        if let Some(i) = &self.initial {
            let dims = self.grid.as_ref().map(|g| g.axes.len()).unwrap_or(i.q0.len());
            for (key, len) in [("initial.q0", i.q0.len()), ("initial.p0", i.p0.len())] {
                if len != dims {
                    c.fail(key, format!("needs {dims} entries, got {len}"));
                }
            }
            if i.gamma.len() != 1 && i.gamma.len() != dims {
                c.fail("initial.gamma", format!("needs 1 or {dims} entries, got {}", i.gamma.len()));
            }
            if i.gamma.iter().any(|g| !(g[0] > 0.0)) {
                c.fail("initial.gamma", "real parts must be positive");
            }
            c.finite("initial.q0", &i.q0);
            c.finite("initial.p0", &i.p0);
        }
        if let Some(a) = &self.absorber {
            c.positive("absorber.width", a.width);
            c.positive("absorber.strength", a.strength);
        }
        let needs_grid_run = |c: &mut Checker| {
            c.require("grid", &self.grid, scenario);
            c.require("initial", &self.initial, scenario);
            c.require("time", &self.time, scenario);
        };
        match scenario {
            Scenario::Grid => needs_grid_run(&mut c),
            Scenario::Paths => {
                needs_grid_run(&mut c);
                c.require("paths", &self.paths, scenario);
                if let Some(p) = &self.paths {
                    if let Some(dt) = p.dt {
                        c.positive("paths.dt", dt);
                    }
                    if let Some(d) = p.diffusion_d {
                        if !(d >= 0.0) {
                            c.fail("paths.diffusion_d", format!("must be >= 0, got {d}"));
                        }
                    }
                    if p.record_every == 0 {
                        c.fail("paths.record_every", "must be at least 1");
                    }
                }
            }
            Scenario::DoubleSlit => {
                needs_grid_run(&mut c);
                c.require("double_slit", &self.double_slit, scenario);
                if let Some(g) = &self.grid {
                    if g.axes.len() != 2 {
                        c.fail("grid.axes", "the double slit needs a 2D grid");
                    }
                }
                if !matches!(self.potential, PotentialSpec::DoubleSlitMask { .. }) {
                    c.fail("potential.kind", "must be double_slit_mask");
                }
                if let Some(d) = &self.double_slit {
                    if d.n_bins == 0 {
                        c.fail("double_slit.n_bins", "must be at least 1");
                    }
                    if !(d.y_max > d.y_min) {
                        c.fail("double_slit.y_max", "must exceed double_slit.y_min");
                    }
                }
            }
            Scenario::ParamFlow => {
                c.require("time", &self.time, scenario);
                c.require("param_flow", &self.param_flow, scenario);
                if let Some(p) = &self.param_flow {
                    if p.u.len() != p.v.len() {
                        c.fail("param_flow.v", format!("needs {} entries to match param_flow.u", p.u.len()));
                    }
                    if let Some(l) = &p.loop_ {
                        c.positive("param_flow.loop.radius", l.radius);
                        c.positive("param_flow.loop.t_total", l.t_total);
                        if l.vertices < 3 {
                            c.fail("param_flow.loop.vertices", "need at least 3");
                        }
                    }
                }
            }
            Scenario::Adf | Scenario::Branch => {
                c.require("initial", &self.initial, scenario);
                c.require("time", &self.time, scenario);
                if let Some(i) = &self.initial {
                    if i.q0.len() != 1 {
                        c.fail("initial.q0", "ADF runs are one-dimensional");
                    }
                }
                if let Some(g) = &self.grid {
                    if g.axes.len() != 1 {
                        c.fail("grid.axes", "ADF runs are one-dimensional");
                    }
                }
                if scenario == Scenario::Branch {
                    c.require("branch", &self.branch, scenario);
                    c.require("grid", &self.grid, scenario);
                    if let Some(b) = &self.branch {
                        if !(b.split.gamma2_ratio > 1.0) {
                            c.fail("branch.split.gamma2_ratio", "must exceed 1");
                        }
                        if b.split.nodes == 0 {
                            c.fail("branch.split.nodes", "must be at least 1");
                        }
                        c.finite("branch.split_times", &b.split_times);
                    }
                }
            }
            Scenario::FeynmanKac => {
                c.require("feynman_kac", &self.feynman_kac, scenario);
                if let Some(f) = &self.feynman_kac {
                    c.positive("feynman_kac.t", f.t);
                    if f.n_samples < 2 {
                        c.fail("feynman_kac.n_samples", "need at least 2");
                    }
                    if f.targets.is_empty() {
                        c.fail("feynman_kac.targets", "need at least one target point");
                    }
                    if let Some(r) = &f.reference {
                        c.positive("feynman_kac.reference.half_width", r.half_width);
                        if r.nodes < 3 || r.steps == 0 {
                            c.fail("feynman_kac.reference", "need nodes >= 3 and steps >= 1");
                        }
                    }
                }
            }
            Scenario::Verify => {}
        }
        if c.violations.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { violations: c.violations })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
scenario = "grid"
[grid]
axes = [{ min = -10.0, max = 10.0, n = 128 }]
[initial]
q0 = [0.0]
p0 = [1.0]
gamma = [[0.5, 0.0]]
[time]
dt = 0.01
n_steps = 10
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_str(MINIMAL).unwrap();
        assert_eq!(c.physics, Physics { hbar: 1.0, mass: 1.0 });
        assert_eq!(c.potential, PotentialSpec::Free);
        assert!(c.validate(Scenario::Grid).is_ok());
    }

    #[test]
    fn negative_dt_names_the_key() {
        let text = MINIMAL.replace("dt = 0.01", "dt = -0.01");
        let err = parse_str(&text).unwrap().validate(Scenario::Grid).unwrap_err();
        assert!(err.violations.iter().any(|v| v.key == "time.dt"));
    }

    #[test]
    fn every_violation_is_listed() {
        let text = MINIMAL.replace("dt = 0.01", "dt = 0.0").replace("[[0.5, 0.0]]", "[[-1.0, 0.0]]");
        let err = parse_str(&text).unwrap().validate(Scenario::Grid).unwrap_err();
        let keys: Vec<&str> = err.violations.iter().map(|v| v.key.as_str()).collect();
        assert!(keys.contains(&"time.dt") && keys.contains(&"initial.gamma"), "{keys:?}");
    }

    #[test]
    fn misspelled_key_gets_a_suggestion() {
        let text = format!("{MINIMAL}\n[potental]\nkind = \"free\"\n");
        let err = parse_str(&text).unwrap_err();
        let v = &err.violations[0];
        assert!(v.message.contains("did you mean `potential`"), "{v}");
        assert_eq!(v.line, Some(13));
    }

    #[test]
    fn nested_unknown_key_reports_its_path() {
        let text = MINIMAL.replace("n_steps = 10", "n_steps = 10\nsave_evry = 2");
        let err = parse_str(&text).unwrap_err();
        let v = &err.violations[0];
        assert!(v.key.starts_with("time"), "{v}");
        assert!(v.message.contains("save_every"), "{v}");
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let err = parse_str("seed = 1\n[grid\n").unwrap_err();
        assert_eq!(err.violations[0].line, Some(2));
    }

    #[test]
    fn scenario_mismatch_is_rejected() {
        let err = parse_str(MINIMAL).unwrap().validate(Scenario::Paths).unwrap_err();
        let keys: Vec<&str> = err.violations.iter().map(|v| v.key.as_str()).collect();
        assert!(keys.contains(&"scenario") && keys.contains(&"paths"), "{keys:?}");
    }
}
