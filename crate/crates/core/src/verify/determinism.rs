use super::Outcome;
use crate::cli::config::{parse_str, Scenario};
use crate::cli::run_config;
use crate::error::{Error, Result};

/// Bundled example configs, one per scenario that produces files.
pub const SCENARIO_CONFIGS: [(Scenario, &str); 7] = [
    (Scenario::Grid, include_str!("../../configs/grid.toml")),
    (Scenario::Paths, include_str!("../../configs/paths.toml")),
    (Scenario::DoubleSlit, include_str!("../../configs/double_slit.toml")),
    (Scenario::ParamFlow, include_str!("../../configs/param_flow.toml")),
    (Scenario::Adf, include_str!("../../configs/adf.toml")),
    (Scenario::Branch, include_str!("../../configs/branch.toml")),
    (Scenario::FeynmanKac, include_str!("../../configs/feynman_kac.toml")),
];

fn tempdir() -> Result<tempfile::TempDir> {
    Ok(tempfile::tempdir()?)
}

pub fn determinism() -> Result<Outcome> {
    let mut differing = Vec::new();
    let mut files = 0;
    for (scenario, text) in SCENARIO_CONFIGS {
        let cfg = parse_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let (a, b) = (tempdir()?, tempdir()?);
        let run = |dir: &std::path::Path| {
            run_config(&cfg, scenario, Some(dir), None).map_err(|e| Error::InvalidInput(format!("{}: {e}", scenario.as_str())))
        };
        let (ma, mb) = (run(a.path())?, run(b.path())?);
        files += ma.outputs.len();
        if ma != mb || ma.outputs.is_empty() {
            differing.push(scenario.as_str());
        }
    }
    Ok(Outcome::new(
        differing.is_empty(),
        format!(
            "{} scenarios rerun, {files} output files compared by sha256; differing: {}",
            SCENARIO_CONFIGS.len(),
            if differing.is_empty() { "none".to_string() } else { differing.join(", ") }
        ),
    ))
}
