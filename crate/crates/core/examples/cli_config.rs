//! Runs a scenario from TOML text in-process and prints the manifest, then
//! shows how a bad config is reported.

use oneworld::cli::{parse_str, run_config, Scenario};

const CONFIG: &str = r#"
scenario = "adf"

[grid]
axes = [{ min = -15.0, max = 15.0, n = 512 }]

[potential]
kind = "harmonic"
omega = 1.0

[initial]
q0 = [1.0]
p0 = [0.0]
gamma = [[2.0, 0.0]]

[time]
dt = 0.001
n_steps = 3142

[adf]
record_every = 100
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = parse_str(CONFIG)?;
    let dir = tempfile::tempdir()?;
    let manifest = run_config(&cfg, Scenario::Adf, Some(dir.path()), None)?;
    println!("{}", serde_json::to_string_pretty(&manifest)?);

    let broken = CONFIG.replace("dt = 0.001", "dt = -0.001").replace("[potential]", "[potentail]");
    match parse_str(&broken).and_then(|c| c.validate(Scenario::Adf).map(|_| c)) {
        Ok(_) => println!("unexpectedly valid"),
        Err(e) => println!("rejected:\n{e}"),
    }
    Ok(())
}
