//! Primary acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Set ONEWORLD_ACCEPTANCE_STRICT=1 to exit nonzero when any criterion
//! fails; ONEWORLD_ACCEPTANCE_FILTER selects criteria by id or name.

use oneworld::verify::run_suite;

fn main() {
    let filter = std::env::var("ONEWORLD_ACCEPTANCE_FILTER").ok();
    let strict = std::env::var("ONEWORLD_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let reports = run_suite(filter.as_deref(), |r| println!("{}", r.line()));
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    println!("acceptance: {} of {} passed", reports.len() - failed.len(), reports.len());
    if !failed.is_empty() {
        println!("failing: {}", failed.join(", "));
        if strict {
            std::process::exit(1);
        }
    }
}
