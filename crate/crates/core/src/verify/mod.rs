//! The primary acceptance suite: thirteen end-to-end checks with pinned
//! tolerances, shared by the `verify` subcommand and the acceptance test.

use std::time::Instant;

use serde::Serialize;

use crate::error::Result;

mod branching;
mod determinism;
mod flows;
mod grid;
mod paths;

/// Result of one check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub run: fn() -> Result<Outcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "{} [{:2}] {} ({:.1} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

pub fn primary_suite() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, name: "real_complex_equivalence", run: grid::real_complex_equivalence },
        Criterion { id: 2, name: "free_gaussian_analytics", run: grid::free_gaussian_analytics },
        Criterion { id: 3, name: "continuity_order", run: grid::continuity_order },
        Criterion { id: 4, name: "ensemble_consistency", run: paths::ensemble_consistency },
        Criterion { id: 5, name: "classical_limit", run: paths::classical_limit },
        Criterion { id: 6, name: "double_slit", run: paths::double_slit },
        Criterion { id: 7, name: "feynman_kac", run: paths::feynman_kac },
        Criterion { id: 8, name: "parameter_flows", run: flows::parameter_flows },
        Criterion { id: 9, name: "loop_invariance", run: flows::loop_invariance },
        Criterion { id: 10, name: "wronskian_caustic", run: branching::wronskian_caustic },
        Criterion { id: 11, name: "weierstrass_exactness", run: branching::weierstrass_exactness },
        Criterion { id: 12, name: "branching_fidelity", run: branching::branching_fidelity },
        Criterion { id: 13, name: "determinism", run: determinism::determinism },
    ]
}

/// True when `filter` is absent, equals the id, or is a substring of the name.
pub fn selected(c: &Criterion, filter: Option<&str>) -> bool {
    match filter {
        None => true,
        Some(f) => f == c.id.to_string() || c.name.contains(f),
    }
}

/// Runs the selected criteria in order. An error inside a check counts as
/// a failure with the error as detail.
pub fn run_suite(filter: Option<&str>, mut on_result: impl FnMut(&CriterionReport)) -> Vec<CriterionReport> {
    primary_suite()
        .into_iter()
        .filter(|c| selected(c, filter))
        .map(|c| {
            let t0 = Instant::now();
            let outcome = (c.run)().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
            let report = CriterionReport {
                id: c.id,
                name: c.name.to_string(),
                passed: outcome.passed,
                detail: outcome.detail,
                seconds: t0.elapsed().as_secs_f64(),
            };
            on_result(&report);
            report
        })
        .collect()
}
