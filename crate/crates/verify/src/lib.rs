//! Batch verification driver: loads a [`RunConfig`], runs the requested
//! suites and writes one JSON report per suite plus CSV data files.
//!
//! Wall-clock timings go to `timings.json` beside the reports so that the
//! reports themselves are byte-identical across runs.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

pub mod config;
pub mod corpus;
pub mod report;
pub mod suites;

pub use config::RunConfig;
use gamma_sparse::{Error, Result};
use report::SuiteReport;
use suites::{run_suite, Context};

#[derive(Debug)]
pub struct Outcome {
    pub reports: Vec<SuiteReport>,
    pub timings: BTreeMap<String, f64>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }
}

/// Runs every requested suite in dependency order, writing each report as
/// soon as it is complete. A suite that fails with a runtime error gets a
/// failing report carrying the message; configuration errors abort the run.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let ctx = Context::new(cfg, out);
    let mut reports = Vec::new();
    let mut timings = BTreeMap::new();
    for name in cfg.ordered_suites() {
        let start = Instant::now();
        let rep = match run_suite(&ctx, name) {
            Ok(r) => r,
            Err(e @ Error::Config(_)) => return Err(e),
            Err(e) => {
                let mut r = ctx.report(name);
                r.assert(
                    "completed",
                    false,
                    serde_json::json!({"error": e.to_string()}),
                );
                r
            }
        };
        timings.insert(name.to_string(), start.elapsed().as_secs_f64());
        rep.write(out)?;
        write_timings(out, &timings)?;
        reports.push(rep);
    }
    Ok(Outcome { reports, timings })
}

fn write_timings(out: &Path, t: &BTreeMap<String, f64>) -> Result<()> {
    let text = serde_json::to_string_pretty(t)?;
    std::fs::write(out.join("timings.json"), text + "\n")?;
    Ok(())
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/verifier.md")]
mod book_verifier {}
