//! One line per acceptance criterion, from a full desk-scale run plus a
//! reduced repeat for determinism.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use gamma_sparse_verify::report::SuiteReport;
use gamma_sparse_verify::{run, RunConfig};

const DESK: &str = include_str!("../../../configs/desk.toml");

struct Checks<'a> {
    by_suite: BTreeMap<&'a str, &'a SuiteReport>,
}

impl Checks<'_> {
    /// Every asserted check in `suite` whose name starts with one of `prefixes`;
    /// false when none match.
    fn all(&self, suite: &str, prefixes: &[&str]) -> bool {
        let Some(r) = self.by_suite.get(suite) else {
            return false;
        };
        let matched: Vec<_> = r
            .checks
            .iter()
            .filter(|c| prefixes.iter().any(|p| c.name.starts_with(p)))
            .filter(|c| c.tag == gamma_sparse_verify::report::Tag::Asserted)
            .collect();
        !matched.is_empty() && matched.iter().all(|c| c.passed)
    }

    fn count(&self, suite: &str, prefix: &str) -> usize {
        self.by_suite.get(suite).map_or(0, |r| {
            r.checks
                .iter()
                .filter(|c| c.name.starts_with(prefix))
                .count()
        })
    }
}

fn report_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        let name = p.file_name().unwrap().to_string_lossy().to_string();
        if name != "timings.json" {
            out.insert(name, fs::read(&p).unwrap());
        }
    }
    out
}

fn determinism() -> bool {
    let mut cfg = RunConfig::from_toml(DESK).unwrap();
    cfg.resolution = 32;
    cfg.corpus.count = 3;
    cfg.grid.dimensions = vec![2];
    cfg.spectral.samples = 12;
    cfg.spectral.l2_resolution = 32;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&cfg, a.path()).unwrap();
    run(&cfg, b.path()).unwrap();
    let (ra, rb) = (report_bytes(a.path()), report_bytes(b.path()));
    ra.keys().any(|k| k.ends_with(".json")) && ra == rb
}

#[test]
fn acceptance() {
    let cfg = RunConfig::from_toml(DESK).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let outcome = run(&cfg, dir.path()).unwrap();
    let c = Checks {
        by_suite: outcome
            .reports
            .iter()
            .map(|r| (r.suite.as_str(), r))
            .collect(),
    };
    let monotone_runs = c.count("domination", "coverage.") - cfg.corpus.controls;

    let criteria: Vec<(&str, bool)> = vec![
        (
            "variation DP equals subsequence enumeration",
            c.all("variation", &["dp-matches-enumeration"]),
        ),
        (
            "monotone sequences attain the endpoint jump",
            c.all("variation", &["monotone-sequence-endpoints"]),
        ),
        (
            "grid partition, nesting, parent bound and chains for d = 2, 3",
            c.all(
                "grid",
                &[
                    "d2.partition",
                    "d2.nesting",
                    "d2.parent-bound",
                    "d2.shrinking-chains",
                ],
            ) && c.all(
                "grid",
                &[
                    "d3.partition",
                    "d3.nesting",
                    "d3.parent-bound",
                    "d3.shrinking-chains",
                ],
            ),
        ),
        (
            "kappa = C + 1, with C = 2 and kappa = 3 at d = 2",
            c.all(
                "grid",
                &["d2.grid-constant-two", "d2.kappa-is", "d3.kappa-is"],
            ),
        ),
        (
            "quadrature identities",
            c.all("variation", &["constant-annulus-vanishes"])
                && c.all("variation", &["telescoping-annuli"])
                && c.all("variation", &["linear-closed-form"]),
        ),
        (
            "sign constancy for monotone inputs",
            c.all("variation", &["monotone-sign-constancy"]),
        ),
        (
            "quasi-subadditivity with constant 2^(1+1/r)",
            c.all("variation", &["quasi-subadditivity"]),
        ),
        (
            "stopping-time measure accounting",
            c.all("sparse", &["stopping-time."]),
        ),
        (
            "half-sparse and enlarged 1/8-sparse certificates",
            c.all("sparse", &["half-sparse.", "enlarged-sparse."]),
        ),
        (
            "domination: no coverage flags, finite and scale-invariant constant",
            monotone_runs == cfg.corpus.count && c.all("domination", &["coverage.", "scale-invariance."]),
        ),
        (
            "Fourier cancellation, covariance, decay envelope and ray slopes",
            c.all(
                "spectral",
                &[
                    "zero-frequency",
                    "dilation-covariance",
                    "decay-constant-stable",
                ],
            ) && c.all("spectral", &["ray-decay."]),
        ),
        (
            "single-scale Plancherel sums",
            c.all("spectral", &["single-mode-audit"]) && c.all("spectral", &["k-sweep-bounded"]),
        ),
        (
            "trapezoid vertices and d = 2 triangle",
            c.all("spectral", &["trapezoid.d2.triangle"]) && c.all("spectral", &["trapezoid."]),
        ),
        ("byte-identical reports across repeated runs", determinism()),
    ];
    for (i, (name, ok)) in criteria.iter().enumerate() {
        println!(
            "criterion {:>2}: {} {name}",
            i + 1,
            if *ok { "PASS" } else { "FAIL" }
        );
    }
    for r in &outcome.reports {
        for f in r.failures() {
            println!("    {}: failed {f}", r.suite);
        }
    }
    let failed: Vec<usize> = criteria
        .iter()
        .enumerate()
        .filter(|(_, (_, ok))| !ok)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
