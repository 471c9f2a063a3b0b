//! Suite reports and their on-disk form.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use gamma_sparse::Result;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tag {
    /// Must hold for the suite to pass.
    Asserted,
    /// Measured and recorded only.
    Reported,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub tag: Tag,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub name: String,
    pub tag: Tag,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub provenance: Provenance,
    pub checks: Vec<Check>,
    pub constants: Vec<Constant>,
    pub data: Value,
}

impl SuiteReport {
    pub fn new(suite: &str, provenance: Provenance) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            passed: true,
            provenance,
            checks: Vec::new(),
            constants: Vec::new(),
            data: Value::Object(Default::default()),
        }
    }

    pub fn assert(&mut self, name: impl Into<String>, passed: bool, detail: Value) {
        self.passed &= passed;
        self.checks.push(Check {
            name: name.into(),
            tag: Tag::Asserted,
            passed,
            detail,
        });
    }

    /// A check recorded for information; it never fails the suite.
    pub fn note(&mut self, name: impl Into<String>, holds: bool, detail: Value) {
        self.checks.push(Check {
            name: name.into(),
            tag: Tag::Reported,
            passed: holds,
            detail,
        });
    }

    pub fn constant(&mut self, name: impl Into<String>, tag: Tag, value: f64) {
        let value = value.is_finite().then_some(value);
        if tag == Tag::Asserted && value.is_none() {
            self.passed = false;
        }
        self.constants.push(Constant {
            name: name.into(),
            tag,
            value,
        });
    }

    pub fn set_data(&mut self, key: &str, value: Value) {
        if let Value::Object(map) = &mut self.data {
            map.insert(key.to_string(), value);
        }
    }

    /// Asserted checks that failed.
    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| c.tag == Tag::Asserted && !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut f = File::create(dir.join(format!("{}.json", self.suite)))?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(())
    }
}

/// Writes `<suite>.<check>.csv`.
pub fn write_csv(
    dir: &Path,
    suite: &str,
    check: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let path = dir.join(format!("{suite}.{check}.csv"));
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> gamma_sparse::Error {
    gamma_sparse::Error::Io(e.to_string())
}

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}
