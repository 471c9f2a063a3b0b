//! TOML run configuration. See `docs/config.md` for the schema.

use std::path::{Path, PathBuf};

use gamma_sparse::grid::ShiftConvention;
use gamma_sparse::operators::{Quadrature, TruncationSet};
use gamma_sparse::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SUITES: [&str; 6] = [
    "grid",
    "variation",
    "tail-maximal",
    "sparse",
    "domination",
    "spectral",
];

/// Suites that need `r > 2`.
const PIPELINE_SUITES: [&str; 3] = ["tail-maximal", "sparse", "domination"];

/// Largest sample box the pipeline suites will allocate.
const MAX_SAMPLES: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    /// Lattice cells per unit side of `Q₀`.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub operator: OperatorSection,
    #[serde(default)]
    pub corpus: CorpusSection,
    #[serde(default)]
    pub sparse: SparseSection,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_resolution() -> usize {
    64
}

fn default_out() -> PathBuf {
    PathBuf::from("reports")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub k_min: i32,
    pub k_max: i32,
    pub convention: ShiftConvention,
    /// Half-width, in cubes per axis, of the audited window.
    pub window: i64,
    /// Dimensions audited by the grid suite; empty means `[dimension]`.
    pub dimensions: Vec<usize>,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            k_min: -4,
            k_max: 4,
            convention: ShiftConvention::default(),
            window: 3,
            dimensions: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TruncationSpec {
    Dyadic { l_min: i32, l_max: i32 },
    General { radii: Vec<f64> },
}

impl TruncationSpec {
    pub fn build(&self) -> Result<TruncationSet> {
        match self {
            TruncationSpec::Dyadic { l_min, l_max } => TruncationSet::dyadic(*l_min, *l_max),
            TruncationSpec::General { radii } => TruncationSet::general(radii.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorSection {
    pub r: f64,
    pub p: f64,
    pub truncations: TruncationSpec,
    pub outer_radius: f64,
    pub quadrature: Quadrature,
}

impl Default for OperatorSection {
    fn default() -> Self {
        OperatorSection {
            r: 3.0,
            p: 2.0,
            truncations: TruncationSpec::Dyadic {
                l_min: -6,
                l_max: 2,
            },
            outer_radius: 4.0,
            quadrature: Quadrature::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    /// Kind names; absent means the standard ten-function monotone corpus.
    pub kinds: Option<Vec<String>>,
    pub count: usize,
    /// Non-monotone controls appended to pipeline runs and only reported.
    pub controls: usize,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection {
            kinds: None,
            count: 10,
            controls: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SparseSection {
    pub max_depth: usize,
    pub ladder_max: u32,
    pub esssup_stride: usize,
    /// Scalings for the `f → λf` invariance audit.
    pub lambdas: Vec<f64>,
}

impl Default for SparseSection {
    fn default() -> Self {
        SparseSection {
            max_depth: 4,
            ladder_max: 30,
            esssup_stride: 1,
            lambdas: vec![4.0, 3.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSection {
    pub js: Vec<i32>,
    pub ss: Vec<f64>,
    pub samples: usize,
    /// Gauge range of the decay samples before dilation by `2^j`.
    pub rho: (f64, f64),
    pub rays: Vec<Vec<f64>>,
    pub ray_octaves: (i32, i32),
    pub ks: (i32, i32),
    pub l2_resolution: usize,
    pub l2_fields: usize,
    pub continuity_lambda: f64,
    pub continuity_offset: Vec<f64>,
    pub continuity_levels: usize,
}

impl Default for SpectralSection {
    fn default() -> Self {
        SpectralSection {
            js: vec![-2, 0, 2],
            ss: vec![1.0, 1.25, 1.5, 1.75],
            samples: 60,
            rho: (1.0 / 64.0, 128.0),
            rays: vec![vec![-3.0, 1.0], vec![1.0, 1.0], vec![0.2, 1.0]],
            ray_octaves: (6, 14),
            ks: (-6, 6),
            l2_resolution: 64,
            l2_fields: 2,
            continuity_lambda: 1.0,
            continuity_offset: vec![0.5, 0.5],
            continuity_levels: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub oracle_rel: f64,
    pub constant_abs: f64,
    pub telescoping_rel: f64,
    pub linear_rel: f64,
    pub sign: f64,
    pub flag: f64,
    pub scale_rel: f64,
    pub fourier_zero: f64,
    pub covariance_rel: f64,
    pub single_mode_rel: f64,
    pub slope_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            oracle_rel: 1e-12,
            constant_abs: 1e-8,
            telescoping_rel: 1e-10,
            linear_rel: 1e-8,
            sign: 1e-10,
            flag: 1e-8,
            scale_rel: 1e-9,
            fourier_zero: 1e-12,
            covariance_rel: 1e-10,
            single_mode_rel: 1e-10,
            slope_margin: 0.1,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Requested suites in dependency order.
    pub fn ordered_suites(&self) -> Vec<&'static str> {
        SUITES
            .iter()
            .copied()
            .filter(|s| self.suites.iter().any(|t| t == s))
            .collect()
    }

    pub fn grid_dimensions(&self) -> Vec<usize> {
        if self.grid.dimensions.is_empty() {
            vec![self.dimension]
        } else {
            self.grid.dimensions.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.suites.is_empty() {
            return bad("no suites requested".into());
        }
        if let Some(s) = self.suites.iter().find(|s| !SUITES.contains(&s.as_str())) {
            return bad(format!("unknown suite {s:?}; expected one of {SUITES:?}"));
        }
        if self.dimension < 2 || self.grid_dimensions().iter().any(|d| *d < 2) {
            return bad("dimension must be at least 2".into());
        }
        if !self.resolution.is_power_of_two() || self.resolution < 2 {
            return bad(format!(
                "resolution must be a power of two, got {}",
                self.resolution
            ));
        }
        if self.grid.k_min > self.grid.k_max {
            return bad("grid.k_min exceeds grid.k_max".into());
        }
        let pipeline = self
            .suites
            .iter()
            .any(|s| PIPELINE_SUITES.contains(&s.as_str()));
        if pipeline && !(self.operator.r > 2.0) {
            return bad(format!(
                "r must exceed 2 for the pipeline suites, got {}",
                self.operator.r
            ));
        }
        if !(self.operator.p >= 1.0) {
            return bad(format!("p must be at least 1, got {}", self.operator.p));
        }
        if pipeline && self.pipeline_samples() > MAX_SAMPLES {
            return bad(format!(
                "sample box of {} points exceeds {MAX_SAMPLES}; lower resolution or dimension",
                self.pipeline_samples()
            ));
        }
        if self.suites.iter().any(|s| s == "spectral")
            && !self.spectral.l2_resolution.is_power_of_two()
        {
            return bad("spectral.l2_resolution must be a power of two".into());
        }
        if self.sparse.lambdas.iter().any(|l| !(*l > 0.0)) {
            return bad("sparse.lambdas must be positive".into());
        }
        Ok(())
    }

    /// Samples of the box `κ²Q₀` with `κ = 3`.
    pub fn pipeline_samples(&self) -> usize {
        (9 * self.resolution).saturating_pow(self.dimension as u32)
    }

    /// SHA-256 of the effective configuration, output directory excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        let bytes = serde_json::to_vec(&c).expect("configuration serializes");
        hex::encode(Sha256::digest(bytes))
    }
}
