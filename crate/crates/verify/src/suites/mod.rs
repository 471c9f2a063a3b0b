//! The verification suites. Each builds what it needs from the shared
//! [`Context`], so any one of them can run alone.

use std::cell::OnceCell;
use std::path::{Path, PathBuf};

use gamma_sparse::cells::CubeCells;
use gamma_sparse::curve::MonomialCurve;
use gamma_sparse::grid::{Cube, DyadicGammaCube, GridConfig};
use gamma_sparse::lattice::SampleBox;
use gamma_sparse::operators::{VariationOperator, VariationParams};
use gamma_sparse::sparse::{verify_domination, DominationReport, SparseConfig};
use gamma_sparse::Result;

use crate::config::RunConfig;
use crate::corpus::{build_corpus, CorpusEntry};
use crate::report::{Provenance, SuiteReport};

pub mod domination;
pub mod grid;
pub mod sparse;
pub mod spectral;
pub mod tail;
pub mod variation;

/// Objects shared by the pipeline suites: the grid, `Q₀ = [0,1)^d`, the
/// sample box `κ²Q₀` and the variation operator.
pub struct Pipeline {
    pub curve: MonomialCurve,
    pub grid: GridConfig,
    pub q0: DyadicGammaCube,
    pub q0_cube: Cube,
    pub kappa: f64,
    pub sample_box: SampleBox,
    pub op: VariationOperator,
    pub h: Vec<f64>,
}

impl Pipeline {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let d = cfg.dimension;
        let curve = MonomialCurve::standard(d)?;
        let depth = cfg.resolution.trailing_zeros() as i32;
        let grid = GridConfig::new(
            curve.clone(),
            cfg.grid.k_min.min(-depth - 1),
            cfg.grid.k_max.max(2),
            cfg.grid.convention,
        )?;
        let kappa = grid.kappa()?;
        let q0 = DyadicGammaCube::new(0, vec![0; d], vec![0; d])?;
        let q0_cube = grid.cube(&q0);
        let h = 1.0 / cfg.resolution as f64;
        let k2 = kappa * kappa;
        let lo: Vec<f64> = (0..d)
            .map(|i| q0_cube.center[i] - k2 * q0_cube.sides[i] / 2.0)
            .collect();
        let n = (k2 * cfg.resolution as f64).round() as usize;
        let sample_box = SampleBox::from_cells(lo, h, vec![n; d])?;
        let set = cfg.operator.truncations.build()?;
        let params = VariationParams::new(cfg.operator.r, cfg.operator.outer_radius)?;
        let op = VariationOperator::new(&curve, &set, params, &cfg.operator.quadrature)?;
        Ok(Pipeline {
            curve,
            grid,
            q0,
            q0_cube,
            kappa,
            sample_box,
            op,
            h: vec![h; d],
        })
    }

    pub fn cells(&self) -> Result<CubeCells> {
        CubeCells::new(&self.grid, &self.q0, &self.h)
    }
}

pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub out: PathBuf,
    pub provenance: Provenance,
    pipeline: OnceCell<Pipeline>,
    corpus: OnceCell<Vec<CorpusEntry>>,
    dominations: OnceCell<Vec<DominationReport>>,
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a RunConfig, out: &Path) -> Self {
        Context {
            cfg,
            out: out.to_path_buf(),
            provenance: Provenance {
                config_hash: cfg.hash(),
                seed: cfg.seed,
            },
            pipeline: OnceCell::new(),
            corpus: OnceCell::new(),
            dominations: OnceCell::new(),
        }
    }

    pub fn report(&self, suite: &str) -> SuiteReport {
        SuiteReport::new(suite, self.provenance.clone())
    }

    pub fn pipeline(&self) -> Result<&Pipeline> {
        if self.pipeline.get().is_none() {
            let _ = self.pipeline.set(Pipeline::new(self.cfg)?);
        }
        Ok(self.pipeline.get().expect("initialized above"))
    }

    /// Configured corpus plus controls on the pipeline sample box.
    pub fn corpus(&self) -> Result<&[CorpusEntry]> {
        if self.corpus.get().is_none() {
            let p = self.pipeline()?;
            let c = &self.cfg.corpus;
            let built = build_corpus(
                &p.sample_box,
                &p.q0_cube,
                c.kinds.as_deref(),
                c.count,
                c.controls,
                self.cfg.seed,
            )?;
            let _ = self.corpus.set(built);
        }
        Ok(self.corpus.get().expect("initialized above"))
    }

    pub fn sparse_config(&self) -> SparseConfig {
        let c = self.cfg;
        SparseConfig {
            p: c.operator.p,
            max_depth: c.sparse.max_depth,
            ladder_max: c.sparse.ladder_max,
            esssup_stride: c.sparse.esssup_stride,
            flag_tol: c.tolerances.flag,
            ..SparseConfig::default()
        }
    }

    /// The full construction on every corpus entry, in corpus order.
    pub fn dominations(&self) -> Result<&[DominationReport]> {
        if self.dominations.get().is_none() {
            let p = self.pipeline()?;
            let sc = self.sparse_config();
            let reports = self
                .corpus()?
                .iter()
                .map(|e| verify_domination(&e.function, &p.grid, &p.q0, &p.op, &sc))
                .collect::<Result<Vec<_>>>()?;
            let _ = self.dominations.set(reports);
        }
        Ok(self.dominations.get().expect("initialized above"))
    }

    pub fn monotone(&self) -> Result<Vec<&CorpusEntry>> {
        Ok(self.corpus()?.iter().filter(|e| !e.control).collect())
    }
}

/// Runs one suite by name.
pub fn run_suite(ctx: &Context, name: &str) -> Result<SuiteReport> {
    match name {
        "grid" => grid::run(ctx),
        "variation" => variation::run(ctx),
        "tail-maximal" => tail::run(ctx),
        "sparse" => sparse::run(ctx),
        "domination" => domination::run(ctx),
        "spectral" => spectral::run(ctx),
        other => Err(gamma_sparse::Error::Config(format!(
            "unknown suite {other:?}"
        ))),
    }
}
