//! Deterministic input corpora.

use gamma_sparse::grid::Cube;
use gamma_sparse::lattice::{
    make_test_function, monotone_corpus, LatticeFunction, Monotonicity, SampleBox, TestFunction,
};
use gamma_sparse::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub function: LatticeFunction,
    /// Non-monotone inputs whose results are reported, never asserted.
    pub control: bool,
}

pub const KINDS: [&str; 6] = [
    "constant",
    "linear-ramp",
    "sigmoid-product",
    "upper-set-indicator",
    "random-monotone",
    "oscillating",
];

/// Parameters for the `index`-th member of kind `kind`, drawn from `seed`.
pub fn draw_kind(
    kind: &str,
    d: usize,
    focus: &Cube,
    seed: u64,
    index: usize,
) -> Result<TestFunction> {
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let inside = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..d)
            .map(|i| focus.lo(i) + rng.random_range(0.1..0.9) * focus.sides[i])
            .collect()
    };
    Ok(match kind {
        "constant" => TestFunction::Constant {
            c: rng.random_range(0.5..2.0),
        },
        "linear-ramp" => TestFunction::LinearRamp {
            coeffs: (0..d).map(|_| rng.random_range(0.1..1.0)).collect(),
            offset: rng.random_range(0.0..1.0),
        },
        "sigmoid-product" => TestFunction::SigmoidProduct {
            centers: inside(&mut rng),
            widths: (0..d)
                .map(|i| rng.random_range(0.05..0.5) * focus.sides[i])
                .collect(),
        },
        "upper-set-indicator" => TestFunction::UpperSetIndicator {
            threshold: inside(&mut rng),
        },
        "random-monotone" => TestFunction::RandomMonotone {
            seed: rng.random(),
            density: rng.random_range(-3.0f64..-1.3).exp2().powi(2),
        },
        "oscillating" => TestFunction::Oscillating {
            omega: rng.random_range(5.0..20.0),
        },
        other => {
            return Err(Error::Config(format!(
                "unknown corpus kind {other:?}; expected one of {KINDS:?}"
            )))
        }
    })
}

/// The configured corpus followed by `controls` oscillating inputs, each
/// monotone member checked on the lattice.
pub fn build_corpus(
    sample_box: &SampleBox,
    focus: &Cube,
    kinds: Option<&[String]>,
    count: usize,
    controls: usize,
    seed: u64,
) -> Result<Vec<CorpusEntry>> {
    let d = sample_box.dim();
    let mut out = Vec::new();
    match kinds {
        None => {
            for (name, function) in monotone_corpus(sample_box, focus, seed)?
                .into_iter()
                .take(count)
            {
                out.push(CorpusEntry {
                    name,
                    function,
                    control: false,
                });
            }
        }
        Some(kinds) => {
            for (i, kind) in kinds.iter().take(count).enumerate() {
                let spec = draw_kind(kind, d, focus, seed, i)?;
                let function = make_test_function(&spec, sample_box)?;
                let control = function.is_monotonic() == Monotonicity::Neither;
                out.push(CorpusEntry {
                    name: format!("{i:02}-{kind}"),
                    function,
                    control,
                });
            }
        }
    }
    for i in 0..controls {
        let spec = draw_kind("oscillating", d, focus, seed, 1000 + i)?;
        out.push(CorpusEntry {
            name: format!("control-{i:02}-oscillating"),
            function: make_test_function(&spec, sample_box)?,
            control: true,
        });
    }
    for e in out.iter().filter(|e| !e.control) {
        if e.function.is_monotonic() == Monotonicity::Neither {
            return Err(Error::Domain(format!(
                "corpus member {} is not monotone",
                e.name
            )));
        }
    }
    Ok(out)
}
