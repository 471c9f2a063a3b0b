//! The localized tail maximal operator
//! `M_{T,Q₀} f(x) = sup_{Q∋x, Q⊂Q₀} esssup_{ξ∈Q} |T(f χ_{κQ₀∖κQ})(ξ)|`
//! over dyadic γ-cubes, and the pointwise check that `T(fχ_{κQ₀})` is
//! controlled by `f` and `M_{T,Q₀} f`.

use serde::{Deserialize, Serialize};

use crate::cells::CubeCells;
use crate::error::{Error, Result};
use crate::grid::{DyadicGammaCube, GridConfig};
use crate::lattice::LatticeFunction;
use crate::operators::VariationOperator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailMaximalConfig {
    pub q0: DyadicGammaCube,
    pub kappa: f64,
    /// Inclusive range `[k_lo, k_hi]` of admissible generations for `Q`.
    pub generations: (i32, i32),
    /// The esssup over `ξ ∈ Q` visits every `stride`-th cell center per axis.
    pub stride: usize,
}

impl TailMaximalConfig {
    /// Every generation strictly below `Q₀`, with `κ` taken from the grid.
    pub fn new(grid: &GridConfig, q0: &DyadicGammaCube, k_lo: i32) -> Result<Self> {
        Ok(TailMaximalConfig {
            q0: q0.clone(),
            kappa: grid.kappa()?,
            generations: (k_lo, q0.k - 1),
            stride: 1,
        })
    }

    fn check(&self) -> Result<()> {
        if !(self.kappa >= 1.0) {
            return Err(Error::Config(format!(
                "kappa must be at least 1, got {}",
                self.kappa
            )));
        }
        if self.stride == 0 {
            return Err(Error::Config("esssup stride must be positive".into()));
        }
        if self.generations.1 > self.q0.k {
            return Err(Error::Config(
                "admissible generations must not exceed Q0's".into(),
            ));
        }
        Ok(())
    }
}

/// `esssup_{ξ∈Q} |T(f χ_{A∖κQ})(ξ)|` with `A = κQ₀`, or the whole sample box
/// when `restricted` is false.
fn cube_value(
    f: &LatticeFunction,
    grid: &GridConfig,
    cfg: &TailMaximalConfig,
    op: &VariationOperator,
    q: &DyadicGammaCube,
    restricted: bool,
) -> Result<f64> {
    let kq0 = grid.cube(&cfg.q0).dilate(cfg.kappa)?;
    let qc = grid.cube(q);
    let kq = qc.dilate(cfg.kappa)?;
    let mask = f.mask(restricted.then_some(&kq0), Some(&kq));
    let view = f.view(&mask);
    let b = f.sample_box();
    let ranges = b.center_ranges(&qc);
    let mut best = 0.0f64;
    if ranges.iter().any(|(a, z)| a >= z) {
        return Ok(0.0);
    }
    let d = b.dim();
    let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
    'walk: loop {
        let xi = b.center(&idx);
        best = best.max(op.evaluate(&view, &xi)?.abs());
        let mut axis = d;
        loop {
            if axis == 0 {
                break 'walk;
            }
            axis -= 1;
            idx[axis] += cfg.stride;
            if idx[axis] < ranges[axis].1 {
                break;
            }
            idx[axis] = ranges[axis].0;
        }
    }
    Ok(best)
}

fn admissible(
    grid: &GridConfig,
    cfg: &TailMaximalConfig,
    x: &[f64],
) -> Result<Vec<DyadicGammaCube>> {
    let mut out = Vec::new();
    for k in cfg.generations.0..=cfg.generations.1 {
        let q = grid.locate(&cfg.q0.shift, k, x)?;
        if q == cfg.q0 || grid.contains_exact(&cfg.q0, &q)? {
            out.push(q);
        }
    }
    Ok(out)
}

/// `M_{T,Q₀} f(x)` over the configured generations.
pub fn tail_maximal(
    f: &LatticeFunction,
    x: &[f64],
    grid: &GridConfig,
    cfg: &TailMaximalConfig,
    op: &VariationOperator,
) -> Result<f64> {
    cfg.check()?;
    if !grid.cube(&cfg.q0).contains(x) {
        return Err(Error::Domain(format!("{x:?} lies outside Q0")));
    }
    let mut best = 0.0f64;
    for q in admissible(grid, cfg, x)? {
        best = best.max(cube_value(f, grid, cfg, op, &q, true)?);
    }
    Ok(best)
}

/// The same supremum with the input masked only by `ℝ^d ∖ κQ`.
pub fn tail_maximal_unrestricted(
    f: &LatticeFunction,
    x: &[f64],
    grid: &GridConfig,
    cfg: &TailMaximalConfig,
    op: &VariationOperator,
) -> Result<f64> {
    cfg.check()?;
    let mut best = 0.0f64;
    for k in cfg.generations.0..=cfg.generations.1 {
        let q = grid.locate(&cfg.q0.shift, k, x)?;
        best = best.max(cube_value(f, grid, cfg, op, &q, false)?);
    }
    Ok(best)
}

/// `M_{T,Q₀} f` on every cell of `Q₀`, computing each cube's value once.
pub fn tail_maximal_field(
    f: &LatticeFunction,
    cells: &CubeCells,
    cfg: &TailMaximalConfig,
    op: &VariationOperator,
) -> Result<Vec<f64>> {
    cfg.check()?;
    let grid = cells.grid();
    let mut m = vec![0.0f64; cells.len()];
    for q in cells.descendants(cfg.generations.0)? {
        if q.k > cfg.generations.1 {
            continue;
        }
        let v = cube_value(f, grid, cfg, op, &q, true)?;
        if v > 0.0 {
            for c in cells.cells(&q)? {
                m[c] = m[c].max(v);
            }
        }
    }
    Ok(m)
}

/// `T(f χ_{κQ₀})` at every cell center of `Q₀`.
pub fn localized_transform(
    f: &LatticeFunction,
    cells: &CubeCells,
    kappa: f64,
    op: &VariationOperator,
) -> Result<Vec<f64>> {
    let kq0 = cells.grid().cube(cells.q0()).dilate(kappa)?;
    let mask = f.mask(Some(&kq0), None);
    let view = f.view(&mask);
    (0..cells.len())
        .map(|c| op.evaluate(&view, &cells.center(c)))
        .collect()
}

/// Empirical `‖T‖_{L^p→L^p}`: the largest `‖T g‖_p / ‖g‖_p` over the inputs,
/// each masked to `κQ₀`, with both norms taken over cell centers of `κQ₀`
/// visited at the given stride.
pub fn operator_norm_estimate(
    inputs: &[&LatticeFunction],
    cells: &CubeCells,
    kappa: f64,
    op: &VariationOperator,
    p: f64,
    stride: usize,
) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::UnsupportedExponent(p));
    }
    let stride = stride.max(1);
    let kq0 = cells.grid().cube(cells.q0()).dilate(kappa)?;
    let mut best = 0.0f64;
    for g in inputs {
        let mask = g.mask(Some(&kq0), None);
        let view = g.view(&mask);
        let b = g.sample_box();
        let ranges = b.center_ranges(&kq0);
        if ranges.iter().any(|(a, z)| a >= z) {
            continue;
        }
        let d = b.dim();
        let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        let (mut num, mut den) = (0.0, 0.0);
        'walk: loop {
            let x = b.center(&idx);
            num += op.evaluate(&view, &x)?.abs().powf(p);
            den += g.values()[b.flatten(&idx)].powf(p);
            let mut axis = d;
            loop {
                if axis == 0 {
                    break 'walk;
                }
                axis -= 1;
                idx[axis] += stride;
                if idx[axis] < ranges[axis].1 {
                    break;
                }
                idx[axis] = ranges[axis].0;
            }
        }
        if den > 0.0 {
            best = best.max((num / den).powf(1.0 / p));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub corpus_id: String,
    pub operator_norm_estimate: f64,
    /// Smallest `c` with `LHS ≤ c (‖T‖ f + M f)` at every checked point.
    pub fitted_constant: f64,
    /// `max (LHS - (‖T‖ f + M f))`.
    pub max_residual: f64,
    /// Points with `LHS > tol` and vanishing right side.
    pub flagged_points: Vec<Vec<f64>>,
    pub points_checked: usize,
}

/// Pointwise comparison of `T(fχ_{κQ₀})(x)` with `‖T‖_est f(x) + M_{T,Q₀} f(x)`
/// at every cell center of `Q₀`.
pub fn localization_check(
    f: &LatticeFunction,
    cells: &CubeCells,
    cfg: &TailMaximalConfig,
    op: &VariationOperator,
    operator_norm: f64,
    corpus_id: &str,
    tol: f64,
) -> Result<LocalizationReport> {
    let lhs = localized_transform(f, cells, cfg.kappa, op)?;
    let m = tail_maximal_field(f, cells, cfg, op)?;
    let mut fitted = 0.0f64;
    let mut residual = f64::NEG_INFINITY;
    let mut flags = Vec::new();
    for c in 0..cells.len() {
        let x = cells.center(c);
        let rhs = operator_norm * f.evaluate(&x) + m[c];
        residual = residual.max(lhs[c] - rhs);
        if rhs > 0.0 {
            fitted = fitted.max(lhs[c] / rhs);
        } else if lhs[c] > tol {
            flags.push(x);
        }
    }
    Ok(LocalizationReport {
        corpus_id: corpus_id.to_string(),
        operator_norm_estimate: operator_norm,
        fitted_constant: fitted,
        max_residual: if residual.is_finite() { residual } else { 0.0 },
        flagged_points: flags,
        points_checked: cells.len(),
    })
}
