//! The tail maximal operator and the pointwise bound behind the localization.

use gamma_sparse::lattice::{make_test_function, LatticeFunction, TestFunction};
use gamma_sparse::tail::{
    localization_check, operator_norm_estimate, tail_maximal, tail_maximal_field,
    tail_maximal_unrestricted, TailMaximalConfig,
};
use gamma_sparse::Result;
use serde_json::json;

use super::{Context, Pipeline};
use crate::report::{num, write_csv, SuiteReport, Tag};

pub fn run(ctx: &Context) -> Result<SuiteReport> {
    let mut rep = ctx.report("tail-maximal");
    let p = ctx.pipeline()?;
    let cells = p.cells()?;
    let mut tcfg = TailMaximalConfig::new(&p.grid, &p.q0, cells.k_fine())?;
    tcfg.stride = ctx.cfg.sparse.esssup_stride;

    let zero = make_test_function(&TestFunction::Constant { c: 0.0 }, &p.sample_box)?;
    let z = tail_maximal_field(&zero, &cells, &tcfg, &p.op)?;
    rep.assert(
        "zero-input",
        z.iter().all(|v| *v == 0.0),
        json!({"cells": z.len()}),
    );

    let corpus = ctx.corpus()?;
    let monotone: Vec<&LatticeFunction> = ctx.monotone()?.iter().map(|e| &e.function).collect();
    let norm = operator_norm_estimate(&monotone, &cells, p.kappa, &p.op, ctx.cfg.operator.p, 8)?;
    rep.constant("operator_norm_estimate", Tag::Reported, norm);

    if let Some(f) = monotone.get(1) {
        let wide = tail_maximal_field(f, &cells, &tcfg, &p.op)?;
        let mut narrow_cfg = tcfg.clone();
        narrow_cfg.generations.0 += 1;
        let narrow = tail_maximal_field(f, &cells, &narrow_cfg, &p.op)?;
        let bad = wide.iter().zip(&narrow).filter(|(w, n)| w < n).count();
        rep.assert("generation-monotone", bad == 0, json!({"violations": bad}));
        let c = cells.len() / 3;
        let center = cells.center(c);
        let at_center = tail_maximal(f, &center, &p.grid, &tcfg, &p.op)?;
        rep.assert(
            "field-matches-pointwise",
            (at_center - wide[c]).abs() <= 1e-12 * at_center.abs().max(1.0),
            json!({"pointwise": at_center, "field": wide[c]}),
        );
    }

    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    for e in corpus {
        let r = localization_check(
            &e.function,
            &cells,
            &tcfg,
            &p.op,
            norm,
            &e.name,
            ctx.cfg.tolerances.flag,
        )?;
        let name = format!("localization.{}", e.name);
        let mut genuine = Vec::new();
        for x in &r.flagged_points {
            if !resolution_limited(&e.function, p, cells.k_fine(), x)? {
                genuine.push(x.clone());
            }
        }
        let detail = json!({
            "fitted_constant": r.fitted_constant,
            "max_residual": r.max_residual,
            "flagged": r.flagged_points.len(),
            "resolution_limited": r.flagged_points.len() - genuine.len(),
            "genuine": genuine.iter().take(8).collect::<Vec<_>>(),
            "points": r.points_checked,
        });
        if e.control {
            rep.note(name, genuine.is_empty(), detail);
        } else {
            rep.assert(
                name,
                genuine.is_empty() && r.fitted_constant.is_finite(),
                detail,
            );
        }
        rep.constant(
            format!("localization_constant.{}", e.name),
            Tag::Reported,
            r.fitted_constant,
        );
        rows.push(vec![
            e.name.clone(),
            e.control.to_string(),
            num(norm),
            num(r.fitted_constant),
            num(r.max_residual),
            r.flagged_points.len().to_string(),
            genuine.len().to_string(),
            r.points_checked.to_string(),
        ]);

        let x = vec![0.5; p.curve.dim()];
        let restricted = tail_maximal(&e.function, &x, &p.grid, &tcfg, &p.op)?;
        let unrestricted = tail_maximal_unrestricted(&e.function, &x, &p.grid, &tcfg, &p.op)?;
        ratios.push(
            json!({"function": e.name, "restricted": restricted, "unrestricted": unrestricted}),
        );
    }
    let holds = ratios
        .iter()
        .all(|r| r["restricted"].as_f64() <= r["unrestricted"].as_f64());
    rep.note(
        "restricted-below-unrestricted",
        holds,
        json!({"points": ratios}),
    );
    write_csv(
        &ctx.out,
        "tail-maximal",
        "localization",
        &[
            "function",
            "control",
            "operator_norm",
            "fitted_constant",
            "max_residual",
            "flagged",
            "genuine_flags",
            "points",
        ],
        &rows,
    )?;
    Ok(rep)
}

/// Whether `f` is positive somewhere in `κQ` for the finest cube `Q ∋ x`.
/// The bound at such a point needs cubes below the lattice resolution.
fn resolution_limited(f: &LatticeFunction, p: &Pipeline, k_fine: i32, x: &[f64]) -> Result<bool> {
    let q = p.grid.locate(&p.q0.shift, k_fine, x)?;
    let kq = p.grid.cube(&q).dilate(p.kappa)?;
    Ok(f.sample_box()
        .cells_in(&kq)
        .into_iter()
        .any(|c| f.values()[c] > 0.0))
}
