//! Pointwise comparison of `T(fχ_{κQ₀})` with the sparse operator.

use gamma_sparse::sparse::verify_domination;
use gamma_sparse::Result;
use serde_json::json;

use super::Context;
use crate::report::{num, write_csv, SuiteReport, Tag};

pub fn run(ctx: &Context) -> Result<SuiteReport> {
    let mut rep = ctx.report("domination");
    let p = ctx.pipeline()?;
    let sc = ctx.sparse_config();
    let corpus = ctx.corpus()?;
    let reports = ctx.dominations()?;
    let lambdas = &ctx.cfg.sparse.lambdas;
    let d = p.curve.dim();
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for (i, (e, r)) in corpus.iter().zip(reports).enumerate() {
        let detail = json!({
            "flags": r.coverage_flags.len(),
            "points": r.points,
            "max_lhs": r.max_lhs,
            "fitted_constant": r.fitted_constant,
        });
        let covered = r.coverage_flags.is_empty() && r.fitted_constant.is_finite();
        let tag = if e.control {
            Tag::Reported
        } else {
            Tag::Asserted
        };
        if e.control {
            rep.note(format!("coverage.{}", e.name), covered, detail);
        } else {
            rep.assert(format!("coverage.{}", e.name), covered, detail);
        }
        rep.constant(
            format!("fitted_constant.{}", e.name),
            Tag::Reported,
            r.fitted_constant,
        );
        rep.constant(
            format!("fitted_constant_p1.{}", e.name),
            Tag::Reported,
            r.fitted_constant_p1,
        );
        rep.constant(
            format!("fitted_constant_dyadic.{}", e.name),
            Tag::Reported,
            r.fitted_constant_dyadic,
        );
        if !e.control {
            worst = worst.max(r.fitted_constant);
        }

        if let Some(&lambda) = (!lambdas.is_empty()).then(|| &lambdas[i % lambdas.len()]) {
            let scaled =
                verify_domination(&e.function.scaled(lambda)?, &p.grid, &p.q0, &p.op, &sc)?;
            let same_family = scaled.selected == r.selected;
            let rel = if r.fitted_constant == 0.0 {
                scaled.fitted_constant.abs()
            } else {
                (scaled.fitted_constant - r.fitted_constant).abs() / r.fitted_constant
            };
            let detail = json!({"lambda": lambda, "rel_change": rel, "same_family": same_family});
            let holds = same_family && rel <= ctx.cfg.tolerances.scale_rel;
            match tag {
                Tag::Asserted => rep.assert(format!("scale-invariance.{}", e.name), holds, detail),
                Tag::Reported => rep.note(format!("scale-invariance.{}", e.name), holds, detail),
            }
        }

        for row in &r.rows {
            let mut out = vec![e.name.clone()];
            out.extend(row.x.iter().map(|v| num(*v)));
            out.extend([
                num(row.lhs),
                num(row.rhs),
                row.ratio.map_or(String::new(), num),
            ]);
            rows.push(out);
        }
    }
    rep.constant("fitted_constant.max", Tag::Reported, worst);
    let mut header = vec!["function".to_string()];
    header.extend((0..d).map(|i| format!("x{i}")));
    header.extend(["lhs", "rhs", "ratio"].map(String::from));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&ctx.out, "domination", "pointwise", &header, &rows)?;
    Ok(rep)
}
