//! Exhaustive audit of the shifted dyadic γ-grids over a bounded window.

use gamma_sparse::curve::MonomialCurve;
use gamma_sparse::grid::{shift_id, GridConfig, PropertyReport};
use gamma_sparse::Result;
use serde_json::json;

use super::Context;
use crate::report::{write_csv, SuiteReport, Tag};

pub fn run(ctx: &Context) -> Result<SuiteReport> {
    let cfg = ctx.cfg;
    let w = cfg.grid.window;
    let mut rep = ctx.report("grid");
    let mut rows = Vec::new();
    for d in cfg.grid_dimensions() {
        let grid = GridConfig::new(
            MonomialCurve::standard(d)?,
            cfg.grid.k_min,
            cfg.grid.k_max,
            cfg.grid.convention,
        )?;
        let c = grid.grid_constant()?;
        let kappa = grid.kappa()?;
        rep.assert(
            format!("d{d}.kappa-is-grid-constant-plus-one"),
            kappa == c + 1.0,
            json!({"c": c, "kappa": kappa}),
        );
        if d == 2 {
            rep.assert(
                "d2.grid-constant-two",
                c == 2.0 && kappa == 3.0,
                json!({"c": c, "kappa": kappa}),
            );
        }
        rep.constant(
            format!("d{d}.grid_constant"),
            if d == 2 { Tag::Asserted } else { Tag::Reported },
            c,
        );
        rep.constant(
            format!("d{d}.kappa"),
            if d == 2 { Tag::Asserted } else { Tag::Reported },
            kappa,
        );
        let mut totals: Vec<PropertyReport> = Vec::new();
        for shift in grid.shifts() {
            let reports = [
                grid.check_partition(&shift, w)?,
                grid.check_nesting(&shift, w)?,
                grid.check_parent_bound(&shift, c, w)?,
                grid.check_chains(&shift, w)?,
                grid.check_locate_parent(&shift, w)?,
            ];
            for r in reports {
                rows.push(vec![
                    d.to_string(),
                    shift_id(&shift).to_string(),
                    r.property.clone(),
                    r.checked.to_string(),
                    r.violations.to_string(),
                ]);
                match totals.iter_mut().find(|t| t.property == r.property) {
                    Some(t) => {
                        t.checked += r.checked;
                        t.violations += r.violations;
                        if t.examples.len() < 5 {
                            t.examples
                                .extend(r.examples.into_iter().take(5 - t.examples.len()));
                        }
                    }
                    None => totals.push(r),
                }
            }
        }
        for t in totals {
            rep.assert(
                format!("d{d}.{}", t.property),
                t.violations == 0 && t.checked > 0,
                json!({"checked": t.checked, "violations": t.violations, "examples": t.examples}),
            );
        }
    }
    write_csv(
        &ctx.out,
        "grid",
        "properties",
        &["d", "shift_id", "property", "checked", "violations"],
        &rows,
    )?;
    Ok(rep)
}
