//! Measure accounting of every stopping time and the sparsity certificates.

use gamma_sparse::sparse::{default_height, enlarged_eta, NodeStatus};
use gamma_sparse::Result;
use serde_json::json;

use super::Context;
use crate::report::{num, write_csv, SuiteReport, Tag};

pub fn run(ctx: &Context) -> Result<SuiteReport> {
    let mut rep = ctx.report("sparse");
    let d = ctx.cfg.dimension;
    let height = default_height(d);
    let eta = enlarged_eta(d);
    let corpus = ctx.corpus()?;
    let reports = ctx.dominations()?;
    let mut rows = Vec::new();
    let mut families = serde_json::Map::new();
    for (e, r) in corpus.iter().zip(reports) {
        let stats = &r.family_stats;
        let mut bad = Vec::new();
        for n in stats
            .nodes
            .iter()
            .filter(|n| n.status == NodeStatus::Expanded)
        {
            let small_e = (n.exceptional_cells << (d + 2)) <= n.cube_cells;
            let ok = n.overlapping_cells == 0
                && n.residual_measure == 0.0
                && n.max_parent_density <= height
                && small_e
                && 2 * n.selected_cells <= n.cube_cells;
            if !ok {
                bad.push(json!(n));
            }
            rows.push(vec![
                e.name.clone(),
                n.depth.to_string(),
                n.cube.k.to_string(),
                n.c.map_or(String::new(), num),
                n.exceptional_cells.to_string(),
                n.selected_cells.to_string(),
                n.cube_cells.to_string(),
                n.terminal_selections.to_string(),
                num(n.max_parent_density),
            ]);
        }
        rep.assert(
            format!("stopping-time.{}", e.name),
            bad.is_empty(),
            json!({"nodes": stats.nodes.len(), "failing": bad}),
        );
        rep.assert(
            format!("half-sparse.{}", e.name),
            stats.half_sparse.holds,
            json!(stats.half_sparse),
        );
        rep.assert(
            format!("enlarged-sparse.{}", e.name),
            stats.finalized_sparse.holds && stats.eta_target == eta && stats.certified_eta >= eta,
            json!({"target": stats.eta_target, "certified": stats.certified_eta, "report": stats.finalized_sparse}),
        );
        rep.constant(
            format!("certified_eta.{}", e.name),
            Tag::Reported,
            stats.certified_eta,
        );
        rep.constant(
            format!("inherited_eta.{}", e.name),
            Tag::Reported,
            stats.inherited_eta,
        );
        if let Some(c) = stats.nodes.first().and_then(|n| n.c) {
            rep.constant(format!("root_c.{}", e.name), Tag::Reported, c);
        }
        families.insert(
            e.name.clone(),
            json!({"members": stats.members, "per_depth": stats.per_depth, "selected": r.selected}),
        );
    }
    rep.set_data("families", serde_json::Value::Object(families));
    write_csv(
        &ctx.out,
        "sparse",
        "nodes",
        &[
            "function",
            "depth",
            "k",
            "c",
            "exceptional_cells",
            "selected_cells",
            "cube_cells",
            "terminal",
            "max_parent_density",
        ],
        &rows,
    )?;
    Ok(rep)
}
