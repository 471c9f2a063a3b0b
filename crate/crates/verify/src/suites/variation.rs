//! The variation seminorm, the quadrature identities and the pointwise
//! properties of `T` used by the reductions.

use gamma_sparse::lattice::{field_fn, LatticeFunction};
use gamma_sparse::operators::{
    r_variation, short_two_variation, single_scale_average, truncated_hilbert, TruncationSet,
    VariationOperator, VariationParams,
};
use gamma_sparse::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{Context, Pipeline};
use crate::report::{num, write_csv, SuiteReport, Tag};

const RS: [f64; 5] = [1.0, 2.0, 2.5, 3.0, 5.0];

/// Brute force over every index subsequence of length at least two.
pub fn enumerate_variation(a: &[f64], r: f64) -> f64 {
    let n = a.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut prev: Option<f64> = None;
        let mut s = 0.0;
        for (i, v) in a.iter().enumerate() {
            if mask & (1 << i) != 0 {
                if let Some(p) = prev {
                    s += (v - p).abs().powf(r);
                }
                prev = Some(*v);
            }
        }
        best = best.max(s);
    }
    best.powf(1.0 / r)
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn run(ctx: &Context) -> Result<SuiteReport> {
    let mut rep = ctx.report("variation");
    let tol = &ctx.cfg.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed ^ 0x7661_7269);

    let mut worst = 0.0f64;
    let mut worst_case = json!(null);
    for n in 0..500 {
        let len = rng.random_range(1..=12usize);
        let a: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = RS[n % RS.len()];
        let dp = r_variation(&a, r)?;
        let e = rel(dp, enumerate_variation(&a, r));
        if e > worst {
            worst = e;
            worst_case = json!({"sequence": a, "r": r, "dp": dp});
        }
    }
    rep.assert(
        "dp-matches-enumeration",
        worst <= tol.oracle_rel,
        json!({"sequences": 500, "max_rel_error": worst, "worst": worst_case}),
    );

    let mut mismatches = Vec::new();
    for n in 0..200 {
        let len = rng.random_range(1..=40usize);
        let mut a = Vec::with_capacity(len);
        let mut v = rng.random_range(-1.0..1.0);
        for _ in 0..len {
            a.push(v);
            v += rng.random_range(0.0..1.0);
        }
        if n % 2 == 1 {
            a.reverse();
        }
        let r = RS[n % RS.len()];
        let got = r_variation(&a, r)?;
        let want = (a[len - 1] - a[0]).abs();
        if got != want {
            mismatches.push(json!({"sequence": a, "r": r, "got": got, "want": want}));
        }
    }
    rep.assert(
        "monotone-sequence-endpoints",
        mismatches.is_empty(),
        json!({"sequences": 200, "mismatches": mismatches.into_iter().take(3).collect::<Vec<_>>()}),
    );

    let p = ctx.pipeline()?;
    quadrature_identities(ctx, p, &mut rep)?;
    let monotone: Vec<&LatticeFunction> = ctx.monotone()?.iter().map(|e| &e.function).collect();
    sign_constancy(ctx, p, &monotone, &mut rep, &mut rng)?;
    general_index(ctx, p, &monotone, &mut rep, &mut rng)?;
    pointwise(ctx, p, &mut rep)?;
    short_refinement(ctx, p, &monotone, &mut rep)?;
    Ok(rep)
}

fn quadrature_identities(ctx: &Context, p: &Pipeline, rep: &mut SuiteReport) -> Result<()> {
    let tol = &ctx.cfg.tolerances;
    let quad = &ctx.cfg.operator.quadrature;
    let d = p.curve.dim();
    let big = ctx.cfg.operator.outer_radius;
    let pts: Vec<Vec<f64>> = [0.1, 0.45, 0.8].iter().map(|t| vec![*t; d]).collect();
    let pairs = [(1.0 / 64.0, big), (0.1, 0.7), (0.5, 2.0)];

    let c = 1.7;
    let constant = field_fn(d, move |_| c);
    let mut worst_c = 0.0f64;
    for x in &pts {
        for &(s, r) in &pairs {
            let h = truncated_hilbert(&p.curve, &constant, x, s, r, quad)?;
            worst_c = worst_c.max(h.abs() / (2.0 * c * (r / s).ln()));
        }
    }
    rep.assert(
        "constant-annulus-vanishes",
        worst_c <= tol.constant_abs,
        json!({"max_normalized": worst_c}),
    );

    let mut worst_t = 0.0f64;
    let ramp = field_fn(d, |y: &[f64]| (y[0] + 0.3 * y[1]).sin() + y[0] * y[0]);
    let (a, b) = (-6, 2);
    for x in &pts {
        let sum: f64 = (a..b)
            .map(|j| single_scale_average(&p.curve, &ramp, x, j, quad))
            .sum::<Result<f64>>()?;
        let h = truncated_hilbert(
            &p.curve,
            &ramp,
            x,
            (a as f64).exp2(),
            (b as f64).exp2(),
            quad,
        )?;
        worst_t = worst_t.max(rel(sum, h));
    }
    rep.assert(
        "telescoping-annuli",
        worst_t <= tol.telescoping_rel,
        json!({"max_rel_error": worst_t, "j_range": [a, b]}),
    );

    let linear = field_fn(d, |y: &[f64]| y[0]);
    let mut worst_l = 0.0f64;
    for x in &pts {
        for &(s, r) in &pairs {
            let h = truncated_hilbert(&p.curve, &linear, x, s, r, quad)?;
            worst_l = worst_l.max(rel(h, -2.0 * (r - s)));
        }
    }
    rep.assert(
        "linear-closed-form",
        worst_l <= tol.linear_rel,
        json!({"max_rel_error": worst_l}),
    );
    Ok(())
}

fn random_point(p: &Pipeline, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..p.curve.dim())
        .map(|i| p.q0_cube.lo(i) + rng.random_range(0.0..1.0) * p.q0_cube.sides[i])
        .collect()
}

fn sign_constancy(
    ctx: &Context,
    p: &Pipeline,
    fs: &[&LatticeFunction],
    rep: &mut SuiteReport,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let slack = ctx.cfg.tolerances.sign;
    let quad = &ctx.cfg.operator.quadrature;
    let (lo, hi) = ((1.0f64 / 64.0).log2(), ctx.cfg.operator.outer_radius.log2());
    let mut mixed = Vec::new();
    let mut checked = 0usize;
    for (fi, f) in fs.iter().enumerate() {
        for _ in 0..20 {
            let x = random_point(p, rng);
            let (mut pos, mut neg) = (false, false);
            for _ in 0..30 {
                let u = rng.random_range(lo..hi);
                let v = rng.random_range(lo..hi);
                if u == v {
                    continue;
                }
                let (a, b) = (u.min(v).exp2(), u.max(v).exp2());
                let diff = truncated_hilbert(&p.curve, *f, &x, a, b, quad)?;
                pos |= diff > slack;
                neg |= diff < -slack;
                checked += 1;
            }
            if pos && neg {
                mixed.push(json!({"function": fi, "x": x}));
            }
        }
    }
    rep.assert(
        "monotone-sign-constancy",
        mixed.is_empty() && !fs.is_empty(),
        json!({"functions": fs.len(), "intervals_checked": checked, "mixed_points": mixed}),
    );
    Ok(())
}

/// Finite index sets inside one dyadic block, on the quadrature nodes so that
/// the block and its pieces share one mesh.
fn general_index(
    ctx: &Context,
    p: &Pipeline,
    fs: &[&LatticeFunction],
    rep: &mut SuiteReport,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let quad = &ctx.cfg.operator.quadrature;
    let m = quad.cells_per_octave as i32;
    let mut worst = f64::NEG_INFINITY;
    let mut viol = 0usize;
    let mut checked = 0usize;
    for f in fs {
        for _ in 0..4 {
            let x = random_point(p, rng);
            let j = rng.random_range(-5..=1);
            let mut ks: Vec<i32> = (0..rng.random_range(2..=8))
                .map(|_| rng.random_range(0..=m))
                .collect();
            ks.sort_unstable();
            ks.dedup();
            if ks.len() < 2 {
                continue;
            }
            let radii: Vec<f64> = ks
                .iter()
                .map(|k| (j as f64 + *k as f64 / m as f64).exp2())
                .collect();
            let top = *radii.last().expect("nonempty");
            let set = TruncationSet::general(radii)?;
            let op = VariationOperator::new(
                &p.curve,
                &set,
                VariationParams::new(ctx.cfg.operator.r, top)?,
                quad,
            )?;
            let l1 = op.l1_sum(*f, &x)?;
            let block = single_scale_average(&p.curve, *f, &x, j, quad)?.abs();
            let excess = l1 - block;
            worst = worst.max(excess / block.max(f64::MIN_POSITIVE));
            if excess > ctx.cfg.tolerances.telescoping_rel * block.max(1e-300) + 1e-15 {
                viol += 1;
            }
            checked += 1;
        }
    }
    rep.assert(
        "general-index-within-block",
        viol == 0,
        json!({"checked": checked, "violations": viol, "max_rel_excess": worst}),
    );
    Ok(())
}

/// Strided cell centers of `Q₀`, about eight per axis.
fn lattice_points(ctx: &Context, p: &Pipeline) -> Result<Vec<Vec<f64>>> {
    let cells = p.cells()?;
    let stride = (ctx.cfg.resolution / 8).max(1);
    Ok((0..cells.len())
        .filter(|c| {
            let idx = cells.unflatten(*c);
            idx.iter().all(|i| i % stride == stride / 2)
        })
        .map(|c| cells.center(c))
        .collect())
}

fn pointwise(ctx: &Context, p: &Pipeline, rep: &mut SuiteReport) -> Result<()> {
    let corpus = ctx.corpus()?;
    let pts = lattice_points(ctx, p)?;
    let r = ctx.cfg.operator.r;
    let bound = (1.0 + 1.0 / r).exp2();
    let mut rows = Vec::new();
    let mut worst_ratio = 0.0f64;
    let mut sub_viol = 0usize;
    let mut l1_viol = 0usize;
    for w in corpus.windows(2) {
        let (f1, f2) = (&w[0].function, &w[1].function);
        let sum = f1.add(f2)?;
        for x in &pts {
            let t12 = p.op.evaluate(&sum, x)?;
            let t1 = p.op.evaluate(f1, x)?;
            let t2 = p.op.evaluate(f2, x)?;
            let ratio = if t1 + t2 > 0.0 { t12 / (t1 + t2) } else { 0.0 };
            worst_ratio = worst_ratio.max(ratio);
            if t12 > bound * (t1 + t2) * (1.0 + 1e-12) + 1e-15 {
                sub_viol += 1;
            }
            for (f, t) in [(f1, t1), (f2, t2)] {
                if t > p.op.l1_sum(f, x)? * (1.0 + 1e-12) + 1e-15 {
                    l1_viol += 1;
                }
            }
            let mut row = vec![w[0].name.clone(), w[1].name.clone()];
            row.extend(x.iter().map(|v| num(*v)));
            row.extend([num(t12), num(t1), num(t2), num(ratio)]);
            rows.push(row);
        }
    }
    rep.assert(
        "quasi-subadditivity",
        sub_viol == 0,
        json!({"pairs": corpus.len().saturating_sub(1), "points": pts.len(), "constant": bound, "violations": sub_viol}),
    );
    rep.constant("subadditivity_max_ratio", Tag::Reported, worst_ratio);
    rep.assert(
        "l1-domination",
        l1_viol == 0,
        json!({"violations": l1_viol}),
    );
    let d = p.curve.dim();
    let mut header = vec!["f1".to_string(), "f2".to_string()];
    header.extend((0..d).map(|i| format!("x{i}")));
    header.extend(["t_sum", "t_f1", "t_f2", "ratio"].map(String::from));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&ctx.out, "variation", "subadditivity", &header, &rows)
}

fn short_refinement(
    ctx: &Context,
    p: &Pipeline,
    fs: &[&LatticeFunction],
    rep: &mut SuiteReport,
) -> Result<()> {
    let quad = &ctx.cfg.operator.quadrature;
    let pts: Vec<Vec<f64>> = [0.25, 0.6]
        .iter()
        .map(|t| vec![*t; p.curve.dim()])
        .collect();
    let mut viol = Vec::new();
    let mut checked = 0usize;
    for (fi, f) in fs.iter().enumerate() {
        for x in &pts {
            for j in [-3, -1, 0] {
                let v: Vec<f64> = [9, 17, 33]
                    .iter()
                    .map(|n| short_two_variation(&p.curve, *f, x, j, *n, quad))
                    .collect::<Result<_>>()?;
                checked += 1;
                if !(v[0] <= v[1] && v[1] <= v[2]) {
                    viol.push(json!({"function": fi, "x": x, "j": j, "values": v}));
                }
            }
        }
    }
    rep.assert(
        "short-variation-refinement",
        viol.is_empty(),
        json!({"checked": checked, "violations": viol}),
    );
    Ok(())
}
