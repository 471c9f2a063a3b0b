//! Fourier transforms of the annulus measures, the single-scale `L²` sums,
//! translation continuity and the interpolation trapezoid.

use gamma_sparse::curve::{dilate_point, MonomialCurve};
use gamma_sparse::spectral::{
    annulus_scales, decay_check, gauge_samples, l2_corpus, measure_fourier, ray_decay_slope,
    translation_continuity_check, trapezoid_contains_exact, AnnulusMeasure, Frac, L2Checker,
    PeriodicField, TrapezoidRegion,
};
use gamma_sparse::{Error, Result};
use serde_json::json;

use super::Context;
use crate::report::{num, write_csv, SuiteReport, Tag};

pub fn run(ctx: &Context) -> Result<SuiteReport> {
    let mut rep = ctx.report("spectral");
    let d = ctx.cfg.dimension;
    let curve = MonomialCurve::standard(d)?;
    let sp = &ctx.cfg.spectral;
    let tol = &ctx.cfg.tolerances;

    let mut worst0 = 0.0f64;
    for &j in &sp.js {
        for &s in &sp.ss {
            worst0 = worst0
                .max(measure_fourier(&AnnulusMeasure::new(&curve, j, s)?, &vec![0.0; d])?.norm());
        }
    }
    rep.assert(
        "zero-frequency",
        worst0 <= tol.fourier_zero,
        json!({"max_abs": worst0}),
    );

    let (mut worst_cov, mut worst_conj) = (0.0f64, 0.0f64);
    for xi in gauge_samples(&curve, ctx.cfg.seed ^ 0xc0, 12, (0.05, 4.0)) {
        for j in -4..=4 {
            let a = measure_fourier(&AnnulusMeasure::new(&curve, j, 1.5)?, &xi)?;
            let eta = dilate_point(&curve, (j as f64).exp2(), &xi)?;
            let b = measure_fourier(&AnnulusMeasure::new(&curve, 0, 1.5)?, &eta)?;
            worst_cov = worst_cov.max((a - b).norm() / a.norm().max(1e-6));
            let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
            let c = measure_fourier(&AnnulusMeasure::new(&curve, j, 1.5)?, &neg)?;
            worst_conj = worst_conj.max((c - a.conj()).norm() / a.norm().max(1e-6));
        }
    }
    rep.assert(
        "dilation-covariance",
        worst_cov <= tol.covariance_rel,
        json!({"max_rel_error": worst_cov}),
    );
    rep.assert(
        "conjugate-symmetry",
        worst_conj <= tol.covariance_rel,
        json!({"max_rel_error": worst_conj}),
    );

    let seeds = [
        ctx.cfg.seed.wrapping_mul(2).wrapping_add(1),
        ctx.cfg.seed.wrapping_mul(2).wrapping_add(2),
    ];
    let mut decay = Vec::new();
    for seed in seeds {
        decay.push(decay_check(
            &curve,
            &sp.js,
            &sp.ss,
            &gauge_samples(&curve, seed, sp.samples, sp.rho),
        )?);
    }
    let (ca, cb) = (decay[0].fitted_c, decay[1].fitted_c);
    let ratio = ca / cb;
    let clean = decay
        .iter()
        .all(|r| r.violations == 0 && r.unconverged == 0);
    rep.assert(
        "decay-constant-stable",
        clean && (0.5..=2.0).contains(&ratio),
        json!({"fitted_c": [ca, cb], "violations": [decay[0].violations, decay[1].violations],
               "unconverged": [decay[0].unconverged, decay[1].unconverged]}),
    );
    rep.constant("decay_c.a", Tag::Reported, ca);
    rep.constant("decay_c.b", Tag::Reported, cb);
    let rows: Vec<Vec<String>> = decay
        .iter()
        .enumerate()
        .flat_map(|(set, r)| {
            r.samples.iter().map(move |s| {
                vec![
                    set.to_string(),
                    s.j.to_string(),
                    num(s.s),
                    num(s.rho),
                    num(s.magnitude),
                    num(s.bound),
                ]
            })
        })
        .collect();
    write_csv(
        &ctx.out,
        "spectral",
        "decay",
        &["sample_set", "j", "s", "rho", "magnitude", "bound"],
        &rows,
    )?;

    let limit = -1.0 / d as f64 + tol.slope_margin;
    let mut ray_rows = Vec::new();
    let mut slopes = Vec::new();
    for dir in &sp.rays {
        if dir.len() != d {
            return Err(Error::Config(format!(
                "ray {dir:?} does not have {d} components"
            )));
        }
        let r = ray_decay_slope(&curve, 1.0, dir, sp.ray_octaves, 16)?;
        for (rho, m) in &r.envelope {
            ray_rows.push(vec![format!("{dir:?}"), num(*rho), num(*m)]);
        }
        slopes.push(json!({"direction": dir, "slope": r.slope}));
        rep.constant(format!("ray_slope.{dir:?}"), Tag::Reported, r.slope);
        rep.assert(
            format!("ray-decay.{dir:?}"),
            r.slope <= limit,
            json!({"slope": r.slope, "limit": limit}),
        );
    }
    write_csv(
        &ctx.out,
        "spectral",
        "rays",
        &["direction", "rho", "envelope"],
        &ray_rows,
    )?;

    l2_checks(ctx, &curve, &mut rep)?;

    let y = &sp.continuity_offset;
    let xs = gauge_samples(&curve, ctx.cfg.seed ^ 0x7c, 200, (0.25, 64.0));
    let cont =
        translation_continuity_check(&curve, sp.continuity_lambda, y, sp.continuity_levels, &xs)?;
    rep.assert(
        "translation-continuity",
        cont.fitted_eta > 0.0 && cont.monotone,
        json!({"fitted_eta": cont.fitted_eta, "monotone": cont.monotone}),
    );
    rep.constant("continuity_eta", Tag::Reported, cont.fitted_eta);
    let rows: Vec<Vec<String>> = cont
        .points
        .iter()
        .map(|p| {
            let mut r: Vec<String> = p.y.iter().map(|v| num(*v)).collect();
            r.extend([num(p.normalized), num(p.value)]);
            r
        })
        .collect();
    let mut header: Vec<String> = (0..d).map(|i| format!("y{i}")).collect();
    header.extend(["normalized", "value"].map(String::from));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&ctx.out, "spectral", "continuity", &header, &rows)?;

    trapezoid(d, &mut rep)?;
    Ok(rep)
}

fn l2_checks(ctx: &Context, curve: &MonomialCurve, rep: &mut SuiteReport) -> Result<()> {
    let sp = &ctx.cfg.spectral;
    let d = curve.dim();
    let n = sp.l2_resolution;
    let h = 1.0 / n as f64;
    let mut checker = L2Checker::new(curve);
    let mut worst = 0.0f64;
    let modes: Vec<Vec<i64>> = [[3i64, 0], [-5, 7], [1, -30]]
        .iter()
        .map(|m| (0..d).map(|i| m[i % 2] % (n as i64 / 2)).collect())
        .collect();
    for m in &modes {
        let f = PeriodicField::mode(n, h, m);
        let xi: Vec<f64> = m
            .iter()
            .map(|v| 2.0 * std::f64::consts::PI * *v as f64)
            .collect();
        for k in [-6, -2, 0, 3, 6] {
            let got = checker.check(k, &f)?;
            let mut want = 0.0;
            for j in annulus_scales(curve.gauge(&xi), k) {
                want += measure_fourier(&AnnulusMeasure::new(curve, j, 1.0)?, &xi)?.norm_sqr();
            }
            want *= got.norm_sq;
            let e = if want == 0.0 {
                got.sum.abs()
            } else {
                (got.sum - want).abs() / want
            };
            worst = worst.max(e);
        }
    }
    rep.assert(
        "single-mode-audit",
        worst <= ctx.cfg.tolerances.single_mode_rel,
        json!({"max_rel_error": worst, "modes": modes}),
    );

    let mut rows = Vec::new();
    let mut c = 0.0f64;
    for (i, f) in l2_corpus(n, d, h, ctx.cfg.seed ^ 0x12, sp.l2_fields)
        .iter()
        .enumerate()
    {
        for k in sp.ks.0..=sp.ks.1 {
            let r = checker.check(k, f)?;
            c = c.max(r.ratio);
            rows.push(vec![
                i.to_string(),
                k.to_string(),
                num(r.sum),
                num(r.norm_sq),
                num(r.ratio),
                r.modes.to_string(),
            ]);
        }
    }
    rep.assert(
        "k-sweep-bounded",
        c.is_finite() && c > 0.0,
        json!({"fitted_constant": c}),
    );
    rep.constant("l2_constant", Tag::Reported, c);
    write_csv(
        &ctx.out,
        "spectral",
        "l2",
        &["field", "k", "sum", "norm_sq", "ratio", "modes"],
        &rows,
    )
}

fn trapezoid(d: usize, rep: &mut SuiteReport) -> Result<()> {
    for dd in [2usize, 3, d]
        .into_iter()
        .collect::<std::collections::BTreeSet<_>>()
    {
        let t = TrapezoidRegion::new(dd)?;
        let v = t.vertices();
        let all_in = v.iter().all(|p| trapezoid_contains_exact(&t, *p));
        rep.assert(
            format!("trapezoid.d{dd}.vertices"),
            all_in,
            json!({"vertices": format!("{v:?}")}),
        );
        if dd == 2 {
            let deg = Frac::new(2, 3);
            let third = Frac::new(1, 3);
            let triangle = v[2] == (deg, third) && v[3] == (deg, third) && t.hull().len() == 3;
            rep.assert(
                "trapezoid.d2.triangle",
                triangle,
                json!({"hull": format!("{:?}", t.hull())}),
            );
        }
    }
    Ok(())
}
