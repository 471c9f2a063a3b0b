use gamma_sparse::curve::{dilate_point, MonomialCurve};
use gamma_sparse::spectral::{
    annulus_scales, decay_check, gauge_samples, l2_corpus, measure_fourier, ray_decay_slope,
    translation_continuity_check, AnnulusMeasure, L2Checker, PeriodicField,
};

fn c2() -> MonomialCurve {
    MonomialCurve::standard(2).unwrap()
}

#[test]
fn dilation_covariance_sweep() {
    for d in [2, 3] {
        let curve = MonomialCurve::standard(d).unwrap();
        for xi in gauge_samples(&curve, 9, 12, (0.05, 4.0)) {
            for j in -4..=4 {
                for s in [1.0, 1.5] {
                    let a =
                        measure_fourier(&AnnulusMeasure::new(&curve, j, s).unwrap(), &xi).unwrap();
                    let eta = dilate_point(&curve, (j as f64).exp2(), &xi).unwrap();
                    let b =
                        measure_fourier(&AnnulusMeasure::new(&curve, 0, s).unwrap(), &eta).unwrap();
                    assert!(
                        (a - b).norm() <= 1e-10 * a.norm().max(1e-6),
                        "d={d} j={j} {xi:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn decay_constant_is_stable_across_sample_sets() {
    let curve = c2();
    let ss = [1.0, 1.25, 1.5, 1.75];
    let js = [-2, 0, 2];
    let a = decay_check(
        &curve,
        &js,
        &ss,
        &gauge_samples(&curve, 1, 60, (1.0 / 64.0, 128.0)),
    )
    .unwrap();
    let b = decay_check(
        &curve,
        &js,
        &ss,
        &gauge_samples(&curve, 2, 60, (1.0 / 64.0, 128.0)),
    )
    .unwrap();
    assert_eq!(a.violations + b.violations, 0);
    assert_eq!(a.unconverged + b.unconverged, 0);
    let r = a.fitted_c / b.fitted_c;
    assert!((0.5..=2.0).contains(&r), "{} vs {}", a.fitted_c, b.fitted_c);
}

#[test]
fn decay_along_generic_rays() {
    let curve = c2();
    for dir in [[-3.0, 1.0], [1.0, 1.0], [0.2, 1.0]] {
        let r = ray_decay_slope(&curve, 1.0, &dir, (6, 14), 16).unwrap();
        assert!(r.slope <= -0.5 + 0.1, "{dir:?}: {}", r.slope);
    }
    // The second coordinate is an even power, so the transform vanishes on that axis.
    let m = AnnulusMeasure::new(&curve, 0, 1.0).unwrap();
    assert_eq!(measure_fourier(&m, &[0.0, 500.0]).unwrap().norm(), 0.0);
}

#[test]
fn single_mode_audit() {
    let curve = c2();
    let n = 64;
    let h = 1.0 / 64.0;
    let mut checker = L2Checker::new(&curve);
    for m in [[3i64, 0], [-5, 7], [1, -30]] {
        let f = PeriodicField::mode(n, h, &m);
        let xi: Vec<f64> = m
            .iter()
            .map(|v| 2.0 * std::f64::consts::PI * *v as f64)
            .collect();
        for k in [-6, -2, 0, 3, 6] {
            let got = checker.check(k, &f).unwrap();
            let want: f64 = annulus_scales(curve.gauge(&xi), k)
                .into_iter()
                .map(|j| {
                    measure_fourier(&AnnulusMeasure::new(&curve, j, 1.0).unwrap(), &xi)
                        .unwrap()
                        .norm_sqr()
                })
                .sum::<f64>()
                * got.norm_sq;
            assert!(
                (got.sum - want).abs() <= 1e-10 * want.max(1e-300),
                "{m:?} k={k}: {} vs {want}",
                got.sum
            );
        }
    }
    let zero = PeriodicField::new(8, 2, 0.125, vec![Default::default(); 64]).unwrap();
    assert_eq!(checker.check(0, &zero).unwrap().sum, 0.0);
}

#[test]
fn k_sweep_is_bounded_by_one_constant() {
    let curve = c2();
    let corpus = l2_corpus(64, 2, 1.0 / 64.0, 5, 2);
    let mut checker = L2Checker::new(&curve);
    let mut ratios = Vec::new();
    for f in &corpus {
        for k in -6..=6 {
            ratios.push(checker.check(k, f).unwrap().ratio);
        }
    }
    let c = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(c.is_finite() && c > 0.0);
    assert!(c < 64.0, "{ratios:?}");
}

#[test]
fn translation_continuity_has_positive_exponent() {
    let curve = c2();
    let xs = gauge_samples(&curve, 3, 200, (0.25, 64.0));
    let r = translation_continuity_check(&curve, 1.0, &[0.5, 0.5], 8, &xs).unwrap();
    assert!(r.fitted_eta > 0.0);
    assert!(r.monotone);
    let r = translation_continuity_check(&curve, 4.0, &[1.0, -6.0], 6, &xs).unwrap();
    assert!(r.fitted_eta > 0.0);
    assert!(translation_continuity_check(&curve, 1.0, &[1.0, 0.0], 3, &xs).is_err());
}
