use gamma_sparse::curve::MonomialCurve;
use gamma_sparse::grid::Cube;
use gamma_sparse::lattice::{monotone_corpus, LatticeFunction, SampleBox};
use gamma_sparse::operators::{
    partial_sums, r_variation, truncated_hilbert, Quadrature, TruncationSet, VariationOperator,
    VariationParams,
};
use proptest::prelude::*;

/// Exhaustive sup over all index subsets, the definition itself.
fn enumerate_variation(a: &[f64], r: f64) -> f64 {
    let n = a.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let s: f64 = idx
            .windows(2)
            .map(|w| (a[w[1]] - a[w[0]]).abs().powf(r))
            .sum();
        best = best.max(s);
    }
    best.powf(1.0 / r)
}

fn corpus() -> Vec<(String, LatticeFunction)> {
    let b = SampleBox::from_cells(vec![-4.0, -4.0], 1.0 / 32.0, vec![288, 288]).unwrap();
    let focus = Cube::from_bounds(&[0.0, 0.0], &[1.0, 1.0]);
    monotone_corpus(&b, &focus, 11).unwrap()
}

fn points() -> Vec<[f64; 2]> {
    (0..5)
        .flat_map(|a| (0..4).map(move |b| [0.1 + 0.2 * a as f64, 0.05 + 0.3 * b as f64]))
        .collect()
}

#[test]
fn enumeration_oracle_frozen_values() {
    assert!((enumerate_variation(&[0.0, 1.0, 0.0, 1.0], 2.0) - 3f64.sqrt()).abs() < 1e-15);
    assert_eq!(enumerate_variation(&[0.0, 1.0, 0.0, 1.0], 1.0), 3.0);
    assert!((enumerate_variation(&[1.0, 2.0, 4.0], 2.0) - 3.0).abs() < 1e-15);
}

proptest! {
    #[test]
    fn dp_matches_enumeration(a in prop::collection::vec(-5.0f64..5.0, 1..=12),
                              r in prop::sample::select(vec![1.0, 2.0, 2.5, 3.0, 5.0])) {
        let dp = r_variation(&a, r).unwrap();
        let oracle = enumerate_variation(&a, r);
        prop_assert!((dp - oracle).abs() <= 1e-12 * oracle.max(1e-300), "{dp} vs {oracle}");
    }

    #[test]
    fn monotone_sequences_use_endpoints(steps in prop::collection::vec(0u32..1024, 1..40),
                                        r in 1.0f64..6.0, up in any::<bool>()) {
        let mut a = vec![0.0f64];
        for s in steps {
            let last = *a.last().unwrap();
            a.push(last + s as f64 / 1024.0);
        }
        if !up {
            a.iter_mut().for_each(|v| *v = -*v);
        }
        let want = (a[a.len() - 1] - a[0]).abs();
        prop_assert_eq!(r_variation(&a, r).unwrap(), want);
    }
}

#[test]
fn homogeneity_and_quasi_subadditivity() {
    let curve = MonomialCurve::standard(2).unwrap();
    let q = Quadrature::default();
    let set = TruncationSet::dyadic(-6, 2).unwrap();
    let params = VariationParams::new(3.0, 4.0).unwrap();
    let op = VariationOperator::new(&curve, &set, params, &q).unwrap();
    let fs = corpus();
    let bound = 2f64.powf(1.0 + 1.0 / 3.0);
    for (name, f) in &fs {
        let g = f.scaled(3.7).unwrap();
        for x in points() {
            let a = op.evaluate(f, &x).unwrap();
            let b = op.evaluate(&g, &x).unwrap();
            let scale = (3.7 * a).max(3.7 * f.max_value() * 1e-3);
            assert!((b - 3.7 * a).abs() <= 1e-12 * scale, "{name} at {x:?}");
        }
    }
    for w in fs.windows(2) {
        let sum = w[0].1.add(&w[1].1).unwrap();
        for x in points() {
            let lhs = op.evaluate(&sum, &x).unwrap();
            let rhs =
                bound * (op.evaluate(&w[0].1, &x).unwrap() + op.evaluate(&w[1].1, &x).unwrap());
            assert!(lhs <= rhs + 1e-12, "{} + {} at {x:?}", w[0].0, w[1].0);
        }
    }
}

#[test]
fn l1_sum_dominates_variation() {
    let curve = MonomialCurve::standard(2).unwrap();
    let q = Quadrature::default();
    let set = TruncationSet::general(vec![0.02, 0.05, 0.1, 0.3, 0.31, 0.9, 2.0]).unwrap();
    let op =
        VariationOperator::new(&curve, &set, VariationParams::new(2.5, 4.0).unwrap(), &q).unwrap();
    for (name, f) in corpus() {
        for x in points() {
            let t = op.evaluate(&f, &x).unwrap();
            let l1 = op.l1_sum(&f, &x).unwrap();
            assert!(t <= l1 + 1e-14, "{name}");
            let ps = partial_sums(&op.annulus_integrals(&f, &x).unwrap());
            assert!(r_variation(&ps, 1.0).unwrap() <= l1 + 1e-12);
        }
    }
}

#[test]
fn monotone_inputs_have_constant_sign() {
    let curve = MonomialCurve::standard(2).unwrap();
    let q = Quadrature::default();
    let intervals: Vec<(f64, f64)> = (0..30)
        .map(|n| {
            let a = 0.01 * 1.23f64.powi(n);
            (a, a * (1.1 + (n % 4) as f64 * 0.6))
        })
        .collect();
    for (name, f) in corpus() {
        for x in points() {
            let v: Vec<f64> = intervals
                .iter()
                .map(|&(a, b)| truncated_hilbert(&curve, &f, &x, a, b, &q).unwrap())
                .collect();
            let pos = v.iter().any(|&y| y > 1e-10);
            let neg = v.iter().any(|&y| y < -1e-10);
            assert!(!(pos && neg), "{name} at {x:?}: {v:?}");
        }
    }
}

#[test]
fn general_index_reduction() {
    let curve = MonomialCurve::standard(2).unwrap();
    // Fine mesh: the radii of I do not align with the block's cells.
    let q = Quadrature::new(1024, 2).unwrap();
    for big_j in [-4, -1, 1] {
        let base = (big_j as f64).exp2();
        let radii: Vec<f64> = [1.0, 1.1, 1.25, 1.4, 1.7, 1.9, 2.0]
            .iter()
            .map(|r| r * base)
            .collect();
        let set = TruncationSet::general(radii).unwrap();
        let op = VariationOperator::new(
            &curve,
            &set,
            VariationParams::new(3.0, 2.0 * base).unwrap(),
            &q,
        )
        .unwrap();
        for (name, f) in corpus() {
            for x in points() {
                let l1 = op.l1_sum(&f, &x).unwrap();
                let block = truncated_hilbert(&curve, &f, &x, base, 2.0 * base, &q)
                    .unwrap()
                    .abs();
                assert!(
                    l1 <= block * (1.0 + 1e-4) + 1e-12,
                    "{name} J={big_j}: {l1} > {block}"
                );
            }
        }
    }
}
