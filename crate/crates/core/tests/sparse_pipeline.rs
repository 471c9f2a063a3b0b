use gamma_sparse::cells::{CellSet, CubeCells};
use gamma_sparse::curve::MonomialCurve;
use gamma_sparse::grid::{Cube, DyadicGammaCube, GridConfig, ShiftConvention};
use gamma_sparse::lattice::{
    make_test_function, monotone_corpus, LatticeFunction, SampleBox, TestFunction,
};
use gamma_sparse::operators::{Quadrature, TruncationSet, VariationOperator, VariationParams};
use gamma_sparse::sparse::{
    build_sparse_family, cz_decompose, default_height, exceptional_set, finalize_family,
    sparse_operator, verify_domination, verify_sparsity, NodeStatus, SparseConfig, SparseFamily,
};
use gamma_sparse::tail::TailMaximalConfig;
use proptest::prelude::*;

struct Setup {
    grid: GridConfig,
    q0: DyadicGammaCube,
    b: SampleBox,
    op: VariationOperator,
}

fn setup() -> Setup {
    let curve = MonomialCurve::standard(2).unwrap();
    let grid = GridConfig::new(curve.clone(), -6, 2, ShiftConvention::AlternatingThird).unwrap();
    let q0 = DyadicGammaCube::new(0, vec![0, 0], vec![0, 0]).unwrap();
    let b = SampleBox::from_cells(vec![-4.0, -4.0], 1.0 / 64.0, vec![576, 576]).unwrap();
    let set = TruncationSet::dyadic(-6, 2).unwrap();
    let op = VariationOperator::new(
        &curve,
        &set,
        VariationParams::new(3.0, 4.0).unwrap(),
        &Quadrature::default(),
    )
    .unwrap();
    Setup { grid, q0, b, op }
}

fn q0_cells(s: &Setup) -> CubeCells {
    CubeCells::new(&s.grid, &s.q0, &[1.0 / 64.0, 1.0 / 64.0]).unwrap()
}

fn unit_square() -> Cube {
    Cube::from_bounds(&[0.0, 0.0], &[1.0, 1.0])
}

fn density(e: &CellSet, cells: &CubeCells, q: &DyadicGammaCube) -> f64 {
    e.count_in(cells, q).unwrap() as f64 / cells.count(q).unwrap() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stopping_time_invariants(
        blobs in prop::collection::vec((0usize..64, 0usize..64, 1usize..20, 1usize..20), 0..6),
        dust in prop::collection::vec((0usize..64, 0usize..64), 0..40),
        height in prop::sample::select(vec![0.125, 0.25, 0.5]),
    ) {
        let s = setup();
        let cells = q0_cells(&s);
        let mut bits = vec![false; cells.len()];
        for (x, y, w, h) in blobs {
            for i in x..(x + w).min(64) {
                for j in y..(y + h).min(64) {
                    bits[cells.flatten(&[i, j])] = true;
                }
            }
        }
        for (x, y) in dust {
            bits[cells.flatten(&[x, y])] = true;
        }
        let e = CellSet::from_bits(&cells, bits).unwrap();
        let r = cz_decompose(&e, &cells, height).unwrap();
        prop_assert_eq!(r.overlapping_cells, 0);
        prop_assert_eq!(r.residual_measure, 0.0);
        for (p, &terminal) in r.selected.iter().zip(&r.terminal) {
            let dp = density(&e, &cells, p);
            if terminal {
                prop_assert!(!cells.has_children(p) && dp > 0.0);
            } else {
                prop_assert!(dp > height);
            }
            let mut a = s.grid.parent(p).unwrap();
            while a != s.q0 {
                prop_assert!(density(&e, &cells, &a) <= height, "ancestor above height");
                a = s.grid.parent(&a).unwrap();
            }
        }
        if e.len() * 16 <= cells.len() {
            prop_assert!(r.selected_measure <= 0.5);
            prop_assert!(r.max_parent_density <= height);
        }
    }
}

#[test]
fn zero_and_constant_inputs() {
    let s = setup();
    let cfg = SparseConfig::default();
    let zero = LatticeFunction::from_fn(s.b.clone(), Default::default(), |_| 0.0).unwrap();
    let r = verify_domination(&zero, &s.grid, &s.q0, &s.op, &cfg).unwrap();
    assert_eq!(r.family_stats.members, 1);
    assert_eq!(r.max_lhs, 0.0);
    assert!(r.rows.iter().all(|row| row.rhs == 0.0));
    assert!(r.coverage_flags.is_empty());

    let c = make_test_function(&TestFunction::Constant { c: 2.5 }, &s.b).unwrap();
    let cells = q0_cells(&s);
    let tail_cfg = TailMaximalConfig::new(&s.grid, &s.q0, cells.k_fine()).unwrap();
    let ex = exceptional_set(&c, &cells, &tail_cfg, &s.op, 2.0, 30).unwrap();
    assert!(ex.e.is_empty());
    assert_eq!(ex.c, 1.0);
    let r = verify_domination(&c, &s.grid, &s.q0, &s.op, &cfg).unwrap();
    assert_eq!(r.selected, vec![s.q0.clone()]);
    assert!(r.coverage_flags.is_empty());
    // Truncating to κQ₀ leaves a boundary effect, so the left side does not vanish.
    assert!(r.max_lhs > 0.0 && r.fitted_constant.is_finite());
}

#[test]
fn exceptional_set_threshold() {
    let s = setup();
    let cells = q0_cells(&s);
    let tail_cfg = TailMaximalConfig::new(&s.grid, &s.q0, cells.k_fine()).unwrap();
    for seed in [3u64, 4] {
        let f = make_test_function(
            &TestFunction::RandomMonotone {
                seed,
                density: 0.01,
            },
            &s.b,
        )
        .unwrap();
        let ex = exceptional_set(&f, &cells, &tail_cfg, &s.op, 2.0, 30).unwrap();
        assert!(ex.e.len() * 16 <= cells.len());
        let (c, n) = *ex.trace.last().unwrap();
        assert_eq!(c, ex.c);
        assert_eq!(n as usize, ex.e.len());
        assert!(ex.trace[..ex.trace.len() - 1]
            .iter()
            .all(|(_, n)| *n as usize * 16 > cells.len()));
    }
}

#[test]
fn upper_set_family_halves_per_level() {
    let s = setup();
    let f = make_test_function(
        &TestFunction::UpperSetIndicator {
            threshold: vec![0.7, 0.6],
        },
        &s.b,
    )
    .unwrap();
    let cfg = SparseConfig {
        max_depth: 3,
        ..SparseConfig::default()
    };
    let build = build_sparse_family(&f, &s.grid, &s.q0, &s.op, &cfg).unwrap();
    for n in &build.nodes {
        assert!(2 * n.selected_cells <= n.cube_cells, "{n:?}");
        assert_eq!(n.residual_measure, 0.0);
        assert_eq!(n.overlapping_cells, 0);
        if n.depth == 3 {
            assert_eq!(n.status, NodeStatus::DepthLimit);
        }
    }
    assert!(verify_sparsity(&build.family, 0.5).unwrap().holds);
    let fin = finalize_family(&build.family, &s.grid, None).unwrap();
    assert!(fin.certified_eta >= default_height(2));
    assert!(verify_sparsity(&fin.family, 0.125).unwrap().holds);
    let json = serde_json::to_value(&build.family).unwrap();
    let first = &json["members"][0];
    assert!(first["cube"]["grid_id"].is_number() && first["witness_measure"].is_number());
}

#[test]
fn sparse_operator_examples() {
    let s = setup();
    let one = make_test_function(&TestFunction::Constant { c: 1.0 }, &s.b).unwrap();
    let q0c = unit_square();
    let fam = SparseFamily::from_cubes(vec![q0c.clone()], 0.5, vec![1.0 / 64.0; 2]);
    let v = sparse_operator(&fam, &one, &[0.5, 0.5], 1.0, 3.0, &q0c).unwrap();
    assert!((v - 1.0).abs() < 1e-14);
    assert_eq!(
        sparse_operator(&fam, &one, &[1.5, 0.5], 1.0, 3.0, &q0c).unwrap(),
        0.0
    );

    let f = make_test_function(
        &TestFunction::LinearRamp {
            coeffs: vec![1.0, 0.5],
            offset: 5.0,
        },
        &s.b,
    )
    .unwrap();
    let inner = Cube::from_bounds(&[0.0, 0.0], &[0.5, 0.25]);
    let both = SparseFamily::from_cubes(vec![q0c.clone(), inner.clone()], 0.5, vec![1.0 / 64.0; 2]);
    let x = [0.1, 0.1];
    let sum = sparse_operator(&both, &f, &x, 2.0, 3.0, &q0c).unwrap();
    let a = sparse_operator(
        &SparseFamily::from_cubes(vec![q0c.clone()], 0.5, vec![]),
        &f,
        &x,
        2.0,
        3.0,
        &q0c,
    )
    .unwrap();
    let b = sparse_operator(
        &SparseFamily::from_cubes(vec![inner], 0.5, vec![]),
        &f,
        &x,
        2.0,
        3.0,
        &q0c,
    )
    .unwrap();
    assert!((sum - (a + b)).abs() <= 1e-14 * sum);
}

#[test]
fn domination_is_scale_invariant() {
    let s = setup();
    let cfg = SparseConfig::default();
    let corpus = monotone_corpus(&s.b, &unit_square(), 7).unwrap();
    for idx in [2, 4, 7] {
        let (name, f) = &corpus[idx];
        let base = verify_domination(f, &s.grid, &s.q0, &s.op, &cfg).unwrap();
        assert!(base.coverage_flags.is_empty(), "{name}");
        assert!(base.fitted_constant.is_finite() && base.fitted_constant > 0.0);
        assert!(base.family_stats.half_sparse.holds && base.family_stats.finalized_sparse.holds);
        for lambda in [4.0, 3.0] {
            let g = f.scaled(lambda).unwrap();
            let r = verify_domination(&g, &s.grid, &s.q0, &s.op, &cfg).unwrap();
            assert_eq!(r.selected, base.selected, "{name} λ={lambda}");
            let rel = (r.fitted_constant - base.fitted_constant).abs() / base.fitted_constant;
            assert!(rel <= 1e-9, "{name} λ={lambda}: {rel}");
        }
    }
}
