use gamma_sparse::cells::CubeCells;
use gamma_sparse::curve::MonomialCurve;
use gamma_sparse::grid::{Cube, DyadicGammaCube, GridConfig, ShiftConvention};
use gamma_sparse::lattice::{
    make_test_function, monotone_corpus, LatticeFunction, SampleBox, TestFunction,
};
use gamma_sparse::operators::{Quadrature, TruncationSet, VariationOperator, VariationParams};
use gamma_sparse::tail::{
    tail_maximal, tail_maximal_field, tail_maximal_unrestricted, TailMaximalConfig,
};

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
    let b = SampleBox::from_cells(vec![-4.0, -4.0], 1.0 / 32.0, vec![288, 288]).unwrap();
    let set = TruncationSet::dyadic(-5, 2).unwrap();
    let op = VariationOperator::new(
        &curve,
        &set,
        VariationParams::new(3.0, 4.0).unwrap(),
        &Quadrature::default(),
    )
    .unwrap();
    Setup { grid, q0, b, op }
}

fn corpus(s: &Setup) -> Vec<(String, LatticeFunction)> {
    monotone_corpus(&s.b, &Cube::from_bounds(&[0.0, 0.0], &[1.0, 1.0]), 5).unwrap()
}

const POINTS: [[f64; 2]; 4] = [[0.1, 0.1], [0.5, 0.5], [0.9, 0.3], [0.3, 0.8]];

#[test]
fn zero_input_gives_zero() {
    let s = setup();
    let zero = LatticeFunction::from_fn(s.b.clone(), Default::default(), |_| 0.0).unwrap();
    let cfg = TailMaximalConfig::new(&s.grid, &s.q0, -2).unwrap();
    for x in POINTS {
        assert_eq!(tail_maximal(&zero, &x, &s.grid, &cfg, &s.op).unwrap(), 0.0);
    }
}

#[test]
fn widening_the_generation_range_never_decreases() {
    let s = setup();
    let narrow = TailMaximalConfig {
        generations: (-1, -1),
        stride: 2,
        ..TailMaximalConfig::new(&s.grid, &s.q0, -1).unwrap()
    };
    let wide = TailMaximalConfig {
        generations: (-2, -1),
        ..narrow.clone()
    };
    for (name, f) in corpus(&s) {
        for x in POINTS {
            let a = tail_maximal(&f, &x, &s.grid, &narrow, &s.op).unwrap();
            let b = tail_maximal(&f, &x, &s.grid, &wide, &s.op).unwrap();
            assert!(a <= b, "{name} at {x:?}");
        }
    }
}

#[test]
fn restriction_is_invisible_for_inputs_supported_in_kappa_q0() {
    let s = setup();
    let cfg = TailMaximalConfig {
        stride: 2,
        ..TailMaximalConfig::new(&s.grid, &s.q0, -2).unwrap()
    };
    let kq0 = s.grid.cube(&s.q0).dilate(cfg.kappa).unwrap();
    for (name, f) in corpus(&s).into_iter().step_by(3) {
        let g = f.masked(&kq0, None);
        for x in POINTS {
            let a = tail_maximal(&g, &x, &s.grid, &cfg, &s.op).unwrap();
            let b = tail_maximal_unrestricted(&g, &x, &s.grid, &cfg, &s.op).unwrap();
            assert_eq!(a, b, "{name} at {x:?}");
        }
    }
}

#[test]
fn restriction_can_raise_the_tail_of_a_constant() {
    // Cutting a constant off at κQ₀ creates a jump the variation then sees.
    let s = setup();
    let cfg = TailMaximalConfig {
        stride: 2,
        ..TailMaximalConfig::new(&s.grid, &s.q0, -2).unwrap()
    };
    let c = make_test_function(&TestFunction::Constant { c: 1.0 }, &s.b).unwrap();
    let worst = POINTS
        .iter()
        .map(|x| {
            tail_maximal(&c, x, &s.grid, &cfg, &s.op).unwrap()
                / tail_maximal_unrestricted(&c, x, &s.grid, &cfg, &s.op).unwrap()
        })
        .fold(0.0, f64::max);
    assert!(worst > 1.0, "{worst}");
}

#[test]
fn homogeneous_of_degree_one() {
    let s = setup();
    let cfg = TailMaximalConfig {
        stride: 2,
        ..TailMaximalConfig::new(&s.grid, &s.q0, -2).unwrap()
    };
    for (name, f) in corpus(&s).into_iter().skip(1).step_by(2) {
        let g = f.scaled(2.75).unwrap();
        for x in POINTS {
            let a = tail_maximal(&f, &x, &s.grid, &cfg, &s.op).unwrap();
            let b = tail_maximal(&g, &x, &s.grid, &cfg, &s.op).unwrap();
            assert!(
                (b - 2.75 * a).abs() <= 1e-12 * b.max(f.max_value() * 1e-3),
                "{name} at {x:?}"
            );
        }
    }
}

#[test]
fn field_is_constant_on_finest_cubes() {
    let s = setup();
    let cells = CubeCells::new(&s.grid, &s.q0, &[1.0 / 32.0, 1.0 / 32.0]).unwrap();
    let cfg = TailMaximalConfig {
        stride: 2,
        ..TailMaximalConfig::new(&s.grid, &s.q0, cells.k_fine()).unwrap()
    };
    let f = &corpus(&s)[7].1;
    let m = tail_maximal_field(f, &cells, &cfg, &s.op).unwrap();
    for q in cells
        .descendants(cells.k_fine())
        .unwrap()
        .into_iter()
        .filter(|q| q.k == cells.k_fine())
    {
        let idx = cells.cells(&q).unwrap();
        assert!(idx.iter().all(|&c| m[c] == m[idx[0]]));
    }
}
