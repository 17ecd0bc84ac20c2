use ecmkit::cache_sim::{simulate, SimConfig, TraceSource};
use ecmkit::lc_dw::{
    dw_apply, dw_matrix, lc_analyze, lc_table, DwOperator, DwTrace, FermionField, GaugeField,
    LatticeGeometry, Layout, LcCondition, LcMode,
};
use ecmkit::DwError;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

#[test]
fn matrix_reproduces_kernel_on_smallest_lattice() {
    let g = LatticeGeometry::new([2; 4], 2, Layout::Riri).unwrap();
    let u = GaugeField::random(&g, 5);
    let m = dw_matrix(&u, &g).unwrap();
    assert_eq!(m.nrows, 24 * 16 * 2);
    for seed in 0..20 {
        let psi = FermionField::random(&g, seed);
        let x = psi.to_real();
        let y: Vec<f64> = (0..m.nrows)
            .map(|i| {
                let (c, v) = m.row(i);
                c.iter().zip(v).map(|(&j, a)| a * x[j as usize]).sum()
            })
            .collect();
        let want = FermionField::from_real(&g, &y).unwrap();
        assert!(want.rel_diff(&dw_apply(&u, &psi, &g).unwrap()) < 1e-12);
    }
}

#[test]
fn matrix_has_stencil_structure() {
    let g = LatticeGeometry::new([4, 4, 4, 4], 2, Layout::Riri).unwrap();
    let m = dw_matrix(&GaugeField::random(&g, 1), &g).unwrap();
    let block = 24; // real entries per (site, s)
    for rb in 0..m.nrows / block {
        let mut blocks = std::collections::BTreeMap::<usize, usize>::new();
        for i in rb * block..(rb + 1) * block {
            for &c in m.row(i).0 {
                *blocks.entry(c as usize / block).or_default() += 1;
            }
        }
        assert!(blocks.len() <= 8, "row block {rb} couples {} blocks", blocks.len());
        // rank-two spin projector times a full color matrix
        assert!(blocks.values().all(|&n| n <= 24 * 12));
    }
}

#[test]
fn layouts_agree_on_rectangular_lattices() {
    let g = LatticeGeometry::new([2, 4, 6, 2], 3, Layout::Riri).unwrap();
    let h = g.with_layout(Layout::Rrii).unwrap();
    let u = GaugeField::random(&g, 8);
    let psi = FermionField::random(&g, 9);
    let a = dw_apply(&u, &psi, &g).unwrap();
    let b = dw_apply(&u, &psi, &h).unwrap();
    assert!(a.rel_diff(&b) < 1e-13);
}

#[test]
fn packed_application_is_deterministic() {
    let g = LatticeGeometry::new([4, 4, 4, 4], 2, Layout::Rrii).unwrap();
    let op = DwOperator::new(&GaugeField::random(&g, 2), &g).unwrap();
    let input = op.pack(&FermionField::random(&g, 3)).unwrap();
    let mut a = vec![0.0; input.len()];
    let mut b = vec![0.0; input.len()];
    op.apply_packed(&input, &mut a).unwrap();
    op.apply_packed(&input, &mut b).unwrap();
    assert_eq!(a, b);
    assert!(op.apply_packed(&input[1..], &mut b).is_err());
}

#[test]
fn odd_cut_dimension_is_refused() {
    assert!(matches!(
        LatticeGeometry::new([4, 4, 5, 4], 2, Layout::Riri),
        Err(DwError::Geometry(_))
    ));
}

#[test]
fn lc_thresholds_increase_and_volumes_decrease() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let layout = if rng.random_bool(0.5) { Layout::Riri } else { Layout::Rrii };
        let dims = [0; 4].map(|_| 2 * rng.random_range(2..20));
        let g = LatticeGeometry::new(dims, rng.random_range(1..17), layout).unwrap();
        for mode in [LcMode::Scalar, LcMode::Vectorized] {
            let rows = lc_table(&g, mode, true);
            for w in rows[1..].windows(2) {
                assert!(w[0].threshold_bytes < w[1].threshold_bytes, "{g} {mode:?} {w:?}");
            }
            // with Ls = 1 the s-direction reuse saves nothing
            assert!(rows[0].v_bytes_per_lup >= rows[1].v_bytes_per_lup);
            for w in rows[1..].windows(2) {
                assert!(w[0].v_bytes_per_lup > w[1].v_bytes_per_lup, "{g} {mode:?} {w:?}");
            }
        }
    }
}

#[test]
fn write_allocate_toggle_removes_one_spinor() {
    let g = LatticeGeometry::new([8; 4], 4, Layout::Riri).unwrap();
    let with = lc_table(&g, LcMode::Vectorized, true);
    let without = lc_table(&g, LcMode::Vectorized, false);
    for (a, b) in with.iter().zip(&without) {
        assert_eq!(a.v_bytes_per_lup - b.v_bytes_per_lup, 192.0);
    }
}

#[test]
fn more_cores_never_improve_the_condition() {
    let g = LatticeGeometry::new([24; 4], 8, Layout::Rrii).unwrap();
    let mut prev = LcCondition::T;
    for n in 1..=12 {
        let c = lc_analyze(&g, 8.0 * 1024.0 * 1024.0, LcMode::Vectorized, n).satisfied;
        assert!(c <= prev);
        prev = c;
    }
}

#[test]
fn small_lattice_trace_matches_lc_t() {
    // everything but the t-neighbors fits: each spinor comes from memory once
    let g = LatticeGeometry::new([4, 4, 4, 8], 4, Layout::Riri).unwrap();
    let r = simulate(&DwTrace::new(&g, 1), &SimConfig::new(256, 64 << 10, 8 << 20, 12))
        .unwrap()
        .with_divisor(g.lups() as f64);
    let lc = lc_analyze(&g, (8 << 20) as f64, LcMode::Vectorized, 1);
    assert_eq!(lc.satisfied, LcCondition::T);
    assert!((r.mem_bytes_per_unit() - lc.v_bytes_per_lup).abs() / lc.v_bytes_per_lup < 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operator_is_linear(seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let g = LatticeGeometry::new([2, 2, 4, 2], 2, Layout::Riri).unwrap();
        let u = GaugeField::random(&g, seed);
        let p1 = FermionField::random(&g, seed ^ 1);
        let p2 = FermionField::random(&g, seed ^ 2);
        let a = num_complex::Complex64::new(re, im);
        let b = num_complex::Complex64::new(im, -re);
        let lhs = dw_apply(&u, &p1.axpby(a, b, &p2), &g).unwrap();
        let rhs = dw_apply(&u, &p1, &g).unwrap().axpby(a, b, &dw_apply(&u, &p2, &g).unwrap());
        prop_assert!(rhs.rel_diff(&lhs) < 1e-12);
    }

    #[test]
    fn trace_blocks_partition_the_lattice(cores in 1usize..13) {
        let g = LatticeGeometry::new([4, 4, 4, 4], 2, Layout::Rrii).unwrap();
        let t = DwTrace::new(&g, cores);
        prop_assert_eq!(t.cores(), cores);
        let mut next = 0;
        for c in 0..cores {
            let b = t.block(c);
            prop_assert_eq!(b.start, next);
            next = b.end;
        }
        prop_assert_eq!(next, g.vsites());
    }
}
