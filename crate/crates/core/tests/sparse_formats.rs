use ecmkit::sparse::{
    gen_drect, gen_hpcg, hpcg_nnz, partition_crs, partition_weights, rcm_reorder,
    read_matrix_market, read_matrix_market_str, to_sell, write_matrix_market, CrsMatrix,
    PartitionMode, SellMatrix,
};
use ecmkit::spmv::{crs_traffic, sell_traffic, spmv_crs, SpmvConfig};
use ecmkit::SparseError;
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = CrsMatrix> {
    (1usize..40, 1usize..40).prop_flat_map(|(r, c)| {
        prop::collection::vec((0..r, 0..c, -10.0f64..10.0), 0..120)
            .prop_map(move |t| CrsMatrix::from_triplets(r, c, t).unwrap())
    })
}

fn square() -> impl Strategy<Value = CrsMatrix> {
    (1usize..40).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, -10.0f64..10.0), 0..120)
            .prop_map(move |t| CrsMatrix::from_triplets(n, n, t).unwrap())
    })
}

proptest! {
    #[test]
    fn matrix_market_round_trip(a in matrix()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mtx");
        write_matrix_market(&a, &path).unwrap();
        prop_assert_eq!(read_matrix_market(&path).unwrap(), a);
    }

    #[test]
    fn sell_binary_round_trip(a in matrix(), c in 1usize..9, sigma in 1usize..64) {
        let s = to_sell(&a, c, sigma).unwrap();
        s.validate().unwrap();
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        prop_assert_eq!(SellMatrix::read_from(&mut buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn sell_chunk_widths_are_row_maxima(a in matrix(), c in 1usize..9, sigma in 1usize..64) {
        let s = to_sell(&a, c, sigma).unwrap();
        let mut len_by_new = vec![0usize; s.nrows_padded];
        for (old, &new) in s.row_perm.iter().enumerate() {
            len_by_new[new as usize] = a.row_len(old);
        }
        for (i, w) in s.cl.iter().enumerate() {
            let max = len_by_new[i * c..(i + 1) * c].iter().copied().max().unwrap();
            prop_assert_eq!(*w as usize, max);
        }
        prop_assert!(s.beta() > 0.0 && s.beta() <= 1.0);
        // sorting never moves a row out of its scope
        for (old, &new) in s.row_perm.iter().enumerate() {
            prop_assert_eq!(old / s.sigma, new as usize / s.sigma);
        }
    }

    #[test]
    fn rcm_is_a_symmetric_permutation(a in square()) {
        let (b, perm) = rcm_reorder(&a).unwrap();
        let mut seen = vec![false; a.nrows];
        for &p in &perm {
            prop_assert!(!seen[p as usize]);
            seen[p as usize] = true;
        }
        prop_assert_eq!(b.nnz(), a.nnz());
        prop_assert_eq!(b, a.permute_symmetric(&perm).unwrap());
    }

    #[test]
    fn partitions_cover_everything(w in prop::collection::vec(0u64..50, 0..60), parts in 1usize..9) {
        for mode in [PartitionMode::ByRows, PartitionMode::ByNnz] {
            let r = partition_weights(&w, parts, mode);
            prop_assert_eq!(r.len(), parts);
            let mut next = 0;
            for range in &r {
                prop_assert_eq!(range.start, next);
                next = range.end;
            }
            prop_assert_eq!(next, w.len());
        }
    }

    #[test]
    fn accumulators_do_not_change_exact_sums(a in matrix(), k in 1usize..9, t in 1usize..4) {
        // small integers sum exactly in any order
        let a = CrsMatrix { val: a.val.iter().map(|v| v.round()).collect(), ..a };
        let x: Vec<f64> = (0..a.ncols).map(|j| (j % 7) as f64 - 3.0).collect();
        let mut y1 = vec![0.0; a.nrows];
        let mut yk = vec![0.0; a.nrows];
        spmv_crs(&a, &x, &mut y1, &SpmvConfig::default()).unwrap();
        spmv_crs(&a, &x, &mut yk, &SpmvConfig::new(k, t)).unwrap();
        prop_assert_eq!(y1, yk);
    }
}

#[test]
fn symmetric_files_expand() {
    let text = "%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 2.0\n2 1 -1.0\n3 3 4\n";
    let a = read_matrix_market_str(text).unwrap();
    assert_eq!(a.nnz(), 4);
    assert!(a.is_pattern_symmetric());
    assert_eq!(a.to_dense(), vec![2.0, -1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 4.0]);
}

#[test]
fn malformed_files_name_the_line() {
    let text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n1 x 2.0\n";
    match read_matrix_market_str(text) {
        Err(SparseError::Malformed { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
    let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
    assert!(read_matrix_market_str(text).is_err());
}

#[test]
fn generators() {
    let h = gen_hpcg(4).unwrap();
    assert_eq!(h.nnz() as u64, hpcg_nnz(4));
    assert_eq!(h.nrows, 64);
    assert!(h.is_pattern_symmetric());
    let d = gen_drect(3, 5, 7).unwrap();
    assert_eq!(d.row_lengths(), vec![5, 5, 5]);
    assert!(gen_drect(0, 5, 1).is_err());
}

#[test]
fn rcm_shrinks_a_scrambled_band() {
    // a path graph under a scrambling permutation has large bandwidth
    let n = 200;
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 2.0));
        if i + 1 < n {
            t.push((i, i + 1, -1.0));
            t.push((i + 1, i, -1.0));
        }
    }
    let path = CrsMatrix::from_triplets(n, n, t).unwrap();
    let scramble: Vec<u32> = (0..n as u32).map(|i| (i * 77) % n as u32).collect();
    let a = path.permute_symmetric(&scramble).unwrap();
    assert!(a.bandwidth() > 50);
    let (b, _) = rcm_reorder(&a).unwrap();
    assert_eq!(b.bandwidth(), 1);
}

#[test]
fn sell_traffic_counts_padding() {
    let a = gen_hpcg(5).unwrap();
    let crs = crs_traffic(&a);
    let s = to_sell(&a, 8, 1).unwrap();
    let sell = sell_traffic(&s);
    assert!(sell.v_mem >= crs.v_mem);
    assert_eq!(sell.flops, crs.flops);
    let parts = partition_crs(&a, 4, PartitionMode::ByNnz);
    assert_eq!(parts.len(), 4);
}
