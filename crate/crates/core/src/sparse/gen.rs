//! Synthetic test matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::CrsMatrix;
use crate::error::SparseError;

pub const DEFAULT_SEED: u64 = 0x5eed;

/// Dense `nrows x nnzr` matrix stored in CRS, values uniform in [0, 1).
pub fn gen_drect(nrows: usize, nnzr: usize, seed: u64) -> Result<CrsMatrix, SparseError> {
    if nrows == 0 || nnzr == 0 {
        return Err(SparseError::Parameter("nrows and nnzr must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rp = (0..=nrows).map(|i| i * nnzr).collect();
    let ci = (0..nrows).flat_map(|_| 0..nnzr as u32).collect();
    let val = (0..nrows * nnzr).map(|_| rng.random::<f64>()).collect();
    Ok(CrsMatrix {
        nrows,
        ncols: nnzr,
        rp,
        ci,
        val,
    })
}

/// 27-point stencil on an `n^3` grid without periodic wrap: 26 on the
/// diagonal, -1 for every existing neighbor.
pub fn gen_hpcg(n: usize) -> Result<CrsMatrix, SparseError> {
    if n < 2 {
        return Err(SparseError::Parameter("grid size must be >= 2".into()));
    }
    let nrows = n * n * n;
    if nrows > u32::MAX as usize {
        return Err(SparseError::Parameter(format!("{n}^3 rows exceed 32-bit indexing")));
    }
    let nnz = hpcg_nnz(n) as usize;
    let mut rp = Vec::with_capacity(nrows + 1);
    let mut ci = Vec::with_capacity(nnz);
    let mut val = Vec::with_capacity(nnz);
    rp.push(0);
    let range = |c: usize| c.saturating_sub(1)..=(c + 1).min(n - 1);
    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                let row = x + n * (y + n * z);
                for zz in range(z) {
                    for yy in range(y) {
                        for xx in range(x) {
                            let col = xx + n * (yy + n * zz);
                            ci.push(col as u32);
                            val.push(if col == row { 26.0 } else { -1.0 });
                        }
                    }
                }
                rp.push(ci.len());
            }
        }
    }
    Ok(CrsMatrix {
        nrows,
        ncols: nrows,
        rp,
        ci,
        val,
    })
}

/// Nonzero count of [`gen_hpcg`] without building it: each axis contributes
/// `3n - 2` (cell, neighbor) pairs.
pub fn hpcg_nnz(n: usize) -> u64 {
    let per_axis = 3 * n as u64 - 2;
    per_axis.pow(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drect_shape() {
        let a = gen_drect(4, 3, 1).unwrap();
        assert_eq!(a.rp, vec![0, 3, 6, 9, 12]);
        for i in 0..4 {
            assert_eq!(a.row(i).0, &[0, 1, 2]);
        }
        let one = gen_drect(1, 1, 1).unwrap();
        assert_eq!((one.nrows, one.ncols, one.nnz()), (1, 1, 1));
        let wide = gen_drect(2, 4000, 1).unwrap();
        assert_eq!(wide.ncols, 4000);
        assert!(gen_drect(0, 3, 1).is_err());
    }

    #[test]
    fn hpcg_small_grids() {
        let a = gen_hpcg(2).unwrap();
        assert_eq!(a.nrows, 8);
        assert!(a.row_lengths().iter().all(|&l| l == 8));
        let b = gen_hpcg(3).unwrap();
        assert_eq!(b.row_len(13), 27);
        b.validate().unwrap();
        assert!(b.is_pattern_symmetric());
    }

    #[test]
    fn hpcg_nnz_matches_enumeration() {
        for n in 2..8 {
            let a = gen_hpcg(n).unwrap();
            // brute-force neighbor count per cell
            let mut count = 0u64;
            for z in 0..n as i64 {
                for y in 0..n as i64 {
                    for x in 0..n as i64 {
                        for dz in -1..=1i64 {
                            for dy in -1..=1i64 {
                                for dx in -1..=1i64 {
                                    let inside = |c: i64| c >= 0 && c < n as i64;
                                    if inside(x + dx) && inside(y + dy) && inside(z + dz) {
                                        count += 1;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            assert_eq!(a.nnz() as u64, count);
            assert_eq!(hpcg_nnz(n), count);
        }
        assert_eq!(hpcg_nnz(128), 55_742_968);
    }
}
