//! SELL-C-sigma storage and its binary cache file.
//!
//! Binary layout (little endian): magic `ECMSELL\0`, `u32` version (1),
//! `u32` C, `u32` sigma, `u64` nrows_orig, nrows_padded, ncols, nnz,
//! nchunks, then `cl[nchunks]` as `u32`, `cs[nchunks + 1]` as `u64`,
//! `row_perm[nrows_orig]` as `u32`, `col[slots]` as `u32` and
//! `val[slots]` as `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::CrsMatrix;
use crate::error::SparseError;

pub const SELL_MAGIC: &[u8; 8] = b"ECMSELL\0";
pub const SELL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SellMatrix {
    pub c: usize,
    /// Effective sorting scope after rounding.
    pub sigma: usize,
    pub nrows_orig: usize,
    pub nrows_padded: usize,
    pub ncols: usize,
    pub nnz: usize,
    /// Chunk widths.
    pub cl: Vec<u32>,
    /// Chunk starts; `cs[nchunks]` is the number of stored slots.
    pub cs: Vec<usize>,
    pub col: Vec<u32>,
    pub val: Vec<f64>,
    /// Old row index to new row index.
    pub row_perm: Vec<u32>,
    /// Whether column indices were remapped through `row_perm`.
    pub cols_permuted: bool,
}

/// Scope actually used: rounded up to a multiple of C, clipped to nrows.
pub fn effective_sigma(c: usize, sigma: usize, nrows: usize) -> usize {
    sigma.div_ceil(c).saturating_mul(c).min(nrows.max(1)).max(1)
}

/// Convert CRS to SELL-C-sigma. Rows are sorted by descending length within
/// each scope (stable); square matrices also get their columns permuted.
pub fn to_sell(a: &CrsMatrix, c: usize, sigma: usize) -> Result<SellMatrix, SparseError> {
    if c == 0 || sigma == 0 {
        return Err(SparseError::Parameter("C and sigma must be >= 1".into()));
    }
    let n = a.nrows;
    let sigma = effective_sigma(c, sigma, n);
    let mut order: Vec<usize> = (0..n).collect();
    for scope in order.chunks_mut(sigma) {
        scope.sort_by_key(|&r| std::cmp::Reverse(a.row_len(r)));
    }
    let mut row_perm = vec![0u32; n];
    for (new, &old) in order.iter().enumerate() {
        row_perm[old] = new as u32;
    }
    let cols_permuted = a.is_square();
    let map_col = |c: u32| if cols_permuted { row_perm[c as usize] } else { c };

    let nchunks = n.div_ceil(c);
    let nrows_padded = nchunks * c;
    let len_of = |new_row: usize| order.get(new_row).map_or(0, |&r| a.row_len(r));
    let mut cl = Vec::with_capacity(nchunks);
    let mut cs = Vec::with_capacity(nchunks + 1);
    cs.push(0usize);
    for i in 0..nchunks {
        let w = (i * c..(i + 1) * c).map(len_of).max().unwrap_or(0);
        cl.push(w as u32);
        cs.push(cs[i] + c * w);
    }
    let slots = cs[nchunks];
    let mut col = vec![0u32; slots];
    let mut val = vec![0.0f64; slots];
    for i in 0..nchunks {
        let w = cl[i] as usize;
        for k in 0..c {
            let new_row = i * c + k;
            let (rc, rv) = match order.get(new_row) {
                Some(&r) => a.row(r),
                None => (&[][..], &[][..]),
            };
            let mut last = 0u32;
            for j in 0..w {
                let slot = cs[i] + j * c + k;
                if j < rc.len() {
                    last = map_col(rc[j]);
                    col[slot] = last;
                    val[slot] = rv[j];
                } else {
                    col[slot] = last;
                }
            }
        }
    }
    Ok(SellMatrix {
        c,
        sigma,
        nrows_orig: n,
        nrows_padded,
        ncols: a.ncols,
        nnz: a.nnz(),
        cl,
        cs,
        col,
        val,
        row_perm,
        cols_permuted,
    })
}

impl SellMatrix {
    pub fn nchunks(&self) -> usize {
        self.cl.len()
    }

    pub fn slots(&self) -> usize {
        *self.cs.last().unwrap_or(&0)
    }

    /// Fill efficiency `nnz / slots`; 1 for an empty matrix.
    pub fn beta(&self) -> f64 {
        match self.slots() {
            0 => 1.0,
            s => self.nnz as f64 / s as f64,
        }
    }

    /// Slots per chunk, the work unit for partitioning.
    pub fn chunk_weights(&self) -> Vec<u64> {
        self.cl.iter().map(|&w| w as u64 * self.c as u64).collect()
    }

    pub fn validate(&self) -> Result<(), SparseError> {
        let bad = |m: String| Err(SparseError::Format(m));
        if self.c == 0 {
            return bad("C is zero".into());
        }
        let nchunks = self.cl.len();
        if self.cs.len() != nchunks + 1 || self.cs[0] != 0 {
            return bad("chunk-start array has the wrong shape".into());
        }
        if self.nrows_padded != nchunks * self.c || self.nrows_orig > self.nrows_padded {
            return bad("padded row count disagrees with chunk count".into());
        }
        for i in 0..nchunks {
            if self.cs[i + 1] - self.cs[i] != self.c * self.cl[i] as usize {
                return bad(format!("chunk {i} start offsets disagree with its width"));
            }
        }
        if self.col.len() != self.slots() || self.val.len() != self.slots() {
            return bad("column/value arrays do not match the slot count".into());
        }
        if let Some(&c) = self.col.iter().find(|&&c| c as usize >= self.ncols.max(1)) {
            return bad(format!("column index {c} out of range"));
        }
        if self.nnz > self.slots() {
            return bad("more nonzeros than slots".into());
        }
        super::crs::check_permutation(&self.row_perm, self.nrows_orig)
            .map_err(|e| SparseError::Format(e.to_string()))
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(SELL_MAGIC)?;
        w.write_u32::<LittleEndian>(SELL_VERSION)?;
        w.write_u32::<LittleEndian>(self.c as u32)?;
        w.write_u32::<LittleEndian>(self.sigma as u32)?;
        for x in [
            self.nrows_orig,
            self.nrows_padded,
            self.ncols,
            self.nnz,
            self.cl.len(),
        ] {
            w.write_u64::<LittleEndian>(x as u64)?;
        }
        w.write_u8(self.cols_permuted as u8)?;
        for &x in &self.cl {
            w.write_u32::<LittleEndian>(x)?;
        }
        for &x in &self.cs {
            w.write_u64::<LittleEndian>(x as u64)?;
        }
        for &x in &self.row_perm {
            w.write_u32::<LittleEndian>(x)?;
        }
        for &x in &self.col {
            w.write_u32::<LittleEndian>(x)?;
        }
        for &x in &self.val {
            w.write_f64::<LittleEndian>(x)?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self, SparseError> {
        let fmt = |e: std::io::Error| SparseError::Format(e.to_string());
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(fmt)?;
        if &magic != SELL_MAGIC {
            return Err(SparseError::Format("bad magic".into()));
        }
        let version = r.read_u32::<LittleEndian>().map_err(fmt)?;
        if version != SELL_VERSION {
            return Err(SparseError::Format(format!("unsupported version {version}")));
        }
        let c = r.read_u32::<LittleEndian>().map_err(fmt)? as usize;
        let sigma = r.read_u32::<LittleEndian>().map_err(fmt)? as usize;
        let mut h = [0usize; 5];
        for x in &mut h {
            *x = r.read_u64::<LittleEndian>().map_err(fmt)? as usize;
        }
        let [nrows_orig, nrows_padded, ncols, nnz, nchunks] = h;
        let cols_permuted = r.read_u8().map_err(fmt)? != 0;
        let read_u32s = |r: &mut dyn Read, n: usize| -> Result<Vec<u32>, SparseError> {
            let mut v = vec![0u32; n];
            r.read_u32_into::<LittleEndian>(&mut v).map_err(fmt)?;
            Ok(v)
        };
        if nrows_padded != nchunks.saturating_mul(c) {
            return Err(SparseError::Format("padded row count disagrees with chunk count".into()));
        }
        let cl = read_u32s(r, nchunks)?;
        let mut cs64 = vec![0u64; nchunks + 1];
        r.read_u64_into::<LittleEndian>(&mut cs64).map_err(fmt)?;
        let cs: Vec<usize> = cs64.into_iter().map(|x| x as usize).collect();
        let row_perm = read_u32s(r, nrows_orig)?;
        let slots = *cs.last().unwrap_or(&0);
        let expected: usize = cl.iter().map(|&w| w as usize * c).sum();
        if slots != expected {
            return Err(SparseError::Format("slot count disagrees with chunk widths".into()));
        }
        let col = read_u32s(r, slots)?;
        let mut val = vec![0.0f64; slots];
        r.read_f64_into::<LittleEndian>(&mut val).map_err(fmt)?;
        let m = SellMatrix {
            c,
            sigma,
            nrows_orig,
            nrows_padded,
            ncols,
            nnz,
            cl,
            cs,
            col,
            val,
            row_perm,
            cols_permuted,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SparseError> {
        let path = path.as_ref();
        let wrap = |source| SparseError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
        self.write_to(&mut w).map_err(wrap)?;
        w.flush().map_err(wrap)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SparseError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| SparseError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_from(&mut BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_c2_sigma1() {
        let a = CrsMatrix::identity(4);
        let s = to_sell(&a, 2, 1).unwrap();
        assert_eq!(s.sigma, 2);
        assert_eq!(s.cl, vec![1, 1]);
        assert_eq!(s.beta(), 1.0);
        assert_eq!(s.row_perm, vec![0, 1, 2, 3]);
        s.validate().unwrap();
    }

    #[test]
    fn c1_sigma1_is_crs() {
        let a = CrsMatrix::random(20, 20, 0.3, 11);
        let s = to_sell(&a, 1, 1).unwrap();
        assert_eq!(s.beta(), 1.0);
        assert_eq!(s.col, a.ci);
        assert_eq!(s.val, a.val);
        assert_eq!(s.cs, a.rp);
    }

    #[test]
    fn sigma_rounding() {
        assert_eq!(effective_sigma(4, 5, 100), 8);
        assert_eq!(effective_sigma(4, 1, 100), 4);
        assert_eq!(effective_sigma(4, 1000, 10), 10);
        assert_eq!(effective_sigma(1, 1, 0), 1);
    }

    #[test]
    fn sorting_is_stable_and_descending() {
        // row lengths 1, 3, 1, 3
        let a = CrsMatrix::from_triplets(
            4,
            4,
            [
                (0, 0, 1.0),
                (1, 0, 1.0),
                (1, 1, 1.0),
                (1, 2, 1.0),
                (2, 2, 1.0),
                (3, 1, 1.0),
                (3, 2, 1.0),
                (3, 3, 1.0),
            ],
        )
        .unwrap();
        let s = to_sell(&a, 2, 4).unwrap();
        assert_eq!(s.row_perm, vec![2, 0, 3, 1]);
        assert_eq!(s.cl, vec![3, 1]);
    }

    #[test]
    fn padding_is_zero_with_valid_columns() {
        let a = CrsMatrix::random(13, 9, 0.4, 5);
        let s = to_sell(&a, 4, 8).unwrap();
        assert_eq!(s.nrows_padded, 16);
        let nonzero_slots = s.val.iter().filter(|v| **v != 0.0).count();
        assert!(nonzero_slots <= a.nnz());
        assert!(s.col.iter().all(|&c| (c as usize) < 9));
        assert!(!s.cols_permuted);
        s.validate().unwrap();
    }

    #[test]
    fn binary_round_trip() {
        let a = CrsMatrix::random(37, 37, 0.1, 9);
        let s = to_sell(&a, 8, 16).unwrap();
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        let back = SellMatrix::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(s, back);
        buf[0] = b'X';
        assert!(SellMatrix::read_from(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn truncated_file_rejected() {
        let s = to_sell(&CrsMatrix::identity(8), 4, 4).unwrap();
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(
            SellMatrix::read_from(&mut buf.as_slice()),
            Err(SparseError::Format(_))
        ));
    }
}
