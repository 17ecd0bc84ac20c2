use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::SparseError;

/// Compressed row storage with 32-bit column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CrsMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub rp: Vec<usize>,
    pub ci: Vec<u32>,
    pub val: Vec<f64>,
}

impl CrsMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CrsMatrix {
            nrows,
            ncols,
            rp: vec![0; nrows + 1],
            ci: Vec::new(),
            val: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CrsMatrix {
            nrows: n,
            ncols: n,
            rp: (0..=n).collect(),
            ci: (0..n as u32).collect(),
            val: vec![1.0; n],
        }
    }

    /// Build from unordered triplets; duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, SparseError> {
        if ncols > u32::MAX as usize {
            return Err(SparseError::Parameter(format!(
                "{ncols} columns exceed 32-bit indexing"
            )));
        }
        let mut entries: Vec<(usize, u32, f64)> = Vec::new();
        for (r, c, v) in triplets {
            if r >= nrows || c >= ncols {
                return Err(SparseError::OutOfRange {
                    row: r,
                    col: c,
                    nrows,
                    ncols,
                });
            }
            entries.push((r, c as u32, v));
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut rp = vec![0usize; nrows + 1];
        let mut ci = Vec::with_capacity(entries.len());
        let mut val: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, u32)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *val.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            last = Some((r, c));
            rp[r + 1] += 1;
            ci.push(c);
            val.push(v);
        }
        for i in 0..nrows {
            rp[i + 1] += rp[i];
        }
        Ok(CrsMatrix {
            nrows,
            ncols,
            rp,
            ci,
            val,
        })
    }

    pub fn validate(&self) -> Result<(), SparseError> {
        let bad = |m: &str| Err(SparseError::Dimension(m.to_string()));
        if self.rp.len() != self.nrows + 1 {
            return bad("row pointer length is not nrows + 1");
        }
        if self.rp[0] != 0 || self.rp[self.nrows] != self.ci.len() {
            return bad("row pointer does not span the index array");
        }
        if self.ci.len() != self.val.len() {
            return bad("index and value arrays differ in length");
        }
        for i in 0..self.nrows {
            if self.rp[i] > self.rp[i + 1] {
                return bad("row pointer decreases");
            }
            let cols = &self.ci[self.rp[i]..self.rp[i + 1]];
            for (k, &c) in cols.iter().enumerate() {
                if c as usize >= self.ncols {
                    return Err(SparseError::OutOfRange {
                        row: i,
                        col: c as usize,
                        nrows: self.nrows,
                        ncols: self.ncols,
                    });
                }
                if k > 0 && cols[k - 1] >= c {
                    return bad("column indices within a row are not strictly increasing");
                }
            }
        }
        Ok(())
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row_len(&self, i: usize) -> usize {
        self.rp[i + 1] - self.rp[i]
    }

    pub fn row_lengths(&self) -> Vec<usize> {
        (0..self.nrows).map(|i| self.row_len(i)).collect()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.rp[i]..self.rp[i + 1];
        (&self.ci[r.clone()], &self.val[r])
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&c, &v)| (i, c as usize, v))
        })
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows * self.ncols];
        for (i, j, v) in self.triplets() {
            d[i * self.ncols + j] += v;
        }
        d
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.triplets().map(|(i, j, _)| i.abs_diff(j)).max().unwrap_or(0)
    }

    pub fn is_pattern_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        self.triplets().all(|(i, j, _)| {
            let (cols, _) = self.row(j);
            cols.binary_search(&(i as u32)).is_ok()
        })
    }

    /// `B[perm[i]][perm[j]] = A[i][j]`, with `perm` mapping old to new indices.
    pub fn permute_symmetric(&self, perm: &[u32]) -> Result<CrsMatrix, SparseError> {
        if !self.is_square() {
            return Err(SparseError::NotSquare {
                nrows: self.nrows,
                ncols: self.ncols,
            });
        }
        check_permutation(perm, self.nrows)?;
        let p = |i: usize| perm[i] as usize;
        CrsMatrix::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets().map(|(i, j, v)| (p(i), p(j), v)),
        )
    }

    /// Matrix with independent Bernoulli(`density`) entries and values in [-1, 1).
    pub fn random(nrows: usize, ncols: usize, density: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..nrows {
            for j in 0..ncols {
                if rng.random_bool(density.clamp(0.0, 1.0)) {
                    t.push((i, j, rng.random_range(-1.0..1.0)));
                }
            }
        }
        CrsMatrix::from_triplets(nrows, ncols, t).expect("indices in range")
    }
}

pub(crate) fn check_permutation(perm: &[u32], n: usize) -> Result<(), SparseError> {
    if perm.len() != n {
        return Err(SparseError::Dimension(format!(
            "permutation has length {}, expected {n}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        let p = p as usize;
        if p >= n || seen[p] {
            return Err(SparseError::Parameter("not a permutation".into()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// `out[perm[i]] = x[i]`.
pub fn permute_vector(x: &[f64], perm: &[u32]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for (i, &p) in perm.iter().enumerate() {
        out[p as usize] = x[i];
    }
    out
}

/// Inverse of [`permute_vector`]: `out[i] = x[perm[i]]`.
pub fn unpermute_vector(x: &[f64], perm: &[u32]) -> Vec<f64> {
    perm.iter().map(|&p| x[p as usize]).collect()
}
