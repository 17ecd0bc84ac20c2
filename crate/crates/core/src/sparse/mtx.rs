//! Matrix Market coordinate files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::CrsMatrix;
use crate::error::SparseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CrsMatrix, SparseError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| SparseError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_matrix_market_from(BufReader::new(file))
}

pub fn read_matrix_market_str(text: &str) -> Result<CrsMatrix, SparseError> {
    read_matrix_market_from(text.as_bytes())
}

pub fn read_matrix_market_from(reader: impl BufRead) -> Result<CrsMatrix, SparseError> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let malformed = |line: usize, message: &str| SparseError::Malformed {
        line,
        message: message.to_string(),
    };
    let io = |e: std::io::Error| SparseError::Io {
        path: "<matrix market>".into(),
        source: e,
    };

    let (_, header) = lines.next().ok_or_else(|| malformed(1, "empty file"))?;
    let header = header.map_err(io)?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(malformed(1, "expected `%%MatrixMarket matrix <format> <field> <symmetry>`"));
    }
    if tokens[2] != "coordinate" {
        return Err(malformed(1, "only the coordinate format is supported"));
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(malformed(1, &format!("unsupported field `{other}`"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(malformed(1, &format!("unsupported symmetry `{other}`"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut seen = 0usize;
    for (no, line) in lines {
        let line = line.map_err(io)?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let Some((nrows, ncols, nnz)) = size else {
            if parts.len() != 3 {
                return Err(malformed(no, "size line needs `rows cols entries`"));
            }
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| malformed(no, &format!("bad integer `{s}`")))
            };
            size = Some((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?));
            triplets.reserve(parse(parts[2])?);
            continue;
        };
        let want = if field == Field::Pattern { 2 } else { 3 };
        if parts.len() != want {
            return Err(malformed(no, &format!("expected {want} fields, got {}", parts.len())));
        }
        if seen == nnz {
            return Err(malformed(no, &format!("more than the declared {nnz} entries")));
        }
        let index = |s: &str| -> Result<usize, SparseError> {
            let i: usize = s
                .parse()
                .map_err(|_| malformed(no, &format!("bad index `{s}`")))?;
            if i == 0 {
                return Err(malformed(no, "indices are 1-based"));
            }
            Ok(i - 1)
        };
        let (r, c) = (index(parts[0])?, index(parts[1])?);
        if r >= nrows || c >= ncols {
            return Err(SparseError::OutOfRange {
                row: r + 1,
                col: c + 1,
                nrows,
                ncols,
            });
        }
        let v = match field {
            Field::Pattern => 1.0,
            _ => parts[2]
                .parse::<f64>()
                .map_err(|_| malformed(no, &format!("bad value `{}`", parts[2])))?,
        };
        triplets.push((r, c, v));
        if r != c {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => triplets.push((c, r, v)),
                Symmetry::SkewSymmetric => triplets.push((c, r, -v)),
            }
        }
        seen += 1;
    }
    let (nrows, ncols, nnz) = size.ok_or_else(|| malformed(1, "missing size line"))?;
    if seen != nnz {
        return Err(malformed(
            0,
            &format!("header declares {nnz} entries but file contains {seen}"),
        ));
    }
    CrsMatrix::from_triplets(nrows, ncols, triplets)
}

/// Writes a general real coordinate file.
pub fn write_matrix_market(a: &CrsMatrix, path: impl AsRef<Path>) -> Result<(), SparseError> {
    let path = path.as_ref();
    let wrap = |source| SparseError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
    write_matrix_market_to(a, &mut w).map_err(wrap)?;
    w.flush().map_err(wrap)
}

pub fn write_matrix_market_to(a: &CrsMatrix, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows, a.ncols, a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let a = read_matrix_market_str(
            "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 1.0\n2 2 1.0\n",
        )
        .unwrap();
        assert_eq!(a.rp, vec![0, 1, 2]);
        assert_eq!(a.ci, vec![0, 1]);
        assert_eq!(a.val, vec![1.0, 1.0]);
    }

    #[test]
    fn symmetric_expansion() {
        let a = read_matrix_market_str(
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 2\n2 1 1\n2 2 2\n",
        )
        .unwrap();
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.to_dense(), vec![2.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn pattern_and_duplicates() {
        let a = read_matrix_market_str(
            "%%MatrixMarket matrix coordinate pattern general\n2 3 3\n1 3\n1 3\n2 1\n",
        )
        .unwrap();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.val, vec![2.0, 1.0]);
    }

    #[test]
    fn short_file_is_malformed() {
        let err = read_matrix_market_str(
            "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1\n2 2 1\n",
        )
        .unwrap_err();
        assert!(matches!(err, SparseError::Malformed { .. }));
    }

    #[test]
    fn out_of_range_entry() {
        let err = read_matrix_market_str(
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n",
        )
        .unwrap_err();
        assert!(matches!(err, SparseError::OutOfRange { .. }));
    }

    #[test]
    fn bad_header() {
        let err = read_matrix_market_str("%%MatrixMarket matrix array real general\n").unwrap_err();
        assert!(matches!(err, SparseError::Malformed { line: 1, .. }));
    }

    #[test]
    fn write_read_round_trip() {
        let a = CrsMatrix::random(9, 7, 0.3, 3);
        let mut buf = Vec::new();
        write_matrix_market_to(&a, &mut buf).unwrap();
        let b = read_matrix_market_from(buf.as_slice()).unwrap();
        assert_eq!(a, b);
    }
}
