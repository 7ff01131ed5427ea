//! Matrix Market reader and writer (real matrices, coordinate or array layout).

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let file = File::open(path.as_ref())?;
    parse_matrix_market(BufReader::new(file))
}

pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<SparseMatrix> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "missing %%MatrixMarket matrix header"));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(1, format!("unsupported layout `{other}`"))),
    };
    match tokens[3].as_str() {
        "real" | "integer" => {}
        other => return Err(parse_err(1, format!("unsupported field `{other}`"))),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry `{other}`"))),
    };

    let mut data = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        data.push((idx + 1, trimmed.to_string()));
    }
    let mut data = data.into_iter();
    let (size_line, size) = data.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| parse_err(size_line, e.to_string())))
        .collect::<Result<_>>()?;

    let mut entries = Vec::new();
    let push = |r: usize, c: usize, v: f64, entries: &mut Vec<(usize, usize, f64)>| {
        entries.push((r, c, v));
        if r != c {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => entries.push((c, r, v)),
                Symmetry::SkewSymmetric => entries.push((c, r, -v)),
            }
        }
    };

    let (nrows, ncols) = match layout {
        Layout::Coordinate => {
            if dims.len() != 3 {
                return Err(parse_err(size_line, "coordinate size line needs rows, cols, nnz"));
            }
            let (nrows, ncols, nnz) = (dims[0], dims[1], dims[2]);
            let mut count = 0;
            for (ln, text) in data {
                let mut it = text.split_whitespace();
                let mut next = || it.next().ok_or_else(|| parse_err(ln, "truncated entry"));
                let r: usize = next()?.parse().map_err(|_| parse_err(ln, "bad row index"))?;
                let c: usize = next()?.parse().map_err(|_| parse_err(ln, "bad column index"))?;
                let v: f64 = next()?.parse().map_err(|_| parse_err(ln, "bad value"))?;
                if r == 0 || c == 0 || r > nrows || c > ncols {
                    return Err(parse_err(ln, format!("index ({r}, {c}) out of bounds")));
                }
                push(r - 1, c - 1, v, &mut entries);
                count += 1;
            }
            if count != nnz {
                return Err(parse_err(size_line, format!("expected {nnz} entries, found {count}")));
            }
            (nrows, ncols)
        }
        Layout::Array => {
            if dims.len() != 2 {
                return Err(parse_err(size_line, "array size line needs rows, cols"));
            }
            let (nrows, ncols) = (dims[0], dims[1]);
            // column-major; symmetric storage lists the lower triangle only
            let mut positions = Vec::new();
            for j in 0..ncols {
                let start = if symmetry == Symmetry::General { 0 } else { j };
                for i in start..nrows {
                    if symmetry == Symmetry::SkewSymmetric && i == j {
                        continue;
                    }
                    positions.push((i, j));
                }
            }
            let mut k = 0;
            for (ln, text) in data {
                for tok in text.split_whitespace() {
                    let v: f64 = tok.parse().map_err(|_| parse_err(ln, "bad value"))?;
                    let &(i, j) = positions.get(k).ok_or_else(|| parse_err(ln, "too many values"))?;
                    if v != 0.0 {
                        push(i, j, v, &mut entries);
                    }
                    k += 1;
                }
            }
            if k != positions.len() {
                return Err(parse_err(size_line, format!("expected {} values, found {k}", positions.len())));
            }
            (nrows, ncols)
        }
    };
    SparseMatrix::from_triplets(nrows, ncols, &entries)
}

/// Writes coordinate/real/general with 17 significant digits, enough to
/// reload every finite double exactly.
pub fn write_matrix_market(m: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    format_matrix_market(m, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn format_matrix_market<W: Write>(m: &SparseMatrix, w: &mut W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.nrows(), m.ncols(), m.nnz())?;
    for (i, j, v) in m.triplets() {
        writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<SparseMatrix> {
        parse_matrix_market(s.as_bytes())
    }

    #[test]
    fn identity_coordinate() {
        let m = parse("%%MatrixMarket matrix coordinate real general\n% comment\n3 3 3\n1 1 1\n2 2 1\n3 3 1\n").unwrap();
        assert_eq!(m, SparseMatrix::identity(3));
    }

    #[test]
    fn symmetric_expansion() {
        let m = parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 2\n2 1 -1\n2 2 2\n").unwrap();
        assert_eq!(m.to_dense().values(), &[2.0, -1.0, -1.0, 2.0]);
        let a = parse("%%MatrixMarket matrix array real symmetric\n2 2\n2\n-1\n2\n").unwrap();
        assert_eq!(a, m);
    }

    #[test]
    fn array_general_is_column_major() {
        let m = parse("%%MatrixMarket matrix array real general\n2 2\n1\n3\n2\n4\n").unwrap();
        assert_eq!(m.to_dense().values(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse("").is_err());
        assert!(parse("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n").is_err());
        assert!(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n").is_err());
        assert!(parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n").is_err());
        assert!(parse("hello\n").is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let m = SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0 / 3.0), (1, 2, -2.0f64.sqrt()), (0, 2, 1e-300)]).unwrap();
        let mut buf = Vec::new();
        format_matrix_market(&m, &mut buf).unwrap();
        let back = parse_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }
}
