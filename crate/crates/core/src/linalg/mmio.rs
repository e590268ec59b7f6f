//! Matrix Market (`.mtx`) reading and writing.
//!
//! Supported: `matrix coordinate real|integer general` (read into CSR storage)
//! and `matrix array real|integer general` (read into dense storage; the file
//! is column-major). Vectors are `array` files with a single column.
//! Values are written with 17 significant digits so a write/read round trip
//! is exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::RowMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

struct Lines<R> {
    inner: R,
    line_no: usize,
    buf: String,
}

impl<R: BufRead> Lines<R> {
    /// Next non-comment, non-blank line (trimmed), with its 1-based line number.
    fn next_data(&mut self) -> Result<Option<(usize, String)>> {
        loop {
            self.buf.clear();
            let read = self
                .inner
                .read_line(&mut self.buf)
                .map_err(|e| Error::Parse {
                    line: self.line_no + 1,
                    reason: e.to_string(),
                })?;
            if read == 0 {
                return Ok(None);
            }
            self.line_no += 1;
            let t = self.buf.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            return Ok(Some((self.line_no, t.to_string())));
        }
    }
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn parse_header(line: &str) -> Result<Layout> {
    let tokens: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(parse_err(
            1,
            "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'",
        ));
    }
    if tokens[1] != "matrix" {
        return Err(Error::UnsupportedFormat(format!("object '{}'", tokens[1])));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(Error::UnsupportedFormat(format!("layout '{other}'"))),
    };
    match tokens[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(Error::UnsupportedFormat(format!("field '{other}'"))),
    }
    if tokens[4] != "general" {
        return Err(Error::UnsupportedFormat(format!(
            "symmetry '{}'",
            tokens[4]
        )));
    }
    Ok(layout)
}

fn parse_usize(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what}")))
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    let v: f64 = tok
        .ok_or_else(|| parse_err(line, "missing value"))?
        .parse()
        .map_err(|_| parse_err(line, "invalid value"))?;
    if !v.is_finite() {
        return Err(parse_err(line, "non-finite value"));
    }
    Ok(v)
}

/// Raw parsed content before it is turned into a matrix or vector.
enum Parsed {
    Coordinate {
        rows: usize,
        cols: usize,
        entries: Vec<(usize, usize, f64)>,
    },
    /// Column-major values.
    Array {
        rows: usize,
        cols: usize,
        values: Vec<f64>,
    },
}

fn parse<R: BufRead>(reader: R) -> Result<Parsed> {
    let mut lines = Lines {
        inner: reader,
        line_no: 0,
        buf: String::new(),
    };
    let mut first = String::new();
    lines
        .inner
        .read_line(&mut first)
        .map_err(|e| parse_err(1, e.to_string()))?;
    lines.line_no = 1;
    let layout = parse_header(first.trim())?;

    let (size_line, size) = lines
        .next_data()?
        .ok_or_else(|| parse_err(lines.line_no, "missing size line"))?;
    let mut tok = size.split_whitespace();
    let rows = parse_usize(tok.next(), size_line, "row count")?;
    let cols = parse_usize(tok.next(), size_line, "column count")?;

    match layout {
        Layout::Coordinate => {
            let nnz = parse_usize(tok.next(), size_line, "entry count")?;
            let mut entries = Vec::with_capacity(nnz);
            for _ in 0..nnz {
                let (ln, text) = lines
                    .next_data()?
                    .ok_or_else(|| parse_err(lines.line_no, "unexpected end of file"))?;
                let mut t = text.split_whitespace();
                let i = parse_usize(t.next(), ln, "row index")?;
                let j = parse_usize(t.next(), ln, "column index")?;
                let v = parse_f64(t.next(), ln)?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(ln, format!("index ({i}, {j}) out of range")));
                }
                entries.push((i - 1, j - 1, v));
            }
            Ok(Parsed::Coordinate {
                rows,
                cols,
                entries,
            })
        }
        Layout::Array => {
            let mut values = Vec::with_capacity(rows * cols);
            while values.len() < rows * cols {
                let (ln, text) = lines
                    .next_data()?
                    .ok_or_else(|| parse_err(lines.line_no, "unexpected end of file"))?;
                for t in text.split_whitespace() {
                    values.push(parse_f64(Some(t), ln)?);
                }
            }
            if values.len() != rows * cols {
                return Err(parse_err(lines.line_no, "too many values"));
            }
            Ok(Parsed::Array { rows, cols, values })
        }
    }
}

pub fn read_matrix_from<R: BufRead>(reader: R) -> Result<RowMatrix> {
    match parse(reader)? {
        Parsed::Coordinate {
            rows,
            cols,
            entries,
        } => RowMatrix::from_triplets(rows, cols, entries),
        Parsed::Array { rows, cols, values } => {
            let mut data = vec![0.0; rows * cols];
            for j in 0..cols {
                for i in 0..rows {
                    data[i * cols + j] = values[j * rows + i];
                }
            }
            RowMatrix::from_dense(rows, cols, data)
        }
    }
}

pub fn read_vector_from<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    match parse(reader)? {
        Parsed::Array {
            cols: 1, values, ..
        } => Ok(values),
        Parsed::Coordinate {
            rows,
            cols: 1,
            entries,
            ..
        } => {
            let mut v = vec![0.0; rows];
            for (i, _, x) in entries {
                v[i] += x;
            }
            Ok(v)
        }
        _ => Err(Error::UnsupportedFormat(
            "vector files must have exactly one column".into(),
        )),
    }
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<RowMatrix> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrix_from(BufReader::new(f))
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_vector_from(BufReader::new(f))
}

/// Writes sparse matrices in coordinate layout and dense ones in array layout.
pub fn write_matrix_to<W: Write>(a: &RowMatrix, mut w: W) -> std::io::Result<()> {
    if a.is_sparse() {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", a.rows(), a.cols(), a.nnz())?;
        for i in 0..a.rows() {
            let mut res = Ok(());
            a.row(i).for_each(|j, v| {
                if res.is_ok() {
                    res = writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v);
                }
            });
            res?;
        }
    } else {
        writeln!(w, "%%MatrixMarket matrix array real general")?;
        writeln!(w, "{} {}", a.rows(), a.cols())?;
        for j in 0..a.cols() {
            for i in 0..a.rows() {
                writeln!(w, "{:.16e}", a.row(i).get(j))?;
            }
        }
    }
    w.flush()
}

pub fn write_vector_to<W: Write>(v: &[f64], mut w: W) -> std::io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} 1", v.len())?;
    for x in v {
        writeln!(w, "{x:.16e}")?;
    }
    w.flush()
}

pub fn write_matrix(a: &RowMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_matrix_to(a, BufWriter::new(f)).map_err(|e| Error::io(path, e))
}

pub fn write_vector(v: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_vector_to(v, BufWriter::new(f)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(a: &RowMatrix) -> RowMatrix {
        let mut buf = Vec::new();
        write_matrix_to(a, &mut buf).unwrap();
        read_matrix_from(buf.as_slice()).unwrap()
    }

    #[test]
    fn sparse_roundtrip_is_exact() {
        let a = RowMatrix::from_triplets(
            5,
            3,
            vec![
                (0, 0, 0.1),
                (1, 2, -1.0 / 3.0),
                (2, 1, 1e-100),
                (3, 0, 12345.678901234567),
                (4, 2, std::f64::consts::PI),
                (4, 0, -2.5e17),
            ],
        )
        .unwrap();
        assert_eq!(roundtrip(&a), a);
    }

    #[test]
    fn dense_roundtrip_is_exact() {
        let a = RowMatrix::from_dense(2, 3, vec![0.1, 0.2, 0.3, -1.0 / 7.0, 5.0, 1e-17]).unwrap();
        let b = roundtrip(&a);
        assert!(!b.is_sparse());
        assert_eq!(b, a);
    }

    #[test]
    fn coordinate_indices_are_one_based() {
        let text =
            "%%MatrixMarket matrix coordinate real general\n% comment\n2 3 2\n1 1 4.0\n2 3 -1\n";
        let a = read_matrix_from(text.as_bytes()).unwrap();
        assert_eq!(a.row(0).get(0), 4.0);
        assert_eq!(a.row(1).get(2), -1.0);
        assert!(a.is_sparse());
    }

    #[test]
    fn array_is_column_major() {
        let text = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n";
        let a = read_matrix_from(text.as_bytes()).unwrap();
        assert_eq!(a.to_dense(), vec![1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn malformed_header_is_line_one() {
        let err = read_matrix_from("%%NotMatrixMarket\n1 1 1\n1 1 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn unsupported_variants() {
        for header in [
            "%%MatrixMarket matrix coordinate complex general",
            "%%MatrixMarket matrix coordinate pattern general",
            "%%MatrixMarket matrix coordinate real symmetric",
        ] {
            let text = format!("{header}\n1 1 1\n1 1 1\n");
            assert!(matches!(
                read_matrix_from(text.as_bytes()),
                Err(Error::UnsupportedFormat(_))
            ));
        }
    }

    #[test]
    fn bad_entry_reports_its_line() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n3 1 2.0\n";
        assert!(matches!(
            read_matrix_from(text.as_bytes()),
            Err(Error::Parse { line: 4, .. })
        ));
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 abc\n";
        assert!(matches!(
            read_matrix_from(text.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n2 2 1\n";
        assert!(matches!(
            read_matrix_from(text.as_bytes()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn empty_row_in_file_is_rejected() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1.0\n";
        assert!(matches!(
            read_matrix_from(text.as_bytes()),
            Err(Error::ZeroRow(1))
        ));
    }

    #[test]
    fn vector_roundtrip() {
        let v = vec![1.0, -0.1, 1.0 / 3.0, 6.02214076e23];
        let mut buf = Vec::new();
        write_vector_to(&v, &mut buf).unwrap();
        assert_eq!(read_vector_from(buf.as_slice()).unwrap(), v);
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let a = RowMatrix::identity(4);
        let p = dir.path().join("eye.mtx");
        write_matrix(&a, &p).unwrap();
        assert_eq!(read_matrix(&p).unwrap(), a);
        assert!(matches!(
            read_matrix(dir.path().join("missing.mtx")),
            Err(Error::Io { .. })
        ));
    }
}
