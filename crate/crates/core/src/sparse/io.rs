//! Matrix Market coordinate files and plain-text vectors.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::SparseMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let file = File::open(path)?;
    MatrixMarketReader::new(BufReader::new(file)).read()
}

pub fn write_matrix_market(a: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market_to(a, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Writes `a` in coordinate format. Symmetric matrices store the lower triangle.
pub fn write_matrix_market_to(a: &SparseMatrix, w: &mut impl Write) -> Result<()> {
    let symmetric = a.is_symmetric();
    let kind = if symmetric { "symmetric" } else { "general" };
    writeln!(w, "%%MatrixMarket matrix coordinate real {kind}")?;
    let entries: Vec<(usize, usize, f64)> = a
        .triplets()
        .filter(|&(i, j, _)| !symmetric || i >= j)
        .collect();
    writeln!(w, "{} {} {}", a.n_rows(), a.n_cols(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Streaming parser over any buffered source.
pub struct MatrixMarketReader<R> {
    inner: R,
    line_no: usize,
}

impl<R: BufRead> MatrixMarketReader<R> {
    pub fn new(inner: R) -> Self {
        MatrixMarketReader { inner, line_no: 0 }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::MatrixMarket {
            line: self.line_no,
            message: message.into(),
        }
    }

    fn next_line(&mut self) -> Result<Option<String>> {
        let mut buf = String::new();
        if self.inner.read_line(&mut buf)? == 0 {
            return Ok(None);
        }
        self.line_no += 1;
        Ok(Some(buf))
    }

    fn parse_header(&mut self) -> Result<Symmetry> {
        let header = self.next_line()?.ok_or_else(|| self.err("empty file"))?;
        let tokens: Vec<String> = header
            .split_whitespace()
            .map(|t| t.to_ascii_lowercase())
            .collect();
        if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
            return Err(self.err(format!("malformed header {:?}", header.trim_end())));
        }
        if tokens[2] != "coordinate" {
            return Err(self.err(format!("unsupported format '{}'", tokens[2])));
        }
        match tokens[3].as_str() {
            "real" | "integer" => {}
            other => return Err(self.err(format!("unsupported field '{other}'"))),
        }
        match tokens[4].as_str() {
            "general" => Ok(Symmetry::General),
            "symmetric" => Ok(Symmetry::Symmetric),
            other => Err(self.err(format!("unsupported symmetry '{other}'"))),
        }
    }

    fn next_data_line(&mut self) -> Result<Option<String>> {
        while let Some(line) = self.next_line()? {
            let t = line.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            return Ok(Some(t.to_string()));
        }
        Ok(None)
    }

    fn parse_usize(&self, tok: Option<&str>, what: &str) -> Result<usize> {
        tok.ok_or_else(|| self.err(format!("missing {what}")))?
            .parse()
            .map_err(|_| self.err(format!("invalid {what}")))
    }

    pub fn read(mut self) -> Result<SparseMatrix> {
        let symmetry = self.parse_header()?;
        let size = self
            .next_data_line()?
            .ok_or_else(|| self.err("missing size line"))?;
        let mut it = size.split_whitespace();
        let n_rows = self.parse_usize(it.next(), "row count")?;
        let n_cols = self.parse_usize(it.next(), "column count")?;
        let nnz = self.parse_usize(it.next(), "entry count")?;
        if symmetry == Symmetry::Symmetric && n_rows != n_cols {
            return Err(self.err("symmetric matrix must be square"));
        }

        let mut triplets = Vec::with_capacity(nnz * 2);
        for _ in 0..nnz {
            let line = self
                .next_data_line()?
                .ok_or_else(|| self.err(format!("expected {nnz} entries")))?;
            let mut it = line.split_whitespace();
            let i = self.parse_usize(it.next(), "row index")?;
            let j = self.parse_usize(it.next(), "column index")?;
            let v: f64 = it
                .next()
                .ok_or_else(|| self.err("missing value"))?
                .parse()
                .map_err(|_| self.err("invalid value"))?;
            if i == 0 || j == 0 || i > n_rows || j > n_cols {
                return Err(self.err(format!(
                    "index ({i}, {j}) outside a {n_rows}x{n_cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(self.err("non-finite value"));
            }
            triplets.push((i - 1, j - 1, v));
            if symmetry == Symmetry::Symmetric && i != j {
                triplets.push((j - 1, i - 1, v));
            }
        }
        if self.next_data_line()?.is_some() {
            return Err(self.err(format!("more than {nnz} entries")));
        }
        SparseMatrix::from_triplets(n_rows, n_cols, triplets)
    }
}

/// Reads one number per line; blank lines and `#` comments are skipped.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_vector(BufReader::new(File::open(path)?))
}

pub fn parse_vector(reader: impl BufRead) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| Error::VectorFile {
            line: k + 1,
            message: format!("invalid number {t:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::VectorFile {
                line: k + 1,
                message: "non-finite value".into(),
            });
        }
        out.push(v);
    }
    Ok(out)
}

/// One value per line with 17 significant digits, enough to round-trip any `f64`.
pub fn write_vector(v: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for x in v {
        writeln!(w, "{x:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::lap1d;

    fn parse(text: &str) -> Result<SparseMatrix> {
        MatrixMarketReader::new(text.as_bytes()).read()
    }

    #[test]
    fn round_trip_lap1d() {
        let a = lap1d(3).unwrap();
        let mut buf = Vec::new();
        write_matrix_market_to(&a, &mut buf).unwrap();
        assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap(), a);
    }

    #[test]
    fn symmetric_lower_triangle_expands() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n\
                    % comment\n\
                    3 3 5\n1 1 2\n2 1 -1\n2 2 2\n3 2 -1\n3 3 2\n";
        assert_eq!(parse(text).unwrap(), lap1d(3).unwrap());
    }

    #[test]
    fn one_based_indices() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n2 1 5.5\n";
        let m = parse(text).unwrap();
        assert_eq!(m.get(1, 0), 5.5);
        assert_eq!(m.nnz(), 1);
    }

    #[test]
    fn duplicates_are_summed() {
        let text = "%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1\n1 1 2\n";
        assert_eq!(parse(text).unwrap().get(0, 0), 3.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let bad = [
            "garbage\n1 1 1\n1 1 1\n",
            "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n",
            "%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n",
            "%%MatrixMarket matrix array real general\n1 1\n1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 x\n",
        ];
        for text in bad {
            assert!(
                matches!(parse(text), Err(Error::MatrixMarket { .. })),
                "accepted {text:?}"
            );
        }
    }

    #[test]
    fn vector_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.txt");
        let v = vec![1.0 / 3.0, -2.5e-300, 6.0, std::f64::consts::PI];
        write_vector(&v, &path).unwrap();
        assert_eq!(read_vector(&path).unwrap(), v);
    }

    #[test]
    fn vector_parse_errors() {
        assert!(parse_vector("1\nfoo\n".as_bytes()).is_err());
        assert_eq!(
            parse_vector("# header\n1\n\n2\n".as_bytes()).unwrap(),
            vec![1.0, 2.0]
        );
    }
}
