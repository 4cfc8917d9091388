//! Text matrix and mask files.
//!
//! A matrix file starts with `MTX <rows> <cols> <real|complex>` followed by
//! one line per row of space-separated entries. Reals are written in the
//! shortest form that parses back to the same double; complex entries are
//! `re:im`. A mask file starts with `MSK <rows> <cols> <count> <seed>`
//! followed by one `i j` line per sampled entry, 0-based, sorted.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use eseem_mc_core::linalg::Scalar;
use eseem_mc_core::sampling::SampleMask;
use eseem_mc_core::DenseMatrix;
use num_complex::Complex64;

use crate::error::{CliError, CliResult};

/// Entry types that have a matrix-file encoding.
pub trait MtxEntry: Scalar {
    const TAG: &'static str;
    fn encode(&self, out: &mut String);
    fn decode(token: &str) -> Option<Self>;
}

impl MtxEntry for f64 {
    const TAG: &'static str = "real";

    fn encode(&self, out: &mut String) {
        out.push_str(&format!("{self:?}"));
    }

    fn decode(token: &str) -> Option<Self> {
        token.parse().ok()
    }
}

impl MtxEntry for Complex64 {
    const TAG: &'static str = "complex";

    fn encode(&self, out: &mut String) {
        out.push_str(&format!("{:?}:{:?}", self.re, self.im));
    }

    fn decode(token: &str) -> Option<Self> {
        let (re, im) = token.split_once(':')?;
        Some(Complex64::new(re.parse().ok()?, im.parse().ok()?))
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

pub fn format_matrix<T: MtxEntry>(m: &DenseMatrix<T>) -> String {
    let mut out = format!("MTX {} {} {}\n", m.rows(), m.cols(), T::TAG);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                out.push(' ');
            }
            m[(i, j)].encode(&mut out);
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix<T: MtxEntry>(path: &Path, m: &DenseMatrix<T>) -> CliResult<()> {
    let mut w = create(path)?;
    w.write_all(format_matrix(m).as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

/// Reads lines, reporting 1-based line numbers.
struct Lines<'a> {
    path: &'a Path,
    inner: std::io::Lines<BufReader<File>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(path: &'a Path) -> CliResult<Self> {
        Ok(Self {
            path,
            inner: open(path)?.lines(),
            line: 0,
        })
    }

    fn error(&self, message: impl Into<String>) -> CliError {
        CliError::Format {
            path: self.path.to_path_buf(),
            line: self.line,
            message: message.into(),
        }
    }

    fn next_line(&mut self) -> CliResult<Option<String>> {
        match self.inner.next() {
            None => Ok(None),
            Some(r) => {
                self.line += 1;
                r.map(Some).map_err(|e| CliError::io(self.path, e))
            }
        }
    }

    fn expect_line(&mut self, what: &str) -> CliResult<String> {
        self.next_line()?.ok_or_else(|| {
            self.line += 1;
            self.error(format!("unexpected end of file, expected {what}"))
        })
    }

    fn expect_end(&mut self) -> CliResult<()> {
        while let Some(l) = self.next_line()? {
            if !l.trim().is_empty() {
                return Err(self.error("trailing content"));
            }
        }
        Ok(())
    }

    fn header(&mut self, tag: &str, fields: usize) -> CliResult<Vec<String>> {
        let l = self.expect_line("a header")?;
        let tokens: Vec<String> = l.split_whitespace().map(String::from).collect();
        if tokens.first().map(String::as_str) != Some(tag) || tokens.len() != fields + 1 {
            return Err(self.error(format!("expected a `{tag}` header with {fields} fields")));
        }
        Ok(tokens[1..].to_vec())
    }

    fn number<N: std::str::FromStr>(&self, token: &str, what: &str) -> CliResult<N> {
        token.parse().map_err(|_| self.error(format!("invalid {what} `{token}`")))
    }
}

pub fn read_matrix<T: MtxEntry>(path: &Path) -> CliResult<DenseMatrix<T>> {
    let mut lines = Lines::new(path)?;
    let header = lines.header("MTX", 3)?;
    let rows: usize = lines.number(&header[0], "row count")?;
    let cols: usize = lines.number(&header[1], "column count")?;
    if header[2] != T::TAG {
        return Err(lines.error(format!("expected a {} matrix, found `{}`", T::TAG, header[2])));
    }
    let mut data = Vec::with_capacity(rows.saturating_mul(cols).min(1 << 24));
    for _ in 0..rows {
        let l = lines.expect_line("a matrix row")?;
        let before = data.len();
        for token in l.split_whitespace() {
            data.push(T::decode(token).ok_or_else(|| lines.error(format!("invalid entry `{token}`")))?);
        }
        if data.len() - before != cols {
            return Err(lines.error(format!("expected {cols} entries, found {}", data.len() - before)));
        }
    }
    lines.expect_end()?;
    DenseMatrix::new(rows, cols, data).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        line: 1,
        message: e.to_string(),
    })
}

pub fn format_mask(mask: &SampleMask) -> String {
    let mut out = format!("MSK {} {} {} {}\n", mask.rows(), mask.cols(), mask.len(), mask.seed());
    for &(i, j) in mask.indices() {
        out.push_str(&format!("{i} {j}\n"));
    }
    out
}

pub fn write_mask(path: &Path, mask: &SampleMask) -> CliResult<()> {
    let mut w = create(path)?;
    w.write_all(format_mask(mask).as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

pub fn read_mask(path: &Path) -> CliResult<SampleMask> {
    let mut lines = Lines::new(path)?;
    let header = lines.header("MSK", 4)?;
    let rows: usize = lines.number(&header[0], "row count")?;
    let cols: usize = lines.number(&header[1], "column count")?;
    let count: usize = lines.number(&header[2], "entry count")?;
    let seed: u64 = lines.number(&header[3], "seed")?;
    let mut indices = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        let l = lines.expect_line("an index pair")?;
        let mut it = l.split_whitespace();
        let (Some(i), Some(j), None) = (it.next(), it.next(), it.next()) else {
            return Err(lines.error("expected `i j`"));
        };
        let pair = (lines.number(i, "row index")?, lines.number(j, "column index")?);
        if indices.last().is_some_and(|last| *last >= pair) {
            return Err(lines.error("indices must be strictly increasing"));
        }
        indices.push(pair);
    }
    lines.expect_end()?;
    SampleMask::from_indices(rows, cols, indices, seed).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        line: 1,
        message: e.to_string(),
    })
}
