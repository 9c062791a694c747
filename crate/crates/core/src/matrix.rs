//! Dense observation matrices and row/column index selections.
//!
//! Indices are 0-based throughout the library. Human-facing artifacts
//! (CSV/JSON written by the CLI) convert to 1-based at the boundary.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Dense `rows × cols` real matrix stored in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(domain(format!(
                "matrix must be nonempty, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(domain(format!(
                "expected {} values for a {rows}x{cols} matrix, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(domain(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, values })
    }

    /// Builds a matrix from nested rows; all rows must share one length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(domain(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, values)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn transpose(&self) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for i in 0..self.rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                values[j * self.rows + i] = v;
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            values,
        }
    }

    /// Returns `f` applied entrywise. Fails if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.rows,
            self.cols,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, &v) in sums.iter_mut().zip(self.row(i)) {
                *s += v;
            }
        }
        sums
    }

    /// Sums of each column restricted to `rows`, accumulated in the order given.
    pub fn col_sums_over(&self, rows: &[usize]) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for &i in rows {
            for (s, &v) in sums.iter_mut().zip(self.row(i)) {
                *s += v;
            }
        }
        sums
    }

    /// Sums of each row restricted to `cols`.
    pub fn row_sums_over(&self, cols: &[usize]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                cols.iter().map(|&j| row[j]).sum()
            })
            .collect()
    }

    /// Reads a headerless numeric CSV: one matrix row per line, comma separated.
    /// Blank lines are skipped.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut values = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let before = values.len();
            for field in trimmed.split(',') {
                let field = field.trim();
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("cannot parse {field:?} as a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: format!("non-finite value {field:?}"),
                    });
                }
                values.push(v);
            }
            let width = values.len() - before;
            match cols {
                None => cols = Some(width),
                Some(c) if c != width => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: format!("expected {c} fields, found {width}"),
                    })
                }
                Some(_) => {}
            }
            rows += 1;
        }
        let cols = cols.ok_or(Error::Parse {
            line: 0,
            message: "no data rows".into(),
        })?;
        Self::new(rows, cols, values)
    }

    /// Writes the matrix as headerless CSV using Rust's shortest round-trip
    /// float formatting, which does not depend on locale.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        let mut line = String::new();
        for i in 0..self.rows {
            line.clear();
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                write!(line, "{v}").expect("writing to a String cannot fail");
            }
            line.push('\n');
            writer.write_all(line.as_bytes())?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// A candidate submatrix: sorted, duplicate-free row and column index sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Selection {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl Selection {
    /// Both index lists must be nonempty and strictly increasing.
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        check_index_set("row", &rows)?;
        check_index_set("column", &cols)?;
        Ok(Self { rows, cols })
    }

    /// Sorts the index lists first; duplicates are still rejected.
    pub fn from_unsorted(mut rows: Vec<usize>, mut cols: Vec<usize>) -> Result<Self> {
        rows.sort_unstable();
        cols.sort_unstable();
        Self::new(rows, cols)
    }

    /// The leading block `{0..m} × {0..n}`, the planted location used by the generators.
    pub fn leading(m: usize, n: usize) -> Result<Self> {
        Self::new((0..m).collect(), (0..n).collect())
    }

    pub fn full(matrix: &DataMatrix) -> Self {
        Self {
            rows: (0..matrix.rows()).collect(),
            cols: (0..matrix.cols()).collect(),
        }
    }

    /// Converts 1-based index lists (as written by the CLI) to a selection.
    pub fn from_one_based(rows: &[usize], cols: &[usize]) -> Result<Self> {
        let shift = |v: &[usize], what: &str| -> Result<Vec<usize>> {
            v.iter()
                .map(|&k| {
                    k.checked_sub(1)
                        .ok_or_else(|| domain(format!("{what} index 0 in a 1-based list")))
                })
                .collect()
        };
        Self::from_unsorted(shift(rows, "row")?, shift(cols, "column")?)
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn rows_one_based(&self) -> Vec<usize> {
        self.rows.iter().map(|k| k + 1).collect()
    }

    pub fn cols_one_based(&self) -> Vec<usize> {
        self.cols.iter().map(|k| k + 1).collect()
    }

    pub fn transpose(&self) -> Self {
        Self {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
        }
    }

    pub fn fits(&self, rows: usize, cols: usize) -> bool {
        self.rows.last().is_some_and(|&r| r < rows) && self.cols.last().is_some_and(|&c| c < cols)
    }

    pub fn check_fits(&self, matrix: &DataMatrix) -> Result<()> {
        if self.fits(matrix.rows(), matrix.cols()) {
            Ok(())
        } else {
            Err(domain(format!(
                "selection exceeds the bounds of a {}x{} matrix",
                matrix.rows(),
                matrix.cols()
            )))
        }
    }

    /// Construction from already-validated sorted lists.
    pub(crate) fn from_sorted_unchecked(rows: Vec<usize>, cols: Vec<usize>) -> Self {
        debug_assert!(check_index_set("row", &rows).is_ok());
        debug_assert!(check_index_set("column", &cols).is_ok());
        Self { rows, cols }
    }
}

fn check_index_set(what: &str, idx: &[usize]) -> Result<()> {
    if idx.is_empty() {
        return Err(domain(format!("{what} set is empty")));
    }
    if idx.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain(format!(
            "{what} set must be strictly increasing and duplicate-free"
        )));
    }
    Ok(())
}
