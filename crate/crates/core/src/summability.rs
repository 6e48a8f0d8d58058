//! Row-stochastic weight matrices and their transforms of scalar sequences.
//!
//! Rows and columns are 1-based. Row `n` of a matrix `P` maps a sequence `a`
//! to the weighted average `Σ_m p_{n,m} a_m`, summed naively in increasing
//! `m`. Only finite prefixes are ever stored, so a matrix never certifies a
//! limit; it reports transform values and a fixed decay heuristic.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::report::fmt_float;

#[derive(Debug, Clone, PartialEq)]
enum RowStore {
    Sparse(Vec<(usize, f64)>),
    /// Support `start..=end`; weight of `m` is `raw[m - 1] / total`.
    Window { start: usize, end: usize, total: f64 },
}

/// A finite prefix of a weight matrix `P = {p_{n,m}}`.
///
/// Rows built from a shared raw weight vector (the triangular and block
/// constructions) are stored as windows, so a 10⁴-row triangular matrix
/// costs `O(N)` memory.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    rows: Vec<RowStore>,
    raw: Vec<f64>,
}

impl WeightMatrix {
    /// Explicit sparse rows of `(m, weight)` entries. Entries must have
    /// strictly increasing 1-based columns and finite weights; sums and signs
    /// are left to [`validate_weights`].
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("weight matrix has no rows".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            let mut prev = 0usize;
            for &(m, w) in row {
                if m <= prev {
                    return Err(Error::InvalidInput(format!(
                        "row {}: columns must be 1-based and strictly increasing (saw {m} after {prev})",
                        i + 1
                    )));
                }
                if !w.is_finite() {
                    return Err(Error::InvalidInput(format!("row {}: weight at column {m} is not finite", i + 1)));
                }
                prev = m;
            }
        }
        Ok(Self {
            rows: rows.into_iter().map(RowStore::Sparse).collect(),
            raw: Vec::new(),
        })
    }

    /// Rows `p_{n,m} = raw_m / Σ_{j∈window_n} raw_j` over contiguous inclusive
    /// windows `(start, end)`.
    pub fn normalized_windows(raw: Vec<f64>, windows: &[(usize, usize)]) -> Result<Self> {
        if windows.is_empty() {
            return Err(Error::InvalidInput("weight matrix has no rows".into()));
        }
        let mut rows = Vec::with_capacity(windows.len());
        for &(start, end) in windows {
            if start == 0 || start > end || end > raw.len() {
                return Err(Error::InvalidInput(format!(
                    "window {start}..={end} is not inside 1..={}",
                    raw.len()
                )));
            }
            let total: f64 = raw[start - 1..end].iter().sum();
            if !(total > 0.0 && total.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "window {start}..={end} has non-positive total weight"
                )));
            }
            rows.push(RowStore::Window { start, end, total });
        }
        Ok(Self { rows, raw })
    }

    /// `p_{n,n} = 1`.
    pub fn identity(rows: usize) -> Result<Self> {
        Self::from_rows((1..=rows).map(|n| vec![(n, 1.0)]).collect())
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Row `n` (1-based).
    pub fn row(&self, n: usize) -> Result<Row<'_>> {
        if n == 0 || n > self.rows.len() {
            return Err(Error::InvalidInput(format!(
                "row {n} outside 1..={}",
                self.rows.len()
            )));
        }
        Ok(Row {
            store: &self.rows[n - 1],
            raw: &self.raw,
        })
    }

    pub fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        self.rows.iter().map(move |store| Row { store, raw: &self.raw })
    }

    /// Line-oriented text: header `rows=<n> tol=<t>`, then one row per line of
    /// space-separated `m:weight` entries.
    pub fn to_text(&self, tol: f64) -> String {
        let mut out = format!("rows={} tol={}\n", self.num_rows(), fmt_float(tol));
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|(m, w)| format!("{m}:{}", fmt_float(w))).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty weight file".into()))?;
        let mut declared = None;
        for token in header.split_whitespace() {
            match token.split_once('=') {
                Some(("rows", v)) => {
                    declared = Some(v.parse::<usize>().map_err(|_| {
                        Error::Parse(format!("header field rows: `{v}` is not an integer"))
                    })?)
                }
                Some(("tol", v)) => {
                    v.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("header field tol: `{v}` is not a number")))?;
                }
                _ => return Err(Error::Parse(format!("unexpected header token `{token}`"))),
            }
        }
        let declared = declared.ok_or_else(|| Error::Parse("header is missing rows=<n>".into()))?;
        let mut rows = Vec::with_capacity(declared);
        for (i, line) in lines.enumerate() {
            let mut row = Vec::new();
            for entry in line.split_whitespace() {
                let (m, w) = entry
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("row {}: entry `{entry}` is not m:weight", i + 1)))?;
                let m = m
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("row {}: bad column `{m}`", i + 1)))?;
                let w = w
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: bad weight `{w}`", i + 1)))?;
                row.push((m, w));
            }
            rows.push(row);
        }
        if rows.len() != declared {
            return Err(Error::Parse(format!(
                "header declares {declared} rows but {} were found",
                rows.len()
            )));
        }
        Self::from_rows(rows)
    }

    /// JSON array of rows, each an array of `[m, weight]` pairs.
    pub fn to_json_value(&self) -> Value {
        Value::Array(
            self.rows()
                .map(|row| {
                    Value::Array(
                        row.iter()
                            .map(|(m, w)| Value::Array(vec![Value::from(m), Value::from(w)]))
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    pub fn from_json_value(value: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("weight JSON: {what}"));
        let rows = value.as_array().ok_or_else(|| bad("expected an array of rows"))?;
        let mut out = Vec::with_capacity(rows.len());
        for row in rows {
            let entries = row.as_array().ok_or_else(|| bad("row is not an array"))?;
            let mut parsed = Vec::with_capacity(entries.len());
            for e in entries {
                let pair = e.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("entry is not [m, weight]"))?;
                let m = pair[0].as_u64().ok_or_else(|| bad("column is not a positive integer"))? as usize;
                let w = crate::report::json_f64(&pair[1]).ok_or_else(|| bad("weight is not a number"))?;
                parsed.push((m, w));
            }
            out.push(parsed);
        }
        Self::from_rows(out)
    }

    /// Accepts either the text format or the JSON format.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('[') {
            let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("weight JSON: {e}")))?;
            Self::from_json_value(&value)
        } else {
            Self::parse_text(text)
        }
    }
}

/// Borrowed view of one row.
#[derive(Debug, Clone, Copy)]
pub struct Row<'a> {
    store: &'a RowStore,
    raw: &'a [f64],
}

impl<'a> Row<'a> {
    /// `(m, p_{n,m})` in increasing `m`.
    pub fn iter(&self) -> RowIter<'a> {
        match self.store {
            RowStore::Sparse(entries) => RowIter::Sparse(entries.iter()),
            &RowStore::Window { start, end, total } => RowIter::Window {
                raw: self.raw,
                next: start,
                end,
                total,
            },
        }
    }

    pub fn support_len(&self) -> usize {
        match self.store {
            RowStore::Sparse(e) => e.len(),
            RowStore::Window { start, end, .. } => end - start + 1,
        }
    }

    /// Largest column index in the support, or `None` for an empty row.
    pub fn max_column(&self) -> Option<usize> {
        match self.store {
            RowStore::Sparse(e) => e.last().map(|&(m, _)| m),
            RowStore::Window { end, .. } => Some(*end),
        }
    }

    pub fn min_column(&self) -> Option<usize> {
        match self.store {
            RowStore::Sparse(e) => e.first().map(|&(m, _)| m),
            RowStore::Window { start, .. } => Some(*start),
        }
    }

    pub fn support(&self) -> Vec<usize> {
        self.iter().map(|(m, _)| m).collect()
    }

    /// Weight at column `m`, zero off the support.
    pub fn weight(&self, m: usize) -> f64 {
        match self.store {
            RowStore::Sparse(e) => e
                .binary_search_by_key(&m, |&(c, _)| c)
                .map(|i| e[i].1)
                .unwrap_or(0.0),
            &RowStore::Window { start, end, total } => {
                if (start..=end).contains(&m) {
                    self.raw[m - 1] / total
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sum(&self) -> f64 {
        self.iter().map(|(_, w)| w).sum()
    }
}

pub enum RowIter<'a> {
    Sparse(std::slice::Iter<'a, (usize, f64)>),
    Window {
        raw: &'a [f64],
        next: usize,
        end: usize,
        total: f64,
    },
}

impl Iterator for RowIter<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            RowIter::Sparse(it) => it.next().copied(),
            RowIter::Window { raw, next, end, total } => {
                if *next > *end {
                    return None;
                }
                let m = *next;
                *next += 1;
                Some((m, raw[m - 1] / *total))
            }
        }
    }
}

/// A finite prefix `a_1..a_N` of a real sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarSequence {
    values: Vec<f64>,
}

impl ScalarSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("scalar sequence horizon must be at least 1".into()));
        }
        Ok(Self { values })
    }

    /// `a_m = f(m)` for `m = 1..=horizon`.
    pub fn from_fn(horizon: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::new((1..=horizon).map(f).collect())
    }

    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    /// `a_m` (1-based).
    pub fn get(&self, m: usize) -> f64 {
        self.values[m - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn add(&self, other: &ScalarSequence) -> Result<ScalarSequence> {
        if self.horizon() != other.horizon() {
            return Err(Error::InvalidInput("sequence horizons differ".into()));
        }
        Self::new(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect())
    }

    /// One value per line, or a single comma-separated line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for token in text.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            values.push(
                token
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("sequence value `{token}` is not a number")))?,
            );
        }
        Self::new(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NegativeWeight,
    RowSum,
    ColumnNotNull,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub row: usize,
    /// Offending column, absent for row-sum violations.
    pub column: Option<usize>,
    pub kind: ViolationKind,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rows: usize,
    pub row_tol: f64,
    pub column_null_threshold: f64,
    pub row_sum_errors: Vec<f64>,
    pub max_row_sum_error: f64,
    /// First row of the trailing quarter used for the column-null check.
    pub late_rows_from: usize,
    pub max_late_column_weight: f64,
    pub violations: Vec<Violation>,
    pub pass: bool,
}

/// Checks nonnegativity, row sums `|Σ_m p_{n,m} − 1| ≤ row_tol`, and the
/// column-null surrogate: every weight in the last quarter of stored rows is
/// below `column_null_threshold`.
pub fn validate_weights(w: &WeightMatrix, row_tol: f64, column_null_threshold: f64) -> Result<ValidationReport> {
    let rows = w.num_rows();
    if rows == 0 {
        return Err(Error::InvalidInput("weight matrix has no rows".into()));
    }
    let late_rows_from = rows - (rows / 4).max(1) + 1;

    let per_row: Vec<(f64, f64, Vec<Violation>)> = (1..=rows)
        .into_par_iter()
        .map(|n| {
            let row = w.row(n).expect("row index in range");
            let mut violations = Vec::new();
            let mut sum = 0.0;
            let mut late_max = 0.0f64;
            for (m, p) in row.iter() {
                sum += p;
                if p < 0.0 {
                    violations.push(Violation { row: n, column: Some(m), kind: ViolationKind::NegativeWeight, value: p });
                }
                if n >= late_rows_from {
                    late_max = late_max.max(p);
                    if p >= column_null_threshold {
                        violations.push(Violation { row: n, column: Some(m), kind: ViolationKind::ColumnNotNull, value: p });
                    }
                }
            }
            let err = (sum - 1.0).abs();
            if !(err <= row_tol) {
                violations.insert(0, Violation { row: n, column: None, kind: ViolationKind::RowSum, value: sum });
            }
            (err, late_max, violations)
        })
        .collect();

    let mut row_sum_errors = Vec::with_capacity(rows);
    let mut max_late_column_weight = 0.0f64;
    let mut violations = Vec::new();
    for (err, late, v) in per_row {
        row_sum_errors.push(err);
        max_late_column_weight = max_late_column_weight.max(late);
        violations.extend(v);
    }
    let max_row_sum_error = row_sum_errors.iter().copied().fold(0.0, f64::max);
    Ok(ValidationReport {
        rows,
        row_tol,
        column_null_threshold,
        row_sum_errors,
        max_row_sum_error,
        late_rows_from,
        max_late_column_weight,
        pass: violations.is_empty(),
        violations,
    })
}

/// `Σ_{m∈supp(n)} p_{n,m} a_m`, summed in increasing `m`.
pub fn p_transform(w: &WeightMatrix, a: &ScalarSequence, n: usize) -> Result<f64> {
    let row = w.row(n)?;
    if let Some(max) = row.max_column() {
        if max > a.horizon() {
            let column = row.support().into_iter().find(|&m| m > a.horizon()).unwrap_or(max);
            return Err(Error::OutOfRange { row: n, column, horizon: a.horizon() });
        }
    }
    Ok(row.iter().map(|(m, p)| p * a.get(m)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Decaying,
    NotDecaying,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendReport {
    pub values: Vec<f64>,
    pub mid_row: usize,
    pub mid_value: f64,
    pub last_value: f64,
    pub peak_value: f64,
    pub threshold: f64,
    pub decision: Trend,
}

/// Transform values at every row plus a decay verdict.
///
/// The verdict is `decaying` when the last value is no larger than the value
/// at the row nearest half the horizon, is below half the largest value seen,
/// and is below `threshold`.
pub fn p_limit_trend(w: &WeightMatrix, a: &ScalarSequence, threshold: f64) -> Result<TrendReport> {
    let rows = w.num_rows();
    if rows < 4 {
        return Err(Error::InsufficientData(format!("trend needs at least 4 rows, got {rows}")));
    }
    let values = (1..=rows)
        .into_par_iter()
        .map(|n| p_transform(w, a, n))
        .collect::<Result<Vec<f64>>>()?;
    let mid_row = rows.div_ceil(2);
    let mid_value = values[mid_row - 1];
    let last_value = values[rows - 1];
    let peak_value = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let decaying = last_value <= mid_value && last_value < 0.5 * peak_value && last_value < threshold;
    Ok(TrendReport {
        values,
        mid_row,
        mid_value,
        last_value,
        peak_value,
        threshold,
        decision: if decaying { Trend::Decaying } else { Trend::NotDecaying },
    })
}

/// Smallest `a_m` over the support of row `n` (ties go to the smallest `m`).
/// Requires `a ≥ 0` on the support; the value never exceeds the row average.
pub fn min_on_support(w: &WeightMatrix, a: &ScalarSequence, n: usize) -> Result<(usize, f64)> {
    let row = w.row(n)?;
    let mut best: Option<(usize, f64)> = None;
    for (m, _) in row.iter() {
        if m > a.horizon() {
            return Err(Error::OutOfRange { row: n, column: m, horizon: a.horizon() });
        }
        let v = a.get(m);
        if v < 0.0 {
            return Err(Error::Precondition(format!("a_{m} = {v} is negative on the support of row {n}")));
        }
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((m, v));
        }
    }
    best.ok_or_else(|| Error::Precondition(format!("row {n} has empty support")))
}
