//! Long-format result table and its CSV form.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::HarnessError;

pub const CSV_HEADER: &str = "trial,algorithm,index,metric,value";

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub trial: usize,
    pub algorithm: String,
    pub index: u64,
    pub metric: String,
    pub value: f64,
}

/// Rows ordered by `(algorithm, trial, index, metric)` with unique keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    rows: Vec<Row>,
}

impl ResultTable {
    /// Sorts the rows and rejects duplicate keys.
    pub fn from_rows(mut rows: Vec<Row>) -> Result<Self, HarnessError> {
        rows.sort_by(|a, b| {
            (&a.algorithm, a.trial, a.index, &a.metric).cmp(&(&b.algorithm, b.trial, b.index, &b.metric))
        });
        for w in rows.windows(2) {
            if (&w[0].algorithm, w[0].trial, w[0].index, &w[0].metric)
                == (&w[1].algorithm, w[1].trial, w[1].index, &w[1].metric)
            {
                return Err(HarnessError::Table(format!(
                    "duplicate key ({}, {}, {}, {})",
                    w[0].algorithm, w[0].trial, w[0].index, w[0].metric
                )));
            }
        }
        Ok(ResultTable { rows })
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn algorithms(&self) -> Vec<String> {
        let mut v: Vec<String> = self.rows.iter().map(|r| r.algorithm.clone()).collect();
        v.dedup();
        v
    }

    pub fn trials(&self, algorithm: &str) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .rows
            .iter()
            .filter(|r| r.algorithm == algorithm)
            .map(|r| r.trial)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// `trial -> [(index, value)]` for one algorithm and metric, by index.
    pub fn series(&self, algorithm: &str, metric: &str) -> BTreeMap<usize, Vec<(u64, f64)>> {
        let mut out: BTreeMap<usize, Vec<(u64, f64)>> = BTreeMap::new();
        for r in &self.rows {
            if r.algorithm == algorithm && r.metric == metric {
                out.entry(r.trial).or_default().push((r.index, r.value));
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{},{}", r.trial, r.algorithm, r.index, r.metric, format_value(r.value))?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self, HarnessError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .transpose()
            .map_err(HarnessError::Io)?
            .unwrap_or_default();
        if header.trim() != CSV_HEADER {
            return Err(HarnessError::Table(format!("unexpected header `{header}`")));
        }
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line.map_err(HarnessError::Io)?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = || HarnessError::Table(format!("malformed row {}: `{line}`", n + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad());
            }
            rows.push(Row {
                trial: f[0].parse().map_err(|_| bad())?,
                algorithm: f[1].to_string(),
                index: f[2].parse().map_err(|_| bad())?,
                metric: f[3].to_string(),
                value: f[4].parse().map_err(|_| bad())?,
            });
        }
        Self::from_rows(rows)
    }
}

/// 17 significant digits; parses back to the same `f64`.
pub fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}
