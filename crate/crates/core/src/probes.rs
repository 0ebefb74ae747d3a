//! Time series of probe temperatures.
//!
//! CSV layout: header `time_s,<name>,...`, one row per sample, values in
//! degC written with full round-trip precision. Inactive samples are `NaN`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries {
    names: Vec<String>,
    times: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl ProbeSeries {
    pub fn new(names: Vec<String>) -> Self {
        Self {
            names,
            times: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, time: f64, values: Vec<f64>) {
        assert_eq!(values.len(), self.names.len(), "one value per probe");
        self.times.push(time);
        self.rows.push(values);
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn channel(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.index_of(name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Restrict to the named channels, in the given order.
    pub fn select(&self, names: &[String]) -> Result<ProbeSeries> {
        let idx = names
            .iter()
            .map(|n| {
                self.index_of(n)
                    .ok_or_else(|| Error::Metrics(format!("probe '{n}' not found")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProbeSeries {
            names: names.to_vec(),
            times: self.times.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| idx.iter().map(|&j| r[j]).collect())
                .collect(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("time_s");
        for n in &self.names {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for (t, r) in self.times.iter().zip(&self.rows) {
            write!(s, "{t:?}").unwrap();
            for v in r {
                write!(s, ",{v:?}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Metrics("empty probe file".into()))?;
        let mut cols = header.split(',').map(|c| c.trim().to_string());
        if cols.next().as_deref() != Some("time_s") {
            return Err(Error::Metrics(
                "probe file must start with a time_s column".into(),
            ));
        }
        let mut series = ProbeSeries::new(cols.collect());
        for (i, line) in lines.enumerate() {
            let vals = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Metrics(format!("line {}: {e}", i + 2)))?;
            if vals.len() != series.names.len() + 1 {
                return Err(Error::Metrics(format!(
                    "line {}: expected {} columns, found {}",
                    i + 2,
                    series.names.len() + 1,
                    vals.len()
                )));
            }
            series.push(vals[0], vals[1..].to_vec());
        }
        Ok(series)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}
