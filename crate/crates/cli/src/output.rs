use std::fmt::Write as _;

use dephaser_core::NonMarkovResult;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::Format;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A table of samples. The leading time columns (`t`, `t2`, or `t1, t2`)
/// are non-decreasing in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesOutput {
    pub command: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SeriesOutput {
    pub fn new(command: &str, columns: &[&str], rows: Vec<Vec<f64>>) -> Result<Self, CliError> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(CliError::Config(format!("row {i} has {} values for {} columns", row.len(), columns.len())));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(CliError::Config(format!("non-finite value {v} in row {i} of `{command}` output")));
            }
        }
        let time_columns = columns.iter().take_while(|c| matches!(**c, "t" | "t1" | "t2")).count();
        for (i, pair) in rows.windows(2).enumerate() {
            if pair[1][..time_columns] < pair[0][..time_columns] {
                return Err(CliError::Config(format!("time columns decrease at row {}", i + 1)));
            }
        }
        // −0.0 + 0.0 = +0.0: no signed zeros in the output
        let rows = rows.into_iter().map(|r| r.into_iter().map(|v| v + 0.0).collect()).collect();
        Ok(SeriesOutput {
            command: command.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// Header plus one line per row, 17 significant digits, LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{v:.16e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "columns": self.columns,
            "rows": self.rows,
        })
        .to_string();
        out.push('\n');
        out
    }

    /// Parses the CSV written by [`to_csv`](Self::to_csv).
    pub fn from_csv(command: &str, text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| CliError::Config("empty CSV".into()))?;
        let columns: Vec<&str> = header.split(',').collect();
        let rows = lines
            .map(|l| {
                l.split(',')
                    .map(|v| v.parse::<f64>().map_err(|e| CliError::Config(format!("bad CSV value `{v}`: {e}"))))
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        Self::new(command, &columns, rows)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Series(SeriesOutput),
    Measure(NonMarkovResult),
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match (self, format) {
            (Report::Series(s), f) => s.render(f),
            (Report::Measure(r), Format::Json) => {
                let mut value = serde_json::to_value(r).expect("measure report serialises");
                let obj = value.as_object_mut().expect("report is an object");
                obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
                obj.insert("command".into(), json!("measure"));
                let mut out = value.to_string();
                out.push('\n');
                out
            }
            (Report::Measure(r), Format::Csv) => {
                let mut out = String::from("t_start,t_end,delta_d\n");
                for iv in &r.growth_intervals {
                    writeln!(out, "{:.16e},{:.16e},{:.16e}", iv.t_start, iv.t_end, iv.delta_d).unwrap();
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_lossless() {
        let rows = vec![vec![0.0, 1.0 / 3.0, -2.5e-300], vec![0.1, std::f64::consts::PI, 1e300]];
        let s = SeriesOutput::new("x", &["t", "a", "b"], rows).unwrap();
        let back = SeriesOutput::from_csv("x", &s.to_csv()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn non_finite_values_rejected() {
        assert!(SeriesOutput::new("x", &["t"], vec![vec![f64::NAN]]).is_err());
        assert!(SeriesOutput::new("x", &["t", "a"], vec![vec![0.0]]).is_err());
        assert!(SeriesOutput::new("x", &["t1", "t2"], vec![vec![1.0, 0.0], vec![0.0, 5.0]]).is_err());
        assert!(SeriesOutput::new("x", &["t1", "t2"], vec![vec![0.0, 5.0], vec![1.0, 0.0]]).is_ok());
    }

    #[test]
    fn csv_layout() {
        let s = SeriesOutput::new("x", &["t", "a"], vec![vec![0.0, 1.0]]).unwrap();
        assert_eq!(s.to_csv(), "t,a\n0.0000000000000000e0,1.0000000000000000e0\n");
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(v["schema_version"], 1);
    }
}
