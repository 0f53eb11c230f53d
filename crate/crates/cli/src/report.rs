//! Report tables and their CSV / JSON encodings.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::Result;

pub const SCHEMA: u32 = 1;

/// One grid point. `x` is in the declared unit; rates are normalized by γ.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ReportRow {
    pub x: f64,
    pub re_eps_t: Option<f64>,
    pub im_eps_t: Option<f64>,
    pub t: Option<f64>,
    pub r: Option<f64>,
    pub gamma_tau: Option<f64>,
    pub gamma_k: Option<f64>,
    pub out_l_power: Option<f64>,
    pub out_r_power: Option<f64>,
}

pub const ROW_COLUMNS: [&str; 9] = [
    "x",
    "re_eps_t",
    "im_eps_t",
    "T",
    "R",
    "gamma_tau",
    "gamma_K",
    "out_l_power",
    "out_r_power",
];

impl ReportRow {
    fn fields(&self) -> [Option<f64>; 9] {
        [
            Some(self.x),
            self.re_eps_t,
            self.im_eps_t,
            self.t,
            self.r,
            self.gamma_tau,
            self.gamma_k,
            self.out_l_power,
            self.out_r_power,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Rows(Vec<ReportRow>),
    /// Figure data: rows tagged with the curve they belong to.
    Series(Vec<(String, ReportRow)>),
    /// Named scalar results.
    Summary(Vec<(String, f64)>),
}

/// Shortest round-trip text for a float, in exponent form only when the
/// plain form would be long.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

impl Report {
    pub fn header(&self) -> Vec<&'static str> {
        match self {
            Report::Rows(_) => ROW_COLUMNS.to_vec(),
            Report::Series(_) => std::iter::once("series").chain(ROW_COLUMNS).collect(),
            Report::Summary(_) => vec!["quantity", "value"],
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| std::io::Error::other(e);
        w.write_record(self.header()).map_err(io)?;
        match self {
            Report::Rows(rows) => {
                for r in rows {
                    w.write_record(r.fields().map(cell)).map_err(io)?;
                }
            }
            Report::Series(rows) => {
                for (s, r) in rows {
                    let rec = std::iter::once(s.clone()).chain(r.fields().map(cell));
                    w.write_record(rec).map_err(io)?;
                }
            }
            Report::Summary(items) => {
                for (k, v) in items {
                    w.write_record([k.clone(), format_number(*v)]).map_err(io)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    fn rows_json(&self) -> Vec<Value> {
        let row = |series: Option<&str>, r: &ReportRow| {
            let mut m = Map::new();
            if let Some(s) = series {
                m.insert("series".into(), json!(s));
            }
            for (k, v) in ROW_COLUMNS.iter().zip(r.fields()) {
                m.insert((*k).into(), json!(v));
            }
            Value::Object(m)
        };
        match self {
            Report::Rows(rows) => rows.iter().map(|r| row(None, r)).collect(),
            Report::Series(rows) => rows.iter().map(|(s, r)| row(Some(s), r)).collect(),
            Report::Summary(items) => items
                .iter()
                .map(|(k, v)| json!({"quantity": k, "value": v}))
                .collect(),
        }
    }

    pub fn write_json<W: Write>(&self, config: &RunConfig, mut out: W) -> Result<()> {
        let doc = json!({
            "schema": SCHEMA,
            "config": config,
            "rows": self.rows_json(),
        });
        serde_json::to_writer_pretty(&mut out, &doc).map_err(std::io::Error::other)?;
        writeln!(out)?;
        Ok(())
    }
}
