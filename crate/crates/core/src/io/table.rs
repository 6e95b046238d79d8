//! Result tables and their CSV form.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::files::write_text;
use super::sha256_hex;
use crate::error::{QptError, Result};
use crate::metrics::{summarize, w1_distance, DistributionSummary, XiWindow};

/// One per-gate fidelity, or a summary statistic when `gate_label` starts
/// with `summary:`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityRow {
    pub method: String,
    pub gate_label: String,
    pub fidelity: f64,
    pub q: f64,
}

pub const SUMMARY_PREFIX: &str = "summary:";

impl FidelityRow {
    pub fn is_summary(&self) -> bool {
        self.gate_label.starts_with(SUMMARY_PREFIX)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct W1Row {
    pub method: String,
    pub w1: f64,
    /// `W1 / (ξ_max − ξ_min)`
    pub w1_normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub fidelity: DistributionSummary,
    pub infidelity: DistributionSummary,
    pub q: DistributionSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub config_hash: String,
    pub seed: u64,
    /// Per-gate rows, gate-major in the order methods were requested.
    pub rows: Vec<FidelityRow>,
    pub w1: Vec<W1Row>,
    pub summaries: Vec<MethodSummary>,
}

impl ResultBundle {
    /// Builds summaries and W1 rows from per-gate rows. `extra_w1` supplies
    /// q samples for methods whose distribution is not the per-gate rows
    /// (ML twins).
    pub fn from_rows(
        config_hash: String,
        seed: u64,
        rows: Vec<FidelityRow>,
        window: &XiWindow,
        extra_w1: &[(String, Vec<f64>)],
    ) -> Result<ResultBundle> {
        let mut methods: Vec<String> = Vec::new();
        for r in &rows {
            if !methods.contains(&r.method) {
                methods.push(r.method.clone());
            }
        }
        let mut summaries = Vec::new();
        let mut w1 = Vec::new();
        for m in &methods {
            let mine: Vec<&FidelityRow> = rows.iter().filter(|r| &r.method == m && !r.is_summary()).collect();
            let f: Vec<f64> = mine.iter().map(|r| r.fidelity).collect();
            let inf: Vec<f64> = f.iter().map(|x| 1.0 - x).collect();
            let q: Vec<f64> = mine.iter().map(|r| r.q).collect();
            summaries.push(MethodSummary {
                method: m.clone(),
                fidelity: summarize(&f)?,
                infidelity: summarize(&inf)?,
                q: summarize(&q)?,
            });
            let samples = extra_w1.iter().find(|(name, _)| name == m).map_or(q, |(_, s)| s.clone());
            let d = w1_distance(&samples, window)?;
            w1.push(W1Row { method: m.clone(), w1: d, w1_normalized: d / window.width() });
        }
        Ok(ResultBundle { config_hash, seed, rows, w1, summaries })
    }

    pub fn summary(&self, method: &str) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    pub fn w1_of(&self, method: &str) -> Option<f64> {
        self.w1.iter().find(|r| r.method == method).map(|r| r.w1)
    }

    pub fn infidelities(&self, method: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.method == method && !r.is_summary())
            .map(|r| 1.0 - r.fidelity)
            .collect()
    }

    /// Per-gate rows followed by summary rows.
    pub fn csv_rows(&self) -> Vec<FidelityRow> {
        let mut out = self.rows.clone();
        for s in &self.summaries {
            let stats = [
                ("mean", s.fidelity.mean, s.q.mean),
                ("std", s.fidelity.std, s.q.std),
                ("median", s.fidelity.median, s.q.median),
                ("iqr_low", s.fidelity.iqr_low, s.q.iqr_low),
                ("iqr_high", s.fidelity.iqr_high, s.q.iqr_high),
            ];
            for (name, f, q) in stats {
                out.push(FidelityRow {
                    method: s.method.clone(),
                    gate_label: format!("{SUMMARY_PREFIX}{name}"),
                    fidelity: f,
                    q,
                });
            }
        }
        out
    }

    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("bundle serializes").as_bytes())
    }
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| QptError::Parse { path: "<csv>".into(), message: e.to_string() })?;
    }
    let bytes = w.into_inner().map_err(|e| QptError::Parse { path: "<csv>".into(), message: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn from_csv<T: DeserializeOwned>(text: &str, origin: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(|e| QptError::Parse { path: origin.into(), message: e.to_string() }))
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_text(path, &to_csv(rows)?)
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    from_csv(&super::files::read_text(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::infidelity_log;

    fn rows() -> Vec<FidelityRow> {
        let w = XiWindow::default();
        let mut out = Vec::new();
        for (k, f) in [0.9, 0.99, 0.999_123_456_789, 1.0 - 1e-7].into_iter().enumerate() {
            for m in ["std", "em"] {
                let f = if m == "em" { 1.0 - (1.0 - f) / 10.0 } else { f };
                out.push(FidelityRow {
                    method: m.into(),
                    gate_label: format!("g{k}"),
                    fidelity: f,
                    q: infidelity_log(f, w.xi_min, w.xi_max),
                });
            }
        }
        out
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let b = ResultBundle::from_rows("h".into(), 1, rows(), &XiWindow::default(), &[]).unwrap();
        let all = b.csv_rows();
        let text = to_csv(&all).unwrap();
        assert!(text.starts_with("method,gate_label,fidelity,q\n"));
        let back: Vec<FidelityRow> = from_csv(&text, "mem").unwrap();
        assert_eq!(back, all);
        assert_eq!(back.iter().filter(|r| r.is_summary()).count(), 10);
    }

    #[test]
    fn summaries_and_hash() {
        let b = ResultBundle::from_rows("h".into(), 1, rows(), &XiWindow::default(), &[]).unwrap();
        assert_eq!(b.summaries.len(), 2);
        let s = b.summary("em").unwrap();
        assert!(s.infidelity.mean < b.summary("std").unwrap().infidelity.mean);
        assert!(b.w1_of("em").unwrap() >= 0.0);
        let mut c = b.clone();
        assert_eq!(b.hash(), c.hash());
        c.rows[0].fidelity += 1e-12;
        assert_ne!(b.hash(), c.hash());
    }

    #[test]
    fn malformed_csv_reports_origin() {
        let e = from_csv::<FidelityRow>("method,gate_label,fidelity,q\nstd,g,abc,1\n", "f.csv").unwrap_err();
        assert!(matches!(e, QptError::Parse { ref path, .. } if path == "f.csv"));
    }
}
