use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// How a value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Analytic expression evaluated directly.
    ClosedForm,
    /// Dense construction used as a reference.
    DenseOracle,
    /// Grid plus golden-section search.
    Search,
    /// Depends on seeded random candidates.
    Sampled,
    /// An upper or lower bound standing in for an exact value.
    Bound,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ClosedForm => "closed-form",
            Self::DenseOracle => "dense-oracle",
            Self::Search => "search",
            Self::Sampled => "sampled",
            Self::Bound => "bound",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Ok,
    Infeasible,
    /// A checked invariant did not hold.
    Violated,
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ok => "ok",
            Self::Infeasible => "infeasible",
            Self::Violated => "violated",
        })
    }
}

/// One metric at one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    /// `key=value` pairs joined by `;`, in sweep order.
    pub params: String,
    pub metric: String,
    /// `None` exactly when the status is infeasible.
    pub value: Option<f64>,
    pub status: RowStatus,
    pub provenance: Provenance,
}

impl ResultRow {
    pub fn new(
        experiment: impl fmt::Display,
        params: &[(&str, String)],
        metric: &str,
        value: f64,
        provenance: Provenance,
    ) -> Self {
        Self {
            experiment: experiment.to_string(),
            params: join_params(params),
            metric: metric.to_string(),
            value: Some(value),
            status: if value.is_finite() {
                RowStatus::Ok
            } else {
                RowStatus::Infeasible
            },
            provenance,
        }
        .normalized()
    }

    pub fn infeasible(
        experiment: impl fmt::Display,
        params: &[(&str, String)],
        metric: &str,
        provenance: Provenance,
    ) -> Self {
        Self {
            experiment: experiment.to_string(),
            params: join_params(params),
            metric: metric.to_string(),
            value: None,
            status: RowStatus::Infeasible,
            provenance,
        }
    }

    /// Boolean check recorded as 1/0, with status `violated` when false.
    pub fn check(
        experiment: impl fmt::Display,
        params: &[(&str, String)],
        metric: &str,
        passed: bool,
        provenance: Provenance,
    ) -> Self {
        let mut row = Self::new(experiment, params, metric, if passed { 1.0 } else { 0.0 }, provenance);
        if !passed {
            row.status = RowStatus::Violated;
        }
        row
    }

    fn normalized(mut self) -> Self {
        if self.value.is_some_and(|v| !v.is_finite()) {
            self.value = None;
        }
        self
    }
}

fn join_params(params: &[(&str, String)]) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Run metadata carried only by the JSON output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub version: String,
    pub wall_time_s: f64,
    pub config: ExperimentConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub metadata: RunMetadata,
    pub rows: Vec<ResultRow>,
}

impl RunOutput {
    pub fn violations(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.status == RowStatus::Violated)
            .count()
    }

    /// CSV with header `experiment,params,metric,value,status,provenance`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["experiment", "params", "metric", "value", "status", "provenance"])
            .map_err(io)?;
        for r in &self.rows {
            let value = r.value.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([
                r.experiment.as_str(),
                r.params.as_str(),
                r.metric.as_str(),
                value.as_str(),
                &r.status.to_string(),
                &r.provenance.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}
