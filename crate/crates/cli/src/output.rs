//! Series tables, metadata and sweep summaries, rendered to strings so that
//! nothing touches the disk until every member has been computed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ncphase_core::{TrajectoryPoint, WitnessReport};

use crate::config::{OutputFormat, RunConfig};
use crate::error::CliError;

pub const CSV_HEADER: &str = "t,F,dFdt,d_Q,d_P,s_QQ,s_QP,s_PP";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column-major copy of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub t: Vec<f64>,
    #[serde(rename = "F")]
    pub fidelity: Vec<f64>,
    #[serde(rename = "dFdt")]
    pub dfdt: Vec<f64>,
    #[serde(rename = "d_Q")]
    pub d_q: Vec<f64>,
    #[serde(rename = "d_P")]
    pub d_p: Vec<f64>,
    #[serde(rename = "s_QQ")]
    pub s_qq: Vec<f64>,
    #[serde(rename = "s_QP")]
    pub s_qp: Vec<f64>,
    #[serde(rename = "s_PP")]
    pub s_pp: Vec<f64>,
}

impl Series {
    /// `points` must carry derivatives.
    pub fn from_points(points: &[TrajectoryPoint]) -> Self {
        let n = points.len();
        let mut s = Series {
            t: Vec::with_capacity(n),
            fidelity: Vec::with_capacity(n),
            dfdt: Vec::with_capacity(n),
            d_q: Vec::with_capacity(n),
            d_p: Vec::with_capacity(n),
            s_qq: Vec::with_capacity(n),
            s_qp: Vec::with_capacity(n),
            s_pp: Vec::with_capacity(n),
        };
        for p in points {
            let d = p.state.d().as_slice();
            let sigma = p.state.sigma().as_matrix();
            s.t.push(p.t);
            s.fidelity.push(p.fidelity);
            s.dfdt.push(p.dfdt.expect("derivatives annotated"));
            s.d_q.push(d[0]);
            s.d_p.push(d[1]);
            s.s_qq.push(sigma[(0, 0)]);
            s.s_qp.push(sigma[(0, 1)]);
            s.s_pp.push(sigma[(1, 1)]);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn columns(&self) -> [&[f64]; 8] {
        [
            &self.t,
            &self.fidelity,
            &self.dfdt,
            &self.d_q,
            &self.d_p,
            &self.s_qq,
            &self.s_qp,
            &self.s_pp,
        ]
    }

    /// Fixed 17-significant-digit scientific notation.
    pub fn to_csv(&self) -> String {
        let cols = self.columns();
        let mut out = String::with_capacity(self.len() * 8 * 24 + CSV_HEADER.len() + 1);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in 0..self.len() {
            for (k, col) in cols.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write!(out, "{:.16e}", col[row]).expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("finite floats serialise");
        s.push('\n');
        s
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessBlock {
    pub tol: f64,
    pub measure: f64,
    pub intervals: Vec<(f64, f64)>,
}

impl From<&WitnessReport> for WitnessBlock {
    fn from(r: &WitnessReport) -> Self {
        Self {
            tol: r.tol,
            measure: r.measure,
            intervals: r.intervals.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    /// Resolved configuration; feeding it back through the config parser
    /// reproduces the run.
    pub config: BTreeMap<String, String>,
    pub rows: usize,
    pub witness: WitnessBlock,
}

impl Metadata {
    pub fn new(config: &RunConfig, rows: usize, witness: &WitnessReport) -> Self {
        Self {
            version: VERSION.to_string(),
            config: config
                .entries()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            rows,
            witness: witness.into(),
        }
    }

    /// The echoed configuration in the config text format.
    pub fn config_text(&self) -> String {
        self.config
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metadata serialises");
        s.push('\n');
        s
    }
}

/// One row per sweep member, in the order given.
pub fn summary_csv(rows: &[(f64, &WitnessReport)]) -> String {
    let mut out = String::from("b0,measure,intervals\n");
    for (b0, report) in rows {
        writeln!(out, "{b0},{:.16e},{}", report.measure, report.intervals.len())
            .expect("writing to a String");
    }
    out
}

/// Writes every file or none: on failure, files already written are removed.
pub fn write_all(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        if let Err(source) = fs::write(&path, body) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(CliError::Output { path, source });
        }
        written.push(path);
    }
    Ok(written)
}
