//! Configuration-driven front end: single runs and field sweeps that write
//! fidelity series, metadata and a sweep summary.

pub mod config;
mod error;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

use ncphase_core::metrics::{annotate_derivatives, fidelity_series};
use ncphase_core::{composed_trajectory, nonmarkov_witness, WitnessReport};

pub use config::{NcSpec, OutputFormat, RunConfig};
pub use error::{CliError, ConfigError};
use output::{Metadata, Series};

pub const WORKERS_ENV: &str = "NCPHASE_WORKERS";

/// A finished simulation, not yet written anywhere.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: RunConfig,
    pub series: Series,
    pub witness: WitnessReport,
}

impl RunResult {
    pub fn metadata(&self) -> Metadata {
        Metadata::new(&self.config, self.series.len(), &self.witness)
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::parse(&text).map_err(|source| CliError::Config {
        path: path.to_path_buf(),
        source,
    })
}

pub fn simulate(config: &RunConfig) -> Result<RunResult, CliError> {
    let traj_cfg = config.trajectory()?;
    let mut points = composed_trajectory(&traj_cfg)?;
    annotate_derivatives(&mut points)?;
    let series = fidelity_series(&points, &traj_cfg.channel.asymptotic_state())?;
    let witness = nonmarkov_witness(&series, config.witness_tol);
    Ok(RunResult {
        config: config.clone(),
        series: Series::from_points(&points),
        witness,
    })
}

fn output_dir(config: &RunConfig, override_dir: Option<&Path>) -> PathBuf {
    override_dir.map_or_else(|| config.output_path.clone(), Path::to_path_buf)
}

/// `series.<csv|json>` and `metadata.json` in the output directory.
pub fn run(config_path: &Path, output_override: Option<&Path>) -> Result<RunResult, CliError> {
    let mut config = load_config(config_path)?;
    config.output_path = output_dir(&config, output_override);
    let result = simulate(&config)?;
    let format = config.output_format;
    output::write_all(
        &config.output_path,
        &[
            (
                format!("series.{}", format.extension()),
                result.series.render(format),
            ),
            ("metadata.json".to_string(), result.metadata().to_json()),
        ],
    )?;
    Ok(result)
}

/// Comma-separated, non-empty list of distinct non-negative fields.
pub fn parse_b0_list(raw: &str) -> Result<Vec<f64>, CliError> {
    if raw.trim().is_empty() {
        return Err(CliError::Usage("--b0 list is empty".into()));
    }
    let mut out: Vec<f64> = Vec::new();
    for item in raw.split(',') {
        let item = item.trim();
        let v: f64 = item
            .parse()
            .map_err(|_| CliError::Usage(format!("--b0: {item:?} is not a number")))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(CliError::Usage(format!("--b0: {item} must be finite and >= 0")));
        }
        if out.contains(&v) {
            return Err(CliError::Usage(format!("--b0: {item} is listed twice")));
        }
        out.push(v);
    }
    Ok(out)
}

fn worker_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Usage(format!("{WORKERS_ENV}: {e}"))),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "{WORKERS_ENV} must be a positive integer, got {raw:?}"
            ))),
        },
    }
}

#[cfg(feature = "parallel")]
fn simulate_members(configs: &[RunConfig]) -> Vec<Result<RunResult, CliError>> {
    use rayon::prelude::*;
    let mut builder = rayon::ThreadPoolBuilder::new();
    match worker_cap() {
        Ok(Some(n)) => builder = builder.num_threads(n),
        Ok(None) => {}
        Err(e) => return vec![Err(e)],
    }
    match builder.build() {
        Ok(pool) => pool.install(|| configs.par_iter().map(simulate).collect()),
        Err(e) => vec![Err(CliError::Usage(format!("cannot start worker pool: {e}")))],
    }
}

#[cfg(not(feature = "parallel"))]
fn simulate_members(configs: &[RunConfig]) -> Vec<Result<RunResult, CliError>> {
    if let Err(e) = worker_cap() {
        return vec![Err(e)];
    }
    configs.iter().map(simulate).collect()
}

pub fn member_file_stem(b0: f64) -> String {
    format!("b0_{b0}")
}

/// One series and metadata file per field plus `summary.csv`. Members run in
/// parallel; the first failure in input order aborts the sweep before
/// anything is written.
pub fn sweep(
    config_path: &Path,
    b0_list: &[f64],
    output_override: Option<&Path>,
) -> Result<Vec<RunResult>, CliError> {
    if b0_list.is_empty() {
        return Err(CliError::Usage("--b0 list is empty".into()));
    }
    let mut base = load_config(config_path)?;
    if let NcSpec::Pair { .. } = base.nc {
        return Err(CliError::Config {
            path: config_path.to_path_buf(),
            source: ConfigError::whole(
                "sweep sets nc.b0 per member; the config uses nc.theta/nc.zeta",
            ),
        });
    }
    base.output_path = output_dir(&base, output_override);
    let configs: Vec<RunConfig> = b0_list
        .iter()
        .map(|&b0| RunConfig {
            nc: NcSpec::Field(b0),
            ..base.clone()
        })
        .collect();

    let results = simulate_members(&configs)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

    let format = base.output_format;
    let mut files = Vec::with_capacity(2 * results.len() + 1);
    for (b0, r) in b0_list.iter().zip(&results) {
        let stem = member_file_stem(*b0);
        files.push((
            format!("series_{stem}.{}", format.extension()),
            r.series.render(format),
        ));
        files.push((format!("metadata_{stem}.json"), r.metadata().to_json()));
    }
    let rows: Vec<(f64, &WitnessReport)> = b0_list
        .iter()
        .copied()
        .zip(results.iter().map(|r| &r.witness))
        .collect();
    files.push(("summary.csv".to_string(), output::summary_csv(&rows)));
    output::write_all(&base.output_path, &files)?;
    Ok(results)
}
