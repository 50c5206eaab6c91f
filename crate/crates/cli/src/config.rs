//! Flat `section.key = value` run configuration.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use ncphase_core::{
    ChannelParams, CmScaling, Gauge, InitialConditions, NcSource, ThermalOccupancy,
    TrajectoryConfig, Units,
};

use crate::error::ConfigError;

/// Every recognised key, in echo order.
pub const KEYS: &[&str] = &[
    "initial.x0",
    "initial.y0",
    "initial.px0",
    "initial.py0",
    "system.n_bar",
    "env.m_bar",
    "env.gamma",
    "nc.b0",
    "nc.theta",
    "nc.zeta",
    "nc.gauge",
    "units.m",
    "units.omega",
    "units.hbar",
    "units.q",
    "time.t_max",
    "time.dt",
    "channel.cm_scaling",
    "witness.tol",
    "output.path",
    "output.format",
];

pub const DEFAULT_OUTPUT_PATH: &str = "ncphase-output";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    pub fn extension(self) -> &'static str {
        self.as_str()
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("expected \"csv\" or \"json\", got {other:?}")),
        }
    }
}

/// How the noncommutative parameters are given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NcSpec {
    Field(f64),
    Pair { theta: f64, zeta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub initial: InitialConditions,
    pub n_bar: f64,
    pub m_bar: f64,
    pub gamma: f64,
    pub nc: NcSpec,
    pub gauge: Gauge,
    pub units: Units,
    pub t_max: f64,
    pub dt: f64,
    pub cm_scaling: CmScaling,
    pub witness_tol: f64,
    pub output_path: PathBuf,
    pub output_format: OutputFormat,
}

impl RunConfig {
    /// Cooling defaults with the given noncommutative source.
    pub fn with_nc(nc: NcSpec) -> Self {
        Self {
            initial: InitialConditions::default(),
            n_bar: 4.0,
            m_bar: 2.0,
            gamma: 0.1,
            nc,
            gauge: Gauge::PositionOnly,
            units: Units::default(),
            t_max: 100.0,
            dt: 0.05,
            cm_scaling: CmScaling::Physical,
            witness_tol: ncphase_core::metrics::DEFAULT_WITNESS_TOL,
            output_path: PathBuf::from(DEFAULT_OUTPUT_PATH),
            output_format: OutputFormat::Csv,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let entries = read_entries(text)?;
        if entries.is_empty() {
            return Err(ConfigError::whole("configuration is empty"));
        }
        let has = |k: &str| entries.contains_key(k);
        let nc = match (has("nc.b0"), has("nc.theta"), has("nc.zeta")) {
            (true, false, false) => NcSpec::Field(0.0),
            (false, true, true) => NcSpec::Pair {
                theta: 0.0,
                zeta: 0.0,
            },
            (false, false, false) => {
                return Err(ConfigError::whole(
                    "set either nc.b0 or both nc.theta and nc.zeta",
                ))
            }
            (true, _, _) => {
                let line = entries
                    .get("nc.theta")
                    .or_else(|| entries.get("nc.zeta"))
                    .map(|e| e.line);
                return Err(ConfigError::at(
                    line.unwrap_or(entries["nc.b0"].line),
                    "nc.b0 cannot be combined with nc.theta/nc.zeta",
                ));
            }
            (false, theta, _) => {
                let (present, missing) = if theta {
                    ("nc.theta", "nc.zeta")
                } else {
                    ("nc.zeta", "nc.theta")
                };
                return Err(ConfigError::at(
                    entries[present].line,
                    format!("{present} needs {missing} as well"),
                ));
            }
        };

        let mut cfg = RunConfig::with_nc(nc);
        let mut ic = [0.0; 4];
        for (slot, key) in ic.iter_mut().zip(KEYS) {
            if let Some(v) = get::<f64>(&entries, key, finite)? {
                *slot = v;
            }
        }
        cfg.initial = InitialConditions::new(ic[0], ic[1], ic[2], ic[3]);
        set(&entries, "system.n_bar", non_negative, &mut cfg.n_bar)?;
        set(&entries, "env.m_bar", non_negative, &mut cfg.m_bar)?;
        set(&entries, "env.gamma", positive, &mut cfg.gamma)?;
        cfg.nc = match cfg.nc {
            NcSpec::Field(_) => NcSpec::Field(
                get(&entries, "nc.b0", non_negative)?.expect("presence checked"),
            ),
            NcSpec::Pair { .. } => NcSpec::Pair {
                theta: get(&entries, "nc.theta", finite)?.expect("presence checked"),
                zeta: get(&entries, "nc.zeta", finite)?.expect("presence checked"),
            },
        };
        set(&entries, "nc.gauge", any, &mut cfg.gauge)?;
        set(&entries, "units.m", positive, &mut cfg.units.m)?;
        set(&entries, "units.omega", positive, &mut cfg.units.omega)?;
        set(&entries, "units.hbar", positive, &mut cfg.units.hbar)?;
        set(&entries, "units.q", positive, &mut cfg.units.q)?;
        set(&entries, "time.t_max", positive, &mut cfg.t_max)?;
        set(&entries, "time.dt", positive, &mut cfg.dt)?;
        set(&entries, "channel.cm_scaling", any, &mut cfg.cm_scaling)?;
        set(&entries, "witness.tol", non_negative, &mut cfg.witness_tol)?;
        set(&entries, "output.path", any, &mut cfg.output_path)?;
        set(&entries, "output.format", any, &mut cfg.output_format)?;

        cfg.check()?;
        Ok(cfg)
    }

    /// Cross-key checks that do not belong to a single line.
    pub fn check(&self) -> Result<(), ConfigError> {
        let traj = self
            .trajectory()
            .map_err(|e| ConfigError::whole(e.to_string()))?;
        if traj.point_count() < 3 {
            return Err(ConfigError::whole(format!(
                "time.t_max / time.dt gives {} samples; at least 3 are needed for dF/dt",
                traj.point_count()
            )));
        }
        Ok(())
    }

    /// Validated trajectory settings.
    pub fn trajectory(&self) -> ncphase_core::Result<TrajectoryConfig> {
        let nc = match self.nc {
            NcSpec::Field(b0) => NcSource::Field {
                b0,
                gauge: self.gauge,
            },
            NcSpec::Pair { theta, zeta } => NcSource::Explicit { theta, zeta },
        };
        let traj = TrajectoryConfig {
            initial: self.initial,
            n_bar: ThermalOccupancy::new(self.n_bar)?,
            channel: ChannelParams::new(self.gamma, ThermalOccupancy::new(self.m_bar)?)?,
            nc,
            units: self.units,
            t_max: self.t_max,
            dt: self.dt,
            cm_scaling: self.cm_scaling,
        };
        traj.validate()?;
        Ok(traj)
    }

    /// Fully resolved key/value pairs, defaults included. `f64` values use
    /// the shortest representation that parses back to the same bits.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out: Vec<(&'static str, String)> = vec![
            ("initial.x0", self.initial.x0.to_string()),
            ("initial.y0", self.initial.y0.to_string()),
            ("initial.px0", self.initial.px0.to_string()),
            ("initial.py0", self.initial.py0.to_string()),
            ("system.n_bar", self.n_bar.to_string()),
            ("env.m_bar", self.m_bar.to_string()),
            ("env.gamma", self.gamma.to_string()),
        ];
        match self.nc {
            NcSpec::Field(b0) => out.push(("nc.b0", b0.to_string())),
            NcSpec::Pair { theta, zeta } => {
                out.push(("nc.theta", theta.to_string()));
                out.push(("nc.zeta", zeta.to_string()));
            }
        }
        out.extend([
            ("nc.gauge", self.gauge.as_str().to_string()),
            ("units.m", self.units.m.to_string()),
            ("units.omega", self.units.omega.to_string()),
            ("units.hbar", self.units.hbar.to_string()),
            ("units.q", self.units.q.to_string()),
            ("time.t_max", self.t_max.to_string()),
            ("time.dt", self.dt.to_string()),
            ("channel.cm_scaling", self.cm_scaling.as_str().to_string()),
            ("witness.tol", self.witness_tol.to_string()),
            ("output.path", self.output_path.display().to_string()),
            ("output.format", self.output_format.as_str().to_string()),
        ]);
        out
    }

    /// Renders the configuration back into the text format.
    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

fn read_entries(text: &str) -> Result<HashMap<&str, Entry<'_>>, ConfigError> {
    let mut entries: HashMap<&str, Entry> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, "expected `section.key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        let Some(&key) = KEYS.iter().find(|&&k| k == key) else {
            return Err(ConfigError::at(line, format!("unknown key `{key}`")));
        };
        if value.is_empty() {
            return Err(ConfigError::at(line, format!("`{key}` has no value")));
        }
        if let Some(first) = entries.get(key) {
            return Err(ConfigError::at(
                line,
                format!("duplicate key `{key}` (first set on line {})", first.line),
            ));
        }
        entries.insert(key, Entry { line, value });
    }
    Ok(entries)
}

fn get<T>(
    entries: &HashMap<&str, Entry>,
    key: &str,
    check: fn(&T) -> Result<(), &'static str>,
) -> Result<Option<T>, ConfigError>
where
    T: FromStr,
    T::Err: Display,
{
    let Some(entry) = entries.get(key) else {
        return Ok(None);
    };
    let value = entry
        .value
        .parse::<T>()
        .map_err(|e| ConfigError::at(entry.line, format!("`{key}`: {e}")))?;
    check(&value).map_err(|why| {
        ConfigError::at(entry.line, format!("`{key}` = {} {why}", entry.value))
    })?;
    Ok(Some(value))
}

fn set<T>(
    entries: &HashMap<&str, Entry>,
    key: &str,
    check: fn(&T) -> Result<(), &'static str>,
    slot: &mut T,
) -> Result<(), ConfigError>
where
    T: FromStr,
    T::Err: Display,
{
    if let Some(v) = get(entries, key, check)? {
        *slot = v;
    }
    Ok(())
}

fn any<T>(_: &T) -> Result<(), &'static str> {
    Ok(())
}

fn finite(v: &f64) -> Result<(), &'static str> {
    if v.is_finite() {
        Ok(())
    } else {
        Err("is not finite")
    }
}

fn non_negative(v: &f64) -> Result<(), &'static str> {
    if v.is_finite() && *v >= 0.0 {
        Ok(())
    } else {
        Err("must be finite and >= 0")
    }
}

fn positive(v: &f64) -> Result<(), &'static str> {
    if v.is_finite() && *v > 0.0 {
        Ok(())
    } else {
        Err("must be finite and > 0")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_absent_keys() {
        let cfg = RunConfig::parse("nc.b0 = 0.5\n").unwrap();
        assert_eq!(cfg, RunConfig::with_nc(NcSpec::Field(0.5)));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# cooling\n\ninitial.x0 = 1   # displaced\n  nc.b0=1\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.initial.x0, 1.0);
        assert_eq!(cfg.nc, NcSpec::Field(1.0));
    }

    #[test]
    fn explicit_pair() {
        let cfg = RunConfig::parse("nc.theta = 0.2\nnc.zeta = 0.1\n").unwrap();
        assert_eq!(cfg.nc, NcSpec::Pair { theta: 0.2, zeta: 0.1 });
    }

    fn line_of(text: &str) -> Option<usize> {
        RunConfig::parse(text).unwrap_err().line
    }

    #[test]
    fn errors_point_at_lines() {
        assert_eq!(line_of("nc.b0 = 1\nfoo.bar = 2\n"), Some(2));
        assert_eq!(line_of("nc.b0 = 1\n\nnc.b0 = 2\n"), Some(3));
        assert_eq!(line_of("nc.b0 = 1\nenv.gamma = 0\n"), Some(2));
        assert_eq!(line_of("nc.b0 = -1\n"), Some(1));
        assert_eq!(line_of("nc.b0 = 1\nnc.gauge = sideways\n"), Some(2));
        assert_eq!(line_of("nc.b0 = 1\njust words\n"), Some(2));
        assert_eq!(line_of("nc.b0 = 1\ntime.dt =\n"), Some(2));
        assert_eq!(line_of("nc.b0 = 1\nnc.theta = 1\n"), Some(2));
        assert_eq!(line_of("nc.theta = 1\n"), Some(1));
    }

    #[test]
    fn whole_file_errors() {
        assert_eq!(line_of(""), None);
        assert_eq!(line_of("# only a comment\n"), None);
        assert_eq!(line_of("initial.x0 = 1\n"), None);
        assert_eq!(line_of("nc.b0 = 1\ntime.dt = 200\n"), None);
        assert_eq!(line_of("nc.b0 = 1\ntime.t_max = 0.08\n"), None);
        assert_eq!(line_of("nc.b0 = 1\nchannel.cm_scaling = literal\nsystem.n_bar = 0.5\n"), None);
    }

    #[test]
    fn text_round_trip() {
        let text = "initial.x0 = 0.1\ninitial.px0 = -3.25\nnc.theta = 0.3\nnc.zeta = 0.7\n\
                    units.m = 2.5\noutput.format = json\nwitness.tol = 1e-9\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
        let awkward = RunConfig {
            dt: 0.1 + 0.2,
            ..RunConfig::with_nc(NcSpec::Field(1.0 / 3.0))
        };
        assert_eq!(RunConfig::parse(&awkward.to_text()).unwrap(), awkward);
    }
}
