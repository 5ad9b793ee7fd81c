//! Run configuration: built-in defaults, then the config file, then flags.

use std::path::{Path, PathBuf};

use cfnormal::arith::{parse_rational, PrecisionPolicy, Rational};
use cfnormal::{ConstructionConstants, Schedule};
use serde::Deserialize;

pub const CONFIG_VERSION: u32 = 1;
pub const CONFIG_ENV: &str = "CFNORMAL_CONFIG";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Plain,
    Framed,
}

/// The config file. Every field but `version` is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub version: u32,
    pub c: Option<String>,
    pub n_start: Option<u32>,
    pub schedule: Option<Schedule>,
    pub precision: Option<PrecisionFile>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub checkpoint: Option<PathBuf>,
    pub budget: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionFile {
    pub start_bits: u32,
    pub cap_bits: u32,
}

/// Settings shared by every command.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct ConfigArgs {
    /// Config file (default: $CFNORMAL_CONFIG when set).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Window constant c, as an integer or fraction n/d.
    #[arg(long, global = true)]
    pub c: Option<String>,
    /// Starting relative order.
    #[arg(long, global = true)]
    pub n_start: Option<u32>,
    /// Block-length schedule.
    #[arg(long, global = true, value_parser = ["standard", "demo"])]
    pub schedule: Option<String>,
    /// Steps at which t increases, for the demo schedule (implies it), e.g. 5,15.
    #[arg(long, global = true, value_delimiter = ',')]
    pub t_steps: Option<Vec<u64>>,
    /// Starting precision of certified comparisons, in bits.
    #[arg(long, global = true)]
    pub precision_start: Option<u32>,
    /// Precision cap, in bits.
    #[arg(long, global = true)]
    pub precision_cap: Option<u32>,
    /// Master seed for sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Digit output format.
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Checkpoint file, written when generation stops.
    #[arg(long, global = true)]
    pub checkpoint: Option<PathBuf>,
    /// Search-node budget per step; exceeding it stops with a resumable checkpoint.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct Config {
    pub cc: ConstructionConstants,
    pub seed: u64,
    pub format: Format,
    pub checkpoint: Option<PathBuf>,
    pub budget: Option<u64>,
}

fn parse_c(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("c: cannot parse {s:?} as a rational"))
}

fn read_file(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let file: FileConfig = toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if file.version != CONFIG_VERSION {
        return Err(format!(
            "{}: config version {} is not supported (expected {CONFIG_VERSION})",
            path.display(),
            file.version
        ));
    }
    Ok(file)
}

impl Config {
    pub fn resolve(args: &ConfigArgs) -> Result<Config, String> {
        let path = args.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        let file = match path {
            Some(p) => read_file(&p)?,
            None => FileConfig::default(),
        };
        let mut cc = ConstructionConstants::default();
        if let Some(c) = &file.c {
            cc.c = parse_c(c)?;
        }
        if let Some(n) = file.n_start {
            cc.n_start = n;
        }
        if let Some(s) = file.schedule {
            cc.schedule = s;
        }
        if let Some(p) = file.precision {
            cc.precision = PrecisionPolicy { start_bits: p.start_bits, cap_bits: p.cap_bits };
        }

        if let Some(c) = &args.c {
            cc.c = parse_c(c)?;
        }
        if let Some(n) = args.n_start {
            cc.n_start = n;
        }
        match (args.schedule.as_deref(), &args.t_steps) {
            (Some("standard"), Some(_)) => return Err("--t-steps applies to the demo schedule only".into()),
            (Some("standard"), None) => cc.schedule = Schedule::Standard,
            (_, Some(t)) => cc.schedule = Schedule::Demo { t_steps: t.clone() },
            (Some(_), None) => {
                if !matches!(cc.schedule, Schedule::Demo { .. }) {
                    return Err("the demo schedule needs --t-steps".into());
                }
            }
            (None, None) => {}
        }
        if let Some(b) = args.precision_start {
            cc.precision.start_bits = b;
        }
        if let Some(b) = args.precision_cap {
            cc.precision.cap_bits = b;
        }
        if !cc.is_valid() {
            return Err("invalid construction constants: c must be positive, n_start at least 1, \
                        and demo t_steps strictly increasing with entries >= 2"
                .into());
        }
        if cc.precision.start_bits == 0 || cc.precision.cap_bits < cc.precision.start_bits {
            return Err("precision: need 0 < start bits <= cap bits".into());
        }
        Ok(Config {
            cc,
            seed: args.seed.or(file.seed).unwrap_or(0),
            format: args.format.or(file.format).unwrap_or_default(),
            checkpoint: args.checkpoint.clone().or(file.checkpoint),
            budget: args.budget.or(file.budget),
        })
    }
}
