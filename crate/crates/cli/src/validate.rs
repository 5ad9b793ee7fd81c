use cfnormal::arith::{parse_rational, Rational};
use cfnormal::metrics::{cfgrande_window_mass, hw_report, kpw_tail_estimate, sample_log_qn};
use cfnormal::CfWord;

use crate::analyze::{parse_block, print_report, ReportFormat};
use crate::config::Config;
use crate::Outcome;

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum Which {
    /// Gaussian law of log q_n: mean(log q_n)/n against Levy's constant.
    Tcl,
    /// Mass of the length window (reported only).
    Cfgrande,
    /// Large-deviation tail of a block frequency against 6 M e^(-delta^2 n/(2M)).
    Kpw,
    /// Exhaustive bad-block count against 2 b^(k+1) e^(-b eps^2 k/6).
    Hw,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub which: Which,
    /// Order n (default 50 for tcl, 20 for cfgrande, 200 for kpw).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// Base b for hw.
    #[arg(long, default_value_t = 2)]
    pub base: u32,
    /// Block length k for hw.
    #[arg(long, default_value_t = 12)]
    pub k: usize,
    /// Discrepancy threshold for hw.
    #[arg(long, default_value = "1/2")]
    pub eps: String,
    /// Deviation delta for kpw.
    #[arg(long, default_value = "1/4")]
    pub delta: String,
    /// Parent cf word for cfgrande and kpw, e.g. 2,1 (default: empty).
    #[arg(long, default_value = "")]
    pub parent: String,
    /// Block for kpw.
    #[arg(long, default_value = "1")]
    pub block: String,
    /// Tolerance on mean(log q_n)/n for tcl.
    #[arg(long, default_value_t = 0.02)]
    pub tol: f64,
    #[arg(long, default_value = "text")]
    pub report: ReportFormat,
}

fn rational_arg(name: &str, s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("--{name}: cannot parse {s:?} as a rational"))
}

fn parent(s: &str) -> Result<CfWord, String> {
    if s.trim().is_empty() {
        return Ok(CfWord::empty());
    }
    parse_block(s).map(|b| b.as_word())
}

pub fn run(cfg: &Config, args: &Args) -> Result<Outcome, String> {
    let err = |e: cfnormal::metrics::MetricsError| e.to_string();
    let report = match args.which {
        Which::Tcl => {
            let mut r = sample_log_qn(args.samples, args.n.unwrap_or(50), cfg.seed).map_err(err)?;
            r.param("tol", args.tol);
            r.check_within("levy_within_tol", "mean_log_qn_over_n", "levy", args.tol);
            r
        }
        Which::Cfgrande => {
            cfgrande_window_mass(&parent(&args.parent)?, args.n.unwrap_or(20), args.samples, &cfg.cc, cfg.seed)
                .map_err(err)?
        }
        Which::Kpw => kpw_tail_estimate(
            &parent(&args.parent)?,
            &parse_block(&args.block)?,
            args.n.unwrap_or(200),
            &rational_arg("delta", &args.delta)?,
            args.samples,
            cfg.seed,
        )
        .map_err(err)?,
        Which::Hw => hw_report(args.base, args.k, &rational_arg("eps", &args.eps)?).map_err(err)?,
    };
    print_report(&report, args.report);
    Ok(if report.passed() { Outcome::Ok } else { Outcome::Fail })
}
