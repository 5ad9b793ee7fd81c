use std::io::{BufWriter, Write};
use std::path::Path;

use cfnormal::constructor::{checkpoint, restore, StepError};
use cfnormal::{Constructor, ConstructorState, Schedule};

use crate::config::{Config, Format};
use crate::Outcome;

#[derive(Debug, clap::Args)]
#[command(group(clap::ArgGroup::new("amount").required(true).args(["cf_digits", "steps"])))]
pub struct Args {
    /// Run until at least this many cf digits are fixed in total.
    #[arg(long)]
    pub cf_digits: Option<u64>,
    /// Run this many more steps.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Also emit the base-d expansion (repeatable).
    #[arg(long = "base")]
    pub bases: Vec<u32>,
    /// Continue from the checkpoint file instead of the initial brick.
    #[arg(long)]
    pub resume: bool,
}

/// One digit as printed: decimal for cf digits and bases above 36, one symbol otherwise.
pub fn symbol(d: u32, x: u32) -> String {
    if d <= 36 {
        char::from_digit(x, d).expect("digit below base").to_string()
    } else {
        x.to_string()
    }
}

fn widest(schedule: &Schedule) -> u32 {
    match schedule {
        Schedule::Standard => Schedule::Standard.t(u64::MAX),
        Schedule::Demo { t_steps } => 2 + t_steps.len() as u32,
    }
}

fn write_checkpoint(path: &Path, c: &Constructor) -> Result<(), String> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, checkpoint(&c.state, &c.cc)).map_err(|e| format!("{}: {e}", tmp.display()))?;
    std::fs::rename(&tmp, path).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn run(cfg: &Config, args: &Args) -> Result<Outcome, String> {
    let mut c = if args.resume {
        let path = cfg.checkpoint.as_ref().ok_or("--resume needs --checkpoint (or a checkpoint in the config)")?;
        let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let (state, cc) = restore(&bytes).map_err(|e| format!("{}: {e}", path.display()))?;
        Constructor::from_state(cc, state)
    } else {
        Constructor::from_state(cfg.cc.clone(), ConstructorState::initial())
    };

    let t_max = widest(&c.cc.schedule);
    for &d in &args.bases {
        if d < 2 {
            return Err(format!("base {d}: bases start at 2"));
        }
        if d > t_max {
            return Err(format!(
                "base {d} exceeds the brick width {t_max} reachable under this schedule \
                 (the standard schedule keeps t = 2; use --t-steps for a demo schedule)"
            ));
        }
    }
    if cfg.format == Format::Plain && args.bases.len() > 1 {
        return Err("plain output carries one stream; use --format framed for several bases".into());
    }

    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let plain_base = (cfg.format == Format::Plain).then(|| args.bases.first().copied()).flatten();
    let mut done = 0u64;
    let outcome = loop {
        let finished = match (args.cf_digits, args.steps) {
            (Some(n), _) => c.state.cf_emitted >= n,
            (_, Some(k)) => done >= k,
            _ => true,
        };
        if finished {
            break Outcome::Ok;
        }
        let cf_before = c.state.cf_emitted;
        let base_before = c.state.base_emitted.clone();
        let o = match c.step(cfg.budget) {
            Ok(o) => o,
            Err(e @ StepError::Budget { .. }) => {
                eprintln!("stopped: {e}");
                break Outcome::Budget;
            }
            Err(e) => return Err(e.to_string()),
        };
        done += 1;
        let written = (|| -> std::io::Result<()> {
            match (cfg.format, plain_base) {
                (Format::Plain, None) => {
                    for a in &o.cf_digits {
                        writeln!(out, "{a}")?;
                    }
                }
                (Format::Plain, Some(d)) => {
                    for &x in o.base_digits.get(&d).into_iter().flatten() {
                        writeln!(out, "{}", symbol(d, x))?;
                    }
                }
                (Format::Framed, _) => {
                    for (i, a) in o.cf_digits.iter().enumerate() {
                        writeln!(out, "cf\t{}\t{}\t{a}", o.step, cf_before + i as u64 + 1)?;
                    }
                    for &d in &args.bases {
                        let start = base_before.get(&d).copied().unwrap_or(0);
                        for (i, &x) in o.base_digits.get(&d).into_iter().flatten().enumerate() {
                            writeln!(out, "b{d}\t{}\t{}\t{}", o.step, start + i as u64 + 1, symbol(d, x))?;
                        }
                    }
                }
            }
            out.flush()
        })();
        match written {
            Ok(()) => {}
            // Reader closed the pipe.
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => break Outcome::Ok,
            Err(e) => return Err(e.to_string()),
        }
    };
    if let Some(path) = &cfg.checkpoint {
        write_checkpoint(path, &c)?;
    } else if matches!(outcome, Outcome::Budget) {
        eprintln!("no --checkpoint given; rerun with one to make the stop resumable");
    }
    Ok(outcome)
}
