use std::io::Read;
use std::path::PathBuf;

use cfnormal::metrics::{stream_stats, SampleReport, Stream};
use cfnormal::{BaseBlock, CfBlock, CfWord};

use crate::config::Config;
use crate::Outcome;

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Digit stream file, plain or framed; `-` reads standard input.
    pub input: PathBuf,
    /// Cf block whose frequency to follow, e.g. 1,2 (repeatable; default 1).
    #[arg(long = "block")]
    pub blocks: Vec<String>,
    /// Treat the input as a base-d stream.
    #[arg(long)]
    pub base: Option<u32>,
    /// Report format.
    #[arg(long, default_value = "text")]
    pub report: ReportFormat,
}

pub fn print_report(r: &SampleReport, f: ReportFormat) {
    match f {
        ReportFormat::Text => print!("{}", r.to_key_value()),
        ReportFormat::Csv => print!("{}", r.to_csv()),
        ReportFormat::Json => println!("{}", r.to_json()),
    }
}

/// Tokens of the requested stream: the last field of framed lines tagged `cf` or `b<d>`, or
/// every whitespace- or comma-separated token of plain input.
fn tokens(text: &str, base: Option<u32>) -> Vec<String> {
    let tag = base.map_or("cf".to_string(), |d| format!("b{d}"));
    let framed = |l: &str| {
        let f: Vec<&str> = l.split_whitespace().collect();
        (f.len() == 4 && (f[0] == "cf" || f[0].starts_with('b'))).then(|| (f[0] == tag, f[3].to_string()))
    };
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if !lines.is_empty() && lines.iter().all(|l| framed(l).is_some()) {
        return lines.iter().filter_map(|l| framed(l)).filter(|(m, _)| *m).map(|(_, t)| t).collect();
    }
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_cf(toks: &[String]) -> Result<CfWord, String> {
    let digits = toks
        .iter()
        .map(|t| t.parse::<u64>().map_err(|_| format!("malformed cf digit {t:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    CfWord::new(digits).map_err(|e| e.to_string())
}

fn parse_base(toks: &[String], d: u32) -> Result<BaseBlock, String> {
    let mut digits = Vec::new();
    for t in toks {
        if d <= 36 {
            for ch in t.chars() {
                digits.push(ch.to_digit(d).ok_or_else(|| format!("malformed base-{d} symbol {ch:?}"))?);
            }
        } else {
            digits.push(t.parse::<u32>().map_err(|_| format!("malformed base-{d} digit {t:?}"))?);
        }
    }
    BaseBlock::new(d, digits).map_err(|e| e.to_string())
}

pub fn parse_block(s: &str) -> Result<CfBlock, String> {
    let d = s
        .split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| format!("malformed block {s:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    CfBlock::new(d).map_err(|e| format!("block {s:?}: {e}"))
}

pub fn run(_cfg: &Config, args: &Args) -> Result<Outcome, String> {
    let mut text = String::new();
    if args.input.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map_err(|e| e.to_string())?;
    } else {
        text = std::fs::read_to_string(&args.input).map_err(|e| format!("{}: {e}", args.input.display()))?;
    }
    let toks = tokens(&text, args.base);
    if toks.is_empty() {
        return Err("empty input stream".into());
    }
    let report = match args.base {
        Some(d) if d < 2 => return Err(format!("base {d}: bases start at 2")),
        Some(d) => {
            let u = parse_base(&toks, d)?;
            stream_stats(Stream::Base(&u), &[]).map_err(|e| e.to_string())?
        }
        None => {
            let w = parse_cf(&toks)?;
            let blocks = if args.blocks.is_empty() {
                vec![CfBlock::new(vec![1]).expect("nonempty")]
            } else {
                args.blocks.iter().map(|b| parse_block(b)).collect::<Result<_, _>>()?
            };
            stream_stats(Stream::Cf(&w), &blocks).map_err(|e| e.to_string())?
        }
    };
    print_report(&report, args.report);
    Ok(Outcome::Ok)
}
