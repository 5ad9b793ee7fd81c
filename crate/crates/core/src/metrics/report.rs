use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{serde_str, Rational, RealEnclosure};

pub const REPORT_VERSION: u32 = 1;
const FORMAT: &str = "cfnormal-report";

/// Exact lower and upper bounds of a certified value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    #[serde(with = "serde_str::rational")]
    pub lo: Rational,
    #[serde(with = "serde_str::rational")]
    pub hi: Rational,
}

impl Bounds {
    pub fn exact(r: Rational) -> Self {
        Bounds { lo: r.clone(), hi: r }
    }

    pub fn lo_f64(&self) -> f64 {
        to_f64(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        to_f64(&self.hi)
    }
}

impl From<&RealEnclosure> for Bounds {
    fn from(e: &RealEnclosure) -> Self {
        Bounds {
            lo: e.lo_rational(),
            hi: e.hi_rational(),
        }
    }
}

fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Outcome of one sampling or stream analysis: estimates next to the certified values they are
/// compared with, and the checks that can be asserted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub format: String,
    pub version: u32,
    pub kind: String,
    pub samples: u64,
    pub n: u64,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
    pub estimates: BTreeMap<String, f64>,
    pub certified: BTreeMap<String, Bounds>,
    pub checks: BTreeMap<String, bool>,
    pub trajectories: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("not a report: {0}")]
    Parse(String),
    #[error("report format {found:?} is not {FORMAT:?}")]
    Format { found: String },
    #[error("report version {found} is not supported (expected {REPORT_VERSION})")]
    Version { found: u32 },
}

impl SampleReport {
    pub fn new(kind: &str, samples: u64, n: u64, seed: u64) -> Self {
        SampleReport {
            format: FORMAT.to_string(),
            version: REPORT_VERSION,
            kind: kind.to_string(),
            samples,
            n,
            seed,
            params: BTreeMap::new(),
            estimates: BTreeMap::new(),
            certified: BTreeMap::new(),
            checks: BTreeMap::new(),
            trajectories: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.params.insert(key.to_string(), value.to_string());
    }

    pub fn estimate(&mut self, key: &str, value: f64) {
        self.estimates.insert(key.to_string(), value);
    }

    pub fn certify(&mut self, key: &str, value: Bounds) {
        self.certified.insert(key.to_string(), value);
    }

    pub fn check(&mut self, key: &str, ok: bool) -> bool {
        self.checks.insert(key.to_string(), ok);
        ok
    }

    /// Records whether estimate `est` lies within `tol` of every point of certified value `val`.
    pub fn check_within(&mut self, key: &str, est: &str, val: &str, tol: f64) -> bool {
        let ok = match (self.estimates.get(est), self.certified.get(val)) {
            (Some(&x), Some(b)) => (x - b.lo_f64()).abs() <= tol && (x - b.hi_f64()).abs() <= tol,
            _ => false,
        };
        self.check(key, ok)
    }

    /// All recorded checks hold (vacuously when there are none).
    pub fn passed(&self) -> bool {
        self.checks.values().all(|&b| b)
    }

    /// Line-oriented `key=value` text.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "kind={}", self.kind);
        let _ = writeln!(s, "samples={}", self.samples);
        let _ = writeln!(s, "n={}", self.n);
        let _ = writeln!(s, "seed={}", self.seed);
        for (k, v) in &self.params {
            let _ = writeln!(s, "param.{k}={v}");
        }
        for (k, v) in &self.estimates {
            let _ = writeln!(s, "estimate.{k}={v}");
        }
        for (k, b) in &self.certified {
            let _ = writeln!(s, "certified.{k}=[{:.12e}, {:.12e}]", b.lo_f64(), b.hi_f64());
        }
        for (k, v) in &self.checks {
            let _ = writeln!(s, "check.{k}={}", if *v { "PASS" } else { "FAIL" });
        }
        let _ = writeln!(s, "result={}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        #[derive(Deserialize)]
        struct Header {
            format: String,
            version: u32,
        }
        let h: Header = serde_json::from_str(text).map_err(|e| ReportError::Parse(e.to_string()))?;
        if h.format != FORMAT {
            return Err(ReportError::Format { found: h.format });
        }
        if h.version != REPORT_VERSION {
            return Err(ReportError::Version { found: h.version });
        }
        serde_json::from_str(text).map_err(|e| ReportError::Parse(e.to_string()))
    }

    /// Trajectories as CSV with columns `index` and one per series; shorter series leave blanks.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index");
        for k in self.trajectories.keys() {
            s.push(',');
            s.push_str(k);
        }
        s.push('\n');
        let rows = self.trajectories.values().map(Vec::len).max().unwrap_or(0);
        for i in 0..rows {
            let _ = write!(s, "{}", i + 1);
            for v in self.trajectories.values() {
                s.push(',');
                if let Some(x) = v.get(i) {
                    let _ = write!(s, "{x}");
                }
            }
            s.push('\n');
        }
        s
    }
}
