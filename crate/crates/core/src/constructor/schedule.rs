use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::arith::{enclose_exp, Cmp3, PrecisionPolicy, Rational};

/// Block length `t(s)`, discrepancy `eps(s) = 1/t(s)` and relative order `n(s)` per step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Schedule {
    /// `t(s) = max(2, floor(log(s)^(1/5)))`.
    Standard,
    /// Not the standard schedule: `t(s) = 2 + #{x in t_steps : x <= s}`, so that more bases
    /// enter at desk scale. `t_steps` must be strictly increasing with entries `>= 2`.
    Demo { t_steps: Vec<u64> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleValues {
    pub t: u32,
    pub eps: Rational,
    pub n: u64,
}

impl Schedule {
    pub fn is_valid(&self) -> bool {
        match self {
            Schedule::Standard => true,
            Schedule::Demo { t_steps } => {
                t_steps.windows(2).all(|w| w[0] < w[1]) && t_steps.iter().all(|&x| x >= 2)
            }
        }
    }

    pub fn t(&self, s: u64) -> u32 {
        assert!(s >= 1, "steps start at 1");
        match self {
            Schedule::Standard => {
                // floor(log(s)^(1/5)) >= k  iff  s >= e^(k^5).
                let mut t = 2;
                while s_at_least_exp(s, (t as u64 + 1).pow(5)) {
                    t += 1;
                }
                t
            }
            Schedule::Demo { t_steps } => 2 + t_steps.iter().filter(|&&x| x <= s).count() as u32,
        }
    }

    pub fn eps(&self, s: u64) -> Rational {
        Rational::new(BigInt::from(1), BigInt::from(self.t(s)))
    }

    /// `floor(log s) + n_start`.
    pub fn n(&self, s: u64, n_start: u32) -> u64 {
        assert!(s >= 1, "steps start at 1");
        let mut k = 0;
        while s_at_least_exp(s, k + 1) {
            k += 1;
        }
        k + n_start as u64
    }

    pub fn at(&self, s: u64, n_start: u32) -> ScheduleValues {
        ScheduleValues {
            t: self.t(s),
            eps: self.eps(s),
            n: self.n(s, n_start),
        }
    }
}

/// `s >= e^k` for `k >= 1` (never a tie, since `e^k` is irrational).
fn s_at_least_exp(s: u64, k: u64) -> bool {
    // e^k > 2^64 once k >= 45.
    if k >= 45 {
        return false;
    }
    let x = Rational::from_integer(BigInt::from(k));
    let policy = PrecisionPolicy::default();
    policy.compare(|bits| enclose_exp(&x, bits), &Rational::from_integer(BigInt::from(s)))
        == Cmp3::Less
}
