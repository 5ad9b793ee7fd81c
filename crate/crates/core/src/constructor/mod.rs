//! The refinement algorithm: from the initial brick, repeatedly pick the leftmost refinement
//! with small discrepancy and emit the digits it fixes.

mod checkpoint;
mod probe;
mod schedule;
mod search;
mod verify;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::Rational;
use crate::brick::{extend_to_next_base, validate_brick, Brick, ConstructionConstants};
use crate::contfrac::CfWord;
use crate::discrepancy::BaseBlock;

pub use checkpoint::{checkpoint, restore, CheckpointError, CHECKPOINT_VERSION};
pub use probe::{candidate_endpoints, evaluate_candidate, leftmost_by_probing, probe_index_inside};
pub use schedule::{Schedule, ScheduleValues};
pub use search::{relative_digits, Infeasible, Level};
pub use verify::verify_refinement;

/// Instrumented counts of mathematical operations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    /// Relative cylinders visited by the search.
    pub nodes: u64,
    /// Candidates that reached the full length, base and ratio checks.
    pub leaves: u64,
    /// Convergent updates.
    pub digit_ops: u64,
    /// Base-d digits produced while checking candidates.
    pub base_ops: u64,
}

impl OpCounters {
    pub fn total(&self) -> u64 {
        self.nodes + self.leaves + self.digit_ops + self.base_ops
    }

    pub fn add(&mut self, other: &OpCounters) {
        self.nodes += other.nodes;
        self.leaves += other.leaves;
        self.digit_ops += other.digit_ops;
        self.base_ops += other.base_ops;
    }
}

/// Why a candidate was turned down.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rejection {
    Outside,
    Boundary,
    LengthWindow,
    CfDiscrepancy,
    BaseDiscrepancy { d: u32 },
    Containment { d: u32 },
    Ratio { d: u32 },
    Precision,
    Infeasible,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::Outside => write!(f, "outside"),
            Rejection::Boundary => write!(f, "boundary"),
            Rejection::LengthWindow => write!(f, "length-window"),
            Rejection::CfDiscrepancy => write!(f, "cf discrepancy"),
            Rejection::BaseDiscrepancy { d } => write!(f, "b-ary discrepancy (base {d})"),
            Rejection::Containment { d } => write!(f, "containment (base {d})"),
            Rejection::Ratio { d } => write!(f, "ratio (base {d})"),
            Rejection::Precision => write!(f, "precision cap"),
            Rejection::Infeasible => write!(f, "infeasible order"),
        }
    }
}

/// An accepted refinement: the relative cf word, the new base-d block of each constituent of
/// every refined `tau_d`, and the resulting brick.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refinement {
    pub word: CfWord,
    pub base_blocks: BTreeMap<u32, Vec<BaseBlock>>,
    pub brick: Brick,
    pub n: u64,
}

/// What the algorithm keeps between steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructorState {
    /// Index of the brick held: 1 for the initial brick.
    pub step: u64,
    pub brick: Brick,
    pub sigma_len: Rational,
    /// `z_cf - z_d` per base.
    pub offsets: BTreeMap<u32, Rational>,
    /// Number of cf digits fixed so far, `N(s)`.
    pub cf_emitted: u64,
    /// Number of base-d digits emitted so far.
    pub base_emitted: BTreeMap<u32, u64>,
    pub counters: OpCounters,
}

impl ConstructorState {
    pub fn initial() -> Self {
        let brick = Brick::initial();
        let mut s = ConstructorState {
            step: 1,
            sigma_len: brick.cf.length(),
            offsets: BTreeMap::new(),
            cf_emitted: 0,
            base_emitted: brick.bases.keys().map(|&d| (d, 0)).collect(),
            brick,
            counters: OpCounters::default(),
        };
        s.offsets = offsets_of(&s.brick);
        s
    }

    /// Left endpoint of the cf interval.
    pub fn z_cf(&self) -> Rational {
        self.brick.cf.lo()
    }

    /// Checks the redundant fields against the brick.
    pub fn is_consistent(&self) -> bool {
        self.sigma_len == self.brick.cf.length()
            && self.offsets == offsets_of(&self.brick)
            && self.cf_emitted == self.brick.cf.order
            && self.base_emitted.keys().eq(self.brick.bases.keys())
            && self
                .base_emitted
                .iter()
                .all(|(d, &k)| k as usize <= self.brick.bases[d].common_prefix().len())
    }
}

fn offsets_of(b: &Brick) -> BTreeMap<u32, Rational> {
    let z = b.cf.lo();
    b.bases.iter().map(|(&d, s)| (d, &z - s.lo())).collect()
}

/// Digits fixed by one step, with bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepOutput {
    /// Index of the brick produced.
    pub step: u64,
    pub t: u32,
    pub eps: Rational,
    /// Relative order requested by the schedule.
    pub n_scheduled: u64,
    /// Relative order actually used.
    pub n_used: u64,
    pub retries: u64,
    /// Why each skipped order was skipped, in order.
    pub skipped: Vec<Option<Infeasible>>,
    pub cf_digits: Vec<u64>,
    pub base_digits: BTreeMap<u32, Vec<u32>>,
    pub refinement: Refinement,
    pub counters: OpCounters,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("search budget of {budget} nodes exhausted at step {step}, relative order {n}")]
    Budget { step: u64, n: u64, budget: u64 },
    #[error("invalid construction constants")]
    InvalidConstants,
    #[error("state is inconsistent")]
    InvalidState,
}

/// Advances one step. Deterministic in `(state, cc)`; `budget` caps the search nodes of this
/// step, and on abort the input state remains the resumable one.
pub fn step(
    state: &ConstructorState,
    cc: &ConstructionConstants,
    budget: Option<u64>,
) -> Result<(ConstructorState, StepOutput), StepError> {
    if !cc.is_valid() {
        return Err(StepError::InvalidConstants);
    }
    let s = state.step + 1;
    let sv = cc.schedule.at(s, cc.n_start);
    if sv.t < state.brick.t {
        return Err(StepError::InvalidState);
    }
    let mut counters = OpCounters::default();
    let mut skipped = Vec::new();
    let mut n = sv.n;
    let refinement = loop {
        counters.nodes += 1;
        if budget.is_some_and(|b| counters.nodes > b) {
            return Err(StepError::Budget {
                step: s,
                n,
                budget: budget.unwrap_or(0),
            });
        }
        match Level::new(&state.brick, n, &sv.eps, cc) {
            Err(why) => skipped.push(Some(why)),
            Ok(level) => {
                let left = budget.map(|b| b.saturating_sub(counters.nodes));
                let mut local = OpCounters::default();
                let found = search::Dfs::new(&level, &mut local, left).run();
                counters.add(&local);
                match found {
                    Err(_) => {
                        return Err(StepError::Budget {
                            step: s,
                            n,
                            budget: budget.unwrap_or(0),
                        })
                    }
                    Ok(Some(r)) => break r,
                    Ok(None) => skipped.push(None),
                }
            }
        }
        n += 1;
    };

    let mut brick = refinement.brick.clone();
    while brick.t < sv.t {
        brick = extend_to_next_base(&brick);
    }
    debug_assert_eq!(validate_brick(&brick, cc), Ok(()));
    let mut refinement = refinement;
    refinement.brick = brick.clone();

    let mut base_emitted = BTreeMap::new();
    let mut base_digits = BTreeMap::new();
    for (&d, sd) in &brick.bases {
        let prefix = sd.common_prefix();
        let done = state.base_emitted.get(&d).copied().unwrap_or(0) as usize;
        base_digits.insert(d, prefix[done.min(prefix.len())..].to_vec());
        base_emitted.insert(d, prefix.len().max(done) as u64);
    }
    let mut total = state.counters;
    total.add(&counters);
    let next = ConstructorState {
        step: s,
        sigma_len: brick.cf.length(),
        offsets: offsets_of(&brick),
        cf_emitted: brick.cf.order,
        base_emitted,
        brick,
        counters: total,
    };
    let out = StepOutput {
        step: s,
        t: sv.t,
        eps: sv.eps,
        n_scheduled: sv.n,
        n_used: n,
        retries: skipped.len() as u64,
        skipped,
        cf_digits: refinement.word.digits().to_vec(),
        base_digits,
        refinement,
        counters,
    };
    Ok((next, out))
}

/// Stateful driver around [`step`].
#[derive(Clone, Debug)]
pub struct Constructor {
    pub cc: ConstructionConstants,
    pub state: ConstructorState,
}

impl Constructor {
    pub fn new(cc: ConstructionConstants) -> Self {
        Constructor {
            cc,
            state: ConstructorState::initial(),
        }
    }

    pub fn from_state(cc: ConstructionConstants, state: ConstructorState) -> Self {
        Constructor { cc, state }
    }

    pub fn step(&mut self, budget: Option<u64>) -> Result<StepOutput, StepError> {
        let (next, out) = step(&self.state, &self.cc, budget)?;
        self.state = next;
        Ok(out)
    }

    /// Steps until at least `target_cf_digits` cf digits are fixed, passing each step's output
    /// to `sink`.
    pub fn run_to_digits(
        &mut self,
        target_cf_digits: u64,
        budget: Option<u64>,
        mut sink: impl FnMut(&StepOutput),
    ) -> Result<(), StepError> {
        while self.state.cf_emitted < target_cf_digits {
            let out = self.step(budget)?;
            sink(&out);
        }
        Ok(())
    }

    /// Runs `k` more steps.
    pub fn run_steps(
        &mut self,
        k: u64,
        budget: Option<u64>,
        mut sink: impl FnMut(&StepOutput),
    ) -> Result<(), StepError> {
        for _ in 0..k {
            let out = self.step(budget)?;
            sink(&out);
        }
        Ok(())
    }
}

/// Runs from the initial brick until `target_cf_digits` cf digits are fixed; returns the cf
/// digit stream and the final state.
pub fn run(
    cc: &ConstructionConstants,
    target_cf_digits: u64,
) -> Result<(Vec<u64>, ConstructorState), StepError> {
    let mut c = Constructor::new(cc.clone());
    let mut digits = Vec::new();
    c.run_to_digits(target_cf_digits, None, |o| digits.extend_from_slice(&o.cf_digits))?;
    Ok((digits, c.state))
}
