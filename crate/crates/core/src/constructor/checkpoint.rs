//! Versioned JSON checkpoints.
//!
//! Fields: `format`, `version`, `constants`, `step`, `t`, `cf` (order and the convergents
//! `p_prev, p_cur, q_prev, q_cur`), `sigma_len`, `bases` (one entry per base with `base`,
//! `order`, `start`, `span`, `offset = z_cf - z_d` and `emitted`), `cf_emitted`, `counters`.
//! Integers are decimal strings and rationals are `"num/den"`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{serde_str, Rational};
use crate::brick::{validate_brick, Brick, ConstructionConstants, DaryInterval};
use crate::contfrac::{CfInterval, Convergents};

use super::{ConstructorState, OpCounters};

pub const CHECKPOINT_VERSION: u32 = 1;
const FORMAT: &str = "cfnormal-checkpoint";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint: {0}")]
    Parse(String),
    #[error("checkpoint format {found:?} is not {FORMAT:?}")]
    Format { found: String },
    #[error("checkpoint version {found} is not supported (expected {CHECKPOINT_VERSION})")]
    Version { found: u32 },
    #[error("checkpoint is internally inconsistent: {0}")]
    Inconsistent(String),
}

mod dec {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct CfRecord {
    #[serde(with = "dec")]
    order: u64,
    #[serde(with = "serde_str::bigint")]
    p_prev: BigInt,
    #[serde(with = "serde_str::bigint")]
    p_cur: BigInt,
    #[serde(with = "serde_str::bigint")]
    q_prev: BigInt,
    #[serde(with = "serde_str::bigint")]
    q_cur: BigInt,
}

#[derive(Serialize, Deserialize)]
struct BaseRecord {
    base: u32,
    #[serde(with = "dec")]
    order: u64,
    #[serde(with = "serde_str::bigint")]
    start: BigInt,
    span: u8,
    #[serde(with = "serde_str::rational")]
    offset: Rational,
    #[serde(with = "dec")]
    emitted: u64,
}

#[derive(Serialize, Deserialize)]
struct CounterRecord {
    #[serde(with = "dec")]
    nodes: u64,
    #[serde(with = "dec")]
    leaves: u64,
    #[serde(with = "dec")]
    digit_ops: u64,
    #[serde(with = "dec")]
    base_ops: u64,
}

#[derive(Serialize, Deserialize)]
struct Record {
    format: String,
    version: u32,
    constants: ConstructionConstants,
    #[serde(with = "dec")]
    step: u64,
    t: u32,
    cf: CfRecord,
    #[serde(with = "serde_str::rational")]
    sigma_len: Rational,
    bases: Vec<BaseRecord>,
    #[serde(with = "dec")]
    cf_emitted: u64,
    counters: CounterRecord,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

pub fn checkpoint(state: &ConstructorState, cc: &ConstructionConstants) -> Vec<u8> {
    let conv = &state.brick.cf.conv;
    let rec = Record {
        format: FORMAT.to_string(),
        version: CHECKPOINT_VERSION,
        constants: cc.clone(),
        step: state.step,
        t: state.brick.t,
        cf: CfRecord {
            order: state.brick.cf.order,
            p_prev: conv.p_prev.clone(),
            p_cur: conv.p_cur.clone(),
            q_prev: conv.q_prev.clone(),
            q_cur: conv.q_cur.clone(),
        },
        sigma_len: state.sigma_len.clone(),
        bases: state
            .brick
            .bases
            .iter()
            .map(|(&d, s)| BaseRecord {
                base: d,
                order: s.order(),
                start: s.start().clone(),
                span: s.span(),
                offset: state.offsets[&d].clone(),
                emitted: state.base_emitted[&d],
            })
            .collect(),
        cf_emitted: state.cf_emitted,
        counters: CounterRecord {
            nodes: state.counters.nodes,
            leaves: state.counters.leaves,
            digit_ops: state.counters.digit_ops,
            base_ops: state.counters.base_ops,
        },
    };
    let mut out = serde_json::to_vec_pretty(&rec).expect("checkpoint serializes");
    out.push(b'\n');
    out
}

pub fn restore(bytes: &[u8]) -> Result<(ConstructorState, ConstructionConstants), CheckpointError> {
    let header: Header =
        serde_json::from_slice(bytes).map_err(|e| CheckpointError::Parse(e.to_string()))?;
    if header.format != FORMAT {
        return Err(CheckpointError::Format {
            found: header.format,
        });
    }
    if header.version != CHECKPOINT_VERSION {
        return Err(CheckpointError::Version {
            found: header.version,
        });
    }
    let rec: Record =
        serde_json::from_slice(bytes).map_err(|e| CheckpointError::Parse(e.to_string()))?;
    let bad = |m: &str| CheckpointError::Inconsistent(m.to_string());

    let conv = Convergents {
        p_prev: rec.cf.p_prev,
        p_cur: rec.cf.p_cur,
        q_prev: rec.cf.q_prev,
        q_cur: rec.cf.q_cur,
    };
    let det = conv.determinant();
    let expected = if rec.cf.order.is_multiple_of(2) { -BigInt::one() } else { BigInt::one() };
    if det != expected || !conv.q_cur.is_positive() || conv.q_prev.is_negative() {
        return Err(bad("convergents are not those of a cf word of the stated order"));
    }
    let mut bases = BTreeMap::new();
    let mut offsets = BTreeMap::new();
    let mut emitted = BTreeMap::new();
    for b in rec.bases {
        let s = DaryInterval::new(b.base, b.order, b.start, b.span)
            .map_err(|e| CheckpointError::Inconsistent(e.to_string()))?;
        bases.insert(b.base, s);
        offsets.insert(b.base, b.offset);
        emitted.insert(b.base, b.emitted);
    }
    let brick = Brick {
        t: rec.t,
        cf: CfInterval {
            order: rec.cf.order,
            conv,
        },
        bases,
    };
    if !rec.constants.is_valid() {
        return Err(bad("construction constants"));
    }
    validate_brick(&brick, &rec.constants).map_err(|v| {
        CheckpointError::Inconsistent(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "))
    })?;
    let state = ConstructorState {
        step: rec.step,
        brick,
        sigma_len: rec.sigma_len,
        offsets,
        cf_emitted: rec.cf_emitted,
        base_emitted: emitted,
        counters: OpCounters {
            nodes: rec.counters.nodes,
            leaves: rec.counters.leaves,
            digit_ops: rec.counters.digit_ops,
            base_ops: rec.counters.base_ops,
        },
    };
    if state.step == 0 || !state.is_consistent() {
        return Err(bad("stored lengths, offsets or digit counts disagree with the brick"));
    }
    Ok((state, rec.constants))
}
