//! The probe route: subdivide `sigma_cf` into equal parts and test each interior endpoint.
//! Slower than the cylinder search; kept as its independent counterpart.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use crate::arith::Rational;
use crate::brick::{ConstructionConstants, WindowFactors};

use super::search::{relative_digits, Level};
use super::{ConstructorState, OpCounters, Refinement, Rejection};

/// Number of equal parts `T` for relative order `n`.
fn parts(n: u64, cc: &ConstructionConstants) -> BigInt {
    WindowFactors::new(n, &cc.c, cc.precision.start_bits).parts()
}

/// Interior endpoints `z_cf + |sigma_cf| j / T`, `j = 1..T-1`, in increasing order.
pub fn candidate_endpoints(
    state: &ConstructorState,
    n: u64,
    cc: &ConstructionConstants,
) -> impl Iterator<Item = Rational> {
    let t = parts(n, cc);
    let z = state.z_cf();
    let step = &state.sigma_len / Rational::from_integer(t.clone());
    let count = (t - BigInt::one()).to_u64().expect("probe count fits in 64 bits");
    (1..=count).map(move |j| &z + &step * Rational::from_integer(BigInt::from(j)))
}

/// The index `j` of the first probe to the right of `lo`.
pub fn probe_index_inside(state: &ConstructorState, lo: &Rational, n: u64, cc: &ConstructionConstants) -> BigInt {
    let t = Rational::from_integer(parts(n, cc));
    ((lo - state.z_cf()) * t / &state.sigma_len).floor().to_integer() + BigInt::one()
}

/// Tests the relative cylinder of order `n` containing `e` against every refinement condition
/// (width `t` of the current brick, discrepancy `eps`).
pub fn evaluate_candidate(
    state: &ConstructorState,
    e: &Rational,
    n: u64,
    eps: &Rational,
    cc: &ConstructionConstants,
) -> Result<Refinement, Rejection> {
    let level = Level::new(&state.brick, n, eps, cc).map_err(|_| Rejection::Infeasible)?;
    let mut counters = OpCounters::default();
    evaluate_with(&level, state, e, &mut counters)
}

fn evaluate_with(
    level: &Level,
    state: &ConstructorState,
    e: &Rational,
    counters: &mut OpCounters,
) -> Result<Refinement, Rejection> {
    let digits = relative_digits(&state.brick.cf, e, level.n as usize)?;
    counters.digit_ops += digits.len() as u64;
    if !level.cf_counts_ok(&digits) {
        return Err(Rejection::CfDiscrepancy);
    }
    let conv = state.brick.cf.conv.extended(&digits);
    level.evaluate_leaf(&digits, &conv, counters)
}

/// Scans the probes left to right and returns the first acceptance, with the probe index.
pub fn leftmost_by_probing(
    state: &ConstructorState,
    n: u64,
    eps: &Rational,
    cc: &ConstructionConstants,
) -> Option<(u64, Refinement)> {
    let level = Level::new(&state.brick, n, eps, cc).ok()?;
    let mut counters = OpCounters::default();
    let mut last: Option<crate::contfrac::Convergents> = None;
    for (i, e) in candidate_endpoints(state, n, cc).enumerate() {
        // Consecutive probes in the same cylinder share one evaluation.
        if let Some(c) = &last {
            let (lo, hi) = c.endpoints();
            if lo < e && e < hi {
                continue;
            }
        }
        match evaluate_with(&level, state, &e, &mut counters) {
            Ok(r) => return Some((i as u64 + 1, r)),
            Err(Rejection::Boundary) => last = None,
            Err(_) => {
                last = relative_digits(&state.brick.cf, &e, n as usize)
                    .ok()
                    .map(|d| state.brick.cf.conv.extended(&d));
            }
        }
    }
    None
}
