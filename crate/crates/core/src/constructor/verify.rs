//! Re-derives every condition of an accepted refinement from exact endpoints, using the
//! discrepancy module's functionals rather than the search's incremental counts.

use num_bigint::BigInt;

use crate::arith::Rational;
use crate::brick::{choose_m_d, validate_brick, Brick, ConstructionConstants, WindowFactors};
use crate::discrepancy::{bary_discrepancy, cf_discrepancy_below, BaseBlock, CfBlock};

use super::Refinement;

/// Checks that `r` refines `prev` with discrepancy less than `eps`, for the width of `prev`.
/// Returns the list of failed conditions.
pub fn verify_refinement(
    prev: &Brick,
    r: &Refinement,
    eps: &Rational,
    cc: &ConstructionConstants,
) -> Result<(), Vec<String>> {
    let mut bad = Vec::new();
    let t = prev.t;
    let n = r.word.len() as u64;
    let tau = &r.brick;

    if tau.cf != prev.cf.extend(r.word.digits()) {
        bad.push("cf interval is not the extension of the old one by the word".to_string());
    }
    if tau.t < t {
        bad.push(format!("width shrank from {t} to {}", tau.t));
    }
    let (slo, shi) = prev.cf.endpoints();
    let (tlo, thi) = tau.cf.endpoints();
    if !(slo <= tlo && thi <= shi) {
        bad.push("tau_cf not inside sigma_cf".to_string());
    }

    // Length window, at a precision independent of the search's.
    let ratio = (&thi - &tlo) / (&shi - &slo);
    let f = WindowFactors::new(n, &cc.c, cc.precision.start_bits * 2);
    if !(f.lower.hi_rational() <= ratio && ratio <= f.upper.lo_rational()) {
        bad.push(format!("length window: ratio {ratio} outside [{}, {}]", f.lower, f.upper));
    }

    // cf blocks of length t with digits <= t.
    let theta = eps - Rational::new(BigInt::from(t - 1), BigInt::from(n));
    for v in CfBlock::all_bounded(t as usize, t as u64) {
        if !cf_discrepancy_below(&r.word, &v, &theta, &cc.precision) {
            bad.push(format!("cf discrepancy of block {:?} not below {theta}", v.digits()));
        }
    }

    for d in 2..=t {
        let (Some(sd), Some(td)) = (prev.bases.get(&d), tau.bases.get(&d)) else {
            bad.push(format!("base {d} missing"));
            continue;
        };
        if !(sd.lo() <= td.lo() && td.hi() <= sd.hi()) {
            bad.push(format!("tau_{d} not inside sigma_{d}"));
        }
        if td.order() <= sd.order() {
            bad.push(format!("tau_{d} not deeper than sigma_{d}"));
            continue;
        }
        let m = choose_m_d(&(&shi - &slo), n, d, cc);
        if td.order() != m {
            bad.push(format!("tau_{d} has order {} but m_{d} = {m}", td.order()));
        }
        let o = sd.order() as usize;
        let parents: Vec<Vec<u32>> = sd.constituents().iter().map(|i| sd.index_digits(i)).collect();
        let blocks = r.base_blocks.get(&d);
        for (k, idx) in td.constituents().iter().enumerate() {
            let digits = td.index_digits(idx);
            if !parents.iter().any(|p| p[..] == digits[..o]) {
                bad.push(format!("constituent {idx} of tau_{d} not under sigma_{d}"));
                continue;
            }
            let block = BaseBlock::new(d, digits[o..].to_vec()).expect("digits below base");
            if blocks.and_then(|b| b.get(k)) != Some(&block) {
                bad.push(format!("recorded base-{d} block {k} differs from the interval"));
            }
            match bary_discrepancy(&block, block.len()) {
                Ok(disc) if disc < *eps => {}
                Ok(disc) => bad.push(format!("base-{d} discrepancy {disc} not below {eps}")),
                Err(e) => bad.push(format!("base-{d} block: {e}")),
            }
        }
    }

    if let Err(v) = validate_brick(tau, cc) {
        bad.extend(v.iter().map(|x| x.to_string()));
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad)
    }
}
