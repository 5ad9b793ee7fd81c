//! Occurrence counting and discrepancy functionals for cf words and base-b blocks.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{enclose_exp, Cmp3, PrecisionPolicy, Rational, RealEnclosure};
use crate::contfrac::{cylinder_measure, CfWord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiscrepancyError {
    #[error("block must be nonempty with positive digits")]
    BadCfBlock,
    #[error("base must be at least 2")]
    BadBase,
    #[error("digit {digit} out of range for base {base}")]
    DigitOutOfRange { digit: u32, base: u32 },
    #[error("prefix length {n} out of range 1..={len}")]
    PrefixOutOfRange { n: usize, len: usize },
    #[error("parameters violate 6/k <= eps <= 1/b")]
    ParameterRange,
    #[error("enumeration of {0} blocks exceeds the 2^24 guard")]
    EnumerationTooLarge(u128),
}

/// A nonempty block `v_1..v_k` of positive integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CfBlock(Vec<u64>);

impl CfBlock {
    pub fn new(digits: Vec<u64>) -> Result<Self, DiscrepancyError> {
        if digits.is_empty() || digits.contains(&0) {
            return Err(DiscrepancyError::BadCfBlock);
        }
        Ok(CfBlock(digits))
    }

    pub fn digits(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_word(&self) -> CfWord {
        CfWord::new(self.0.clone()).expect("block digits are positive")
    }

    /// All `t^len` blocks of length `len` with digits in `1..=t`, in lexicographic order.
    pub fn all_bounded(len: usize, t: u64) -> Vec<CfBlock> {
        let mut out = Vec::new();
        let mut cur = vec![1u64; len];
        loop {
            out.push(CfBlock(cur.clone()));
            let mut i = len;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] < t {
                    cur[i] += 1;
                    for c in &mut cur[i + 1..] {
                        *c = 1;
                    }
                    break;
                }
            }
        }
    }
}

/// A finite block of base-`b` digits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BaseBlock {
    base: u32,
    digits: Vec<u32>,
}

impl BaseBlock {
    pub fn new(base: u32, digits: Vec<u32>) -> Result<Self, DiscrepancyError> {
        if base < 2 {
            return Err(DiscrepancyError::BadBase);
        }
        if let Some(&digit) = digits.iter().find(|&&x| x >= base) {
            return Err(DiscrepancyError::DigitOutOfRange { digit, base });
        }
        Ok(BaseBlock { base, digits })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn concat(&self, other: &BaseBlock) -> BaseBlock {
        assert_eq!(self.base, other.base, "concatenating blocks of different bases");
        let mut digits = self.digits.clone();
        digits.extend_from_slice(&other.digits);
        BaseBlock {
            base: self.base,
            digits,
        }
    }

    pub fn prefix(&self, n: usize) -> BaseBlock {
        BaseBlock {
            base: self.base,
            digits: self.digits[..n.min(self.digits.len())].to_vec(),
        }
    }

    /// Parses digits written as `0-9a-z` symbols (base <= 36) or comma-separated integers.
    pub fn parse(base: u32, text: &str) -> Result<Self, DiscrepancyError> {
        let digits: Vec<u32> = if text.contains(',') || base > 36 {
            text.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u32>().map_err(|_| DiscrepancyError::BadBase))
                .collect::<Result<_, _>>()?
        } else {
            text.chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| c.to_digit(36).ok_or(DiscrepancyError::BadBase))
                .collect::<Result<_, _>>()?
        };
        BaseBlock::new(base, digits)
    }
}

/// Number of (overlapping) windows of `w` equal to `v`.
pub fn occurrences(w: &CfWord, v: &CfBlock) -> usize {
    let (w, v) = (w.digits(), v.digits());
    if v.len() > w.len() {
        return 0;
    }
    w.windows(v.len()).filter(|win| *win == v).count()
}

/// `|occurrences(w, v)/|w| - mu(I_v)|`.
pub fn cf_discrepancy(w: &CfWord, v: &CfBlock, precision_bits: u32) -> RealEnclosure {
    assert!(!w.is_empty(), "cf discrepancy of the empty word");
    let freq = Rational::new(BigInt::from(occurrences(w, v)), BigInt::from(w.len()));
    cylinder_measure(&v.as_word(), precision_bits)
        .neg()
        .add_rational(&freq)
        .abs()
}

/// Certifies `cf_discrepancy(w, v) < bound`, escalating precision on overlap.
pub fn cf_discrepancy_below(
    w: &CfWord,
    v: &CfBlock,
    bound: &Rational,
    policy: &PrecisionPolicy,
) -> bool {
    policy.certify_less(|bits| cf_discrepancy(w, v, bits), bound)
}

/// Exact `max_s |#{j <= n : u_j = s}/n - 1/b|`.
pub fn bary_discrepancy(u: &BaseBlock, n: usize) -> Result<Rational, DiscrepancyError> {
    if n == 0 || n > u.len() {
        return Err(DiscrepancyError::PrefixOutOfRange { n, len: u.len() });
    }
    let mut counts = vec![0u64; u.base as usize];
    for &d in &u.digits[..n] {
        counts[d as usize] += 1;
    }
    Ok(discrepancy_of_counts(&counts, n as u64))
}

/// Maximum deviation of digit counts over `n` symbols from the uniform frequency.
pub fn discrepancy_of_counts(counts: &[u64], n: u64) -> Rational {
    let b = counts.len() as u64;
    // |c/n - 1/b| = |b c - n| / (b n)
    let worst = counts
        .iter()
        .map(|&c| (b as i128 * c as i128 - n as i128).unsigned_abs())
        .max()
        .unwrap_or(0);
    Rational::new(BigInt::from(worst), BigInt::from(b) * BigInt::from(n))
}

/// `true` iff some distribution of `n` digits over `b` symbols has discrepancy `< eps`.
pub fn balanced_block_exists(b: u32, n: u64, eps: &Rational) -> bool {
    if n == 0 {
        return false;
    }
    let counts: Vec<u64> = (0..b as u64)
        .map(|i| n / b as u64 + u64::from(i < n % b as u64))
        .collect();
    discrepancy_of_counts(&counts, n) < *eps
}

/// Exhaustive count of length-`k` base-`b` blocks with discrepancy `>= eps`, paired with an
/// enclosure of `2 b^(k+1) e^(-b eps^2 k / 6)`.
pub fn hw_bad_count(
    b: u32,
    k: usize,
    eps: &Rational,
) -> Result<(u64, RealEnclosure), DiscrepancyError> {
    if b < 2 {
        return Err(DiscrepancyError::BadBase);
    }
    let six_over_k = Rational::new(BigInt::from(6), BigInt::from(k.max(1)));
    let inv_b = Rational::new(BigInt::one(), BigInt::from(b));
    if k == 0 || *eps < six_over_k || *eps > inv_b {
        return Err(DiscrepancyError::ParameterRange);
    }
    let total = (b as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if total > 1 << 24 {
        return Err(DiscrepancyError::EnumerationTooLarge(total));
    }

    // Odometer over all blocks, maintaining digit counts incrementally.
    let mut digits = vec![0u32; k];
    let mut counts = vec![0u64; b as usize];
    counts[0] = k as u64;
    let mut bad = 0u64;
    loop {
        if discrepancy_of_counts(&counts, k as u64) >= *eps {
            bad += 1;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return Ok((bad, hw_bound(b, k, eps, 64)));
            }
            i -= 1;
            counts[digits[i] as usize] -= 1;
            if digits[i] + 1 < b {
                digits[i] += 1;
                counts[digits[i] as usize] += 1;
                break;
            }
            digits[i] = 0;
            counts[0] += 1;
        }
    }
}

/// Enclosure of `2 b^(k+1) e^(-b eps^2 k / 6)`.
pub fn hw_bound(b: u32, k: usize, eps: &Rational, bits: u32) -> RealEnclosure {
    let expo = -(eps * eps * Rational::from_integer(BigInt::from(b as u64 * k as u64)))
        / Rational::from_integer(BigInt::from(6));
    let scale = Rational::from_integer(BigInt::from(2) * BigInt::from(b).pow(k as u32 + 1));
    enclose_exp(&expo, bits + 16).mul_rational(&scale)
}

/// Items of the cf-discrepancy composition bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConcatItem {
    /// Both parts have small discrepancy, so the concatenation does.
    One,
    /// A short suffix at most doubles the discrepancy of every prefix of the concatenation.
    TwoA,
    /// A short prefix at most doubles the discrepancy.
    TwoB,
}

fn lt(policy: &PrecisionPolicy, f: impl FnMut(u32) -> RealEnclosure, bound: &Rational) -> bool {
    policy.compare(f, bound) == Cmp3::Less
}

/// Hypotheses of the cf composition bound for `x` (length n), `u` (length s), block `v`.
/// Uncertain comparisons count as not satisfied.
pub fn dcf_hypotheses(x: &CfWord, u: &CfWord, v: &CfBlock, eps: &Rational, item: ConcatItem) -> bool {
    let policy = PrecisionPolicy::default();
    if x.is_empty() || u.is_empty() || !eps.is_positive() || *eps >= Rational::one() {
        return false;
    }
    if !lt(&policy, |b| cf_discrepancy(x, v, b), eps) {
        return false;
    }
    let (n, s) = (x.len() as i64, u.len() as i64);
    match item {
        ConcatItem::One => {
            let bound = eps - Rational::new(BigInt::from(v.len() as i64 - 1), BigInt::from(s));
            lt(&policy, |b| cf_discrepancy(u, v, b), &bound)
        }
        ConcatItem::TwoA | ConcatItem::TwoB => Rational::new(s.into(), n.into()) < *eps,
    }
}

/// Conclusion of the cf composition bound; `true` iff it holds (certified).
pub fn verify_dcf_concat(x: &CfWord, u: &CfWord, v: &CfBlock, eps: &Rational, item: ConcatItem) -> bool {
    let policy = PrecisionPolicy::default();
    let two_eps = eps * Rational::from_integer(BigInt::from(2));
    match item {
        ConcatItem::One => {
            let xu = crate::contfrac::concat(x, u);
            lt(&policy, |b| cf_discrepancy(&xu, v, b), eps)
        }
        ConcatItem::TwoA => {
            let xu = crate::contfrac::concat(x, u);
            (1..=u.len()).all(|l| {
                let prefix = xu.prefix(x.len() + l);
                lt(&policy, |b| cf_discrepancy(&prefix, v, b), &two_eps)
            })
        }
        ConcatItem::TwoB => {
            let ux = crate::contfrac::concat(u, x);
            lt(&policy, |b| cf_discrepancy(&ux, v, b), &two_eps)
        }
    }
}

/// Hypotheses of the base-b composition bound. For `One`, both `u` and `v` are balanced; for the
/// second item `v` is balanced and `|u|/|v| < eps`.
pub fn d_hypotheses(u: &BaseBlock, v: &BaseBlock, eps: &Rational, item: ConcatItem) -> bool {
    if u.is_empty() || v.is_empty() || !eps.is_positive() || u.base() != v.base() {
        return false;
    }
    let dv = bary_discrepancy(v, v.len()).expect("nonempty");
    match item {
        ConcatItem::One => bary_discrepancy(u, u.len()).expect("nonempty") < *eps && dv < *eps,
        ConcatItem::TwoA | ConcatItem::TwoB => {
            dv < *eps && Rational::new(BigInt::from(u.len()), BigInt::from(v.len())) < *eps
        }
    }
}

/// Conclusion of the base-b composition bound.
pub fn verify_d_concat(u: &BaseBlock, v: &BaseBlock, eps: &Rational, item: ConcatItem) -> bool {
    let two_eps = eps * Rational::from_integer(BigInt::from(2));
    match item {
        ConcatItem::One => {
            let uv = u.concat(v);
            bary_discrepancy(&uv, uv.len()).expect("nonempty") < *eps
        }
        ConcatItem::TwoA => {
            let vu = v.concat(u);
            (0..=u.len()).all(|l| bary_discrepancy(&vu, v.len() + l).expect("in range") < two_eps)
        }
        ConcatItem::TwoB => {
            let uv = u.concat(v);
            bary_discrepancy(&uv, uv.len()).expect("nonempty") < two_eps
        }
    }
}

/// Certified range `[cmin, cmax]` of counts `c` with `|c/n - mu| < theta` for every value of
/// `mu` inside the enclosure. `None` when no count qualifies.
pub fn count_range(mu: &RealEnclosure, theta: &Rational, n: u64) -> Option<(u64, u64)> {
    let n_r = Rational::from_integer(BigInt::from(n));
    // c > (mu.hi - theta) n  and  c < (mu.lo + theta) n
    let below = (mu.hi_rational() - theta) * &n_r;
    let above = (mu.lo_rational() + theta) * &n_r;
    let cmin = if below.is_negative() {
        BigInt::zero()
    } else {
        below.floor().to_integer() + BigInt::one()
    };
    let cmax = (above.ceil().to_integer() - BigInt::one()).min(BigInt::from(n));
    if cmax.is_negative() || cmin > cmax {
        return None;
    }
    Some((u64::try_from(cmin).ok()?, u64::try_from(cmax).ok()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational;

    fn w(d: &[u64]) -> CfWord {
        CfWord::new(d.to_vec()).unwrap()
    }

    fn blk(d: &[u64]) -> CfBlock {
        CfBlock::new(d.to_vec()).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        rational(n, d).unwrap()
    }

    #[test]
    fn occurrence_examples() {
        assert_eq!(occurrences(&w(&[1, 2, 1, 2]), &blk(&[1])), 2);
        assert_eq!(occurrences(&w(&[1, 2, 1, 2]), &blk(&[1, 2])), 2);
        assert_eq!(occurrences(&w(&[1, 2]), &blk(&[1, 2, 1])), 0);
        assert_eq!(occurrences(&w(&[1, 1, 1]), &blk(&[1, 1])), 2);
    }

    #[test]
    fn cf_discrepancy_examples() {
        let d = cf_discrepancy(&w(&[1, 2, 1, 2]), &blk(&[1]), 64);
        assert!((d.midpoint_f64() - 0.084_962_500_721_156_2).abs() < 1e-12);
        let absent = cf_discrepancy(&w(&[2, 2, 2]), &blk(&[1]), 64);
        assert!((absent.midpoint_f64() - 0.415_037_499_278_843_8).abs() < 1e-12);
        let exact = cf_discrepancy(&w(&[3, 1]), &blk(&[3, 1]), 64);
        let mu = cylinder_measure(&w(&[3, 1]), 64).midpoint_f64();
        assert!((exact.midpoint_f64() - (0.5 - mu)).abs() < 1e-12);
    }

    #[test]
    fn bary_examples() {
        let b = |s: &str, base| BaseBlock::parse(base, s).unwrap();
        assert_eq!(bary_discrepancy(&b("0101", 2), 4).unwrap(), q(0, 1));
        assert_eq!(bary_discrepancy(&b("0001", 2), 4).unwrap(), q(1, 4));
        assert_eq!(bary_discrepancy(&b("012", 3), 3).unwrap(), q(0, 1));
        assert!(bary_discrepancy(&b("012", 3), 4).is_err());
        assert!(bary_discrepancy(&b("012", 3), 0).is_err());
        assert!(BaseBlock::new(2, vec![0, 2]).is_err());
    }

    #[test]
    fn hw_examples() {
        let (count, bound) = hw_bad_count(2, 12, &q(1, 2)).unwrap();
        assert_eq!(count, 2);
        assert!((bound.midpoint_f64() - 2.0 * 8192.0 * (-1f64).exp()).abs() < 1e-6);
        assert!(hw_bad_count(2, 12, &q(1, 3)).is_err());
        assert!(hw_bad_count(2, 30, &q(1, 2)).is_err());
    }

    #[test]
    fn bounded_blocks_enumeration() {
        let all = CfBlock::all_bounded(2, 3);
        assert_eq!(all.len(), 9);
        assert_eq!(all[0].digits(), &[1, 1]);
        assert_eq!(all[8].digits(), &[3, 3]);
    }

    #[test]
    fn count_range_matches_definition() {
        let mu = cylinder_measure(&w(&[1]), 64);
        let theta = q(1, 10);
        let (lo, hi) = count_range(&mu, &theta, 20).unwrap();
        for c in 0..=20u64 {
            let f = c as f64 / 20.0;
            let inside = (f - mu.midpoint_f64()).abs() < 0.1;
            assert_eq!(inside, (lo..=hi).contains(&c), "c={c}");
        }
    }

    #[test]
    fn balanced_existence() {
        assert!(!balanced_block_exists(2, 1, &q(1, 2)));
        assert!(balanced_block_exists(2, 3, &q(1, 2)));
        assert!(!balanced_block_exists(3, 2, &q(1, 3)));
        assert!(balanced_block_exists(3, 3, &q(1, 3)));
    }
}
