//! Exact depth-first search over relative cylinders in left-to-right order.
//!
//! Every cylinder passing the length window is longer than the probe spacing
//! `|sigma_cf| / T`, so it contains a probe point; scanning cylinders left to right and stopping
//! at the first acceptance therefore finds the same refinement as scanning the probes.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use crate::arith::{enclose_exp, Dyadic, Rational};
use crate::brick::{
    choose_m_d_with, cover_scaled, index_digits, ratio_certified, Brick, ConstructionConstants,
    DaryInterval, WindowFactors,
};
use crate::contfrac::{cylinder_measure, CfInterval, CfWord, Convergents};
use crate::discrepancy::{balanced_block_exists, count_range, discrepancy_of_counts, BaseBlock};

use super::{OpCounters, Refinement, Rejection};

/// Why a whole relative order was skipped without searching.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Infeasible {
    /// `eps - (t-1)/n <= 0`.
    Threshold,
    /// Some cf block admits no occurrence count.
    CountRange,
    /// Required occurrences exceed the number of windows.
    Windows,
    /// The new d-ary interval would not be deeper than the old one.
    Order { d: u32 },
    /// No base-d block of the required length has discrepancy below eps.
    Balance { d: u32 },
}

pub(crate) struct BaseLevel {
    pub d: u32,
    pub sigma: DaryInterval,
    pub m: u64,
    pub n_d: u64,
    /// `d^m`.
    pub scale: BigInt,
    /// `d^(n_d)`.
    pub sub: BigInt,
}

/// Everything about one relative order `n` that does not depend on the candidate.
pub struct Level {
    pub n: u64,
    /// Block length and number of bases checked: the width of the brick being refined.
    pub t: u32,
    pub eps: Rational,
    /// `eps - (t-1)/n`.
    pub theta: Rational,
    pub factors: WindowFactors,
    sigma: CfInterval,
    inv_len_sigma: BigInt,
    /// Certified `[cmin, cmax]` per block code.
    ranges: Vec<(u64, u64)>,
    windows: u64,
    pub(crate) bases: Vec<BaseLevel>,
    /// `F_(m+1) F_(m+2)` for `m = 0..=n`.
    fib: Vec<BigInt>,
    e4c_lo: Rational,
    c: Rational,
    policy: crate::arith::PrecisionPolicy,
}

impl Level {
    pub fn new(
        brick: &Brick,
        n: u64,
        eps: &Rational,
        cc: &ConstructionConstants,
    ) -> Result<Level, Infeasible> {
        let t = brick.t;
        let bits = cc.precision.start_bits;
        let theta = eps - Rational::new(BigInt::from(t - 1), BigInt::from(n));
        if !theta.is_positive() {
            return Err(Infeasible::Threshold);
        }
        let windows = (n + 1).saturating_sub(t as u64);
        let mut ranges = Vec::new();
        let mut required = 0;
        for code in 0..(t as u64).pow(t) {
            let word = CfWord::new(decode_block(code, t)).expect("positive digits");
            let mu = cylinder_measure(&word, bits);
            let (lo, hi) = count_range(&mu, &theta, n).ok_or(Infeasible::CountRange)?;
            if lo > hi.min(windows) {
                return Err(Infeasible::CountRange);
            }
            required += lo;
            ranges.push((lo, hi));
        }
        if required > windows {
            return Err(Infeasible::Windows);
        }

        let factors = WindowFactors::new(n, &cc.c, bits);
        let inv_len_sigma = brick.cf.conv.inverse_length();
        let mut bases = Vec::new();
        for d in 2..=t {
            let sigma = brick.bases[&d].clone();
            let m = choose_m_d_with(&inv_len_sigma, factors.upper.hi(), d);
            if m <= sigma.order() {
                return Err(Infeasible::Order { d });
            }
            let n_d = m - sigma.order();
            if !balanced_block_exists(d, n_d, eps) {
                return Err(Infeasible::Balance { d });
            }
            bases.push(BaseLevel {
                d,
                scale: BigInt::from(d).pow(m as u32),
                sub: BigInt::from(d).pow(n_d as u32),
                sigma,
                m,
                n_d,
            });
        }

        let mut fib = Vec::with_capacity(n as usize + 1);
        let (mut f1, mut f2) = (BigInt::one(), BigInt::one());
        for _ in 0..=n {
            fib.push(&f1 * &f2);
            let f3 = &f1 + &f2;
            f1 = std::mem::replace(&mut f2, f3);
        }
        let four_c = &cc.c * Rational::from_integer(4.into());
        Ok(Level {
            n,
            t,
            eps: eps.clone(),
            theta,
            factors,
            sigma: brick.cf.clone(),
            inv_len_sigma,
            ranges,
            windows,
            bases,
            fib,
            e4c_lo: enclose_exp(&four_c, bits).lo_rational(),
            c: cc.c.clone(),
            policy: cc.precision,
        })
    }

    /// Block code of `window` (digits `1..=t`, length `t`), or `None` if some digit exceeds `t`.
    fn code(&self, window: &[u64]) -> Option<usize> {
        let t = self.t as u64;
        let mut code = 0u64;
        for &a in window {
            if a > t {
                return None;
            }
            code = code * t + (a - 1);
        }
        Some(code as usize)
    }

    /// Checks all block counts of a complete relative word against the certified ranges.
    pub fn cf_counts_ok(&self, word: &[u64]) -> bool {
        let mut counts = vec![0u64; self.ranges.len()];
        for w in word.windows(self.t as usize) {
            if let Some(code) = self.code(w) {
                counts[code] += 1;
            }
        }
        counts
            .iter()
            .zip(&self.ranges)
            .all(|(&c, &(lo, hi))| lo <= c && c <= hi)
    }

    /// `ratio = inv_len_sigma / inv_len_j`; certifies `lower <= ratio <= upper`.
    fn window_ok(&self, inv_len_j: &BigInt) -> Result<(), Rejection> {
        let s = &self.inv_len_sigma;
        let decide = |f: &WindowFactors| -> Option<bool> {
            // lower end: need lower * Q <= S
            let lo_ok = scaled_cmp(f.lower.hi(), inv_len_j, s) != Ordering::Greater;
            let lo_bad = scaled_cmp(f.lower.lo(), inv_len_j, s) == Ordering::Greater;
            let hi_ok = scaled_cmp(f.upper.lo(), inv_len_j, s) != Ordering::Less;
            let hi_bad = scaled_cmp(f.upper.hi(), inv_len_j, s) == Ordering::Less;
            if lo_bad || hi_bad {
                Some(false)
            } else if lo_ok && hi_ok {
                Some(true)
            } else {
                None
            }
        };
        match decide(&self.factors) {
            Some(true) => return Ok(()),
            Some(false) => return Err(Rejection::LengthWindow),
            None => {}
        }
        for bits in self.policy.ladder().skip(1) {
            match decide(&WindowFactors::new(self.n, &self.c, bits)) {
                Some(true) => return Ok(()),
                Some(false) => return Err(Rejection::LengthWindow),
                None => {}
            }
        }
        Err(Rejection::Precision)
    }

    /// Full check of a relative word whose cf block counts are already known to be in range.
    pub(crate) fn evaluate_leaf(
        &self,
        word: &[u64],
        conv: &Convergents,
        counters: &mut OpCounters,
    ) -> Result<Refinement, Rejection> {
        counters.leaves += 1;
        let inv_len_j = conv.inverse_length();
        self.window_ok(&inv_len_j)?;

        let (ln, ld, hn, hd) = ordered_parts(conv);
        let j_len = Rational::new(BigInt::one(), inv_len_j.clone());
        let mut new_bases = BTreeMap::new();
        let mut blocks = BTreeMap::new();
        for bl in &self.bases {
            counters.base_ops += bl.n_d;
            let cover = cover_scaled(&ln, &ld, &hn, &hd, bl.d, bl.m, &bl.scale)
                .map_err(|_| Rejection::Containment { d: bl.d })?;
            let mut per = Vec::new();
            for idx in cover.constituents() {
                let (parent, rel) = idx.div_rem(&bl.sub);
                let sigma_start = bl.sigma.start();
                let inside = &parent >= sigma_start
                    && parent < sigma_start + BigInt::from(bl.sigma.span());
                if !inside {
                    return Err(Rejection::Containment { d: bl.d });
                }
                let digits = index_digits(&rel, bl.d, bl.n_d);
                let mut counts = vec![0u64; bl.d as usize];
                for &x in &digits {
                    counts[x as usize] += 1;
                }
                if discrepancy_of_counts(&counts, bl.n_d) >= self.eps {
                    return Err(Rejection::BaseDiscrepancy { d: bl.d });
                }
                per.push(BaseBlock::new(bl.d, digits).expect("digits below base"));
            }
            // Cheap sufficient test first: 16 d e4c_lo |J| >= |tau_d|.
            let lhs = &j_len * &self.e4c_lo * Rational::from_integer(BigInt::from(16 * bl.d as u64));
            if lhs < cover.length()
                && !ratio_certified(&j_len, &cover.length(), bl.d, &self.c, &self.policy)
            {
                return Err(Rejection::Ratio { d: bl.d });
            }
            blocks.insert(bl.d, per);
            new_bases.insert(bl.d, cover);
        }
        let cf = CfInterval {
            order: self.sigma.order + self.n,
            conv: conv.clone(),
        };
        Ok(Refinement {
            word: CfWord::new(word.to_vec()).expect("positive digits"),
            base_blocks: blocks,
            brick: Brick {
                t: self.t,
                cf,
                bases: new_bases,
            },
            n: self.n,
        })
    }

    /// Largest possible `|J|/|sigma|` for descendants with `rem` more digits is at most
    /// `2 r / (F_(rem+1) F_(rem+2))` (exactly `r` when `rem = 0`); `true` if that can still reach
    /// the lower window end.
    fn may_reach_window(&self, child_inv_len: &BigInt, rem: usize) -> bool {
        // 2 S / (F Q) >= lower.lo   <=>   lower.lo * F * Q <= 2 S
        let num = if rem == 0 {
            self.inv_len_sigma.clone()
        } else {
            &self.inv_len_sigma * 2u32
        };
        let q = if rem == 0 {
            child_inv_len.clone()
        } else {
            child_inv_len * &self.fib[rem]
        };
        scaled_cmp(self.factors.lower.lo(), &q, &num) != Ordering::Greater
    }
}

/// Compares `x * a` with `b`.
fn scaled_cmp(x: &Dyadic, a: &BigInt, b: &BigInt) -> Ordering {
    let (m, e) = (x.mantissa(), x.exponent());
    if e >= 0 {
        ((m * a) << e as usize).cmp(b)
    } else {
        (m * a).cmp(&(b << (-e) as usize))
    }
}

/// `(lo_num, lo_den, hi_num, hi_den)` of the cylinder.
fn ordered_parts(conv: &Convergents) -> (BigInt, BigInt, BigInt, BigInt) {
    let a = (conv.p_cur.clone(), conv.q_cur.clone());
    let b = (&conv.p_cur + &conv.p_prev, &conv.q_cur + &conv.q_prev);
    let (lo, hi) = if conv.value_is_left() { (a, b) } else { (b, a) };
    (lo.0, lo.1, hi.0, hi.1)
}

fn decode_block(mut code: u64, t: u32) -> Vec<u64> {
    let t = t as u64;
    let mut digits = vec![0; t as usize];
    for d in digits.iter_mut().rev() {
        *d = code % t + 1;
        code /= t;
    }
    digits
}

/// The search aborted because the node budget ran out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetExceeded;

pub(crate) struct Dfs<'a> {
    level: &'a Level,
    counters: &'a mut OpCounters,
    budget: Option<u64>,
    digits: Vec<u64>,
    counts: Vec<u64>,
    /// `sum_v max(0, cmin_v - count_v)`.
    deficit: u64,
}

impl<'a> Dfs<'a> {
    pub fn new(level: &'a Level, counters: &'a mut OpCounters, budget: Option<u64>) -> Self {
        let deficit = level.ranges.iter().map(|r| r.0).sum();
        Dfs {
            level,
            counters,
            budget,
            digits: Vec::with_capacity(level.n as usize),
            counts: vec![0; level.ranges.len()],
            deficit,
        }
    }

    /// Leftmost accepted refinement at this level, if any.
    pub fn run(mut self) -> Result<Option<Refinement>, BudgetExceeded> {
        let root = self.level.sigma.conv.clone();
        self.visit(&root)
    }

    fn child_feasible(&mut self, conv: &Convergents, b: u64, rem: usize) -> bool {
        let q = BigInt::from(b) * &conv.q_cur + &conv.q_prev;
        let inv = &q * (&q + &conv.q_cur);
        self.level.may_reach_window(&inv, rem)
    }

    /// Largest digit whose child can still reach the window; 0 if none.
    fn max_digit(&mut self, conv: &Convergents, rem: usize) -> u64 {
        if !self.child_feasible(conv, 1, rem) {
            return 0;
        }
        let mut lo = 1u64;
        let mut hi = 2u64;
        while self.child_feasible(conv, hi, rem) {
            lo = hi;
            hi = hi.checked_mul(2).expect("partial quotient overflow");
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.child_feasible(conv, mid, rem) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn visit(&mut self, conv: &Convergents) -> Result<Option<Refinement>, BudgetExceeded> {
        let depth = self.digits.len();
        let n = self.level.n as usize;
        let rem = n - depth - 1;
        let b_max = self.max_digit(conv, rem);
        if b_max == 0 {
            return Ok(None);
        }
        let t = self.level.t as usize;
        let completed_after = (depth + 2).saturating_sub(t) as u64;
        let windows_left = self.level.windows.saturating_sub(completed_after);
        // Children run left to right: digit decreasing when p/q is the left endpoint.
        let decreasing = conv.value_is_left();
        for i in 0..b_max {
            let b = if decreasing { b_max - i } else { i + 1 };
            self.counters.nodes += 1;
            if let Some(limit) = self.budget {
                if self.counters.nodes > limit {
                    return Err(BudgetExceeded);
                }
            }
            self.digits.push(b);
            let mut code = None;
            if depth + 1 >= t {
                code = self.level.code(&self.digits[depth + 1 - t..]);
            }
            let mut ok = true;
            if let Some(c) = code {
                self.counts[c] += 1;
                if self.counts[c] > self.level.ranges[c].1 {
                    ok = false;
                }
                if self.counts[c] <= self.level.ranges[c].0 {
                    self.deficit -= 1;
                }
            }
            if ok && self.deficit > windows_left {
                ok = false;
            }
            if ok {
                self.counters.digit_ops += 1;
                let child = conv.extended(&[b]);
                if rem == 0 {
                    if let Ok(r) = self.level.evaluate_leaf(&self.digits, &child, self.counters) {
                        return Ok(Some(r));
                    }
                } else if let Some(r) = self.visit(&child)? {
                    return Ok(Some(r));
                }
            }
            if let Some(c) = code {
                if self.counts[c] <= self.level.ranges[c].0 {
                    self.deficit += 1;
                }
                self.counts[c] -= 1;
            }
            self.digits.pop();
        }
        Ok(None)
    }
}

/// Relative digits of `x` inside `sigma`, by Gauss-map inversion and `n` Euclid steps.
/// Fails when `x` is not interior to a relative cylinder of order `n`.
pub fn relative_digits(sigma: &CfInterval, x: &Rational, n: usize) -> Result<Vec<u64>, Rejection> {
    if !sigma.contains(x) {
        return Err(Rejection::Outside);
    }
    let y = sigma.tail_of(x);
    if !y.is_positive() || y >= Rational::one() {
        return Err(Rejection::Boundary);
    }
    let (digits, terminated) = crate::contfrac::euclid_digits(y.numer(), y.denom(), n)
        .map_err(|_| Rejection::Boundary)?;
    if digits.len() < n || terminated {
        return Err(Rejection::Boundary);
    }
    Ok(digits)
}
