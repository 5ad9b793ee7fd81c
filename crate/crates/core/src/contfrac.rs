//! Continued-fraction words, convergents, continuants and cf-ary intervals.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{enclose_ln, enclose_ln2, Rational, RealEnclosure};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CfError {
    #[error("continued-fraction digits must be positive")]
    ZeroDigit,
    #[error("continuant index out of range: r={r}, s={s}, word length {len}")]
    IndexOutOfRange { r: usize, s: usize, len: usize },
    #[error("value {0} is not in the open unit interval")]
    OutsideUnitInterval(Rational),
    #[error("partial quotient does not fit in 64 bits")]
    DigitOverflow,
    #[error("malformed interval: need 0 <= lo < hi <= 1")]
    MalformedInterval,
}

/// A finite word of partial quotients `a_1, ..., a_n`, every digit `>= 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct CfWord(Vec<u64>);

impl CfWord {
    pub fn new(digits: Vec<u64>) -> Result<Self, CfError> {
        if digits.contains(&0) {
            return Err(CfError::ZeroDigit);
        }
        Ok(CfWord(digits))
    }

    pub fn empty() -> Self {
        CfWord(Vec::new())
    }

    pub fn digits(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_digits(self) -> Vec<u64> {
        self.0
    }

    pub fn prefix(&self, len: usize) -> CfWord {
        CfWord(self.0[..len.min(self.0.len())].to_vec())
    }
}

impl TryFrom<Vec<u64>> for CfWord {
    type Error = CfError;
    fn try_from(v: Vec<u64>) -> Result<Self, CfError> {
        CfWord::new(v)
    }
}

impl From<CfWord> for Vec<u64> {
    fn from(w: CfWord) -> Vec<u64> {
        w.0
    }
}

impl fmt::Display for CfWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]")
    }
}

/// `(p_{n-1}, p_n, q_{n-1}, q_n)` for a word of length `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Convergents {
    pub p_prev: BigInt,
    pub p_cur: BigInt,
    pub q_prev: BigInt,
    pub q_cur: BigInt,
}

impl Default for Convergents {
    fn default() -> Self {
        Self::initial()
    }
}

impl Convergents {
    /// Seeds `p_{-1} = q_0 = 1`, `p_0 = q_{-1} = 0`.
    pub fn initial() -> Self {
        Convergents {
            p_prev: BigInt::one(),
            p_cur: BigInt::zero(),
            q_prev: BigInt::zero(),
            q_cur: BigInt::one(),
        }
    }

    pub fn push(&mut self, a: u64) {
        let a = BigInt::from(a);
        let p = &a * &self.p_cur + &self.p_prev;
        let q = &a * &self.q_cur + &self.q_prev;
        self.p_prev = std::mem::replace(&mut self.p_cur, p);
        self.q_prev = std::mem::replace(&mut self.q_cur, q);
    }

    pub fn extended(&self, digits: &[u64]) -> Self {
        let mut c = self.clone();
        for &a in digits {
            c.push(a);
        }
        c
    }

    /// `p_n q_{n-1} - p_{n-1} q_n`, always `(-1)^(n+1)`.
    pub fn determinant(&self) -> BigInt {
        &self.p_cur * &self.q_prev - &self.p_prev * &self.q_cur
    }

    /// `p_n / q_n`.
    pub fn value(&self) -> Rational {
        Rational::new(self.p_cur.clone(), self.q_cur.clone())
    }

    /// The other endpoint of the cylinder, `(p_n + p_{n-1}) / (q_n + q_{n-1})`.
    pub fn shifted_value(&self) -> Rational {
        Rational::new(&self.p_cur + &self.p_prev, &self.q_cur + &self.q_prev)
    }

    /// `true` when `p_n/q_n` is the left endpoint of the cylinder (even order).
    pub fn value_is_left(&self) -> bool {
        self.determinant().is_negative()
    }

    /// Ordered endpoints of the cylinder.
    pub fn endpoints(&self) -> (Rational, Rational) {
        let (a, b) = (self.value(), self.shifted_value());
        if self.value_is_left() {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// `q_n (q_n + q_{n-1})`, the reciprocal of the cylinder length.
    pub fn inverse_length(&self) -> BigInt {
        &self.q_cur * (&self.q_cur + &self.q_prev)
    }

    pub fn length(&self) -> Rational {
        Rational::new(BigInt::one(), self.inverse_length())
    }

    /// For `x` in the cylinder, the Gauss-map tail `T^n(x)`: solves
    /// `x = (p_n + y p_{n-1}) / (q_n + y q_{n-1})` for `y`.
    pub fn tail_of(&self, x: &Rational) -> Rational {
        let num = Rational::from_integer(self.p_cur.clone()) - x * &self.q_cur;
        let den = x * &self.q_prev - Rational::from_integer(self.p_prev.clone());
        num / den
    }
}

pub fn convergents(w: &CfWord) -> Convergents {
    Convergents::initial().extended(w.digits())
}

/// Continuant `alpha_{r,s}` over digits `a_r..a_s` (1-based), with `alpha_{s+1,s} = 1` and
/// `alpha_{s+2,s} = 0`. Computed by the backward three-term recurrence.
pub fn continuant(w: &CfWord, r: usize, s: usize) -> Result<BigInt, CfError> {
    let len = w.len();
    if r < 1 || r > s + 2 || s > len {
        return Err(CfError::IndexOutOfRange { r, s, len });
    }
    if r == s + 2 {
        return Ok(BigInt::zero());
    }
    // (alpha_{i+1,s}, alpha_{i+2,s}) walking i from s down to r.
    let mut next = BigInt::one();
    let mut next2 = BigInt::zero();
    for i in (r..=s).rev() {
        let cur = BigInt::from(w.digits()[i - 1]) * &next + &next2;
        next2 = std::mem::replace(&mut next, cur);
    }
    Ok(next)
}

/// The open cf-ary interval of reals whose leading partial quotients are `word`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cylinder {
    pub word: CfWord,
    pub lo: Rational,
    pub hi: Rational,
    pub conv: Convergents,
}

impl Cylinder {
    pub fn interval(&self) -> CfInterval {
        CfInterval {
            order: self.word.len() as u64,
            conv: self.conv.clone(),
        }
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }
}

pub fn cylinder(w: &CfWord) -> Cylinder {
    let conv = convergents(w);
    let (lo, hi) = conv.endpoints();
    Cylinder {
        word: w.clone(),
        lo,
        hi,
        conv,
    }
}

/// `1 / (q_n (q_n + q_{n-1}))`.
pub fn cylinder_length(w: &CfWord) -> Rational {
    convergents(w).length()
}

pub fn concat(a: &CfWord, b: &CfWord) -> CfWord {
    let mut v = a.0.clone();
    v.extend_from_slice(&b.0);
    CfWord(v)
}

/// A cf-ary interval known only through its order and convergents; the word itself need not be
/// retained.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CfInterval {
    pub order: u64,
    pub conv: Convergents,
}

impl CfInterval {
    pub fn unit() -> Self {
        CfInterval {
            order: 0,
            conv: Convergents::initial(),
        }
    }

    pub fn extend(&self, relative: &[u64]) -> Self {
        CfInterval {
            order: self.order + relative.len() as u64,
            conv: self.conv.extended(relative),
        }
    }

    pub fn lo(&self) -> Rational {
        self.conv.endpoints().0
    }

    pub fn hi(&self) -> Rational {
        self.conv.endpoints().1
    }

    pub fn endpoints(&self) -> (Rational, Rational) {
        self.conv.endpoints()
    }

    pub fn length(&self) -> Rational {
        self.conv.length()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let (lo, hi) = self.endpoints();
        &lo < x && x < &hi
    }

    /// `true` if `self` is a subset of `other` (both open).
    pub fn is_within(&self, other: &CfInterval) -> bool {
        let (a, b) = self.endpoints();
        let (c, d) = other.endpoints();
        c <= a && b <= d
    }

    /// Relative Gauss-map tail of `x`.
    pub fn tail_of(&self, x: &Rational) -> Rational {
        self.conv.tail_of(x)
    }
}

/// First `min(max_digits, full length)` partial quotients of `x` in `(0,1)`, by Euclid.
/// A complete expansion ends with a digit `>= 2`.
pub fn cf_digits_of_rational(x: &Rational, max_digits: usize) -> Result<CfWord, CfError> {
    if !x.is_positive() || *x >= Rational::one() {
        return Err(CfError::OutsideUnitInterval(x.clone()));
    }
    let (digits, _) = euclid_digits(x.numer(), x.denom(), max_digits)?;
    Ok(CfWord(digits))
}

/// Runs `max_digits` Euclid iterations on `num/den` (`0 < num < den`), returning the digits and
/// whether the expansion terminated within them.
pub fn euclid_digits(
    num: &BigInt,
    den: &BigInt,
    max_digits: usize,
) -> Result<(Vec<u64>, bool), CfError> {
    let mut u = num.clone();
    let mut v = den.clone();
    let mut out = Vec::new();
    while out.len() < max_digits {
        if u.is_zero() {
            return Ok((out, true));
        }
        let (a, r) = v.div_rem(&u);
        out.push(a.to_u64().ok_or(CfError::DigitOverflow)?);
        v = u;
        u = r;
    }
    Ok((out, u.is_zero()))
}

/// Gauss map `T(x) = 1/x - floor(1/x)`, with `T(0) = 0`.
pub fn gauss_map(x: &Rational) -> Rational {
    if x.is_zero() {
        return Rational::zero();
    }
    let inv = x.recip();
    &inv - inv.floor()
}

/// Gauss measure `log_2((1+hi)/(1+lo))` of the interval `(lo, hi)`.
pub fn gauss_measure(lo: &Rational, hi: &Rational, bits: u32) -> Result<RealEnclosure, CfError> {
    if lo.is_negative() || lo >= hi || *hi > Rational::one() {
        return Err(CfError::MalformedInterval);
    }
    let one = Rational::one();
    let ratio = (&one + hi) / (&one + lo);
    let work = bits + 8;
    let num = enclose_ln(&ratio, work);
    let den = enclose_ln2(work);
    Ok(num.div(&den).expect("ln 2 enclosure is positive"))
}

/// Gauss measure of the cylinder of a word.
pub fn cylinder_measure(w: &CfWord, bits: u32) -> RealEnclosure {
    let c = cylinder(w);
    gauss_measure(&c.lo, &c.hi, bits).expect("cylinders are proper subintervals of [0,1]")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational;

    fn w(d: &[u64]) -> CfWord {
        CfWord::new(d.to_vec()).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        rational(n, d).unwrap()
    }

    #[test]
    fn convergent_examples() {
        assert_eq!(convergents(&w(&[1, 1, 1, 1, 1])).value(), q(5, 8));
        assert_eq!(convergents(&w(&[2, 3])).value(), q(3, 7));
        let e = convergents(&CfWord::empty());
        assert_eq!(e.value(), q(0, 1));
        assert_eq!((e.p_prev, e.q_prev), (BigInt::one(), BigInt::zero()));
    }

    #[test]
    fn continuant_examples_and_range() {
        assert_eq!(continuant(&w(&[2, 3]), 1, 2).unwrap(), BigInt::from(7));
        assert_eq!(continuant(&w(&[2, 3]), 3, 2).unwrap(), BigInt::one());
        assert_eq!(continuant(&w(&[2, 3]), 4, 2).unwrap(), BigInt::zero());
        assert_eq!(continuant(&w(&[2, 3]), 2, 2).unwrap(), BigInt::from(3));
        assert!(continuant(&w(&[2, 3]), 1, 3).is_err());
        assert!(continuant(&w(&[2, 3]), 0, 1).is_err());
        assert!(continuant(&w(&[2, 3]), 4, 1).is_err());
    }

    #[test]
    fn cylinder_examples() {
        let c = cylinder(&w(&[1]));
        assert_eq!((c.lo, c.hi), (q(1, 2), q(1, 1)));
        let c = cylinder(&w(&[2]));
        assert_eq!((c.lo, c.hi), (q(1, 3), q(1, 2)));
        let c = cylinder(&w(&[1, 1]));
        assert_eq!((c.lo, c.hi), (q(1, 2), q(2, 3)));
        let c = cylinder(&CfWord::empty());
        assert_eq!((c.lo, c.hi), (q(0, 1), q(1, 1)));
    }

    #[test]
    fn cylinder_length_examples() {
        assert_eq!(cylinder_length(&w(&[1])), q(1, 2));
        assert_eq!(cylinder_length(&w(&[2, 3])), q(1, 63));
        let c = cylinder(&w(&[3, 1, 4, 1, 5]));
        assert_eq!(c.length(), cylinder_length(&c.word));
    }

    #[test]
    fn euclid_examples() {
        assert_eq!(cf_digits_of_rational(&q(7, 10), 10).unwrap(), w(&[1, 2, 3]));
        assert_eq!(cf_digits_of_rational(&q(1, 2), 10).unwrap(), w(&[2]));
        assert_eq!(cf_digits_of_rational(&q(7, 10), 2).unwrap(), w(&[1, 2]));
        assert!(cf_digits_of_rational(&q(1, 1), 3).is_err());
        assert!(cf_digits_of_rational(&q(0, 1), 3).is_err());
        assert!(cf_digits_of_rational(&q(-1, 3), 3).is_err());
    }

    #[test]
    fn tail_inverts_prefix() {
        let prefix = convergents(&w(&[2, 5, 1]));
        let full = convergents(&w(&[2, 5, 1, 3, 7]));
        let tail = prefix.tail_of(&full.value());
        assert_eq!(tail, convergents(&w(&[3, 7])).value());
        assert_eq!(gauss_map(&q(7, 10)), q(3, 7));
    }

    #[test]
    fn gauss_measure_examples() {
        let full = gauss_measure(&q(0, 1), &q(1, 1), 64).unwrap();
        assert!(full.contains(&q(1, 1)));
        let m1 = gauss_measure(&q(1, 2), &q(1, 1), 64).unwrap();
        assert!((m1.midpoint_f64() - 0.415_037_499_278_843_8).abs() < 1e-15);
        assert!(gauss_measure(&q(1, 2), &q(1, 2), 64).is_err());
        assert!(gauss_measure(&q(1, 2), &q(3, 2), 64).is_err());
    }

    #[test]
    fn zero_digit_rejected() {
        assert_eq!(CfWord::new(vec![1, 0]), Err(CfError::ZeroDigit));
        let parsed: Result<CfWord, _> = serde_json::from_str("[1,0]");
        assert!(parsed.is_err());
    }

    #[test]
    fn orientation_alternates() {
        let mut c = Convergents::initial();
        assert!(c.value_is_left());
        c.push(3);
        assert!(!c.value_is_left());
        c.push(1);
        assert!(c.value_is_left());
    }
}
