//! t-bricks: one cf-ary interval nested inside a d-ary interval (or two adjacent ones) per base.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{
    enclose_exp, enclose_levy, exp_of_enclosure, serde_str, Cmp3, Dyadic, PrecisionPolicy,
    Rational, RealEnclosure,
};
use crate::constructor::Schedule;
use crate::contfrac::CfInterval;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BrickError {
    #[error("interval is not a proper subinterval of [0,1]")]
    Malformed,
    #[error("interval of length {len} is not shorter than {base}^-{order}")]
    TooLong { len: String, base: u32, order: u64 },
    #[error("invalid d-ary interval: base {base}, order {order}, start {start}, span {span}")]
    InvalidDary {
        base: u32,
        order: u64,
        start: String,
        span: u8,
    },
}

/// `(start/d^m, (start+span)/d^m)`, one d-ary interval of order `m` or the union of two.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DaryInterval {
    base: u32,
    order: u64,
    #[serde(with = "serde_str::bigint")]
    start: BigInt,
    span: u8,
}

impl DaryInterval {
    pub fn new(base: u32, order: u64, start: BigInt, span: u8) -> Result<Self, BrickError> {
        let ok = base >= 2
            && (span == 1 || span == 2)
            && !start.is_negative()
            && &start + BigInt::from(span) <= BigInt::from(base).pow(order as u32);
        if !ok {
            return Err(BrickError::InvalidDary {
                base,
                order,
                start: start.to_string(),
                span,
            });
        }
        Ok(DaryInterval {
            base,
            order,
            start,
            span,
        })
    }

    /// The order-0 interval `(0,1)`.
    pub fn unit(base: u32) -> Self {
        DaryInterval::new(base, 0, BigInt::zero(), 1).expect("unit interval is valid")
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn start(&self) -> &BigInt {
        &self.start
    }

    pub fn span(&self) -> u8 {
        self.span
    }

    /// `d^order`.
    pub fn scale(&self) -> BigInt {
        BigInt::from(self.base).pow(self.order as u32)
    }

    pub fn lo(&self) -> Rational {
        Rational::new(self.start.clone(), self.scale())
    }

    pub fn hi(&self) -> Rational {
        Rational::new(&self.start + BigInt::from(self.span), self.scale())
    }

    pub fn length(&self) -> Rational {
        Rational::new(BigInt::from(self.span), self.scale())
    }

    /// Indices of the one or two order-`m` intervals making up this interval.
    pub fn constituents(&self) -> Vec<BigInt> {
        (0..self.span)
            .map(|i| &self.start + BigInt::from(i))
            .collect()
    }

    /// The `order` base-d digits of an order-`m` index, most significant first.
    pub fn index_digits(&self, index: &BigInt) -> Vec<u32> {
        index_digits(index, self.base, self.order)
    }

    /// Digits shared by every point of the interval: the common prefix of its constituents.
    pub fn common_prefix(&self) -> Vec<u32> {
        let mut digits = self.index_digits(&self.start);
        if self.span == 2 {
            let trailing = digits.iter().rev().take_while(|&&x| x == self.base - 1).count();
            digits.truncate(digits.len().saturating_sub(trailing + 1));
        }
        digits
    }

    pub fn contains(&self, lo: &Rational, hi: &Rational) -> bool {
        self.lo() <= *lo && *hi <= self.hi()
    }
}

impl fmt::Display for DaryInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "base {} order {} start {} span {}",
            self.base, self.order, self.start, self.span
        )
    }
}

/// Base-`d` digits of `index`, left-padded with zeros to `len`.
pub fn index_digits(index: &BigInt, d: u32, len: u64) -> Vec<u32> {
    let mut digits: Vec<u32> = if index.is_zero() {
        Vec::new()
    } else {
        let (_, mag) = index.to_radix_be(d);
        mag.into_iter().map(u32::from).collect()
    };
    if (digits.len() as u64) < len {
        let mut padded = vec![0; len as usize - digits.len()];
        padded.append(&mut digits);
        digits = padded;
    }
    digits
}

/// `(sigma_cf, sigma_2, ..., sigma_t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Brick {
    pub t: u32,
    pub cf: CfInterval,
    pub bases: BTreeMap<u32, DaryInterval>,
}

impl Brick {
    /// `sigma_2 = sigma_cf = (0,1)`.
    pub fn initial() -> Self {
        let mut bases = BTreeMap::new();
        bases.insert(2, DaryInterval::unit(2));
        Brick {
            t: 2,
            cf: CfInterval::unit(),
            bases,
        }
    }
}

/// Tunable constants of the construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionConstants {
    #[serde(with = "serde_str::rational")]
    pub c: Rational,
    pub n_start: u32,
    pub precision: PrecisionPolicy,
    pub schedule: Schedule,
}

impl Default for ConstructionConstants {
    fn default() -> Self {
        ConstructionConstants {
            c: Rational::one(),
            n_start: 2,
            precision: PrecisionPolicy::default(),
            schedule: Schedule::Standard,
        }
    }
}

impl ConstructionConstants {
    pub fn is_valid(&self) -> bool {
        self.c.is_positive() && self.n_start >= 1 && self.schedule.is_valid()
    }
}

/// Enclosures of the length-window factors for relative order `n`.
#[derive(Clone, Debug)]
pub struct WindowFactors {
    pub n: u64,
    /// `(1/4) e^(-2nL-2c)`.
    pub lower: RealEnclosure,
    /// `2 e^(-2nL+2c)`.
    pub upper: RealEnclosure,
    /// `4 e^(2nL+2c)`.
    pub grid: RealEnclosure,
}

impl WindowFactors {
    pub fn new(n: u64, c: &Rational, bits: u32) -> Self {
        let work = bits + 16 + 64 - (n.max(1)).leading_zeros();
        let two_nl = enclose_levy(work).mul_rational(&Rational::from_integer(BigInt::from(2 * n)));
        let two_c = c * Rational::from_integer(BigInt::from(2));
        let e = |x: RealEnclosure| exp_of_enclosure(&x, work);
        let lower = e(two_nl.neg().add_rational(&-&two_c)).mul_rational(&Rational::new(1.into(), 4.into()));
        let upper = e(two_nl.neg().add_rational(&two_c)).mul_rational(&Rational::from_integer(2.into()));
        let grid = e(two_nl.add_rational(&two_c)).mul_rational(&Rational::from_integer(4.into()));
        WindowFactors { n, lower, upper, grid }
    }

    /// Number of equal parts `floor(4 e^(2nL+2c)) + 1`, rounded up via the upper enclosure end.
    pub fn parts(&self) -> BigInt {
        self.grid.hi_rational().floor().to_integer() + BigInt::one()
    }
}

/// A failed brick invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    Width { t: u32 },
    MissingBase { d: u32 },
    WrongBase { d: u32 },
    Containment { d: u32 },
    Ratio { d: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Width { t } => write!(f, "width: t={t} < 2"),
            Violation::MissingBase { d } => write!(f, "missing: no interval for base {d}"),
            Violation::WrongBase { d } => write!(f, "base: entry {d} has the wrong base or is extra"),
            Violation::Containment { d } => write!(f, "containment: sigma_cf not inside sigma_{d}"),
            Violation::Ratio { d } => write!(f, "ratio: |sigma_cf|/|sigma_{d}| below 1/(16 e^(4c) {d})"),
        }
    }
}

/// Certifies `|inner|/|outer| >= 1/(16 e^(4c) d)`, i.e. `e^(4c) >= |outer|/(16 d |inner|)`.
pub fn ratio_certified(inner: &Rational, outer: &Rational, d: u32, c: &Rational, policy: &PrecisionPolicy) -> bool {
    let r = outer / (inner * Rational::from_integer(BigInt::from(16 * d as u64)));
    let four_c = c * Rational::from_integer(4.into());
    policy.compare(|bits| enclose_exp(&four_c, bits), &r) == Cmp3::Greater
}

pub fn validate_brick(b: &Brick, cc: &ConstructionConstants) -> Result<(), Vec<Violation>> {
    let mut v = Vec::new();
    if b.t < 2 {
        v.push(Violation::Width { t: b.t });
    }
    let (lo, hi) = b.cf.endpoints();
    let len = &hi - &lo;
    for d in 2..=b.t {
        let Some(sd) = b.bases.get(&d) else {
            v.push(Violation::MissingBase { d });
            continue;
        };
        if sd.base() != d {
            v.push(Violation::WrongBase { d });
            continue;
        }
        if !sd.contains(&lo, &hi) {
            v.push(Violation::Containment { d });
        }
        if !ratio_certified(&len, &sd.length(), d, &cc.c, &cc.precision) {
            v.push(Violation::Ratio { d });
        }
    }
    for &d in b.bases.keys() {
        if d < 2 || d > b.t {
            v.push(Violation::WrongBase { d });
        }
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// Smallest cover of `(lo, hi)` by one or two consecutive d-ary intervals of order `m`.
pub fn cover_with_dary(lo: &Rational, hi: &Rational, d: u32, m: u64) -> Result<DaryInterval, BrickError> {
    if lo.is_negative() || lo >= hi || *hi > Rational::one() || d < 2 {
        return Err(BrickError::Malformed);
    }
    let scale = BigInt::from(d).pow(m as u32);
    let len = hi - lo;
    if len * Rational::from_integer(scale.clone()) >= Rational::one() {
        return Err(BrickError::TooLong {
            len: (hi - lo).to_string(),
            base: d,
            order: m,
        });
    }
    cover_scaled(
        lo.numer(),
        lo.denom(),
        hi.numer(),
        hi.denom(),
        d,
        m,
        &scale,
    )
}

/// Cover of `(ln/ld, hn/hd)` at order `m` given `scale = d^m`; the interval must be shorter
/// than `1/scale`.
pub(crate) fn cover_scaled(
    ln: &BigInt,
    ld: &BigInt,
    hn: &BigInt,
    hd: &BigInt,
    d: u32,
    m: u64,
    scale: &BigInt,
) -> Result<DaryInterval, BrickError> {
    let a = (ln * scale).div_floor(ld);
    let b = -((-(hn * scale)).div_floor(hd));
    let span = (&b - &a).to_u8().filter(|s| (1..=2).contains(s));
    match span {
        Some(span) => DaryInterval::new(d, m, a, span),
        None => Err(BrickError::Malformed),
    }
}

/// Largest `m` with `pred(d^m)`, for a predicate that holds at `m = 0` and is monotone.
fn max_order(d: u32, pred: impl Fn(&BigInt) -> bool) -> u64 {
    let mut m = 0;
    let mut p = BigInt::from(d);
    while pred(&p) {
        m += 1;
        p *= d;
    }
    m
}

/// Largest `m` with `upper * d^m <= inv_len`, where `1/inv_len` is the cf-interval length and
/// `upper` an upper bound on `2 e^(-2nL+2c)`.
pub fn choose_m_d_with(inv_len: &BigInt, upper: &Dyadic, d: u32) -> u64 {
    let (mant, exp) = (upper.mantissa(), upper.exponent());
    max_order(d, |p| {
        if exp >= 0 {
            (mant * p) << exp as usize <= *inv_len
        } else {
            mant * p <= inv_len << (-exp) as usize
        }
    })
}

/// Largest `m_d` such that the certified upper bound of `2 e^(-2nL+2c) |sigma_cf|` is at most
/// `d^(-m_d)`.
pub fn choose_m_d(sigma_cf_len: &Rational, n: u64, d: u32, cc: &ConstructionConstants) -> u64 {
    let f = WindowFactors::new(n, &cc.c, cc.precision.start_bits);
    let u = f.upper.hi_rational() * sigma_cf_len;
    max_order(d, |p| &u * Rational::from_integer(p.clone()) <= Rational::one())
}

/// Adds `tau_(t+1)` of the maximal order `m` with `|tau_cf| < (t+1)^-m`.
pub fn extend_to_next_base(b: &Brick) -> Brick {
    let d = b.t + 1;
    let inv_len = b.cf.conv.inverse_length();
    let m = max_order(d, |p| *p < inv_len);
    let (lo, hi) = b.cf.endpoints();
    let cover = cover_with_dary(&lo, &hi, d, m).expect("cf interval is shorter than d^-m");
    let mut out = b.clone();
    out.t = d;
    out.bases.insert(d, cover);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational;
    use crate::contfrac::CfInterval;

    fn q(n: i64, d: i64) -> Rational {
        rational(n, d).unwrap()
    }

    #[test]
    fn initial_brick_is_valid() {
        assert_eq!(validate_brick(&Brick::initial(), &ConstructionConstants::default()), Ok(()));
    }

    #[test]
    fn containment_violation() {
        let mut b = Brick::initial();
        b.cf = CfInterval::unit().extend(&[1]);
        b.bases.insert(2, DaryInterval::new(2, 1, BigInt::zero(), 1).unwrap());
        let v = validate_brick(&b, &ConstructionConstants::default()).unwrap_err();
        assert!(v.contains(&Violation::Containment { d: 2 }));
    }

    #[test]
    fn ratio_violation() {
        // [1; 10] has length 1/(89*144), below 1/(32 e^4) ~ 1/1747.
        let mut b = Brick::initial();
        b.cf = CfInterval::unit().extend(&[1; 10]);
        let v = validate_brick(&b, &ConstructionConstants::default()).unwrap_err();
        assert_eq!(v, vec![Violation::Ratio { d: 2 }]);
    }

    #[test]
    fn cover_examples() {
        let c = cover_with_dary(&q(2, 5), &q(3, 5), 2, 2).unwrap();
        assert_eq!((c.start().clone(), c.span()), (BigInt::one(), 2));
        assert_eq!((c.lo(), c.hi()), (q(1, 4), q(3, 4)));
        let c = cover_with_dary(&q(1, 8), &q(3, 16), 2, 2).unwrap();
        assert_eq!((c.start().clone(), c.span()), (BigInt::zero(), 1));
        assert!(cover_with_dary(&q(0, 1), &q(1, 4), 2, 2).is_err());
    }

    #[test]
    fn m_d_example() {
        // 2 e^(2 - 4L) ~ 0.1283 lies in (1/8, 1/4].
        let cc = ConstructionConstants::default();
        assert_eq!(choose_m_d(&q(1, 1), 2, 2, &cc), 2);
        let f = WindowFactors::new(2, &cc.c, 64);
        assert_eq!(choose_m_d_with(&BigInt::one(), f.upper.hi(), 2), 2);
    }

    #[test]
    fn extension_example() {
        let mut b = Brick::initial();
        b.cf = CfInterval::unit().extend(&[1, 1]);
        let e = extend_to_next_base(&b);
        let s3 = &e.bases[&3];
        assert_eq!((s3.order(), s3.start().clone(), s3.span()), (1, BigInt::one(), 1));
        assert_eq!(e.t, 3);
    }

    #[test]
    fn common_prefix_drops_carry_digits() {
        let s = DaryInterval::new(2, 4, BigInt::from(0b0111), 2).unwrap();
        assert_eq!(s.common_prefix(), Vec::<u32>::new());
        let s = DaryInterval::new(2, 4, BigInt::from(0b1010), 2).unwrap();
        assert_eq!(s.common_prefix(), vec![1, 0, 1]);
        let s = DaryInterval::new(3, 3, BigInt::from(5), 1).unwrap();
        assert_eq!(s.common_prefix(), vec![0, 1, 2]);
    }
}
