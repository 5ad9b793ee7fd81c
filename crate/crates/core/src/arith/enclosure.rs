use std::fmt;

use serde::{Deserialize, Serialize};

use super::dyadic::{Dyadic, Round};
use super::Rational;

/// Outcome of comparing an enclosed real against an exact rational.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cmp3 {
    /// The whole enclosure lies strictly below the rational.
    Less,
    /// The whole enclosure lies strictly above the rational.
    Greater,
    /// The rational is inside the enclosure; more precision is needed.
    Overlap,
}

/// A closed interval `[lo, hi]` with dyadic endpoints that is guaranteed to contain a real value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealEnclosure {
    lo: Dyadic,
    hi: Dyadic,
    precision_bits: u32,
}

impl RealEnclosure {
    /// Panics if `lo > hi`; every constructor inside the crate upholds the ordering.
    pub fn new(lo: Dyadic, hi: Dyadic, precision_bits: u32) -> Self {
        assert!(lo <= hi, "enclosure endpoints out of order: {lo} > {hi}");
        RealEnclosure {
            lo,
            hi,
            precision_bits: precision_bits.max(1),
        }
    }

    pub fn exact(d: Dyadic, precision_bits: u32) -> Self {
        Self::new(d.clone(), d, precision_bits)
    }

    /// Tightest dyadic enclosure of a rational at `sig_bits` significant bits.
    pub fn from_rational(r: &Rational, sig_bits: u32) -> Self {
        Self::new(
            Dyadic::from_rational(r, sig_bits, Round::Down),
            Dyadic::from_rational(r, sig_bits, Round::Up),
            sig_bits,
        )
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn lo_rational(&self) -> Rational {
        self.lo.to_rational()
    }

    pub fn hi_rational(&self) -> Rational {
        self.hi.to_rational()
    }

    pub fn width(&self) -> Rational {
        self.hi.sub(&self.lo).to_rational()
    }

    pub fn midpoint_f64(&self) -> f64 {
        (self.lo.to_f64() + self.hi.to_f64()) / 2.0
    }

    pub fn contains(&self, r: &Rational) -> bool {
        self.lo.cmp_rational(r).is_le() && self.hi.cmp_rational(r).is_ge()
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.lo.to_f64() <= x && x <= self.hi.to_f64()
    }

    pub fn is_subset_of(&self, other: &RealEnclosure) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn cmp_rational(&self, r: &Rational) -> Cmp3 {
        if self.hi.cmp_rational(r).is_lt() {
            Cmp3::Less
        } else if self.lo.cmp_rational(r).is_gt() {
            Cmp3::Greater
        } else {
            Cmp3::Overlap
        }
    }

    pub fn neg(&self) -> Self {
        Self::new(self.hi.neg(), self.lo.neg(), self.precision_bits)
    }

    pub fn add(&self, other: &RealEnclosure) -> Self {
        Self::new(
            self.lo.add(&other.lo),
            self.hi.add(&other.hi),
            self.precision_bits.min(other.precision_bits),
        )
    }

    pub fn sub(&self, other: &RealEnclosure) -> Self {
        self.add(&other.neg())
    }

    /// Interval sum with an exact rational, rounded outward.
    pub fn add_rational(&self, r: &Rational) -> Self {
        let sig = self.working_bits();
        let lo = self.lo.add(&Dyadic::from_rational(r, sig, Round::Down));
        let hi = self.hi.add(&Dyadic::from_rational(r, sig, Round::Up));
        Self::new(lo, hi, self.precision_bits)
    }

    pub fn mul(&self, other: &RealEnclosure) -> Self {
        let products = [
            self.lo.mul(&other.lo),
            self.lo.mul(&other.hi),
            self.hi.mul(&other.lo),
            self.hi.mul(&other.hi),
        ];
        let lo = products.iter().min().cloned().unwrap_or_else(Dyadic::zero);
        let hi = products.iter().max().cloned().unwrap_or_else(Dyadic::zero);
        let sig = self.working_bits().max(other.working_bits());
        Self::new(
            lo.round_sig(sig, Round::Down),
            hi.round_sig(sig, Round::Up),
            self.precision_bits.min(other.precision_bits),
        )
    }

    pub fn mul_rational(&self, r: &Rational) -> Self {
        self.mul(&Self::from_rational(r, self.working_bits()))
    }

    /// Division by an enclosure that is bounded away from zero.
    pub fn div(&self, other: &RealEnclosure) -> Option<Self> {
        let positive = !other.lo.is_negative() && !other.lo.is_zero();
        if positive || other.hi.is_negative() {
            let sig = self.working_bits().max(other.working_bits());
            let a = [self.lo.to_rational(), self.hi.to_rational()];
            let b = [other.lo.to_rational(), other.hi.to_rational()];
            let mut quotients = Vec::with_capacity(4);
            for x in &a {
                for y in &b {
                    quotients.push(x / y);
                }
            }
            let lo = quotients.iter().min()?;
            let hi = quotients.iter().max()?;
            Some(Self::new(
                Dyadic::from_rational(lo, sig, Round::Down),
                Dyadic::from_rational(hi, sig, Round::Up),
                self.precision_bits.min(other.precision_bits),
            ))
        } else {
            None
        }
    }

    /// Enclosure of `|x|`.
    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if self.hi.is_negative() || self.hi.is_zero() {
            self.neg()
        } else {
            let m = std::cmp::max(self.lo.abs(), self.hi.clone());
            Self::new(Dyadic::zero(), m, self.precision_bits)
        }
    }

    /// Interval hull.
    pub fn hull(&self, other: &RealEnclosure) -> Self {
        Self::new(
            std::cmp::min(self.lo.clone(), other.lo.clone()),
            std::cmp::max(self.hi.clone(), other.hi.clone()),
            self.precision_bits.min(other.precision_bits),
        )
    }

    fn working_bits(&self) -> u32 {
        self.precision_bits + 32
    }
}

impl fmt::Display for RealEnclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{:.12e}, {:.12e}]@{}",
            self.lo.to_f64(),
            self.hi.to_f64(),
            self.precision_bits
        )
    }
}

/// How far certified comparisons escalate before giving up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub start_bits: u32,
    pub cap_bits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            start_bits: 64,
            cap_bits: 4096,
        }
    }
}

impl PrecisionPolicy {
    /// `start, 2*start, 4*start, ...` up to and including the cap.
    pub fn ladder(&self) -> impl Iterator<Item = u32> {
        let cap = self.cap_bits.max(self.start_bits);
        std::iter::successors(Some(self.start_bits.max(4)), move |&b| {
            (b < cap).then(|| (b.saturating_mul(2)).min(cap))
        })
    }

    /// Compares `f(bits)` against `r`, doubling precision on overlap.
    /// Returns `Overlap` only if the cap is reached without a decision.
    pub fn compare<F>(&self, mut f: F, r: &Rational) -> Cmp3
    where
        F: FnMut(u32) -> RealEnclosure,
    {
        for bits in self.ladder() {
            match f(bits).cmp_rational(r) {
                Cmp3::Overlap => continue,
                decided => return decided,
            }
        }
        Cmp3::Overlap
    }

    /// `true` only when `f < r` is certified.
    pub fn certify_less<F>(&self, f: F, r: &Rational) -> bool
    where
        F: FnMut(u32) -> RealEnclosure,
    {
        self.compare(f, r) == Cmp3::Less
    }

    /// `true` only when `f > r` is certified.
    pub fn certify_greater<F>(&self, f: F, r: &Rational) -> bool
    where
        F: FnMut(u32) -> RealEnclosure,
    {
        self.compare(f, r) == Cmp3::Greater
    }
}
