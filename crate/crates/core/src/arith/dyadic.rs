use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Rational;

/// Rounding direction for conversions that cannot be exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

/// A binary fraction `mant * 2^exp`, kept normalized (odd mantissa, or zero with `exp == 0`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        if mant.is_zero() {
            return Self::zero();
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        Dyadic {
            mant: mant >> tz,
            exp: exp + tz as i64,
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Self::from_int(BigInt::one())
    }

    pub fn from_int(n: BigInt) -> Self {
        Self::new(n, 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn to_rational(&self) -> Rational {
        if self.exp >= 0 {
            Rational::from_integer(&self.mant << self.exp as usize)
        } else {
            Rational::new(self.mant.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    /// Exact `self * 2^k`.
    pub fn shl(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    pub fn neg(&self) -> Self {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    pub fn add(&self, other: &Dyadic) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        Self::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Self {
        Self::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    /// Position of the leading bit: `2^(msb) <= |self| < 2^(msb+1)`. `None` for zero.
    pub fn msb(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.mant.bits() as i64 - 1 + self.exp)
        }
    }

    /// Rounds to at most `sig_bits` significant bits in the given direction.
    pub fn round_sig(&self, sig_bits: u32, dir: Round) -> Self {
        let bits = self.mant.bits();
        if bits <= sig_bits as u64 {
            return self.clone();
        }
        let shift = (bits - sig_bits as u64) as usize;
        let divisor = BigInt::one() << shift;
        let q = match dir {
            Round::Down => self.mant.div_floor(&divisor),
            Round::Up => -((-&self.mant).div_floor(&divisor)),
        };
        Self::new(q, self.exp + shift as i64)
    }

    /// `floor` or `ceil` of `r * 2^k`, divided back by `2^k`: the nearest point of the grid `2^-k`.
    pub fn round_to_grid(r: &Rational, k: i64, dir: Round) -> Self {
        let (num, den) = scaled_parts(r, k);
        let q = match dir {
            Round::Down => num.div_floor(&den),
            Round::Up => -((-num).div_floor(&den)),
        };
        Self::new(q, -k)
    }

    /// Directed rounding of a rational to `sig_bits` significant bits.
    pub fn from_rational(r: &Rational, sig_bits: u32, dir: Round) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        let nb = r.numer().bits() as i64;
        let db = r.denom().bits() as i64;
        // |r| lies in [2^(nb-db-1), 2^(nb-db+1)).
        let k = sig_bits as i64 - (nb - db) + 1;
        Self::round_to_grid(r, k, dir)
    }

    pub fn cmp_rational(&self, r: &Rational) -> Ordering {
        let (a, b) = (r.numer(), r.denom());
        if self.exp >= 0 {
            ((&self.mant << self.exp as usize) * b).cmp(a)
        } else {
            (&self.mant * b).cmp(&(a << (-self.exp) as usize))
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let keep = 60.min(bits);
        let shift = bits - keep;
        let m = &self.mant >> shift as usize;
        let (sign, digits) = m.to_u64_digits();
        let mag = digits.first().copied().unwrap_or(0) as f64;
        let v = mag * 2f64.powi((self.exp + shift).clamp(-2000, 2000) as i32);
        if sign == Sign::Minus {
            -v
        } else {
            v
        }
    }
}

/// Numerator and denominator of `r * 2^k` as integers.
fn scaled_parts(r: &Rational, k: i64) -> (BigInt, BigInt) {
    if k >= 0 {
        (r.numer() << k as usize, r.denom().clone())
    } else {
        (r.numer().clone(), r.denom() << (-k) as usize)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mant, self.exp)
    }
}
