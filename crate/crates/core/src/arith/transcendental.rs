//! Rigorous enclosures of pi, ln 2, Levy's constant, `exp` and `ln`.
//!
//! Every routine first computes a raw fixed-point bracket `[lo, hi] * 2^-w` with an explicit
//! truncation/rounding error budget, then snaps it outward onto a grid of step
//! `2^(scale - bits - 4)` padded by two grid steps. The padding makes enclosures at increasing
//! precision nest, provided the raw bracket is narrower than `2^(scale - bits - 6)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::dyadic::{Dyadic, Round};
use super::enclosure::RealEnclosure;
use super::Rational;

/// Raw bracket `[lo, hi] * 2^-w`.
struct Fixed {
    lo: BigInt,
    hi: BigInt,
    w: u32,
}

impl Fixed {
    fn to_dyadics(&self) -> (Dyadic, Dyadic) {
        (
            Dyadic::new(self.lo.clone(), -(self.w as i64)),
            Dyadic::new(self.hi.clone(), -(self.w as i64)),
        )
    }
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

/// `atan(1/k)` for `k >= 2`, alternating Taylor series.
fn atan_inv(k: u64, w: u32) -> Fixed {
    let k2 = BigInt::from(k) * BigInt::from(k);
    let mut p = (BigInt::one() << w as usize) / BigInt::from(k);
    let mut sum = BigInt::zero();
    let mut i: u64 = 0;
    while !p.is_zero() {
        let term = &p / BigInt::from(2 * i + 1);
        if i.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        p = p.div_floor(&k2);
        i += 1;
    }
    let err = BigInt::from(3 * i + 2);
    Fixed {
        lo: &sum - &err,
        hi: sum + err,
        w,
    }
}

/// `atanh(a/b)` for `0 <= a/b <= 1/3`.
fn atanh_small(a: &BigInt, b: &BigInt, w: u32) -> Fixed {
    debug_assert!(!a.is_negative() && BigInt::from(3) * a <= *b);
    if a.is_zero() {
        return Fixed {
            lo: BigInt::zero(),
            hi: BigInt::zero(),
            w,
        };
    }
    let a2 = a * a;
    let b2 = b * b;
    let mut p = (a << w as usize).div_floor(b);
    let mut sum = BigInt::zero();
    let mut i: u64 = 0;
    while !p.is_zero() {
        sum += &p / BigInt::from(2 * i + 1);
        p = (p * &a2).div_floor(&b2);
        i += 1;
    }
    let err = BigInt::from(3 * i + 3);
    Fixed {
        lo: sum.clone(),
        hi: sum + err,
        w,
    }
}

/// `atanh(z)` for `|z| <= 1/3`, any sign.
fn atanh_signed(z: &Rational, w: u32) -> Fixed {
    let a = z.numer().abs();
    let f = atanh_small(&a, z.denom(), w);
    if z.is_negative() {
        Fixed {
            lo: -f.hi,
            hi: -f.lo,
            w,
        }
    } else {
        f
    }
}

fn pi_fixed(w: u32) -> Fixed {
    let a = atan_inv(5, w);
    let b = atan_inv(239, w);
    Fixed {
        lo: BigInt::from(16) * &a.lo - BigInt::from(4) * &b.hi,
        hi: BigInt::from(16) * &a.hi - BigInt::from(4) * &b.lo,
        w,
    }
}

fn ln2_fixed(w: u32) -> Fixed {
    let f = atanh_small(&BigInt::one(), &BigInt::from(3), w);
    Fixed {
        lo: f.lo * 2,
        hi: f.hi * 2,
        w,
    }
}

fn levy_fixed(w: u32) -> Fixed {
    let pi = pi_fixed(w);
    let ln2 = ln2_fixed(w);
    let twelve = BigInt::from(12);
    Fixed {
        lo: (&pi.lo * &pi.lo).div_floor(&(&twelve * &ln2.hi)),
        hi: ceil_div(&(&pi.hi * &pi.hi), &(&twelve * &ln2.lo)),
        w,
    }
}

/// Splits `r > 0` as `2^k * m` with `2/3 <= m <= 4/3`.
fn reduce_log_argument(r: &Rational) -> (i64, Rational) {
    let k0 = r.numer().bits() as i64 - r.denom().bits() as i64;
    let mut k = k0;
    let mut m = scale_pow2(r, -k);
    let two_thirds = Rational::new(2.into(), 3.into());
    let four_thirds = Rational::new(4.into(), 3.into());
    while m > four_thirds {
        k += 1;
        m = scale_pow2(r, -k);
    }
    while m < two_thirds {
        k -= 1;
        m = scale_pow2(r, -k);
    }
    (k, m)
}

fn scale_pow2(r: &Rational, k: i64) -> Rational {
    if k >= 0 {
        Rational::new(r.numer() << k as usize, r.denom().clone())
    } else {
        Rational::new(r.numer().clone(), r.denom() << (-k) as usize)
    }
}

fn ln_fixed(r: &Rational, w: u32) -> Fixed {
    let (k, m) = reduce_log_argument(r);
    let one = Rational::one();
    let z = (&m - &one) / (&m + &one);
    let at = atanh_signed(&z, w);
    let ln2 = ln2_fixed(w);
    let kb = BigInt::from(k);
    let (klo, khi) = if k >= 0 {
        (&kb * &ln2.lo, &kb * &ln2.hi)
    } else {
        (&kb * &ln2.hi, &kb * &ln2.lo)
    };
    Fixed {
        lo: klo + at.lo * 2,
        hi: khi + at.hi * 2,
        w,
    }
}

/// `e^x` for `x >= 0`, by halving `s` times, Taylor series, then `s` squarings.
fn exp_nonneg(x: &Rational, w: u32) -> Fixed {
    debug_assert!(!x.is_negative());
    let a = x.numer().clone();
    let b = x.denom().clone();
    // Smallest s with x / 2^s <= 1/2.
    let mut s: u32 = 0;
    while BigInt::from(2) * &a > (&b << s as usize) {
        s += 1;
    }
    let wp = w + s + 8;
    let den = &b << s as usize;
    let mut t = BigInt::one() << wp as usize;
    let mut sum = t.clone();
    let mut i: u64 = 1;
    while !t.is_zero() {
        t = (t * &a).div_floor(&(&den * BigInt::from(i)));
        sum += &t;
        i += 1;
    }
    let mut lo = sum.clone();
    let mut hi = sum + BigInt::from(2 * i + 4);
    let unit = BigInt::one() << wp as usize;
    for _ in 0..s {
        lo = (&lo * &lo).div_floor(&unit);
        hi = ceil_div(&(&hi * &hi), &unit);
    }
    let drop = BigInt::one() << (wp - w) as usize;
    Fixed {
        lo: lo.div_floor(&drop),
        hi: ceil_div(&hi, &drop),
        w,
    }
}

fn exp_raw(x: &Rational, w: u32) -> (Dyadic, Dyadic) {
    if !x.is_negative() {
        return exp_nonneg(x, w).to_dyadics();
    }
    let f = exp_nonneg(&(-x), w);
    let unit = BigInt::one() << w as usize;
    let sig = w + 8;
    let lo = Rational::new(unit.clone(), f.hi.clone());
    let hi = Rational::new(unit, f.lo.clone());
    (
        Dyadic::from_rational(&lo, sig, Round::Down),
        Dyadic::from_rational(&hi, sig, Round::Up),
    )
}

/// Snaps a raw bracket onto the nesting grid, or `None` if the bracket is too wide.
fn finalize(lo: &Dyadic, hi: &Dyadic, scale: i64, bits: u32) -> Option<RealEnclosure> {
    let limit = Dyadic::new(BigInt::one(), scale - bits as i64 - 6);
    if hi.sub(lo) > limit {
        return None;
    }
    let k = bits as i64 + 4 - scale;
    let pad = Dyadic::new(BigInt::from(2), -k);
    let lo = Dyadic::round_to_grid(&lo.to_rational(), k, Round::Down).sub(&pad);
    let hi = Dyadic::round_to_grid(&hi.to_rational(), k, Round::Up).add(&pad);
    Some(RealEnclosure::new(lo, hi, bits))
}

/// Repeats a raw computation with more guard bits until it is narrow enough to finalize.
fn with_guard<F>(bits: u32, scale: i64, mut raw: F) -> RealEnclosure
where
    F: FnMut(u32) -> (Dyadic, Dyadic),
{
    let mut guard: u32 = 16;
    loop {
        let w = (bits as i64 - scale + 8).max(8) as u32 + guard;
        let (lo, hi) = raw(w);
        if let Some(e) = finalize(&lo, &hi, scale, bits) {
            return e;
        }
        guard *= 2;
    }
}

pub fn enclose_pi(bits: u32) -> RealEnclosure {
    with_guard(bits, 2, |w| pi_fixed(w).to_dyadics())
}

pub fn enclose_ln2(bits: u32) -> RealEnclosure {
    with_guard(bits, 0, |w| ln2_fixed(w).to_dyadics())
}

/// Levy's constant `pi^2 / (12 ln 2)`, with `hi - lo <= 2^-bits`.
pub fn enclose_levy(bits: u32) -> RealEnclosure {
    with_guard(bits, 1, |w| levy_fixed(w).to_dyadics())
}

/// `e^x` with `hi - lo <= 2^-bits * e^x`.
pub fn enclose_exp(x: &Rational, bits: u32) -> RealEnclosure {
    // floor(x * log2(e)) lower bound, via a rational slightly below log2(e).
    let log2e = Rational::new(14_426_950.into(), 10_000_000.into());
    let scale = (x * log2e).floor().to_integer();
    let scale = i64::try_from(scale).expect("exponent argument out of range") - 1;
    with_guard(bits, scale, |w| exp_raw(x, w))
}

/// Natural logarithm of a positive rational. Width is absolute, `<= 2^(S - bits)` with
/// `2^S >= |ln x|` rounded up to a power of two.
pub fn enclose_ln(x: &Rational, bits: u32) -> RealEnclosure {
    assert!(x.is_positive(), "logarithm of a non-positive rational");
    let (k, _) = reduce_log_argument(x);
    let scale = (64 - (k.unsigned_abs() + 1).leading_zeros()) as i64;
    with_guard(bits, scale, |w| ln_fixed(x, w).to_dyadics())
}

/// `e^x` for an enclosed argument: monotone, so evaluate at both endpoints.
pub fn exp_of_enclosure(x: &RealEnclosure, bits: u32) -> RealEnclosure {
    let lo = enclose_exp(&x.lo_rational(), bits);
    let hi = enclose_exp(&x.hi_rational(), bits);
    RealEnclosure::new(lo.lo().clone(), hi.hi().clone(), bits)
}

/// `ln x` for an enclosed positive argument.
pub fn ln_of_enclosure(x: &RealEnclosure, bits: u32) -> Option<RealEnclosure> {
    let lo = x.lo_rational();
    if !lo.is_positive() {
        return None;
    }
    let a = enclose_ln(&lo, bits);
    let b = enclose_ln(&x.hi_rational(), bits);
    Some(RealEnclosure::new(a.lo().clone(), b.hi().clone(), bits))
}
