//! Exact rationals and rigorous real enclosures.
//!
//! All interval endpoints and lengths in the construction are [`Rational`]s. Transcendental
//! quantities (Levy's constant, `e^x`, Gauss measures) are carried as [`RealEnclosure`]s whose
//! dyadic bounds are rounded outward.

mod dyadic;
mod enclosure;
pub mod serde_str;
mod transcendental;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

pub use dyadic::{Dyadic, Round};
pub use enclosure::{Cmp3, PrecisionPolicy, RealEnclosure};
pub use serde_str::parse_rational;
pub use transcendental::{
    enclose_exp, enclose_levy, enclose_ln, enclose_ln2, enclose_pi, exp_of_enclosure,
    ln_of_enclosure,
};

/// Exact unbounded fraction in canonical form.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("zero denominator")]
    ZeroDenominator,
}

/// Builds a canonical rational: reduced, sign on the numerator.
pub fn rational(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Rational, ArithError> {
    let den = den.into();
    if den.is_zero() {
        return Err(ArithError::ZeroDenominator);
    }
    Ok(BigRational::new(num.into(), den))
}

/// Compares an enclosure against a rational.
pub fn cmp(e: &RealEnclosure, r: &Rational) -> Cmp3 {
    e.cmp_rational(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_rationals() {
        let r = rational(2, 4).unwrap();
        assert_eq!((r.numer().clone(), r.denom().clone()), (1.into(), 2.into()));
        let z = rational(0, 5).unwrap();
        assert_eq!((z.numer().clone(), z.denom().clone()), (0.into(), 1.into()));
        let s = rational(-3, -6).unwrap();
        assert_eq!((s.numer().clone(), s.denom().clone()), (1.into(), 2.into()));
        assert_eq!(rational(1, 0), Err(ArithError::ZeroDenominator));
    }

    #[test]
    fn levy_below_six_fifths() {
        assert_eq!(cmp(&enclose_levy(53), &rational(6, 5).unwrap()), Cmp3::Less);
    }
}
