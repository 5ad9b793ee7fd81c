use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use cfnormal::arith::{enclose_exp, enclose_ln, rational, Dyadic, Rational, RealEnclosure, Round};
use cfnormal::brick::{cover_with_dary, index_digits, DaryInterval};
use cfnormal::contfrac::{
    cf_digits_of_rational, concat, continuant, convergents, cylinder, cylinder_length, cylinder_measure, CfWord,
};
use cfnormal::discrepancy::{bary_discrepancy, count_range, BaseBlock, CfBlock};
use cfnormal::metrics::{stream_stats, Stream};

fn words(max_len: usize, max_digit: u64) -> impl Strategy<Value = CfWord> {
    prop::collection::vec(1..=max_digit, 0..=max_len).prop_map(|d| CfWord::new(d).unwrap())
}

fn unit_rationals() -> impl Strategy<Value = Rational> {
    (1u64..1 << 40, 1u64..1 << 40).prop_map(|(a, b)| {
        let (a, b) = if a < b { (a, b) } else if a > b { (b, a) } else { (1, a + 1) };
        rational(a, b).unwrap()
    })
}

proptest! {
    #[test]
    fn convergents_are_unimodular(w in words(40, 1000)) {
        let c = convergents(&w);
        let det = c.determinant();
        prop_assert!(det == BigInt::one() || det == -BigInt::one());
        // q_1 < q_2 < ... along every prefix.
        let mut prev = BigInt::zero();
        for i in 1..=w.len() {
            let q = convergents(&w.prefix(i)).q_cur;
            prop_assert!(q > prev || (i == 1 && q == BigInt::one()));
            prev = q;
        }
    }

    #[test]
    fn continuant_is_denominator(w in words(30, 50)) {
        prop_assert_eq!(continuant(&w, 1, w.len()).unwrap(), convergents(&w).q_cur);
        prop_assert_eq!(continuant(&w, w.len() + 1, w.len()).unwrap(), BigInt::one());
        prop_assert_eq!(continuant(&w, w.len() + 2, w.len()).unwrap(), BigInt::zero());
    }

    #[test]
    fn cylinder_length_formula(w in words(30, 100)) {
        let c = cylinder(&w);
        prop_assert!(c.lo < c.hi);
        let conv = convergents(&w);
        let expected = Rational::new(BigInt::one(), &conv.q_cur * (&conv.q_cur + &conv.q_prev));
        prop_assert_eq!(cylinder_length(&w), expected.clone());
        prop_assert_eq!(&c.hi - &c.lo, expected);
    }

    #[test]
    fn cylinders_nest(a in words(15, 20), b in words(15, 20)) {
        let outer = cylinder(&a);
        let inner = cylinder(&concat(&a, &b));
        prop_assert!(outer.lo <= inner.lo && inner.hi <= outer.hi);
    }

    #[test]
    fn euclid_recovers_words(mut d in prop::collection::vec(1u64..=100, 1..=25), last in 2u64..=100) {
        d.push(last);
        let w = CfWord::new(d).unwrap();
        let x = convergents(&w).value();
        prop_assert_eq!(cf_digits_of_rational(&x, 1000).unwrap(), w);
    }

    #[test]
    fn gauss_tail_inverts_cylinder_map(w in words(12, 30), y in unit_rationals()) {
        let conv = convergents(&w);
        let x = (Rational::from_integer(conv.p_cur.clone()) + &y * &conv.p_prev)
            / (Rational::from_integer(conv.q_cur.clone()) + &y * &conv.q_prev);
        let c = cylinder(&w);
        prop_assert!(c.lo < x && x < c.hi);
        prop_assert_eq!(conv.tail_of(&x), y.clone());
        let full = cf_digits_of_rational(&x, 10_000).unwrap();
        let tail = cf_digits_of_rational(&y, 10_000).unwrap();
        prop_assert_eq!(full, concat(&w, &tail));
    }

    #[test]
    fn gauss_measure_is_additive(w in words(6, 8)) {
        // mu(I_w) = sum over children, up to the tail a_{n+1} > 30.
        let whole = cylinder_measure(&w, 80);
        let mut sum = RealEnclosure::exact(Dyadic::zero(), 80);
        for a in 1..=30u64 {
            let mut d = w.digits().to_vec();
            d.push(a);
            sum = sum.add(&cylinder_measure(&CfWord::new(d).unwrap(), 80));
        }
        prop_assert!(sum.lo_rational() < whole.hi_rational());
    }

    #[test]
    fn dyadic_rounding_brackets(x in unit_rationals(), bits in 2u32..80) {
        let lo = Dyadic::from_rational(&x, bits, Round::Down).to_rational();
        let hi = Dyadic::from_rational(&x, bits, Round::Up).to_rational();
        prop_assert!(lo <= x && x <= hi);
    }

    #[test]
    fn enclosure_arithmetic_contains(a in unit_rationals(), b in unit_rationals()) {
        let ea = RealEnclosure::from_rational(&a, 40);
        let eb = RealEnclosure::from_rational(&b, 40);
        prop_assert!(ea.add(&eb).contains(&(&a + &b)));
        prop_assert!(ea.mul(&eb).contains(&(&a * &b)));
        prop_assert!(ea.div(&eb).unwrap().contains(&(&a / &b)));
    }

    #[test]
    fn exp_and_log_are_inverse(x in unit_rationals()) {
        let e = enclose_exp(&x, 64);
        prop_assert!(e.lo_rational() > Rational::one());
        let l = enclose_ln(&e.lo_rational(), 64);
        let h = enclose_ln(&e.hi_rational(), 64);
        prop_assert!(l.lo_rational() <= x && x <= h.hi_rational());
    }

    #[test]
    fn count_range_is_sound(num in 1u64..999, n in 1u64..300, theta_num in 1u64..400) {
        let mu = RealEnclosure::from_rational(&rational(num, 1000).unwrap(), 20);
        let theta = rational(theta_num, 1000).unwrap();
        let inside = |c: u64| {
            let f = Rational::new(BigInt::from(c), BigInt::from(n));
            (&f - mu.hi_rational()).abs() < theta && (&f - mu.lo_rational()).abs() < theta
        };
        match count_range(&mu, &theta, n) {
            Some((lo, hi)) => {
                prop_assert!(lo <= hi && hi <= n);
                for c in lo..=hi {
                    prop_assert!(inside(c));
                }
                prop_assert!(lo == 0 || !inside(lo - 1));
                prop_assert!(hi == n || !inside(hi + 1));
            }
            None => prop_assert!((0..=n).all(|c| !inside(c))),
        }
    }

    #[test]
    fn bary_discrepancy_by_definition(b in 2u32..8, digits in prop::collection::vec(0u32..8, 1..60)) {
        let digits: Vec<u32> = digits.into_iter().map(|x| x % b).collect();
        let u = BaseBlock::new(b, digits.clone()).unwrap();
        let n = digits.len();
        let worst = (0..b)
            .map(|s| {
                let c = digits.iter().filter(|&&x| x == s).count();
                (Rational::new(BigInt::from(c), BigInt::from(n)) - Rational::new(BigInt::one(), BigInt::from(b))).abs()
            })
            .max()
            .unwrap();
        prop_assert_eq!(bary_discrepancy(&u, n).unwrap(), worst);
    }

    #[test]
    fn dary_cover_contains_interval(x in unit_rationals(), shrink in 2u64..1000, d in 2u32..12) {
        let len = Rational::new(BigInt::one(), BigInt::from(shrink)) * (Rational::one() - &x);
        let hi = &x + len;
        for m in 0..8u64 {
            if let Ok(cover) = cover_with_dary(&x, &hi, d, m) {
                prop_assert!(cover.contains(&x, &hi));
                prop_assert!(cover.span() == 1 || cover.span() == 2);
            }
        }
    }

    #[test]
    fn constituent_digits_roundtrip(d in 2u32..20, order in 0u64..12, frac in 0u64..1_000_000) {
        let scale = BigInt::from(d).pow(order as u32);
        let start = (BigInt::from(frac) * &scale) / BigInt::from(1_000_000u64);
        let s = DaryInterval::new(d, order, start.clone(), 1).unwrap();
        let digits = index_digits(&start, d, order);
        prop_assert_eq!(digits.len() as u64, order);
        let back = digits.iter().fold(BigInt::zero(), |acc, &x| acc * d + x);
        prop_assert_eq!(back, start);
        prop_assert_eq!(s.common_prefix(), digits);
    }

    #[test]
    fn stream_trajectories_end_at_exact_value(d in prop::collection::vec(1u64..5, 1..200)) {
        let w = CfWord::new(d).unwrap();
        let v = CfBlock::new(vec![1]).unwrap();
        let r = stream_stats(Stream::Cf(&w), std::slice::from_ref(&v)).unwrap();
        let t = &r.trajectories["block_1"];
        prop_assert_eq!(t.len(), w.len());
        let b = &r.certified["final_block_1"];
        prop_assert!(b.lo_f64() - 1e-12 <= t[t.len() - 1] && t[t.len() - 1] <= b.hi_f64() + 1e-12);
    }
}
