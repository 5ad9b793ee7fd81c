//! Monte Carlo checks of the metric facts the construction rests on (Gaussian behaviour of
//! `log q_n`, the mass of the length window, large deviations of block frequencies) and
//! normality statistics of produced digit streams.
//!
//! Sampling draws `(2j+1)/2^(B+1)` with `j` uniform on `B` bits, so every sample is an exact
//! rational. The stream of chunk `i` is ChaCha8 seeded with the master seed on stream `i`, and
//! chunk results are reduced in chunk order, so reports do not depend on the thread count.

mod report;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{
    enclose_exp, enclose_levy, enclose_ln, enclose_ln2, ln_of_enclosure, Cmp3, PrecisionPolicy,
    Rational, RealEnclosure,
};
use crate::brick::{ConstructionConstants, WindowFactors};
use crate::contfrac::{convergents, cylinder, cylinder_measure, euclid_digits, gauss_measure, CfWord};
use crate::discrepancy::{bary_discrepancy, hw_bad_count, occurrences, BaseBlock, CfBlock, DiscrepancyError};

pub use report::{Bounds, ReportError, SampleReport, REPORT_VERSION};

const CHUNK: u64 = 512;
/// Digits skipped before tallying digit frequencies.
pub const BURN_IN: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("{0} must be at least 1")]
    TooSmall(&'static str),
    #[error("delta must be positive")]
    Delta,
    #[error(transparent)]
    Discrepancy(#[from] DiscrepancyError),
}

/// Random bits per sample for `digits` cf digits: `q_n^2` must stay well below `2^B`.
pub fn sample_bits(digits: usize) -> u64 {
    (4 * digits as u64 + 64).max(256)
}

fn uniform_unit(rng: &mut ChaCha8Rng, bits: u64) -> Rational {
    let mut bytes = vec![0u8; bits.div_ceil(8) as usize];
    rng.fill_bytes(&mut bytes);
    let mut j = BigUint::from_bytes_le(&bytes);
    let extra = bytes.len() as u64 * 8 - bits;
    j >>= extra;
    let num = BigInt::from_biguint(Sign::Plus, (j << 1u32) + 1u32);
    Rational::new(num, BigInt::one() << (bits + 1))
}

/// Runs `f` on `samples` draws split into chunks in parallel, returning results in draw order.
fn draw<T, F>(samples: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let per: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let len = CHUNK.min(samples - i * CHUNK);
            (0..len).map(|_| f(&mut rng)).collect()
        })
        .collect();
    per.into_iter().flatten().collect()
}

fn mean_var(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (mut n, mut s) = (0f64, 0f64);
    for x in xs.clone() {
        n += 1.0;
        s += x;
    }
    if n == 0.0 {
        return (0.0, 0.0);
    }
    let m = s / n;
    let v = if n > 1.0 { xs.map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (m, v)
}

/// Standard deviation of an empirical proportion with success rate `p`.
fn prop_sd(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n.max(1) as f64).sqrt()
}

/// `log_2(1 + 1/(k(k+2)))`, the Gauss measure of the digit-`k` cylinder.
pub fn gauss_kuzmin(k: u64, bits: u32) -> RealEnclosure {
    let lo = Rational::new(BigInt::one(), BigInt::from(k + 1));
    let hi = Rational::new(BigInt::one(), BigInt::from(k));
    gauss_measure(&lo, &hi, bits).expect("digit cylinders are proper")
}

fn ln_f64(q: &BigInt) -> f64 {
    enclose_ln(&Rational::from_integer(q.clone()), 64).midpoint_f64()
}

struct TclSample {
    log_q: f64,
    /// Tallies of digits 1..=5 over the frequency positions.
    tally: [u32; 5],
}

/// Samples `log q_n` for uniform points and tallies digit frequencies.
///
/// Estimates `mean_log_qn_over_n`, the variance of `(log q_n - nL)/sqrt(n)`, its tail fractions
/// beyond 1 and 2, and the frequency of digits 1..5 over positions `BURN_IN+1 ..= BURN_IN+n`
/// (pooled per sample). The check `gauss_kuzmin_3sigma` compares those frequencies with
/// `log_2(1+1/(k(k+2)))` within three standard deviations of a per-sample proportion, which
/// bounds the deviation of the pooled estimator.
pub fn sample_log_qn(samples: u64, n: usize, seed: u64) -> Result<SampleReport, MetricsError> {
    if samples == 0 {
        return Err(MetricsError::TooSmall("samples"));
    }
    if n == 0 {
        return Err(MetricsError::TooSmall("n"));
    }
    let total = n + BURN_IN;
    let bits = sample_bits(total);
    let out = draw(samples, seed, |rng| loop {
        let x = uniform_unit(rng, bits);
        let Ok((digits, false)) = euclid_digits(x.numer(), x.denom(), total) else {
            continue;
        };
        let conv = crate::contfrac::Convergents::initial().extended(&digits[..n]);
        let mut tally = [0u32; 5];
        for &a in &digits[BURN_IN..] {
            if (1..=5).contains(&a) {
                tally[a as usize - 1] += 1;
            }
        }
        break TclSample { log_q: ln_f64(&conv.q_cur), tally };
    });

    let levy = enclose_levy(64);
    let l = levy.midpoint_f64();
    let nf = n as f64;
    let (mean, _) = mean_var(out.iter().map(|s| s.log_q));
    let z = out.iter().map(|s| (s.log_q - nf * l) / nf.sqrt());
    let (_, zvar) = mean_var(z.clone());
    let tail = |k: f64| z.clone().filter(|v| v.abs() > k).count() as f64 / samples as f64;

    let mut r = SampleReport::new("tcl", samples, n as u64, seed);
    r.param("bits", bits);
    r.param("burn_in", BURN_IN);
    r.estimate("mean_log_qn_over_n", mean / nf);
    r.estimate("z_variance", zvar);
    r.estimate("tail_z_gt_1", tail(1.0));
    r.estimate("tail_z_gt_2", tail(2.0));
    r.certify("levy", Bounds::from(&levy));
    let mut gk_ok = true;
    for k in 1..=5u64 {
        let f = out.iter().map(|s| s.tally[k as usize - 1] as f64).sum::<f64>() / (samples as f64 * nf);
        let gk = gauss_kuzmin(k, 64);
        let sd = prop_sd(gk.midpoint_f64(), samples);
        gk_ok &= (f - gk.lo().to_f64()).abs() <= 3.0 * sd && (f - gk.hi().to_f64()).abs() <= 3.0 * sd;
        r.estimate(&format!("freq_digit_{k}"), f);
        r.estimate(&format!("freq_digit_{k}_sd"), sd);
        r.certify(&format!("gauss_kuzmin_{k}"), Bounds::from(&gk));
    }
    r.check("gauss_kuzmin_3sigma", gk_ok);
    Ok(r)
}

/// A uniform point of the cylinder of `parent` and its first `m` relative digits, or `None`
/// when the point's expansion ends within them.
fn relative_sample(rng: &mut ChaCha8Rng, parent: &CfWord, m: usize) -> Option<Vec<u64>> {
    let c = cylinder(parent);
    let bits = sample_bits(m) + 2 * c.conv.q_cur.bits();
    let x = &c.lo + (&c.hi - &c.lo) * uniform_unit(rng, bits);
    let y = c.conv.tail_of(&x);
    match euclid_digits(y.numer(), y.denom(), m) {
        Ok((d, false)) if d.len() == m => Some(d),
        _ => None,
    }
}

/// Whether `E_lo <= r <= E_hi`, refining the factors on overlap. `None` if undecided at the cap.
fn in_window(r: &Rational, fixed: &WindowFactors, n: u64, c: &Rational, policy: &PrecisionPolicy) -> Option<bool> {
    let decide = |f: &WindowFactors| {
        let lo = f.lower.cmp_rational(r);
        let hi = f.upper.cmp_rational(r);
        match (lo, hi) {
            (Cmp3::Greater, _) | (_, Cmp3::Less) => Some(false),
            (Cmp3::Less, Cmp3::Greater) => Some(true),
            _ => None,
        }
    };
    if let Some(v) = decide(fixed) {
        return Some(v);
    }
    policy.ladder().skip(1).find_map(|bits| decide(&WindowFactors::new(n, c, bits)))
}

/// Relative Lebesgue mass of points of the cylinder of `parent` whose relative cylinder `J` of
/// order `n` has `(1/4)e^(-2nL-2c) <= |J|/|I| <= 2e^(-2nL+2c)`, reported next to `1/sqrt(n)`.
pub fn cfgrande_window_mass(
    parent: &CfWord,
    n: usize,
    samples: u64,
    cc: &ConstructionConstants,
    seed: u64,
) -> Result<SampleReport, MetricsError> {
    if samples == 0 {
        return Err(MetricsError::TooSmall("samples"));
    }
    if n == 0 {
        return Err(MetricsError::TooSmall("n"));
    }
    let pc = convergents(parent);
    let inv_parent = pc.inverse_length();
    let factors = WindowFactors::new(n as u64, &cc.c, cc.precision.start_bits);
    let hits = draw(samples, seed, |rng| {
        let Some(d) = relative_sample(rng, parent, n) else {
            return (false, true, false);
        };
        let j = pc.extended(&d);
        let ratio = Rational::new(inv_parent.clone(), j.inverse_length());
        match in_window(&ratio, &factors, n as u64, &cc.c, &cc.precision) {
            Some(v) => (v, false, false),
            None => (false, false, true),
        }
    });
    let inside = hits.iter().filter(|h| h.0).count() as u64;
    let mass = inside as f64 / samples as f64;
    let mut r = SampleReport::new("cfgrande", samples, n as u64, seed);
    r.param("parent", format!("{:?}", parent.digits()));
    r.param("c", &cc.c);
    r.estimate("mass", mass);
    r.estimate("mass_sd", prop_sd(mass, samples));
    r.estimate("inv_sqrt_n", 1.0 / (n as f64).sqrt());
    r.estimate("mass_times_sqrt_n", mass * (n as f64).sqrt());
    r.estimate("degenerate", hits.iter().filter(|h| h.1).count() as f64);
    r.estimate("undecided", hits.iter().filter(|h| h.2).count() as f64);
    r.certify("lower_factor", Bounds::from(&factors.lower));
    r.certify("upper_factor", Bounds::from(&factors.upper));
    Ok(r)
}

/// `M(delta, k) = ceil(k - log(delta^2 / (2 log 2)))`, at least 1.
pub fn kpw_m(delta: &Rational, k: usize, policy: &PrecisionPolicy) -> Result<u64, MetricsError> {
    if *delta <= Rational::zero() {
        return Err(MetricsError::Delta);
    }
    let k = Rational::from_integer(BigInt::from(k));
    for bits in policy.ladder() {
        // k - 2 log delta + log 2 + log log 2
        let ln2 = enclose_ln2(bits + 8);
        let lnln2 = ln_of_enclosure(&ln2, bits + 8).expect("log 2 is positive");
        let x = enclose_ln(&(delta * delta), bits + 8).neg().add(&ln2).add(&lnln2).add_rational(&k);
        let (lo, hi) = (x.lo_rational(), x.hi_rational());
        let (fl, fh) = (lo.floor(), hi.floor());
        if fl == fh && lo != fl {
            let m = fl.to_integer() + BigInt::one();
            return Ok(m.to_u64().unwrap_or(u64::MAX).max(1));
        }
    }
    // Never reached for rational delta: the value is transcendental.
    Err(MetricsError::Delta)
}

/// Enclosure of `6 M e^(-delta^2 n / (2M))`.
pub fn kpw_bound(delta: &Rational, m: u64, n: u64, bits: u32) -> RealEnclosure {
    let expo = -(delta * delta * Rational::from_integer(BigInt::from(n)))
        / Rational::from_integer(BigInt::from(2 * m));
    enclose_exp(&expo, bits).mul_rational(&Rational::from_integer(BigInt::from(6 * m)))
}

/// Whether `|f - mu| > delta` for the Gauss measure `mu` of `block`, refining on overlap.
/// Undecided comparisons count as deviations.
fn deviates(f: &Rational, delta: &Rational, block: &CfWord, mu: &RealEnclosure, policy: &PrecisionPolicy) -> bool {
    let decide = |mu: &RealEnclosure| {
        let (lo, hi) = (mu.lo_rational(), mu.hi_rational());
        if f - delta > hi || f + delta < lo {
            Some(true)
        } else if f - delta < lo && f + delta > hi {
            Some(false)
        } else {
            None
        }
    };
    decide(mu)
        .or_else(|| policy.ladder().skip(1).find_map(|b| decide(&cylinder_measure(block, b))))
        .unwrap_or(true)
}

/// Conditional measure of points of the cylinder of `parent` whose frequency of `block` over
/// the `n` windows after the parent deviates from its Gauss measure by more than `delta`.
/// The check `tail_below_bound` compares the estimate plus three standard deviations against
/// `6 M e^(-delta^2 n/(2M))`.
pub fn kpw_tail_estimate(
    parent: &CfWord,
    block: &CfBlock,
    n: usize,
    delta: &Rational,
    samples: u64,
    seed: u64,
) -> Result<SampleReport, MetricsError> {
    if samples == 0 {
        return Err(MetricsError::TooSmall("samples"));
    }
    if n == 0 {
        return Err(MetricsError::TooSmall("n"));
    }
    let policy = PrecisionPolicy::default();
    let m = kpw_m(delta, block.len(), &policy)?;
    let bound = kpw_bound(delta, m, n as u64, 64);
    let bw = block.as_word();
    let mu = cylinder_measure(&bw, 64);
    let len = n + block.len() - 1;
    let flags = draw(samples, seed, |rng| {
        let Some(d) = relative_sample(rng, parent, len) else {
            return (false, true);
        };
        let count = d.windows(block.len()).filter(|w| *w == block.digits()).count();
        let f = Rational::new(BigInt::from(count), BigInt::from(n));
        (deviates(&f, delta, &bw, &mu, &policy), false)
    });
    let tail = flags.iter().filter(|f| f.0).count() as f64 / samples as f64;
    let sd = prop_sd(tail, samples);
    let mut r = SampleReport::new("kpw", samples, n as u64, seed);
    r.param("parent", format!("{:?}", parent.digits()));
    r.param("block", format!("{:?}", block.digits()));
    r.param("delta", delta);
    r.param("m", m);
    r.estimate("tail", tail);
    r.estimate("tail_sd", sd);
    r.estimate("degenerate", flags.iter().filter(|f| f.1).count() as f64);
    r.certify("block_measure", Bounds::from(&mu));
    r.certify("bound", Bounds::from(&bound));
    r.check("tail_below_bound", tail <= bound.hi().to_f64() + 3.0 * sd);
    Ok(r)
}

/// Exhaustive bad-block count for base `b`, length `k`, threshold `eps`, against
/// `2 b^(k+1) e^(-b eps^2 k/6)`.
pub fn hw_report(b: u32, k: usize, eps: &Rational) -> Result<SampleReport, MetricsError> {
    let (count, bound) = hw_bad_count(b, k, eps)?;
    let mut r = SampleReport::new("hw", (b as u64).pow(k as u32), k as u64, 0);
    r.param("base", b);
    r.param("eps", eps);
    r.estimate("count", count as f64);
    r.certify("count", Bounds::exact(Rational::from_integer(BigInt::from(count))));
    r.certify("bound", Bounds::from(&bound));
    r.check(
        "count_below_bound",
        bound.cmp_rational(&Rational::from_integer(BigInt::from(count))) == Cmp3::Greater,
    );
    Ok(r)
}

/// A produced digit stream.
#[derive(Clone, Copy, Debug)]
pub enum Stream<'a> {
    Cf(&'a CfWord),
    Base(&'a BaseBlock),
}

/// Discrepancy trajectories over prefixes: per cf block `|occ/m - mu(I_v)|` for every prefix
/// length `m`, or the b-ary discrepancy of every prefix of a base-d stream.
pub fn stream_stats(stream: Stream<'_>, blocks: &[CfBlock]) -> Result<SampleReport, MetricsError> {
    match stream {
        Stream::Cf(w) => {
            if w.is_empty() {
                return Err(MetricsError::TooSmall("stream length"));
            }
            let mut r = SampleReport::new("stream", w.len() as u64, w.len() as u64, 0);
            r.param("stream", "cf");
            for v in blocks {
                let name = block_name(v);
                let mu = cylinder_measure(&v.as_word(), 64);
                let mid = mu.midpoint_f64();
                let k = v.len();
                let d = w.digits();
                let mut occ = 0usize;
                let traj: Vec<f64> = (1..=d.len())
                    .map(|m| {
                        if m >= k && &d[m - k..m] == v.digits() {
                            occ += 1;
                        }
                        (occ as f64 / m as f64 - mid).abs()
                    })
                    .collect();
                debug_assert_eq!(occ, occurrences(w, v));
                let f = Rational::new(BigInt::from(occ), BigInt::from(d.len()));
                let fin = mu.neg().add_rational(&f).abs();
                r.estimate(&format!("final_{name}"), *traj.last().expect("nonempty"));
                r.certify(&format!("final_{name}"), Bounds::from(&fin));
                r.trajectories.insert(name, traj);
            }
            Ok(r)
        }
        Stream::Base(u) => {
            if u.is_empty() {
                return Err(MetricsError::TooSmall("stream length"));
            }
            let mut r = SampleReport::new("stream", u.len() as u64, u.len() as u64, 0);
            r.param("stream", format!("base{}", u.base()));
            let b = u.base() as usize;
            let mut counts = vec![0u64; b];
            let traj: Vec<f64> = u
                .digits()
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    counts[x as usize] += 1;
                    let m = (i + 1) as f64;
                    counts.iter().map(|&c| (c as f64 / m - 1.0 / b as f64).abs()).fold(0.0, f64::max)
                })
                .collect();
            let fin = bary_discrepancy(u, u.len())?;
            r.estimate("final_discrepancy", *traj.last().expect("nonempty"));
            r.certify("final_discrepancy", Bounds::exact(fin));
            r.trajectories.insert("discrepancy".into(), traj);
            Ok(r)
        }
    }
}

fn block_name(v: &CfBlock) -> String {
    let parts: Vec<String> = v.digits().iter().map(u64::to_string).collect();
    format!("block_{}", parts.join("_"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational;

    #[test]
    fn uniform_points_are_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x = uniform_unit(&mut rng, 256);
            assert!(x > Rational::zero() && x < Rational::one());
            assert_eq!(x.denom().bits(), 258);
        }
    }

    #[test]
    fn m_examples_and_monotonicity() {
        let p = PrecisionPolicy::default();
        // 1 - log(1/16 / (2 log 2)) = 1 + 3.0995...
        assert_eq!(kpw_m(&rational(1, 4).unwrap(), 1, &p).unwrap(), 5);
        let mut prev = 0;
        for k in 1..6 {
            let m = kpw_m(&rational(1, 3).unwrap(), k, &p).unwrap();
            assert!(m >= prev);
            prev = m;
        }
        let a = kpw_m(&rational(1, 10).unwrap(), 2, &p).unwrap();
        let b = kpw_m(&rational(1, 2).unwrap(), 2, &p).unwrap();
        assert!(a >= b);
    }

    #[test]
    fn reports_are_reproducible() {
        let a = sample_log_qn(600, 3, 9).unwrap();
        let b = sample_log_qn(600, 3, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_log_qn(600, 3, 10).unwrap());
    }

    #[test]
    fn constant_base_stream() {
        let u = BaseBlock::new(2, vec![1; 20]).unwrap();
        let r = stream_stats(Stream::Base(&u), &[]).unwrap();
        assert!(r.trajectories["discrepancy"].iter().all(|&d| d == 0.5));
        assert_eq!(r.certified["final_discrepancy"], Bounds::exact(rational(1, 2).unwrap()));
    }

    #[test]
    fn periodic_cf_stream() {
        let w = CfWord::new([1, 2].repeat(2000)).unwrap();
        let v = CfBlock::new(vec![1]).unwrap();
        let r = stream_stats(Stream::Cf(&w), &[v]).unwrap();
        let target = 0.5 - (4f64 / 3.0).log2();
        assert!((r.estimates["final_block_1"] - target).abs() < 1e-9);
    }

    #[test]
    fn hw_example() {
        let r = hw_report(2, 12, &rational(1, 2).unwrap()).unwrap();
        assert_eq!(r.estimates["count"], 2.0);
        assert!((r.certified["bound"].lo_f64() - 6027.0).abs() < 1.0);
        assert!(r.passed());
    }

    #[test]
    fn kpw_large_delta_is_trivial() {
        let r = kpw_tail_estimate(&CfWord::empty(), &CfBlock::new(vec![1]).unwrap(), 20, &Rational::one(), 200, 3)
            .unwrap();
        assert_eq!(r.estimates["tail"], 0.0);
        assert!(r.passed());
    }

    #[test]
    fn narrower_window_has_less_mass() {
        let wide = ConstructionConstants::default();
        let narrow = ConstructionConstants { c: rational(1, 2).unwrap(), ..wide.clone() };
        let p = CfWord::new(vec![2]).unwrap();
        let a = cfgrande_window_mass(&p, 6, 500, &wide, 4).unwrap();
        let b = cfgrande_window_mass(&p, 6, 500, &narrow, 4).unwrap();
        assert!(b.estimates["mass"] <= a.estimates["mass"]);
        assert!(a.estimates["mass"] > 0.0);
    }
}
