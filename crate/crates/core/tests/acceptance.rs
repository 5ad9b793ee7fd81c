//! Acceptance criteria 1-9. Each test writes one `criterion N: PASS|FAIL ...` line to stderr
//! (bypassing output capture) and then asserts.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use cfnormal::arith::{enclose_levy, enclose_ln2, rational, Cmp3, PrecisionPolicy, Rational, RealEnclosure};
use cfnormal::brick::ConstructionConstants;
use cfnormal::constructor::{checkpoint, restore, verify_refinement, Constructor, Schedule};
use cfnormal::contfrac::{continuant, convergents, cylinder, cylinder_length, cylinder_measure, CfWord};
use cfnormal::discrepancy::{
    d_hypotheses, dcf_hypotheses, hw_bad_count, verify_d_concat, verify_dcf_concat, BaseBlock, CfBlock,
    ConcatItem,
};
use cfnormal::metrics::{kpw_tail_estimate, sample_log_qn};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn line(n: u32, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n}: {verdict} {detail}");
}

/// A cf digit with `P(a = k) = 1/k - 1/(k+1)`, capped.
fn digit(rng: &mut ChaCha8Rng) -> u64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    ((1.0 / u).floor() as u64).clamp(1, 1 << 40)
}

fn word(rng: &mut ChaCha8Rng, len: usize) -> CfWord {
    CfWord::new((0..len).map(|_| digit(rng)).collect()).unwrap()
}

#[test]
fn criterion_1_continuant_identity() {
    let start = Instant::now();
    let mut checked = 0u64;
    let mut bad = 0u64;
    // Odometer over all words with digits 1..=4 and length 0..=12.
    for len in 0..=12usize {
        let mut d = vec![1u64; len];
        loop {
            let w = CfWord::new(d.clone()).unwrap();
            if continuant(&w, 1, len).unwrap() != convergents(&w).q_cur {
                bad += 1;
            }
            checked += 1;
            let mut i = len;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if d[i] < 4 {
                    d[i] += 1;
                    break;
                }
                d[i] = 1;
            }
            if d.iter().all(|&x| x == 1) {
                break;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let len = rng.gen_range(1..=200);
        let w = word(&mut rng, len);
        if continuant(&w, 1, len).unwrap() != convergents(&w).q_cur {
            bad += 1;
        }
        checked += 1;
    }
    let ok = bad == 0 && checked == 22_369_621 + 10_000;
    line(1, ok, &format!("{checked} words, {bad} mismatches, {:.1?}", start.elapsed()));
    assert!(ok);
}

#[test]
fn criterion_2_relative_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let two = BigInt::from(2);
    let half = rational(1, 2).unwrap();
    let (mut splits, mut bad) = (0u64, 0u64);
    for _ in 0..10_000 {
        let len = rng.gen_range(2..=120);
        let c = word(&mut rng, len);
        let qc = convergents(&c).q_cur;
        let ic = cylinder_length(&c);
        for r in 1..len {
            let a = CfWord::new(c.digits()[..r].to_vec()).unwrap();
            let b = CfWord::new(c.digits()[r..].to_vec()).unwrap();
            let prod = convergents(&a).q_cur * convergents(&b).q_cur;
            let ib = cylinder_length(&b);
            let rel = &ic / cylinder_length(&a);
            let q_ok = prod <= qc && qc <= &two * &prod;
            let i_ok = &ib * &half <= rel && rel <= &ib * Rational::from_integer(two.clone());
            if !(q_ok && i_ok) {
                bad += 1;
            }
            splits += 1;
        }
    }
    line(2, bad == 0, &format!("{splits} split points, {bad} violations"));
    assert_eq!(bad, 0);
}

#[test]
fn criterion_3_cylinder_geometry() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let policy = PrecisionPolicy::default();
    let mut bad = 0;
    for _ in 0..1000 {
        let len = rng.gen_range(0..=40);
        let w = word(&mut rng, len);
        let c = cylinder(&w);
        let exact = &c.hi - &c.lo == cylinder_length(&w) && c.lo < c.hi;
        let len_i = cylinder_length(&w);
        // |I|/(2 log 2) < mu(I) < |I|/log 2, certified with escalating precision.
        let sandwich = policy.ladder().any(|bits| {
            let mu = cylinder_measure(&w, bits);
            let ln2 = enclose_ln2(bits + 8);
            let upper = RealEnclosure::from_rational(&len_i, bits + 8).div(&ln2).unwrap();
            let lower = upper.mul_rational(&rational(1, 2).unwrap());
            lower.hi_rational() < mu.lo_rational() && mu.hi_rational() < upper.lo_rational()
        });
        if !(exact && sandwich) {
            bad += 1;
        }
    }
    line(3, bad == 0, &format!("1000 cylinders, {bad} violations"));
    assert_eq!(bad, 0);
}

#[test]
fn criterion_4_hardy_wright() {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for k in [12usize, 16, 20] {
        for eps in [rational(6, k as i64).unwrap(), rational(1, 2).unwrap()] {
            let (count, bound) = hw_bad_count(2, k, &eps).unwrap();
            let below = bound.cmp_rational(&Rational::from_integer(count.into())) == Cmp3::Greater;
            ok &= below;
            detail.push(format!("k={k} eps={eps}: {count} <= {:.1}", bound.lo().to_f64()));
        }
    }
    let (c12, _) = hw_bad_count(2, 12, &rational(1, 2).unwrap()).unwrap();
    ok &= c12 == 2;
    line(4, ok, &format!("{}; count(2,12,1/2)={c12}, {:.1?}", detail.join("; "), start.elapsed()));
    assert!(ok);
}

#[test]
fn criterion_5_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut summary = Vec::new();
    let mut all_ok = true;
    let items = [ConcatItem::One, ConcatItem::TwoA, ConcatItem::TwoB];
    for item in items {
        let (mut found, mut tries, mut bad) = (0, 0u64, 0);
        while found < 10_000 && tries < 2_000_000 {
            tries += 1;
            let eps = rational(rng.gen_range(150..=900), 1000).unwrap();
            let k = rng.gen_range(1..=2);
            let v = CfBlock::new((0..k).map(|_| rng.gen_range(1..=3)).collect()).unwrap();
            let n = rng.gen_range(10..=120);
            let x = word(&mut rng, n);
            let s = match item {
                ConcatItem::One => rng.gen_range(1..=120),
                _ => rng.gen_range(1..=n),
            };
            let u = word(&mut rng, s);
            if !dcf_hypotheses(&x, &u, &v, &eps, item) {
                continue;
            }
            found += 1;
            if !verify_dcf_concat(&x, &u, &v, &eps, item) {
                bad += 1;
            }
        }
        all_ok &= found == 10_000 && bad == 0;
        summary.push(format!("Dcf {item:?}: {found} instances/{tries} draws, {bad} violations"));
    }
    for item in items {
        let (mut found, mut tries, mut bad) = (0, 0u64, 0);
        while found < 10_000 && tries < 2_000_000 {
            tries += 1;
            let b = rng.gen_range(2..=10u32);
            let eps = rational(rng.gen_range(50..=600), 1000).unwrap();
            let vlen = rng.gen_range(1..=200);
            let ulen = match item {
                ConcatItem::One => rng.gen_range(1..=200),
                _ => rng.gen_range(1..=vlen),
            };
            let mut block = |len: usize| BaseBlock::new(b, (0..len).map(|_| rng.gen_range(0..b)).collect()).unwrap();
            let u = block(ulen);
            let v = block(vlen);
            if !d_hypotheses(&u, &v, &eps, item) {
                continue;
            }
            found += 1;
            if !verify_d_concat(&u, &v, &eps, item) {
                bad += 1;
            }
        }
        all_ok &= found == 10_000 && bad == 0;
        summary.push(format!("D {item:?}: {found} instances/{tries} draws, {bad} violations"));
    }
    line(5, all_ok, &summary.join("; "));
    assert!(all_ok);
}

#[test]
fn criterion_6_gaussian_law() {
    let start = Instant::now();
    let mut r = sample_log_qn(10_000, 50, 6).unwrap();
    let mean_ok = r.check_within("levy_within_0.02", "mean_log_qn_over_n", "levy", 0.02);
    let gk_ok = r.check_within("digit_1_within_0.01", "freq_digit_1", "gauss_kuzmin_1", 0.01);
    let ok = mean_ok && gk_ok;
    line(
        6,
        ok,
        &format!(
            "mean(log q_50)/50 = {:.5} vs L = {:.5}; freq(1) = {:.5} vs {:.5}; {:.1?}",
            r.estimates["mean_log_qn_over_n"],
            enclose_levy(64).midpoint_f64(),
            r.estimates["freq_digit_1"],
            r.certified["gauss_kuzmin_1"].lo_f64(),
            start.elapsed()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_7_kpw_tail() {
    let start = Instant::now();
    let r = kpw_tail_estimate(
        &CfWord::empty(),
        &CfBlock::new(vec![1]).unwrap(),
        200,
        &rational(1, 4).unwrap(),
        10_000,
        7,
    )
    .unwrap();
    let ok = r.checks["tail_below_bound"];
    line(
        7,
        ok,
        &format!(
            "tail = {} (sd {:.2e}) vs bound 6Me^(-d^2 n/2M) = {:.4} with M = {}; {:.1?}",
            r.estimates["tail"],
            r.estimates["tail_sd"],
            r.certified["bound"].hi_f64(),
            r.params["m"],
            start.elapsed()
        ),
    );
    assert!(ok);
}

const STEPS: u64 = 49;
const SPLIT: u64 = 10;
const RERUN: u64 = 20;

struct Run {
    cc: ConstructionConstants,
    digits: Vec<u64>,
    step_digits: Vec<usize>,
    ops: Vec<u64>,
    t_max: u32,
    failures: Vec<String>,
    nodes_consistent: bool,
    elapsed: Duration,
}

fn demo_constants() -> ConstructionConstants {
    ConstructionConstants {
        schedule: Schedule::Demo { t_steps: vec![5] },
        ..ConstructionConstants::default()
    }
}

/// One verified run of `STEPS` steps on the demo schedule, shared by criteria 8 and 9.
fn verified_run() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let cc = demo_constants();
        let mut c = Constructor::new(cc.clone());
        let (mut digits, mut step_digits, mut ops, mut failures) = (vec![], vec![], vec![], vec![]);
        let mut t_max = 2;
        for _ in 0..STEPS {
            let prev = c.state.brick.clone();
            let out = c.step(None).expect("unbounded step");
            if let Err(e) = verify_refinement(&prev, &out.refinement, &out.eps, &cc) {
                failures.push(format!("step {}: {}", out.step, e.join("; ")));
            }
            digits.extend_from_slice(&out.cf_digits);
            step_digits.push(out.cf_digits.len());
            ops.push(out.counters.total());
            t_max = t_max.max(out.t);
        }
        let stream = CfWord::new(digits.clone()).unwrap();
        let nodes_consistent = convergents(&stream) == c.state.brick.cf.conv;
        Run { cc, digits, step_digits, ops, t_max, failures, nodes_consistent, elapsed: start.elapsed() }
    })
}

#[test]
fn criterion_8_end_to_end() {
    let run = verified_run();
    let prefix: usize = run.step_digits[..RERUN as usize].iter().sum();

    let mut again = Constructor::new(run.cc.clone());
    let mut rerun = Vec::new();
    again.run_steps(RERUN, None, |o| rerun.extend_from_slice(&o.cf_digits)).unwrap();

    let mut first = Constructor::new(run.cc.clone());
    let mut split = Vec::new();
    first.run_steps(SPLIT, None, |o| split.extend_from_slice(&o.cf_digits)).unwrap();
    let bytes = checkpoint(&first.state, &first.cc);
    let (state, cc) = restore(&bytes).unwrap();
    let roundtrip = state == first.state && cc == first.cc;
    let mut resumed = Constructor::from_state(cc, state);
    resumed.run_steps(RERUN - SPLIT, None, |o| split.extend_from_slice(&o.cf_digits)).unwrap();

    let ok = run.failures.is_empty()
        && run.nodes_consistent
        && run.digits.len() >= 40
        && rerun == run.digits[..prefix]
        && split == rerun
        && roundtrip
        && resumed.state == again.state
        && run.elapsed < Duration::from_secs(600);
    line(
        8,
        ok,
        &format!(
            "{STEPS} steps, {} cf digits, {} verification failures, rerun and {SPLIT}+{} resume identical: {}, {:.1?}",
            run.digits.len(),
            run.failures.len(),
            RERUN - SPLIT,
            rerun == run.digits[..prefix] && split == rerun,
            run.elapsed
        ),
    );
    for f in &run.failures {
        let _ = writeln!(std::io::stderr(), "  {f}");
    }
    assert!(ok);
}

#[test]
fn criterion_9_complexity_shape() {
    let run = verified_run();
    let cc = &run.cc;
    let l = enclose_levy(64).hi().to_f64();
    let c = cc.c.to_f64().unwrap();
    let ns = cc.n_start as f64;
    let ln2 = std::f64::consts::LN_2;
    // Per step at most T(s) <= (5/4) 4 e^(2c + 2 n_start L) s^(2L) candidates. A candidate of
    // relative order n costs at most n(3 + 2t(2L+3)/ln 2) <= n(1+t) kappa counted operations,
    // and n(s) <= (n_start + ln 2) log^(6/5)(s) / ln^(6/5)(2) for s >= 2.
    let kappa = 2.0 * (2.0 * l + 3.0) / ln2;
    let big_c = 5.0 * (2.0 * c + 2.0 * ns * l).exp() * (ns + ln2) / ln2.powf(1.2) * (1.0 + run.t_max as f64) * kappa;
    let (mut acc, mut reference, mut worst) = (0f64, 0f64, 0f64);
    for (i, &ops) in run.ops.iter().enumerate() {
        let s = (i + 2) as f64;
        acc += ops as f64;
        reference += s.powf(2.0 * l) * s.ln().powf(1.2);
        worst = worst.max(acc / reference);
    }
    let ok = worst <= big_c;
    line(
        9,
        ok,
        &format!(
            "k = {}: sum ops = {acc:.0}, max prefix ratio ops / sum s^(2L) log^(6/5) s = {worst:.1} <= C = {big_c:.0}",
            STEPS + 1
        ),
    );
    assert!(ok);
}
