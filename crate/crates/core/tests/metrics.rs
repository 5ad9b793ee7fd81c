use cfnormal::arith::rational;
use cfnormal::brick::ConstructionConstants;
use cfnormal::metrics::{cfgrande_window_mass, kpw_tail_estimate, sample_log_qn, SampleReport};
use cfnormal::{CfBlock, CfWord};

#[test]
fn window_mass_golden() {
    let r = cfgrande_window_mass(&CfWord::empty(), 20, 10_000, &ConstructionConstants::default(), 11).unwrap();
    // Regression value for seed 11; there is no effective constant to compare against.
    assert_eq!(r.estimates["mass"], 0.2821);
    assert!(r.estimates["mass"] >= 0.1 * r.estimates["inv_sqrt_n"]);
    assert_eq!(r.estimates["undecided"], 0.0);
}

#[test]
fn first_digit_after_burn_in_follows_gauss_kuzmin() {
    let r = sample_log_qn(10_000, 1, 5).unwrap();
    assert!(r.checks["gauss_kuzmin_3sigma"], "{}", r.to_key_value());
    assert!((r.estimates["freq_digit_1"] - 0.41504).abs() < 0.015);
}

#[test]
fn reports_roundtrip_through_json() {
    let r = kpw_tail_estimate(
        &CfWord::new(vec![2, 1]).unwrap(),
        &CfBlock::new(vec![1, 1]).unwrap(),
        40,
        &rational(1, 3).unwrap(),
        300,
        2,
    )
    .unwrap();
    assert_eq!(SampleReport::from_json(&r.to_json()).unwrap(), r);
    assert!(r.passed());
}

#[test]
fn sampling_is_seed_deterministic() {
    let cc = ConstructionConstants::default();
    let p = CfWord::new(vec![3]).unwrap();
    let a = cfgrande_window_mass(&p, 5, 700, &cc, 1).unwrap();
    let b = cfgrande_window_mass(&p, 5, 700, &cc, 1).unwrap();
    assert_eq!(a, b);
}
