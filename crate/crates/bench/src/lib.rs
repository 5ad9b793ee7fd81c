//! Fixtures shared by the criterion benchmarks under `benches/`.

use cfnormal::{CfWord, ConstructionConstants, Constructor};

/// Constructor under the default constants after `steps` steps.
pub fn constructor_after(steps: u64) -> Constructor {
    let mut c = Constructor::new(ConstructionConstants::default());
    c.run_steps(steps, None, |_| {}).expect("default constants are feasible");
    c
}

/// The first `len` cf digits of the constructed number, cycled if fewer are known.
pub fn constructed_word(len: usize) -> CfWord {
    let mut digits = Vec::new();
    let mut c = Constructor::new(ConstructionConstants::default());
    c.run_steps(8, None, |o| digits.extend_from_slice(&o.cf_digits)).expect("feasible");
    CfWord::new(digits.iter().copied().cycle().take(len).collect()).expect("positive digits")
}
