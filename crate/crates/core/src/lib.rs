//! Continued-fraction normal and absolutely normal numbers by t-brick refinement.
//!
//! The construction keeps a *brick*: one continued-fraction cylinder nested inside one d-ary
//! interval (or two adjacent ones) for every base `d <= t`. Each step replaces it by the
//! leftmost nested brick whose newly fixed digits have small discrepancy, so cf digits and base-d
//! digits are emitted without ever being revised.

pub mod arith;
pub mod brick;
pub mod constructor;
pub mod contfrac;
pub mod discrepancy;
pub mod metrics;

pub use arith::{Cmp3, PrecisionPolicy, Rational, RealEnclosure};
pub use brick::{Brick, ConstructionConstants, DaryInterval};
pub use constructor::{Constructor, ConstructorState, OpCounters, Refinement, Schedule, StepOutput};
pub use contfrac::{CfInterval, CfWord, Convergents, Cylinder};
pub use discrepancy::{BaseBlock, CfBlock};
