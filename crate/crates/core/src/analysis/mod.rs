//! Analyses built on the noisy measurement pipeline.

pub mod extremal;
pub mod pipeline;
pub mod ppt;
pub mod sweep;
pub mod table1;
pub mod threshold;
pub mod verify;

pub use extremal::{extremal_crossing, AngleCrossing, ExtremalConfig, ExtremalResult};
pub use pipeline::{Model, Pair, Quantity};
pub use ppt::{pattern_transitions, ppt_pattern, PartialTransposeSign, PatternTransition, PptPattern};
pub use sweep::{parse_grid, sweep, Noise, SweepConfig, SweepResult};
pub use table1::{table1_report, Table1Report};
pub use threshold::{find_threshold, quantity_threshold, ThresholdReport};
pub use verify::{verify, VerifyReport};
