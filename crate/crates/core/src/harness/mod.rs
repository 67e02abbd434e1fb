//! Calibration runs, bound sweeps, identity suites and their reports.

mod calibration;
mod report;
mod rng;
mod suite;
mod sweep;
mod targets;

pub use calibration::{
    calibrate, constant_for, CalibrationEntry, CalibrationFile, CalibrationRequest, CALIBRATION_EXPONENTS, MAX_CAP,
};
pub use report::{RatioRecord, Status, SweepReport, TargetSummary, SCHEMA_VERSION};
pub use rng::{point_rng, stream_key};
pub use suite::{run_identity_suite, IdentityCheck, SuiteOptions, SuiteReport, SUITE_MODULES};
pub use sweep::{run_sweep, SweepConfig};
pub use targets::{AMode, Grid, Target, R_VALUES};
