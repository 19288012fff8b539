//! Simulation lab for the blind-polarization-basis QKD protocols and the
//! impersonation attacks that break them.
//!
//! The crate models single photons as real polarization angles
//! ([`polarization`]), runs the honest protocols leg by leg
//! ([`protocol`], [`harness`]), lets an eavesdropper strategy tap every leg
//! ([`adversary`]), and summarizes runs as error rates and mutual information
//! ([`analysis`], [`report`]).

pub mod adversary;
pub mod analysis;
pub mod cli;
pub mod conventions;
pub mod harness;
pub mod polarization;
pub mod protocol;
pub mod report;
pub mod selftest;

pub use adversary::{EveStrategy, FlipSemantics};
pub use analysis::{ConfusionMatrix2, DetectionVerdict, Tally};
pub use conventions::Conventions;
pub use harness::{
    enumerate_exhaustive, SimConfig, SimError, Simulator, StrategyKind, VerdictTable,
};
pub use polarization::{Angle, Bit, MeasurementBasis, PolarizationState};
pub use protocol::{AngleSource, Protocol, RoundRecord};
pub use report::SimReport;
