//! NB-IoT UE energy toolkit.
//!
//! Models the power behavior of NB-IoT devices end to end:
//!
//! - [`schedule`] builds deterministic phase schedules for a workload
//!   (Connected events with RAI semantics, cDRX, eDRX cycles, PSM, TAU).
//! - [`synth`] renders schedules into current traces with ground-truth
//!   labels, optional noise, and metadata-poll spike artifacts.
//! - [`detect`] recovers states and phases from raw current traces via
//!   moving-max edge masks and a moving-median coarse split.
//! - [`energy`] integrates per-phase energy and projects battery lifetime
//!   from per-interval energy budgets.
//! - [`radio`] maps RSRP to SNR/SINR, selects coverage enhancement levels,
//!   and replays the random-access power ramp.
//!
//! Durations are integer microseconds ([`units::DurationUs`]) and radio
//! quantities integer centi-units ([`units::Centibels`],
//! [`units::CentibelMilliwatts`]), so bound checks and threshold comparisons
//! are exact. All types are plain values: everything is safe to share across
//! threads once built.

pub mod detect;
pub mod energy;
pub mod error;
pub mod profile;
pub mod radio;
pub mod schedule;
pub mod segments;
pub mod synth;
pub mod timers;
pub mod trace;
pub mod types;
pub mod units;

pub use detect::{analyze_trace, DetectorConfig};
pub use energy::{
    edrx_energy, integrate_energy, lifetime, lifetime_uplink_free, summarize_segments,
    EdrxEnergyInputs, LifetimeInputs, LifetimeReport,
};
pub use profile::PowerProfile;
pub use radio::{
    noise_floor_cbm, rach_attempt_sequence, repetitions_for_ecl, select_ecl, sinr_from_rsrp,
    snr_from_rsrp, EclPolicy, NoiseModel, TxPowerState,
};
pub use schedule::{build_schedule, connected_duration, n_edrx_cycles, PhaseSchedule, Scenario};
pub use segments::{CoarseSegment, CoarseState, PhaseKind, Segment, SegmentSource};
pub use synth::{inject_edrx_listen_bug, synthesize, synthesize_stream, SynthOptions};
pub use timers::{validate_timers, TimerConfig, ValidationResult};
pub use trace::CurrentTrace;
pub use types::{Coverage, EclLevel, RaiFlag};
pub use units::{Centibels, CentibelMilliwatts, DurationUs};
