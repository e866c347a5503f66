//! Error types for the library.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum UnitError {
    #[error("non-finite value {value} rejected")]
    NonFinite { value: f64 },
    #[error("value {value} out of representable centi-unit range")]
    OutOfRange { value: f64 },
    #[error("duration '{text}' is missing a unit suffix (us/ms/s/min/h)")]
    MissingUnitSuffix { text: String },
    #[error("cannot parse duration '{text}'")]
    BadDuration { text: String },
}

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("sample rate must be positive and finite, got {rate_hz}")]
    BadSampleRate { rate_hz: f64 },
    #[error("supply voltage must be positive and finite, got {voltage_v}")]
    BadVoltage { voltage_v: f64 },
    #[error("sample {index} is negative or non-finite ({value})")]
    BadSample { index: usize, value: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum SegmentError {
    #[error("segment start {start_idx} must be < end {end_idx}")]
    EmptySegment { start_idx: usize, end_idx: usize },
    #[error("segment [{start_idx}, {end_idx}) exceeds trace length {trace_len}")]
    OutOfBounds {
        start_idx: usize,
        end_idx: usize,
        trace_len: usize,
    },
    #[error("segments must be sorted and non-overlapping (offender at index {index})")]
    Unordered { index: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum RadioError {
    #[error("bandwidth must be positive, got {bandwidth_hz}")]
    BadBandwidth { bandwidth_hz: f64 },
    #[error("snr_from_rsrp requires a pure-noise model; use sinr_from_rsrp when interference is set")]
    InterferencePresent,
    #[error("TX power {cbm} cBm outside [-290, 230]")]
    PowerOutOfRange { cbm: i32 },
    #[error("TX power {cbm} cBm is not a multiple of 10 cBm")]
    PowerGranularity { cbm: i32 },
    #[error("ECL1 threshold ({thr1} cBm) must be above ECL2 threshold ({thr2} cBm)")]
    ThresholdOrder { thr1: i32, thr2: i32 },
    #[error("repetitions {value} exceed the cap of {cap}")]
    TooManyRepetitions { value: u32, cap: u32 },
    #[error("per-level repetitions must be non-decreasing in ECL")]
    RepetitionsNotMonotone,
    #[error("preamble attempts per ECL must be at least 1")]
    NoAttempts,
    #[error("attempts_until_success must be at least 1")]
    ZeroAttempts,
}

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("profile field {field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("cdrx_sleep_current ({cdrx_ma} mA) must not exceed 15% of paging_current ({paging_ma} mA)")]
    CdrxSleepTooHigh { cdrx_ma: f64, paging_ma: f64 },
    #[error("ECL TxRx multipliers must be >= 1 and non-decreasing, got {multipliers:?}")]
    BadEclMultipliers { multipliers: [f64; 3] },
}

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("timer configuration invalid: {summary}")]
    InvalidTimers { summary: String },
    #[error("profile invalid: {0}")]
    InvalidProfile(#[from] ProfileError),
    #[error("horizon {horizon_s} s too short to fit one full transmission event ({needed_s} s)")]
    HorizonTooShort { horizon_s: f64, needed_s: f64 },
    #[error("horizon must be at least one transmission interval")]
    HorizonBelowInterval,
    #[error("connected phase of {connected_s} s does not fit the {interval_s} s transmission interval")]
    IntervalTooShort { interval_s: f64, connected_s: f64 },
    #[error("packet size {bytes} B is not one of the standard sizes (12/20/128/256/512); set allow_nonstandard_packet_size to override")]
    NonstandardPacketSize { bytes: u32 },
    #[error("transmission interval must be positive")]
    ZeroInterval,
    #[error("repetitions must be at least 1")]
    ZeroRepetitions,
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("noise_stddev_fraction must be in [0, 0.5), got {value}")]
    BadNoiseFraction { value: f64 },
    #[error("spike energy must be positive, got {value} mJ")]
    BadSpikeEnergy { value: f64 },
    #[error("spike duration must be positive, got {value} ms")]
    BadSpikeDuration { value: f64 },
    #[error("spike rate must be non-negative and finite, got {value} per minute")]
    BadSpikeRate { value: f64 },
    #[error("no EdrxListen segment present in the labeling")]
    NoListenSegment,
    #[error("sample sink failed: {message}")]
    Sink { message: String },
}

#[derive(Debug, Error, PartialEq)]
pub enum DetectError {
    #[error("series is empty")]
    EmptySeries,
    #[error("series length {left} does not match {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("window must be at least 1")]
    ZeroWindow,
    #[error("percentile must be strictly between 0 and 1, got {value}")]
    BadPercentile { value: f64 },
    #[error("trace of {len} samples is shorter than window {window}")]
    TraceShorterThanWindow { len: usize, window: usize },
    #[error("spike_max_duration ({spike_ms} ms) must be below min_phase_duration ({phase_ms} ms)")]
    SpikeBoundAbovePhaseBound { spike_ms: f64, phase_ms: f64 },
    #[error("calibration window [{start}, {end}) is empty or out of bounds (len {len})")]
    BadCalibrationWindow { start: usize, end: usize, len: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error("input {field} must be non-negative, got {value}")]
    NegativeInput { field: &'static str, value: f64 },
    #[error("input {field} must be positive, got {value}")]
    NonPositiveInput { field: &'static str, value: f64 },
    #[error("listen energy {e_listen_mj} mJ inconsistent with p_listen*t_listen = {product_mj} mJ")]
    ListenInconsistent { e_listen_mj: f64, product_mj: f64 },
    #[error("per-interval energy denominator is zero; nothing draws power")]
    ZeroDenominator,
    #[error("lifetime_uplink_free requires t_tau to be set")]
    MissingTau,
    #[error("t_tau of {t_tau_s} s exceeds the maximum TAU period of {max_s} s")]
    TauAboveLimit { t_tau_s: f64, max_s: f64 },
}
