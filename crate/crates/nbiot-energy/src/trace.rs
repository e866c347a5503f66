//! Current traces: uniformly sampled current draw at a fixed supply voltage.

use serde::{Deserialize, Serialize};

use crate::error::TraceError;

/// Default sampling rate of the power meter exports we model.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 4000.0;

/// Default module supply voltage. The measurement campaigns behind the bundled
/// reference numbers did not publish the supply setting, so this is an
/// assumption (a typical NB-IoT module supply); it is configurable everywhere.
pub const DEFAULT_SUPPLY_VOLTAGE_V: f64 = 3.6;

/// A uniformly sampled current trace with a constant supply voltage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentTrace {
    sample_rate_hz: f64,
    supply_voltage_v: f64,
    samples_a: Vec<f64>,
    t0_s: f64,
}

impl CurrentTrace {
    /// Builds a trace, validating that the rate and voltage are positive and
    /// every sample is finite and non-negative.
    pub fn new(
        sample_rate_hz: f64,
        supply_voltage_v: f64,
        samples_a: Vec<f64>,
    ) -> Result<Self, TraceError> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(TraceError::BadSampleRate {
                rate_hz: sample_rate_hz,
            });
        }
        if !(supply_voltage_v.is_finite() && supply_voltage_v > 0.0) {
            return Err(TraceError::BadVoltage {
                voltage_v: supply_voltage_v,
            });
        }
        for (index, &value) in samples_a.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(TraceError::BadSample { index, value });
            }
        }
        Ok(CurrentTrace {
            sample_rate_hz,
            supply_voltage_v,
            samples_a,
            t0_s: 0.0,
        })
    }

    pub fn with_t0(mut self, t0_s: f64) -> Self {
        self.t0_s = t0_s;
        self
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn supply_voltage_v(&self) -> f64 {
        self.supply_voltage_v
    }

    pub fn t0_s(&self) -> f64 {
        self.t0_s
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples_a
    }

    pub fn len(&self) -> usize {
        self.samples_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples_a.is_empty()
    }

    /// Sample period in seconds.
    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }

    pub fn duration_s(&self) -> f64 {
        self.samples_a.len() as f64 / self.sample_rate_hz
    }

    /// Timestamp of sample `idx` in seconds.
    pub fn timestamp_s(&self, idx: usize) -> f64 {
        self.t0_s + idx as f64 / self.sample_rate_hz
    }

    /// Consumes the trace and returns its samples.
    pub fn into_samples(self) -> Vec<f64> {
        self.samples_a
    }

    /// Mutable sample access for in-place edits such as fault injection.
    /// Callers must keep samples finite and non-negative.
    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples_a
    }
}
