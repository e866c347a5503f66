//! DRX/eDRX/PSM timer configuration and its validation.
//!
//! Bounds follow the standard value ranges for Cat NB1: every bound is an
//! inclusive limit and is exact in integer microseconds.

use serde::{Deserialize, Serialize};

use crate::units::DurationUs;

/// The main timers governing DRX, eDRX and PSM behavior.
///
/// DRX timers also apply to cDRX (connected mode) and to the DRX cycles
/// inside an eDRX paging time window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimerConfig {
    /// Time spent actively listening inside one DRX cycle.
    #[serde(rename = "OnDurationTimer")]
    pub on_duration_timer: DurationUs,
    /// Interval between the beginnings of two active listenings.
    #[serde(rename = "DRXcycle")]
    pub drx_cycle: DurationUs,
    /// Duration of paging-occasion monitoring in an eDRX cycle.
    #[serde(rename = "PTW")]
    pub ptw: DurationUs,
    /// Interval between the beginnings of two PTWs.
    #[serde(rename = "eDRXcycle")]
    pub edrx_cycle: DurationUs,
    /// Active timer: how long the UE keeps listening for paging in Idle.
    #[serde(rename = "T3324")]
    pub t3324_active: DurationUs,
    /// TAU timer: interval between two tracking area updates.
    #[serde(rename = "T3412")]
    pub t3412_tau: DurationUs,
    /// Time spent in Connected state after the last TX/RX.
    #[serde(rename = "InactivityTimer", alias = "Inactivity timer")]
    pub inactivity_timer: DurationUs,
}

pub const ON_DURATION_MIN: DurationUs = DurationUs::from_ms(1);
pub const ON_DURATION_MAX: DurationUs = DurationUs::from_ms(200);
pub const DRX_CYCLE_MIN: DurationUs = DurationUs::from_ms(2);
pub const DRX_CYCLE_MAX: DurationUs = DurationUs::from_us(2_560_000);
pub const PTW_MIN: DurationUs = DurationUs::from_us(2_560_000);
pub const PTW_MAX: DurationUs = DurationUs::from_us(40_960_000);
pub const EDRX_CYCLE_MIN: DurationUs = DurationUs::from_us(20_480_000);
pub const EDRX_CYCLE_MAX: DurationUs = DurationUs::from_us(10_485_760_000);
pub const T3324_MIN: DurationUs = DurationUs::from_secs(2);
pub const T3324_MAX: DurationUs = DurationUs::from_hours(410);
pub const T3412_MIN: DurationUs = DurationUs::from_secs(2);
pub const T3412_MAX: DurationUs = DurationUs::from_hours(410);
pub const INACTIVITY_MIN: DurationUs = DurationUs::ZERO;
pub const INACTIVITY_MAX: DurationUs = DurationUs::from_us(65_536_000);

impl Default for TimerConfig {
    /// A mid-range configuration: 200 ms listen every 500 ms while connected,
    /// minimum PTW, shortest eDRX cycle, two eDRX cycles worth of active time,
    /// a daily TAU and a 20 s inactivity timer.
    fn default() -> Self {
        TimerConfig {
            on_duration_timer: DurationUs::from_ms(200),
            drx_cycle: DurationUs::from_ms(500),
            ptw: PTW_MIN,
            edrx_cycle: EDRX_CYCLE_MIN,
            t3324_active: DurationUs::from_us(40_960_000),
            t3412_tau: DurationUs::from_hours(24),
            inactivity_timer: DurationUs::from_secs(20),
        }
    }
}

/// One failed bound or cross-field check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub bound: String,
    pub actual: String,
}

/// Outcome of [`validate_timers`]: either clean, or the complete list of
/// violations. Violations are data, not failures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// Compact one-line rendering, used in error messages.
    pub fn summary(&self) -> String {
        self.violations
            .iter()
            .map(|v| format!("{} {} (got {})", v.field, v.bound, v.actual))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Checks every timer bound and cross-field invariant, returning the full
/// list of violations (empty when the configuration is valid).
pub fn validate_timers(cfg: &TimerConfig) -> ValidationResult {
    let mut violations = Vec::new();

    let mut range = |field: &'static str, value: DurationUs, min: DurationUs, max: DurationUs| {
        if value < min || value > max {
            violations.push(Violation {
                field,
                bound: format!("must be within [{min}, {max}]"),
                actual: value.to_string(),
            });
        }
    };

    range("OnDurationTimer", cfg.on_duration_timer, ON_DURATION_MIN, ON_DURATION_MAX);
    range("DRXcycle", cfg.drx_cycle, DRX_CYCLE_MIN, DRX_CYCLE_MAX);
    range("PTW", cfg.ptw, PTW_MIN, PTW_MAX);
    range("eDRXcycle", cfg.edrx_cycle, EDRX_CYCLE_MIN, EDRX_CYCLE_MAX);
    range("T3324", cfg.t3324_active, T3324_MIN, T3324_MAX);
    range("T3412", cfg.t3412_tau, T3412_MIN, T3412_MAX);
    range("InactivityTimer", cfg.inactivity_timer, INACTIVITY_MIN, INACTIVITY_MAX);

    if cfg.ptw > cfg.edrx_cycle {
        violations.push(Violation {
            field: "PTW",
            bound: "must not exceed eDRXcycle".into(),
            actual: format!("{} > {}", cfg.ptw, cfg.edrx_cycle),
        });
    }
    if cfg.on_duration_timer > cfg.drx_cycle {
        violations.push(Violation {
            field: "OnDurationTimer",
            bound: "must not exceed DRXcycle".into(),
            actual: format!("{} > {}", cfg.on_duration_timer, cfg.drx_cycle),
        });
    }
    if cfg.t3324_active > cfg.t3412_tau {
        violations.push(Violation {
            field: "T3324",
            bound: "must not exceed T3412".into(),
            actual: format!("{} > {}", cfg.t3324_active, cfg.t3412_tau),
        });
    }

    ValidationResult { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_at_max() -> TimerConfig {
        TimerConfig {
            on_duration_timer: ON_DURATION_MAX,
            drx_cycle: DRX_CYCLE_MAX,
            ptw: PTW_MAX,
            edrx_cycle: EDRX_CYCLE_MAX,
            t3324_active: T3324_MAX,
            t3412_tau: T3412_MAX,
            inactivity_timer: INACTIVITY_MAX,
        }
    }

    #[test]
    fn max_column_is_accepted() {
        let cfg = all_at_max();
        assert!(validate_timers(&cfg).is_ok());
    }

    #[test]
    fn rai_style_zero_inactivity_is_accepted() {
        let cfg = TimerConfig {
            inactivity_timer: DurationUs::ZERO,
            ..TimerConfig::default()
        };
        assert!(validate_timers(&cfg).is_ok());
    }

    #[test]
    fn oversized_ptw_reports_both_violations() {
        let cfg = TimerConfig {
            ptw: DurationUs::from_secs(41),
            edrx_cycle: EDRX_CYCLE_MIN,
            ..TimerConfig::default()
        };
        let result = validate_timers(&cfg);
        assert!(!result.is_ok());
        let fields: Vec<_> = result.violations.iter().map(|v| v.field).collect();
        // 41 s breaks the PTW upper bound and exceeds the 20.48 s eDRX cycle.
        assert_eq!(fields, vec!["PTW", "PTW"]);
    }

    #[test]
    fn default_config_is_valid() {
        assert!(validate_timers(&TimerConfig::default()).is_ok());
    }

    fn in_range(v: DurationUs, min: DurationUs, max: DurationUs) -> bool {
        v >= min && v <= max
    }

    proptest! {
        // Acceptance iff every bound and cross-field constraint holds.
        #[test]
        fn acceptance_matches_bounds(
            on_ms in 0u64..400,
            drx_ms in 0u64..4000,
            ptw_s in 0u64..60,
            edrx_s in 0u64..40,
            t3324_s in 0u64..100,
            t3412_s in 0u64..100,
            inact_ms in 0u64..100_000,
        ) {
            let cfg = TimerConfig {
                on_duration_timer: DurationUs::from_ms(on_ms),
                drx_cycle: DurationUs::from_ms(drx_ms),
                ptw: DurationUs::from_secs(ptw_s),
                edrx_cycle: DurationUs::from_secs(edrx_s),
                t3324_active: DurationUs::from_secs(t3324_s),
                t3412_tau: DurationUs::from_secs(t3412_s),
                inactivity_timer: DurationUs::from_ms(inact_ms),
            };
            let expected = in_range(cfg.on_duration_timer, ON_DURATION_MIN, ON_DURATION_MAX)
                && in_range(cfg.drx_cycle, DRX_CYCLE_MIN, DRX_CYCLE_MAX)
                && in_range(cfg.ptw, PTW_MIN, PTW_MAX)
                && in_range(cfg.edrx_cycle, EDRX_CYCLE_MIN, EDRX_CYCLE_MAX)
                && in_range(cfg.t3324_active, T3324_MIN, T3324_MAX)
                && in_range(cfg.t3412_tau, T3412_MIN, T3412_MAX)
                && in_range(cfg.inactivity_timer, INACTIVITY_MIN, INACTIVITY_MAX)
                && cfg.ptw <= cfg.edrx_cycle
                && cfg.on_duration_timer <= cfg.drx_cycle
                && cfg.t3324_active <= cfg.t3412_tau;
            prop_assert_eq!(validate_timers(&cfg).is_ok(), expected);
        }
    }
}
