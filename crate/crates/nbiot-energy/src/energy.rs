//! Energy integration over trace segments, the eDRX energy model, and the
//! battery lifetime estimator.
//!
//! Lifetime follows the per-interval energy budget
//! `T = E_battery / (E_con + E_edrx + E_psm) * T_ti`: every transmission
//! interval costs one Connected event, the configured eDRX activity, and deep
//! sleep for the interval. Deep-sleep energy deliberately uses the full
//! interval rather than subtracting the Connected time; the reference tables
//! this model reproduces follow the same approximation.

use serde::{Deserialize, Serialize};

use crate::error::EnergyError;
use crate::segments::{PhaseKind, Segment};
use crate::trace::CurrentTrace;

/// 365.25-day years.
pub const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;

/// Longest allowed TAU period (the T3412 maximum of 410 hours).
pub const MAX_TAU_PERIOD_S: f64 = 410.0 * 3600.0;

/// Left-rectangle energy of a trace segment: sum(I) * V * dt.
///
/// Additive over any partition of the trace, since every sample contributes
/// exactly once.
pub fn integrate_energy(trace: &CurrentTrace, seg: &Segment) -> Result<f64, EnergyError> {
    if seg.start_idx >= seg.end_idx {
        return Err(EnergyError::Segment(
            crate::error::SegmentError::EmptySegment {
                start_idx: seg.start_idx,
                end_idx: seg.end_idx,
            },
        ));
    }
    if seg.end_idx > trace.len() {
        return Err(EnergyError::Segment(
            crate::error::SegmentError::OutOfBounds {
                start_idx: seg.start_idx,
                end_idx: seg.end_idx,
                trace_len: trace.len(),
            },
        ));
    }
    let sum: f64 = trace.samples()[seg.start_idx..seg.end_idx].iter().sum();
    Ok(sum * trace.supply_voltage_v() * trace.dt())
}

/// Inputs of the eDRX energy model `(E_L + P_S * t_S) * N_cycles`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdrxEnergyInputs {
    /// Energy of one listening burst, mJ.
    pub e_listen_mj: f64,
    /// Sleep power between listens, uW.
    pub p_sleep_uw: f64,
    /// Sleep time per cycle, s.
    pub t_sleep_s: f64,
    /// Listen/sleep cycles in the eDRX window.
    pub n_cycles: u32,
    /// Optional: listen duration, ms (consistency-checked against e_listen).
    pub t_listen_ms: Option<f64>,
    /// Optional: listen power, mW.
    pub p_listen_mw: Option<f64>,
}

/// Relative slack allowed between `e_listen` and `p_listen * t_listen`.
const LISTEN_CONSISTENCY_TOL: f64 = 1e-6;

/// Energy spent in eDRX over `n_cycles` listen/sleep cycles, in joules.
pub fn edrx_energy(inputs: &EdrxEnergyInputs) -> Result<f64, EnergyError> {
    for (field, value) in [
        ("e_listen_mj", inputs.e_listen_mj),
        ("p_sleep_uw", inputs.p_sleep_uw),
        ("t_sleep_s", inputs.t_sleep_s),
    ] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(EnergyError::NegativeInput { field, value });
        }
    }
    if let (Some(t_ms), Some(p_mw)) = (inputs.t_listen_ms, inputs.p_listen_mw) {
        let product_mj = p_mw * t_ms / 1000.0;
        let tol = LISTEN_CONSISTENCY_TOL * inputs.e_listen_mj.max(product_mj).max(1.0);
        if (product_mj - inputs.e_listen_mj).abs() > tol {
            return Err(EnergyError::ListenInconsistent {
                e_listen_mj: inputs.e_listen_mj,
                product_mj,
            });
        }
    }
    let per_cycle = inputs.e_listen_mj / 1000.0 + inputs.p_sleep_uw * 1e-6 * inputs.t_sleep_s;
    Ok(per_cycle * inputs.n_cycles as f64)
}

/// Inputs of the lifetime estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LifetimeInputs {
    /// Battery capacity, J. 5 Wh = 18000 J by default.
    pub battery_j: f64,
    /// Connected-state energy per transmission event, J.
    pub e_con_j: f64,
    /// eDRX energy per interval, J.
    pub e_edrx_j: f64,
    /// Deep-sleep power, uW.
    pub p_psm_uw: f64,
    /// Transmission interval, s.
    pub t_ti_s: f64,
    /// TAU period for uplink-free scenarios, s.
    pub t_tau_s: Option<f64>,
}

impl Default for LifetimeInputs {
    fn default() -> Self {
        LifetimeInputs {
            battery_j: 18_000.0,
            e_con_j: 0.0,
            e_edrx_j: 0.0,
            p_psm_uw: 0.0,
            t_ti_s: 3600.0,
            t_tau_s: None,
        }
    }
}

/// Per-interval energy breakdown backing a lifetime figure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifetimeBreakdown {
    pub connected_j: f64,
    pub edrx_j: f64,
    pub psm_j: f64,
}

impl LifetimeBreakdown {
    pub fn total_j(&self) -> f64 {
        self.connected_j + self.edrx_j + self.psm_j
    }
}

/// Projected battery lifetime plus the assumptions it rests on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifetimeReport {
    pub lifetime_years: f64,
    pub lifetime_seconds: f64,
    pub breakdown: LifetimeBreakdown,
    pub assumptions: Vec<String>,
}

/// Battery life for a fixed transmission interval.
pub fn lifetime(inputs: &LifetimeInputs) -> Result<LifetimeReport, EnergyError> {
    for (field, value) in [("e_con_j", inputs.e_con_j), ("e_edrx_j", inputs.e_edrx_j), ("p_psm_uw", inputs.p_psm_uw)] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(EnergyError::NegativeInput { field, value });
        }
    }
    for (field, value) in [("battery_j", inputs.battery_j), ("t_ti_s", inputs.t_ti_s)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(EnergyError::NonPositiveInput { field, value });
        }
    }
    let psm_j = inputs.p_psm_uw * 1e-6 * inputs.t_ti_s;
    let breakdown = LifetimeBreakdown {
        connected_j: inputs.e_con_j,
        edrx_j: inputs.e_edrx_j,
        psm_j,
    };
    let denominator = breakdown.total_j();
    if denominator <= 0.0 {
        return Err(EnergyError::ZeroDenominator);
    }
    let lifetime_seconds = inputs.battery_j / denominator * inputs.t_ti_s;
    Ok(LifetimeReport {
        lifetime_years: lifetime_seconds / SECONDS_PER_YEAR,
        lifetime_seconds,
        breakdown,
        assumptions: vec![
            "no battery degradation or self-discharge".into(),
            "fixed transmission interval".into(),
            "deep sleep billed for the full interval (Connected time not subtracted)".into(),
            "years of 365.25 days".into(),
        ],
    })
}

/// Battery life for an uplink-free deployment: the only Connected events are
/// periodic TAUs, so the interval is the TAU period and `e_con_j` is the cost
/// of one TAU (energy-wise a 20-byte RAI-200 transmission).
pub fn lifetime_uplink_free(inputs: &LifetimeInputs) -> Result<LifetimeReport, EnergyError> {
    let t_tau_s = inputs.t_tau_s.ok_or(EnergyError::MissingTau)?;
    if t_tau_s > MAX_TAU_PERIOD_S {
        return Err(EnergyError::TauAboveLimit {
            t_tau_s,
            max_s: MAX_TAU_PERIOD_S,
        });
    }
    let mut report = lifetime(&LifetimeInputs {
        t_ti_s: t_tau_s,
        ..*inputs
    })?;
    report
        .assumptions
        .push("uplink-free: interval equals the TAU period, per-event cost is one TAU".into());
    Ok(report)
}

/// Per-kind roll-up of a labeled trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindSummary {
    pub kind: PhaseKind,
    pub count: usize,
    pub total_energy_j: f64,
    pub median_energy_j: f64,
    pub total_duration_s: f64,
    pub median_duration_s: f64,
}

/// Summary report over a segment labeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSummary {
    pub rows: Vec<KindSummary>,
    pub total_energy_j: f64,
    pub sample_rate_hz: f64,
    pub supply_voltage_v: f64,
}

impl SegmentSummary {
    pub fn row(&self, kind: PhaseKind) -> Option<&KindSummary> {
        self.rows.iter().find(|r| r.kind == kind)
    }
}

/// Per-kind totals, medians and durations; per-kind sums equal the
/// integrated energies of the constituent segments.
pub fn summarize_segments(
    trace: &CurrentTrace,
    segments: &[Segment],
) -> Result<SegmentSummary, EnergyError> {
    let mut rows: Vec<KindSummary> = Vec::new();
    for kind in PhaseKind::ALL {
        let mut energies: Vec<f64> = Vec::new();
        let mut durations: Vec<f64> = Vec::new();
        for seg in segments.iter().filter(|s| s.kind == kind) {
            energies.push(integrate_energy(trace, seg)?);
            durations.push(seg.duration_s(trace.sample_rate_hz()));
        }
        if energies.is_empty() {
            continue;
        }
        rows.push(KindSummary {
            kind,
            count: energies.len(),
            total_energy_j: energies.iter().sum(),
            median_energy_j: median(&mut energies),
            total_duration_s: durations.iter().sum(),
            median_duration_s: median(&mut durations),
        });
    }
    let total_energy_j = rows.iter().map(|r| r.total_energy_j).sum();
    Ok(SegmentSummary {
        rows,
        total_energy_j,
        sample_rate_hz: trace.sample_rate_hz(),
        supply_voltage_v: trace.supply_voltage_v(),
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite energies"));
    values[(values.len() - 1) / 2]
}

/// Bundled reference medians and the lifetime matrix they imply.
///
/// The constants are campaign medians for a 20-byte UDP echo under good
/// coverage: Connected-state energy per event for default timers and for the
/// RAI flags, and the deep-sleep powers of the two modules.
pub mod reference {
    use super::*;

    #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case")]
    pub enum Module {
        Bc95,
        SaraN211,
    }

    impl Module {
        pub fn label(self) -> &'static str {
            match self {
                Module::Bc95 => "bc95",
                Module::SaraN211 => "sara-n211",
            }
        }

        /// Median deep-sleep power, uW.
        pub fn psm_power_uw(self) -> f64 {
            match self {
                Module::Bc95 => 10.61,
                Module::SaraN211 => 9.35,
            }
        }
    }

    #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case")]
    pub enum Operator {
        Telenor,
        Telia,
    }

    impl Operator {
        pub fn label(self) -> &'static str {
            match self {
                Operator::Telenor => "telenor",
                Operator::Telia => "telia",
            }
        }
    }

    #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case")]
    pub enum TimerSetting {
        DefaultTimers,
        Rai400,
    }

    impl TimerSetting {
        pub fn label(self) -> &'static str {
            match self {
                TimerSetting::DefaultTimers => "default-timers",
                TimerSetting::Rai400 => "rai-400",
            }
        }
    }

    /// Median Connected-state energy per event, J (20-byte echo, good
    /// coverage; default timers cover all packet sizes).
    pub fn e_con_j(module: Module, operator: Operator, setting: TimerSetting) -> f64 {
        use Module::*;
        use Operator::*;
        use TimerSetting::*;
        match (module, operator, setting) {
            (Bc95, Telenor, DefaultTimers) => 2.39,
            (Bc95, Telia, DefaultTimers) => 0.82,
            (SaraN211, Telenor, DefaultTimers) => 4.17,
            (SaraN211, Telia, DefaultTimers) => 1.27,
            (Bc95, Telenor, Rai400) => 0.17,
            (Bc95, Telia, Rai400) => 0.12,
            (SaraN211, Telenor, Rai400) => 0.31,
            (SaraN211, Telia, Rai400) => 0.33,
        }
    }

    /// Median Connected-state energy with RAI-200, J (TAU event cost proxy).
    pub fn e_con_rai200_j(module: Module, operator: Operator) -> f64 {
        use Module::*;
        use Operator::*;
        match (module, operator) {
            (Bc95, Telenor) => 0.12,
            (Bc95, Telia) => 0.11,
            (SaraN211, Telenor) => 0.27,
            (SaraN211, Telia) => 0.31,
        }
    }

    pub const INTERVALS_H: [f64; 3] = [1.0, 4.0, 24.0];
    pub const BATTERY_J: f64 = 18_000.0;

    /// How a computed cell relates to the published table.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case")]
    pub enum CellStatus {
        /// Reproduced within +/-0.1 year.
        Accepted,
        /// Published value is inconsistent with the energy model; the
        /// computed value is reported, the published one only echoed.
        Excluded,
        /// Not part of the acceptance set.
        Unchecked,
    }

    /// One cell of the expected-lifetime matrix.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct LifetimeCell {
        pub module: Module,
        pub operator: Operator,
        pub setting: TimerSetting,
        pub interval_h: f64,
        pub computed_years: f64,
        pub published_years: Option<f64>,
        pub status: CellStatus,
    }

    fn published_years(
        module: Module,
        operator: Operator,
        setting: TimerSetting,
        interval_h: f64,
    ) -> Option<f64> {
        use Module::*;
        use Operator::*;
        use TimerSetting::*;
        let table = [
            ((Bc95, Telenor, DefaultTimers), [0.8, 3.2, 9.9]),
            ((Bc95, Telia, DefaultTimers), [2.4, 8.5, 13.0]),
            ((SaraN211, Telenor, DefaultTimers), [0.5, 1.9, 6.0]),
            ((SaraN211, Telia, DefaultTimers), [1.6, 5.9, 5.7]),
            ((Bc95, Telenor, Rai400), [6.1, 25.5, 45.4]),
            ((Bc95, Telia, Rai400), [6.4, 30.1, 47.6]),
            ((SaraN211, Telenor, Rai400), [6.0, 18.5, 44.1]),
            ((SaraN211, Telia, Rai400), [5.9, 17.7, 43.3]),
        ];
        let idx = INTERVALS_H.iter().position(|&h| h == interval_h)?;
        table
            .iter()
            .find(|((m, o, s), _)| *m == module && *o == operator && *s == setting)
            .map(|(_, years)| years[idx])
    }

    fn cell_status(module: Module, setting: TimerSetting, interval_h: f64) -> CellStatus {
        use TimerSetting::*;
        match (setting, interval_h as u32) {
            // The default-timer 24 h column does not follow from the energy
            // model and the published medians; neither do the BC95 RAI-400
            // 1 h cells. They are echoed but not asserted.
            (DefaultTimers, 24) => CellStatus::Excluded,
            (Rai400, 1) if module == Module::Bc95 => CellStatus::Excluded,
            (Rai400, 1) => CellStatus::Unchecked,
            _ => CellStatus::Accepted,
        }
    }

    /// Computes the full expected-lifetime matrix (both timer settings, all
    /// module/operator combinations, 1 h / 4 h / 24 h intervals).
    pub fn lifetime_matrix() -> Vec<LifetimeCell> {
        let mut cells = Vec::new();
        for module in [Module::Bc95, Module::SaraN211] {
            for operator in [Operator::Telenor, Operator::Telia] {
                for setting in [TimerSetting::DefaultTimers, TimerSetting::Rai400] {
                    for interval_h in INTERVALS_H {
                        let inputs = LifetimeInputs {
                            battery_j: BATTERY_J,
                            e_con_j: e_con_j(module, operator, setting),
                            e_edrx_j: 0.0,
                            p_psm_uw: module.psm_power_uw(),
                            t_ti_s: interval_h * 3600.0,
                            t_tau_s: None,
                        };
                        let report = lifetime(&inputs).expect("reference inputs are valid");
                        cells.push(LifetimeCell {
                            module,
                            operator,
                            setting,
                            interval_h,
                            computed_years: report.lifetime_years,
                            published_years: published_years(
                                module, operator, setting, interval_h,
                            ),
                            status: cell_status(module, setting, interval_h),
                        });
                    }
                }
            }
        }
        cells
    }
}
