//! Link-budget math: noise floor, SNR/SINR from RSRP, ECL selection from
//! RSRP thresholds, and the random-access TX power ramp.
//!
//! All results are rounded half-away-from-zero to integer centi-units,
//! matching the integer cB/cBm reporting of the modules.

use serde::{Deserialize, Serialize};

use crate::error::RadioError;
use crate::types::EclLevel;
use crate::units::{Centibels, CentibelMilliwatts};

/// Number of 15 kHz subcarriers in the 180 kHz channel.
pub const SUBCARRIERS: f64 = 12.0;

/// Maximum Cat NB1 TX power.
pub const TXPOWER_MAX_CBM: i32 = 230;
/// Minimum observed NB-IoT TX power.
pub const TXPOWER_MIN_CBM: i32 = -290;
/// TX power reporting granularity.
pub const TXPOWER_STEP_CBM: i32 = 10;
/// Power ramp step between failed preamble attempts (2 dB).
pub const RACH_RAMP_STEP_CBM: i32 = 20;
/// Hard cap on the per-level repetition count.
pub const MAX_REPETITIONS_CAP: u32 = 2048;

/// Receiver-side noise description over one subcarrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// Thermal noise density in cBm/Hz.
    pub thermal_density_cbm_per_hz: i32,
    /// Receiver noise figure in cB.
    pub receiver_nf_cb: i32,
    /// Subcarrier bandwidth in Hz.
    pub bandwidth_hz: f64,
    /// Total interference over the full channel, if any. Absent means the
    /// pure-noise assumption holds (guard-band deployments see none).
    pub interference_cbm: Option<i32>,
}

impl Default for NoiseModel {
    /// Typical thermal density (-174 dBm/Hz), 7 dB receiver noise figure,
    /// one 15 kHz subcarrier, no interference. Reproduces the -1252 cBm
    /// single-subcarrier noise floor.
    fn default() -> Self {
        NoiseModel {
            thermal_density_cbm_per_hz: -1740,
            receiver_nf_cb: 70,
            bandwidth_hz: 15_000.0,
            interference_cbm: None,
        }
    }
}

fn round_centi(x: f64) -> i32 {
    x.round() as i32
}

/// Noise floor over one subcarrier:
/// `thermal_density + 100*log10(bandwidth) + NF`, rounded to integer cBm.
pub fn noise_floor_cbm(nm: &NoiseModel) -> Result<CentibelMilliwatts, RadioError> {
    Ok(CentibelMilliwatts(round_centi(noise_floor_exact(nm)?)))
}

fn noise_floor_exact(nm: &NoiseModel) -> Result<f64, RadioError> {
    if !(nm.bandwidth_hz.is_finite() && nm.bandwidth_hz > 0.0) {
        return Err(RadioError::BadBandwidth {
            bandwidth_hz: nm.bandwidth_hz,
        });
    }
    Ok(nm.thermal_density_cbm_per_hz as f64
        + 100.0 * nm.bandwidth_hz.log10()
        + nm.receiver_nf_cb as f64)
}

/// SNR from RSRP under the pure-noise assumption: `rsrp - noise_floor`.
/// With the default model this is exactly `rsrp + 1252`.
pub fn snr_from_rsrp(
    rsrp: CentibelMilliwatts,
    nm: &NoiseModel,
) -> Result<Centibels, RadioError> {
    if nm.interference_cbm.is_some() {
        return Err(RadioError::InterferencePresent);
    }
    Ok(rsrp - noise_floor_cbm(nm)?)
}

/// SINR over the full 12-subcarrier channel: `12*S / (I_tot + N_tot)`
/// computed in the linear domain and rounded to integer cB.
///
/// With zero interference the 12x signal scaling and the 12x wider noise
/// bandwidth cancel, so this reduces to the single-subcarrier SNR.
pub fn sinr_from_rsrp(
    rsrp: CentibelMilliwatts,
    nm: &NoiseModel,
) -> Result<Centibels, RadioError> {
    if !(nm.bandwidth_hz.is_finite() && nm.bandwidth_hz > 0.0) {
        return Err(RadioError::BadBandwidth {
            bandwidth_hz: nm.bandwidth_hz,
        });
    }
    let signal_mw = rsrp.to_milliwatts();
    let noise_total_cbm = nm.thermal_density_cbm_per_hz as f64
        + 100.0 * (SUBCARRIERS * nm.bandwidth_hz).log10()
        + nm.receiver_nf_cb as f64;
    let noise_mw = 10f64.powf(noise_total_cbm / 100.0);
    let interference_mw = nm
        .interference_cbm
        .map(|i| CentibelMilliwatts(i).to_milliwatts())
        .unwrap_or(0.0);
    let sinr = SUBCARRIERS * signal_mw / (interference_mw + noise_mw);
    Ok(Centibels(round_centi(100.0 * sinr.log10())))
}

/// Operator policy: RSRP thresholds for ECL selection plus random-access
/// limits. Real operator thresholds are not published; the defaults are
/// estimates and should be treated as such.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EclPolicy {
    /// Below this RSRP the UE leaves ECL 0.
    pub rsrp_threshold_ecl1_cbm: i32,
    /// Below this RSRP the UE uses ECL 2. Must be below the ECL 1 threshold.
    pub rsrp_threshold_ecl2_cbm: i32,
    /// Preamble transmission attempts allowed per ECL before escalating.
    pub max_preamble_attempts_per_ecl: u32,
    /// Cap on per-level repetitions (itself capped at 2048).
    pub max_repetitions: u32,
    /// Configured repetition count per ECL, non-decreasing.
    pub repetitions_per_level: [u32; 3],
}

impl Default for EclPolicy {
    fn default() -> Self {
        EclPolicy {
            rsrp_threshold_ecl1_cbm: -1000,
            rsrp_threshold_ecl2_cbm: -1150,
            max_preamble_attempts_per_ecl: 5,
            max_repetitions: MAX_REPETITIONS_CAP,
            // ECL0 sends once; the ECL1/ECL2 defaults are free choices
            // (only monotonicity and the 2048 cap are mandated).
            repetitions_per_level: [1, 8, 64],
        }
    }
}

impl EclPolicy {
    pub fn validate(&self) -> Result<(), RadioError> {
        if self.rsrp_threshold_ecl2_cbm >= self.rsrp_threshold_ecl1_cbm {
            return Err(RadioError::ThresholdOrder {
                thr1: self.rsrp_threshold_ecl1_cbm,
                thr2: self.rsrp_threshold_ecl2_cbm,
            });
        }
        if self.max_preamble_attempts_per_ecl == 0 {
            return Err(RadioError::NoAttempts);
        }
        if self.max_repetitions > MAX_REPETITIONS_CAP {
            return Err(RadioError::TooManyRepetitions {
                value: self.max_repetitions,
                cap: MAX_REPETITIONS_CAP,
            });
        }
        let r = &self.repetitions_per_level;
        if !(r[0] <= r[1] && r[1] <= r[2]) {
            return Err(RadioError::RepetitionsNotMonotone);
        }
        if r[2] > self.max_repetitions {
            return Err(RadioError::TooManyRepetitions {
                value: r[2],
                cap: self.max_repetitions,
            });
        }
        Ok(())
    }
}

/// A TX power setting: cBm in [-290, 230] on a 10 cBm grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub struct TxPowerState(i32);

impl TxPowerState {
    pub const MAX: TxPowerState = TxPowerState(TXPOWER_MAX_CBM);
    pub const MIN: TxPowerState = TxPowerState(TXPOWER_MIN_CBM);

    pub fn new(cbm: i32) -> Result<Self, RadioError> {
        if !(TXPOWER_MIN_CBM..=TXPOWER_MAX_CBM).contains(&cbm) {
            return Err(RadioError::PowerOutOfRange { cbm });
        }
        if cbm % TXPOWER_STEP_CBM != 0 {
            return Err(RadioError::PowerGranularity { cbm });
        }
        Ok(TxPowerState(cbm))
    }

    pub fn cbm(self) -> i32 {
        self.0
    }

    /// One 2 dB ramp step up, clamped at the Cat NB1 maximum.
    pub fn ramped(self) -> TxPowerState {
        TxPowerState((self.0 + RACH_RAMP_STEP_CBM).min(TXPOWER_MAX_CBM))
    }
}

impl TryFrom<i32> for TxPowerState {
    type Error = RadioError;
    fn try_from(cbm: i32) -> Result<Self, Self::Error> {
        TxPowerState::new(cbm)
    }
}

impl From<TxPowerState> for i32 {
    fn from(p: TxPowerState) -> i32 {
        p.0
    }
}

/// Picks the coverage level for an RSRP reading. An RSRP exactly at a
/// threshold takes the lower (better) level.
pub fn select_ecl(rsrp: CentibelMilliwatts, policy: &EclPolicy) -> EclLevel {
    if rsrp.0 >= policy.rsrp_threshold_ecl1_cbm {
        EclLevel::Ecl0
    } else if rsrp.0 >= policy.rsrp_threshold_ecl2_cbm {
        EclLevel::Ecl1
    } else {
        EclLevel::Ecl2
    }
}

/// Configured repetition count for a level (non-decreasing in level).
pub fn repetitions_for_ecl(level: EclLevel, policy: &EclPolicy) -> u32 {
    policy.repetitions_per_level[level.index()]
}

/// The (ECL, TX power) pairs of a random-access procedure that succeeds on
/// attempt `attempts_until_success`.
///
/// The first attempt selects the ECL from `initial_rsrp` and transmits at the
/// caller-provided open-loop power `p0`. Every failed attempt ramps the power
/// by 2 dB, clamped at 230 cBm; once a level has used up its preamble
/// attempts the UE escalates (saturating at ECL 2) and jumps straight to
/// maximum power.
pub fn rach_attempt_sequence(
    initial_rsrp: CentibelMilliwatts,
    policy: &EclPolicy,
    attempts_until_success: u32,
    p0: TxPowerState,
) -> Result<Vec<(EclLevel, TxPowerState)>, RadioError> {
    policy.validate()?;
    if attempts_until_success == 0 {
        return Err(RadioError::ZeroAttempts);
    }
    let mut out = Vec::with_capacity(attempts_until_success as usize);
    let mut ecl = select_ecl(initial_rsrp, policy);
    let mut power = p0;
    let mut attempts_in_level = 0u32;
    for _ in 0..attempts_until_success {
        out.push((ecl, power));
        attempts_in_level += 1;
        if attempts_in_level >= policy.max_preamble_attempts_per_ecl {
            ecl = ecl.escalate();
            power = TxPowerState::MAX;
            attempts_in_level = 0;
        } else {
            power = power.ramped();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_noise_floor_is_minus_1252() {
        assert_eq!(
            noise_floor_cbm(&NoiseModel::default()).unwrap(),
            CentibelMilliwatts(-1252)
        );
    }

    #[test]
    fn noise_floor_over_full_channel() {
        // -1740 + 100*log10(180000) + 70 = -1144.47..., checked by hand.
        let nm = NoiseModel {
            bandwidth_hz: 180_000.0,
            ..NoiseModel::default()
        };
        assert_eq!(noise_floor_cbm(&nm).unwrap(), CentibelMilliwatts(-1144));
    }

    #[test]
    fn noise_floor_trivial_cases() {
        let nm = NoiseModel {
            thermal_density_cbm_per_hz: 0,
            receiver_nf_cb: 0,
            bandwidth_hz: 1.0,
            interference_cbm: None,
        };
        assert_eq!(noise_floor_cbm(&nm).unwrap(), CentibelMilliwatts(0));
        let bad = NoiseModel {
            bandwidth_hz: 0.0,
            ..NoiseModel::default()
        };
        assert!(noise_floor_cbm(&bad).is_err());
    }

    #[test]
    fn snr_is_rsrp_plus_1252_by_default() {
        let nm = NoiseModel::default();
        assert_eq!(
            snr_from_rsrp(CentibelMilliwatts(-1000), &nm).unwrap(),
            Centibels(252)
        );
        assert_eq!(
            snr_from_rsrp(CentibelMilliwatts(-1252), &nm).unwrap(),
            Centibels(0)
        );
        assert_eq!(
            snr_from_rsrp(CentibelMilliwatts(-470), &nm).unwrap(),
            Centibels(782)
        );
    }

    #[test]
    fn snr_rejects_interference() {
        let nm = NoiseModel {
            interference_cbm: Some(-1144),
            ..NoiseModel::default()
        };
        assert_eq!(
            snr_from_rsrp(CentibelMilliwatts(-1000), &nm),
            Err(RadioError::InterferencePresent)
        );
    }

    /// Brute-force linear-domain oracle for the SINR computation.
    fn sinr_oracle(rsrp_cbm: i32, nm: &NoiseModel) -> i32 {
        let s = 10f64.powf(rsrp_cbm as f64 / 100.0);
        let n = 10f64.powf(
            (nm.thermal_density_cbm_per_hz as f64
                + 100.0 * (12.0 * nm.bandwidth_hz).log10()
                + nm.receiver_nf_cb as f64)
                / 100.0,
        );
        let i = nm
            .interference_cbm
            .map(|x| 10f64.powf(x as f64 / 100.0))
            .unwrap_or(0.0);
        (100.0 * (12.0 * s / (i + n)).log10()).round() as i32
    }

    #[test]
    fn sinr_reduces_to_snr_without_interference() {
        let nm = NoiseModel::default();
        for rsrp in [-1300, -1252, -1000, -900, -470] {
            let sinr = sinr_from_rsrp(CentibelMilliwatts(rsrp), &nm).unwrap();
            let snr = snr_from_rsrp(CentibelMilliwatts(rsrp), &nm).unwrap();
            assert_eq!(sinr, snr, "rsrp={rsrp}");
        }
        assert_eq!(
            sinr_from_rsrp(CentibelMilliwatts(-900), &nm).unwrap(),
            Centibels(sinr_oracle(-900, &nm))
        );
        assert_eq!(
            sinr_from_rsrp(CentibelMilliwatts(-900), &nm).unwrap(),
            Centibels(352)
        );
    }

    #[test]
    fn interference_equal_to_noise_costs_30_cb() {
        // I_tot set to the (rounded) total channel noise doubles the
        // denominator: ~3.01 dB below the interference-free figure.
        let clean = NoiseModel::default();
        let nm = NoiseModel {
            interference_cbm: Some(-1144),
            ..clean
        };
        for rsrp in [-1200, -1000, -700] {
            let with_i = sinr_from_rsrp(CentibelMilliwatts(rsrp), &nm).unwrap();
            let without = sinr_from_rsrp(CentibelMilliwatts(rsrp), &clean).unwrap();
            assert_eq!(without - with_i, Centibels(30), "rsrp={rsrp}");
        }
    }

    #[test]
    fn ecl_selection_with_estimated_thresholds() {
        let policy = EclPolicy {
            rsrp_threshold_ecl1_cbm: -1000,
            rsrp_threshold_ecl2_cbm: -1150,
            ..EclPolicy::default()
        };
        assert_eq!(select_ecl(CentibelMilliwatts(-700), &policy), EclLevel::Ecl0);
        // Boundary takes the better level.
        assert_eq!(select_ecl(CentibelMilliwatts(-1000), &policy), EclLevel::Ecl0);
        assert_eq!(select_ecl(CentibelMilliwatts(-1150), &policy), EclLevel::Ecl1);
        assert_eq!(select_ecl(CentibelMilliwatts(-1300), &policy), EclLevel::Ecl2);
    }

    #[test]
    fn repetitions_defaults_and_cap() {
        let policy = EclPolicy::default();
        assert_eq!(repetitions_for_ecl(EclLevel::Ecl0, &policy), 1);
        assert_eq!(repetitions_for_ecl(EclLevel::Ecl1, &policy), 8);
        let max_policy = EclPolicy {
            repetitions_per_level: [1, 8, 2048],
            ..EclPolicy::default()
        };
        assert_eq!(repetitions_for_ecl(EclLevel::Ecl2, &max_policy), 2048);
        let over = EclPolicy {
            repetitions_per_level: [1, 8, 4096],
            ..EclPolicy::default()
        };
        assert!(over.validate().is_err());
    }

    #[test]
    fn txpower_grid() {
        assert!(TxPowerState::new(230).is_ok());
        assert!(TxPowerState::new(-290).is_ok());
        assert_eq!(
            TxPowerState::new(231),
            Err(RadioError::PowerOutOfRange { cbm: 231 })
        );
        assert_eq!(
            TxPowerState::new(25),
            Err(RadioError::PowerGranularity { cbm: 25 })
        );
    }

    #[test]
    fn rach_single_attempt() {
        let policy = EclPolicy::default();
        let p0 = TxPowerState::new(100).unwrap();
        let seq =
            rach_attempt_sequence(CentibelMilliwatts(-700), &policy, 1, p0).unwrap();
        assert_eq!(seq, vec![(EclLevel::Ecl0, p0)]);
    }

    #[test]
    fn rach_ramps_by_20_and_clamps() {
        let policy = EclPolicy::default();
        let p0 = TxPowerState::new(190).unwrap();
        let seq =
            rach_attempt_sequence(CentibelMilliwatts(-700), &policy, 3, p0).unwrap();
        let powers: Vec<i32> = seq.iter().map(|(_, p)| p.cbm()).collect();
        assert_eq!(powers, vec![190, 210, 230]);
        assert!(seq.iter().all(|(e, _)| *e == EclLevel::Ecl0));
    }

    #[test]
    fn rach_escalates_to_max_power() {
        let policy = EclPolicy {
            max_preamble_attempts_per_ecl: 5,
            ..EclPolicy::default()
        };
        let p0 = TxPowerState::new(-100).unwrap();
        let seq =
            rach_attempt_sequence(CentibelMilliwatts(-700), &policy, 6, p0).unwrap();
        assert_eq!(seq[5], (EclLevel::Ecl1, TxPowerState::MAX));
    }

    proptest! {
        // Within an ECL the power never decreases, moves in 20 cBm steps
        // until the clamp, stays on the grid, and every escalation lands on
        // (next level, max power).
        #[test]
        fn rach_ramp_properties(
            p0_step in -29i32..=23,
            attempts in 1u32..40,
            max_per_ecl in 1u32..8,
            rsrp in -1400i32..-400,
        ) {
            let policy = EclPolicy { max_preamble_attempts_per_ecl: max_per_ecl, ..EclPolicy::default() };
            let p0 = TxPowerState::new(p0_step * 10).unwrap();
            let seq = rach_attempt_sequence(CentibelMilliwatts(rsrp), &policy, attempts, p0).unwrap();
            prop_assert_eq!(seq.len(), attempts as usize);
            for window in seq.windows(2) {
                let (ecl_a, p_a) = window[0];
                let (ecl_b, p_b) = window[1];
                prop_assert!(p_b.cbm() >= TXPOWER_MIN_CBM && p_b.cbm() <= TXPOWER_MAX_CBM);
                prop_assert_eq!(p_b.cbm() % 10, 0);
                if ecl_a == ecl_b {
                    prop_assert!(p_b >= p_a);
                    prop_assert!(p_b.cbm() - p_a.cbm() == 20 || p_b.cbm() == TXPOWER_MAX_CBM);
                } else {
                    prop_assert_eq!(ecl_b, ecl_a.escalate());
                    prop_assert_eq!(p_b, TxPowerState::MAX);
                }
            }
        }

        // Lower RSRP never yields a lower (better) ECL.
        #[test]
        fn ecl_selection_is_monotone(
            thr1 in -1200i32..-600,
            gap in 1i32..400,
            rsrp_a in -1600i32..-300,
            rsrp_b in -1600i32..-300,
        ) {
            let policy = EclPolicy {
                rsrp_threshold_ecl1_cbm: thr1,
                rsrp_threshold_ecl2_cbm: thr1 - gap,
                ..EclPolicy::default()
            };
            let (lo, hi) = if rsrp_a <= rsrp_b { (rsrp_a, rsrp_b) } else { (rsrp_b, rsrp_a) };
            let ecl_lo = select_ecl(CentibelMilliwatts(lo), &policy);
            let ecl_hi = select_ecl(CentibelMilliwatts(hi), &policy);
            prop_assert!(ecl_lo >= ecl_hi);
        }

        // Integer-linearity of the default mapping.
        #[test]
        fn snr_linearity(rsrp in -2000i32..0, delta in -500i32..500) {
            let nm = NoiseModel::default();
            let a = snr_from_rsrp(CentibelMilliwatts(rsrp), &nm).unwrap();
            let b = snr_from_rsrp(CentibelMilliwatts(rsrp + delta), &nm).unwrap();
            prop_assert_eq!(b - a, Centibels(delta));
            prop_assert_eq!(a, Centibels(rsrp + 1252));
        }
    }
}
