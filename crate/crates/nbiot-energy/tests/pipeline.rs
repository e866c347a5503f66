//! End-to-end checks: synthesize a labeled trace, run the analyzer, and
//! compare the recovered segmentation against the ground truth.

use nbiot_energy::detect::{analyze_trace, DetectorConfig};
use nbiot_energy::profile::presets;
use nbiot_energy::schedule::{build_schedule, templates, MisconfigReplay, Scenario};
use nbiot_energy::segments::{PhaseKind, Segment};
use nbiot_energy::synth::{synthesize, SynthOptions};
use nbiot_energy::timers::TimerConfig;
use nbiot_energy::trace::CurrentTrace;
use nbiot_energy::types::{Coverage, RaiFlag};

const RATE: f64 = 4000.0;
const VOLT: f64 = 3.6;

/// Phase kinds that carry power above the detection floor, i.e. the ones the
/// round-trip contract demands a 1:1 recovery for.
fn is_high_power(kind: PhaseKind) -> bool {
    matches!(
        kind,
        PhaseKind::Sync
            | PhaseKind::TxRx
            | PhaseKind::InactivityCdrx
            | PhaseKind::Release
            | PhaseKind::EdrxListen
            | PhaseKind::TauUpdate
    )
}

fn high_power(segments: &[Segment]) -> Vec<Segment> {
    segments
        .iter()
        .copied()
        .filter(|s| is_high_power(s.kind))
        .collect()
}

/// Asserts precision = recall = 1 at segment granularity over the high-power
/// phases, with per-boundary error at most `tol` samples. Returns the largest
/// boundary error seen.
fn assert_round_trip(truth: &[Segment], detected: &[Segment], tol: usize, label: &str) -> usize {
    let truth_high = high_power(truth);
    let det_high = high_power(detected);
    assert_eq!(
        det_high.len(),
        truth_high.len(),
        "{label}: expected {} high-power phases, detected {}\ntruth: {:?}\ndetected: {:?}",
        truth_high.len(),
        det_high.len(),
        truth_high,
        det_high,
    );
    let mut worst = 0usize;
    for (t, d) in truth_high.iter().zip(&det_high) {
        assert_eq!(
            d.kind, t.kind,
            "{label}: kind mismatch at truth [{}, {}): {:?} vs {:?}",
            t.start_idx, t.end_idx, t.kind, d.kind
        );
        let start_err = t.start_idx.abs_diff(d.start_idx);
        let end_err = t.end_idx.abs_diff(d.end_idx);
        assert!(
            start_err <= tol && end_err <= tol,
            "{label}: boundary error {start_err}/{end_err} beyond {tol} for {:?} [{}, {})",
            t.kind,
            t.start_idx,
            t.end_idx
        );
        worst = worst.max(start_err).max(end_err);
    }
    worst
}

fn analyze_with(
    trace: &CurrentTrace,
    cfg: &DetectorConfig,
    profile: &nbiot_energy::PowerProfile,
) -> Vec<Segment> {
    analyze_trace(trace, cfg, Some(profile)).expect("analysis succeeds")
}

#[test]
fn noise_free_round_trip_on_all_templates() {
    for (sc, timers, profile) in templates::all() {
        let label = format!("{} / {:?}", sc.rai, sc.coverage);
        let sched = build_schedule(&sc, &timers, &profile).unwrap();
        let (trace, truth) =
            synthesize(&sched, &profile, &SynthOptions::default(), RATE, VOLT).unwrap();
        let cfg = DetectorConfig::default_for(&profile, RATE);
        let detected = analyze_with(&trace, &cfg, &profile);
        assert_round_trip(&truth, &detected, cfg.window_w, &label);
    }
}

#[test]
fn noisy_traces_keep_the_same_segmentation() {
    for (sc, timers, profile) in templates::all() {
        let label = format!("{} / {:?} noisy", sc.rai, sc.coverage);
        let sched = build_schedule(&sc, &timers, &profile).unwrap();
        let opt = SynthOptions {
            noise_stddev_fraction: 0.10,
            seed: 0xA5A5,
            ..SynthOptions::default()
        };
        let (trace, truth) = synthesize(&sched, &profile, &opt, RATE, VOLT).unwrap();
        let cfg = DetectorConfig::default_for(&profile, RATE);
        let detected = analyze_with(&trace, &cfg, &profile);
        assert_round_trip(&truth, &detected, cfg.window_w, &label);
    }
}

#[test]
fn tau_events_are_recovered() {
    let timers = TimerConfig {
        t3412_tau: nbiot_energy::DurationUs::from_secs(120),
        ..TimerConfig::default()
    };
    let sc = Scenario {
        rai: RaiFlag::Release200,
        transmission_interval: nbiot_energy::DurationUs::from_secs(600),
        horizon: nbiot_energy::DurationUs::from_secs(600),
        ..Scenario::default()
    };
    let profile = presets::bc95_telia(Coverage::Good);
    let sched = build_schedule(&sc, &timers, &profile).unwrap();
    assert!(sched.n_tau() >= 3, "scenario must contain TAUs");
    let (trace, truth) =
        synthesize(&sched, &profile, &SynthOptions::default(), RATE, VOLT).unwrap();
    let cfg = DetectorConfig::default_for(&profile, RATE);
    let detected = analyze_with(&trace, &cfg, &profile);
    assert_round_trip(&truth, &detected, cfg.window_w, "tau scenario");
    let taus = detected
        .iter()
        .filter(|s| s.kind == PhaseKind::TauUpdate)
        .count();
    assert_eq!(taus as u32, sched.n_tau());
}

#[test]
fn continuous_paging_misconfig_is_still_segmentable() {
    let sc = Scenario {
        misconfig_replay: Some(MisconfigReplay::NoCdrxDuringInactivity),
        ..Scenario::default()
    };
    let timers = TimerConfig::default();
    let profile = presets::bc95_telia(Coverage::Good);
    let sched = build_schedule(&sc, &timers, &profile).unwrap();
    let (trace, truth) =
        synthesize(&sched, &profile, &SynthOptions::default(), RATE, VOLT).unwrap();
    let cfg = DetectorConfig::default_for(&profile, RATE);
    let detected = analyze_with(&trace, &cfg, &profile);
    assert_round_trip(&truth, &detected, cfg.window_w, "no-cdrx replay");
}

#[test]
fn spikes_become_artifacts_and_leave_phases_alone() {
    let (sc, timers, profile) = templates::bundle(RaiFlag::None000, Coverage::Good);
    let sched = build_schedule(&sc, &timers, &profile).unwrap();
    let opt = SynthOptions {
        at_spike_rate_per_min: 2.0,
        seed: 31,
        ..SynthOptions::default()
    };
    let (trace, truth) = synthesize(&sched, &profile, &opt, RATE, VOLT).unwrap();
    let cfg = DetectorConfig::default_for(&profile, RATE);
    let detected = analyze_with(&trace, &cfg, &profile);
    let artifacts = detected
        .iter()
        .filter(|s| s.kind == PhaseKind::Artifact)
        .count();
    assert!(artifacts >= 1, "expected spike artifacts, got none");
    assert_round_trip(&truth, &detected, cfg.window_w, "spiked template");
}

#[test]
fn detected_segmentation_tiles_the_trace() {
    let (sc, timers, profile) = templates::bundle(RaiFlag::ReleaseAfterReply400, Coverage::Good);
    let sched = build_schedule(&sc, &timers, &profile).unwrap();
    let (trace, _) = synthesize(&sched, &profile, &SynthOptions::default(), RATE, VOLT).unwrap();
    let cfg = DetectorConfig::default_for(&profile, RATE);
    let detected = analyze_with(&trace, &cfg, &profile);
    assert_eq!(detected[0].start_idx, 0);
    assert_eq!(detected.last().unwrap().end_idx, trace.len());
    for pair in detected.windows(2) {
        assert_eq!(pair[0].end_idx, pair[1].start_idx, "gap or overlap");
    }
}

#[test]
fn rai000_connected_event_energy_matches_the_published_median() {
    // The calibrated BC95 profile: one default-timer 20-byte echo event
    // (Sync + TxRx + 20 s inactivity + Release) costs 0.82 J.
    let (sc, timers, profile) = templates::bundle(RaiFlag::None000, Coverage::Good);
    let sched = build_schedule(&sc, &timers, &profile).unwrap();
    let (trace, truth) =
        synthesize(&sched, &profile, &SynthOptions::default(), RATE, VOLT).unwrap();
    let connected_kinds = [
        PhaseKind::Sync,
        PhaseKind::TxRx,
        PhaseKind::InactivityCdrx,
        PhaseKind::Release,
    ];
    let first_event: Vec<&Segment> = truth
        .iter()
        .take(4)
        .filter(|s| connected_kinds.contains(&s.kind))
        .collect();
    assert_eq!(first_event.len(), 4);
    let energy: f64 = first_event
        .iter()
        .map(|seg| nbiot_energy::integrate_energy(&trace, seg).unwrap())
        .sum();
    assert!(
        (energy - 0.82).abs() < 1e-9,
        "connected event energy {energy} J, expected 0.82 J"
    );
}

#[test]
fn inactivity_dominates_connected_energy() {
    let (sc, timers, profile) = templates::bundle(RaiFlag::None000, Coverage::Good);
    let sched = build_schedule(&sc, &timers, &profile).unwrap();
    let (trace, truth) =
        synthesize(&sched, &profile, &SynthOptions::default(), RATE, VOLT).unwrap();
    let summary = nbiot_energy::summarize_segments(&trace, &truth).unwrap();
    let energy_of = |kind: PhaseKind| summary.row(kind).map(|r| r.total_energy_j).unwrap_or(0.0);
    let inactivity = energy_of(PhaseKind::InactivityCdrx);
    for other in [PhaseKind::Sync, PhaseKind::TxRx, PhaseKind::Release] {
        assert!(
            inactivity > energy_of(other),
            "inactivity ({inactivity} J) must dominate {other:?} ({} J)",
            energy_of(other)
        );
    }
    let connected_total = inactivity
        + energy_of(PhaseKind::Sync)
        + energy_of(PhaseKind::TxRx)
        + energy_of(PhaseKind::Release);
    assert!(inactivity > 0.5 * connected_total);
}

#[test]
fn coarse_states_recover_connected_spans_on_the_rai000_template() {
    use nbiot_energy::detect::coarse_states;
    use nbiot_energy::segments::CoarseState;

    let (sc, timers, profile) = templates::bundle(RaiFlag::None000, Coverage::Good);
    let sched = build_schedule(&sc, &timers, &profile).unwrap();
    let (trace, truth) =
        synthesize(&sched, &profile, &SynthOptions::default(), RATE, VOLT).unwrap();

    // Threshold between the idle sleep floor and the cDRX quiet level.
    let thr = (profile.psm_current_a(VOLT) * profile.cdrx_sleep_current_a()).sqrt();
    let cfg = DetectorConfig {
        threshold_override_a: Some(thr),
        ..DetectorConfig::default_for(&profile, RATE)
    };
    let coarse = coarse_states(&trace, &cfg).unwrap();
    let connected: Vec<_> = coarse
        .iter()
        .filter(|c| c.state == CoarseState::Connected)
        .collect();
    // One Connected span per transmission event.
    assert_eq!(connected.len(), 5);
    let tolerance = cfg.coarse_median_window;
    let sync_starts: Vec<usize> = truth
        .iter()
        .filter(|s| s.kind == PhaseKind::Sync)
        .map(|s| s.start_idx)
        .collect();
    let release_ends: Vec<usize> = truth
        .iter()
        .filter(|s| s.kind == PhaseKind::Release)
        .map(|s| s.end_idx)
        .collect();
    for ((span, sync_start), release_end) in connected.iter().zip(&sync_starts).zip(&release_ends)
    {
        assert!(
            span.start_idx.abs_diff(*sync_start) <= tolerance,
            "connected start {} vs sync {}",
            span.start_idx,
            sync_start
        );
        // The span may legitimately swallow the adjacent first listen window.
        assert!(
            span.end_idx >= *release_end && span.end_idx - release_end <= tolerance,
            "connected end {} vs release end {}",
            span.end_idx,
            release_end
        );
    }
}
