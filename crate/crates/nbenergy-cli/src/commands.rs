//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use nbiot_energy::detect::{analyze_trace, DetectorConfig};
use nbiot_energy::energy::{
    lifetime, lifetime_uplink_free, reference, summarize_segments, LifetimeInputs, SegmentSummary,
};
use nbiot_energy::profile::{presets, PowerProfile};
use nbiot_energy::radio::{
    noise_floor_cbm, rach_attempt_sequence, select_ecl, sinr_from_rsrp, snr_from_rsrp, EclPolicy,
    NoiseModel, TxPowerState,
};
use nbiot_energy::schedule::build_schedule;
use nbiot_energy::segments::{PhaseKind, Segment};
use nbiot_energy::synth::{synthesize_stream, SynthOptions};
use nbiot_energy::timers::validate_timers;
use nbiot_energy::units::CentibelMilliwatts;

use crate::cli::{AnalyzeArgs, LifetimeArgs, RadioCmd, SimulateArgs};
use crate::config;
use crate::tracefile::{
    read_trace_csv, read_truth_csv, write_segments_csv, write_truth_csv, TraceCsvWriter,
    TraceReadOptions,
};

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let mut scenario = config::load_scenario(&args.scenario)?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let timers = config::load_timers(args.timers.as_deref())?;
    let validation = validate_timers(&timers);
    if !validation.is_ok() {
        bail!("timer validation failed: {}", validation.summary());
    }
    let profile = match &args.profile {
        Some(arg) => config::load_profile(arg)?,
        None => presets::bc95_telia(scenario.coverage),
    };

    let schedule = build_schedule(&scenario, &timers, &profile)?;
    let options = SynthOptions {
        noise_stddev_fraction: args.noise,
        at_spike_rate_per_min: args.spike_rate,
        at_spike_energy_mj: args.spike_energy_mj,
        at_spike_duration_ms: args.spike_duration_ms,
        seed: scenario.seed,
    };

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let trace_path = args.out.join("trace.csv");
    let truth_path = args.out.join("truth.csv");
    let schedule_path = args.out.join("schedule.json");

    // The trace streams straight to disk; day-long horizons never
    // materialize in memory.
    let mut writer = TraceCsvWriter::create(&trace_path, args.rate, args.voltage)?;
    let truth = synthesize_stream(
        &schedule,
        &profile,
        &options,
        args.rate,
        args.voltage,
        |chunk| {
            writer.write_chunk(chunk).map_err(|err| {
                nbiot_energy::error::SynthError::Sink {
                    message: format!("writing {}: {err}", trace_path.display()),
                }
            })
        },
    )?;
    let samples = writer.finish()?;

    write_truth_csv(&truth_path, &truth)?;
    let schedule_file = std::fs::File::create(&schedule_path)
        .with_context(|| format!("cannot create {}", schedule_path.display()))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(schedule_file), &schedule)?;

    println!(
        "wrote {} ({samples} samples at {} Hz), {} ({} phases), {}",
        trace_path.display(),
        args.rate,
        truth_path.display(),
        truth.len(),
        schedule_path.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct TruthComparison {
    truth_file: String,
    truth_high_power: usize,
    detected_high_power: usize,
    matched: usize,
    precision: f64,
    recall: f64,
    max_boundary_error_samples: usize,
    mean_boundary_error_samples: f64,
}

#[derive(Debug, Serialize)]
struct AnalysisReport {
    input: String,
    samples: usize,
    duration_s: f64,
    sample_rate_hz: f64,
    rate_source: &'static str,
    supply_voltage_v: f64,
    mode: &'static str,
    detector: DetectorConfig,
    summary: SegmentSummary,
    truth_comparison: Option<TruthComparison>,
}

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

fn compare_with_truth(truth_path: &Path, detected: &[Segment]) -> Result<TruthComparison> {
    let truth = read_truth_csv(truth_path)?;
    let truth_high: Vec<&Segment> = truth.iter().filter(|s| is_high_power(s.kind)).collect();
    let det_high: Vec<&Segment> = detected.iter().filter(|s| is_high_power(s.kind)).collect();

    let mut matched = 0usize;
    let mut errors: Vec<usize> = Vec::new();
    let mut used = vec![false; det_high.len()];
    for t in &truth_high {
        let best = det_high
            .iter()
            .enumerate()
            .filter(|(i, d)| {
                !used[*i] && d.kind == t.kind && d.start_idx < t.end_idx && t.start_idx < d.end_idx
            })
            .max_by_key(|(_, d)| d.end_idx.min(t.end_idx) - d.start_idx.max(t.start_idx));
        if let Some((i, d)) = best {
            used[i] = true;
            matched += 1;
            errors.push(t.start_idx.abs_diff(d.start_idx));
            errors.push(t.end_idx.abs_diff(d.end_idx));
        }
    }
    let precision = if det_high.is_empty() {
        1.0
    } else {
        matched as f64 / det_high.len() as f64
    };
    let recall = if truth_high.is_empty() {
        1.0
    } else {
        matched as f64 / truth_high.len() as f64
    };
    Ok(TruthComparison {
        truth_file: truth_path.display().to_string(),
        truth_high_power: truth_high.len(),
        detected_high_power: det_high.len(),
        matched,
        precision,
        recall,
        max_boundary_error_samples: errors.iter().copied().max().unwrap_or(0),
        mean_boundary_error_samples: if errors.is_empty() {
            0.0
        } else {
            errors.iter().sum::<usize>() as f64 / errors.len() as f64
        },
    })
}

/// Looks for a ground-truth sidecar next to a trace file: either
/// `<stem>.truth.csv` or, for the simulator's `trace.csv`, plain `truth.csv`.
fn sidecar_truth(input: &Path) -> Option<PathBuf> {
    let stem = input.file_stem()?.to_str()?;
    let dir = input.parent()?;
    let candidates = [
        dir.join(format!("{stem}.truth.csv")),
        if stem == "trace" {
            dir.join("truth.csv")
        } else {
            PathBuf::new()
        },
    ];
    candidates.into_iter().find(|p| !p.as_os_str().is_empty() && p.exists())
}

fn analyze_one(args: &AnalyzeArgs, input: &Path) -> Result<AnalysisReport> {
    let read_opts = TraceReadOptions {
        time_col: args.time_col.clone(),
        current_col: args.current_col.clone(),
        voltage_col: args.voltage_col.clone(),
        declared_rate_hz: args.rate,
        voltage_v: args.voltage,
    };
    let loaded = read_trace_csv(input, &read_opts)?;

    let profile = if args.no_profile {
        None
    } else {
        Some(match &args.profile {
            Some(arg) => config::load_profile(arg)?,
            None => PowerProfile::default(),
        })
    };

    let mut cfg = match &profile {
        Some(p) => DetectorConfig::default_for(p, loaded.rate_hz),
        None => DetectorConfig::default_for(&PowerProfile::default(), loaded.rate_hz),
    };
    if let Some(w) = args.window_w {
        cfg.window_w = w;
    }
    if let Some(p) = args.percentile {
        cfg.threshold_percentile = p;
    }
    if let Some(w) = args.coarse_window {
        cfg.coarse_median_window = w;
    }
    if let Some(ms) = args.min_phase_ms {
        cfg.min_phase_duration_ms = ms;
    }
    if let Some(ms) = args.spike_max_ms {
        cfg.spike_max_duration_ms = ms;
    }
    if let Some(thr) = args.threshold_a {
        cfg.threshold_override_a = Some(thr);
    }
    if let (Some(start), Some(end)) = (args.calibration_start, args.calibration_end) {
        cfg.calibration_window = Some((start, end));
    }

    let segments = analyze_trace(&loaded.trace, &cfg, profile.as_ref())?;
    let summary = summarize_segments(&loaded.trace, &segments)?;

    let truth_comparison = match &args.truth {
        Some(path) => Some(compare_with_truth(path, &segments)?),
        None => match sidecar_truth(input) {
            Some(path) => Some(compare_with_truth(&path, &segments)?),
            None => None,
        },
    };

    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| input.parent().unwrap_or(Path::new(".")).to_path_buf());
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("trace");
    let segments_path = out_dir.join(format!("{stem}.segments.csv"));
    write_segments_csv(&segments_path, &loaded.trace, &segments)?;

    let report = AnalysisReport {
        input: input.display().to_string(),
        samples: loaded.trace.len(),
        duration_s: loaded.trace.duration_s(),
        sample_rate_hz: loaded.rate_hz,
        rate_source: loaded.rate_source,
        supply_voltage_v: loaded.trace.supply_voltage_v(),
        mode: if profile.is_some() {
            "profile"
        } else {
            "percentile"
        },
        detector: cfg,
        summary,
        truth_comparison,
    };
    let summary_path = out_dir.join(format!("{stem}.summary.json"));
    let file = std::fs::File::create(&summary_path)
        .with_context(|| format!("cannot create {}", summary_path.display()))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &report)?;

    println!(
        "{}: {} segments, {:.4} J total -> {}, {}",
        input.display(),
        report.summary.rows.iter().map(|r| r.count).sum::<usize>(),
        report.summary.total_energy_j,
        segments_path.display(),
        summary_path.display()
    );
    Ok(report)
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    // Independent files analyze concurrently, one worker per file.
    let results: Vec<(PathBuf, Result<AnalysisReport>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = args
            .inputs
            .iter()
            .map(|input| {
                let input = input.clone();
                scope.spawn(move || {
                    let report = analyze_one(args, &input);
                    (input, report)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("analysis worker panicked"))
            .collect()
    });

    let mut failures = 0usize;
    for (input, result) in &results {
        if let Err(err) = result {
            eprintln!("{}: {err:#}", input.display());
            failures += 1;
        }
    }
    if failures > 0 {
        bail!("{failures} of {} analyses failed", results.len());
    }
    Ok(())
}

pub fn cmd_lifetime(args: &LifetimeArgs) -> Result<()> {
    if let Some(path) = &args.reproduce_table8 {
        return write_reference_matrix(path);
    }

    let inputs = match &args.inputs {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            serde_json::from_str::<LifetimeInputs>(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => {
            let e_con_j = args
                .e_con_j
                .ok_or_else(|| anyhow!("--e-con-j is required (or pass --inputs)"))?;
            let t_ti_s = match &args.t_ti {
                Some(text) => nbiot_energy::units::parse_duration(text)
                    .map_err(|e| anyhow!("--t-ti: {e}"))?
                    .as_secs_f64(),
                None => {
                    if args.t_tau.is_none() {
                        bail!("--t-ti is required (or pass --t-tau for uplink-free scenarios)");
                    }
                    3600.0 // placeholder; overwritten by the TAU period below
                }
            };
            let t_tau_s = match &args.t_tau {
                Some(text) => Some(
                    nbiot_energy::units::parse_duration(text)
                        .map_err(|e| anyhow!("--t-tau: {e}"))?
                        .as_secs_f64(),
                ),
                None => None,
            };
            let battery_j = match (args.battery_j, args.battery_wh) {
                (Some(j), None) => j,
                (None, Some(wh)) => wh * 3600.0,
                (None, None) => 18_000.0,
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            LifetimeInputs {
                battery_j,
                e_con_j,
                e_edrx_j: args.e_edrx_j,
                p_psm_uw: args.p_psm_uw,
                t_ti_s,
                t_tau_s,
            }
        }
    };

    let report = if inputs.t_tau_s.is_some() {
        lifetime_uplink_free(&inputs)?
    } else {
        lifetime(&inputs)?
    };
    let json = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, json)
                .with_context(|| format!("cannot write {}", path.display()))?;
            println!(
                "{:.1} years -> {}",
                report.lifetime_years,
                path.display()
            );
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn write_reference_matrix(path: &Path) -> Result<()> {
    let mut out = String::from(
        "module,operator,setting,interval_h,computed_years,published_years,status\n",
    );
    for cell in reference::lifetime_matrix() {
        let status = match cell.status {
            reference::CellStatus::Accepted => "accepted",
            reference::CellStatus::Excluded => "excluded",
            reference::CellStatus::Unchecked => "unchecked",
        };
        out.push_str(&format!(
            "{},{},{},{},{:.2},{},{}\n",
            cell.module.label(),
            cell.operator.label(),
            cell.setting.label(),
            cell.interval_h,
            cell.computed_years,
            cell.published_years.map(|y| y.to_string()).unwrap_or_default(),
            status
        ));
    }
    std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote reference lifetime matrix to {}", path.display());
    Ok(())
}

pub fn cmd_radio(cmd: &RadioCmd) -> Result<()> {
    match cmd {
        RadioCmd::SnrMap {
            rsrp,
            thermal_cbm_per_hz,
            nf_cb,
            bandwidth_hz,
            interference_cbm,
            json,
        } => {
            let nm = NoiseModel {
                thermal_density_cbm_per_hz: *thermal_cbm_per_hz,
                receiver_nf_cb: *nf_cb,
                bandwidth_hz: *bandwidth_hz,
                interference_cbm: *interference_cbm,
            };
            let rsrp_cbm = CentibelMilliwatts(*rsrp);
            let (label, value) = if nm.interference_cbm.is_some() {
                ("sinr_cb", sinr_from_rsrp(rsrp_cbm, &nm)?)
            } else {
                ("snr_cb", snr_from_rsrp(rsrp_cbm, &nm)?)
            };
            if *json {
                println!(
                    "{}",
                    serde_json::json!({
                        "rsrp_cbm": rsrp,
                        label: value.0,
                        "noise_floor_cbm": noise_floor_cbm(&nm)?.0,
                    })
                );
            } else {
                println!("{} cB", value.0);
            }
        }
        RadioCmd::Ecl {
            rsrp,
            thr1,
            thr2,
            json,
        } => {
            let policy = EclPolicy {
                rsrp_threshold_ecl1_cbm: *thr1,
                rsrp_threshold_ecl2_cbm: *thr2,
                ..EclPolicy::default()
            };
            policy.validate()?;
            let level = select_ecl(CentibelMilliwatts(*rsrp), &policy);
            if *json {
                println!(
                    "{}",
                    serde_json::json!({
                        "rsrp_cbm": rsrp,
                        "ecl": level.index(),
                        "target_mcl_db": level.target_mcl_db(),
                    })
                );
            } else {
                println!("{level}");
            }
        }
        RadioCmd::Rach {
            attempts,
            p0,
            rsrp,
            max_per_ecl,
            json,
        } => {
            let policy = EclPolicy {
                max_preamble_attempts_per_ecl: *max_per_ecl,
                ..EclPolicy::default()
            };
            let p0 = TxPowerState::new(*p0)?;
            let seq = rach_attempt_sequence(CentibelMilliwatts(*rsrp), &policy, *attempts, p0)?;
            if *json {
                let rows: Vec<_> = seq
                    .iter()
                    .map(|(ecl, p)| serde_json::json!({"ecl": ecl.index(), "txpower_cbm": p.cbm()}))
                    .collect();
                println!("{}", serde_json::json!(rows));
            } else {
                for (i, (ecl, p)) in seq.iter().enumerate() {
                    println!("attempt {} {} {} cBm", i + 1, ecl, p.cbm());
                }
            }
        }
    }
    Ok(())
}
