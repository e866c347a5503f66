//! Renders a phase schedule into a current trace, with optional
//! multiplicative noise and metadata-poll spike artifacts, and produces the
//! matching ground-truth labeling for detector testing.
//!
//! Rendering is streamable: [`synthesize_stream`] emits fixed-size chunks in
//! order, so day-long traces can be written to disk without materializing
//! hundreds of millions of samples. [`synthesize`] is the in-memory wrapper;
//! both produce bit-identical samples for the same seed.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::SynthError;
use crate::profile::{PowerProfile, TXRX_PEAK_MS};
use crate::schedule::PhaseSchedule;
use crate::segments::{merge_adjacent_same_kind, PhaseKind, Segment, SegmentSource};
use crate::trace::CurrentTrace;

/// Knobs for trace rendering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthOptions {
    /// Standard deviation of the per-sample multiplicative Gaussian noise,
    /// as a fraction of the sample value. Zero renders piecewise-constant
    /// levels (plus the TxRx control peaks).
    pub noise_stddev_fraction: f64,
    /// Metadata-poll spikes per minute, superposed on the trace.
    pub at_spike_rate_per_min: f64,
    /// Energy of one metadata-poll spike.
    pub at_spike_energy_mj: f64,
    /// Width of one spike.
    pub at_spike_duration_ms: f64,
    pub seed: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            noise_stddev_fraction: 0.0,
            at_spike_rate_per_min: 0.0,
            at_spike_energy_mj: 15.0,
            at_spike_duration_ms: 4.0,
            seed: 0,
        }
    }
}

impl SynthOptions {
    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.noise_stddev_fraction.is_finite()
            && (0.0..0.5).contains(&self.noise_stddev_fraction))
        {
            return Err(SynthError::BadNoiseFraction {
                value: self.noise_stddev_fraction,
            });
        }
        if !(self.at_spike_energy_mj.is_finite() && self.at_spike_energy_mj > 0.0) {
            return Err(SynthError::BadSpikeEnergy {
                value: self.at_spike_energy_mj,
            });
        }
        if !(self.at_spike_duration_ms.is_finite() && self.at_spike_duration_ms > 0.0) {
            return Err(SynthError::BadSpikeDuration {
                value: self.at_spike_duration_ms,
            });
        }
        if !(self.at_spike_rate_per_min.is_finite() && self.at_spike_rate_per_min >= 0.0) {
            return Err(SynthError::BadSpikeRate {
                value: self.at_spike_rate_per_min,
            });
        }
        Ok(())
    }
}

/// Streaming chunk size in samples.
const CHUNK: usize = 1 << 16;

/// Renders `sched` in memory and returns the trace with its ground truth.
/// Identical inputs (including the seed) produce bit-identical traces.
pub fn synthesize(
    sched: &PhaseSchedule,
    profile: &PowerProfile,
    opt: &SynthOptions,
    rate_hz: f64,
    voltage_v: f64,
) -> Result<(CurrentTrace, Vec<Segment>), SynthError> {
    let mut samples = Vec::new();
    let truth = synthesize_stream(sched, profile, opt, rate_hz, voltage_v, |chunk| {
        samples.extend_from_slice(chunk);
        Ok(())
    })?;
    let trace = CurrentTrace::new(rate_hz, voltage_v, samples)?;
    Ok((trace, truth))
}

/// Streaming renderer: `emit` receives consecutive sample chunks in order.
/// Returns the ground-truth segments. The sink may fail (e.g. on I/O), which
/// aborts rendering.
pub fn synthesize_stream<E>(
    sched: &PhaseSchedule,
    profile: &PowerProfile,
    opt: &SynthOptions,
    rate_hz: f64,
    voltage_v: f64,
    mut emit: E,
) -> Result<Vec<Segment>, SynthError>
where
    E: FnMut(&[f64]) -> Result<(), SynthError>,
{
    opt.validate()?;
    if !(rate_hz.is_finite() && rate_hz > 0.0) {
        return Err(SynthError::Trace(crate::error::TraceError::BadSampleRate {
            rate_hz,
        }));
    }
    if !(voltage_v.is_finite() && voltage_v > 0.0) {
        return Err(SynthError::Trace(crate::error::TraceError::BadVoltage {
            voltage_v,
        }));
    }

    let total = us_to_idx(sched.horizon().as_us(), rate_hz);

    // Ground-truth boundaries from cumulative microseconds.
    let mut truth = Vec::new();
    let mut cursor_us = 0u64;
    let mut phase_bounds = Vec::with_capacity(sched.phases().len());
    for phase in sched.phases() {
        let start = us_to_idx(cursor_us, rate_hz);
        cursor_us += phase.duration.as_us();
        let end = us_to_idx(cursor_us, rate_hz);
        phase_bounds.push((phase.kind, start, end));
        if start < end {
            truth.push(Segment {
                kind: phase.kind,
                start_idx: start,
                end_idx: end,
                source: SegmentSource::GroundTruth,
            });
        }
    }

    // Spikes get their own deterministic stream so chunked and in-memory
    // rendering consume randomness identically.
    let mut spikes = Vec::new();
    if opt.at_spike_rate_per_min > 0.0 && total > 0 {
        let mut spike_rng = ChaCha8Rng::seed_from_u64(opt.seed ^ 0x9E37_79B9_7F4A_7C15);
        let minutes = sched.horizon().as_us() as f64 / 60e6;
        let count = (opt.at_spike_rate_per_min * minutes).round() as usize;
        let spike_len = ((opt.at_spike_duration_ms / 1000.0 * rate_hz).round() as usize).max(1);
        if spike_len <= total {
            // Current chosen so the integrated spike energy is exact.
            let current =
                opt.at_spike_energy_mj / 1000.0 / (voltage_v * spike_len as f64 / rate_hz);
            for _ in 0..count {
                let at = spike_rng.gen_range(0..=total - spike_len);
                spikes.push((at, at + spike_len, current));
            }
            spikes.sort_unstable_by_key(|&(start, _, _)| start);
        }
    }

    let mut noise_rng = ChaCha8Rng::seed_from_u64(opt.seed);
    let noisy = opt.noise_stddev_fraction > 0.0;
    let renderer = PhaseRenderer {
        sched,
        profile,
        voltage_v,
        rate_hz,
        peak_len: (TXRX_PEAK_MS / 1000.0 * rate_hz).round() as usize,
    };

    let mut buf = vec![0.0f64; CHUNK];
    let mut phase_iter = phase_bounds.iter().filter(|(_, s, e)| s < e).peekable();
    let mut next_spike = 0usize;
    let mut chunk_start = 0usize;
    while chunk_start < total {
        let chunk_end = (chunk_start + CHUNK).min(total);
        let chunk = &mut buf[..chunk_end - chunk_start];

        // Fill from the phases overlapping this chunk.
        while let Some(&&(kind, p_start, p_end)) = phase_iter.peek() {
            if p_start >= chunk_end {
                break;
            }
            let from = p_start.max(chunk_start);
            let to = p_end.min(chunk_end);
            for i in from..to {
                chunk[i - chunk_start] = renderer.sample(kind, i - p_start, p_end - p_start);
            }
            if p_end <= chunk_end {
                phase_iter.next();
            } else {
                break;
            }
        }

        if noisy {
            for s in chunk.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut noise_rng);
                *s = (*s * (1.0 + opt.noise_stddev_fraction * z)).max(0.0);
            }
        }

        // Superpose the spikes overlapping this chunk. Spikes are sorted by
        // start; an earlier spike can still overlap later chunks, so only
        // advance past ones that ended before this chunk.
        while next_spike < spikes.len() && spikes[next_spike].1 <= chunk_start {
            next_spike += 1;
        }
        for &(s_start, s_end, current) in spikes[next_spike..]
            .iter()
            .take_while(|&&(s_start, _, _)| s_start < chunk_end)
        {
            let from = s_start.max(chunk_start);
            let to = s_end.min(chunk_end);
            for i in from..to {
                chunk[i - chunk_start] += current;
            }
        }

        emit(chunk)?;
        chunk_start = chunk_end;
    }

    Ok(merge_adjacent_same_kind(&truth))
}

fn us_to_idx(us: u64, rate_hz: f64) -> usize {
    (us as f64 * rate_hz / 1e6).round() as usize
}

struct PhaseRenderer<'a> {
    sched: &'a PhaseSchedule,
    profile: &'a PowerProfile,
    voltage_v: f64,
    rate_hz: f64,
    peak_len: usize,
}

impl PhaseRenderer<'_> {
    /// Current at `local_idx` samples into a phase of `phase_len` samples.
    fn sample(&self, kind: PhaseKind, local_idx: usize, phase_len: usize) -> f64 {
        let p = self.profile;
        match kind {
            PhaseKind::Sync => p.sync_current_a(),
            PhaseKind::Release => p.release_current_a(),
            PhaseKind::EdrxListen => p.paging_current_a(),
            PhaseKind::EdrxSleep => p.edrx_sleep_current_a(self.voltage_v),
            PhaseKind::PsmDeep => p.psm_current_a(self.voltage_v),
            PhaseKind::TauUpdate => p.tau_current_a(),
            PhaseKind::Artifact => 0.0,
            PhaseKind::TxRx => {
                // Control-signaling peaks bracket the payload plateau.
                let peak = self.peak_len.min(phase_len / 2);
                if local_idx < peak || local_idx >= phase_len - peak {
                    2.0 * p.txrx_current_a()
                } else {
                    p.txrx_current_a()
                }
            }
            PhaseKind::InactivityCdrx => {
                if self.sched.cdrx_continuous_paging() {
                    return p.paging_current_a();
                }
                // DRX cycles: OnDurationTimer of paging, then quiet sleep.
                let local_us = local_idx as f64 * 1e6 / self.rate_hz;
                let on_us = self.sched.cdrx_on_duration().as_us() as f64;
                let cycle_us = self.sched.cdrx_cycle().as_us() as f64;
                if local_us.rem_euclid(cycle_us) < on_us {
                    p.paging_current_a()
                } else {
                    p.cdrx_sleep_current_a()
                }
            }
        }
    }
}

/// Reproduces the firmware bug where the module stays at the elevated
/// listening level after the paging-occasion window ends: every EdrxListen
/// segment keeps drawing its listen-level current for `extension_ms` past its
/// end, while the ground-truth markers stay put.
pub fn inject_edrx_listen_bug(
    trace: CurrentTrace,
    segments: Vec<Segment>,
    extension_ms: f64,
) -> Result<(CurrentTrace, Vec<Segment>), SynthError> {
    let listens: Vec<Segment> = segments
        .iter()
        .copied()
        .filter(|s| s.kind == PhaseKind::EdrxListen)
        .collect();
    if listens.is_empty() {
        return Err(SynthError::NoListenSegment);
    }
    let rate = trace.sample_rate_hz();
    let ext = (extension_ms / 1000.0 * rate).round() as usize;
    if ext == 0 {
        return Ok((trace, segments));
    }
    let (rate_hz, voltage) = (trace.sample_rate_hz(), trace.supply_voltage_v());
    let mut samples = trace.into_samples();
    let n = samples.len();
    for seg in listens {
        let level = median_of(&samples[seg.start_idx..seg.end_idx]);
        let stop = (seg.end_idx + ext).min(n);
        for s in &mut samples[seg.end_idx..stop] {
            *s += level;
        }
    }
    let trace = CurrentTrace::new(rate_hz, voltage, samples)?;
    Ok((trace, segments))
}

fn median_of(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}
