//! Trace, ground-truth and segment CSV files.
//!
//! Trace CSV: header `timestamp_s,current_a` with an optional `voltage_v`
//! column; timestamps carry six decimals (microsecond resolution), currents
//! are written in scientific notation with 17 significant digits so a
//! write/read round trip reproduces every sample bit-exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};

use nbiot_energy::segments::{PhaseKind, Segment, SegmentSource};
use nbiot_energy::trace::CurrentTrace;

/// Buffered writer that formats trace rows; used by the streaming simulator.
/// The voltage column makes the file self-describing, so a later `analyze`
/// integrates energy at the right supply voltage.
pub struct TraceCsvWriter<W: Write> {
    out: W,
    rate_hz: f64,
    voltage: String,
    next_idx: usize,
}

impl TraceCsvWriter<BufWriter<File>> {
    pub fn create(path: &Path, rate_hz: f64, voltage_v: f64) -> Result<Self> {
        let file = File::create(path)
            .with_context(|| format!("cannot create {}", path.display()))?;
        TraceCsvWriter::new(BufWriter::with_capacity(1 << 20, file), rate_hz, voltage_v)
    }
}

impl<W: Write> TraceCsvWriter<W> {
    pub fn new(mut out: W, rate_hz: f64, voltage_v: f64) -> Result<Self> {
        writeln!(out, "timestamp_s,current_a,voltage_v")?;
        Ok(TraceCsvWriter {
            out,
            rate_hz,
            voltage: format!("{voltage_v:.6}"),
            next_idx: 0,
        })
    }

    pub fn write_chunk(&mut self, chunk: &[f64]) -> Result<()> {
        for &sample in chunk {
            let t = self.next_idx as f64 / self.rate_hz;
            writeln!(self.out, "{t:.6},{sample:.16e},{}", self.voltage)?;
            self.next_idx += 1;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<usize> {
        self.out.flush()?;
        Ok(self.next_idx)
    }
}

/// Column and rate options for the importer. Power-meter exports disagree on
/// column naming, so the mapping is explicit rather than guessed.
#[derive(Debug, Clone)]
pub struct TraceReadOptions {
    pub time_col: String,
    pub current_col: String,
    pub voltage_col: String,
    /// Declared sample rate; inferred from timestamps when absent.
    pub declared_rate_hz: Option<f64>,
    /// Supply voltage override; otherwise the voltage column or the default.
    pub voltage_v: Option<f64>,
}

impl Default for TraceReadOptions {
    fn default() -> Self {
        TraceReadOptions {
            time_col: "timestamp_s".into(),
            current_col: "current_a".into(),
            voltage_col: "voltage_v".into(),
            declared_rate_hz: None,
            voltage_v: None,
        }
    }
}

#[derive(Debug)]
pub struct LoadedTrace {
    pub trace: CurrentTrace,
    pub rate_hz: f64,
    pub rate_source: &'static str,
}

/// Maximum relative spread of timestamp deltas before the trace is rejected
/// as non-uniform.
const UNIFORMITY_TOL: f64 = 0.01;

pub fn read_trace_csv(path: &Path, opts: &TraceReadOptions) -> Result<LoadedTrace> {
    let file =
        File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::with_capacity(1 << 20, file));

    let headers = reader
        .headers()
        .with_context(|| format!("{}: cannot read header", path.display()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let time_idx = col(&opts.time_col).with_context(|| {
        format!(
            "{}: no '{}' column (available: {})",
            path.display(),
            opts.time_col,
            headers.iter().collect::<Vec<_>>().join(", ")
        )
    })?;
    let current_idx = col(&opts.current_col).with_context(|| {
        format!("{}: no '{}' column", path.display(), opts.current_col)
    })?;
    let voltage_idx = col(&opts.voltage_col);

    let mut samples = Vec::new();
    let mut first_t = None;
    let mut prev_t: Option<f64> = None;
    let mut min_dt = f64::INFINITY;
    let mut max_dt = f64::NEG_INFINITY;
    let mut voltage_from_col = None;

    for (row, record) in reader.records().enumerate() {
        let line = row + 2; // header is line 1
        let record = record.with_context(|| format!("{}: line {line}", path.display()))?;
        let parse = |idx: usize, what: &str| -> Result<f64> {
            let field = record
                .get(idx)
                .with_context(|| format!("{}: line {line}: missing {what}", path.display()))?;
            field.parse::<f64>().with_context(|| {
                format!("{}: line {line}: bad {what} '{field}'", path.display())
            })
        };
        let t = parse(time_idx, "timestamp")?;
        let current = parse(current_idx, "current")?;
        if !(current.is_finite() && current >= 0.0) {
            bail!(
                "{}: line {line}: current {current} is negative or non-finite",
                path.display()
            );
        }
        if let Some(v_idx) = voltage_idx {
            if voltage_from_col.is_none() {
                voltage_from_col = Some(parse(v_idx, "voltage")?);
            }
        }
        if let Some(prev) = prev_t {
            let dt = t - prev;
            if dt <= 0.0 {
                bail!(
                    "{}: line {line}: timestamps must be strictly increasing",
                    path.display()
                );
            }
            min_dt = min_dt.min(dt);
            max_dt = max_dt.max(dt);
        } else {
            first_t = Some(t);
        }
        prev_t = Some(t);
        samples.push(current);
    }

    if samples.is_empty() {
        bail!("{}: no samples", path.display());
    }

    let (rate_hz, rate_source) = match opts.declared_rate_hz {
        Some(rate) => (rate, "declared"),
        None => {
            if samples.len() < 2 {
                bail!(
                    "{}: cannot infer the sample rate from a single row; pass --rate",
                    path.display()
                );
            }
            let span = prev_t.unwrap() - first_t.unwrap();
            let mean_dt = span / (samples.len() - 1) as f64;
            if (max_dt - min_dt) / mean_dt > UNIFORMITY_TOL {
                bail!(
                    "{}: timestamp deltas vary beyond {}% (min {min_dt:.9}, max {max_dt:.9}); \
                     not a uniform trace",
                    path.display(),
                    UNIFORMITY_TOL * 100.0
                );
            }
            (1.0 / mean_dt, "inferred")
        }
    };

    let voltage = opts
        .voltage_v
        .or(voltage_from_col)
        .unwrap_or(nbiot_energy::trace::DEFAULT_SUPPLY_VOLTAGE_V);
    let t0 = first_t.unwrap_or(0.0);
    let trace = CurrentTrace::new(rate_hz, voltage, samples)?.with_t0(t0);
    Ok(LoadedTrace {
        trace,
        rate_hz,
        rate_source,
    })
}

/// Ground-truth sidecar: `kind,start_idx,end_idx`.
pub fn write_truth_csv(path: &Path, segments: &[Segment]) -> Result<()> {
    let mut out = BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    );
    writeln!(out, "kind,start_idx,end_idx")?;
    for seg in segments {
        writeln!(out, "{},{},{}", seg.kind, seg.start_idx, seg.end_idx)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_truth_csv(path: &Path) -> Result<Vec<Segment>> {
    let file =
        File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let reader = BufReader::new(file);
    let mut segments = Vec::new();
    for (row, line) in reader.lines().enumerate() {
        let line = line?;
        if row == 0 {
            if line.trim() != "kind,start_idx,end_idx" {
                bail!("{}: unexpected truth header '{line}'", path.display());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let err = || format!("{}: line {}: bad truth row", path.display(), row + 1);
        let kind: PhaseKind = parts
            .next()
            .with_context(err)?
            .parse()
            .map_err(|e: String| anyhow::anyhow!("{}: {e}", err()))?;
        let start_idx: usize = parts.next().with_context(err)?.parse().with_context(err)?;
        let end_idx: usize = parts.next().with_context(err)?.parse().with_context(err)?;
        segments.push(Segment {
            kind,
            start_idx,
            end_idx,
            source: SegmentSource::GroundTruth,
        });
    }
    Ok(segments)
}

/// Detected segments with their integrated energies:
/// `kind,start_idx,end_idx,energy_j`.
pub fn write_segments_csv(
    path: &Path,
    trace: &CurrentTrace,
    segments: &[Segment],
) -> Result<()> {
    let mut out = BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    );
    writeln!(out, "kind,start_idx,end_idx,energy_j")?;
    for seg in segments {
        let energy = nbiot_energy::integrate_energy(trace, seg)?;
        writeln!(
            out,
            "{},{},{},{energy:.9e}",
            seg.kind, seg.start_idx, seg.end_idx
        )?;
    }
    out.flush()?;
    Ok(())
}
