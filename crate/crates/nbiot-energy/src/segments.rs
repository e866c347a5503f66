//! Labeled time intervals of a trace: protocol phases and coarse RRC states.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::SegmentError;

/// The protocol phase a stretch of samples belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseKind {
    /// Re-synchronization with the network when leaving Idle.
    Sync,
    /// Uplink transmission plus the paired reception window.
    TxRx,
    /// Inactivity timer period, paging with cDRX sleep cycles.
    InactivityCdrx,
    /// Connection release.
    Release,
    /// Paging time window of an eDRX cycle.
    EdrxListen,
    /// Radio-off sleep between eDRX listen windows.
    EdrxSleep,
    /// PSM deep sleep.
    PsmDeep,
    /// Tracking area update event.
    TauUpdate,
    /// Non-protocol artifact, e.g. a metadata-poll current spike.
    Artifact,
}

impl PhaseKind {
    pub const ALL: [PhaseKind; 9] = [
        PhaseKind::Sync,
        PhaseKind::TxRx,
        PhaseKind::InactivityCdrx,
        PhaseKind::Release,
        PhaseKind::EdrxListen,
        PhaseKind::EdrxSleep,
        PhaseKind::PsmDeep,
        PhaseKind::TauUpdate,
        PhaseKind::Artifact,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PhaseKind::Sync => "sync",
            PhaseKind::TxRx => "txrx",
            PhaseKind::InactivityCdrx => "inactivity_cdrx",
            PhaseKind::Release => "release",
            PhaseKind::EdrxListen => "edrx_listen",
            PhaseKind::EdrxSleep => "edrx_sleep",
            PhaseKind::PsmDeep => "psm_deep",
            PhaseKind::TauUpdate => "tau_update",
            PhaseKind::Artifact => "artifact",
        }
    }
}

impl fmt::Display for PhaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhaseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PhaseKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown phase kind '{s}'"))
    }
}

/// Where a segment label came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentSource {
    GroundTruth,
    Detected,
}

/// A labeled, half-open sample interval `[start_idx, end_idx)` of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: PhaseKind,
    pub start_idx: usize,
    pub end_idx: usize,
    pub source: SegmentSource,
}

impl Segment {
    pub fn new(
        kind: PhaseKind,
        start_idx: usize,
        end_idx: usize,
        source: SegmentSource,
    ) -> Result<Self, SegmentError> {
        if start_idx >= end_idx {
            return Err(SegmentError::EmptySegment { start_idx, end_idx });
        }
        Ok(Segment {
            kind,
            start_idx,
            end_idx,
            source,
        })
    }

    pub fn len(&self) -> usize {
        self.end_idx - self.start_idx
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self, sample_rate_hz: f64) -> f64 {
        self.len() as f64 / sample_rate_hz
    }
}

/// Checks that a labeling is sorted by start, non-overlapping, and within the
/// trace bounds.
pub fn validate_labeling(segments: &[Segment], trace_len: usize) -> Result<(), SegmentError> {
    let mut prev_end = 0usize;
    for (index, seg) in segments.iter().enumerate() {
        if seg.start_idx >= seg.end_idx {
            return Err(SegmentError::EmptySegment {
                start_idx: seg.start_idx,
                end_idx: seg.end_idx,
            });
        }
        if seg.end_idx > trace_len {
            return Err(SegmentError::OutOfBounds {
                start_idx: seg.start_idx,
                end_idx: seg.end_idx,
                trace_len,
            });
        }
        if seg.start_idx < prev_end {
            return Err(SegmentError::Unordered { index });
        }
        prev_end = seg.end_idx;
    }
    Ok(())
}

/// Merges contiguous segments of the same kind. Total covered sample count is
/// preserved.
pub fn merge_adjacent_same_kind(segments: &[Segment]) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::with_capacity(segments.len());
    for seg in segments {
        match out.last_mut() {
            Some(last)
                if last.kind == seg.kind
                    && last.source == seg.source
                    && last.end_idx == seg.start_idx =>
            {
                last.end_idx = seg.end_idx;
            }
            _ => out.push(*seg),
        }
    }
    out
}

/// Sum of covered samples over a labeling.
pub fn covered_samples(segments: &[Segment]) -> usize {
    segments.iter().map(Segment::len).sum()
}

/// Macro state of the UE's control link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoarseState {
    Connected,
    Idle,
}

/// A half-open sample interval labeled with a coarse RRC state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoarseSegment {
    pub state: CoarseState,
    pub start_idx: usize,
    pub end_idx: usize,
}

impl CoarseSegment {
    pub fn len(&self) -> usize {
        self.end_idx - self.start_idx
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
