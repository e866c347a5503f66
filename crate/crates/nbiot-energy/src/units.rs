//! Unit newtypes shared across the crate.
//!
//! Power ratios are carried in integer centibels (cB) and absolute powers in
//! integer centibel-milliwatts (cBm): 1 dB = 10 cB, 1 dBm = 10 cBm. NB-IoT
//! modules report radio metadata in these units, and keeping the integer
//! centi-units end to end makes threshold comparisons exact.
//!
//! Durations are integer microseconds so that timer bounds such as 2.56 s or
//! 65.536 s are representable without floating point.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use crate::error::UnitError;

/// A power ratio in centibels (1 dB = 10 cB).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Centibels(pub i32);

/// An absolute power in centibel-milliwatts (1 dBm = 10 cBm).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct CentibelMilliwatts(pub i32);

impl Centibels {
    pub fn as_db(self) -> f64 {
        cb_to_db(self)
    }
}

impl CentibelMilliwatts {
    pub fn as_dbm(self) -> f64 {
        cbm_to_dbm(self)
    }

    /// Linear power in milliwatts.
    pub fn to_milliwatts(self) -> f64 {
        10f64.powf(self.0 as f64 / 100.0)
    }
}

impl fmt::Display for Centibels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} cB", self.0)
    }
}

impl fmt::Display for CentibelMilliwatts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} cBm", self.0)
    }
}

impl Add<Centibels> for CentibelMilliwatts {
    type Output = CentibelMilliwatts;
    fn add(self, rhs: Centibels) -> Self::Output {
        CentibelMilliwatts(self.0 + rhs.0)
    }
}

impl Sub for CentibelMilliwatts {
    type Output = Centibels;
    fn sub(self, rhs: Self) -> Self::Output {
        Centibels(self.0 - rhs.0)
    }
}

impl Add for Centibels {
    type Output = Centibels;
    fn add(self, rhs: Self) -> Self::Output {
        Centibels(self.0 + rhs.0)
    }
}

impl Sub for Centibels {
    type Output = Centibels;
    fn sub(self, rhs: Self) -> Self::Output {
        Centibels(self.0 - rhs.0)
    }
}

/// Exact cB -> dB conversion (divide by ten).
pub fn cb_to_db(x: Centibels) -> f64 {
    x.0 as f64 / 10.0
}

/// Exact cBm -> dBm conversion (divide by ten).
pub fn cbm_to_dbm(x: CentibelMilliwatts) -> f64 {
    x.0 as f64 / 10.0
}

/// dB -> cB. Rejects non-finite input; rounds half away from zero to the
/// nearest integer centibel.
pub fn db_to_cb(x: f64) -> Result<Centibels, UnitError> {
    to_centi(x).map(Centibels)
}

/// dBm -> cBm. Rejects non-finite input; rounds half away from zero.
pub fn dbm_to_cbm(x: f64) -> Result<CentibelMilliwatts, UnitError> {
    to_centi(x).map(CentibelMilliwatts)
}

fn to_centi(x: f64) -> Result<i32, UnitError> {
    if !x.is_finite() {
        return Err(UnitError::NonFinite { value: x });
    }
    let scaled = (x * 10.0).round();
    if scaled < i32::MIN as f64 || scaled > i32::MAX as f64 {
        return Err(UnitError::OutOfRange { value: x });
    }
    Ok(scaled as i32)
}

pub const MICROS_PER_MILLI: u64 = 1_000;
pub const MICROS_PER_SEC: u64 = 1_000_000;
pub const MICROS_PER_MIN: u64 = 60 * MICROS_PER_SEC;
pub const MICROS_PER_HOUR: u64 = 3_600 * MICROS_PER_SEC;

/// A duration in integer microseconds.
///
/// All scheduling arithmetic happens on this type so that timer bounds
/// (2.56 s, 40.96 s, 65.536 s, ...) are exact and tiling sums never drift.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct DurationUs(pub u64);

impl DurationUs {
    pub const ZERO: DurationUs = DurationUs(0);

    pub const fn from_us(us: u64) -> Self {
        DurationUs(us)
    }

    pub const fn from_ms(ms: u64) -> Self {
        DurationUs(ms * MICROS_PER_MILLI)
    }

    pub const fn from_secs(s: u64) -> Self {
        DurationUs(s * MICROS_PER_SEC)
    }

    pub const fn from_hours(h: u64) -> Self {
        DurationUs(h * MICROS_PER_HOUR)
    }

    /// Builds from fractional seconds, rounding to the nearest microsecond.
    pub fn from_secs_f64(s: f64) -> Self {
        DurationUs((s * MICROS_PER_SEC as f64).round() as u64)
    }

    /// Builds from fractional milliseconds, rounding to the nearest microsecond.
    pub fn from_ms_f64(ms: f64) -> Self {
        DurationUs((ms * MICROS_PER_MILLI as f64).round() as u64)
    }

    pub const fn as_us(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / MICROS_PER_SEC as f64
    }

    pub fn as_ms_f64(self) -> f64 {
        self.0 as f64 / MICROS_PER_MILLI as f64
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub const fn saturating_sub(self, rhs: Self) -> Self {
        DurationUs(self.0.saturating_sub(rhs.0))
    }

    pub const fn checked_sub(self, rhs: Self) -> Option<Self> {
        match self.0.checked_sub(rhs.0) {
            Some(v) => Some(DurationUs(v)),
            None => None,
        }
    }

    pub const fn min(self, rhs: Self) -> Self {
        if self.0 <= rhs.0 {
            self
        } else {
            rhs
        }
    }
}

impl Add for DurationUs {
    type Output = DurationUs;
    fn add(self, rhs: Self) -> Self::Output {
        DurationUs(self.0 + rhs.0)
    }
}

impl AddAssign for DurationUs {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Sub for DurationUs {
    type Output = DurationUs;
    fn sub(self, rhs: Self) -> Self::Output {
        DurationUs(self.0 - rhs.0)
    }
}

impl fmt::Display for DurationUs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(MICROS_PER_SEC) {
            write!(f, "{} s", self.0 / MICROS_PER_SEC)
        } else if self.0.is_multiple_of(MICROS_PER_MILLI) {
            write!(f, "{} ms", self.0 / MICROS_PER_MILLI)
        } else {
            write!(f, "{} us", self.0)
        }
    }
}

/// Parses a duration string with a unit suffix: `us`, `ms`, `s`, `min`, `h`.
///
/// Accepts fractional values (`"2.56s"`, `"20.48 s"`); the result is rounded
/// to whole microseconds.
pub fn parse_duration(text: &str) -> Result<DurationUs, UnitError> {
    let s = text.trim();
    let (number, unit) = match s.find(|c: char| c.is_ascii_alphabetic()) {
        Some(pos) => (s[..pos].trim(), s[pos..].trim()),
        None => return Err(UnitError::MissingUnitSuffix { text: s.into() }),
    };
    let value: f64 = number
        .parse()
        .map_err(|_| UnitError::BadDuration { text: s.into() })?;
    if !value.is_finite() || value < 0.0 {
        return Err(UnitError::BadDuration { text: s.into() });
    }
    let scale = match unit {
        "us" => 1.0,
        "ms" => MICROS_PER_MILLI as f64,
        "s" | "sec" => MICROS_PER_SEC as f64,
        "min" => MICROS_PER_MIN as f64,
        "h" => MICROS_PER_HOUR as f64,
        _ => return Err(UnitError::MissingUnitSuffix { text: s.into() }),
    };
    Ok(DurationUs((value * scale).round() as u64))
}
