//! Core protocol enums: RAI flag, coverage class, ECL level.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Release Assistance Indication flag carried in UL signaling.
///
/// Controls how soon the network releases the RRC connection after an uplink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RaiFlag {
    /// 0x000: no flag; the UE stays connected for the whole inactivity timer.
    None000,
    /// 0x200: release right after the next UL message.
    Release200,
    /// 0x400: release once the next UL message has been replied to.
    ReleaseAfterReply400,
}

impl RaiFlag {
    /// The raw flag value as signaled by the module.
    pub fn flag_value(self) -> u16 {
        match self {
            RaiFlag::None000 => 0x000,
            RaiFlag::Release200 => 0x200,
            RaiFlag::ReleaseAfterReply400 => 0x400,
        }
    }

    /// Whether an event with this flag runs the inactivity timer.
    pub fn uses_inactivity_timer(self) -> bool {
        matches!(self, RaiFlag::None000)
    }

    /// Whether the UE waits for the DL reply before release.
    pub fn waits_for_reply(self) -> bool {
        matches!(self, RaiFlag::ReleaseAfterReply400)
    }
}

impl fmt::Display for RaiFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RaiFlag::None000 => "rai-000",
            RaiFlag::Release200 => "rai-200",
            RaiFlag::ReleaseAfterReply400 => "rai-400",
        };
        f.write_str(s)
    }
}

/// Coverage class of a measurement location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coverage {
    Good,
    Bad,
}

/// Coverage Enhancement Level. Higher levels trade energy and delay for
/// robustness via message repetition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EclLevel {
    #[serde(rename = "0", alias = "ecl0")]
    Ecl0,
    #[serde(rename = "1", alias = "ecl1")]
    Ecl1,
    #[serde(rename = "2", alias = "ecl2")]
    Ecl2,
}

impl EclLevel {
    pub const ALL: [EclLevel; 3] = [EclLevel::Ecl0, EclLevel::Ecl1, EclLevel::Ecl2];

    /// Target Maximum Coupling Loss for the level, in dB.
    pub fn target_mcl_db(self) -> u32 {
        match self {
            EclLevel::Ecl0 => 144,
            EclLevel::Ecl1 => 154,
            EclLevel::Ecl2 => 164,
        }
    }

    pub fn index(self) -> usize {
        match self {
            EclLevel::Ecl0 => 0,
            EclLevel::Ecl1 => 1,
            EclLevel::Ecl2 => 2,
        }
    }

    /// Next level up, saturating at ECL 2.
    pub fn escalate(self) -> EclLevel {
        match self {
            EclLevel::Ecl0 => EclLevel::Ecl1,
            EclLevel::Ecl1 | EclLevel::Ecl2 => EclLevel::Ecl2,
        }
    }
}

impl fmt::Display for EclLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ECL{}", self.index())
    }
}
