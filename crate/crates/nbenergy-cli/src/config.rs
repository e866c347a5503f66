//! Loading of scenario, timer, and profile files.
//!
//! All three are TOML. Timer keys use the standard timer names verbatim
//! (`OnDurationTimer`, `DRXcycle`, `PTW`, `eDRXcycle`, `T3324`, `T3412`,
//! `InactivityTimer`); durations are strings with unit suffixes ("200ms",
//! "20.48s", "24h"). Relative paths that do not exist locally are retried
//! under `$NBENERGY_CONFIG_DIR`.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use nbiot_energy::profile::{presets, PowerProfile};
use nbiot_energy::schedule::{IdleMode, MisconfigReplay, Scenario};
use nbiot_energy::timers::TimerConfig;
use nbiot_energy::types::{Coverage, EclLevel, RaiFlag};
use nbiot_energy::units::parse_duration;

pub const CONFIG_DIR_ENV: &str = "NBENERGY_CONFIG_DIR";

/// Returns the path itself when it exists, otherwise retries relative paths
/// under the configured default directory.
pub fn resolve_config_path(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    if let Ok(dir) = std::env::var(CONFIG_DIR_ENV) {
        let candidate = Path::new(&dir).join(path);
        if candidate.exists() {
            return candidate;
        }
    }
    path.to_path_buf()
}

fn read_toml(path: &Path) -> Result<String> {
    let resolved = resolve_config_path(path);
    std::fs::read_to_string(&resolved)
        .with_context(|| format!("cannot read {}", resolved.display()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimersFile {
    #[serde(rename = "OnDurationTimer")]
    pub on_duration_timer: Option<String>,
    #[serde(rename = "DRXcycle")]
    pub drx_cycle: Option<String>,
    #[serde(rename = "PTW")]
    pub ptw: Option<String>,
    #[serde(rename = "eDRXcycle")]
    pub edrx_cycle: Option<String>,
    #[serde(rename = "T3324")]
    pub t3324: Option<String>,
    #[serde(rename = "T3412")]
    pub t3412: Option<String>,
    #[serde(rename = "InactivityTimer", alias = "Inactivity timer")]
    pub inactivity_timer: Option<String>,
}

impl TimersFile {
    pub fn into_config(self) -> Result<TimerConfig> {
        let mut cfg = TimerConfig::default();
        let set = |slot: &mut nbiot_energy::DurationUs,
                       value: Option<String>,
                       field: &str|
         -> Result<()> {
            if let Some(text) = value {
                *slot = parse_duration(&text)
                    .map_err(|e| anyhow!("timer {field}: {e}"))?;
            }
            Ok(())
        };
        set(&mut cfg.on_duration_timer, self.on_duration_timer, "OnDurationTimer")?;
        set(&mut cfg.drx_cycle, self.drx_cycle, "DRXcycle")?;
        set(&mut cfg.ptw, self.ptw, "PTW")?;
        set(&mut cfg.edrx_cycle, self.edrx_cycle, "eDRXcycle")?;
        set(&mut cfg.t3324_active, self.t3324, "T3324")?;
        set(&mut cfg.t3412_tau, self.t3412, "T3412")?;
        set(&mut cfg.inactivity_timer, self.inactivity_timer, "InactivityTimer")?;
        Ok(cfg)
    }
}

pub fn load_timers(path: Option<&Path>) -> Result<TimerConfig> {
    match path {
        None => Ok(TimerConfig::default()),
        Some(p) => {
            let text = read_toml(p)?;
            let file: TimersFile =
                toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            file.into_config()
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub rai: Option<String>,
    pub packet_size_bytes: Option<u32>,
    pub transmission_interval: Option<String>,
    pub coverage: Option<String>,
    pub ecl: Option<u8>,
    pub idle_mode: Option<String>,
    pub horizon: Option<String>,
    pub misconfig_replay: Option<String>,
    pub repetitions: Option<u32>,
    pub sync_jitter_ms: Option<f64>,
    pub seed: Option<u64>,
    pub allow_nonstandard_packet_size: Option<bool>,
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario> {
        let mut sc = Scenario::default();
        if let Some(rai) = self.rai {
            sc.rai = parse_rai(&rai)?;
        }
        if let Some(bytes) = self.packet_size_bytes {
            sc.packet_size_bytes = bytes;
        }
        if let Some(interval) = self.transmission_interval {
            sc.transmission_interval =
                parse_duration(&interval).map_err(|e| anyhow!("transmission_interval: {e}"))?;
        }
        if let Some(coverage) = self.coverage {
            sc.coverage = parse_coverage(&coverage)?;
        }
        if let Some(ecl) = self.ecl {
            sc.ecl = match ecl {
                0 => EclLevel::Ecl0,
                1 => EclLevel::Ecl1,
                2 => EclLevel::Ecl2,
                other => bail!("ecl must be 0, 1 or 2, got {other}"),
            };
        }
        if let Some(mode) = self.idle_mode {
            sc.idle_mode = match mode.as_str() {
                "psm-only" => IdleMode::PsmOnly,
                "edrx-then-psm" => IdleMode::EdrxThenPsm,
                other => bail!("idle_mode must be 'psm-only' or 'edrx-then-psm', got '{other}'"),
            };
        }
        if let Some(horizon) = self.horizon {
            sc.horizon = parse_duration(&horizon).map_err(|e| anyhow!("horizon: {e}"))?;
        }
        if let Some(replay) = self.misconfig_replay {
            sc.misconfig_replay = Some(match replay.as_str() {
                "ignore-rai200-every-other" => MisconfigReplay::IgnoreRai200EveryOther,
                "no-cdrx-during-inactivity" => MisconfigReplay::NoCdrxDuringInactivity,
                other => bail!(
                    "misconfig_replay must be 'ignore-rai200-every-other' or \
                     'no-cdrx-during-inactivity', got '{other}'"
                ),
            });
        }
        if let Some(reps) = self.repetitions {
            sc.repetitions = reps;
        }
        if let Some(jitter) = self.sync_jitter_ms {
            sc.sync_jitter_ms = jitter;
        }
        if let Some(seed) = self.seed {
            sc.seed = seed;
        }
        if let Some(allow) = self.allow_nonstandard_packet_size {
            sc.allow_nonstandard_packet_size = allow;
        }
        Ok(sc)
    }
}

pub fn parse_rai(text: &str) -> Result<RaiFlag> {
    match text.trim().to_ascii_lowercase().as_str() {
        "rai-000" | "000" | "0x000" | "none" => Ok(RaiFlag::None000),
        "rai-200" | "200" | "0x200" => Ok(RaiFlag::Release200),
        "rai-400" | "400" | "0x400" => Ok(RaiFlag::ReleaseAfterReply400),
        other => bail!("rai must be rai-000, rai-200 or rai-400, got '{other}'"),
    }
}

fn parse_coverage(text: &str) -> Result<Coverage> {
    match text.trim().to_ascii_lowercase().as_str() {
        "good" => Ok(Coverage::Good),
        "bad" => Ok(Coverage::Bad),
        other => bail!("coverage must be 'good' or 'bad', got '{other}'"),
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = read_toml(path)?;
    let file: ScenarioFile =
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    file.into_scenario()
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ProfileFile {
    Preset { preset: String },
    Inline(PowerProfile),
}

/// `--profile` accepts either a preset name or a TOML file path. Profile
/// files may name a preset (`preset = "bc95-telia-good"`) or spell out the
/// fields; omitted fields fall back to the default profile.
pub fn load_profile(arg: &str) -> Result<PowerProfile> {
    if let Some(profile) = presets::by_name(arg) {
        return Ok(profile);
    }
    let path = resolve_config_path(Path::new(arg));
    if !path.exists() {
        bail!(
            "'{arg}' is neither a profile preset ({}) nor a readable file",
            presets::PRESET_NAMES.join(", ")
        );
    }
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let file: ProfileFile =
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let profile = match file {
        ProfileFile::Preset { preset } => presets::by_name(&preset)
            .ok_or_else(|| anyhow!("unknown preset '{preset}' in {}", path.display()))?,
        ProfileFile::Inline(profile) => profile,
    };
    profile
        .validate()
        .map_err(|e| anyhow!("profile {}: {e}", path.display()))?;
    Ok(profile)
}
