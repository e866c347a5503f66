//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "nbenergy",
    version,
    about = "NB-IoT energy toolkit: simulate current traces, segment them into protocol phases, and project battery lifetime",
    after_help = "Relative config paths that do not exist locally are also searched under $NBENERGY_CONFIG_DIR."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a phase schedule for a scenario and render it to trace.csv,
    /// truth.csv and schedule.json.
    Simulate(SimulateArgs),
    /// Segment trace CSVs into protocol phases and report per-phase energy.
    Analyze(AnalyzeArgs),
    /// Project battery lifetime from per-interval energy figures.
    Lifetime(LifetimeArgs),
    /// Link-budget helpers: SNR/SINR mapping, ECL selection, RACH ramp.
    Radio(RadioArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario TOML file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Timer TOML file (standard timer names as keys); defaults otherwise.
    #[arg(long)]
    pub timers: Option<PathBuf>,
    /// Power profile: preset name or TOML file. Defaults to the calibrated
    /// BC95 profile matching the scenario's coverage class.
    #[arg(long)]
    pub profile: Option<String>,
    /// Output directory for trace.csv, truth.csv and schedule.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample rate in Hz.
    #[arg(long, default_value_t = 4000.0)]
    pub rate: f64,
    /// Supply voltage in volts.
    #[arg(long, default_value_t = 3.6)]
    pub voltage: f64,
    /// Multiplicative noise standard deviation (fraction of each sample).
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Metadata-poll spikes per minute.
    #[arg(long, default_value_t = 0.0)]
    pub spike_rate: f64,
    /// Energy per spike in millijoules.
    #[arg(long, default_value_t = 15.0)]
    pub spike_energy_mj: f64,
    /// Spike width in milliseconds.
    #[arg(long, default_value_t = 4.0)]
    pub spike_duration_ms: f64,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Trace CSV files; independent files are analyzed concurrently.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Power profile (preset name or TOML file) used to derive thresholds
    /// and label phases by their current bands.
    #[arg(long)]
    pub profile: Option<String>,
    /// Percentile-threshold mode: detect without a profile and label every
    /// detection with the target kind.
    #[arg(long, conflicts_with = "profile")]
    pub no_profile: bool,
    /// Ground-truth sidecar CSV; auto-discovered next to the input if absent.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Output directory (defaults to each input's directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Moving-max window W in samples.
    #[arg(long)]
    pub window_w: Option<usize>,
    /// Threshold percentile (nearest-rank) over the reference samples.
    #[arg(long)]
    pub percentile: Option<f64>,
    /// Coarse moving-median window in samples.
    #[arg(long)]
    pub coarse_window: Option<usize>,
    /// Minimum phase duration in ms; shorter detections merge or drop.
    #[arg(long)]
    pub min_phase_ms: Option<f64>,
    /// Metadata-spike upper bound in ms.
    #[arg(long)]
    pub spike_max_ms: Option<f64>,
    /// Absolute detection threshold in amperes (bypasses the percentile).
    #[arg(long)]
    pub threshold_a: Option<f64>,
    /// Calibration window start (sample index) for the percentile reference.
    #[arg(long, requires = "calibration_end")]
    pub calibration_start: Option<usize>,
    /// Calibration window end (exclusive sample index).
    #[arg(long, requires = "calibration_start")]
    pub calibration_end: Option<usize>,
    /// Declared sample rate in Hz; inferred from timestamps when absent.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Supply voltage override in volts.
    #[arg(long)]
    pub voltage: Option<f64>,
    /// Timestamp column name.
    #[arg(long, default_value = "timestamp_s")]
    pub time_col: String,
    /// Current column name.
    #[arg(long, default_value = "current_a")]
    pub current_col: String,
    /// Voltage column name.
    #[arg(long, default_value = "voltage_v")]
    pub voltage_col: String,
}

#[derive(Debug, Args)]
pub struct LifetimeArgs {
    /// Connected-state energy per transmission event, joules.
    #[arg(long)]
    pub e_con_j: Option<f64>,
    /// eDRX energy per interval, joules.
    #[arg(long, default_value_t = 0.0)]
    pub e_edrx_j: f64,
    /// Deep-sleep power, microwatts.
    #[arg(long, default_value_t = 0.0)]
    pub p_psm_uw: f64,
    /// Transmission interval with unit suffix, e.g. "4h".
    #[arg(long)]
    pub t_ti: Option<String>,
    /// TAU period for uplink-free scenarios, e.g. "7 days" as "168h".
    #[arg(long)]
    pub t_tau: Option<String>,
    /// Battery capacity in joules (default 18000 J = 5 Wh).
    #[arg(long, conflicts_with = "battery_wh")]
    pub battery_j: Option<f64>,
    /// Battery capacity in watt-hours.
    #[arg(long)]
    pub battery_wh: Option<f64>,
    /// Read LifetimeInputs from a JSON file instead of flags.
    #[arg(long)]
    pub inputs: Option<PathBuf>,
    /// Write the bundled reference lifetime matrix as CSV and exit.
    #[arg(long, value_name = "CSV")]
    pub reproduce_table8: Option<PathBuf>,
    /// Write the report JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RadioArgs {
    #[command(subcommand)]
    pub cmd: RadioCmd,
}

#[derive(Debug, Subcommand)]
pub enum RadioCmd {
    /// SNR (or SINR, when interference is set) from an RSRP reading.
    SnrMap {
        /// RSRP in cBm.
        #[arg(long, allow_negative_numbers = true)]
        rsrp: i32,
        /// Thermal noise density in cBm/Hz.
        #[arg(long, default_value_t = -1740, allow_negative_numbers = true)]
        thermal_cbm_per_hz: i32,
        /// Receiver noise figure in cB.
        #[arg(long, default_value_t = 70, allow_negative_numbers = true)]
        nf_cb: i32,
        /// Subcarrier bandwidth in Hz.
        #[arg(long, default_value_t = 15000.0)]
        bandwidth_hz: f64,
        /// Total channel interference in cBm; switches to the SINR formula.
        #[arg(long, allow_negative_numbers = true)]
        interference_cbm: Option<i32>,
        /// Emit JSON instead of plain text.
        #[arg(long)]
        json: bool,
    },
    /// Coverage enhancement level for an RSRP reading.
    Ecl {
        /// RSRP in cBm.
        #[arg(long, allow_negative_numbers = true)]
        rsrp: i32,
        /// RSRP threshold below which ECL 1 applies (estimated default).
        #[arg(long, default_value_t = -1000, allow_negative_numbers = true)]
        thr1: i32,
        /// RSRP threshold below which ECL 2 applies (estimated default).
        #[arg(long, default_value_t = -1150, allow_negative_numbers = true)]
        thr2: i32,
        #[arg(long)]
        json: bool,
    },
    /// The (ECL, TX power) sequence of a random-access procedure.
    Rach {
        /// Attempts until the procedure succeeds.
        #[arg(long)]
        attempts: u32,
        /// Open-loop initial TX power in cBm (multiple of 10).
        #[arg(long, allow_negative_numbers = true)]
        p0: i32,
        /// Initial RSRP in cBm (selects the starting ECL).
        #[arg(long, default_value_t = -700, allow_negative_numbers = true)]
        rsrp: i32,
        /// Preamble attempts allowed per ECL.
        #[arg(long, default_value_t = 5)]
        max_per_ecl: u32,
        #[arg(long)]
        json: bool,
    },
}
