//! Scenario configuration and validation.
//!
//! [`ScenarioConfig`] is the flat, human-editable parameter set (it maps one
//! to one onto a TOML document). [`ScenarioConfig::validate`] checks every
//! invariant and produces a [`Scenario`], which carries the derived
//! quantities the simulator actually consumes (arrival rate, power levels in
//! watts, noise power, feature dimension).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Action-selection strategy of every subnetwork in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// Learned allocation minimizing violation risk minus an exploration bonus.
    Proposed,
    /// The learned allocation with the exploration weight forced to zero.
    Greedy,
    /// Uniform random allocation without learning.
    Default,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::Default, PolicyKind::Greedy, PolicyKind::Proposed];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Proposed => "proposed",
            PolicyKind::Greedy => "greedy",
            PolicyKind::Default => "default",
        }
    }

    /// Whether the policy fits a learner and records predictions.
    pub fn is_learning(self) -> bool {
        !matches!(self, PolicyKind::Default)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "proposed" => Ok(PolicyKind::Proposed),
            "greedy" => Ok(PolicyKind::Greedy),
            "default" | "random" => Ok(PolicyKind::Default),
            other => Err(format!("unknown policy `{other}` (expected proposed, greedy or default)")),
        }
    }
}

/// Order in which queued packets are served.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ServiceOrder {
    Fifo,
    Lifo,
}

/// Shape of the feasible power-allocation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionSetKind {
    /// Silence plus one action per (RB, non-zero level) pair.
    SingleRb,
    /// Every vector in the (K+1)^B product of per-RB levels.
    FullProduct,
}

/// Unit in which the learner regresses AoI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetUnit {
    Seconds,
    /// Multiples of the slot duration.
    Slots,
}

/// Every tunable of a simulation. Field names are the configuration-file keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Side of the square deployment area (m).
    pub area_side_m: f64,
    pub num_subnetworks: usize,
    /// Radius of a subnetwork's circular coverage (m).
    pub subnetwork_radius_m: f64,
    /// Minimum sensor to AP distance (m).
    pub min_sensor_distance_m: f64,
    /// Constant subnetwork speed (m/s).
    pub speed_mps: f64,
    /// Center-to-center distance below which a subnetwork changes direction (m).
    pub proximity_threshold_m: f64,
    pub num_rbs: usize,
    /// Bandwidth of one resource block (Hz).
    pub rb_bandwidth_hz: f64,
    pub packet_size_bits: f64,
    /// Number of power levels including zero (K + 1).
    pub num_power_levels: usize,
    /// Maximum transmit power per RB (dBm).
    pub max_power_dbm: f64,
    /// Noise power spectral density (dBm/Hz).
    pub noise_psd_dbm_hz: f64,
    /// Slot duration (s).
    pub slot_duration_s: f64,
    /// AoI threshold (s).
    pub aoi_threshold_s: f64,
    /// Sensor sampling rate (bit/s).
    pub sampling_rate_bps: f64,
    pub carrier_freq_ghz: f64,
    /// Rician K-factor, linear unless `rician_k_in_db` is set.
    pub rician_k: f64,
    pub rician_k_in_db: bool,
    /// Standard deviation of the log-normal shadowing (dB).
    pub shadow_std_db: f64,
    pub path_loss_intercept_db: f64,
    pub path_loss_distance_slope: f64,
    pub path_loss_frequency_slope: f64,
    /// Sliding-window size of each learner.
    pub window_size: usize,
    /// Prior precision of the regression weights.
    pub ridge_lambda: f64,
    pub learner_target: TargetUnit,
    pub alpha_c: f64,
    pub alpha_i: f64,
    /// Slots at the start of each run with random allocation, excluded from metrics.
    pub warmup_slots: usize,
    /// Slots per run.
    pub horizon_slots: usize,
    pub num_runs: usize,
    pub seed: u64,
    pub policy: PolicyKind,
    pub service_order: ServiceOrder,
    pub action_set: ActionSetKind,
    /// CCDF grid: thresholds at multiples of the slot duration up to this many slots.
    pub ccdf_max_slots: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            area_side_m: 20.0,
            num_subnetworks: 20,
            subnetwork_radius_m: 2.0,
            min_sensor_distance_m: 1.0,
            speed_mps: 2.0,
            proximity_threshold_m: 1.5,
            num_rbs: 5,
            rb_bandwidth_hz: 10e6,
            packet_size_bits: 800.0,
            num_power_levels: 3,
            max_power_dbm: 10.0,
            noise_psd_dbm_hz: -174.0,
            slot_duration_s: 0.003,
            aoi_threshold_s: 0.010,
            sampling_rate_bps: 1e6,
            carrier_freq_ghz: 6.0,
            rician_k: 7.0,
            rician_k_in_db: false,
            shadow_std_db: 7.0,
            path_loss_intercept_db: 31.84,
            path_loss_distance_slope: 21.5,
            path_loss_frequency_slope: 19.0,
            window_size: 300,
            ridge_lambda: 1.0,
            learner_target: TargetUnit::Slots,
            alpha_c: 1.0,
            alpha_i: 10.0,
            warmup_slots: 50,
            horizon_slots: 20_000,
            num_runs: 5,
            seed: 1,
            policy: PolicyKind::Proposed,
            service_order: ServiceOrder::Fifo,
            action_set: ActionSetKind::SingleRb,
            ccdf_max_slots: 50,
        }
    }
}

/// One violated configuration invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{field}: {message}")]
pub struct FieldError {
    pub field: &'static str,
    pub message: String,
}

/// All invariant violations found in a configuration.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ConfigErrors(pub Vec<FieldError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration:")?;
        for e in &self.0 {
            write!(f, "\n  - {e}")?;
        }
        Ok(())
    }
}

impl ConfigErrors {
    pub fn fields(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.0.iter().map(|e| e.field)
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse configuration: {0}")]
    Parse(#[from] toml::de::Error),
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, LoadError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration is always representable as TOML")
    }

    /// Checks every invariant and fills in the derived quantities.
    pub fn validate(self) -> Result<Scenario, ConfigErrors> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, field: &'static str, message: &str| {
            if !ok {
                errs.push(FieldError { field, message: message.to_string() });
            }
        };
        let c = &self;
        check(c.num_subnetworks >= 1, "num_subnetworks", "N >= 1");
        check(c.num_rbs >= 1, "num_rbs", "B >= 1");
        check(c.num_power_levels >= 2, "num_power_levels", "K_plus_1 >= 2");
        check(pos(c.slot_duration_s), "slot_duration_s", "tau > 0");
        check(pos(c.aoi_threshold_s), "aoi_threshold_s", "delta > 0");
        check(pos(c.packet_size_bits), "packet_size_bits", "L > 0");
        check(pos(c.rb_bandwidth_hz), "rb_bandwidth_hz", "W > 0");
        check(c.window_size >= 1, "window_size", "M >= 1");
        check(
            c.min_sensor_distance_m.is_finite()
                && c.min_sensor_distance_m >= 0.0
                && c.min_sensor_distance_m <= c.subnetwork_radius_m,
            "min_sensor_distance_m",
            "d_min <= R_sub",
        );
        check(
            pos(c.subnetwork_radius_m) && 2.0 * c.subnetwork_radius_m <= c.area_side_m,
            "subnetwork_radius_m",
            "2 R_sub <= area_side_m",
        );
        check(c.alpha_c.is_finite() && c.alpha_c >= 0.0, "alpha_c", "alpha_c >= 0");
        check(c.alpha_i.is_finite() && c.alpha_i >= 0.0, "alpha_i", "alpha_i >= 0");
        check(pos(c.ridge_lambda), "ridge_lambda", "lambda > 0");
        check(c.speed_mps.is_finite() && c.speed_mps >= 0.0, "speed_mps", "v >= 0");
        check(
            c.proximity_threshold_m.is_finite() && c.proximity_threshold_m >= 0.0,
            "proximity_threshold_m",
            "proximity threshold >= 0",
        );
        check(
            c.sampling_rate_bps.is_finite() && c.sampling_rate_bps >= 0.0,
            "sampling_rate_bps",
            "sampling rate >= 0",
        );
        check(pos(c.carrier_freq_ghz), "carrier_freq_ghz", "f_c > 0");
        check(
            c.rician_k.is_finite() && (c.rician_k_in_db || c.rician_k >= 0.0),
            "rician_k",
            "K >= 0",
        );
        check(
            c.shadow_std_db.is_finite() && c.shadow_std_db >= 0.0,
            "shadow_std_db",
            "shadowing std >= 0",
        );
        check(c.max_power_dbm.is_finite(), "max_power_dbm", "finite");
        check(c.noise_psd_dbm_hz.is_finite(), "noise_psd_dbm_hz", "finite");
        check(c.horizon_slots >= 1, "horizon_slots", "T >= 1");
        check(c.num_runs >= 1, "num_runs", "at least one run");
        check(c.ccdf_max_slots >= 1, "ccdf_max_slots", "at least one CCDF point");
        if c.action_set == ActionSetKind::FullProduct {
            let size = (c.num_power_levels as f64).powi(c.num_rbs as i32);
            check(size <= 65_536.0, "action_set", "full product action set too large");
        }
        if !errs.is_empty() {
            return Err(ConfigErrors(errs));
        }
        Ok(Scenario::derive(self))
    }
}

fn pos(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// A validated configuration plus its derived quantities. Immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub cfg: ScenarioConfig,
    /// Packets generated per slot (may be fractional).
    pub arrival_rate: f64,
    /// Power levels {0, p/K, ..., p} in watts.
    pub power_levels_w: Vec<f64>,
    pub max_power_w: f64,
    /// Noise power over one RB (W).
    pub noise_power_w: f64,
    /// Linear Rician K-factor.
    pub rician_k_linear: f64,
    /// Dimension of the raw learner input: AoI plus one power per RB.
    pub raw_dim: usize,
    /// Dimension of the transformed feature vector.
    pub feature_dim: usize,
    /// Lower bound on the learner's noise variance (s^2).
    pub sigma2_floor: f64,
}

impl Scenario {
    fn derive(cfg: ScenarioConfig) -> Self {
        let k = (cfg.num_power_levels - 1) as f64;
        let max_power_w = dbm_to_watts(cfg.max_power_dbm);
        let power_levels_w = (0..cfg.num_power_levels).map(|i| max_power_w * i as f64 / k).collect();
        let raw_dim = cfg.num_rbs + 1;
        let feature_dim = raw_dim + raw_dim * (raw_dim + 1) / 2;
        let rician_k_linear = if cfg.rician_k_in_db {
            10f64.powf(cfg.rician_k / 10.0)
        } else {
            cfg.rician_k
        };
        Self {
            arrival_rate: cfg.sampling_rate_bps * cfg.slot_duration_s / cfg.packet_size_bits,
            power_levels_w,
            max_power_w,
            noise_power_w: dbm_to_watts(cfg.noise_psd_dbm_hz) * cfg.rb_bandwidth_hz,
            rician_k_linear,
            raw_dim,
            feature_dim,
            sigma2_floor: (0.01 * cfg.slot_duration_s).powi(2),
            cfg,
        }
    }

    /// Seconds per learner target unit.
    pub fn target_scale(&self) -> f64 {
        match self.cfg.learner_target {
            TargetUnit::Seconds => 1.0,
            TargetUnit::Slots => self.cfg.slot_duration_s,
        }
    }

    /// Number of non-zero power levels (K).
    pub fn k(&self) -> usize {
        self.cfg.num_power_levels - 1
    }

    /// Lower edge of the region AP centers must stay in.
    pub fn margin_lo(&self) -> f64 {
        self.cfg.subnetwork_radius_m
    }

    pub fn margin_hi(&self) -> f64 {
        self.cfg.area_side_m - self.cfg.subnetwork_radius_m
    }

    /// Distance travelled per slot (m).
    pub fn step_length(&self) -> f64 {
        self.cfg.speed_mps * self.cfg.slot_duration_s
    }

    /// Number of slots of each run that count towards metrics.
    pub fn measured_slots(&self) -> usize {
        self.cfg.horizon_slots.saturating_sub(self.cfg.warmup_slots)
    }
}
