use std::fmt;
use std::path::{Path, PathBuf};

use qcvv_core::gst::{detuning_sweep, ErrorKind, GaugeSchedule, DEFAULT_SPAM_WEIGHT};
use qcvv_core::noise::{NoiseKind, NoiseSpec};
use qcvv_core::qubit::DEFAULT_IDENTITY_IDLE;
use qcvv_core::rb::{KappaMode, NoiseReuse, RbConfig, Shots};
use qcvv_core::rng::{derive_seed, tag};
use qcvv_core::walk::StepWeighting;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::json::sha256_hex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Rb,
    RbLongwalk,
    WalkScan,
    Gst,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rb => "rb",
            Self::RbLongwalk => "rb-longwalk",
            Self::WalkScan => "walk-scan",
            Self::Gst => "gst",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignKind {
    #[default]
    Standard,
    Extended,
}

impl DesignKind {
    pub fn build(self) -> qcvv_core::gst::ExperimentDesign {
        match self {
            Self::Standard => qcvv_core::gst::standard_design(),
            Self::Extended => qcvv_core::gst::extended_design(),
        }
    }
}

impl std::str::FromStr for DesignKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "standard" => Ok(Self::Standard),
            "extended" => Ok(Self::Extended),
            _ => Err(format!("unknown design {s:?} (expected standard or extended)")),
        }
    }
}

fn infinite() -> Shots {
    Shots::Infinite
}

fn default_idle() -> u8 {
    DEFAULT_IDENTITY_IDLE
}

fn zero_kappa() -> KappaMode {
    KappaMode::Fixed(0.0)
}

fn default_multiplier() -> f64 {
    2.0
}

fn default_preselected() -> usize {
    20
}

fn default_attempt_cap() -> usize {
    1_000_000
}

fn unit_weighting() -> StepWeighting {
    StepWeighting::Unit
}

fn both_noises() -> Vec<NoiseKind> {
    vec![NoiseKind::White, NoiseKind::QuasiDc]
}

fn default_spam_weight() -> f64 {
    DEFAULT_SPAM_WEIGHT
}

/// Sequences, noise and decay-fit settings shared by `rb` and `rb-longwalk`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbBlock {
    pub lengths: Vec<usize>,
    pub sequences_per_length: usize,
    pub noise: NoiseKind,
    pub sigma: f64,
    pub realizations: usize,
    #[serde(default = "infinite")]
    pub shots: Shots,
    #[serde(default)]
    pub noise_reuse: NoiseReuse,
    #[serde(default = "default_idle")]
    pub identity_idle: u8,
    #[serde(default = "zero_kappa")]
    pub kappa: KappaMode,
}

impl RbBlock {
    /// Core configuration; the noise stream is split off the master seed.
    pub fn to_rb_config(&self, seed: u64) -> RbConfig {
        RbConfig {
            lengths: self.lengths.clone(),
            sequences_per_length: self.sequences_per_length,
            noise: NoiseSpec {
                kind: self.noise,
                sigma: self.sigma,
                seed: derive_seed(seed, &[tag::NOISE]),
            },
            realizations: self.realizations,
            shots: self.shots,
            seed,
            noise_reuse: self.noise_reuse,
            identity_idle: self.identity_idle,
        }
    }

    fn validate(&self, bad: &mut Vec<String>) {
        bad.extend(self.to_rb_config(0).validate().into_iter().map(|m| format!("rb.{m}")));
        if let KappaMode::Fixed(k) = self.kappa {
            if !(0.0..0.5).contains(&k) {
                bad.push(format!("rb.kappa: fixed value must lie in [0, 0.5), got {k}"));
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LongWalkBlock {
    #[serde(default = "default_multiplier")]
    pub multiplier: f64,
    #[serde(default = "default_preselected")]
    pub preselected: usize,
    #[serde(default = "default_attempt_cap")]
    pub attempt_cap: usize,
}

impl Default for LongWalkBlock {
    fn default() -> Self {
        Self {
            multiplier: default_multiplier(),
            preselected: default_preselected(),
            attempt_cap: default_attempt_cap(),
        }
    }
}

/// One set of sequences simulated under each noise kind at equal RMS.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkScanBlock {
    pub length: usize,
    pub sequences: usize,
    pub sigma: f64,
    pub realizations: usize,
    #[serde(default = "unit_weighting")]
    pub weighting: StepWeighting,
    #[serde(default = "both_noises")]
    pub noise: Vec<NoiseKind>,
    #[serde(default = "infinite")]
    pub shots: Shots,
    #[serde(default = "default_idle")]
    pub identity_idle: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GstBlock {
    #[serde(default)]
    pub design: DesignKind,
    pub model: ErrorKind,
    /// Error magnitudes; empty means the standard detuning sweep.
    #[serde(default)]
    pub magnitudes: Vec<f64>,
    #[serde(default = "infinite")]
    pub shots: Shots,
    #[serde(default)]
    pub gauge: GaugeSchedule,
    #[serde(default = "default_spam_weight")]
    pub spam_weight: f64,
}

impl GstBlock {
    pub fn magnitudes(&self) -> Vec<f64> {
        match (self.magnitudes.is_empty(), self.model) {
            (false, _) => self.magnitudes.clone(),
            (true, ErrorKind::Detuning) => detuning_sweep(),
            (true, _) => vec![0.0],
        }
    }
}

/// Thresholds evaluated by `report`; absent entries are not checked.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Acceptance {
    /// Minimum χ² p-value of the infidelity histogram against the
    /// closed-form gamma distribution (quasi-DC noise).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_gof_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_skewness: Option<f64>,
    /// Allowed `[low, high]` for `p_lw / p_rb`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub longwalk_ratio: Option<[f64; 2]>,
    /// Minimum regression t-statistic under quasi-DC noise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_dc_t_statistic: Option<f64>,
    /// Maximum |t| under white noise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_white_t_statistic: Option<f64>,
    /// Minimum `dd_calc / dd_est` for driven gates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_gauge_suppression: Option<f64>,
}

impl Acceptance {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rb: Option<RbBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub longwalk: Option<LongWalkBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk_scan: Option<WalkScanBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gst: Option<GstBlock>,
    #[serde(default, skip_serializing_if = "Acceptance::is_empty")]
    pub acceptance: Acceptance,
}

fn finite_nonneg(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

impl ExperimentConfig {
    /// Parses and validates, reporting every unknown field and every
    /// failed check at once.
    pub fn from_json_str(text: &str) -> CliResult<Self> {
        let mut value: Value =
            serde_json::from_str(text).map_err(|e| CliError::Validation(vec![format!("not valid JSON: {e}")]))?;
        let mut bad = Vec::new();
        let parsed = loop {
            match serde_path_to_error::deserialize::<_, Self>(&value) {
                Ok(c) => break Some(c),
                Err(e) => {
                    let path = e.path().to_string();
                    let unknown = e.inner().to_string().starts_with("unknown field");
                    if unknown && remove_at(&mut value, &path) {
                        bad.push(format!("{path}: unknown field"));
                    } else {
                        bad.push(format!("{path}: {}", e.inner()));
                        break None;
                    }
                }
            }
        };
        if let Some(c) = &parsed {
            bad.extend(c.validate());
        }
        match parsed {
            Some(c) if bad.is_empty() => Ok(c),
            _ => Err(CliError::Validation(bad)),
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| match e {
            CliError::Validation(v) => {
                CliError::Validation(v.into_iter().map(|m| format!("{}: {m}", path.display())).collect())
            }
            other => other,
        })
    }

    /// Every failed check, as `field: message`.
    pub fn validate(&self) -> Vec<String> {
        let mut bad = Vec::new();
        if self.output_dir.as_os_str().is_empty() {
            bad.push("output_dir: must not be empty".into());
        }
        let needs = |name: &str, present: bool, wanted: bool, bad: &mut Vec<String>| match (present, wanted) {
            (false, true) => bad.push(format!("{name}: required by protocol {}", self.protocol)),
            (true, false) => bad.push(format!("{name}: not used by protocol {}", self.protocol)),
            _ => {}
        };
        let p = self.protocol;
        needs(
            "rb",
            self.rb.is_some(),
            matches!(p, Protocol::Rb | Protocol::RbLongwalk),
            &mut bad,
        );
        needs("walk_scan", self.walk_scan.is_some(), p == Protocol::WalkScan, &mut bad);
        needs("gst", self.gst.is_some(), p == Protocol::Gst, &mut bad);
        if self.longwalk.is_some() && p != Protocol::RbLongwalk {
            bad.push(format!("longwalk: not used by protocol {p}"));
        }

        if let Some(rb) = &self.rb {
            rb.validate(&mut bad);
        }
        if p == Protocol::RbLongwalk {
            let lw = self.longwalk.clone().unwrap_or_default();
            if !(lw.multiplier.is_finite() && lw.multiplier >= 0.0) {
                bad.push(format!(
                    "longwalk.multiplier: must be finite and ≥ 0, got {}",
                    lw.multiplier
                ));
            }
            if lw.preselected == 0 {
                bad.push("longwalk.preselected: must be ≥ 1".into());
            }
            if lw.attempt_cap < lw.preselected {
                bad.push("longwalk.attempt_cap: must be ≥ preselected".into());
            }
        }
        if let Some(w) = &self.walk_scan {
            if w.length < 2 {
                bad.push(format!("walk_scan.length: must be ≥ 2, got {}", w.length));
            }
            if w.sequences < 3 {
                bad.push("walk_scan.sequences: regression needs ≥ 3".into());
            }
            if !finite_nonneg(w.sigma) {
                bad.push("walk_scan.sigma: must be finite and ≥ 0".into());
            }
            if w.realizations == 0 {
                bad.push("walk_scan.realizations: must be ≥ 1".into());
            }
            if w.noise.is_empty() {
                bad.push("walk_scan.noise: must name at least one noise kind".into());
            }
            if w.shots == Shots::Finite(0) {
                bad.push("walk_scan.shots: must be ≥ 1".into());
            }
            if w.identity_idle == 0 {
                bad.push("walk_scan.identity_idle: must be ≥ 1".into());
            }
        }
        if let Some(g) = &self.gst {
            if let Some(m) = g.magnitudes.iter().find(|m| !(m.is_finite() && m.abs() < 0.5)) {
                bad.push(format!("gst.magnitudes: every value must satisfy |x| < 0.5, got {m}"));
            }
            if g.shots == Shots::Finite(0) {
                bad.push("gst.shots: must be ≥ 1".into());
            }
            if !finite_nonneg(g.spam_weight) {
                bad.push("gst.spam_weight: must be finite and ≥ 0".into());
            }
        }
        let a = &self.acceptance;
        if let Some(alpha) = a.gamma_gof_alpha.filter(|x| !(0.0..1.0).contains(x)) {
            bad.push(format!("acceptance.gamma_gof_alpha: must lie in [0, 1), got {alpha}"));
        }
        if let Some([lo, hi]) = a
            .longwalk_ratio
            .filter(|[lo, hi]| lo.partial_cmp(hi).map_or(true, |o| o.is_gt()))
        {
            bad.push(format!("acceptance.longwalk_ratio: low {lo} exceeds high {hi}"));
        }
        bad
    }

    /// SHA-256 of the canonical JSON of every field that affects results.
    /// `output_dir` is excluded; object keys are sorted and numbers use
    /// their shortest round-trip form.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(m) = &mut v {
            m.remove("output_dir");
        }
        sha256_hex(serde_json::to_string(&v).expect("value serializes").as_bytes())
    }
}

/// Removes the key at a dotted path such as `rb.foo`.
fn remove_at(value: &mut Value, path: &str) -> bool {
    let mut parts: Vec<&str> = path.split('.').collect();
    let Some(last) = parts.pop() else {
        return false;
    };
    let mut cur = value;
    for p in parts {
        cur = match cur.get_mut(p) {
            Some(next) => next,
            None => return false,
        };
    }
    cur.as_object_mut().and_then(|m| m.remove(last)).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL_RB: &str = r#"{
        "protocol": "rb", "seed": 1, "output_dir": "out",
        "rb": {"lengths": [2, 4, 8], "sequences_per_length": 3, "noise": "quasi-dc",
               "sigma": 0.0, "realizations": 1}
    }"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = ExperimentConfig::from_json_str(MINIMAL_RB).unwrap();
        let rb = c.rb.unwrap();
        assert_eq!(rb.shots, Shots::Infinite);
        assert_eq!(rb.kappa, KappaMode::Fixed(0.0));
        assert_eq!(rb.identity_idle, 2);
    }

    #[test]
    fn round_trips_through_json() {
        let c = ExperimentConfig::from_json_str(MINIMAL_RB).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json_str(&text).unwrap(), c);
    }

    #[test]
    fn every_unknown_field_is_listed() {
        let text = MINIMAL_RB
            .replace("\"seed\": 1,", "\"seed\": 1, \"colour\": 3,")
            .replace("\"realizations\": 1", "\"realizations\": 1, \"shotz\": 5");
        let Err(CliError::Validation(msgs)) = ExperimentConfig::from_json_str(&text) else {
            panic!("expected validation failure");
        };
        assert!(msgs.iter().any(|m| m.starts_with("colour")), "{msgs:?}");
        assert!(msgs.iter().any(|m| m.starts_with("rb.shotz")), "{msgs:?}");
    }

    #[test]
    fn every_failed_check_is_listed() {
        let text = MINIMAL_RB
            .replace("\"sequences_per_length\": 3", "\"sequences_per_length\": 0")
            .replace("\"sigma\": 0.0", "\"sigma\": -1.0");
        let Err(CliError::Validation(msgs)) = ExperimentConfig::from_json_str(&text) else {
            panic!("expected validation failure");
        };
        assert!(msgs.iter().any(|m| m.contains("sequences_per_length")), "{msgs:?}");
        assert!(msgs.iter().any(|m| m.contains("sigma")), "{msgs:?}");
    }

    #[test]
    fn protocol_blocks_must_match() {
        let text = MINIMAL_RB.replace("\"protocol\": \"rb\"", "\"protocol\": \"gst\"");
        let Err(CliError::Validation(msgs)) = ExperimentConfig::from_json_str(&text) else {
            panic!("expected validation failure");
        };
        assert!(msgs.iter().any(|m| m.starts_with("rb: not used")), "{msgs:?}");
        assert!(msgs.iter().any(|m| m.starts_with("gst: required")), "{msgs:?}");
    }

    #[test]
    fn hash_tracks_semantic_fields_only() {
        let a = ExperimentConfig::from_json_str(MINIMAL_RB).unwrap();
        let mut b = a.clone();
        b.output_dir = "elsewhere".into();
        assert_eq!(a.hash(), b.hash());
        let explicit = MINIMAL_RB.replace("\"realizations\": 1", "\"realizations\": 1, \"shots\": \"infinite\"");
        assert_eq!(a.hash(), ExperimentConfig::from_json_str(&explicit).unwrap().hash());
        let mut c = a.clone();
        c.seed = 2;
        assert_ne!(a.hash(), c.hash());
        let mut d = a.clone();
        d.rb.as_mut().unwrap().sigma = 1e-3;
        assert_ne!(a.hash(), d.hash());
    }

    #[test]
    fn empty_gst_magnitudes_mean_the_detuning_sweep() {
        let g = GstBlock {
            design: DesignKind::Standard,
            model: ErrorKind::Detuning,
            magnitudes: vec![],
            shots: Shots::Infinite,
            gauge: GaugeSchedule::default(),
            spam_weight: DEFAULT_SPAM_WEIGHT,
        };
        assert_eq!(g.magnitudes(), detuning_sweep());
    }
}
