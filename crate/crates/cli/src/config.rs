//! TOML experiment configuration.
//!
//! ```toml
//! [chain]
//! pattern = "ABC"        # unit kinds, little-endian basis order
//! j = 1.0                # rad/ps
//! omega0 = 0.0           # uniform Zeeman splitting
//! omega1 = { A = 1000.0 } # optional per-kind optical energies
//! crosstalk = false
//!
//! [decoherence]          # optional
//! tau_x = 8.8858         # ps, or tau_x_per_rabi = 0.1 for τ_X = 0.1/Ω
//! decay_target = 0
//!
//! [pulses]               # every field optional
//! raman_rabi = 10.0
//! raman_detuning = 50.0
//! z_rabi = 10.0
//! passivation_rabi = 100.0
//!
//! [experiment]
//! name = "cnot-demo"     # cnot-demo | purity-sweep | crosstalk-demo | circuit
//! initial = ["00", "01"]
//! sample_dt = 0.05
//! output = "out/cnot"
//!
//! [sweep]                # optional, used by `spinchain sweep`
//! fields = { "pulses.raman_detuning" = [50.0, 100.0] }
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spinchain::pulses::{PulseParams, ZProtocol};
use spinchain::trion::CrosstalkParams;
use spinchain::{ChainConfig, UnitKind, UnitSpec};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub chain: ChainSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoherence: Option<DecoherenceSection>,
    #[serde(default)]
    pub pulses: PulsesSection,
    pub experiment: ExperimentSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceptance: Option<AcceptanceSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub pattern: String,
    pub j: f64,
    #[serde(default)]
    pub omega0: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub omega1: BTreeMap<String, f64>,
    #[serde(default)]
    pub crosstalk: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_x_per_rabi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_target: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_to_zero: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ZMode {
    #[default]
    TwoPulse,
    DetunedCycles,
}

fn d_raman_rabi() -> f64 {
    10.0
}
fn d_raman_detuning() -> f64 {
    50.0
}
fn d_z_rabi() -> f64 {
    10.0
}
fn d_passivation() -> f64 {
    100.0
}
fn d_detuned_detuning() -> f64 {
    100.0
}
fn d_trion_omega() -> f64 {
    5.0
}
fn d_theta() -> f64 {
    26.0
}
fn d_delta() -> f64 {
    100.0
}
fn d_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulsesSection {
    #[serde(default = "d_raman_rabi")]
    pub raman_rabi: f64,
    #[serde(default = "d_raman_detuning")]
    pub raman_detuning: f64,
    #[serde(default = "d_z_rabi")]
    pub z_rabi: f64,
    #[serde(default = "d_passivation")]
    pub passivation_rabi: f64,
    #[serde(default)]
    pub z_protocol: ZMode,
    #[serde(default = "d_z_rabi")]
    pub detuned_rabi: f64,
    #[serde(default = "d_detuned_detuning")]
    pub detuned_detuning: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(default = "d_true")]
    pub window_phase_correction: bool,
    #[serde(default = "d_trion_omega")]
    pub trion_omega: f64,
    #[serde(default = "d_theta")]
    pub trion_theta_deg: f64,
    #[serde(default = "d_delta")]
    pub delta_a: f64,
    #[serde(default = "d_delta")]
    pub delta_c: f64,
    #[serde(default = "d_trion_omega")]
    pub omega_prime: f64,
}

impl Default for PulsesSection {
    fn default() -> Self {
        toml::from_str("").expect("all fields defaulted")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    CnotDemo,
    PuritySweep,
    CrosstalkDemo,
    Circuit,
}

fn d_sample_dt() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: ExperimentName,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub initial: Vec<String>,
    #[serde(default = "d_sample_dt")]
    pub sample_dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub fields: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_j: Option<f64>,
}

fn positive(field: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::config(format!("{field}: {v} must be a positive number")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        positive("chain.j", self.chain.j)?;
        if !self.chain.omega0.is_finite() {
            return Err(CliError::config("chain.omega0: must be finite"));
        }
        let kinds = self.kinds()?;
        for (key, &w) in &self.chain.omega1 {
            let kind = parse_kind(key).map_err(|r| CliError::config(format!("chain.omega1.{key}: {r}")))?;
            if !kinds.contains(&kind) {
                return Err(CliError::config(format!("chain.omega1.{key}: kind not present in pattern")));
            }
            positive(&format!("chain.omega1.{key}"), w)?;
        }
        if let Some(d) = &self.decoherence {
            if let Some(t) = d.tau_x {
                positive("decoherence.tau_x", t)?;
            }
            if let Some(t) = d.tau_x_per_rabi {
                positive("decoherence.tau_x_per_rabi", t)?;
            }
            if d.tau_x.is_some() && d.tau_x_per_rabi.is_some() {
                return Err(CliError::config("decoherence: give tau_x or tau_x_per_rabi, not both"));
            }
            if let Some(t) = d.decay_target {
                if t > 1 {
                    return Err(CliError::config("decoherence.decay_target: must be 0 or 1"));
                }
            }
            if let Some(b) = d.branch_to_zero {
                if !(0.0..=1.0).contains(&b) {
                    return Err(CliError::config("decoherence.branch_to_zero: outside [0, 1]"));
                }
                if d.decay_target.is_some() {
                    return Err(CliError::config("decoherence: give decay_target or branch_to_zero, not both"));
                }
            }
        }
        let p = &self.pulses;
        for (name, v) in [
            ("pulses.raman_rabi", p.raman_rabi),
            ("pulses.raman_detuning", p.raman_detuning),
            ("pulses.z_rabi", p.z_rabi),
            ("pulses.passivation_rabi", p.passivation_rabi),
            ("pulses.detuned_rabi", p.detuned_rabi),
            ("pulses.detuned_detuning", p.detuned_detuning),
            ("pulses.trion_omega", p.trion_omega),
            ("pulses.delta_a", p.delta_a),
            ("pulses.delta_c", p.delta_c),
            ("pulses.omega_prime", p.omega_prime),
        ] {
            positive(name, v)?;
        }
        if let Some(w) = p.window {
            positive("pulses.window", w)?;
        }
        if !(0.0..=90.0).contains(&p.trion_theta_deg) {
            return Err(CliError::config("pulses.trion_theta_deg: outside [0, 90]"));
        }
        positive("experiment.sample_dt", self.experiment.sample_dt)?;
        for &a in &self.experiment.alphas {
            if !(a > 0.0 && a <= 0.5) {
                return Err(CliError::config(format!("experiment.alphas: {a} outside (0, 0.5]")));
            }
        }
        if let Some(s) = &self.sweep {
            for (k, v) in &s.fields {
                if v.is_empty() {
                    return Err(CliError::config(format!("sweep.fields.{k}: empty value list")));
                }
            }
        }
        if let Some(t) = self.acceptance.as_ref().and_then(|a| a.timing_j) {
            positive("acceptance.timing_j", t)?;
        }
        self.chain_config().map(|_| ())
    }

    pub fn kinds(&self) -> CliResult<Vec<UnitKind>> {
        self.chain
            .pattern
            .chars()
            .map(|c| UnitKind::from_char(c).ok_or_else(|| CliError::config(format!("chain.pattern: unknown unit kind {c:?}"))))
            .collect()
    }

    pub fn chain_config(&self) -> CliResult<ChainConfig> {
        let kinds = self.kinds()?;
        let omega1: BTreeMap<UnitKind, f64> =
            self.chain.omega1.iter().filter_map(|(k, &w)| parse_kind(k).ok().map(|k| (k, w))).collect();
        let units = kinds
            .iter()
            .map(|&k| match omega1.get(&k) {
                Some(&w) => UnitSpec::new(k, self.chain.omega0, w),
                None => UnitSpec::with_defaults(k, self.chain.omega0),
            })
            .collect();
        let mut cfg = ChainConfig::new(units, self.chain.j).map_err(|e| CliError::config(format!("chain: {e}")))?;
        if let Some(t) = self.decoherence.as_ref().and_then(|d| d.tau_x) {
            cfg = cfg.with_tau_x(t).map_err(|e| CliError::config(format!("decoherence: {e}")))?;
        }
        Ok(cfg.with_crosstalk(self.chain.crosstalk))
    }

    pub fn pulse_params(&self) -> PulseParams {
        let p = &self.pulses;
        PulseParams {
            raman_rabi: p.raman_rabi,
            raman_detuning: p.raman_detuning,
            z_rabi: p.z_rabi,
            passivation_rabi: p.passivation_rabi,
            z_protocol: match p.z_protocol {
                ZMode::TwoPulse => ZProtocol::TwoPulse,
                ZMode::DetunedCycles => ZProtocol::DetunedCycles { rabi: p.detuned_rabi, detuning: p.detuned_detuning },
            },
            window: p.window,
            window_phase_correction: p.window_phase_correction,
        }
    }

    pub fn crosstalk_params(&self) -> CrosstalkParams {
        let p = &self.pulses;
        CrosstalkParams {
            omega: p.trion_omega,
            theta: p.trion_theta_deg.to_radians(),
            delta_target: p.delta_a,
            delta_other: p.delta_c,
            omega_prime: p.omega_prime,
        }
    }

    /// τ_X for a drive of Rabi frequency `rabi`; infinite without decay.
    pub fn tau_x_for(&self, rabi: f64) -> f64 {
        match &self.decoherence {
            Some(DecoherenceSection { tau_x: Some(t), .. }) => *t,
            Some(DecoherenceSection { tau_x_per_rabi: Some(k), .. }) => k / rabi,
            _ => f64::INFINITY,
        }
    }

    pub fn branch_to_zero(&self) -> f64 {
        match &self.decoherence {
            Some(d) => match (d.decay_target, d.branch_to_zero) {
                (Some(1), _) => 0.0,
                (_, Some(b)) => b,
                _ => 1.0,
            },
            None => 1.0,
        }
    }

    pub fn rotation_angle(&self, default: f64) -> f64 {
        self.experiment.angle.unwrap_or(default)
    }

    /// Sets a dotted numeric field, e.g. `pulses.raman_detuning`.
    pub fn with_field(&self, path: &str, value: f64) -> CliResult<Self> {
        let mut doc = toml::Value::try_from(self).map_err(|e| CliError::config(e.to_string()))?;
        let mut node = &mut doc;
        let parts: Vec<&str> = path.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let table = node
                .as_table_mut()
                .ok_or_else(|| CliError::config(format!("sweep field {path}: {part} is not inside a table")))?;
            if i + 1 == parts.len() {
                table.insert(part.to_string(), toml::Value::Float(value));
                break;
            }
            node = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(Default::default()));
        }
        let cfg: ExperimentConfig =
            doc.try_into().map_err(|e: toml::de::Error| CliError::config(format!("sweep field {path}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_kind(s: &str) -> Result<UnitKind, String> {
    let mut c = s.chars();
    match (c.next().and_then(UnitKind::from_char), c.next()) {
        (Some(k), None) => Ok(k),
        _ => Err(format!("unknown unit kind {s:?}")),
    }
}

pub fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[chain]\npattern = \"ABC\"\nj = 1.0\n[experiment]\nname = \"cnot-demo\"\n";

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.pulses.raman_detuning, 50.0);
        assert_eq!(cfg.experiment.sample_dt, 0.05);
        assert_eq!(cfg.branch_to_zero(), 1.0);
        assert!(cfg.tau_x_for(10.0).is_infinite());
    }

    #[test]
    fn schema_errors_name_the_field() {
        let bad = MINIMAL.replace("j = 1.0", "j = -1.0");
        let e = ExperimentConfig::from_toml(&bad).unwrap_err();
        assert!(e.to_string().contains("chain.j"), "{e}");
        let unknown = format!("{MINIMAL}bogus = 1\n");
        assert!(ExperimentConfig::from_toml(&unknown).unwrap_err().to_string().contains("bogus"));
        let pattern = MINIMAL.replace("ABC", "AC");
        assert!(ExperimentConfig::from_toml(&pattern).is_err());
        let kind = MINIMAL.replace("j = 1.0", "j = 1.0\nomega1 = { D = 5.0 }");
        assert!(ExperimentConfig::from_toml(&kind).unwrap_err().to_string().contains("omega1.D"));
    }

    #[test]
    fn field_override() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let c2 = cfg.with_field("pulses.raman_detuning", 80.0).unwrap();
        assert_eq!(c2.pulses.raman_detuning, 80.0);
        let c3 = cfg.with_field("decoherence.tau_x", 3.0).unwrap();
        assert_eq!(c3.tau_x_for(1.0), 3.0);
        assert!(cfg.with_field("pulses.nope", 1.0).is_err());
        assert!(cfg.with_field("chain.j", -2.0).is_err());
    }
}
