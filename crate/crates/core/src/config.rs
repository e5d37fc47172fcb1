//! JSON configuration: ordinary-frequency (`_hz`) keys converted to angular
//! units at parse time, optional pump blocks that override the effective
//! couplings, and filter settings.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::TWO_PI;
use crate::filters::{FilterPair, FilterSpec};
use crate::params::{pump_to_coupling, PumpSpec, Severity, SystemParams, Violation};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Malformed {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid parameters: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Params(#[from] crate::params::ParamsError),
    #[error(transparent)]
    Filter(#[from] crate::filters::FilterError),
}

/// Pump block; when present it overrides the corresponding coupling via
/// the pump-to-coupling conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpConfig {
    pub power_w: f64,
    pub omega_p_hz: f64,
    pub g_hz: f64,
    pub kappa_drive_hz: f64,
}

impl PumpConfig {
    fn to_spec(self) -> PumpSpec {
        PumpSpec {
            power: self.power_w,
            omega_p: TWO_PI * self.omega_p_hz,
            g0: TWO_PI * self.g_hz,
            kappa_drive: TWO_PI * self.kappa_drive_hz,
        }
    }
}

/// On-disk configuration. Every key is optional; omitted keys fall back to
/// the baseline operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "d_omega_m")]
    pub omega_m_hz: f64,
    #[serde(default = "d_omega_a2")]
    pub omega_a2_hz: f64,
    #[serde(default = "d_omega_b1")]
    pub omega_b1_hz: f64,
    #[serde(default = "d_kappa_m")]
    pub kappa_m_hz: f64,
    #[serde(default = "d_kappa_opt")]
    pub kappa_a2_hz: f64,
    #[serde(default = "d_kappa_opt")]
    pub kappa_b1_hz: f64,
    #[serde(rename = "G_a_hz", default = "d_g_a")]
    pub g_a_hz: f64,
    #[serde(rename = "G_b_hz", default = "d_g_b")]
    pub g_b_hz: f64,
    #[serde(rename = "T_kelvin", default = "d_temperature")]
    pub temperature_kelvin: f64,
    #[serde(default = "d_tau")]
    pub filter_tau_s: f64,
    #[serde(default)]
    pub filter_detuning_a2_hz: f64,
    #[serde(default)]
    pub filter_detuning_b1_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_a: Option<PumpConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_b: Option<PumpConfig>,
}

fn d_omega_m() -> f64 {
    6.8e9
}
fn d_omega_a2() -> f64 {
    1.930679e14
}
fn d_omega_b1() -> f64 {
    1.931232e14
}
fn d_kappa_m() -> f64 {
    1.0e6
}
fn d_kappa_opt() -> f64 {
    1.0e8
}
fn d_g_a() -> f64 {
    1.0e7
}
fn d_g_b() -> f64 {
    6.5e6
}
fn d_temperature() -> f64 {
    0.1
}
fn d_tau() -> f64 {
    1.0e-6
}

impl Default for Config {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty object fills every default")
    }
}

/// Fully resolved configuration: parameters in angular units, filters, and
/// any non-fatal warnings collected along the way.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: SystemParams,
    pub filters: FilterPair,
    pub warnings: Vec<Violation>,
}

impl Config {
    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn from_json(text: &str, path: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Malformed {
            path: path.to_owned(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Apply a `key=value` override (same keys as the file, dotted for pump
    /// blocks: `pump_a.power_w=0.5`).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let mut doc = serde_json::to_value(&*self).expect("config serializes");
        let mut parsed = Some(
            serde_json::from_str(value).unwrap_or(serde_json::Value::String(value.to_owned())),
        );
        let parts: Vec<&str> = key.split('.').collect();
        let mut slot = &mut doc;
        for (i, part) in parts.iter().enumerate() {
            let obj = slot.as_object_mut().ok_or_else(|| ConfigError::Malformed {
                path: format!("<override {key}>"),
                line: 0,
                column: 0,
                message: format!("'{part}' does not address an object"),
            })?;
            let entry = obj
                .entry(part.to_string())
                .or_insert(serde_json::Value::Null);
            if i + 1 == parts.len() {
                *entry = parsed.take().expect("value consumed once");
                break;
            }
            if entry.is_null() {
                *entry = serde_json::Value::Object(Default::default());
            }
            slot = entry;
        }
        *self = serde_json::from_value(doc).map_err(|e| ConfigError::Malformed {
            path: format!("<override {key}>"),
            line: 0,
            column: 0,
            message: e.to_string(),
        })?;
        Ok(())
    }

    /// Convert to angular units, resolve pump blocks into couplings, and
    /// validate. Error-severity violations abort; warnings are returned.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let mut params = SystemParams {
            omega_m: TWO_PI * self.omega_m_hz,
            omega_a2: TWO_PI * self.omega_a2_hz,
            omega_b1: TWO_PI * self.omega_b1_hz,
            kappa_m: TWO_PI * self.kappa_m_hz,
            kappa_a2: TWO_PI * self.kappa_a2_hz,
            kappa_b1: TWO_PI * self.kappa_b1_hz,
            kappa_a1: TWO_PI * self.kappa_a2_hz,
            kappa_b2: TWO_PI * self.kappa_b1_hz,
            g_a: TWO_PI * self.g_a_hz,
            g_b: TWO_PI * self.g_b_hz,
            temperature: self.temperature_kelvin,
        };
        if let Some(pump) = self.pump_a {
            let spec = pump.to_spec();
            spec.validate()?;
            params.kappa_a1 = spec.kappa_drive;
            params.g_a = pump_to_coupling(&spec);
        }
        if let Some(pump) = self.pump_b {
            let spec = pump.to_spec();
            spec.validate()?;
            params.kappa_b2 = spec.kappa_drive;
            params.g_b = pump_to_coupling(&spec);
        }
        let violations = params.validate();
        let (errors, warnings): (Vec<_>, Vec<_>) = violations
            .into_iter()
            .partition(|v| v.severity == Severity::Error);
        if !errors.is_empty() {
            return Err(ConfigError::Invalid(errors));
        }
        let filters = FilterPair {
            a2: FilterSpec::square(TWO_PI * self.filter_detuning_a2_hz, self.filter_tau_s)?,
            b1: FilterSpec::square(TWO_PI * self.filter_detuning_b1_hz, self.filter_tau_s)?,
        };
        Ok(Resolved {
            params,
            filters,
            warnings,
        })
    }
}
