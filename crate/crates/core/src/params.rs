//! Physical parameter model and derived quantities.
//!
//! All frequencies and rates are angular (rad/s); temperatures are kelvin.
//! Configuration files use ordinary frequencies (Hz) under `_hz` keys and
//! are converted by 2*pi at parse time (see [`crate::config`]).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{HBAR, KB};

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error("frequency must be positive, got {0} rad/s")]
    NonPositiveFrequency(f64),
    #[error("temperature must be non-negative, got {0} K")]
    NegativeTemperature(f64),
    #[error("invalid pump specification: {0}")]
    InvalidPump(String),
}

/// All physical inputs of the three-mode model.
///
/// `kappa_*` are half-linewidth decay rates (the field amplitude decays as
/// `exp(-kappa t)`); `g_a`/`g_b` are the pump-enhanced effective
/// optomagnonic coupling rates of the state-swap (`m`-`a2`) and two-mode
/// squeezing (`m`-`b1`) interactions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Magnon angular frequency (rad/s).
    pub omega_m: f64,
    /// Anti-Stokes sideband WGM angular frequency (rad/s).
    pub omega_a2: f64,
    /// Stokes sideband WGM angular frequency (rad/s).
    pub omega_b1: f64,
    /// Magnon decay rate (rad/s).
    pub kappa_m: f64,
    /// Decay rate of WGM a2 (rad/s).
    pub kappa_a2: f64,
    /// Decay rate of WGM b1 (rad/s).
    pub kappa_b1: f64,
    /// Decay rate of the pumped WGM a1 (rad/s); only enters pump conversion.
    pub kappa_a1: f64,
    /// Decay rate of the pumped WGM b2 (rad/s); only enters pump conversion.
    pub kappa_b2: f64,
    /// Effective state-swap coupling G_a (rad/s).
    pub g_a: f64,
    /// Effective two-mode-squeezing coupling G_b (rad/s).
    pub g_b: f64,
    /// Bath temperature (K).
    pub temperature: f64,
}

impl SystemParams {
    /// Operating point used throughout: omega_m/2pi = 6.8 GHz,
    /// omega_a2/2pi = 193067.9 GHz, omega_b1/2pi = 193123.2 GHz,
    /// kappa_m/2pi = 1 MHz, kappa_a2/2pi = kappa_b1/2pi = 100 MHz,
    /// G_a/2pi = 10 MHz, G_b/2pi = 6.5 MHz, T = 0.1 K.
    pub fn baseline() -> Self {
        use crate::constants::TWO_PI;
        Self {
            omega_m: TWO_PI * 6.8e9,
            omega_a2: TWO_PI * 1.930679e14,
            omega_b1: TWO_PI * 1.931232e14,
            kappa_m: TWO_PI * 1.0e6,
            kappa_a2: TWO_PI * 1.0e8,
            kappa_b1: TWO_PI * 1.0e8,
            kappa_a1: TWO_PI * 1.0e8,
            kappa_b2: TWO_PI * 1.0e8,
            g_a: TWO_PI * 1.0e7,
            g_b: TWO_PI * 6.5e6,
            temperature: 0.1,
        }
    }

    /// Frequency of the pumped WGM a1, from triple resonance
    /// (omega_a2 - omega_a1 = omega_m).
    pub fn omega_a1(&self) -> f64 {
        self.omega_a2 - self.omega_m
    }

    /// Frequency of the pumped WGM b2, from triple resonance
    /// (omega_b2 - omega_b1 = omega_m).
    pub fn omega_b2(&self) -> f64 {
        self.omega_b1 + self.omega_m
    }

    /// Check every invariant; returns one entry per violated rule.
    ///
    /// Violations are data, not failures: decay rates and mode frequencies
    /// must be strictly positive, couplings non-negative (zero switches an
    /// interaction off), temperature non-negative. The optical/microwave
    /// scale separation (omega_a2, omega_b1 >> omega_m) is reported as a
    /// warning only.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let positive: [(&str, f64); 8] = [
            ("omega_m", self.omega_m),
            ("omega_a2", self.omega_a2),
            ("omega_b1", self.omega_b1),
            ("kappa_m", self.kappa_m),
            ("kappa_a2", self.kappa_a2),
            ("kappa_b1", self.kappa_b1),
            ("kappa_a1", self.kappa_a1),
            ("kappa_b2", self.kappa_b2),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                out.push(Violation::error(name, "must be strictly positive"));
            }
        }
        for (name, v) in [("G_a", self.g_a), ("G_b", self.g_b)] {
            if !(v >= 0.0) || !v.is_finite() {
                out.push(Violation::error(name, "must be non-negative"));
            }
        }
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            out.push(Violation::error("T", "must be non-negative"));
        }
        // scale separation: optical modes should sit far above the magnon
        for (name, v) in [("omega_a2", self.omega_a2), ("omega_b1", self.omega_b1)] {
            if v > 0.0 && self.omega_m > 0.0 && v < 100.0 * self.omega_m {
                out.push(Violation::warning(
                    name,
                    "expected to be much larger than omega_m (optical vs microwave scales)",
                ));
            }
        }
        out
    }
}

/// Severity of a parameter-rule violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

/// One violated parameter rule, naming the field and the rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
    pub severity: Severity,
}

impl Violation {
    fn error(field: &str, rule: &str) -> Self {
        Self {
            field: field.to_owned(),
            rule: rule.to_owned(),
            severity: Severity::Error,
        }
    }

    fn warning(field: &str, rule: &str) -> Self {
        Self {
            field: field.to_owned(),
            rule: rule.to_owned(),
            severity: Severity::Warning,
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.field, self.rule)
    }
}

/// Laser pump driving one WGM; converts to an effective coupling via
/// [`pump_to_coupling`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    /// Pump optical power (W).
    pub power: f64,
    /// Pump angular frequency (rad/s).
    pub omega_p: f64,
    /// Bare optomagnonic coupling rate (rad/s).
    pub g0: f64,
    /// Decay rate of the pumped WGM (rad/s).
    pub kappa_drive: f64,
}

impl PumpSpec {
    pub fn validate(&self) -> Result<(), ParamsError> {
        if !(self.power >= 0.0) || !self.power.is_finite() {
            return Err(ParamsError::InvalidPump(format!(
                "power must be non-negative, got {}",
                self.power
            )));
        }
        for (name, v) in [
            ("omega_p", self.omega_p),
            ("g", self.g0),
            ("kappa_drive", self.kappa_drive),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ParamsError::InvalidPump(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Mean thermal occupation [exp(hbar*omega/kB*T) - 1]^-1 of a mode at
/// angular frequency `omega` in a bath at temperature `temperature`.
///
/// Returns exactly 0 at T = 0 and underflows to 0 for optical frequencies
/// at any laboratory temperature.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64, ParamsError> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(ParamsError::NonPositiveFrequency(omega));
    }
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(ParamsError::NegativeTemperature(temperature));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega / (KB * temperature);
    Ok(1.0 / x.exp_m1())
}

/// Effective coupling G = g * alpha produced by a pump, with intracavity
/// amplitude alpha = E / kappa_drive and E = sqrt(2 P kappa_drive / (hbar omega_p)),
/// i.e. G = g * sqrt(2 P / (hbar omega_p kappa_drive)).
pub fn pump_to_coupling(pump: &PumpSpec) -> f64 {
    pump.g0 * (2.0 * pump.power / (HBAR * pump.omega_p * pump.kappa_drive)).sqrt()
}

/// Pump power required for a given effective coupling: the inverse of
/// [`pump_to_coupling`], P = (G/g)^2 * hbar * omega_p * kappa_drive / 2.
pub fn coupling_to_power(coupling: f64, pump: &PumpSpec) -> f64 {
    let alpha = coupling / pump.g0;
    alpha * alpha * HBAR * pump.omega_p * pump.kappa_drive / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::TWO_PI;
    use proptest::prelude::*;

    #[test]
    fn occupation_zero_temperature() {
        assert_eq!(thermal_occupation(TWO_PI * 6.8e9, 0.0).unwrap(), 0.0);
        assert_eq!(thermal_occupation(1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn occupation_magnon_at_100mk() {
        // Bose-Einstein with CODATA constants; x = hbar*omega/kB*T ~ 3.2635
        let n = thermal_occupation(TWO_PI * 6.8e9, 0.1).unwrap();
        assert!((n - 0.0398).abs() < 2e-4, "n = {n}");
        let x = HBAR * TWO_PI * 6.8e9 / (KB * 0.1);
        assert!((x - 3.2635).abs() < 1e-3);
        assert!((n - 1.0 / x.exp_m1()).abs() < 1e-18);
    }

    #[test]
    fn occupation_optical_underflows_to_zero() {
        // exponent ~ 9.3e4: optical modes are zero-temperature for any lab T
        let n = thermal_occupation(TWO_PI * 1.930679e14, 0.1).unwrap();
        assert_eq!(n, 0.0);
        let n300 = thermal_occupation(TWO_PI * 1.930679e14, 300.0).unwrap();
        assert!(n300 < 1e-13);
    }

    #[test]
    fn occupation_rejects_bad_inputs() {
        assert!(thermal_occupation(0.0, 1.0).is_err());
        assert!(thermal_occupation(-1.0, 1.0).is_err());
        assert!(thermal_occupation(1.0, -1.0).is_err());
    }

    #[test]
    fn occupation_rayleigh_jeans_limit() {
        // hbar*omega/kB*T = 1e-3 -> n = kB*T/(hbar*omega) within 0.1%
        let t = 1.0;
        let omega = 1e-3 * KB * t / HBAR;
        let n = thermal_occupation(omega, t).unwrap();
        let rj = KB * t / (HBAR * omega);
        assert!((n / rj - 1.0).abs() < 1e-3, "n = {n}, rj = {rj}");
    }

    proptest! {
        #[test]
        fn occupation_monotone_in_temperature(
            omega in 1e6f64..1e12,
            t1 in 1e-3f64..100.0,
            factor in 1.01f64..10.0,
        ) {
            let n1 = thermal_occupation(omega, t1).unwrap();
            let n2 = thermal_occupation(omega, t1 * factor).unwrap();
            prop_assert!(n2 >= n1);
        }

        #[test]
        fn occupation_monotone_in_frequency(
            omega in 1e6f64..1e12,
            t in 1e-3f64..100.0,
            factor in 1.01f64..10.0,
        ) {
            let n1 = thermal_occupation(omega, t).unwrap();
            let n2 = thermal_occupation(omega * factor, t).unwrap();
            prop_assert!(n2 <= n1);
        }

        #[test]
        fn pump_power_round_trip(
            power in 1e-6f64..10.0,
            g0 in 1.0f64..1e4,
            kappa in 1e6f64..1e10,
        ) {
            let pump = PumpSpec {
                power,
                omega_p: TWO_PI * 1.930611e14,
                g0,
                kappa_drive: kappa,
            };
            let g = pump_to_coupling(&pump);
            let recovered = g * g * crate::constants::HBAR * pump.omega_p * pump.kappa_drive
                / (2.0 * g0 * g0);
            prop_assert!((recovered / power - 1.0).abs() < 1e-12);
            prop_assert!((coupling_to_power(g, &pump) / power - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pump_zero_power_gives_zero_coupling() {
        let pump = PumpSpec {
            power: 0.0,
            omega_p: TWO_PI * 1.930611e14,
            g0: TWO_PI * 10.0,
            kappa_drive: TWO_PI * 1e8,
        };
        assert_eq!(pump_to_coupling(&pump), 0.0);
    }

    #[test]
    fn pump_quadrupling_power_doubles_coupling() {
        let mut pump = PumpSpec {
            power: 0.05,
            omega_p: TWO_PI * 1.930611e14,
            g0: TWO_PI * 10.0,
            kappa_drive: TWO_PI * 1e8,
        };
        let g1 = pump_to_coupling(&pump);
        pump.power *= 4.0;
        let g2 = pump_to_coupling(&pump);
        assert!((g2 / g1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn pump_for_alpha_1e6() {
        // alpha = 1e6 with g/2pi = 10 Hz gives G/2pi = 10 MHz; the required
        // power is alpha^2 hbar omega_p kappa_drive / 2 (tens of watts here).
        let pump = PumpSpec {
            power: 1.0,
            omega_p: TWO_PI * 1.930611e14,
            g0: TWO_PI * 10.0,
            kappa_drive: TWO_PI * 1e8,
        };
        let p_needed = 1e12 * HBAR * pump.omega_p * pump.kappa_drive / 2.0;
        let pump_at = PumpSpec {
            power: p_needed,
            ..pump
        };
        let g = pump_to_coupling(&pump_at);
        assert!((g / (TWO_PI * 1e7) - 1.0).abs() < 1e-12, "G = {g}");
        assert!((coupling_to_power(TWO_PI * 1e7, &pump) / p_needed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validate_baseline_is_clean() {
        assert!(SystemParams::baseline().validate().is_empty());
    }

    #[test]
    fn validate_flags_zero_kappa_m() {
        let mut p = SystemParams::baseline();
        p.kappa_m = 0.0;
        let v = p.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "kappa_m");
        assert_eq!(v[0].severity, Severity::Error);
    }

    #[test]
    fn validate_flags_negative_temperature() {
        let mut p = SystemParams::baseline();
        p.temperature = -1.0;
        let v = p.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "T");
    }

    #[test]
    fn validate_zero_couplings_allowed() {
        let mut p = SystemParams::baseline();
        p.g_a = 0.0;
        p.g_b = 0.0;
        assert!(p.validate().is_empty());
    }

    #[test]
    fn validate_warns_on_scale_separation() {
        let mut p = SystemParams::baseline();
        p.omega_a2 = 2.0 * p.omega_m;
        let v = p.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].severity, Severity::Warning);
    }

    #[test]
    fn triple_resonance_derived_frequencies() {
        let p = SystemParams::baseline();
        assert!((p.omega_a1() - TWO_PI * 1.930611e14).abs() < 1e3);
        assert!((p.omega_b2() - TWO_PI * 1.9313e14).abs() < 1e3);
    }
}
