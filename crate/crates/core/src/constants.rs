//! Physical constants (CODATA 2018). Compiled in, never user-supplied.

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant (J/K).
pub const KB: f64 = 1.380_649e-23;

/// 2*pi, for conversions between ordinary frequencies (Hz) and angular
/// frequencies (rad/s). All internal rates are angular.
pub const TWO_PI: f64 = std::f64::consts::TAU;
