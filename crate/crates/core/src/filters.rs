//! Square temporal filters defining discrete bosonic output modes from the
//! continuous travelling fields, and the filter transformation matrix
//! entering the output-covariance integral.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::CMat6;

type C64 = Complex<f64>;

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("filter duration must be positive, got {0} s")]
    NonPositiveTau(f64),
    #[error("unsupported filter shape '{0}' (only 'square' is implemented)")]
    UnsupportedShape(String),
}

/// Filter shape tag. Only the square window is implemented; the tag exists
/// so configuration files fail loudly on anything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterShape {
    #[default]
    Square,
}

impl std::str::FromStr for FilterShape {
    type Err = FilterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "square" => Ok(FilterShape::Square),
            other => Err(FilterError::UnsupportedShape(other.to_owned())),
        }
    }
}

/// One output filter: F(t) = tau^{-1/2} e^{-i Omega (t - t0)} on
/// t - t0 in [0, tau), zero elsewhere.
///
/// `detuning` is the filter center frequency relative to the output field's
/// frame center (the sideband the field is centered on); the paper's
/// optimal choice is zero. `delay` shifts the window start; stationary
/// statistics are independent of it (it only multiplies the frequency
/// response by a pure phase), and it exists to exercise exactly that
/// invariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub shape: FilterShape,
    /// Center detuning Omega (rad/s).
    pub detuning: f64,
    /// Window duration tau (s).
    pub tau: f64,
    /// Window start time t0 (s).
    #[serde(default)]
    pub delay: f64,
}

impl FilterSpec {
    pub fn square(detuning: f64, tau: f64) -> Result<Self, FilterError> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(FilterError::NonPositiveTau(tau));
        }
        Ok(Self {
            shape: FilterShape::Square,
            detuning,
            tau,
            delay: 0.0,
        })
    }

    pub fn with_delay(mut self, delay: f64) -> Self {
        self.delay = delay;
        self
    }
}

/// The two output filters, one per travelling field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterPair {
    /// Filter on the anti-Stokes output field (mode a2).
    pub a2: FilterSpec,
    /// Filter on the Stokes output field (mode b1).
    pub b1: FilterSpec,
}

impl FilterPair {
    /// Shared duration, zero detuning on both channels.
    pub fn shared(tau: f64) -> Result<Self, FilterError> {
        Ok(Self {
            a2: FilterSpec::square(0.0, tau)?,
            b1: FilterSpec::square(0.0, tau)?,
        })
    }
}

/// Time-domain filter amplitude (units s^{-1/2}). Heaviside convention
/// h(0) = 1: the support is [t0, t0 + tau).
pub fn filter_time(t: f64, spec: &FilterSpec) -> C64 {
    let s = t - spec.delay;
    if s < 0.0 || s >= spec.tau {
        return C64::new(0.0, 0.0);
    }
    let phase = -spec.detuning * s;
    C64::from_polar(spec.tau.sqrt().recip(), phase)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Frequency response F~(omega) = int e^{+i omega t} F(t) dt (units
/// s^{1/2}): sqrt(tau) e^{i (omega-Omega) tau / 2} sinc((omega-Omega) tau / 2),
/// times the delay phase e^{i omega t0}. The removable singularity at
/// omega = Omega evaluates to sqrt(tau).
pub fn filter_freq(omega: f64, spec: &FilterSpec) -> C64 {
    let x = (omega - spec.detuning) * spec.tau / 2.0;
    let modulus = spec.tau.sqrt() * sinc(x);
    C64::from_polar(1.0, x + omega * spec.delay) * modulus
}

/// One 2x2 quadrature block of the filter transformation in frequency
/// space, built from u = F~(omega) and v = conj(F~(-omega)):
/// [[(u+v)/2, -(u-v)/2i], [(u-v)/2i, (u+v)/2]].
pub fn t_tilde_block(omega: f64, spec: &FilterSpec) -> nalgebra::Matrix2<C64> {
    let u = filter_freq(omega, spec);
    let v = filter_freq(-omega, spec).conj();
    let c = (u + v) * 0.5;
    let s = (u - v) * C64::new(0.0, -0.5);
    nalgebra::Matrix2::new(c, -s, s, c)
}

/// Full 6x6 filter transformation T~(omega): identity on the magnon
/// quadratures, sqrt(2 kappa) times the filter block on each optical pair.
pub fn build_t_tilde(
    omega: f64,
    spec_a2: &FilterSpec,
    spec_b1: &FilterSpec,
    kappa_a2: f64,
    kappa_b1: f64,
) -> CMat6 {
    let mut t = CMat6::zeros();
    t[(0, 0)] = C64::new(1.0, 0.0);
    t[(1, 1)] = C64::new(1.0, 0.0);
    let block_a = t_tilde_block(omega, spec_a2) * C64::new((2.0 * kappa_a2).sqrt(), 0.0);
    let block_b = t_tilde_block(omega, spec_b1) * C64::new((2.0 * kappa_b1).sqrt(), 0.0);
    for i in 0..2 {
        for j in 0..2 {
            t[(2 + i, 2 + j)] = block_a[(i, j)];
            t[(4 + i, 4 + j)] = block_b[(i, j)];
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::TWO_PI;
    use approx::assert_relative_eq;

    fn spec(det_hz: f64, tau: f64) -> FilterSpec {
        FilterSpec::square(TWO_PI * det_hz, tau).unwrap()
    }

    #[test]
    fn rejects_non_positive_tau() {
        assert!(FilterSpec::square(0.0, 0.0).is_err());
        assert!(FilterSpec::square(0.0, -1e-6).is_err());
    }

    #[test]
    fn shape_parsing() {
        assert_eq!("square".parse::<FilterShape>().unwrap(), FilterShape::Square);
        assert!("gaussian".parse::<FilterShape>().is_err());
    }

    #[test]
    fn time_domain_causal_support() {
        let s = spec(0.0, 1e-6);
        assert_eq!(filter_time(-1e-9, &s), Complex::new(0.0, 0.0));
        assert_eq!(filter_time(1e-6, &s), Complex::new(0.0, 0.0));
        // h(0) = 1: the left edge is included
        assert!(filter_time(0.0, &s).norm() > 0.0);
    }

    #[test]
    fn time_domain_flat_modulus() {
        let s = spec(0.0, 1e-6);
        let f = filter_time(0.5e-6, &s);
        assert_relative_eq!(f.re, 1e3, max_relative = 1e-12);
        assert_eq!(f.im, 0.0);
    }

    #[test]
    fn time_domain_normalization() {
        // Riemann sum of |F|^2 over [0, tau) equals 1 for any (Omega, tau)
        for (det, tau) in [(0.0, 1e-6), (3.0e6, 1e-6), (-2.0e7, 5e-7)] {
            let s = spec(det, tau);
            let n = 20_000;
            let dt = tau / n as f64;
            let sum: f64 = (0..n)
                .map(|k| filter_time((k as f64 + 0.5) * dt, &s).norm_sqr() * dt)
                .sum();
            assert_relative_eq!(sum, 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn freq_at_center_is_sqrt_tau() {
        let tau = 1e-6;
        let s = spec(5.0e6, tau);
        let f = filter_freq(s.detuning, &s);
        assert_relative_eq!(f.re, tau.sqrt(), max_relative = 1e-14);
        assert!(f.im.abs() < 1e-18);
    }

    #[test]
    fn freq_continuous_at_center() {
        let tau = 1e-6;
        let s = spec(0.0, tau);
        for sign in [-1.0, 1.0] {
            let f = filter_freq(sign * 1e-9 / tau, &s);
            assert!((f.norm() / tau.sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn freq_modulus_is_sinc() {
        let tau = 1e-6;
        let s = spec(0.0, tau);
        // |F~|^2 = tau sinc^2((omega - Omega) tau / 2); zero at 2 pi / tau
        let z = filter_freq(TWO_PI / tau, &s);
        assert!(z.norm_sqr() < 1e-20 * tau);
        let omega = 3.7e6;
        let x = omega * tau / 2.0;
        let expect = tau * (x.sin() / x).powi(2);
        assert_relative_eq!(filter_freq(omega, &s).norm_sqr(), expect, max_relative = 1e-12);
    }

    #[test]
    fn freq_parseval_normalization() {
        // int (domega/2pi) |F~|^2 = 1, by trapezoid over many sinc lobes
        let tau = 1e-6;
        for det_hz in [0.0, 2.5e6] {
            let s = spec(det_hz, tau);
            let w = TWO_PI / tau * 2000.0;
            let n = 4_000_000usize;
            let h = 2.0 * w / n as f64;
            let mut sum = 0.0;
            for k in 0..=n {
                let omega = s.detuning - w + k as f64 * h;
                let wgt = if k == 0 || k == n { 0.5 } else { 1.0 };
                sum += wgt * filter_freq(omega, &s).norm_sqr() * h;
            }
            // trapezoid tail truncation dominates the error budget
            assert!(
                (sum / TWO_PI - 1.0).abs() < 1e-3,
                "norm = {}",
                sum / TWO_PI
            );
        }
    }

    #[test]
    fn t_tilde_magnon_block_is_identity() {
        let sa = spec(0.0, 1e-6);
        let sb = spec(1.0e6, 2e-6);
        for omega in [0.0, 1e5, -3e8] {
            let t = build_t_tilde(omega, &sa, &sb, TWO_PI * 1e8, TWO_PI * 1e8);
            assert_eq!(t[(0, 0)], Complex::new(1.0, 0.0));
            assert_eq!(t[(1, 1)], Complex::new(1.0, 0.0));
            assert_eq!(t[(0, 1)], Complex::new(0.0, 0.0));
            for j in 2..6 {
                assert_eq!(t[(0, j)], Complex::new(0.0, 0.0));
                assert_eq!(t[(j, 0)], Complex::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn t_tilde_zero_detuning_blocks_are_real_diagonal() {
        // for Omega = 0 the time-domain filter is real, so Im F = 0 and the
        // 2x2 blocks reduce to sqrt(2 kappa) F~(omega) I within round-off
        let sa = spec(0.0, 1e-6);
        let kappa = TWO_PI * 1e8;
        for omega in [0.0, 2.2e6, 8.8e7] {
            let t = build_t_tilde(omega, &sa, &sa, kappa, kappa);
            let f = filter_freq(omega, &sa) * (2.0 * kappa).sqrt();
            assert!((t[(2, 2)] - f).norm() < 1e-12 * f.norm().max(1.0));
            assert!(t[(2, 3)].norm() < 1e-12 * f.norm().max(1e-12));
        }
    }

    #[test]
    fn t_tilde_kappa_scaling() {
        let sa = spec(1.5e6, 1e-6);
        let kappa = TWO_PI * 1e8;
        let omega = 4.4e6;
        let t1 = build_t_tilde(omega, &sa, &sa, kappa, kappa);
        let t2 = build_t_tilde(omega, &sa, &sa, 2.0 * kappa, kappa);
        for i in 2..4 {
            for j in 2..4 {
                assert!((t2[(i, j)] - t1[(i, j)] * 2.0f64.sqrt()).norm() < 1e-12);
            }
        }
        for i in 4..6 {
            for j in 4..6 {
                assert_eq!(t2[(i, j)], t1[(i, j)]);
            }
        }
    }
}
