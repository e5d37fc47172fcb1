//! Stationary output covariance matrix by frequency-domain integration.
//!
//! The covariance matrix of (magnon, filtered A2 output, filtered B1
//! output) is V = int (domega/2pi) T~(omega) (M~ + P) D (M~^dag + P)
//! T~(omega)^dag, with the transfer matrix M~ = (i omega I + A)^{-1}, the
//! output projector P = diag(0, 0, 1/(2 kappa_a2), ..., 1/(2 kappa_b1)),
//! and the filter transformation T~.
//!
//! The integrand with all couplings removed (drift replaced by its
//! diagonal) integrates in closed form to the thermal/vacuum reference
//! diag(D_j / (2 kappa_j)) -- the all-pass identity: a passive cavity
//! returns its input statistics, so any normalized filter reproduces them.
//! The quadrature therefore runs on the difference of the two integrands,
//! which decays fast and vanishes identically at G = 0, and the reference
//! is added back exactly.

use thiserror::Error;

use crate::covariance::{CovMat, ModeOrdering, ModePair};
use crate::dynamics::LinearModel;
use crate::filters::{build_t_tilde, FilterPair};
use crate::quad;
use crate::{CMat6, Mat6};

type C64 = num_complex::Complex<f64>;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("model is unstable (spectral abscissa {abscissa:.6e} rad/s); no stationary state")]
    Unstable { abscissa: f64 },
    #[error("transfer matrix singular at omega = {omega:.6e} rad/s")]
    SingularTransfer { omega: f64 },
    #[error("drift diagonal must be strictly negative decay rates")]
    BadDecayRates,
    #[error("invalid quadrature settings: {0}")]
    InvalidSettings(String),
    #[error(
        "quadrature did not converge: error {error:.3e} after {panels} panels (best estimate retained)"
    )]
    Convergence {
        error: f64,
        panels: usize,
        best: Box<(CovMat, OutputCmDiagnostics)>,
    },
    #[error(transparent)]
    Dynamics(#[from] crate::dynamics::DynamicsError),
    #[error(transparent)]
    Cov(#[from] crate::covariance::CovError),
}

/// Tolerances and window of the frequency integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Relative tolerance on the accumulated matrix (max-abs entry).
    pub rel_tol: f64,
    /// Absolute floor, in covariance units.
    pub abs_tol: f64,
    /// Panel budget before a convergence error is raised.
    pub max_panels: usize,
    /// Initial integration half-range (rad/s); tails extend beyond it
    /// geometrically until they stop contributing.
    pub window_halfwidth: f64,
}

impl QuadratureSettings {
    /// Defaults with the window 40 * max(kappa_a2, kappa_b1, G_a, G_b,
    /// 2 pi / tau) prescribed for the model at hand.
    pub fn for_model(model: &LinearModel, filters: &FilterPair) -> Self {
        let rate_scale = model
            .drift
            .iter()
            .map(|v| v.abs())
            .fold(0.0f64, f64::max);
        let filter_scale = (std::f64::consts::TAU / filters.a2.tau)
            .max(std::f64::consts::TAU / filters.b1.tau);
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_panels: 100_000,
            window_halfwidth: 40.0 * rate_scale.max(filter_scale),
        }
    }

    fn validate(&self) -> Result<(), SpectrumError> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(SpectrumError::InvalidSettings(format!(
                "rel_tol must lie in (0, 1e-2], got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol > 0.0) {
            return Err(SpectrumError::InvalidSettings(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !(self.window_halfwidth > 0.0) {
            return Err(SpectrumError::InvalidSettings(format!(
                "window_halfwidth must be positive, got {}",
                self.window_halfwidth
            )));
        }
        Ok(())
    }
}

/// Quadrature diagnostics reported alongside the covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OutputCmDiagnostics {
    /// Accumulated error estimate, covariance units.
    pub integral_error: f64,
    /// Panels evaluated.
    pub panels: usize,
    /// Final covered half-window (rad/s).
    pub window: f64,
    /// Max-abs imaginary residual of the accumulated integral; vanishes
    /// analytically by the omega <-> -omega symmetry.
    pub imag_residual: f64,
}

/// Transfer matrix M~(omega) = (i omega I + A)^{-1}.
pub fn transfer_matrix(drift: &Mat6, omega: f64) -> Result<CMat6, SpectrumError> {
    let mut m = CMat6::zeros();
    for i in 0..6 {
        for j in 0..6 {
            m[(i, j)] = C64::new(drift[(i, j)], 0.0);
        }
        m[(i, i)] += C64::new(0.0, omega);
    }
    m.try_inverse()
        .ok_or(SpectrumError::SingularTransfer { omega })
}

fn output_projector(model: &LinearModel) -> Result<crate::Vec6, SpectrumError> {
    let k = model.decay_rates();
    if k.iter().any(|v| !(*v > 0.0)) {
        return Err(SpectrumError::BadDecayRates);
    }
    Ok(crate::Vec6::new(
        0.0,
        0.0,
        1.0 / (2.0 * k[2]),
        1.0 / (2.0 * k[3]),
        1.0 / (2.0 * k[4]),
        1.0 / (2.0 * k[5]),
    ))
}

/// Full integrand T~ (M~ + P) D (M~^dag + P) T~^dag of the output-CM
/// integral; Hermitian positive semidefinite for stable models.
pub fn output_integrand(
    omega: f64,
    model: &LinearModel,
    filters: &FilterPair,
) -> Result<CMat6, SpectrumError> {
    let p = output_projector(model)?;
    let k = model.decay_rates();
    let m = transfer_matrix(&model.drift, omega)?;
    let d = model.diffusion.diagonal();

    let mut n = m;
    for i in 0..6 {
        n[(i, i)] += C64::new(p[i], 0.0);
    }
    // (N * D) N^dag with D diagonal: scale columns of N by D
    let mut nd = n;
    for j in 0..6 {
        for i in 0..6 {
            nd[(i, j)] *= d[j];
        }
    }
    let x = nd * n.adjoint();
    let t = build_t_tilde(omega, &filters.a2, &filters.b1, k[2], k[4]);
    Ok(t * x * t.adjoint())
}

/// Difference between the coupled integrand and the exactly-integrable
/// decoupled one (drift diagonal only); vanishes identically at G = 0.
fn residual_integrand(
    omega: f64,
    model: &LinearModel,
    filters: &FilterPair,
    p: &crate::Vec6,
    k: &crate::Vec6,
) -> CMat6 {
    let d = model.diffusion.diagonal();
    let m = {
        let mut m = CMat6::zeros();
        for i in 0..6 {
            for j in 0..6 {
                m[(i, j)] = C64::new(model.drift[(i, j)], 0.0);
            }
            m[(i, i)] += C64::new(0.0, omega);
        }
        m.try_inverse().expect("resolvent of a stable drift on the real axis")
    };
    let mut n = m;
    for i in 0..6 {
        n[(i, i)] += C64::new(p[i], 0.0);
    }
    let mut nd = n;
    for j in 0..6 {
        for i in 0..6 {
            nd[(i, j)] *= d[j];
        }
    }
    let mut x = nd * n.adjoint();
    // decoupled reference: everything diagonal
    for i in 0..6 {
        let m0 = (C64::new(-k[i], omega)).inv() + C64::new(p[i], 0.0);
        x[(i, i)] -= m0 * m0.conj() * d[i];
    }
    let t = build_t_tilde(omega, &filters.a2, &filters.b1, k[2], k[4]);
    t * x * t.adjoint()
}

fn eigenvalue_seeds(model: &LinearModel, kappa_floor: f64) -> Vec<f64> {
    let mut seeds = Vec::new();
    if let Some(schur) = nalgebra::linalg::Schur::try_new(model.drift, f64::EPSILON, 10_000) {
        for lam in schur.complex_eigenvalues().iter() {
            let center = -lam.im;
            let width = (-lam.re).max(1e-3 * kappa_floor);
            for mult in [0.0, 1.0, 2.0, 4.0] {
                seeds.push(center + mult * width);
                seeds.push(center - mult * width);
            }
        }
    }
    seeds
}

fn assemble_breakpoints(mut pts: Vec<f64>, w: f64) -> Vec<f64> {
    pts.push(0.0);
    // geometric fill between the outermost feature and the window edge
    let mut g = pts
        .iter()
        .map(|p| p.abs())
        .filter(|p| *p < w)
        .fold(0.0f64, f64::max)
        .max(w * 2f64.powi(-24));
    while g * 4.0 < w {
        g *= 4.0;
        pts.push(g);
        pts.push(-g);
    }
    pts.push(w);
    pts.push(-w);
    pts.retain(|p| p.abs() <= w && p.is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * w);
    pts
}

/// Stationary 6x6 covariance matrix of (magnon, filtered A2, filtered B1)
/// plus quadrature diagnostics.
pub fn output_cm(
    model: &LinearModel,
    filters: &FilterPair,
    settings: &QuadratureSettings,
) -> Result<(CovMat, OutputCmDiagnostics), SpectrumError> {
    settings.validate()?;
    let stability = model.stability()?;
    if !stability.stable {
        return Err(SpectrumError::Unstable {
            abscissa: stability.abscissa,
        });
    }
    let p = output_projector(model)?;
    let k = model.decay_rates();
    let d = model.diffusion.diagonal();

    let w = settings.window_halfwidth;
    let mut pts = eigenvalue_seeds(model, k[0]);
    // sinc zeros of both filters tame the oscillation of the residual
    for spec in [&filters.a2, &filters.b1] {
        let period = std::f64::consts::TAU / spec.tau;
        for kz in 1..=32 {
            pts.push(spec.detuning + kz as f64 * period);
            pts.push(spec.detuning - kz as f64 * period);
        }
        pts.push(spec.detuning);
    }
    let pts = assemble_breakpoints(pts, w);

    let f = |omega: f64| residual_integrand(omega, model, filters, &p, &k);
    let two_pi = std::f64::consts::TAU;
    let outcome = quad::integrate_line(
        &f,
        &pts,
        settings.rel_tol,
        settings.abs_tol * two_pi,
        settings.max_panels,
    );

    let mut v = Mat6::zeros();
    for i in 0..6 {
        for j in 0..6 {
            v[(i, j)] = outcome.total[(i, j)].re / two_pi;
        }
        v[(i, i)] += d[i] / (2.0 * k[i]);
    }
    let v = (v + v.transpose()) * 0.5;
    let cov = CovMat::from_mat6(v, ModeOrdering::MagnonA2B1)?;
    let diags = OutputCmDiagnostics {
        integral_error: outcome.error / two_pi,
        panels: outcome.panels,
        window: outcome.window,
        imag_residual: quad::imag_residual(&outcome.total) / two_pi,
    };
    if !outcome.converged {
        return Err(SpectrumError::Convergence {
            error: diags.integral_error,
            panels: diags.panels,
            best: Box::new((cov, diags)),
        });
    }
    Ok((cov, diags))
}

/// Unfiltered intracavity covariance matrix by the same quadrature:
/// int (domega/2pi) M~ D M~^dag, which must reproduce the Lyapunov solution
/// for every stable model (the Parseval identity used as a cross-check).
pub fn intracavity_cm_spectral(
    model: &LinearModel,
    settings: &QuadratureSettings,
) -> Result<(CovMat, OutputCmDiagnostics), SpectrumError> {
    settings.validate()?;
    let stability = model.stability()?;
    if !stability.stable {
        return Err(SpectrumError::Unstable {
            abscissa: stability.abscissa,
        });
    }
    let k = model.decay_rates();
    if k.iter().any(|v| !(*v > 0.0)) {
        return Err(SpectrumError::BadDecayRates);
    }
    let d = model.diffusion.diagonal();

    let f = |omega: f64| {
        let m = transfer_matrix(&model.drift, omega)
            .expect("resolvent of a stable drift on the real axis");
        let mut md = m;
        for j in 0..6 {
            for i in 0..6 {
                md[(i, j)] *= d[j];
            }
        }
        let mut x = md * m.adjoint();
        for i in 0..6 {
            let m0 = C64::new(-k[i], omega).inv();
            x[(i, i)] -= m0 * m0.conj() * d[i];
        }
        x
    };

    let pts = assemble_breakpoints(eigenvalue_seeds(model, k[0]), settings.window_halfwidth);
    let two_pi = std::f64::consts::TAU;
    let outcome = quad::integrate_line(
        &f,
        &pts,
        settings.rel_tol,
        settings.abs_tol * two_pi,
        settings.max_panels,
    );

    let mut v = Mat6::zeros();
    for i in 0..6 {
        for j in 0..6 {
            v[(i, j)] = outcome.total[(i, j)].re / two_pi;
        }
        v[(i, i)] += d[i] / (2.0 * k[i]);
    }
    let v = (v + v.transpose()) * 0.5;
    let cov = CovMat::from_mat6(v, ModeOrdering::MagnonA2B1)?;
    let diags = OutputCmDiagnostics {
        integral_error: outcome.error / two_pi,
        panels: outcome.panels,
        window: outcome.window,
        imag_residual: quad::imag_residual(&outcome.total) / two_pi,
    };
    if !outcome.converged {
        return Err(SpectrumError::Convergence {
            error: diags.integral_error,
            panels: diags.panels,
            best: Box::new((cov, diags)),
        });
    }
    Ok((cov, diags))
}

/// Extract the 4x4 covariance matrix of a mode pair from the 6x6 state,
/// preserving the [V_A, V_AB; V_AB^T, V_B] layout.
pub fn extract_bipartite(v6: &CovMat, pair: ModePair) -> Result<CovMat, SpectrumError> {
    if v6.dim() != 6 {
        return Err(SpectrumError::Cov(
            crate::covariance::CovError::BadDimension(v6.dim()),
        ));
    }
    let idx = pair.indices();
    let m = nalgebra::DMatrix::from_fn(4, 4, |i, j| v6.matrix()[(idx[i], idx[j])]);
    Ok(CovMat::new(m, pair.ordering())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::TWO_PI;
    use crate::params::{thermal_occupation, SystemParams};
    use approx::assert_relative_eq;

    fn baseline() -> (LinearModel, FilterPair) {
        let model = LinearModel::new(&SystemParams::baseline()).unwrap();
        let filters = FilterPair::shared(1e-6).unwrap();
        (model, filters)
    }

    #[test]
    fn transfer_matrix_at_zero_is_inverse_drift() {
        let (model, _) = baseline();
        let m = transfer_matrix(&model.drift, 0.0).unwrap();
        let a_inv = model.drift.try_inverse().unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_relative_eq!(m[(i, j)].re, a_inv[(i, j)], epsilon = 1e-18 * a_inv.norm());
                assert!(m[(i, j)].im.abs() < 1e-24);
            }
        }
    }

    #[test]
    fn transfer_matrix_decoupled_is_diagonal() {
        let mut p = SystemParams::baseline();
        p.g_a = 0.0;
        p.g_b = 0.0;
        let model = LinearModel::new(&p).unwrap();
        let omega = TWO_PI * 3e7;
        let m = transfer_matrix(&model.drift, omega).unwrap();
        let k = model.decay_rates();
        for i in 0..6 {
            let expect = C64::new(-k[i], omega).inv();
            assert!((m[(i, i)] - expect).norm() < 1e-15 * expect.norm());
            for j in 0..6 {
                if i != j {
                    assert_eq!(m[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn transfer_matrix_defining_identity() {
        let (model, _) = baseline();
        let omega = TWO_PI * 5e7;
        let m = transfer_matrix(&model.drift, omega).unwrap();
        let mut lhs = CMat6::zeros();
        for i in 0..6 {
            for j in 0..6 {
                lhs[(i, j)] = C64::new(model.drift[(i, j)], 0.0);
            }
            lhs[(i, i)] += C64::new(0.0, omega);
        }
        let residual = lhs * m - CMat6::identity();
        assert!(residual.norm() <= 1e-12);
    }

    #[test]
    fn integrand_hermitian_and_psd() {
        let (model, filters) = baseline();
        for omega in [0.0, TWO_PI * 3e6] {
            let x = output_integrand(omega, &model, &filters).unwrap();
            let asym = (x - x.adjoint()).norm();
            assert!(asym <= 1e-12 * x.norm(), "asym {asym}");
            // Hermitian PSD: real eigenvalues bounded below near zero
            let emb = {
                let mut e = nalgebra::DMatrix::<f64>::zeros(12, 12);
                for i in 0..6 {
                    for j in 0..6 {
                        e[(i, j)] = x[(i, j)].re;
                        e[(i + 6, j + 6)] = x[(i, j)].re;
                        e[(i, j + 6)] = -x[(i, j)].im;
                        e[(i + 6, j)] = x[(i, j)].im;
                    }
                }
                e
            };
            let min_eig = emb
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            assert!(min_eig >= -1e-12 * x.norm(), "min eig {min_eig}");
        }
    }

    #[test]
    fn integrand_all_pass_calibration_at_g_zero() {
        // with G = 0 and Omega = 0 the (3,3) entry reduces to
        // |F~(omega)|^2 (2 N_a2 + 1) / 2: the all-pass identity
        let mut params = SystemParams::baseline();
        params.g_a = 0.0;
        params.g_b = 0.0;
        let model = LinearModel::new(&params).unwrap();
        let filters = FilterPair::shared(1e-6).unwrap();
        for omega in [TWO_PI * 0.3e6, TWO_PI * 2.7e6] {
            let x = output_integrand(omega, &model, &filters).unwrap();
            let f2 = crate::filters::filter_freq(omega, &filters.a2).norm_sqr();
            assert_relative_eq!(x[(2, 2)].re, f2 * 0.5, max_relative = 1e-10);
        }
    }

    #[test]
    fn output_cm_g_zero_calibration() {
        let mut params = SystemParams::baseline();
        params.g_a = 0.0;
        params.g_b = 0.0;
        let model = LinearModel::new(&params).unwrap();
        let filters = FilterPair::shared(1e-6).unwrap();
        let settings = QuadratureSettings::for_model(&model, &filters);
        let (v, diags) = output_cm(&model, &filters, &settings).unwrap();
        let n_m = thermal_occupation(params.omega_m, params.temperature).unwrap();
        let expect = [
            (2.0 * n_m + 1.0) / 2.0,
            (2.0 * n_m + 1.0) / 2.0,
            0.5,
            0.5,
            0.5,
            0.5,
        ];
        for i in 0..6 {
            assert!((v.matrix()[(i, i)] - expect[i]).abs() < 1e-6);
            for j in 0..6 {
                if i != j {
                    assert!(v.matrix()[(i, j)].abs() < 1e-8);
                }
            }
        }
        assert!(diags.imag_residual < 1e-8);
    }

    #[test]
    fn output_cm_magnon_block_matches_lyapunov() {
        let (model, filters) = baseline();
        let settings = QuadratureSettings::for_model(&model, &filters);
        let (v, _) = output_cm(&model, &filters, &settings).unwrap();
        let lyap = crate::dynamics::solve_lyapunov(&model).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let a = v.matrix()[(i, j)];
                let b = lyap.matrix()[(i, j)];
                assert!(
                    (a - b).abs() <= 1e-6 * b.abs().max(1e-3),
                    "({i},{j}): {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn output_cm_rejects_unstable() {
        let mut p = SystemParams::baseline();
        p.g_a = 0.0;
        p.g_b = 1.2 * crate::dynamics::tms_threshold(p.kappa_m, p.kappa_b1);
        let model = LinearModel::new(&p).unwrap();
        let filters = FilterPair::shared(1e-6).unwrap();
        let settings = QuadratureSettings::for_model(&model, &filters);
        assert!(matches!(
            output_cm(&model, &filters, &settings),
            Err(SpectrumError::Unstable { .. })
        ));
    }

    #[test]
    fn output_cm_rejects_bad_settings() {
        let (model, filters) = baseline();
        let mut s = QuadratureSettings::for_model(&model, &filters);
        s.rel_tol = 0.5;
        assert!(matches!(
            output_cm(&model, &filters, &s),
            Err(SpectrumError::InvalidSettings(_))
        ));
    }

    #[test]
    fn output_cm_baseline_entangled() {
        let (model, filters) = baseline();
        let settings = QuadratureSettings::for_model(&model, &filters);
        let (v, diags) = output_cm(&model, &filters, &settings).unwrap();
        let v4 = extract_bipartite(&v, ModePair::A2B1).unwrap();
        let en = crate::entanglement::log_negativity(&v4).unwrap();
        assert!(en > 0.5, "E_N = {en}");
        assert!(diags.imag_residual < 1e-8 * 2.0);
        let (physical, margin) = crate::entanglement::physicality(&v, 1e-9);
        assert!(physical, "margin {margin}");
    }

    #[test]
    fn output_cm_uncorrelated_cross_block_at_g_zero() {
        let mut params = SystemParams::baseline();
        params.g_a = 0.0;
        params.g_b = 0.0;
        let model = LinearModel::new(&params).unwrap();
        let filters = FilterPair::shared(1e-6).unwrap();
        let settings = QuadratureSettings::for_model(&model, &filters);
        let (v, _) = output_cm(&model, &filters, &settings).unwrap();
        let v4 = extract_bipartite(&v, ModePair::A2B1).unwrap();
        for i in 0..2 {
            for j in 2..4 {
                assert!(v4.matrix()[(i, j)].abs() < 1e-8);
            }
        }
    }

    #[test]
    fn filter_time_shift_leaves_output_cm_unchanged() {
        let (model, mut filters) = baseline();
        let settings = QuadratureSettings::for_model(&model, &filters);
        let (v0, _) = output_cm(&model, &filters, &settings).unwrap();
        filters.a2 = filters.a2.with_delay(3.0 * filters.a2.tau);
        filters.b1 = filters.b1.with_delay(3.0 * filters.b1.tau);
        let (v1, _) = output_cm(&model, &filters, &settings).unwrap();
        let diff = (v0.matrix() - v1.matrix()).abs().max();
        assert!(diff < 1e-10, "time-shift changed V by {diff}");
    }

    #[test]
    fn lyapunov_spectral_equivalence_baseline() {
        let (model, filters) = baseline();
        let settings = QuadratureSettings::for_model(&model, &filters);
        let (v, _) = intracavity_cm_spectral(&model, &settings).unwrap();
        let lyap = crate::dynamics::solve_lyapunov(&model).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let a = v.matrix()[(i, j)];
                let b = lyap.matrix()[(i, j)];
                let scale = b.abs().max(1e-10 * lyap.matrix().abs().max());
                assert!((a - b).abs() <= 1e-8 * scale, "({i},{j}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn extract_bipartite_bookkeeping() {
        let m = nalgebra::DMatrix::from_fn(6, 6, |i, j| if i == j { (i + 1) as f64 } else { 0.0 });
        let v6 = CovMat::new(m, ModeOrdering::MagnonA2B1).unwrap();
        let v4 = extract_bipartite(&v6, ModePair::A2B1).unwrap();
        for (i, expect) in [3.0, 4.0, 5.0, 6.0].iter().enumerate() {
            assert_eq!(v4.matrix()[(i, i)], *expect);
        }
        let vma = extract_bipartite(&v6, ModePair::MagnonA2).unwrap();
        for (i, expect) in [1.0, 2.0, 3.0, 4.0].iter().enumerate() {
            assert_eq!(vma.matrix()[(i, i)], *expect);
        }
        // re-embedding reproduces the original entries
        let idx = ModePair::A2B1.indices();
        for (r, &ir) in idx.iter().enumerate() {
            for (c, &ic) in idx.iter().enumerate() {
                assert_eq!(v4.matrix()[(r, c)], v6.matrix()[(ir, ic)]);
            }
        }
    }

    #[test]
    fn extract_bipartite_rejects_4x4_input() {
        let m = nalgebra::DMatrix::<f64>::identity(4, 4);
        let v4 = CovMat::new(m, ModeOrdering::A2B1).unwrap();
        assert!(extract_bipartite(&v4, ModePair::A2B1).is_err());
    }
}
