//! Independent stochastic oracle: integrate the quadrature Langevin
//! equations with white-noise inputs, apply the output filters by discrete
//! convolution, and estimate the filtered-output covariance matrix from an
//! ensemble of trajectories.
//!
//! Two discretizations are available: Euler-Maruyama, and an exact
//! linear-system discretization (matrix exponential plus exact discrete
//! noise covariance) used to cross-check discretization bias. Trajectories
//! are keyed by (seed, trajectory index) through a splittable counter-based
//! generator, so runs are bit-reproducible at any parallelism.

use nalgebra::Matrix4;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::covariance::{CovMat, ModeOrdering};
use crate::dynamics::LinearModel;
use crate::entanglement::log_negativity;
use crate::filters::{filter_time, FilterPair, FilterSpec};
use crate::{Mat6, Vec6};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("model is unstable (spectral abscissa {abscissa:.6e} rad/s)")]
    Unstable { abscissa: f64 },
    #[error("invalid simulation settings: {0}")]
    InvalidSettings(String),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("discrete noise covariance is not positive definite")]
    NoiseFactorization,
    #[error(transparent)]
    Dynamics(#[from] crate::dynamics::DynamicsError),
    #[error(transparent)]
    Entanglement(#[from] crate::entanglement::EntanglementError),
    #[error(transparent)]
    Cov(#[from] crate::covariance::CovError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    EulerMaruyama,
    /// Propagation by exp(A dt) with the exact discrete noise covariance.
    Exact,
}

/// Time-stepping and ensemble controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    /// Step size (s); must resolve the fastest rate: dt * max|A_ij| <= 0.05.
    pub dt: f64,
    /// Burn-in before sampling; must cover >= 10 relaxation times.
    pub t_relax: f64,
    /// Trajectory count.
    pub n_traj: usize,
    /// Ensemble seed; trajectories derive their streams from (seed, index).
    pub seed: u64,
    pub integrator: Integrator,
}

impl SimSettings {
    /// Settings satisfying the resolution and burn-in guards for `model`.
    pub fn auto(model: &LinearModel, n_traj: usize, seed: u64) -> Result<Self, SimError> {
        let st = model.stability()?;
        if !st.stable {
            return Err(SimError::Unstable {
                abscissa: st.abscissa,
            });
        }
        let max_rate = model.drift.iter().map(|v| v.abs()).fold(0.0, f64::max);
        Ok(Self {
            dt: 0.04 / max_rate,
            t_relax: 12.0 / st.abscissa.abs(),
            n_traj,
            seed,
            integrator: Integrator::EulerMaruyama,
        })
    }

    pub fn validate(&self, model: &LinearModel) -> Result<(), SimError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(SimError::InvalidSettings(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        let max_rate = model.drift.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if self.dt * max_rate > 0.05 {
            return Err(SimError::InvalidSettings(format!(
                "dt * max rate = {:.3} exceeds the resolution guard 0.05",
                self.dt * max_rate
            )));
        }
        let st = model.stability()?;
        if !st.stable {
            return Err(SimError::Unstable {
                abscissa: st.abscissa,
            });
        }
        if self.t_relax < 10.0 / st.abscissa.abs() {
            return Err(SimError::InvalidSettings(format!(
                "t_relax = {:.3e} s is below 10 relaxation times ({:.3e} s)",
                self.t_relax,
                10.0 / st.abscissa.abs()
            )));
        }
        if self.n_traj < 2 {
            return Err(SimError::InvalidSettings(format!(
                "n_traj must be at least 2, got {}",
                self.n_traj
            )));
        }
        Ok(())
    }
}

/// One trajectory's outputs: the filtered quadratures
/// (X_A2, Y_A2, X_B1, Y_B1) and the final intracavity magnon quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub output: [f64; 4],
    pub magnon: [f64; 2],
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trajectory stream keyed by (seed, index): the key is expanded from
/// the pair with splitmix64, then drives a ChaCha8 stream.
fn trajectory_rng(seed: u64, traj: u64) -> ChaCha8Rng {
    let mut state = seed ^ traj.wrapping_mul(0xD1B5_4A32_D192_ED03);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

struct StepPlan {
    n_total: usize,
    window_start: [usize; 2],
    t_final: f64,
}

fn plan_steps(filters: &FilterPair, settings: &SimSettings) -> Result<StepPlan, SimError> {
    let dt = settings.dt;
    let n_relax = (settings.t_relax / dt).ceil() as usize;
    let win = |spec: &FilterSpec| -> usize { ((spec.tau / dt).round() as usize).max(1) };
    let n_a = win(&filters.a2);
    let n_b = win(&filters.b1);
    let n_win = n_a.max(n_b);
    let n_total = n_relax + n_win;
    if n_total > 200_000_000 {
        return Err(SimError::InvalidSettings(format!(
            "{n_total} steps per trajectory; decrease t_relax/tau or increase dt"
        )));
    }
    Ok(StepPlan {
        n_total,
        window_start: [n_total - n_a, n_total - n_b],
        t_final: n_total as f64 * dt,
    })
}

struct NoiseFactors {
    /// Euler-Maruyama: per-quadrature noise amplitudes sqrt(D_jj dt).
    em_amp: Vec6,
    /// Exact mode: lower-triangular factor of the joint covariance of
    /// (state increment, integrated input noise) over one step.
    joint: Option<nalgebra::SMatrix<f64, 12, 12>>,
    phi: Mat6,
}

fn noise_factors(
    model: &LinearModel,
    settings: &SimSettings,
) -> Result<NoiseFactors, SimError> {
    let dt = settings.dt;
    let d = model.diffusion.diagonal();
    let em_amp = Vec6::from_fn(|i, _| (d[i] * dt).sqrt());
    match settings.integrator {
        Integrator::EulerMaruyama => Ok(NoiseFactors {
            em_amp,
            joint: None,
            phi: Mat6::identity() + model.drift * dt,
        }),
        Integrator::Exact => {
            let (phi, q) = crate::dynamics::discretize(model, dt);
            // cross covariance C = (int_0^dt e^{A s} ds) D of the state
            // increment with the integrated input noise
            let a_inv = model
                .drift
                .try_inverse()
                .ok_or(SimError::NoiseFactorization)?;
            let c = a_inv * (phi - Mat6::identity()) * model.diffusion;
            let mut joint = nalgebra::SMatrix::<f64, 12, 12>::zeros();
            for i in 0..6 {
                for j in 0..6 {
                    joint[(i, j)] = q[(i, j)];
                    joint[(i, j + 6)] = c[(i, j)];
                    joint[(i + 6, j)] = c[(j, i)];
                    joint[(i + 6, j + 6)] = if i == j { d[i] * dt } else { 0.0 };
                }
            }
            // symmetrize and factor; jitter once if round-off bites
            let joint = (joint + joint.transpose()) * 0.5;
            let chol = nalgebra::linalg::Cholesky::new(joint)
                .or_else(|| {
                    let eps = 1e-14 * joint.diagonal().max();
                    nalgebra::linalg::Cholesky::new(
                        joint + nalgebra::SMatrix::<f64, 12, 12>::identity() * eps,
                    )
                })
                .ok_or(SimError::NoiseFactorization)?;
            Ok(NoiseFactors {
                em_amp,
                joint: Some(chol.l()),
                phi,
            })
        }
    }
}

fn kernel_block(spec: &FilterSpec, t: f64) -> nalgebra::Matrix2<f64> {
    let f = filter_time(t, spec);
    nalgebra::Matrix2::new(f.re, -f.im, f.im, f.re)
}

fn run_trajectory(
    model: &LinearModel,
    filters: &FilterPair,
    settings: &SimSettings,
    plan: &StepPlan,
    factors: &NoiseFactors,
    traj: u64,
) -> TrajectorySample {
    let mut rng = trajectory_rng(settings.seed, traj);
    let dt = settings.dt;
    let k = model.decay_rates();
    let sqrt2k = [(2.0 * k[2]).sqrt(), (2.0 * k[4]).sqrt()];
    let mut u = Vec6::zeros();
    let mut acc = [nalgebra::Vector2::<f64>::zeros(); 2];

    let mut dw = Vec6::zeros();
    let mut direct = Vec6::zeros();
    for step in 0..plan.n_total {
        match settings.integrator {
            Integrator::EulerMaruyama => {
                for i in 0..6 {
                    let z: f64 = rng.sample(StandardNormal);
                    dw[i] = factors.em_amp[i] * z;
                    direct[i] = dw[i];
                }
            }
            Integrator::Exact => {
                let l = factors.joint.as_ref().expect("factor present in exact mode");
                let mut z = nalgebra::SVector::<f64, 12>::zeros();
                for i in 0..12 {
                    z[i] = rng.sample(StandardNormal);
                }
                let wz = l * z;
                for i in 0..6 {
                    dw[i] = wz[i];
                    direct[i] = wz[i + 6];
                }
            }
        }

        // output sample at the left endpoint of the step, reusing the same
        // noise increments as the input-noise subtraction
        let t_kernel = plan.t_final - step as f64 * dt;
        for (ch, (start, base)) in plan.window_start.iter().zip([2usize, 4usize]).enumerate() {
            if step >= *start {
                let spec = if ch == 0 { &filters.a2 } else { &filters.b1 };
                let block = kernel_block(spec, t_kernel);
                let y = nalgebra::Vector2::new(
                    sqrt2k[ch] * u[base] * dt - direct[base] / sqrt2k[ch],
                    sqrt2k[ch] * u[base + 1] * dt - direct[base + 1] / sqrt2k[ch],
                );
                acc[ch] += block * y;
            }
        }

        u = factors.phi * u + dw;
    }

    TrajectorySample {
        output: [acc[0][0], acc[0][1], acc[1][0], acc[1][1]],
        magnon: [u[0], u[1]],
    }
}

/// Integrate `n_traj` trajectories and return one filtered-output sample
/// per trajectory (plus final magnon quadratures). Trajectories run in
/// parallel; results are ordered by trajectory index regardless of the
/// thread count.
pub fn simulate_output_samples(
    model: &LinearModel,
    filters: &FilterPair,
    settings: &SimSettings,
) -> Result<Vec<TrajectorySample>, SimError> {
    settings.validate(model)?;
    let plan = plan_steps(filters, settings)?;
    let factors = noise_factors(model, settings)?;
    let samples: Vec<TrajectorySample> = (0..settings.n_traj as u64)
        .into_par_iter()
        .map(|traj| run_trajectory(model, filters, settings, &plan, &factors, traj))
        .collect();
    Ok(samples)
}

/// Sample covariance of the filtered-output quadratures with jackknife
/// standard errors over trajectories.
pub fn estimate_cm(samples: &[[f64; 4]]) -> Result<(CovMat, Matrix4<f64>), SimError> {
    let n = samples.len();
    if n < 2 {
        return Err(SimError::TooFewSamples(n));
    }
    let (cov, loo) = covariance_and_loo(samples);
    let se = jackknife_se_matrix(&loo);
    let cm = CovMat::new(
        nalgebra::DMatrix::from_fn(4, 4, |i, j| cov[(i, j)]),
        ModeOrdering::A2B1,
    )?;
    Ok((cm, se))
}

/// Monte-Carlo estimate of the output covariance matrix and E_N, with
/// jackknife standard errors for every entry and for E_N.
#[derive(Debug, Clone)]
pub struct McEstimate {
    pub cm: CovMat,
    pub cm_se: Matrix4<f64>,
    pub e_n: f64,
    pub e_n_se: f64,
}

pub fn estimate_entanglement(samples: &[[f64; 4]]) -> Result<McEstimate, SimError> {
    let n = samples.len();
    if n < 2 {
        return Err(SimError::TooFewSamples(n));
    }
    let (cov, loo) = covariance_and_loo(samples);
    let cm_se = jackknife_se_matrix(&loo);
    let cm = CovMat::new(
        nalgebra::DMatrix::from_fn(4, 4, |i, j| cov[(i, j)]),
        ModeOrdering::A2B1,
    )?;
    let e_n = log_negativity(&cm)?;
    let e_n_loo: Vec<f64> = loo
        .iter()
        .map(|c| {
            CovMat::new(nalgebra::DMatrix::from_fn(4, 4, |i, j| c[(i, j)]), ModeOrdering::A2B1)
                .ok()
                .and_then(|cm_i| log_negativity(&cm_i).ok())
                .unwrap_or(e_n)
        })
        .collect();
    let e_n_se = jackknife_se_scalar(&e_n_loo);
    Ok(McEstimate {
        cm,
        cm_se,
        e_n,
        e_n_se,
    })
}

fn covariance_and_loo(samples: &[[f64; 4]]) -> (Matrix4<f64>, Vec<Matrix4<f64>>) {
    let n = samples.len();
    let nf = n as f64;
    let mut s1 = nalgebra::Vector4::<f64>::zeros();
    let mut s2 = Matrix4::<f64>::zeros();
    for x in samples {
        let v = nalgebra::Vector4::from_column_slice(x);
        s1 += v;
        s2 += v * v.transpose();
    }
    let mean = s1 / nf;
    let cov = (s2 - mean * s1.transpose()) / (nf - 1.0);
    let cov = (cov + cov.transpose()) * 0.5;

    let mut loo = Vec::with_capacity(n);
    if n >= 3 {
        for x in samples {
            let v = nalgebra::Vector4::from_column_slice(x);
            let s1_i = s1 - v;
            let mean_i = s1_i / (nf - 1.0);
            let c = (s2 - v * v.transpose() - mean_i * s1_i.transpose()) / (nf - 2.0);
            loo.push((c + c.transpose()) * 0.5);
        }
    }
    (cov, loo)
}

fn jackknife_se_matrix(loo: &[Matrix4<f64>]) -> Matrix4<f64> {
    let n = loo.len();
    if n < 2 {
        return Matrix4::zeros();
    }
    let nf = n as f64;
    let mean = loo.iter().sum::<Matrix4<f64>>() / nf;
    let mut ss = Matrix4::<f64>::zeros();
    for c in loo {
        let d = c - mean;
        ss += d.component_mul(&d);
    }
    ss.map(|v| ((nf - 1.0) / nf * v).sqrt())
}

fn jackknife_se_scalar(loo: &[f64]) -> f64 {
    let n = loo.len();
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let mean = loo.iter().sum::<f64>() / nf;
    let ss: f64 = loo.iter().map(|v| (v - mean) * (v - mean)).sum();
    ((nf - 1.0) / nf * ss).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;

    fn model_with(g_a_mhz: f64, g_b_mhz: f64, t: f64) -> LinearModel {
        let mut p = SystemParams::baseline();
        p.g_a = crate::constants::TWO_PI * g_a_mhz * 1e6;
        p.g_b = crate::constants::TWO_PI * g_b_mhz * 1e6;
        p.temperature = t;
        LinearModel::new(&p).unwrap()
    }

    #[test]
    fn settings_guard_rejects_coarse_dt() {
        let model = model_with(10.0, 6.5, 0.1);
        let mut s = SimSettings::auto(&model, 10, 1).unwrap();
        s.dt *= 10.0;
        assert!(matches!(
            s.validate(&model),
            Err(SimError::InvalidSettings(_))
        ));
    }

    #[test]
    fn settings_guard_rejects_short_burn_in() {
        let model = model_with(10.0, 6.5, 0.1);
        let mut s = SimSettings::auto(&model, 10, 1).unwrap();
        s.t_relax /= 100.0;
        assert!(matches!(
            s.validate(&model),
            Err(SimError::InvalidSettings(_))
        ));
    }

    #[test]
    fn settings_guard_rejects_single_trajectory() {
        let model = model_with(10.0, 6.5, 0.1);
        let mut s = SimSettings::auto(&model, 10, 1).unwrap();
        s.n_traj = 1;
        assert!(s.validate(&model).is_err());
    }

    #[test]
    fn unstable_model_is_rejected() {
        let model = model_with(0.0, 11.0, 0.1);
        let filters = FilterPair::shared(1e-6).unwrap();
        let s = SimSettings {
            dt: 5e-11,
            t_relax: 1e-5,
            n_traj: 4,
            seed: 7,
            integrator: Integrator::EulerMaruyama,
        };
        assert!(matches!(
            simulate_output_samples(&model, &filters, &s),
            Err(SimError::Unstable { .. })
        ));
    }

    #[test]
    fn identical_seed_bit_identical_samples() {
        let model = model_with(10.0, 6.5, 0.1);
        let filters = FilterPair::shared(2e-7).unwrap();
        let mut s = SimSettings::auto(&model, 8, 42).unwrap();
        s.t_relax = s.t_relax.max(10.0 / model.stability().unwrap().abscissa.abs());
        let a = simulate_output_samples(&model, &filters, &s).unwrap();
        let b = simulate_output_samples(&model, &filters, &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn vacuum_output_statistics() {
        // G = 0, T = 0: filtered outputs are vacuum, variance 1/2
        let model = model_with(0.0, 0.0, 0.0);
        let filters = FilterPair::shared(2e-7).unwrap();
        let mut s = SimSettings::auto(&model, 5000, 3).unwrap();
        // decoupled: abscissa is kappa_m; shorten burn-in to its bound
        s.t_relax = 10.0 / model.stability().unwrap().abscissa.abs();
        let samples = simulate_output_samples(&model, &filters, &s).unwrap();
        let out: Vec<[f64; 4]> = samples.iter().map(|t| t.output).collect();
        let (cm, se) = estimate_cm(&out).unwrap();
        for i in 0..4 {
            let v = cm.matrix()[(i, i)];
            let tol = 3.0 * se[(i, i)] + 0.05 * 0.5; // 3 sigma + O(dt) bias head-room
            assert!((v - 0.5).abs() < tol, "var[{i}] = {v}, tol = {tol}");
        }
    }

    #[test]
    fn magnon_variance_matches_lyapunov() {
        let model = model_with(10.0, 6.5, 0.1);
        let filters = FilterPair::shared(2e-7).unwrap();
        let s = SimSettings::auto(&model, 4000, 11).unwrap();
        let samples = simulate_output_samples(&model, &filters, &s).unwrap();
        let lyap = crate::dynamics::solve_lyapunov(&model).unwrap();
        let expect = lyap.matrix()[(0, 0)];
        let n = samples.len() as f64;
        let var: f64 =
            samples.iter().map(|t| t.magnon[0] * t.magnon[0]).sum::<f64>() / (n - 1.0);
        // variance-of-variance for Gaussian samples: var * sqrt(2/n)
        let sigma = expect * (2.0 / n).sqrt();
        assert!(
            (var - expect).abs() < 3.0 * sigma + 0.05 * expect,
            "magnon var {var} vs {expect} (sigma {sigma})"
        );
    }

    #[test]
    fn estimate_cm_constant_samples() {
        let samples = vec![[1.0, 2.0, 3.0, 4.0]; 50];
        let (cm, se) = estimate_cm(&samples).unwrap();
        assert_eq!(cm.matrix().abs().max(), 0.0);
        assert_eq!(se.abs().max(), 0.0);
    }

    #[test]
    fn estimate_cm_iid_normal_is_identity() {
        let mut rng = trajectory_rng(123, 0);
        let n = 100_000;
        let samples: Vec<[f64; 4]> = (0..n)
            .map(|_| {
                [
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                ]
            })
            .collect();
        let (cm, se) = estimate_cm(&samples).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                let tol = 5.0 * se[(i, j)].max(1e-4);
                assert!(
                    (cm.matrix()[(i, j)] - expect).abs() < tol,
                    "({i},{j}): {} vs {expect}",
                    cm.matrix()[(i, j)]
                );
            }
        }
    }

    #[test]
    fn estimate_cm_reorder_invariant() {
        let mut rng = trajectory_rng(5, 9);
        let mut samples: Vec<[f64; 4]> = (0..200)
            .map(|_| {
                [
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                ]
            })
            .collect();
        let (a, _) = estimate_cm(&samples).unwrap();
        samples.reverse();
        let (b, _) = estimate_cm(&samples).unwrap();
        assert!((a.matrix() - b.matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn estimate_cm_rejects_too_few() {
        assert!(matches!(
            estimate_cm(&[[0.0; 4]]),
            Err(SimError::TooFewSamples(1))
        ));
    }

    #[test]
    fn exact_mode_agrees_with_euler_maruyama() {
        let model = model_with(10.0, 6.5, 0.1);
        let filters = FilterPair::shared(2e-7).unwrap();
        let mut s = SimSettings::auto(&model, 1500, 17).unwrap();
        let em_samples = simulate_output_samples(&model, &filters, &s).unwrap();
        s.integrator = Integrator::Exact;
        let ex_samples = simulate_output_samples(&model, &filters, &s).unwrap();
        let em: Vec<[f64; 4]> = em_samples.iter().map(|t| t.output).collect();
        let ex: Vec<[f64; 4]> = ex_samples.iter().map(|t| t.output).collect();
        let (cm_em, se_em) = estimate_cm(&em).unwrap();
        let (cm_ex, se_ex) = estimate_cm(&ex).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let d = (cm_em.matrix()[(i, j)] - cm_ex.matrix()[(i, j)]).abs();
                let tol = 4.0 * (se_em[(i, j)] + se_ex[(i, j)]).max(0.02);
                assert!(d < tol, "({i},{j}): diff {d} tol {tol}");
            }
        }
    }
}
