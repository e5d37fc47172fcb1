//! Linearized quadrature dynamics: drift and diffusion matrices, stability,
//! and the continuous Lyapunov equation for the intracavity covariance
//! matrix (used as an internal oracle for the spectral route).

use nalgebra::DMatrix;
use thiserror::Error;

use crate::covariance::{CovMat, ModeOrdering};
use crate::params::{thermal_occupation, SystemParams};
use crate::Mat6;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("drift matrix is not stable (spectral abscissa {abscissa:.6e} rad/s)")]
    Unstable { abscissa: f64 },
    #[error("eigenvalue iteration failed to converge")]
    EigenFailure,
    #[error("Lyapunov back-substitution hit a singular block")]
    SingularBlock,
    #[error(transparent)]
    Params(#[from] crate::params::ParamsError),
    #[error(transparent)]
    Cov(#[from] crate::covariance::CovError),
}

/// Drift matrix A and diffusion matrix D in the quadrature ordering
/// (X_m, Y_m, X_a2, Y_a2, X_b1, Y_b1).
///
/// The quadrature vector obeys du = A u dt + n(t) dt with white noise of
/// symmetrized covariance <n_i(t) n_k(t')> = D_ik delta(t - t').
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub drift: Mat6,
    pub diffusion: Mat6,
}

impl LinearModel {
    pub fn new(params: &SystemParams) -> Result<Self, DynamicsError> {
        Ok(Self {
            drift: build_drift(params),
            diffusion: build_diffusion(params)?,
        })
    }

    /// Decay rates per quadrature, read off the drift diagonal.
    pub fn decay_rates(&self) -> crate::Vec6 {
        -self.drift.diagonal()
    }

    /// Stability of the drift, with the marginal flag set for points whose
    /// spectral abscissa lies within 1e-6 * kappa_m of zero (near-threshold
    /// integrals converge slowly; callers should surface the flag).
    pub fn stability(&self) -> Result<Stability, DynamicsError> {
        let s = is_stable(&self.drift)?;
        let kappa_m = -self.drift[(0, 0)];
        let marginal = s.stable && s.abscissa > -1e-6 * kappa_m;
        Ok(Stability { marginal, ..s })
    }
}

/// Stability verdict for a drift matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    /// True iff every eigenvalue has a strictly negative real part.
    pub stable: bool,
    /// Largest eigenvalue real part (rad/s).
    pub abscissa: f64,
    /// Stable but within 1e-6 * kappa_m of the threshold.
    pub marginal: bool,
}

/// Drift matrix of the linearized three-mode dynamics.
///
/// Diagonal entries are the negative decay rates; the state-swap coupling
/// G_a connects (X_m, Y_a2)/(Y_m, X_a2) and the two-mode-squeezing coupling
/// G_b connects (X_m, Y_b1)/(Y_m, X_b1) with the squeezing sign pattern.
pub fn build_drift(params: &SystemParams) -> Mat6 {
    let (km, ka, kb) = (params.kappa_m, params.kappa_a2, params.kappa_b1);
    let (ga, gb) = (params.g_a, params.g_b);
    Mat6::from_row_slice(&[
        -km, 0.0, 0.0, ga, 0.0, -gb, //
        0.0, -km, -ga, 0.0, -gb, 0.0, //
        0.0, ga, -ka, 0.0, 0.0, 0.0, //
        -ga, 0.0, 0.0, -ka, 0.0, 0.0, //
        0.0, -gb, 0.0, 0.0, -kb, 0.0, //
        -gb, 0.0, 0.0, 0.0, 0.0, -kb,
    ])
}

/// Diagonal diffusion matrix with entries kappa_j (2 N_j + 1) per
/// quadrature, N_j the thermal occupation of mode j at the bath
/// temperature. Optical occupations are computed from the optical
/// frequencies (and hence underflow to zero at laboratory temperatures).
pub fn build_diffusion(params: &SystemParams) -> Result<Mat6, DynamicsError> {
    let t = params.temperature;
    let n_m = thermal_occupation(params.omega_m, t)?;
    let n_a = thermal_occupation(params.omega_a2, t)?;
    let n_b = thermal_occupation(params.omega_b1, t)?;
    let dm = params.kappa_m * (2.0 * n_m + 1.0);
    let da = params.kappa_a2 * (2.0 * n_a + 1.0);
    let db = params.kappa_b1 * (2.0 * n_b + 1.0);
    Ok(Mat6::from_diagonal(&crate::Vec6::new(dm, dm, da, da, db, db)))
}

/// Stability test: true iff the largest eigenvalue real part (spectral
/// abscissa) is strictly negative. Returns the abscissa alongside.
pub fn is_stable(drift: &Mat6) -> Result<Stability, DynamicsError> {
    let schur = nalgebra::linalg::Schur::try_new(*drift, f64::EPSILON, 10_000)
        .ok_or(DynamicsError::EigenFailure)?;
    let abscissa = schur
        .complex_eigenvalues()
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Stability {
        stable: abscissa < 0.0,
        abscissa,
        marginal: false,
    })
}

/// Solve A V + V A^T + D = 0 for the stationary intracavity covariance
/// matrix by Bartels-Stewart: reduce A to real Schur form, back-substitute
/// over the quasi-triangular blocks, transform back.
pub fn solve_lyapunov(model: &LinearModel) -> Result<CovMat, DynamicsError> {
    let st = is_stable(&model.drift)?;
    if !st.stable {
        return Err(DynamicsError::Unstable {
            abscissa: st.abscissa,
        });
    }
    let schur = nalgebra::linalg::Schur::try_new(model.drift, f64::EPSILON, 10_000)
        .ok_or(DynamicsError::EigenFailure)?;
    let (q, t) = schur.unpack();

    // transformed equation: T W + W T^T + C = 0 with C = Q^T D Q
    let c = q.transpose() * model.diffusion * q;
    let w = solve_quasi_triangular_lyapunov(&t, &c)?;
    let v = q * w * q.transpose();
    let v_sym = (v + v.transpose()) * 0.5;
    Ok(CovMat::from_mat6(v_sym, ModeOrdering::MagnonA2B1)?)
}

/// Block back-substitution for T W + W T^T = -C with T quasi-upper
/// triangular (1x1 and 2x2 diagonal blocks from the real Schur form).
fn solve_quasi_triangular_lyapunov(t: &Mat6, c: &Mat6) -> Result<Mat6, DynamicsError> {
    let n = 6;
    // block boundaries: a 2x2 block starts at i when T[i+1, i] != 0
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        let size = if i + 1 < n && t[(i + 1, i)] != 0.0 { 2 } else { 1 };
        blocks.push((i, size));
        i += size;
    }

    let mut w = Mat6::zeros();
    for (bj, &(j0, nj)) in blocks.iter().enumerate().rev() {
        for (bi, &(i0, ni)) in blocks.iter().enumerate().rev() {
            // rhs = -C_IJ - sum_{K>I} T_IK W_KJ - sum_{L>J} W_IL T_JL^T
            let mut rhs = DMatrix::<f64>::zeros(ni, nj);
            for r in 0..ni {
                for s in 0..nj {
                    rhs[(r, s)] = -c[(i0 + r, j0 + s)];
                }
            }
            for &(k0, nk) in &blocks[bi + 1..] {
                for r in 0..ni {
                    for s in 0..nj {
                        let mut acc = 0.0;
                        for k in 0..nk {
                            acc += t[(i0 + r, k0 + k)] * w[(k0 + k, j0 + s)];
                        }
                        rhs[(r, s)] -= acc;
                    }
                }
            }
            for &(l0, nl) in &blocks[bj + 1..] {
                for r in 0..ni {
                    for s in 0..nj {
                        let mut acc = 0.0;
                        for l in 0..nl {
                            acc += w[(i0 + r, l0 + l)] * t[(j0 + s, l0 + l)];
                        }
                        rhs[(r, s)] -= acc;
                    }
                }
            }

            // solve T_II X + X T_JJ^T = rhs via the Kronecker form
            // (I (x) T_II + T_JJ (x) I) vec(X) = vec(rhs)
            let m = ni * nj;
            let mut kron = DMatrix::<f64>::zeros(m, m);
            for s in 0..nj {
                for r in 0..ni {
                    let row = s * ni + r;
                    for rp in 0..ni {
                        kron[(row, s * ni + rp)] += t[(i0 + r, i0 + rp)];
                    }
                    for sp in 0..nj {
                        kron[(row, sp * ni + r)] += t[(j0 + s, j0 + sp)];
                    }
                }
            }
            let rhs_vec =
                nalgebra::DVector::from_fn(m, |idx, _| rhs[(idx % ni, idx / ni)]);
            let sol = kron
                .lu()
                .solve(&rhs_vec)
                .ok_or(DynamicsError::SingularBlock)?;
            for s in 0..nj {
                for r in 0..ni {
                    w[(i0 + r, j0 + s)] = sol[s * ni + r];
                }
            }
        }
    }
    Ok(w)
}

/// Exact discrete-time propagation of the model over a step dt:
/// state transition Phi = exp(A dt) and process-noise covariance
/// Q = int_0^dt exp(A s) D exp(A^T s) ds, computed with Van Loan's
/// block-exponential construction.
pub fn discretize(model: &LinearModel, dt: f64) -> (Mat6, Mat6) {
    // H = [[-A, D], [0, A^T]] * dt; exp(H) = [[E11, E12], [0, E22]]
    // gives Phi = E22^T and Q = Phi * E12.
    let mut h = nalgebra::SMatrix::<f64, 12, 12>::zeros();
    for i in 0..6 {
        for j in 0..6 {
            h[(i, j)] = -model.drift[(i, j)] * dt;
            h[(i, j + 6)] = model.diffusion[(i, j)] * dt;
            h[(i + 6, j + 6)] = model.drift[(j, i)] * dt;
        }
    }
    let e = h.exp();
    let e12 = e.fixed_view::<6, 6>(0, 6).into_owned();
    let e22 = e.fixed_view::<6, 6>(6, 6).into_owned();
    let phi = e22.transpose();
    let q = phi * e12;
    let q_sym = (q + q.transpose()) * 0.5;
    (phi, q_sym)
}

/// Two-mode-squeezing stability threshold: with G_a = 0 the system
/// destabilizes at G_b = sqrt(kappa_m kappa_b1).
pub fn tms_threshold(kappa_m: f64, kappa_b1: f64) -> f64 {
    (kappa_m * kappa_b1).sqrt()
}
