//! Gaussian-state measures: symplectic eigenvalues, logarithmic negativity
//! of a two-mode covariance matrix, and the uncertainty-principle check.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::covariance::{symplectic_form, CovMat};

#[derive(Debug, Error)]
pub enum EntanglementError {
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("log-negativity needs a 4x4 two-mode covariance matrix, got {0}x{0}")]
    NotTwoMode(usize),
    #[error("Sigma^2 - 4 det V = {0:.3e} is negative beyond round-off; unphysical input")]
    UnphysicalDiscriminant(f64),
    #[error("eigenvalue computation failed")]
    EigenFailure,
}

/// Symplectic eigenvalues of a covariance matrix: the moduli of the
/// eigenvalues of i Omega V, deduplicated into n ascending values.
/// Physical states have all values >= 1/2 in this convention.
pub fn symplectic_eigenvalues(v: &CovMat) -> Result<Vec<f64>, EntanglementError> {
    let m = v.matrix();
    if m.clone().cholesky().is_none() {
        return Err(EntanglementError::NotPositiveDefinite);
    }
    let omega = symplectic_form(v.n_modes());
    // eig(i Omega V) = i * eig(Omega V); moduli coincide
    let ov = &omega * m;
    let eig = ov.complex_eigenvalues();
    let mut moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    // eigenvalues come in +/- pairs; average each pair
    let nu = (0..v.n_modes())
        .map(|k| 0.5 * (moduli[2 * k] + moduli[2 * k + 1]))
        .collect();
    Ok(nu)
}

/// Smallest symplectic eigenvalue of the partially transposed two-mode
/// state, from the block-determinant formula:
/// eta = 2^{-1/2} sqrt(Sigma - sqrt(Sigma^2 - 4 det V4)) with
/// Sigma = det V_A + det V_B - 2 det V_AB (no absolute value on det V_AB).
pub fn eta_minus(v4: &CovMat) -> Result<f64, EntanglementError> {
    let m = v4.matrix();
    if m.nrows() != 4 {
        return Err(EntanglementError::NotTwoMode(m.nrows()));
    }
    let det2 = |r: usize, c: usize| -> f64 {
        m[(r, c)] * m[(r + 1, c + 1)] - m[(r, c + 1)] * m[(r + 1, c)]
    };
    let det_a = det2(0, 0);
    let det_b = det2(2, 2);
    let det_ab = det2(0, 2);
    let det_v = m.clone().lu().determinant();
    let sigma = det_a + det_b - 2.0 * det_ab;
    let mut disc = sigma * sigma - 4.0 * det_v;
    if disc < 0.0 {
        // boundary (pure) states sit exactly on disc = 0; absorb round-off
        if disc >= -1e-12 {
            disc = 0.0;
        } else {
            return Err(EntanglementError::UnphysicalDiscriminant(disc));
        }
    }
    let inner = sigma - disc.sqrt();
    if inner <= 0.0 {
        return Err(EntanglementError::UnphysicalDiscriminant(inner));
    }
    Ok((inner * 0.5).sqrt())
}

/// Logarithmic negativity E_N = max(0, -ln 2 eta^-) of a two-mode state.
pub fn log_negativity(v4: &CovMat) -> Result<f64, EntanglementError> {
    let eta = eta_minus(v4)?;
    Ok((-(2.0 * eta).ln()).max(0.0))
}

/// Independent route to E_N: apply the partial transpose explicitly
/// (Y-quadrature sign flip on the second mode) and diagonalize
/// symplectically. Used to cross-check the determinant formula.
pub fn log_negativity_via_ptranspose(v4: &CovMat) -> Result<f64, EntanglementError> {
    let m = v4.matrix();
    if m.nrows() != 4 {
        return Err(EntanglementError::NotTwoMode(m.nrows()));
    }
    let mut pt = m.clone();
    for i in 0..4 {
        pt[(i, 3)] = -pt[(i, 3)];
        pt[(3, i)] = -pt[(3, i)];
    }
    let ptc = CovMat::new(pt, v4.ordering()).map_err(|_| EntanglementError::EigenFailure)?;
    let nu = symplectic_eigenvalues(&ptc)?;
    let nu_min = nu[0];
    Ok((-(2.0 * nu_min).ln()).max(0.0))
}

/// Uncertainty-principle check: true iff the minimum eigenvalue of
/// V + (i/2) Omega is at least -tolerance. Returns (verdict, margin).
///
/// The Hermitian matrix V + (i/2) Omega is diagonalized through its real
/// symmetric embedding [[V, -Omega/2], [Omega/2, V]], whose spectrum is the
/// doubled spectrum of the complex form.
pub fn physicality(v: &CovMat, tolerance: f64) -> (bool, f64) {
    let m = v.matrix();
    let n = m.nrows();
    let omega = symplectic_form(v.n_modes());
    let mut emb = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            emb[(i, j)] = m[(i, j)];
            emb[(i + n, j + n)] = m[(i, j)];
            emb[(i, j + n)] = -0.5 * omega[(i, j)];
            emb[(i + n, j)] = 0.5 * omega[(i, j)];
        }
    }
    let eig = emb.symmetric_eigen();
    let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    (min_eig >= -tolerance, min_eig)
}

/// Covariance matrix of a two-mode squeezed vacuum with squeezing r:
/// V_A = V_B = cosh(2r)/2 I, V_AB = sinh(2r)/2 diag(1, -1). E_N = 2r.
pub fn two_mode_squeezed_vacuum(r: f64) -> CovMat {
    let c = (2.0 * r).cosh() / 2.0;
    let s = (2.0 * r).sinh() / 2.0;
    let m = DMatrix::from_row_slice(
        4,
        4,
        &[
            c, 0.0, s, 0.0, //
            0.0, c, 0.0, -s, //
            s, 0.0, c, 0.0, //
            0.0, -s, 0.0, c,
        ],
    );
    CovMat::new(m, crate::covariance::ModeOrdering::A2B1).expect("TMSV CM is symmetric")
}
