//! Covariance matrices of Gaussian states in the vacuum-variance-1/2
//! convention (X = (a + a^dag)/sqrt(2), so <X^2> = 1/2 in vacuum).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CovError {
    #[error("covariance matrix must be 4x4 or 6x6, got {0}x{0}")]
    BadDimension(usize),
    #[error("matrix asymmetry {0:.3e} exceeds 1e-10")]
    Asymmetric(f64),
    #[error("ordering {0:?} has {1} modes but matrix is {2}x{2}")]
    OrderingMismatch(ModeOrdering, usize, usize),
    #[error("unknown mode pair '{0}' (expected a2-b1, m-a2 or m-b1)")]
    UnknownPair(String),
}

/// Which quadratures the rows/columns refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeOrdering {
    /// (X_m, Y_m, X_A2, Y_A2, X_B1, Y_B1) - full three-mode state.
    MagnonA2B1,
    /// (X_A2, Y_A2, X_B1, Y_B1) - the two filtered output modes.
    A2B1,
    /// (X_m, Y_m, X_A2, Y_A2).
    MagnonA2,
    /// (X_m, Y_m, X_B1, Y_B1).
    MagnonB1,
}

impl ModeOrdering {
    pub fn n_modes(self) -> usize {
        match self {
            ModeOrdering::MagnonA2B1 => 3,
            _ => 2,
        }
    }
}

/// A bipartition of the three-mode state, selecting a 4x4 sub-matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModePair {
    /// The two filtered output modes (the default bipartition).
    #[default]
    A2B1,
    MagnonA2,
    MagnonB1,
}

impl ModePair {
    /// Row/column indices of the pair inside the 6x6 ordering.
    pub fn indices(self) -> [usize; 4] {
        match self {
            ModePair::A2B1 => [2, 3, 4, 5],
            ModePair::MagnonA2 => [0, 1, 2, 3],
            ModePair::MagnonB1 => [0, 1, 4, 5],
        }
    }

    pub fn ordering(self) -> ModeOrdering {
        match self {
            ModePair::A2B1 => ModeOrdering::A2B1,
            ModePair::MagnonA2 => ModeOrdering::MagnonA2,
            ModePair::MagnonB1 => ModeOrdering::MagnonB1,
        }
    }
}

impl std::str::FromStr for ModePair {
    type Err = CovError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "a2-b1" | "a2b1" | "out" => Ok(ModePair::A2B1),
            "m-a2" | "ma2" => Ok(ModePair::MagnonA2),
            "m-b1" | "mb1" => Ok(ModePair::MagnonB1),
            other => Err(CovError::UnknownPair(other.to_owned())),
        }
    }
}

/// Real symmetric covariance matrix (4x4 or 6x6), symmetrized on
/// construction; inputs with asymmetry above 1e-10 are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMat {
    mat: DMatrix<f64>,
    ordering: ModeOrdering,
}

impl CovMat {
    pub fn new(mat: DMatrix<f64>, ordering: ModeOrdering) -> Result<Self, CovError> {
        let n = mat.nrows();
        if mat.ncols() != n || (n != 4 && n != 6) {
            return Err(CovError::BadDimension(n.max(mat.ncols())));
        }
        if 2 * ordering.n_modes() != n {
            return Err(CovError::OrderingMismatch(ordering, ordering.n_modes(), n));
        }
        let asym = (&mat - mat.transpose()).abs().max();
        if asym > 1e-10 {
            return Err(CovError::Asymmetric(asym));
        }
        let sym = (&mat + mat.transpose()) * 0.5;
        Ok(Self { mat: sym, ordering })
    }

    pub fn from_mat6(mat: crate::Mat6, ordering: ModeOrdering) -> Result<Self, CovError> {
        Self::new(
            DMatrix::from_fn(6, 6, |i, j| mat[(i, j)]),
            ordering,
        )
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn ordering(&self) -> ModeOrdering {
        self.ordering
    }

    pub fn n_modes(&self) -> usize {
        self.ordering.n_modes()
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }
}

/// The 2n x 2n symplectic form: block-diagonal copies of [[0, 1], [-1, 0]].
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symplectic_form_properties() {
        for n in [1, 2, 3] {
            let omega = symplectic_form(n);
            assert_eq!((&omega + omega.transpose()).abs().max(), 0.0);
            let sq = &omega * &omega;
            let minus_id = -DMatrix::<f64>::identity(2 * n, 2 * n);
            assert_eq!(sq, minus_id);
        }
    }

    #[test]
    fn construction_symmetrizes() {
        let mut m = DMatrix::<f64>::identity(4, 4);
        m[(0, 1)] = 1e-12;
        let cov = CovMat::new(m, ModeOrdering::A2B1).unwrap();
        assert_eq!(cov.matrix()[(0, 1)], cov.matrix()[(1, 0)]);
    }

    #[test]
    fn construction_rejects_asymmetric() {
        let mut m = DMatrix::<f64>::identity(6, 6);
        m[(0, 1)] = 1e-3;
        assert!(matches!(
            CovMat::new(m, ModeOrdering::MagnonA2B1),
            Err(CovError::Asymmetric(_))
        ));
    }

    #[test]
    fn construction_rejects_bad_sizes() {
        let m = DMatrix::<f64>::identity(5, 5);
        assert!(matches!(
            CovMat::new(m, ModeOrdering::MagnonA2B1),
            Err(CovError::BadDimension(5))
        ));
        let m = DMatrix::<f64>::identity(4, 4);
        assert!(CovMat::new(m, ModeOrdering::MagnonA2B1).is_err());
    }

    #[test]
    fn pair_parsing() {
        assert_eq!("a2-b1".parse::<ModePair>().unwrap(), ModePair::A2B1);
        assert_eq!("m-a2".parse::<ModePair>().unwrap(), ModePair::MagnonA2);
        assert!("bogus".parse::<ModePair>().is_err());
    }
}
