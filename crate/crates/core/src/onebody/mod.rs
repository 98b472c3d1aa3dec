//! The one-body Jacobi operator `(h psi)_x = psi_{x+1} + psi_{x-1} + h_x psi_x`
//! on sites `1..=N` with `psi_0 = psi_{N+1} = 0`, and everything computed from it.

mod eigen;
mod propagator;
mod resolvent;
mod transfer;

pub use eigen::{eigensystem, eigenvalues, EigenSystem};
pub use propagator::{
    amplitude_row, ballistic_envelope, min_safe_length, outside_probability,
    outside_profile, propagator, suffix_sums, tail_sum, tail_sum_profile, AmplitudeRow,
    Scale,
};
pub use resolvent::{
    dunford_amplitude, dunford_amplitude_converged, resolvent_element, sturm_count,
    ContourRule, ContourSpec,
};
pub use transfer::{transfer_matrix, TransferMatrix};
pub(crate) use transfer::transfer_matrix_from_values;

use serde::{Deserialize, Serialize};

use crate::potentials::Field;

/// Finite Jacobi matrix with unit off-diagonal and Dirichlet ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneBodyOperator {
    diagonal: Vec<f64>,
}

pub fn build_operator(field: &Field) -> OneBodyOperator {
    OneBodyOperator::new(field.values.clone())
}

impl OneBodyOperator {
    /// # Panics
    /// If `diagonal` is empty.
    pub fn new(diagonal: Vec<f64>) -> Self {
        assert!(!diagonal.is_empty(), "operator needs at least one site");
        Self { diagonal }
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn max_abs_potential(&self) -> f64 {
        self.diagonal.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Gershgorin hull `[min h - 2, max h + 2]`.
    pub fn spectral_hull(&self) -> (f64, f64) {
        let lo = self.diagonal.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.diagonal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo - 2.0, hi + 2.0)
    }

    pub fn apply(&self, psi: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(psi.len(), n);
        (0..n)
            .map(|i| {
                let mut v = self.diagonal[i] * psi[i];
                if i > 0 {
                    v += psi[i - 1];
                }
                if i + 1 < n {
                    v += psi[i + 1];
                }
                v
            })
            .collect()
    }

    /// Row-major dense copy, for small-N checks.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diagonal[i];
            if i + 1 < n {
                m[i][i + 1] = 1.0;
                m[i + 1][i] = 1.0;
            }
        }
        m
    }
}
