use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::Field;

/// Ordered product `A_b ... A_a` of one-step matrices `A_x = [[E - h_x, -1], [1, 0]]`.
///
/// Maps `(psi_a, psi_{a-1})` to `(psi_{b+1}, psi_b)` for any solution of
/// `psi_{x+1} + psi_{x-1} + h_x psi_x = E psi_x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub m: [[f64; 2]; 2],
    pub energy: f64,
    pub a: usize,
    pub b: usize,
}

impl TransferMatrix {
    pub fn one_step(h: f64, energy: f64) -> [[f64; 2]; 2] {
        [[energy - h, -1.0], [1.0, 0.0]]
    }

    pub fn determinant(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn half_trace(&self) -> f64 {
        0.5 * self.trace()
    }

    /// Operator 2-norm (largest singular value).
    pub fn norm(&self) -> f64 {
        let [[a, b], [c, d]] = self.m;
        let fro2 = a * a + b * b + c * c + d * d;
        let det = a * d - b * c;
        // s_max^2 solves s^4 - fro2 s^2 + det^2 = 0
        let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
        (0.5 * (fro2 + disc)).sqrt()
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }
}

pub(crate) fn mat_mul(l: [[f64; 2]; 2], r: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            l[0][0] * r[0][0] + l[0][1] * r[1][0],
            l[0][0] * r[0][1] + l[0][1] * r[1][1],
        ],
        [
            l[1][0] * r[0][0] + l[1][1] * r[1][0],
            l[1][0] * r[0][1] + l[1][1] * r[1][1],
        ],
    ]
}

/// Transfer matrix over sites `a..=b` (1-based).
pub fn transfer_matrix(field: &Field, energy: f64, a: usize, b: usize) -> Result<TransferMatrix> {
    transfer_matrix_from_values(&field.values, energy, a, b)
}

pub(crate) fn transfer_matrix_from_values(
    values: &[f64],
    energy: f64,
    a: usize,
    b: usize,
) -> Result<TransferMatrix> {
    let n = values.len();
    if a == 0 || b > n {
        return Err(Error::IndexOutOfRange {
            what: "site range",
            index: if a == 0 { a } else { b },
            lo: 1,
            hi: n,
        });
    }
    if a > b {
        return Err(Error::IndexOrder {
            lhs_name: "a",
            rhs_name: "b + 1",
            lhs: a,
            rhs: b + 1,
        });
    }
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    for &h in &values[a - 1..b] {
        m = mat_mul(TransferMatrix::one_step(h, energy), m);
    }
    Ok(TransferMatrix { m, energy, a, b })
}
