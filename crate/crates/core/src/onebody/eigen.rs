use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::{Col, Mat, Par};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::OneBodyOperator;
use crate::error::{Error, Result};

/// Full spectral decomposition of a [`OneBodyOperator`].
///
/// Eigenvalues ascend; column `k` of the vector matrix pairs with eigenvalue `k`.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    vectors: Mat<f64>,
    diagonal: Vec<f64>,
}

fn run_evd(op: &OneBodyOperator, vectors: Option<&mut Mat<f64>>) -> Result<Vec<f64>> {
    let n = op.len();
    let diag = Col::<f64>::from_fn(n, |i| op.diagonal()[i]);
    let sub = Col::<f64>::from_fn(n, |i| if i + 1 < n { 1.0 } else { 0.0 });
    let mut s = Col::<f64>::zeros(n);
    let compute = if vectors.is_some() {
        ComputeEigenvectors::Yes
    } else {
        ComputeEigenvectors::No
    };
    // sequential on purpose: results must not depend on thread scheduling
    let par = Par::Seq;
    let mut buf = MemBuffer::new(evd::self_adjoint_evd_scratch::<f64>(
        n,
        compute,
        par,
        Default::default(),
    ));
    evd::tridiagonal_self_adjoint_evd(
        diag.as_diagonal(),
        sub.as_diagonal(),
        s.as_diagonal_mut(),
        vectors.map(|v| v.as_mut()),
        par,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|_| Error::NoConvergence { index: None })?;
    Ok((0..n).map(|i| s[i]).collect())
}

pub fn eigensystem(op: &OneBodyOperator) -> Result<EigenSystem> {
    let n = op.len();
    let mut vectors = Mat::<f64>::zeros(n, n);
    let eigenvalues = run_evd(op, Some(&mut vectors))?;
    if let Some(index) = eigenvalues.iter().position(|e| !e.is_finite()) {
        return Err(Error::NoConvergence { index: Some(index) });
    }
    // fix the sign gauge: first nonzero component of each vector positive
    for k in 0..n {
        let col = vectors.col_as_slice_mut(k);
        if let Some(first) = col.iter().find(|c| c.abs() > 1e-300) {
            if *first < 0.0 {
                col.iter_mut().for_each(|c| *c = -*c);
            }
        }
    }
    Ok(EigenSystem {
        eigenvalues,
        vectors,
        diagonal: op.diagonal().to_vec(),
    })
}

/// Eigenvalues only (ascending), `O(N^2)`.
pub fn eigenvalues(op: &OneBodyOperator) -> Result<Vec<f64>> {
    run_evd(op, None)
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvector `k` as a contiguous slice indexed by `site - 1`.
    pub fn vector(&self, k: usize) -> &[f64] {
        self.vectors.col_as_slice(k)
    }

    /// `v_k(x)` for 1-based site `x`.
    pub fn component(&self, k: usize, x: usize) -> f64 {
        self.vectors[(x - 1, k)]
    }

    /// The operator this decomposition belongs to.
    pub fn operator(&self) -> OneBodyOperator {
        OneBodyOperator::new(self.diagonal.clone())
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// `max_k ||h v_k - E_k v_k||_2`.
    pub fn max_residual(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|k| {
                let v = self.vector(k);
                let e = self.eigenvalues[k];
                let mut sq = 0.0;
                for i in 0..n {
                    let mut r = (self.diagonal[i] - e) * v[i];
                    if i > 0 {
                        r += v[i - 1];
                    }
                    if i + 1 < n {
                        r += v[i + 1];
                    }
                    sq += r * r;
                }
                sq.sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `max_k | ||v_k||_2 - 1 |`.
    pub fn max_normalization_error(&self) -> f64 {
        (0..self.len())
            .map(|k| (self.vector(k).iter().map(|c| c * c).sum::<f64>().sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max_{j != k} |<v_j, v_k>|`; `O(N^3)`, intended for small systems.
    pub fn max_orthogonality_error(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in (j + 1)..n {
                let d: f64 = self.vector(j).iter().zip(self.vector(k)).map(|(a, b)| a * b).sum();
                worst = worst.max(d.abs());
            }
        }
        worst
    }

    /// Randomized orthogonality probe, `O(N^2)` per probe: returns the
    /// largest `||V^T V r - r||_inf / ||r||_inf` over `probes` random `r`.
    pub fn orthogonality_probe(&self, probes: usize, seed: u64) -> f64 {
        let n = self.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..probes {
            let r: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            // y = V r
            let mut y = vec![0.0; n];
            for (k, rk) in r.iter().enumerate() {
                for (yi, vi) in y.iter_mut().zip(self.vector(k)) {
                    *yi += rk * vi;
                }
            }
            let scale = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (k, rk) in r.iter().enumerate() {
                let back: f64 = self.vector(k).iter().zip(&y).map(|(a, b)| a * b).sum();
                worst = worst.max((back - rk).abs() / scale);
            }
        }
        worst
    }

    /// `max_{i,j} |sum_k E_k v_k(i) v_k(j) - h_{ij}|`; `O(N^3)`.
    pub fn reconstruction_error(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n)
                    .map(|k| self.eigenvalues[k] * self.vectors[(i, k)] * self.vectors[(j, k)])
                    .sum();
                let exact = if i == j {
                    self.diagonal[i]
                } else if j == i + 1 {
                    1.0
                } else {
                    0.0
                };
                worst = worst.max((s - exact).abs());
            }
        }
        worst
    }
}
