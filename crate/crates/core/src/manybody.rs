//! Dense exact oracle for the XY chain
//!
//! `H = -sum_x (s1_x s1_{x+1} + s2_x s2_{x+1}) + sum_x h_x s3_x`
//!
//! on `2^N`-dimensional matrices, `N <= 12`. Basis: `s3 = diag(1, -1)`, site 1 is
//! the leftmost Kronecker factor (most significant bit of the basis index), and
//! bit value 0 is the `s3 = +1` state.
//!
//! In this basis the Jordan-Wigner fermions `c_x = s3_1 ... s3_{x-1} S^-_x`
//! turn `H` into `sum c^dag (2 h) c - sum_x h_x`, with `h` the one-body operator
//! with `+1` hoppings. Hence `c_x(t) = sum_y <x| exp(-2 i h t) |y> c_y` holds
//! entry by entry, with no extra phases.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lrbounds::{fermion_tail_bound, spin_bound_jw};
use crate::onebody::{build_operator, eigensystem, propagator, EigenSystem, Scale};
use crate::potentials::{Field, FieldSpec};

pub const MAX_SITES: usize = 12;
/// Cap for the oracle sweeps that compare against one-body quantities.
pub const ORACLE_MAX_SITES: usize = 8;

pub type Local = [[C64; 2]; 2];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn identity2() -> Local {
    [[ONE, ZERO], [ZERO, ONE]]
}
pub fn sigma1() -> Local {
    [[ZERO, ONE], [ONE, ZERO]]
}
pub fn sigma2() -> Local {
    [[ZERO, -I], [I, ZERO]]
}
pub fn sigma3() -> Local {
    [[ONE, ZERO], [ZERO, -ONE]]
}
/// `S^+ = [[0, 1], [0, 0]]`
pub fn s_plus() -> Local {
    [[ZERO, ONE], [ZERO, ZERO]]
}
/// `S^- = [[0, 0], [1, 0]]`
pub fn s_minus() -> Local {
    [[ZERO, ZERO], [ONE, ZERO]]
}

/// Uniformly random Hermitian 2x2 matrix with entries in `[-1, 1]`.
pub fn random_hermitian_local<R: Rng>(rng: &mut R) -> Local {
    let a = rng.random_range(-1.0..1.0);
    let d = rng.random_range(-1.0..1.0);
    let b = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    [[C64::new(a, 0.0), b], [b.conj(), C64::new(d, 0.0)]]
}

/// Largest singular value of a 2x2 matrix.
pub fn local_norm(m: &Local) -> f64 {
    let fro2: f64 = m.iter().flatten().map(|z| z.norm_sqr()).sum();
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).norm();
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    (0.5 * (fro2 + disc)).sqrt()
}

/// Operator on `N` spins as a dense `2^N x 2^N` complex matrix.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    n_sites: usize,
    matrix: Mat<C64>,
}

fn check_sites(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one site".into()));
    }
    if n > MAX_SITES {
        return Err(Error::CapExceeded {
            requested: n,
            cap: MAX_SITES,
        });
    }
    Ok(())
}

fn check_site(x: usize, n: usize) -> Result<()> {
    if x == 0 || x > n {
        return Err(Error::IndexOutOfRange {
            what: "site",
            index: x,
            lo: 1,
            hi: n,
        });
    }
    Ok(())
}

/// Bit of basis index `i` holding site `x` of `n`.
#[inline]
fn bit(n: usize, x: usize) -> usize {
    1 << (n - x)
}

impl DenseOperator {
    pub fn from_matrix(n_sites: usize, matrix: Mat<C64>) -> Result<Self> {
        check_sites(n_sites)?;
        let dim = 1usize << n_sites;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidArgument(format!(
                "expected a {dim}x{dim} matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { n_sites, matrix })
    }

    pub fn identity(n_sites: usize) -> Result<Self> {
        check_sites(n_sites)?;
        let dim = 1 << n_sites;
        Ok(Self {
            n_sites,
            matrix: Mat::identity(dim, dim),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat<C64> {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_sites: self.n_sites,
            matrix: self.matrix.adjoint().to_owned(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            n_sites: self.n_sites,
            matrix: &self.matrix * &rhs.matrix,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            n_sites: self.n_sites,
            matrix: &self.matrix + &rhs.matrix,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self {
            n_sites: self.n_sites,
            matrix: &self.matrix - &rhs.matrix,
        }
    }

    pub fn scale(&self, k: C64) -> Self {
        Self {
            n_sites: self.n_sites,
            matrix: Mat::from_fn(self.dim(), self.dim(), |i, j| k * self.matrix[(i, j)]),
        }
    }

    /// Largest singular value.
    pub fn norm(&self) -> f64 {
        spectral_norm(&self.matrix)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                m = m.max(self.matrix[(i, j)].norm());
            }
        }
        m
    }

    /// `max |A - A^dag|` entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    /// `A B` for `B` acting as `op` on `site`, in `O(dim^2)`.
    pub fn mul_local_right(&self, op: &Local, site: usize) -> Self {
        let n = self.n_sites;
        let b = bit(n, site);
        let dim = self.dim();
        let matrix = Mat::from_fn(dim, dim, |i, j| {
            let bj = usize::from(j & b != 0);
            let j0 = j & !b;
            self.matrix[(i, j0)] * op[0][bj] + self.matrix[(i, j0 | b)] * op[1][bj]
        });
        Self { n_sites: n, matrix }
    }

    /// `B A` for `B` acting as `op` on `site`, in `O(dim^2)`.
    pub fn mul_local_left(&self, op: &Local, site: usize) -> Self {
        let n = self.n_sites;
        let b = bit(n, site);
        let dim = self.dim();
        let matrix = Mat::from_fn(dim, dim, |i, j| {
            let bi = usize::from(i & b != 0);
            let i0 = i & !b;
            op[bi][0] * self.matrix[(i0, j)] + op[bi][1] * self.matrix[(i0 | b, j)]
        });
        Self { n_sites: n, matrix }
    }
}

/// Largest singular value via the top eigenvalue of `A^dag A`.
pub fn spectral_norm(a: &Mat<C64>) -> f64 {
    let gram = a.adjoint() * a;
    match gram.self_adjoint_eigenvalues(Side::Lower) {
        Ok(ev) => ev.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        Err(_) => a
            .singular_values()
            .ok()
            .and_then(|s| s.first().copied())
            .unwrap_or(f64::NAN),
    }
}

/// `ops[0] (x) ops[1] (x) ... (x) ops[N-1]`.
pub fn kron_chain(ops: &[Local]) -> Result<DenseOperator> {
    check_sites(ops.len())?;
    let mut m = Mat::<C64>::from_fn(1, 1, |_, _| ONE);
    for op in ops {
        let d = m.nrows();
        m = Mat::from_fn(2 * d, 2 * d, |i, j| m[(i / 2, j / 2)] * op[i % 2][j % 2]);
    }
    DenseOperator::from_matrix(ops.len(), m)
}

/// `op` on `site`, identity elsewhere.
pub fn site_operator(op: &Local, site: usize, n: usize) -> Result<DenseOperator> {
    check_sites(n)?;
    check_site(site, n)?;
    let mut ops = vec![identity2(); n];
    ops[site - 1] = *op;
    kron_chain(&ops)
}

pub fn build_hamiltonian(field: &Field) -> Result<DenseOperator> {
    build_hamiltonian_from(&field.values)
}

/// Fills `H` directly: diagonal `sum h_x s3_x`, and `-2` between basis states that
/// differ by swapping antiparallel neighbours (`s1 s1 + s2 s2 = 2 (S+ S- + S- S+)`).
pub fn build_hamiltonian_from(h: &[f64]) -> Result<DenseOperator> {
    let n = h.len();
    check_sites(n)?;
    let dim = 1usize << n;
    let mut m = Mat::<C64>::zeros(dim, dim);
    for i in 0..dim {
        let diag: f64 = (1..=n)
            .map(|x| if i & bit(n, x) == 0 { h[x - 1] } else { -h[x - 1] })
            .sum();
        m[(i, i)] = C64::new(diag, 0.0);
        for x in 1..n {
            let pair = bit(n, x) | bit(n, x + 1);
            let bits = i & pair;
            if bits != 0 && bits != pair {
                m[(i ^ pair, i)] += C64::new(-2.0, 0.0);
            }
        }
    }
    DenseOperator::from_matrix(n, m)
}

/// `c_x = s3_1 ... s3_{x-1} S^-_x`.
pub fn jordan_wigner_c(x: usize, n: usize) -> Result<DenseOperator> {
    check_sites(n)?;
    check_site(x, n)?;
    let dim = 1usize << n;
    let b = bit(n, x);
    // sites 1..x-1 occupy the bits above b
    let string_mask = !((b << 1) - 1) & (dim - 1);
    let mut m = Mat::<C64>::zeros(dim, dim);
    for j in 0..dim {
        if j & b == 0 {
            let downs = (j & string_mask).count_ones();
            let sign = if downs % 2 == 0 { 1.0 } else { -1.0 };
            m[(j | b, j)] = C64::new(sign, 0.0);
        }
    }
    DenseOperator::from_matrix(n, m)
}

/// Unitary evolution `exp(-i t H)` from one eigendecomposition of `H`.
pub struct Evolution {
    n_sites: usize,
    energies: Vec<f64>,
    vectors: Mat<C64>,
}

impl Evolution {
    pub fn new(h: &DenseOperator) -> Result<Self> {
        let evd = h
            .matrix
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::NoConvergence { index: None })?;
        let energies = (0..h.dim()).map(|k| evd.S()[k].re).collect();
        Ok(Self {
            n_sites: h.n_sites,
            energies,
            vectors: evd.U().to_owned(),
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `exp(-i t H)`.
    pub fn unitary(&self, t: f64) -> Mat<C64> {
        let dim = self.energies.len();
        let phased = Mat::from_fn(dim, dim, |i, k| {
            self.vectors[(i, k)] * C64::from_polar(1.0, -self.energies[k] * t)
        });
        &phased * self.vectors.adjoint()
    }

    /// `exp(i t H) A exp(-i t H)`.
    pub fn heisenberg(&self, a: &DenseOperator, t: f64) -> DenseOperator {
        if t == 0.0 {
            return a.clone();
        }
        let u = self.unitary(t);
        let au = &a.matrix * &u;
        DenseOperator {
            n_sites: self.n_sites,
            matrix: u.adjoint() * &au,
        }
    }
}

pub fn heisenberg(a: &DenseOperator, h: &DenseOperator, t: f64) -> Result<DenseOperator> {
    if a.dim() != h.dim() {
        return Err(Error::InvalidArgument("operator shapes differ".into()));
    }
    Ok(Evolution::new(h)?.heisenberg(a, t))
}

pub fn commutator(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    a.mul(b).sub(&b.mul(a))
}

pub fn anticommutator(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    a.mul(b).add(&b.mul(a))
}

/// Spectral norm of `AB - BA`.
pub fn commutator_norm(a: &DenseOperator, b: &DenseOperator) -> f64 {
    commutator(a, b).norm()
}

/// Spectral norm of `[A, B]` for `B` acting as `op` on one site.
pub fn commutator_norm_local(a: &DenseOperator, op: &Local, site: usize) -> f64 {
    a.mul_local_right(op, site)
        .sub(&a.mul_local_left(op, site))
        .norm()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeDynamicsReport {
    pub n: usize,
    pub t: f64,
    pub field: Option<FieldSpec>,
    /// `max |c_x(t) - sum_y K_{x,y}(2t) c_y|` over entries and `x`.
    pub max_entrywise_deviation: f64,
    /// `max | ||[c_x(t), s3_{x'}]|| - 2 |K_{x,x'}(2t)| |` over all pairs.
    pub max_gauge_invariant_deviation: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Heisenberg-evolved fermions `c_x(t)` for all `x`.
fn evolved_fermions(evo: &Evolution, n: usize, t: f64) -> Result<Vec<DenseOperator>> {
    (1..=n)
        .map(|x| Ok(evo.heisenberg(&jordan_wigner_c(x, n)?, t)))
        .collect()
}

fn check_oracle_sites(n: usize) -> Result<()> {
    if n > ORACLE_MAX_SITES {
        return Err(Error::CapExceeded {
            requested: n,
            cap: ORACLE_MAX_SITES,
        });
    }
    Ok(())
}

pub fn verify_free_dynamics(field: &Field, t: f64, tol: f64) -> Result<FreeDynamicsReport> {
    let n = field.len();
    check_oracle_sites(n)?;
    let h = build_hamiltonian(field)?;
    let evo = Evolution::new(&h)?;
    let eig = eigensystem(&build_operator(field))?;
    let k = propagator(&eig, t, Scale::Fermion)?;
    let cs: Vec<DenseOperator> = (1..=n).map(|x| jordan_wigner_c(x, n)).collect::<Result<_>>()?;
    let evolved = evolved_fermions(&evo, n, t)?;
    let dim = h.dim();
    let mut entry_dev = 0.0f64;
    for x in 1..=n {
        let mut rhs = Mat::<C64>::zeros(dim, dim);
        for (y, c) in cs.iter().enumerate() {
            rhs += Mat::from_fn(dim, dim, |i, j| k[(x - 1, y)] * c.matrix[(i, j)]);
        }
        let diff = DenseOperator {
            n_sites: n,
            matrix: &evolved[x - 1].matrix - &rhs,
        };
        entry_dev = entry_dev.max(diff.max_abs());
    }
    let mut gauge_dev = 0.0f64;
    for x in 1..=n {
        for xp in 1..=n {
            let dense = commutator_norm_local(&evolved[x - 1], &sigma3(), xp);
            let one_body = 2.0 * k[(x - 1, xp - 1)].norm();
            gauge_dev = gauge_dev.max((dense - one_body).abs());
        }
    }
    Ok(FreeDynamicsReport {
        n,
        t,
        field: Some(field.spec.clone()),
        max_entrywise_deviation: entry_dev,
        max_gauge_invariant_deviation: gauge_dev,
        tol,
        passed: gauge_dev <= tol,
    })
}

/// Results of comparing dense commutator norms with the one-body bounds on every
/// pair `x < x'` for a set of observables at `x'`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundChainReport {
    pub n: usize,
    pub t: f64,
    pub field: Option<FieldSpec>,
    pub slack: f64,
    /// `max | ||[c_x(t), s3_{x'}]|| - 2|K_{x,x'}(2t)| |` over all pairs.
    pub identity_deviation: f64,
    /// Cases with `||[S^-_x(t), B]|| > spin_bound_jw ||B|| + slack`.
    pub spin_violations: usize,
    pub spin_worst_excess: f64,
    /// Cases with `||[c_x(t), B]|| > tail ||B|| + slack` (also for `c_x(t)^dag`).
    pub fermion_violations: usize,
    pub fermion_worst_excess: f64,
    /// Same comparison against `2 tail ||B||`.
    pub fermion_violations_doubled: usize,
    pub fermion_worst_ratio: f64,
    /// Cases with `||[c_x(t), S^+_{x'}]|| < |K_{x,x'}(2t)| - slack`.
    pub trial_violations: usize,
    pub trial_worst_deficit: f64,
    pub cases: usize,
}

impl BoundChainReport {
    /// Identity, spin bound, fermion bound in the `2 tail ||B||` form, and trial bound.
    /// `fermion_violations` (the bound without the factor 2) is reported but not gated.
    pub fn passed(&self) -> bool {
        self.identity_deviation <= self.slack
            && self.spin_violations == 0
            && self.fermion_violations_doubled == 0
            && self.trial_violations == 0
    }
}

/// Observables placed at `x'` in the bound-chain sweep: `s3`, `S^+`, a random Hermitian.
pub fn probe_observables<R: Rng>(rng: &mut R) -> Vec<(&'static str, Local)> {
    vec![
        ("sigma3", sigma3()),
        ("s_plus", s_plus()),
        ("random_hermitian", random_hermitian_local(rng)),
    ]
}

pub fn bound_chain_sweep<R: Rng>(
    field: &Field,
    t: f64,
    slack: f64,
    rng: &mut R,
) -> Result<BoundChainReport> {
    let n = field.len();
    check_oracle_sites(n)?;
    let h = build_hamiltonian(field)?;
    let evo = Evolution::new(&h)?;
    let eig: EigenSystem = eigensystem(&build_operator(field))?;
    let k = propagator(&eig, t, Scale::Fermion)?;
    let cs = evolved_fermions(&evo, n, t)?;
    let cs_dag: Vec<DenseOperator> = cs.iter().map(|c| c.adjoint()).collect();
    let spins: Vec<DenseOperator> = (1..=n)
        .map(|x| Ok(evo.heisenberg(&site_operator(&s_minus(), x, n)?, t)))
        .collect::<Result<_>>()?;

    let mut r = BoundChainReport {
        n,
        t,
        field: Some(field.spec.clone()),
        slack,
        identity_deviation: 0.0,
        spin_violations: 0,
        spin_worst_excess: f64::NEG_INFINITY,
        fermion_violations: 0,
        fermion_worst_excess: f64::NEG_INFINITY,
        fermion_violations_doubled: 0,
        fermion_worst_ratio: 0.0,
        trial_violations: 0,
        trial_worst_deficit: f64::NEG_INFINITY,
        cases: 0,
    };
    for x in 1..=n {
        for xp in 1..=n {
            let dense = commutator_norm_local(&cs[x - 1], &sigma3(), xp);
            let dev = (dense - 2.0 * k[(x - 1, xp - 1)].norm()).abs();
            r.identity_deviation = r.identity_deviation.max(dev);
        }
    }
    for x in 1..n {
        for xp in (x + 1)..=n {
            let tail = fermion_tail_bound(&eig, x, xp, t)?;
            let spin = spin_bound_jw(&eig, x, xp, t)?;
            for (_, b) in probe_observables(rng) {
                let nb = local_norm(&b);
                r.cases += 1;

                let s = commutator_norm_local(&spins[x - 1], &b, xp);
                let excess = s - spin * nb;
                r.spin_worst_excess = r.spin_worst_excess.max(excess);
                if excess > slack {
                    r.spin_violations += 1;
                }

                for op in [&cs[x - 1], &cs_dag[x - 1]] {
                    let f = commutator_norm_local(op, &b, xp);
                    let excess = f - tail * nb;
                    r.fermion_worst_excess = r.fermion_worst_excess.max(excess);
                    if excess > slack {
                        r.fermion_violations += 1;
                    }
                    if f - 2.0 * tail * nb > slack {
                        r.fermion_violations_doubled += 1;
                    }
                    if tail * nb > 0.0 {
                        r.fermion_worst_ratio = r.fermion_worst_ratio.max(f / (tail * nb));
                    }
                }
            }
            let trial = commutator_norm_local(&cs[x - 1], &s_plus(), xp);
            let deficit = k[(x - 1, xp - 1)].norm() - trial;
            r.trial_worst_deficit = r.trial_worst_deficit.max(deficit);
            if deficit > slack {
                r.trial_violations += 1;
            }
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::FieldSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &DenseOperator, b: &DenseOperator) -> f64 {
        a.sub(b).max_abs()
    }

    fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
        let v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|z| z / norm).collect()
    }

    fn expectation(a: &DenseOperator, psi: &[C64]) -> C64 {
        let dim = a.dim();
        let mut s = ZERO;
        for i in 0..dim {
            for j in 0..dim {
                s += psi[i].conj() * a.get(i, j) * psi[j];
            }
        }
        s
    }

    #[test]
    fn single_site_hamiltonian() {
        let h = build_hamiltonian_from(&[0.7]).unwrap();
        assert_eq!(h.get(0, 0), C64::new(0.7, 0.0));
        assert_eq!(h.get(1, 1), C64::new(-0.7, 0.0));
        assert_eq!(h.get(0, 1), ZERO);
    }

    #[test]
    fn free_pair_spectrum() {
        let h = build_hamiltonian_from(&[0.0, 0.0]).unwrap();
        let ev = h.matrix().self_adjoint_eigenvalues(Side::Lower).unwrap();
        for (e, want) in ev.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert!((e - want).abs() < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_matches_kronecker_sum() {
        let h = [0.3, -1.2, 0.5, 2.0];
        let n = h.len();
        let fast = build_hamiltonian_from(&h).unwrap();
        let mut slow = DenseOperator::from_matrix(n, Mat::zeros(1 << n, 1 << n)).unwrap();
        for x in 1..n {
            for p in [sigma1(), sigma2()] {
                let mut ops = vec![identity2(); n];
                ops[x - 1] = p;
                ops[x] = p;
                slow = slow.sub(&kron_chain(&ops).unwrap());
            }
        }
        for x in 1..=n {
            slow = slow.add(&site_operator(&sigma3(), x, n).unwrap().scale(C64::new(h[x - 1], 0.0)));
        }
        assert!(close(&fast, &slow) < 1e-14);
        assert!(fast.hermiticity_defect() < 1e-12);
        assert!(fast.trace().norm() < 1e-12);
        let zero_sum = build_hamiltonian_from(&[1.0, -0.5, -0.5]).unwrap();
        assert!(zero_sum.trace().norm() < 1e-12);
    }

    #[test]
    fn caps() {
        assert!(matches!(
            build_hamiltonian_from(&[0.0; 13]),
            Err(Error::CapExceeded { .. })
        ));
        assert!(jordan_wigner_c(0, 3).is_err());
        assert!(jordan_wigner_c(4, 3).is_err());
        let f = Field::generate(&FieldSpec::constant(0.0, 9)).unwrap();
        assert!(verify_free_dynamics(&f, 1.0, 1e-8).is_err());
    }

    #[test]
    fn jordan_wigner_matches_string_product() {
        let n = 4;
        for x in 1..=n {
            let mut ops = vec![identity2(); n];
            for op in ops.iter_mut().take(x - 1) {
                *op = sigma3();
            }
            ops[x - 1] = s_minus();
            let slow = kron_chain(&ops).unwrap();
            assert!(close(&jordan_wigner_c(x, n).unwrap(), &slow) < 1e-15);
        }
        let c1 = jordan_wigner_c(1, 1).unwrap();
        assert_eq!(c1.get(1, 0), ONE);
        assert_eq!(c1.get(0, 1), ZERO);
    }

    #[test]
    fn canonical_anticommutation() {
        for n in 1..=6 {
            let id = DenseOperator::identity(n).unwrap();
            let zero = DenseOperator::from_matrix(n, Mat::zeros(1 << n, 1 << n)).unwrap();
            let cs: Vec<_> = (1..=n).map(|x| jordan_wigner_c(x, n).unwrap()).collect();
            for x in 0..n {
                for y in 0..n {
                    let ac = anticommutator(&cs[x], &cs[y].adjoint());
                    let want = if x == y { &id } else { &zero };
                    assert!(close(&ac, want) < 1e-12);
                    assert!(close(&anticommutator(&cs[x], &cs[y]), &zero) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pauli_commutator_norms() {
        let a = site_operator(&sigma1(), 1, 1).unwrap();
        let b = site_operator(&sigma2(), 1, 1).unwrap();
        assert!((commutator_norm(&a, &b) - 2.0).abs() < 1e-12);
        let a = site_operator(&sigma1(), 1, 3).unwrap();
        let b = site_operator(&sigma3(), 3, 3).unwrap();
        assert!(commutator_norm(&a, &b) < 1e-14);
        assert!(commutator_norm_local(&a, &sigma3(), 3) < 1e-14);
        assert!((commutator_norm_local(&a, &sigma3(), 1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn local_products_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 3;
        let dim = 1 << n;
        let a = DenseOperator::from_matrix(
            n,
            Mat::from_fn(dim, dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
        )
        .unwrap();
        let op = [[C64::new(0.2, 0.1), C64::new(-1.0, 0.4)], [C64::new(0.3, 0.0), C64::new(0.0, -0.7)]];
        for site in 1..=n {
            let b = site_operator(&op, site, n).unwrap();
            assert!(close(&a.mul_local_right(&op, site), &a.mul(&b)) < 1e-14);
            assert!(close(&a.mul_local_left(&op, site), &b.mul(&a)) < 1e-14);
            let norm_a = a.norm();
            let c = commutator_norm(&a, &b);
            assert!(c <= 2.0 * norm_a * local_norm(&op) + 1e-12);
        }
        assert!((local_norm(&op) - site_operator(&op, 1, 1).unwrap().norm()).abs() < 1e-14);
    }

    #[test]
    fn heisenberg_properties() {
        let field = Field::generate(&FieldSpec::fibonacci(1.0, 0.0, 5)).unwrap();
        let h = build_hamiltonian(&field).unwrap();
        let evo = Evolution::new(&h).unwrap();
        let a = site_operator(&sigma1(), 2, 5).unwrap();
        assert!(close(&evo.heisenberg(&a, 0.0), &a) < 1e-15);
        assert!(close(&evo.heisenberg(&h, 1.7), &h) < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dim = h.dim();
        let raw = Mat::from_fn(dim, dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let herm = DenseOperator::from_matrix(5, Mat::from_fn(dim, dim, |i, j| raw[(i, j)] + raw[(j, i)].conj())).unwrap();
        let at = evo.heisenberg(&herm, 0.9);
        assert!((at.norm() - herm.norm()).abs() < 1e-10);

        let psi = random_state(dim, &mut rng);
        let e0 = expectation(&h, &psi);
        for t in [0.3, 2.0, 7.5] {
            let et = expectation(&evo.heisenberg(&h, t), &psi);
            assert!((et - e0).norm() < 1e-10);
        }
    }

    #[test]
    fn free_dynamics_identity() {
        let field = Field::generate(&FieldSpec::constant(0.0, 6)).unwrap();
        let r = verify_free_dynamics(&field, 1.5, 1e-8).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.max_entrywise_deviation < 1e-8);
        let r0 = verify_free_dynamics(&field, 0.0, 1e-12).unwrap();
        assert!(r0.max_gauge_invariant_deviation <= 1e-12);
        assert!(r0.max_entrywise_deviation <= 1e-12);
    }

    #[test]
    fn fibonacci_free_dynamics() {
        let field = Field::generate(&FieldSpec::fibonacci(1.0, 0.0, 6)).unwrap();
        for t in [0.5, 1.3] {
            let r = verify_free_dynamics(&field, t, 1e-8).unwrap();
            assert!(r.passed, "{r:?}");
            assert!(r.max_entrywise_deviation < 1e-8);
        }
    }
}
