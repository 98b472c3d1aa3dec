use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::EigenSystem;
use crate::error::{Error, Result};

/// Time scale of the one-body propagator `exp(-i s h t)`.
///
/// Wavepacket transport uses `s = 1`; the fermion operators of the XY chain
/// evolve with `s = 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Transport,
    Fermion,
}

impl Scale {
    pub fn factor(self) -> f64 {
        match self {
            Scale::Transport => 1.0,
            Scale::Fermion => 2.0,
        }
    }
}

/// Row `x` of `exp(-i s h t)`: `amplitudes[y - 1] = <x| exp(-i s h t) |y>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRow {
    pub source: usize,
    pub t: f64,
    pub scale: Scale,
    pub amplitudes: Vec<Complex64>,
}

impl AmplitudeRow {
    /// `|sum_y |K_{x,y}|^2 - 1|`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs()
    }

    /// `K_{x,y}` for 1-based `y`.
    pub fn at(&self, y: usize) -> Complex64 {
        self.amplitudes[y - 1]
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm()).collect()
    }
}

fn check_site(what: &'static str, x: usize, n: usize) -> Result<()> {
    if x == 0 || x > n {
        return Err(Error::IndexOutOfRange {
            what,
            index: x,
            lo: 1,
            hi: n,
        });
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// `K_{x,y}(s t) = sum_k v_k(x) v_k(y) exp(-i s E_k t)` for all `y`.
pub fn amplitude_row(eig: &EigenSystem, x: usize, t: f64, scale: Scale) -> Result<AmplitudeRow> {
    let n = eig.len();
    check_site("source x", x, n)?;
    check_time(t)?;
    if t == 0.0 {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
        amplitudes[x - 1] = Complex64::new(1.0, 0.0);
        return Ok(AmplitudeRow {
            source: x,
            t,
            scale,
            amplitudes,
        });
    }
    let st = scale.factor() * t;
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    for k in 0..n {
        let v = eig.vector(k);
        let (sin, cos) = (eig.eigenvalues()[k] * st).sin_cos();
        let (wr, wi) = (v[x - 1] * cos, -v[x - 1] * sin);
        for ((r, i), vy) in re.iter_mut().zip(im.iter_mut()).zip(v) {
            *r += wr * vy;
            *i += wi * vy;
        }
    }
    Ok(AmplitudeRow {
        source: x,
        t,
        scale,
        amplitudes: re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect(),
    })
}

/// Full `N x N` propagator `exp(-i s h t)`; meant for small chains.
pub fn propagator(eig: &EigenSystem, t: f64, scale: Scale) -> Result<Mat<Complex64>> {
    check_time(t)?;
    let n = eig.len();
    let st = scale.factor() * t;
    let phases: Vec<Complex64> = eig
        .eigenvalues()
        .iter()
        .map(|e| Complex64::from_polar(1.0, -e * st))
        .collect();
    Ok(Mat::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| phases[k] * (eig.vector(k)[i] * eig.vector(k)[j]))
            .sum()
    }))
}

/// `out[i] = sum_{j >= i} values[j]`, with a trailing zero (`out.len() = values.len() + 1`).
///
/// Summed from the far end so that deep-tail entries keep full relative precision.
pub fn suffix_sums(values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; values.len() + 1];
    for i in (0..values.len()).rev() {
        out[i] = out[i + 1] + values[i];
    }
    out
}

/// `P(x, t)` for `x = 0..=N`: probability beyond site `x` of a packet started at site 1 (`s = 1`).
pub fn outside_profile(eig: &EigenSystem, t: f64) -> Result<Vec<f64>> {
    let row = amplitude_row(eig, 1, t, Scale::Transport)?;
    // index x of the suffix sum starts at site x + 1
    Ok(suffix_sums(&row.probabilities()))
}

/// `P(x, t) = sum_{x' > x} |<x'| exp(-i t h) |1>|^2`; zero for `x >= N`.
pub fn outside_probability(eig: &EigenSystem, x: usize, t: f64) -> Result<f64> {
    let profile = outside_profile(eig, t)?;
    Ok(profile.get(x).copied().unwrap_or(0.0).clamp(0.0, 1.0))
}

/// `sum_{y = x'}^{N} |<x| exp(-2 i h t) |y>|`, requires `1 <= x < x' <= N`.
pub fn tail_sum(eig: &EigenSystem, x: usize, x_prime: usize, t: f64) -> Result<f64> {
    let n = eig.len();
    check_site("x", x, n)?;
    check_site("x'", x_prime, n)?;
    if x >= x_prime {
        return Err(Error::IndexOrder {
            lhs_name: "x",
            rhs_name: "x'",
            lhs: x,
            rhs: x_prime,
        });
    }
    let row = amplitude_row(eig, x, t, Scale::Fermion)?;
    Ok(row.amplitudes[x_prime - 1..].iter().rev().map(|a| a.norm()).sum())
}

/// `out[j] = sum_{y >= j + 1} |<x| exp(-2 i h t) |y>|` for `j = 0..=N`:
/// tail sums from source `x` for every starting site at once.
pub fn tail_sum_profile(eig: &EigenSystem, x: usize, t: f64) -> Result<Vec<f64>> {
    let row = amplitude_row(eig, x, t, Scale::Fermion)?;
    Ok(suffix_sums(&row.magnitudes()))
}

/// Potential-independent bound on `|<x| exp(-i tau h) |y>|` at distance `d = |x - y|`.
///
/// Conjugating with `exp(mu X)` turns the unit hoppings into `exp(+-mu)`, whose
/// anti-Hermitian part has norm `2 sinh(mu)`, so the entry is at most
/// `exp(-mu d + 2 tau sinh(mu))`; the optimum is `cosh(mu) = d / (2 tau)`.
pub fn ballistic_envelope(distance: f64, tau: f64) -> f64 {
    if tau <= 0.0 {
        return if distance <= 0.0 { 1.0 } else { 0.0 };
    }
    if distance <= 2.0 * tau {
        return 1.0;
    }
    let rho = distance / (2.0 * tau);
    let mu = rho.acosh();
    (-distance * mu + 2.0 * tau * mu.sinh()).exp()
}

/// Smallest chain length for which the outside probability from site 1 at one-body
/// time `tau` provably stays below `epsilon` beyond the returned front, plus `margin`.
pub fn min_safe_length(tau: f64, epsilon: f64, margin: usize) -> usize {
    // sum_{d >= d0} env(d)^2 <= env(d0)^2 / (1 - r) once the ratio r < 1;
    // scan d0 upwards until the geometric tail is below epsilon
    let mut d0 = (2.0 * tau).ceil().max(1.0) as usize;
    loop {
        let e0 = ballistic_envelope(d0 as f64, tau);
        let e1 = ballistic_envelope(d0 as f64 + 1.0, tau);
        let ratio = if e0 > 0.0 { (e1 / e0).powi(2) } else { 0.0 };
        if ratio < 1.0 && e0 * e0 / (1.0 - ratio) <= epsilon {
            return d0 + margin;
        }
        d0 += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::onebody::{eigensystem, OneBodyOperator};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn eig(d: Vec<f64>) -> EigenSystem {
        eigensystem(&OneBodyOperator::new(d)).unwrap()
    }

    fn random_eig(n: usize, seed: u64) -> EigenSystem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        eig((0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
    }

    #[test]
    fn identity_at_time_zero() {
        let e = random_eig(7, 1);
        let row = amplitude_row(&e, 3, 0.0, Scale::Fermion).unwrap();
        for y in 1..=7 {
            let want = if y == 3 { 1.0 } else { 0.0 };
            assert!((row.at(y) - Complex64::new(want, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn scalar_case() {
        let h = 0.37;
        let e = eig(vec![h]);
        for t in [0.0, 0.5, 3.0] {
            let k = amplitude_row(&e, 1, t, Scale::Fermion).unwrap().at(1);
            assert!((k - Complex64::from_polar(1.0, -2.0 * h * t)).norm() < 1e-14);
            let k1 = amplitude_row(&e, 1, t, Scale::Transport).unwrap().at(1);
            assert!((k1 - Complex64::from_polar(1.0, -h * t)).norm() < 1e-14);
        }
    }

    #[test]
    fn bad_arguments() {
        let e = random_eig(4, 2);
        assert!(amplitude_row(&e, 0, 1.0, Scale::Transport).is_err());
        assert!(amplitude_row(&e, 5, 1.0, Scale::Transport).is_err());
        assert!(amplitude_row(&e, 1, -1.0, Scale::Transport).is_err());
        assert!(matches!(tail_sum(&e, 2, 2, 1.0), Err(Error::IndexOrder { .. })));
        assert!(tail_sum(&e, 1, 5, 1.0).is_err());
    }

    #[test]
    fn outside_probability_edges() {
        let e = random_eig(30, 3);
        for x in 1..30 {
            assert_eq!(outside_probability(&e, x, 0.0).unwrap(), 0.0);
        }
        for t in [0.0, 1.0, 7.5] {
            assert!((outside_probability(&e, 0, t).unwrap() - 1.0).abs() < 1e-12);
            let p = outside_profile(&e, t).unwrap();
            assert!(p.windows(2).all(|w| w[1] <= w[0]));
            assert!(p.iter().all(|v| (0.0..=1.0 + 1e-12).contains(v)));
        }
    }

    #[test]
    fn tail_sum_vanishes_at_zero_and_is_monotone() {
        let e = random_eig(25, 4);
        assert_eq!(tail_sum(&e, 2, 3, 0.0).unwrap(), 0.0);
        for xp in 4..25 {
            let a = tail_sum(&e, 3, xp, 1.3).unwrap();
            let b = tail_sum(&e, 3, xp + 1, 1.3).unwrap();
            assert!(b <= a);
        }
        let prof = tail_sum_profile(&e, 3, 1.3).unwrap();
        assert!((prof[9] - tail_sum(&e, 3, 10, 1.3).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn time_composition_and_symmetry() {
        let e = random_eig(20, 5);
        let (t1, t2) = (0.7, 1.9);
        let u1 = propagator(&e, t1, Scale::Fermion).unwrap();
        let u2 = propagator(&e, t2, Scale::Fermion).unwrap();
        let u12 = propagator(&e, t1 + t2, Scale::Fermion).unwrap();
        let prod = &u1 * &u2;
        for i in 0..20 {
            for j in 0..20 {
                assert!((prod[(i, j)] - u12[(i, j)]).norm() < 1e-9);
                assert!((u12[(i, j)] - u12[(j, i)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn envelope_dominates_free_amplitudes() {
        let e = eig(vec![0.0; 300]);
        let t = 20.0;
        let row = amplitude_row(&e, 1, t, Scale::Transport).unwrap();
        for y in 1..=300 {
            assert!(row.at(y).norm() <= ballistic_envelope((y - 1) as f64, t) + 1e-14);
        }
        let n_safe = min_safe_length(t, 1e-12, 0);
        let p = outside_probability(&e, n_safe, t).unwrap();
        assert!(p <= 1e-12, "{p:e} beyond {n_safe}");
        assert!(n_safe < 300);
    }
}
