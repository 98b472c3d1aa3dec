//! Wavepacket transport: front tracking, finite-time exponent fits, outside
//! probability scans and position moments.
//!
//! Everything here is computed on a finite chain, so each sample carries a
//! `reflection_safe` flag: the measured front plus a margin must stay below `N`.
//! Fits only ever see flagged-safe samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::onebody::{amplitude_row, outside_profile, tail_sum_profile, EigenSystem, Scale};
use crate::stats::fit_line;

pub const DEFAULT_EPSILON: f64 = 1e-12;
pub const DEFAULT_MARGIN: usize = 50;
/// Grid points of the Cesaro time average.
pub const CESARO_POINTS: usize = 64;
/// Outside probabilities below this are eigenvector round-off, not signal.
pub const PROBABILITY_FLOOR: f64 = 1e-24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Probe {
    /// `P(x, t)` from site 1 under `exp(-i h t)`.
    OutsideProbability,
    /// `sum_{y > x} |<1| exp(-2 i h t) |y>|`.
    TailSumFromSource,
}

impl Probe {
    /// Probe values for `x = 0..=N` (non-increasing in `x`).
    pub fn profile(self, eig: &EigenSystem, t: f64) -> Result<Vec<f64>> {
        match self {
            Probe::OutsideProbability => outside_profile(eig, t),
            Probe::TailSumFromSource => tail_sum_profile(eig, 1, t),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontSample {
    pub t: f64,
    pub front: usize,
    pub reflection_safe: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportProfile {
    pub times: Vec<f64>,
    pub fronts: Vec<usize>,
    pub epsilon: f64,
    pub probe: Probe,
    pub reflection_safe: Vec<bool>,
    pub n: usize,
    pub margin: usize,
}

impl TransportProfile {
    pub fn all_safe(&self) -> bool {
        self.reflection_safe.iter().all(|&s| s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub alpha_hat: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RSample {
    pub t: f64,
    pub x: usize,
    pub value: f64,
    pub reflection_safe: bool,
    /// `P` fell below [`PROBABILITY_FLOOR`]; `value` is then only a lower bound.
    pub floor_limited: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub alpha: f64,
    /// Gap to the next grid value of beta (0 if `alpha` is the largest).
    pub resolution: f64,
    pub r_max: f64,
    pub betas: Vec<f64>,
    /// `Some(true)` if beta's profile exceeded `r_max`, `None` if it had no safe samples.
    pub diverged: Vec<Option<bool>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSample {
    pub value: f64,
    pub reflection_safe: bool,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

/// `m` log-spaced times from `t_min` to `t_max` inclusive.
pub fn log_spaced(t_min: f64, t_max: f64, m: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min) || m < 2 {
        return Err(Error::InvalidArgument(format!(
            "log grid needs 0 < t_min < t_max and m >= 2, got ({t_min}, {t_max}, {m})"
        )));
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    let mut out: Vec<f64> = (0..m)
        .map(|j| (a + (b - a) * j as f64 / (m - 1) as f64).exp())
        .collect();
    out[0] = t_min;
    out[m - 1] = t_max;
    Ok(out)
}

/// Largest `x` with `profile[x] > epsilon`.
fn last_above(profile: &[f64], epsilon: f64) -> usize {
    profile.iter().rposition(|&v| v > epsilon).unwrap_or(0)
}

pub fn front_position(
    eig: &EigenSystem,
    t: f64,
    epsilon: f64,
    probe: Probe,
    margin: usize,
) -> Result<FrontSample> {
    check_epsilon(epsilon)?;
    let profile = probe.profile(eig, t)?;
    let front = last_above(&profile, epsilon);
    Ok(FrontSample {
        t,
        front,
        reflection_safe: front + margin < eig.len(),
    })
}

pub fn transport_profile(
    eig: &EigenSystem,
    times: &[f64],
    epsilon: f64,
    probe: Probe,
    margin: usize,
) -> Result<TransportProfile> {
    check_epsilon(epsilon)?;
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("times must be strictly increasing".into()));
    }
    let samples = times
        .par_iter()
        .map(|&t| front_position(eig, t, epsilon, probe, margin))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransportProfile {
        times: times.to_vec(),
        fronts: samples.iter().map(|s| s.front).collect(),
        epsilon,
        probe,
        reflection_safe: samples.iter().map(|s| s.reflection_safe).collect(),
        n: eig.len(),
        margin,
    })
}

/// Log-log slope of `values` against `times`, over the samples marked safe.
pub fn fit_exponent(times: &[f64], values: &[f64], safe: &[bool]) -> Result<ExponentEstimate> {
    if times.len() != values.len() || times.len() != safe.len() {
        return Err(Error::InvalidArgument("mismatched sample lengths".into()));
    }
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for ((&t, &v), &ok) in times.iter().zip(values).zip(safe) {
        if ok && t > 0.0 && v > 0.0 {
            lx.push(t.ln());
            ly.push(v.ln());
        }
    }
    if lx.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "need >= 5 reflection-safe samples with positive front, have {}",
            lx.len()
        )));
    }
    let lo = lx.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lx.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let decades = (hi - lo) / std::f64::consts::LN_10;
    if decades < 1.5 {
        return Err(Error::InsufficientData(format!(
            "safe samples span {decades:.3} decades in t, need >= 1.5"
        )));
    }
    let fit = fit_line(&lx, &ly)?;
    Ok(ExponentEstimate {
        alpha_hat: fit.slope,
        stderr: fit.slope_stderr,
        window: (lo.exp(), hi.exp()),
        r_squared: fit.r_squared,
        samples: fit.n,
    })
}

pub fn fit_alpha(profile: &TransportProfile) -> Result<ExponentEstimate> {
    let values: Vec<f64> = profile.fronts.iter().map(|&f| f as f64).collect();
    fit_exponent(&profile.times, &values, &profile.reflection_safe)
}

/// Mean front over several realizations (e.g. disorder seeds) on a common time grid.
/// A time is safe only if it is safe in every realization.
pub fn average_fronts(profiles: &[TransportProfile]) -> Result<(Vec<f64>, Vec<f64>, Vec<bool>)> {
    let first = profiles
        .first()
        .ok_or_else(|| Error::InsufficientData("no profiles to average".into()))?;
    if profiles.iter().any(|p| p.times != first.times) {
        return Err(Error::InvalidArgument("profiles use different time grids".into()));
    }
    let m = first.times.len();
    let k = profiles.len() as f64;
    let mean: Vec<f64> = (0..m)
        .map(|j| profiles.iter().map(|p| p.fronts[j] as f64).sum::<f64>() / k)
        .collect();
    let safe = (0..m)
        .map(|j| profiles.iter().all(|p| p.reflection_safe[j]))
        .collect();
    Ok((first.times.clone(), mean, safe))
}

/// `-ln P(floor(t^beta), t) / ln t` on each time (`t > 1`); `+inf` where `P` underflows to 0.
pub fn r_plus_profile(
    eig: &EigenSystem,
    beta: f64,
    times: &[f64],
    margin: usize,
) -> Result<Vec<RSample>> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be >= 0, got {beta}")));
    }
    if let Some(t) = times.iter().find(|&&t| !(t > 1.0)) {
        return Err(Error::InvalidArgument(format!("R+ needs t > 1, got {t}")));
    }
    let n = eig.len();
    times
        .par_iter()
        .map(|&t| {
            let profile = outside_profile(eig, t)?;
            let x = t.powf(beta).floor() as usize;
            let p = profile.get(x).copied().unwrap_or(0.0).max(0.0);
            let front = last_above(&profile, DEFAULT_EPSILON);
            let value = if p > 0.0 { -p.ln() / t.ln() } else { f64::INFINITY };
            Ok(RSample {
                t,
                x,
                value,
                reflection_safe: x + margin < n && front + margin < n,
                floor_limited: p < PROBABILITY_FLOOR,
            })
        })
        .collect()
}

/// Largest grid `beta` whose finite-time `R+` profile stays at or below `r_max`
/// on every reflection-safe sample. Floor-limited samples count as exceeding it.
pub fn alpha_u_estimate(
    eig: &EigenSystem,
    betas: &[f64],
    times: &[f64],
    r_max: f64,
    margin: usize,
) -> Result<AlphaEstimate> {
    if betas.is_empty() || times.is_empty() {
        return Err(Error::InvalidArgument("empty beta or time grid".into()));
    }
    if !(r_max > 0.0) {
        return Err(Error::InvalidArgument(format!("r_max must be > 0, got {r_max}")));
    }
    let mut sorted = betas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let diverged = sorted
        .par_iter()
        .map(|&b| {
            let samples = r_plus_profile(eig, b, times, margin)?;
            let safe: Vec<&RSample> = samples.iter().filter(|s| s.reflection_safe).collect();
            Ok(if safe.is_empty() {
                None
            } else {
                Some(safe.iter().any(|s| s.floor_limited || s.value > r_max))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let finite: Vec<usize> = (0..sorted.len())
        .filter(|&i| diverged[i] == Some(false))
        .collect();
    let Some(&best) = finite.last() else {
        return Err(Error::WindowLimited(format!(
            "every beta exceeds r_max = {r_max} (or has no safe samples)"
        )));
    };
    if !diverged.contains(&Some(true)) {
        return Err(Error::WindowLimited(format!(
            "no beta exceeds r_max = {r_max} within the window"
        )));
    }
    let resolution = sorted.get(best + 1).map_or(0.0, |next| next - sorted[best]);
    Ok(AlphaEstimate {
        alpha: sorted[best],
        resolution,
        r_max,
        betas: sorted,
        diverged,
    })
}

/// `sum_x x^p |<x| exp(-i h t) |1>|^2`.
pub fn position_moment(eig: &EigenSystem, p: f64, t: f64, margin: usize) -> Result<MomentSample> {
    if !(p >= 0.0) {
        return Err(Error::InvalidArgument(format!("moment order must be >= 0, got {p}")));
    }
    let probs = amplitude_row(eig, 1, t, Scale::Transport)?.probabilities();
    let value = probs
        .iter()
        .enumerate()
        .map(|(i, w)| ((i + 1) as f64).powf(p) * w)
        .sum();
    let mut tail = 0.0;
    let mut front = 0;
    for (i, w) in probs.iter().enumerate().rev() {
        tail += w;
        if tail > DEFAULT_EPSILON {
            front = i;
            break;
        }
    }
    Ok(MomentSample {
        value,
        reflection_safe: front + margin < eig.len(),
    })
}

/// Cesaro mean `(1/T) int_0^T moment(t) dt` by the midpoint rule on
/// [`CESARO_POINTS`] uniform cells.
pub fn time_averaged_moment(
    eig: &EigenSystem,
    p: f64,
    horizon: f64,
    margin: usize,
) -> Result<MomentSample> {
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon must be >= 0, got {horizon}")));
    }
    let h = horizon / CESARO_POINTS as f64;
    let samples = (0..CESARO_POINTS)
        .into_par_iter()
        .map(|j| position_moment(eig, p, (j as f64 + 0.5) * h, margin))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSample {
        value: samples.iter().map(|s| s.value).sum::<f64>() / CESARO_POINTS as f64,
        reflection_safe: samples.iter().all(|s| s.reflection_safe),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::onebody::{build_operator, eigensystem};
    use crate::potentials::{Field, FieldSpec};
    use proptest::prelude::*;

    fn eig_for(spec: FieldSpec) -> EigenSystem {
        eigensystem(&build_operator(&Field::generate(&spec).unwrap())).unwrap()
    }

    fn free(n: usize) -> EigenSystem {
        eig_for(FieldSpec::constant(0.0, n))
    }

    #[test]
    fn front_at_time_zero() {
        let eig = free(64);
        let s = front_position(&eig, 0.0, 0.5, Probe::OutsideProbability, 10).unwrap();
        assert_eq!(s.front, 0);
        assert!(s.reflection_safe);
        assert!(front_position(&eig, 1.0, 1.0, Probe::OutsideProbability, 10).is_err());
        assert!(front_position(&eig, 1.0, 0.0, Probe::OutsideProbability, 10).is_err());
    }

    #[test]
    fn front_grows_with_precision() {
        let eig = free(200);
        let mut last = 0;
        for eps in [1e-2, 1e-4, 1e-8, 1e-12] {
            let f = front_position(&eig, 8.0, eps, Probe::OutsideProbability, 10)
                .unwrap()
                .front;
            assert!(f >= last);
            last = f;
        }
    }

    #[test]
    fn undersized_chain_is_flagged() {
        let eig = free(40);
        let profile =
            transport_profile(&eig, &[1.0, 15.0, 40.0], 1e-12, Probe::OutsideProbability, 10)
                .unwrap();
        assert_eq!(profile.reflection_safe, vec![true, false, false]);
        assert!(!profile.all_safe());
    }

    #[test]
    fn exact_power_law_fit() {
        let times: Vec<f64> = (1..=10).map(|m| (m * m) as f64).collect();
        let fronts: Vec<usize> = times.iter().map(|t| (3.0 * t.sqrt()).round() as usize).collect();
        let profile = TransportProfile {
            times: times.clone(),
            fronts,
            epsilon: 1e-12,
            probe: Probe::OutsideProbability,
            reflection_safe: vec![true; times.len()],
            n: 10_000,
            margin: 50,
        };
        let est = fit_alpha(&profile).unwrap();
        assert!((est.alpha_hat - 0.5).abs() < 1e-12);
        assert!(est.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn fit_rejects_short_windows() {
        let times = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let vals = [1.0; 6];
        assert!(matches!(
            fit_exponent(&times, &vals, &[true; 6]),
            Err(Error::InsufficientData(_))
        ));
        let times = [1.0, 3.0, 10.0, 30.0, 100.0];
        assert!(fit_exponent(&times, &vals[..5], &[true, true, true, true, false]).is_err());
        assert!(fit_exponent(&times, &vals[..5], &[true; 5]).is_ok());
    }

    #[test]
    fn r_plus_values_are_nonnegative() {
        let eig = free(300);
        let times = [5.0, 10.0, 20.0];
        for beta in [0.0, 0.5, 1.0] {
            for s in r_plus_profile(&eig, beta, &times, 20).unwrap() {
                assert!(s.value >= 0.0);
                assert!(s.reflection_safe);
            }
        }
        let flat = r_plus_profile(&eig, 0.0, &times, 20).unwrap();
        assert!(flat.iter().all(|s| s.value < 0.2));
        assert!(r_plus_profile(&eig, 0.5, &[1.0], 20).is_err());
    }

    #[test]
    fn alpha_u_monotone_in_cutoff() {
        let eig = free(600);
        let betas: Vec<f64> = (0..=15).map(|i| 0.1 * i as f64).collect();
        let times = [5.0, 10.0, 20.0, 50.0];
        let mut last = f64::INFINITY;
        for r_max in [8.0, 4.0, 2.0] {
            if let Ok(est) = alpha_u_estimate(&eig, &betas, &times, r_max, 20) {
                assert!(est.alpha <= last);
                assert!(est.alpha >= 0.9);
                last = est.alpha;
            }
        }
    }

    #[test]
    fn moments_at_edges() {
        let eig = free(200);
        for p in [0.0, 1.0, 2.5] {
            let m = position_moment(&eig, p, 0.0, 10).unwrap();
            assert!((m.value - 1.0).abs() < 1e-14);
        }
        for t in [0.5, 3.0, 9.0] {
            let m = position_moment(&eig, 0.0, t, 10).unwrap();
            assert!((m.value - 1.0).abs() < 1e-12);
        }
        let avg = time_averaged_moment(&eig, 0.0, 10.0, 10).unwrap();
        assert!((avg.value - 1.0).abs() < 1e-12);
        assert!(position_moment(&eig, -1.0, 1.0, 10).is_err());
    }

    #[test]
    fn ballistic_second_moment() {
        let eig = free(1000);
        for t in [10.0, 20.0, 40.0] {
            let a = position_moment(&eig, 2.0, t, 50).unwrap();
            let b = position_moment(&eig, 2.0, 2.0 * t, 50).unwrap();
            assert!(a.reflection_safe && b.reflection_safe);
            let ratio = b.value / a.value;
            assert!((ratio / 4.0 - 1.0).abs() < 0.15, "t={t} ratio={ratio}");
        }
    }

    #[test]
    fn log_grid() {
        let g = log_spaced(10.0, 1000.0, 3).unwrap();
        assert_eq!(g[0], 10.0);
        assert!((g[1] - 100.0).abs() < 1e-9);
        assert_eq!(g[2], 1000.0);
        assert!(log_spaced(0.0, 1.0, 3).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn front_monotone_in_inverse_epsilon(
            lambda in 0.0f64..3.0,
            t in 0.0f64..15.0,
            e1 in 1.0f64..14.0,
            e2 in 1.0f64..14.0,
        ) {
            let eig = eig_for(FieldSpec::fibonacci(lambda, 0.0, 120));
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            for probe in [Probe::OutsideProbability, Probe::TailSumFromSource] {
                let coarse = front_position(&eig, t, 10f64.powf(-lo), probe, 10).unwrap();
                let fine = front_position(&eig, t, 10f64.powf(-hi), probe, 10).unwrap();
                prop_assert!(fine.front >= coarse.front);
            }
        }
    }
}
