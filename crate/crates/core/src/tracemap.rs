//! Fibonacci trace map.
//!
//! With `M_{-1} = [[1, -lambda], [0, 1]]`, `M_0 = [[E, -1], [1, 0]]`,
//! `M_1 = [[E - lambda, -1], [1, 0]]` and `M_{k+1} = M_{k-1} M_k`, the half
//! traces `x_k = tr(M_k) / 2` obey
//!
//! `x_{k+1} = 2 x_k x_{k-1} - x_{k-2}`
//!
//! and conserve `I = x_{k+1}^2 + x_k^2 + x_{k-1}^2 - 2 x_{k+1} x_k x_{k-1} - 1`,
//! which equals `lambda^2 / 4` on the initial triple. `M_k` is the transfer
//! matrix across the first `F_k` sites of the Fibonacci field with `omega = 0`;
//! [`trace_check`] verifies that against explicit products.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::onebody::transfer_matrix_from_values;
use crate::potentials::{fibonacci_word_capped, FIBONACCI_WORD_CAP};

/// Magnitude at which an orbit is declared escaped and iteration stops.
pub const OVERFLOW_GUARD: f64 = 1e150;

/// Generation `k` of an orbit: `(x_{k-1}, x_k, x_{k+1})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceState {
    pub triple: [f64; 3],
    pub generation: i64,
    pub energy: f64,
    pub lambda: f64,
}

/// Raised by [`iterate`] once a half trace exceeds [`OVERFLOW_GUARD`].
/// Off the spectrum this is the expected outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOverflow {
    pub generation: i64,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "step")]
pub enum Escape {
    Bounded,
    Escaped(usize),
}

pub fn initial_traces(lambda: f64, energy: f64) -> TraceState {
    TraceState {
        triple: [1.0, energy / 2.0, (energy - lambda) / 2.0],
        generation: 0,
        energy,
        lambda,
    }
}

pub fn invariant(state: &TraceState) -> f64 {
    let [z, y, x] = state.triple;
    x * x + y * y + z * z - 2.0 * x * y * z - 1.0
}

pub fn iterate(state: &TraceState) -> Result<TraceState, TraceOverflow> {
    let [a, b, c] = state.triple;
    let next = 2.0 * c * b - a;
    let generation = state.generation + 1;
    if !(next.abs() <= OVERFLOW_GUARD) {
        return Err(TraceOverflow {
            generation: generation + 1,
            value: next,
        });
    }
    Ok(TraceState {
        triple: [b, c, next],
        generation,
        ..*state
    })
}

/// Half trace `x_k` for `k >= -1`, or `None` if the orbit overflows first.
pub fn half_trace(lambda: f64, energy: f64, k: i64) -> Option<f64> {
    let mut s = initial_traces(lambda, energy);
    if k < 1 {
        return usize::try_from(k + 1).ok().map(|i| s.triple[i]);
    }
    while s.generation + 1 < k {
        s = iterate(&s).ok()?;
    }
    Some(s.triple[2])
}

/// First `k` (with `1 <= k <= max_steps`) such that `|x_{k-1}| > 1` and `|x_k| > 1`.
///
/// # Panics
/// If `max_steps > 200`.
pub fn escape_time(lambda: f64, energy: f64, max_steps: usize) -> Escape {
    assert!(max_steps <= 200, "max_steps must be <= 200");
    let mut s = initial_traces(lambda, energy);
    // s.triple = (x_{k-1}, x_k, x_{k+1}) at generation k
    for k in 0..=max_steps {
        let [prev, cur, _] = s.triple;
        if k >= 1 && prev.abs() > 1.0 && cur.abs() > 1.0 {
            return Escape::Escaped(k);
        }
        match iterate(&s) {
            Ok(next) => s = next,
            // beyond the guard both neighbours are already huge
            Err(_) => return Escape::Escaped(k + 1),
        }
    }
    Escape::Bounded
}

/// Trace-map `x_k` next to half the trace of the explicit transfer-matrix
/// product over the length-`F_k` Fibonacci prefix (`h = lambda * letter`).
pub fn trace_check(lambda: f64, energy: f64, k: usize) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::InvalidArgument("trace_check needs k >= 1".into()));
    }
    let word = fibonacci_word_capped(k, FIBONACCI_WORD_CAP)?;
    let values: Vec<f64> = word.iter().map(|&l| lambda * l as f64).collect();
    let t = transfer_matrix_from_values(&values, energy, 1, values.len())?;
    let x = half_trace(lambda, energy, k as i64).unwrap_or(f64::INFINITY);
    Ok((x, t.half_trace()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(triple: [f64; 3]) -> TraceState {
        TraceState {
            triple,
            generation: 0,
            energy: 0.0,
            lambda: 0.0,
        }
    }

    #[test]
    fn invariant_values() {
        assert_eq!(invariant(&state([1.0, 1.0, 1.0])), 0.0);
        assert_eq!(invariant(&state([0.0, 0.0, 0.0])), -1.0);
        assert!((invariant(&initial_traces(2.0, 1.0)) - 1.0).abs() < 1e-15);
        assert!(invariant(&initial_traces(0.0, 0.3)).abs() < 1e-15);
    }

    #[test]
    fn fixed_point() {
        let s = iterate(&state([1.0, 1.0, 1.0])).unwrap();
        assert_eq!(s.triple, [1.0, 1.0, 1.0]);
        assert_eq!(s.generation, 1);
    }

    #[test]
    fn free_orbit_stays_bounded() {
        let mut s = initial_traces(0.0, 2.0 * 0.3f64.cos());
        for _ in 0..30 {
            assert!(s.triple.iter().all(|x| x.abs() <= 1.0 + 1e-12));
            s = iterate(&s).unwrap();
        }
    }

    #[test]
    fn strong_coupling_escapes() {
        let mut s = initial_traces(4.0, 0.0);
        let mut overflowed = false;
        for _ in 0..30 {
            match iterate(&s) {
                Ok(next) => s = next,
                Err(_) => {
                    overflowed = true;
                    break;
                }
            }
        }
        assert!(overflowed);
    }

    #[test]
    fn escape_examples() {
        assert_eq!(escape_time(0.0, 1.0, 100), Escape::Bounded);
        assert!(matches!(escape_time(0.0, 3.0, 100), Escape::Escaped(_)));
    }

    #[test]
    fn trace_check_examples() {
        let (a, b) = trace_check(0.0, 0.5, 3).unwrap();
        assert!((a - b).abs() < 1e-9);
        let (a, b) = trace_check(2.0, 0.0, 1).unwrap();
        // single step [[E - h_1, -1], [1, 0]] with h_1 = lambda
        assert_eq!(a, -1.0);
        assert_eq!(b, -1.0);
        let (a, b) = trace_check(2.0, 0.0, 12).unwrap();
        assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0));
    }

    #[test]
    fn half_trace_low_generations() {
        assert_eq!(half_trace(3.0, 1.0, -1), Some(1.0));
        assert_eq!(half_trace(3.0, 1.0, 0), Some(0.5));
        assert_eq!(half_trace(3.0, 1.0, 1), Some(-1.0));
        assert_eq!(half_trace(3.0, 1.0, -2), None);
    }

    proptest! {
        #[test]
        fn invariant_is_conserved(lambda in 0.0f64..6.0, energy in -8.0f64..8.0) {
            let mut s = initial_traces(lambda, energy);
            for _ in 0..25 {
                let before = invariant(&s);
                match iterate(&s) {
                    Ok(next) => {
                        let after = invariant(&next);
                        // relative to the size of the terms being cancelled
                        let scale = 1.0 + before.abs() + next.triple.iter().map(|x| x * x).sum::<f64>();
                        prop_assert!((after - before).abs() <= 1e-9 * scale);
                        s = next;
                    }
                    Err(_) => break,
                }
            }
        }
    }
}
