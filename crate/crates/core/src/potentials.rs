//! Transverse-field sequences `h_1..h_N`.
//!
//! Sturmian fields are evaluated as `lambda * 1[(x*theta + omega) mod 1 in [1-theta, 1)]`.
//! The product `x*theta` is accumulated in double-double so that sites whose
//! rotation lands near the window edge are classified correctly for large `x`.
//! A rotation given as an `f64` is taken at face value (its exact binary
//! value); only the default golden rotation carries extra precision. Rational
//! rotations are outside the model.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};

/// Longest Fibonacci word [`fibonacci_word`] will build by default.
pub const FIBONACCI_WORD_CAP: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Sturmian,
    Dimer,
    Periodic,
    Constant,
}

/// Recipe for a field. Only the fields relevant to `kind` are consulted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub kind: FieldKind,
    #[serde(default)]
    pub lambda: f64,
    /// Rotation number; `None` is the inverse golden mean (sqrt(5)-1)/2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<f64>,
    #[serde(default)]
    pub omega: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pattern: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    pub length: usize,
}

impl FieldSpec {
    pub fn fibonacci(lambda: f64, omega: f64, length: usize) -> Self {
        Self {
            kind: FieldKind::Sturmian,
            lambda,
            rotation: None,
            omega,
            pattern: Vec::new(),
            seed: 0,
            length,
        }
    }

    pub fn sturmian(lambda: f64, rotation: f64, omega: f64, length: usize) -> Self {
        Self {
            rotation: Some(rotation),
            ..Self::fibonacci(lambda, omega, length)
        }
    }

    pub fn dimer(lambda: f64, seed: u64, length: usize) -> Self {
        Self {
            kind: FieldKind::Dimer,
            seed,
            ..Self::fibonacci(lambda, 0.0, length)
        }
    }

    pub fn periodic(pattern: Vec<f64>, length: usize) -> Self {
        Self {
            kind: FieldKind::Periodic,
            pattern,
            ..Self::fibonacci(0.0, 0.0, length)
        }
    }

    pub fn constant(lambda: f64, length: usize) -> Self {
        Self {
            kind: FieldKind::Constant,
            ..Self::fibonacci(lambda, 0.0, length)
        }
    }

    /// Same recipe at a different chain length.
    pub fn with_length(&self, length: usize) -> Self {
        Self {
            length,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad(format!("lambda must be finite and >= 0, got {}", self.lambda));
        }
        if self.length == 0 {
            return bad("length must be >= 1".into());
        }
        match self.kind {
            FieldKind::Sturmian => {
                if let Some(theta) = self.rotation {
                    if !(theta > 0.0 && theta < 1.0) {
                        return bad(format!("rotation must lie in (0, 1), got {theta}"));
                    }
                }
                if !(self.omega >= 0.0 && self.omega < 1.0) {
                    return bad(format!("omega must lie in [0, 1), got {}", self.omega));
                }
            }
            FieldKind::Periodic => {
                if self.pattern.is_empty() {
                    return bad("periodic field needs a nonempty pattern".into());
                }
                if self.pattern.iter().any(|v| !v.is_finite()) {
                    return bad("pattern values must be finite".into());
                }
            }
            FieldKind::Dimer | FieldKind::Constant => {}
        }
        Ok(())
    }

    fn rotation_dd(&self) -> DoubleDouble {
        match self.rotation {
            Some(theta) => DoubleDouble::from_f64(theta),
            None => DoubleDouble::inverse_golden_mean(),
        }
    }
}

/// A realized field; `values[i]` is `h_{i+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub spec: FieldSpec,
    pub values: Vec<f64>,
}

impl Field {
    /// Builds the field described by `spec`, dispatching on its kind.
    pub fn generate(spec: &FieldSpec) -> Result<Self> {
        match spec.kind {
            FieldKind::Sturmian => sturmian_field(spec),
            FieldKind::Dimer => dimer_field(spec),
            FieldKind::Periodic => periodic_field(spec),
            FieldKind::Constant => constant_field(spec),
        }
    }

    /// Wraps raw values (kind is recorded as periodic with the values as pattern).
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let spec = FieldSpec::periodic(values.clone(), values.len());
        spec.validate()?;
        Ok(Self { spec, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `h_x` with 1-based site index.
    pub fn h(&self, x: usize) -> f64 {
        self.values[x - 1]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn sturmian_field(spec: &FieldSpec) -> Result<Field> {
    if spec.kind != FieldKind::Sturmian {
        return Err(Error::InvalidSpec("sturmian_field needs kind = sturmian".into()));
    }
    spec.validate()?;
    let theta = spec.rotation_dd();
    let values = (1..=spec.length)
        .map(|x| {
            let frac = theta.frac_of_affine(x as f64, spec.omega);
            if frac.sum_minus_one_is_nonnegative(theta) {
                spec.lambda
            } else {
                0.0
            }
        })
        .collect();
    Ok(Field {
        spec: spec.clone(),
        values,
    })
}

/// Fibonacci word of generation `k` (length `F_k`, with `F_1 = 1`, `F_2 = 2`).
///
/// Built from `a -> ab, b -> a` starting at `a`, with `a` written as 1 and `b`
/// as 0 and no index shift. With that convention the word coincides with
/// `sturmian_field(lambda = 1, theta = phi, omega = 0)` letter by letter.
pub fn fibonacci_word(k: usize) -> Result<Vec<u8>> {
    fibonacci_word_capped(k, FIBONACCI_WORD_CAP)
}

pub fn fibonacci_word_capped(k: usize, cap: usize) -> Result<Vec<u8>> {
    if k == 0 {
        return Err(Error::InvalidArgument("generation k must be >= 1".into()));
    }
    let len = fibonacci_length(k).filter(|&l| l <= cap).ok_or(Error::CapExceeded {
        requested: fibonacci_length(k).unwrap_or(usize::MAX),
        cap,
    })?;
    // w_{j+1} = w_j w_{j-1}, w_0 = "b", w_1 = "a"
    let mut prev = vec![0u8];
    let mut cur = vec![1u8];
    for _ in 1..k {
        let mut next = Vec::with_capacity(cur.len() + prev.len());
        next.extend_from_slice(&cur);
        next.extend_from_slice(&prev);
        prev = std::mem::replace(&mut cur, next);
    }
    debug_assert_eq!(cur.len(), len);
    Ok(cur)
}

/// First `n` letters of the infinite Fibonacci word.
pub fn fibonacci_prefix(n: usize) -> Result<Vec<u8>> {
    let mut k = 1;
    while fibonacci_length(k).is_some_and(|l| l < n) {
        k += 1;
    }
    let mut w = fibonacci_word(k)?;
    w.truncate(n);
    Ok(w)
}

/// `F_k` with `F_0 = 1`, `F_1 = 1`, `F_2 = 2`; `None` on overflow.
pub fn fibonacci_length(k: usize) -> Option<usize> {
    let (mut a, mut b) = (1usize, 1usize);
    for _ in 0..k {
        let c = a.checked_add(b)?;
        a = b;
        b = c;
    }
    Some(a)
}

pub fn dimer_field(spec: &FieldSpec) -> Result<Field> {
    if spec.kind != FieldKind::Dimer {
        return Err(Error::InvalidSpec("dimer_field needs kind = dimer".into()));
    }
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut values = Vec::with_capacity(spec.length);
    while values.len() < spec.length {
        let v = if rng.random::<bool>() {
            spec.lambda
        } else {
            -spec.lambda
        };
        values.push(v);
        // odd N: the trailing site is a lone draw
        if values.len() < spec.length {
            values.push(v);
        }
    }
    Ok(Field {
        spec: spec.clone(),
        values,
    })
}

pub fn periodic_field(spec: &FieldSpec) -> Result<Field> {
    if spec.kind != FieldKind::Periodic {
        return Err(Error::InvalidSpec("periodic_field needs kind = periodic".into()));
    }
    spec.validate()?;
    let values = spec.pattern.iter().copied().cycle().take(spec.length).collect();
    Ok(Field {
        spec: spec.clone(),
        values,
    })
}

pub fn constant_field(spec: &FieldSpec) -> Result<Field> {
    if spec.kind != FieldKind::Constant {
        return Err(Error::InvalidSpec("constant_field needs kind = constant".into()));
    }
    spec.validate()?;
    Ok(Field {
        spec: spec.clone(),
        values: vec![spec.lambda; spec.length],
    })
}

/// Number of distinct factors (contiguous subwords) of length `n`.
pub fn factor_complexity<T: Eq + std::hash::Hash>(word: &[T], n: usize) -> Result<usize> {
    if n == 0 || n > word.len() {
        return Err(Error::IndexOutOfRange {
            what: "factor length n",
            index: n,
            lo: 1,
            hi: word.len(),
        });
    }
    Ok(word.windows(n).collect::<HashSet<_>>().len())
}
