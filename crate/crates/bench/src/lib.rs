//! Fixtures shared by the criterion benches.

use lrcone_core::onebody::eigensystem;
use lrcone_core::{build_operator, EigenSystem, Field, FieldSpec};

pub fn fibonacci_field(lambda: f64, n: usize) -> Field {
    Field::generate(&FieldSpec::fibonacci(lambda, 0.0, n)).expect("valid spec")
}

pub fn fibonacci_eigensystem(lambda: f64, n: usize) -> EigenSystem {
    eigensystem(&build_operator(&fibonacci_field(lambda, n))).expect("eigensolver converges")
}
