//! Lieb-Robinson light cones and transport exponents for the isotropic XY chain
//! in quasi-periodic and random dimer fields.
//!
//! The chain maps to free fermions hopping with the one-body operator
//! `(h psi)_x = psi_{x+1} + psi_{x-1} + h_x psi_x`, so almost everything is
//! computed from one tridiagonal eigendecomposition. [`manybody`] holds a dense
//! exact oracle for short chains.

// `!(x > 0.0)` is used throughout to reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod dd;
pub mod error;
pub mod lrbounds;
pub mod manybody;
pub mod onebody;
pub mod potentials;
pub mod stats;
pub mod tracemap;
pub mod transport;

pub use error::{Error, Result};
pub use lrbounds::{ConeFit, ConeGrid, ConeQuantity, PowerLawFit};
pub use manybody::DenseOperator;
pub use onebody::{build_operator, AmplitudeRow, EigenSystem, OneBodyOperator, Scale, TransferMatrix};
pub use potentials::{Field, FieldKind, FieldSpec};
pub use tracemap::{Escape, TraceState};
pub use transport::{ExponentEstimate, Probe, TransportProfile};
