//! Numerical verification toolkit for (para-)Kähler submanifolds of
//! para-quaternionic Kähler manifolds.
//!
//! The crate is organised bottom-up:
//!
//! * [`split_algebra`]: split quaternions and ε-complex numbers.
//! * [`pq_linear`]: neutral metrics, adapted bases, subspace splitting and
//!   the first prolongation `S_J^(1)` with its cubic-form decomposition.
//! * [`curvature`]: algebraic curvature tensors of the model spaces and the
//!   pointwise identities they satisfy.
//! * [`chart`]: finite-difference Levi-Civita calculus on coordinate charts.
//! * [`models`]: flat and projective charts together with the standard
//!   immersions into them.
//! * [`submanifold`]: second-order submanifold data, classification and the
//!   Gauss–Codazzi–Ricci layer.
//!
//! Residuals are plain `f64`s. Nothing in the crate decides pass/fail except
//! against the thresholds pinned in [`tolerances`].

pub mod chart;
pub mod curvature;
pub mod error;
pub mod linalg;
pub mod models;
pub mod pq_linear;
pub mod sampling;
pub mod split_algebra;
pub mod submanifold;
pub mod tolerances;

pub use error::{Error, Result};
pub use split_algebra::{Eps, EpsilonComplex, SplitQuaternion};

/// Dense real matrix used throughout.
pub type Mat = nalgebra::DMatrix<f64>;
/// Dense real column vector used throughout.
pub type Vector = nalgebra::DVector<f64>;
