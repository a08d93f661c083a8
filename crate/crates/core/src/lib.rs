//! Exact-arithmetic workbench for the free locally convex space over `Z` and
//! the weighted bilateral shift whose orbit topology makes the lifted shift
//! operator free of non-trivial closed invariant subspaces.
//!
//! Every verdict produced here is computed with Gaussian rationals and can be
//! replayed from its serialized inputs.

pub mod builder;
pub mod character;
pub mod elim;
pub mod error;
pub mod exact;
pub mod measure;
pub mod probe;
pub mod report;
pub mod sample;
pub mod shift;
pub mod sparse;
pub mod weak;
pub mod witness;

pub use error::{Error, Result};
pub use exact::{ComplexRational, Rational};
pub use measure::{FiniteMeasure, Polynomial, TestFunction};
pub use shift::SparseVector;
pub use weak::NeighborhoodSpec;
