//! Lipschitz flattening of functions on flowers of expanding circle maps.
//!
//! A flower `F` is a union of closed arcs on which an expanding map `T` is
//! injective up to finitely many boundary points. A Lipschitz `f` is
//! flattened on `F` when `f + phi - phi o T` is constant on `F` for some
//! Lipschitz `phi`. This crate builds flowers and their pre-image selectors,
//! evaluates the `p` linear functionals whose vanishing characterises
//! flattening, constructs the coboundary, and solves the one-parameter
//! problem on 1-flowers that locates Sturmian maximizing measures.

pub mod circle;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod flatten;
pub mod flower;
pub mod functions;
pub mod solve;

pub use circle::{Arc, CirclePoint, CyclicOrder, StepFunction, EPS_PT};
pub use dynamics::{ExpandingMap, PeriodicOrbit, RationalPoint};
pub use error::{Error, Result};
pub use flatten::{build_coboundary, functional, Bounded, Coboundary, EscapeFunction};
pub use flower::{Discontinuity, Flower, Selector, Side};
pub use functions::{CircleFunction, PiecewiseLinearFunction, TrigPolynomial};
pub use solve::{OneFlowerFamily, SturmianEstimate, SturmianEstimator, SturmianOptions, ZeroInterval};

