//! Numerical laboratory for cubic homoclinic tangencies.
//!
//! The crate is organised by subsystem:
//!
//! * [`maps1d`]: the N-map, the cubic family `F(y) = -y^3 + mu*y + nu`, their
//!   conjugacy, Schwarzian derivatives and periodic orbits.
//! * [`cantor`]: exact affine Cantor sets, thickness, the Gap Lemma check,
//!   Markov branch systems and image Cantor sets.
//! * [`renorm`]: the renormalization of a model saddle family near a cubic
//!   tangency and the decay of its residuals.
//! * [`planar`]: orbits, saddles, Lyapunov exponents, invariant manifolds and
//!   tangency detection/classification for planar maps.
//! * [`wangyoung`]: the Misiurewicz/transversality certificate for the cubic
//!   family and the cubic Hénon-like family `T`.
//! * [`verify`]: the acceptance checks, shared by the test suite and the CLI.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cantor;
pub mod interval;
pub mod maps1d;
pub mod planar;
pub mod rational;
pub mod renorm;
pub mod verify;
pub mod wangyoung;

pub use interval::{Interval, Rect};
pub use rational::Rational;
