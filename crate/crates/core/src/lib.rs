//! Causal structure of product spacetimes through contact topology, at desk scale.
//!
//! The crate builds the *sky* of a spacetime event -- the fan of future-pointing
//! null geodesics through it -- as a sampled Legendrian curve over a spacelike
//! Cauchy slice, transports it to the 1-jet space of the circle with the
//! hodograph contactomorphism, and reads causal relations off the resulting
//! front diagrams.  A small sublevel-set homology engine computes the minimax
//! critical value of quadratic-at-infinity generating functions, which is the
//! mechanism certifying that wavefronts of causally related events only move
//! one way.
//!
//! Everything here is pure computation on `f64` data: no IO, no global state.
//! The crate is `no_std`-compatible (allocation required); float transcendentals
//! go through [`libm`] so results are identical with and without `std`.
//!
//! Modules mirror the pipeline:
//!
//! * [`geometry`] -- chart metrics, causal classification, geodesic integration;
//! * [`causality`] -- ground-truth causal verdicts, independent of contact data;
//! * [`skies`] -- sky sampling over Cauchy slices and one-parameter sky families;
//! * [`contact`] -- hodograph, front diagrams, classical invariants, link verdicts;
//! * [`genfun`] -- generating functions, the critical-value selector, monotonicity.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod causality;
pub mod contact;
mod fmath;
pub mod genfun;
pub mod geometry;
mod linalg;
pub mod skies;

pub use geometry::{CausalClass, Event, GeodesicPath, SpacetimeMetric, Tangent, TimeSense};
