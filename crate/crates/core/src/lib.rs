//! Geodesics of planar Zermelo navigation problems with rotational symmetry.
//!
//! The crate covers the problem family ([`model`]), the Goh-extension bracket
//! classification of extremals ([`lie`]), the geodesic flow and exponential
//! map ([`flow`]), cusp detection on abnormal geodesics ([`cusp`]) and
//! reachable-set analysis: wavefronts, small balls, the time-minimal value
//! function and the cut locus ([`reach`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cusp;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod lie;
pub mod model;
pub mod ode;
pub mod reach;

pub use error::{Error, Result};
pub use model::{make_historical, make_power_law, make_vortex, ExtendedState, Position, ProblemDefinition};
