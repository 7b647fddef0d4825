//! Pricing, wage and fleet-sizing model for a ride-sourcing platform that
//! operates autonomous vehicles alongside human drivers.

// `!(x > 0.0)` style checks are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod model;
pub mod equilibrium;
pub mod dual;
pub mod refine;
pub mod scenario;
