//! Simulation and optimization library for networked wireless-charger
//! deployments.
//!
//! A service area is divided into a grid of areas, each hosting a wireless
//! charger with a limited number of concurrent charging slots. Users arrive
//! over time, pick (or are assigned) a charger, queue FIFO, and charge for a
//! fixed demand. Three assignment schemes are provided:
//!
//! * **nearest** — the user walks to the closest charger, with no access to
//!   charger load information;
//! * **individual** — the user queries the charger registry and picks the
//!   charger minimizing its own estimated cost;
//! * **optimal** — a central server batches pending users and solves a
//!   min-cost bipartite matching over slot-expanded chargers, minimizing the
//!   total estimated cost of the batch.
//!
//! Charging sessions are driven through Qi or A4WP (PTU/PRU) protocol state
//! machines. The discrete-event engine is deterministic for a fixed seed, so
//! every experiment is reproducible bit for bit.

// Guards written as `!(x > 0.0)` deliberately treat NaN as invalid input.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
pub mod cost;
pub mod linkmodel;
pub mod matching;
pub mod numeric;
pub mod protocol;
pub mod registry;
pub mod scenario;
pub mod simulator;
pub mod stats;

pub use numeric::Real;

/// Concrete scalar used by the domain types and the simulator.
pub type Scalar = f64;
/// Simulated time and energy demand, in minutes of charging.
pub type Minutes = Scalar;
/// Distances and coordinates, in meters.
pub type Meters = Scalar;
/// Prices, in cents.
pub type Cents = Scalar;
