//! Scalar abstraction for the numeric kernels.
//!
//! The cost model, the matching solver, the rate shaping, and the link-model
//! formulas are written against [`Real`] so they work with `f32` and `f64`
//! alike. The rest of the crate instantiates them through the [`crate::Scalar`]
//! alias.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, NumCast};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + NumCast + Debug + 'static {}

impl<T> Real for T where T: Float + FromPrimitive + NumCast + Debug + 'static {}
