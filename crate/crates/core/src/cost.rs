//! The three cost components and their combinations.
//!
//! A user charging at charger `j` pays
//! `w1 * (T_j + t_i) / n_j + w2 * p_j * t_i + w3 * D_ij`
//! where `T_j` is the committed energy at the charger (charging minutes left
//! for everyone already there), `n_j` its capacity, `p_j` its per-minute
//! price, `t_i` the user's demand, and `D_ij` the user-to-charger distance in
//! effort units.
//!
//! The same breakdown exists in two flavors: an *estimate* made before
//! assignment from a charger status snapshot, and a *realized* value made
//! after simulation from what actually happened (delay = waiting plus
//! charging time).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::Real;
use crate::scenario::{ChargerSpec, Position, Weights};
use crate::{Cents, Meters, Minutes, Scalar};

/// Raw cost components plus their weighted overall value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// Delay component before weighting, in minutes.
    pub delay: Scalar,
    /// Price component before weighting, in cents.
    pub price: Scalar,
    /// Effort component before weighting, in effort units.
    pub effort: Scalar,
    /// `w1 * delay + w2 * price + w3 * effort`.
    pub overall: Scalar,
}

impl CostBreakdown {
    pub fn new(delay: Scalar, price: Scalar, effort: Scalar, weights: &Weights) -> Self {
        CostBreakdown {
            delay,
            price,
            effort,
            overall: weighted_overall(delay, price, effort, weights),
        }
    }

    /// Recompute the overall value from the stored raw components.
    pub fn recompute_overall(&self, weights: &Weights) -> Scalar {
        weighted_overall(self.delay, self.price, self.effort, weights)
    }
}

/// Cost-model parameters: component weights plus the effort normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub weights: Weights,
    /// Meters of walking per effort unit.
    pub effort_unit_m: Meters,
}

impl CostParams {
    pub fn new(weights: Weights, effort_unit_m: Meters) -> Self {
        CostParams {
            weights,
            effort_unit_m,
        }
    }
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            weights: Weights::default(),
            effort_unit_m: crate::scenario::DEFAULT_EFFORT_UNIT_M,
        }
    }
}

/// Euclidean distance between two points.
pub fn euclidean<R: Real>(a: (R, R), b: (R, R)) -> R {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    (dx * dx + dy * dy).sqrt()
}

/// Distance in effort units: Euclidean meters divided by `effort_unit_m`.
pub fn distance_cost<R: Real>(user: (R, R), charger: (R, R), effort_unit_m: R) -> R {
    euclidean(user, charger) / effort_unit_m
}

/// Queueing-delay proxy `(committed + demand) / capacity`.
pub fn delay_proxy<R: Real>(committed: R, demand: R, capacity: R) -> R {
    (committed + demand) / capacity
}

fn weighted_overall(delay: Scalar, price: Scalar, effort: Scalar, weights: &Weights) -> Scalar {
    weights.w1 * delay + weights.w2 * price + weights.w3 * effort
}

/// Live load of one charger at a point in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargerLoad {
    /// Remaining charging minutes committed to users in service or queued.
    pub committed_min: Minutes,
    /// Sessions currently charging.
    pub in_service: u32,
    /// Users waiting in the queue.
    pub queued: u32,
    /// Time the snapshot was taken, in simulation minutes.
    pub as_of_min: Minutes,
}

impl ChargerLoad {
    pub fn idle(as_of_min: Minutes) -> Self {
        ChargerLoad {
            committed_min: 0.0,
            in_service: 0,
            queued: 0,
            as_of_min,
        }
    }

    /// Extrapolate the committed energy to `now`.
    ///
    /// Between discrete state changes each in-service session drains one
    /// committed minute per minute, so the linear extrapolation is exact
    /// until the next state change.
    pub fn aged_to(&self, now: Minutes) -> ChargerLoad {
        if now <= self.as_of_min {
            return *self;
        }
        let drained = self.in_service as Scalar * (now - self.as_of_min);
        ChargerLoad {
            committed_min: (self.committed_min - drained).max(0.0),
            in_service: self.in_service,
            queued: self.queued,
            as_of_min: now,
        }
    }
}

/// Charger spec plus its reported load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargerStatus {
    pub charger: ChargerSpec,
    pub load: ChargerLoad,
}

impl ChargerStatus {
    pub fn idle(charger: ChargerSpec, as_of_min: Minutes) -> Self {
        ChargerStatus {
            charger,
            load: ChargerLoad::idle(as_of_min),
        }
    }

    pub fn aged_to(&self, now: Minutes) -> ChargerStatus {
        ChargerStatus {
            charger: self.charger.clone(),
            load: self.load.aged_to(now),
        }
    }
}

/// Estimated cost of sending a user with `demand_min` to `status`'s charger.
pub fn estimated_cost(
    demand_min: Minutes,
    status: &ChargerStatus,
    user_position: Position,
    params: &CostParams,
) -> CostBreakdown {
    estimated_batch_member_cost(demand_min, 0.0, status, user_position, params)
}

/// Estimated cost for a batch member that joins the charger after earlier
/// batch members already committed `prior_batch_min` charging minutes there.
///
/// The k-th batch member (k = 0, 1, ...) sees the committed energy grow by
/// the demand of the k earlier members, hence a delay proxy of
/// `(T_j + prior + t_i) / n_j`. A prior of zero reduces to
/// [`estimated_cost`].
pub fn estimated_batch_member_cost(
    demand_min: Minutes,
    prior_batch_min: Minutes,
    status: &ChargerStatus,
    user_position: Position,
    params: &CostParams,
) -> CostBreakdown {
    let committed = status.load.committed_min + prior_batch_min;
    let delay = delay_proxy(committed, demand_min, status.charger.capacity as Scalar);
    let price = status.charger.price_cents_per_min * demand_min;
    let effort = distance_cost(
        user_position,
        status.charger.position_m,
        params.effort_unit_m,
    );
    CostBreakdown::new(delay, price, effort, &params.weights)
}

/// The outcome is still in flight; realized costs need a completion time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("outcome is not finished; realized cost needs a completion time")]
pub struct NotFinished;

/// Realized cost of a completed charge.
///
/// Realized delay is the full span from the charging request to completion:
/// waiting (including any wait for a batch assignment) plus charging time.
pub fn realized_cost(
    assignment_min: Minutes,
    completion_min: Option<Minutes>,
    price_paid_cents: Cents,
    origin: Position,
    charger_position: Position,
    params: &CostParams,
) -> Result<CostBreakdown, NotFinished> {
    let completion = completion_min.ok_or(NotFinished)?;
    let delay = completion - assignment_min;
    let effort = distance_cost(origin, charger_position, params.effort_unit_m);
    Ok(CostBreakdown::new(
        delay,
        price_paid_cents,
        effort,
        &params.weights,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_default_scenario, price_schedule};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn status(
        committed: Minutes,
        capacity: u32,
        price: Cents,
        position: Position,
    ) -> ChargerStatus {
        let mut spec = build_default_scenario().chargers[0].clone();
        spec.capacity = capacity;
        spec.price_cents_per_min = price;
        spec.position_m = position;
        ChargerStatus {
            charger: spec,
            load: ChargerLoad {
                committed_min: committed,
                in_service: 0,
                queued: 0,
                as_of_min: 0.0,
            },
        }
    }

    #[test]
    fn distance_cost_examples() {
        assert_eq!(distance_cost((3.0, 4.0), (3.0, 4.0), 100.0), 0.0);
        assert_relative_eq!(
            distance_cost((0.0, 0.0), (0.0, 125.0), 100.0),
            1.25,
            epsilon = 1e-12
        );
        assert!((distance_cost((0.0f32, 0.0), (30.0, 40.0), 100.0) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn estimated_cost_formula() {
        let price = price_schedule::<f64>(1).unwrap();
        let s = status(0.0, 3, price, (0.0, 0.0));
        let b = estimated_cost(20.0, &s, (0.0, 0.0), &CostParams::default());
        assert_relative_eq!(b.delay, 20.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(b.price, 6.6, epsilon = 1e-9);
        assert_eq!(b.effort, 0.0);
        assert_relative_eq!(b.overall, 20.0 / 3.0 + 6.6, epsilon = 1e-9);
    }

    #[test]
    fn estimated_delay_with_committed_energy() {
        let s = status(40.0, 3, 0.5, (0.0, 0.0));
        let b = estimated_cost(20.0, &s, (0.0, 0.0), &CostParams::default());
        assert_relative_eq!(b.delay, 20.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_weights_zero_overall() {
        let s = status(40.0, 3, 0.5, (10.0, 10.0));
        let params = CostParams::new(
            Weights {
                w1: 0.0,
                w2: 0.0,
                w3: 0.0,
            },
            100.0,
        );
        let b = estimated_cost(20.0, &s, (0.0, 0.0), &params);
        assert_eq!(b.overall, 0.0);
        assert!(b.delay > 0.0);
    }

    #[test]
    fn realized_cost_examples() {
        let params = CostParams::default();
        // Served immediately: delay equals the demand.
        let b = realized_cost(100.0, Some(120.0), 6.6, (0.0, 0.0), (0.0, 0.0), &params).unwrap();
        assert_eq!(b.delay, 20.0);
        // Waits 10 minutes, then charges 20.
        let b = realized_cost(100.0, Some(130.0), 6.6, (0.0, 0.0), (0.0, 0.0), &params).unwrap();
        assert_eq!(b.delay, 30.0);
        assert_eq!(
            realized_cost(100.0, None, 6.6, (0.0, 0.0), (0.0, 0.0), &params),
            Err(NotFinished)
        );
    }

    #[test]
    fn load_aging_drains_linearly() {
        let load = ChargerLoad {
            committed_min: 50.0,
            in_service: 2,
            queued: 1,
            as_of_min: 10.0,
        };
        let aged = load.aged_to(15.0);
        assert_relative_eq!(aged.committed_min, 40.0, epsilon = 1e-12);
        assert_eq!(aged.as_of_min, 15.0);
        // Never negative, never rejuvenated.
        assert_eq!(load.aged_to(1000.0).committed_min, 0.0);
        assert_eq!(load.aged_to(5.0), load);
    }

    proptest! {
        #[test]
        fn estimated_cost_monotonicity(
            committed in 0.0..200.0f64,
            demand in 0.1..60.0f64,
            price in 0.0..2.0f64,
            capacity in 1u32..6,
            dist in 0.0..500.0f64,
            bump in 0.01..50.0f64,
        ) {
            let params = CostParams::default();
            let user = (dist, 0.0);
            let base = estimated_cost(demand, &status(committed, capacity, price, (0.0, 0.0)), user, &params);

            // Nondecreasing in committed energy, demand, price, and distance.
            let more_committed = estimated_cost(demand, &status(committed + bump, capacity, price, (0.0, 0.0)), user, &params);
            prop_assert!(more_committed.overall >= base.overall);
            let more_demand = estimated_cost(demand + bump, &status(committed, capacity, price, (0.0, 0.0)), user, &params);
            prop_assert!(more_demand.overall >= base.overall);
            let pricier = estimated_cost(demand, &status(committed, capacity, price + bump, (0.0, 0.0)), user, &params);
            prop_assert!(pricier.overall >= base.overall);
            let farther = estimated_cost(demand, &status(committed, capacity, price, (0.0, 0.0)), (dist + bump, 0.0), &params);
            prop_assert!(farther.overall >= base.overall);

            // Nonincreasing in capacity.
            let roomier = estimated_cost(demand, &status(committed, capacity + 1, price, (0.0, 0.0)), user, &params);
            prop_assert!(roomier.overall <= base.overall);
        }

        #[test]
        fn weight_scaling_scales_overall(
            committed in 0.0..200.0f64,
            demand in 0.1..60.0f64,
            price in 0.0..2.0f64,
            w1 in 0.0..3.0f64,
            w2 in 0.0..3.0f64,
            w3 in 0.0..3.0f64,
            c in 0.1..10.0f64,
        ) {
            let weights = Weights { w1, w2, w3 };
            let scaled = Weights { w1: c * w1, w2: c * w2, w3: c * w3 };
            let s = status(committed, 3, price, (50.0, 80.0));
            let a = estimated_cost(demand, &s, (0.0, 0.0), &CostParams::new(weights, 100.0));
            let b = estimated_cost(demand, &s, (0.0, 0.0), &CostParams::new(scaled, 100.0));
            prop_assert!((b.overall - c * a.overall).abs() <= 1e-9 * (1.0 + b.overall.abs()));
        }

        #[test]
        fn distance_is_symmetric(ax in -1e4..1e4f64, ay in -1e4..1e4f64, bx in -1e4..1e4f64, by in -1e4..1e4f64) {
            let d1 = distance_cost((ax, ay), (bx, by), 100.0);
            let d2 = distance_cost((bx, by), (ax, ay), 100.0);
            prop_assert_eq!(d1, d2);
        }

        #[test]
        fn breakdown_overall_recomputes(delay in 0.0..100.0f64, price in 0.0..50.0f64, effort in 0.0..10.0f64) {
            let weights = Weights { w1: 1.5, w2: 0.5, w3: 2.0 };
            let b = CostBreakdown::new(delay, price, effort, &weights);
            prop_assert_eq!(b.recompute_overall(&weights), b.overall);
        }
    }
}
