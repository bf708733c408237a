//! The three user-charger assignment schemes.
//!
//! * [`nearest`] — picks the closest charger; models users without access to
//!   charger status information.
//! * [`individual_select`] — picks the charger minimizing the user's own
//!   estimated cost, irrespective of other users' decisions.
//! * [`optimal_batch`] — assigns a whole batch of users at once, minimizing
//!   the batch's total estimated cost.
//!
//! Batch semantics: within a batch, members assigned to the same charger
//! queue in user-index order, and each member's delay proxy includes the
//! demand of the members ahead of it. With a common in-batch demand this is
//! solved exactly as a min-cost bipartite matching over slot-expanded
//! chargers: charger `j` contributes one column per queue slot `k`, whose
//! cost carries the k-th incremental delay. Slot costs are nondecreasing in
//! `k`, so an optimal matching always fills slots bottom-up and reproduces
//! the sequential queue. [`brute_force_batch`] enumerates every assignment
//! under the same sequential rule and serves as the exactness oracle.
//!
//! Everywhere, ties break toward the lowest charger id, then the lowest slot
//! index.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{
    distance_cost, estimated_batch_member_cost, estimated_cost, ChargerStatus, CostBreakdown,
    CostParams,
};
use crate::matching::{min_cost_assignment, MatchingError};
use crate::scenario::{ChargerId, ChargerSpec, UserId, UserRequest};
use crate::{Minutes, Scalar};

/// Assignment scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Nearest,
    Individual,
    Optimal,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Nearest, Scheme::Individual, Scheme::Optimal];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Nearest => "nearest",
            Scheme::Individual => "individual",
            Scheme::Optimal => "optimal",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nearest" => Ok(Scheme::Nearest),
            "individual" => Ok(Scheme::Individual),
            "optimal" => Ok(Scheme::Optimal),
            other => Err(format!("unknown scheme `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignmentError {
    #[error("no chargers available to assign to")]
    NoChargers,
    #[error(
        "brute-force instance too large: {combinations:.0} assignments exceed the {guard} guard"
    )]
    InstanceTooLarge { combinations: f64, guard: u64 },
    #[error("batch assignment requires a common demand; got {min} and {max} minutes")]
    HeterogeneousDemand { min: Minutes, max: Minutes },
    #[error("charger {0} is not part of the instance")]
    UnknownCharger(ChargerId),
    #[error(transparent)]
    Matching(#[from] MatchingError),
}

/// One user bound to one charger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentDecision {
    pub user: UserId,
    pub charger: ChargerId,
    /// Estimated cost at decision time; absent when the decider had no load
    /// information (the nearest scheme).
    pub estimate: Option<CostBreakdown>,
    pub scheme: Scheme,
    pub decided_at_min: Minutes,
}

/// Upper bound on brute-force enumeration size.
pub const BRUTE_FORCE_GUARD: u64 = 1_000_000;

/// Pick the closest charger; ties go to the lowest charger id.
pub fn nearest(
    user: &UserRequest,
    chargers: &[ChargerSpec],
) -> Result<AssignmentDecision, AssignmentError> {
    let mut best: Option<(&ChargerSpec, Scalar)> = None;
    for charger in chargers {
        let d = distance_cost(user.position_m, charger.position_m, 1.0);
        let better = match best {
            None => true,
            Some((cur, cur_d)) => d < cur_d || (d == cur_d && charger.id < cur.id),
        };
        if better {
            best = Some((charger, d));
        }
    }
    let (charger, _) = best.ok_or(AssignmentError::NoChargers)?;
    Ok(AssignmentDecision {
        user: user.id,
        charger: charger.id,
        estimate: None,
        scheme: Scheme::Nearest,
        decided_at_min: user.arrival_min,
    })
}

/// Pick the charger minimizing the user's own estimated cost; ties go to the
/// lowest charger id.
pub fn individual_select(
    user: &UserRequest,
    statuses: &[ChargerStatus],
    params: &CostParams,
) -> Result<AssignmentDecision, AssignmentError> {
    let mut best: Option<(&ChargerStatus, CostBreakdown)> = None;
    for status in statuses {
        let estimate = estimated_cost(user.demand_min, status, user.position_m, params);
        let better = match &best {
            None => true,
            Some((cur, cur_b)) => {
                estimate.overall < cur_b.overall
                    || (estimate.overall == cur_b.overall && status.charger.id < cur.charger.id)
            }
        };
        if better {
            best = Some((status, estimate));
        }
    }
    let (status, estimate) = best.ok_or(AssignmentError::NoChargers)?;
    Ok(AssignmentDecision {
        user: user.id,
        charger: status.charger.id,
        estimate: Some(estimate),
        scheme: Scheme::Individual,
        decided_at_min: user.arrival_min,
    })
}

/// Statuses sorted by charger id; the shared frame for batch work.
fn sorted_statuses(statuses: &[ChargerStatus]) -> Vec<&ChargerStatus> {
    let mut sorted: Vec<&ChargerStatus> = statuses.iter().collect();
    sorted.sort_by_key(|s| s.charger.id);
    sorted
}

fn batch_decision_time(statuses: &[ChargerStatus]) -> Minutes {
    statuses
        .iter()
        .map(|s| s.load.as_of_min)
        .fold(0.0, Scalar::max)
}

/// Sequential-rule cost of `users[i]` going to `sorted[assign[i]]`, summed in
/// user-index order. This single evaluation path backs both the matching
/// solver and the brute-force oracle, so equal assignments yield bit-equal
/// totals.
fn sequential_total(
    users: &[UserRequest],
    sorted: &[&ChargerStatus],
    params: &CostParams,
    assign: &[usize],
    prior: &mut [Minutes],
) -> Scalar {
    prior.fill(0.0);
    let mut total = 0.0;
    for (user, &c) in users.iter().zip(assign) {
        let b = estimated_batch_member_cost(
            user.demand_min,
            prior[c],
            sorted[c],
            user.position_m,
            params,
        );
        prior[c] += user.demand_min;
        total += b.overall;
    }
    total
}

fn sequential_breakdowns(
    users: &[UserRequest],
    sorted: &[&ChargerStatus],
    params: &CostParams,
    assign: &[usize],
) -> Vec<CostBreakdown> {
    let mut prior = vec![0.0; sorted.len()];
    users
        .iter()
        .zip(assign)
        .map(|(user, &c)| {
            let b = estimated_batch_member_cost(
                user.demand_min,
                prior[c],
                sorted[c],
                user.position_m,
                params,
            );
            prior[c] += user.demand_min;
            b
        })
        .collect()
}

fn decisions_from_assignment(
    users: &[UserRequest],
    sorted: &[&ChargerStatus],
    params: &CostParams,
    assign: &[usize],
    scheme: Scheme,
    decided_at_min: Minutes,
) -> Vec<AssignmentDecision> {
    let breakdowns = sequential_breakdowns(users, sorted, params, assign);
    users
        .iter()
        .zip(assign)
        .zip(breakdowns)
        .map(|((user, &c), estimate)| AssignmentDecision {
            user: user.id,
            charger: sorted[c].charger.id,
            estimate: Some(estimate),
            scheme,
            decided_at_min,
        })
        .collect()
}

/// Total sequential-rule cost of a set of decisions against an instance.
pub fn evaluate_decisions(
    users: &[UserRequest],
    statuses: &[ChargerStatus],
    params: &CostParams,
    decisions: &[AssignmentDecision],
) -> Result<Scalar, AssignmentError> {
    let sorted = sorted_statuses(statuses);
    let mut assign = Vec::with_capacity(users.len());
    for (user, decision) in users.iter().zip(decisions) {
        debug_assert_eq!(user.id, decision.user);
        let idx = sorted
            .iter()
            .position(|s| s.charger.id == decision.charger)
            .ok_or(AssignmentError::UnknownCharger(decision.charger))?;
        assign.push(idx);
    }
    let mut prior = vec![0.0; sorted.len()];
    Ok(sequential_total(
        users, &sorted, params, &assign, &mut prior,
    ))
}

fn require_common_demand(users: &[UserRequest]) -> Result<Minutes, AssignmentError> {
    let first = users[0].demand_min;
    let (mut lo, mut hi) = (first, first);
    for user in users {
        lo = lo.min(user.demand_min);
        hi = hi.max(user.demand_min);
    }
    if lo != hi {
        return Err(AssignmentError::HeterogeneousDemand { min: lo, max: hi });
    }
    Ok(first)
}

/// Assign a batch of users to chargers, minimizing total estimated cost.
///
/// Exact: the total equals [`brute_force_batch`]'s total. Requires a common
/// in-batch demand (the slot expansion needs one; the simulator's demand
/// model always provides it). A batch of one reduces to
/// [`individual_select`].
pub fn optimal_batch(
    users: &[UserRequest],
    statuses: &[ChargerStatus],
    params: &CostParams,
) -> Result<Vec<AssignmentDecision>, AssignmentError> {
    if users.is_empty() {
        return Ok(Vec::new());
    }
    if statuses.is_empty() {
        return Err(AssignmentError::NoChargers);
    }
    let demand = require_common_demand(users)?;
    let sorted = sorted_statuses(statuses);
    let batch = users.len();

    // Slot priors by repeated addition, matching the sequential evaluation
    // bit for bit.
    let mut slot_prior = Vec::with_capacity(batch);
    let mut acc: Minutes = 0.0;
    for _ in 0..batch {
        slot_prior.push(acc);
        acc += demand;
    }

    // Column layout: (charger index in id order) * batch + slot.
    let col_cost: Vec<Vec<Scalar>> = users
        .iter()
        .map(|user| {
            sorted
                .iter()
                .flat_map(|status| {
                    slot_prior.iter().map(|&prior| {
                        estimated_batch_member_cost(
                            user.demand_min,
                            prior,
                            status,
                            user.position_m,
                            params,
                        )
                        .overall
                    })
                })
                .collect()
        })
        .collect();

    let cols = sorted.len() * batch;
    let matched = min_cost_assignment(batch, cols, |r, c| col_cost[r][c])?;
    let assign: Vec<usize> = matched.iter().map(|c| c / batch).collect();

    Ok(decisions_from_assignment(
        users,
        &sorted,
        params,
        &assign,
        Scheme::Optimal,
        batch_decision_time(statuses),
    ))
}

/// Exhaustive oracle for [`optimal_batch`].
///
/// Enumerates every user-to-charger map in lexicographic order and evaluates
/// it under the sequential-queue rule (batch members queue in user-index
/// order; earlier members add their demand). Among cost ties the
/// lexicographically smallest assignment vector wins.
pub fn brute_force_batch(
    users: &[UserRequest],
    statuses: &[ChargerStatus],
    params: &CostParams,
) -> Result<Vec<AssignmentDecision>, AssignmentError> {
    if users.is_empty() {
        return Ok(Vec::new());
    }
    if statuses.is_empty() {
        return Err(AssignmentError::NoChargers);
    }
    let sorted = sorted_statuses(statuses);
    let combinations = (sorted.len() as f64).powi(users.len() as i32);
    if combinations > BRUTE_FORCE_GUARD as f64 {
        return Err(AssignmentError::InstanceTooLarge {
            combinations,
            guard: BRUTE_FORCE_GUARD,
        });
    }

    let mut assign = vec![0usize; users.len()];
    let mut prior = vec![0.0; sorted.len()];
    let mut best_assign = assign.clone();
    let mut best_total = Scalar::INFINITY;
    loop {
        let total = sequential_total(users, &sorted, params, &assign, &mut prior);
        // Strict improvement keeps the lexicographically smallest minimizer.
        if total < best_total {
            best_total = total;
            best_assign.copy_from_slice(&assign);
        }
        // Odometer increment, least-significant digit last.
        let mut pos = users.len();
        loop {
            if pos == 0 {
                return Ok(decisions_from_assignment(
                    users,
                    &sorted,
                    params,
                    &best_assign,
                    Scheme::Optimal,
                    batch_decision_time(statuses),
                ));
            }
            pos -= 1;
            assign[pos] += 1;
            if assign[pos] < sorted.len() {
                break;
            }
            assign[pos] = 0;
        }
    }
}

/// Greedy baseline: users decide one at a time via [`individual_select`],
/// each seeing the committed energy left behind by the earlier members.
pub fn greedy_sequential_batch(
    users: &[UserRequest],
    statuses: &[ChargerStatus],
    params: &CostParams,
) -> Result<Vec<AssignmentDecision>, AssignmentError> {
    let mut live: Vec<ChargerStatus> = sorted_statuses(statuses).into_iter().cloned().collect();
    let mut decisions = Vec::with_capacity(users.len());
    for user in users {
        let mut decision = individual_select(user, &live, params)?;
        decision.decided_at_min = batch_decision_time(statuses);
        let chosen = live
            .iter_mut()
            .find(|s| s.charger.id == decision.charger)
            .expect("chosen charger is in the live set");
        chosen.load.committed_min += user.demand_min;
        chosen.load.queued += 1;
        decisions.push(decision);
    }
    Ok(decisions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::ChargerLoad;
    use crate::scenario::{build_default_scenario, UserId, Weights};
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn user(id: u64, position: (f64, f64), demand: f64) -> UserRequest {
        UserRequest {
            id: UserId(id),
            arrival_min: 0.0,
            origin_area: 1,
            position_m: position,
            demand_min: demand,
        }
    }

    fn status_at(
        id: u32,
        position: (f64, f64),
        committed: f64,
        capacity: u32,
        price: f64,
    ) -> ChargerStatus {
        let mut spec = build_default_scenario().chargers[0].clone();
        spec.id = ChargerId(id);
        spec.position_m = position;
        spec.capacity = capacity;
        spec.price_cents_per_min = price;
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

    fn random_instance(
        rng: &mut StdRng,
        max_users: usize,
        max_chargers: usize,
    ) -> (Vec<UserRequest>, Vec<ChargerStatus>) {
        let users_n = rng.random_range(1..=max_users);
        let chargers_n = rng.random_range(1..=max_chargers);
        let users = (0..users_n)
            .map(|i| {
                user(
                    i as u64,
                    (rng.random_range(0.0..750.0), rng.random_range(0.0..750.0)),
                    20.0,
                )
            })
            .collect();
        let statuses = (0..chargers_n)
            .map(|i| {
                status_at(
                    i as u32 + 1,
                    (rng.random_range(0.0..750.0), rng.random_range(0.0..750.0)),
                    rng.random_range(0.0..60.0),
                    3,
                    rng.random_range(0.25..1.53),
                )
            })
            .collect();
        (users, statuses)
    }

    #[test]
    fn nearest_single_charger() {
        let chargers = vec![status_at(4, (10.0, 10.0), 0.0, 3, 1.0).charger];
        let d = nearest(&user(0, (500.0, 500.0), 20.0), &chargers).unwrap();
        assert_eq!(d.charger, ChargerId(4));
        assert!(d.estimate.is_none());
    }

    #[test]
    fn nearest_no_chargers_errors() {
        assert!(matches!(
            nearest(&user(0, (0.0, 0.0), 20.0), &[]),
            Err(AssignmentError::NoChargers)
        ));
    }

    #[test]
    fn nearest_in_default_grid_stays_home() {
        let scenario = build_default_scenario();
        let center = scenario.grid.center(5).unwrap();
        let d = nearest(&user(0, center, 20.0), &scenario.chargers).unwrap();
        assert_eq!(d.charger, ChargerId(5));
    }

    #[test]
    fn nearest_tie_breaks_to_lowest_id() {
        // Only chargers 2 and 5, user on their perpendicular bisector.
        let scenario = build_default_scenario();
        let c2 = scenario.chargers[1].clone();
        let c5 = scenario.chargers[4].clone();
        let midpoint = (
            (c2.position_m.0 + c5.position_m.0) / 2.0,
            (c2.position_m.1 + c5.position_m.1) / 2.0,
        );
        let d = nearest(&user(0, midpoint, 20.0), &[c5, c2]).unwrap();
        assert_eq!(d.charger, ChargerId(2));
    }

    #[test]
    fn individual_picks_cheapest_when_all_else_equal() {
        let statuses = vec![
            status_at(1, (0.0, 0.0), 0.0, 3, 0.9),
            status_at(2, (0.0, 0.0), 0.0, 3, 0.4),
            status_at(3, (0.0, 0.0), 0.0, 3, 0.7),
        ];
        let d = individual_select(
            &user(0, (0.0, 0.0), 20.0),
            &statuses,
            &CostParams::default(),
        )
        .unwrap();
        assert_eq!(d.charger, ChargerId(2));
        assert!(d.estimate.is_some());
    }

    #[test]
    fn individual_with_effort_only_weights_matches_nearest() {
        let params = CostParams::new(
            Weights {
                w1: 0.0,
                w2: 0.0,
                w3: 1.0,
            },
            100.0,
        );
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let (users, statuses) = random_instance(&mut rng, 1, 6);
            let specs: Vec<ChargerSpec> = statuses.iter().map(|s| s.charger.clone()).collect();
            let a = nearest(&users[0], &specs).unwrap();
            let b = individual_select(&users[0], &statuses, &params).unwrap();
            assert_eq!(a.charger, b.charger);
        }
    }

    #[test]
    fn individual_matches_exhaustive_argmin() {
        let statuses = vec![
            status_at(1, (0.0, 0.0), 50.0, 3, 0.33),
            status_at(2, (125.0, 0.0), 10.0, 3, 0.8),
            status_at(3, (250.0, 0.0), 0.0, 3, 1.2),
        ];
        let params = CostParams::default();
        let u = user(0, (70.0, 30.0), 20.0);
        let d = individual_select(&u, &statuses, &params).unwrap();
        let best = statuses
            .iter()
            .map(|s| {
                (
                    s.charger.id,
                    estimated_cost(20.0, s, u.position_m, &params).overall,
                )
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(d.charger, best.0);
    }

    #[test]
    fn batch_of_one_equals_individual() {
        let mut rng = StdRng::seed_from_u64(11);
        let params = CostParams::default();
        for _ in 0..300 {
            let (users, statuses) = random_instance(&mut rng, 1, 5);
            let ind = individual_select(&users[0], &statuses, &params).unwrap();
            let opt = optimal_batch(&users, &statuses, &params).unwrap();
            assert_eq!(opt.len(), 1);
            assert_eq!(opt[0].charger, ind.charger);
            assert_eq!(
                opt[0].estimate.unwrap().overall,
                ind.estimate.unwrap().overall
            );
            let brute = brute_force_batch(&users, &statuses, &params).unwrap();
            assert_eq!(brute[0].charger, ind.charger);
        }
    }

    #[test]
    fn two_users_split_over_identical_idle_chargers() {
        let statuses = vec![
            status_at(1, (0.0, 0.0), 0.0, 3, 0.5),
            status_at(2, (0.0, 0.0), 0.0, 3, 0.5),
        ];
        let users = vec![user(0, (0.0, 0.0), 20.0), user(1, (0.0, 0.0), 20.0)];
        let params = CostParams::default();
        let opt = optimal_batch(&users, &statuses, &params).unwrap();
        assert_ne!(opt[0].charger, opt[1].charger);
        let brute = brute_force_batch(&users, &statuses, &params).unwrap();
        let opt_total = evaluate_decisions(&users, &statuses, &params, &opt).unwrap();
        let brute_total = evaluate_decisions(&users, &statuses, &params, &brute).unwrap();
        assert_eq!(opt_total, brute_total);
    }

    #[test]
    fn optimal_matches_brute_force_on_random_instances() {
        let mut rng = StdRng::seed_from_u64(23);
        let params = CostParams::default();
        for _ in 0..200 {
            let (users, statuses) = random_instance(&mut rng, 4, 3);
            let opt = optimal_batch(&users, &statuses, &params).unwrap();
            let brute = brute_force_batch(&users, &statuses, &params).unwrap();
            let opt_total = evaluate_decisions(&users, &statuses, &params, &opt).unwrap();
            let brute_total = evaluate_decisions(&users, &statuses, &params, &brute).unwrap();
            assert_eq!(
                opt_total,
                brute_total,
                "users {} chargers {}",
                users.len(),
                statuses.len()
            );
        }
    }

    #[test]
    fn brute_force_ties_pick_lexicographically_smallest() {
        // Identical chargers at the user positions: with one slot-cost tie
        // structure, everyone lands on the first charger only if the total
        // truly ties; here capacities are large so queueing is negligible
        // only when split, hence check the documented contract on a real tie:
        // two users, two identical chargers, zero committed, but zero demand
        // influence removed by zero weights so every assignment costs 0.
        let params = CostParams::new(
            Weights {
                w1: 0.0,
                w2: 0.0,
                w3: 0.0,
            },
            100.0,
        );
        let statuses = vec![
            status_at(1, (0.0, 0.0), 0.0, 3, 0.5),
            status_at(2, (0.0, 0.0), 0.0, 3, 0.5),
        ];
        let users = vec![user(0, (0.0, 0.0), 20.0), user(1, (0.0, 0.0), 20.0)];
        let brute = brute_force_batch(&users, &statuses, &params).unwrap();
        assert_eq!(brute[0].charger, ChargerId(1));
        assert_eq!(brute[1].charger, ChargerId(1));
    }

    #[test]
    fn brute_force_guard_trips() {
        let statuses: Vec<ChargerStatus> = (1..=7)
            .map(|i| status_at(i, (i as f64, 0.0), 0.0, 3, 0.5))
            .collect();
        let users: Vec<UserRequest> = (0..8).map(|i| user(i, (0.0, 0.0), 20.0)).collect();
        assert!(matches!(
            brute_force_batch(&users, &statuses, &CostParams::default()),
            Err(AssignmentError::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn heterogeneous_demand_is_rejected_by_optimal() {
        let statuses = vec![status_at(1, (0.0, 0.0), 0.0, 3, 0.5)];
        let users = vec![user(0, (0.0, 0.0), 20.0), user(1, (0.0, 0.0), 25.0)];
        assert!(matches!(
            optimal_batch(&users, &statuses, &CostParams::default()),
            Err(AssignmentError::HeterogeneousDemand { .. })
        ));
    }

    #[test]
    fn empty_batch_yields_no_decisions() {
        let statuses = vec![status_at(1, (0.0, 0.0), 0.0, 3, 0.5)];
        assert!(optimal_batch(&[], &statuses, &CostParams::default())
            .unwrap()
            .is_empty());
        assert!(matches!(
            optimal_batch(&[user(0, (0.0, 0.0), 20.0)], &[], &CostParams::default()),
            Err(AssignmentError::NoChargers)
        ));
    }

    #[test]
    fn slot_costs_are_nondecreasing_in_slot_index() {
        let status = status_at(1, (40.0, 0.0), 17.0, 3, 0.7);
        let params = CostParams::default();
        let mut prior = 0.0;
        let mut prev = f64::NEG_INFINITY;
        for _ in 0..8 {
            let b = estimated_batch_member_cost(20.0, prior, &status, (0.0, 0.0), &params);
            assert!(b.overall >= prev);
            prev = b.overall;
            prior += 20.0;
        }
    }

    #[test]
    fn optimal_dominates_greedy_and_nearest() {
        let mut rng = StdRng::seed_from_u64(31);
        let params = CostParams::default();
        for _ in 0..200 {
            let (users, statuses) = random_instance(&mut rng, 5, 4);
            let opt = optimal_batch(&users, &statuses, &params).unwrap();
            let greedy = greedy_sequential_batch(&users, &statuses, &params).unwrap();
            let specs: Vec<ChargerSpec> = statuses.iter().map(|s| s.charger.clone()).collect();
            let near: Vec<AssignmentDecision> =
                users.iter().map(|u| nearest(u, &specs).unwrap()).collect();

            let opt_total = evaluate_decisions(&users, &statuses, &params, &opt).unwrap();
            let greedy_total = evaluate_decisions(&users, &statuses, &params, &greedy).unwrap();
            let near_total = evaluate_decisions(&users, &statuses, &params, &near).unwrap();
            assert!(opt_total <= greedy_total + 1e-9);
            assert!(opt_total <= near_total + 1e-9);
        }
    }

    proptest! {
        #[test]
        fn permuting_users_preserves_total_and_cost_multiset(
            seed in 0u64..5000,
            rotate in 1usize..4,
        ) {
            let mut rng = StdRng::seed_from_u64(seed);
            let (mut users, statuses) = random_instance(&mut rng, 4, 3);
            let params = CostParams::default();
            let base = optimal_batch(&users, &statuses, &params).unwrap();
            let base_total = evaluate_decisions(&users, &statuses, &params, &base).unwrap();

            let shift = rotate % users.len().max(1);
            users.rotate_left(shift);
            let rotated = optimal_batch(&users, &statuses, &params).unwrap();
            let rotated_total = evaluate_decisions(&users, &statuses, &params, &rotated).unwrap();

            prop_assert!((base_total - rotated_total).abs() <= 1e-9 * (1.0 + base_total.abs()));

            // The user-to-charger map is order-invariant (the instance is a
            // set); only the within-charger queue ranks move with the order.
            let mut base_pairs: Vec<(UserId, ChargerId)> =
                base.iter().map(|d| (d.user, d.charger)).collect();
            let mut rotated_pairs: Vec<(UserId, ChargerId)> =
                rotated.iter().map(|d| (d.user, d.charger)).collect();
            base_pairs.sort();
            rotated_pairs.sort();
            prop_assert_eq!(base_pairs, rotated_pairs);
        }

        #[test]
        fn weight_scaling_leaves_argmin_choices_unchanged(
            seed in 0u64..5000,
            c in 0.1..20.0f64,
        ) {
            let mut rng = StdRng::seed_from_u64(seed);
            let (users, statuses) = random_instance(&mut rng, 1, 6);
            let base = CostParams::default();
            let scaled = CostParams::new(
                Weights {
                    w1: c * base.weights.w1,
                    w2: c * base.weights.w2,
                    w3: c * base.weights.w3,
                },
                base.effort_unit_m,
            );
            let a = individual_select(&users[0], &statuses, &base).unwrap();
            let b = individual_select(&users[0], &statuses, &scaled).unwrap();
            prop_assert_eq!(a.charger, b.charger);
        }

        #[test]
        fn schemes_are_deterministic(seed in 0u64..2000) {
            let params = CostParams::default();
            let mut rng_a = StdRng::seed_from_u64(seed);
            let mut rng_b = StdRng::seed_from_u64(seed);
            let (users_a, statuses_a) = random_instance(&mut rng_a, 4, 4);
            let (users_b, statuses_b) = random_instance(&mut rng_b, 4, 4);
            prop_assert_eq!(
                optimal_batch(&users_a, &statuses_a, &params).unwrap(),
                optimal_batch(&users_b, &statuses_b, &params).unwrap()
            );
        }
    }
}
