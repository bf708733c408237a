//! Deterministic discrete-event simulation of a charger network.
//!
//! Arrivals flow through scheme decisions into per-charger FIFO queues with
//! `n_j` parallel service slots; every service runs a protocol session to
//! completion. Identical `(scenario, scheme, seed)` inputs produce
//! bit-identical reports.
//!
//! Event ties at equal timestamps resolve completions before arrivals before
//! batch ticks, then by schedule order, so freed slots are visible to
//! same-instant arrivals.

mod engine;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::assignment::{AssignmentError, Scheme};
use crate::cost::CostBreakdown;
use crate::protocol::FaultSpec;
use crate::registry::RegistryError;
use crate::scenario::{
    generate_arrivals, shaped_rates, ChargerId, Position, Scenario, ScenarioError, UserId,
    UserRequest,
};
use crate::stats::{summarize, SummaryStats};
use crate::{Cents, Minutes, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("simulation invariant violated: {0}")]
    Invariant(String),
}

/// What happened to one user, start to finish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserOutcome {
    pub user: UserId,
    pub origin_area: u32,
    pub origin_m: Position,
    pub demand_min: Minutes,
    pub charger: ChargerId,
    /// Arrival time; the realized delay clock starts here.
    pub assignment_min: Minutes,
    /// When the scheme bound the user to the charger (equals the arrival for
    /// nearest and individual; the batch tick for optimal).
    pub decided_at_min: Minutes,
    /// Start of the service stint that ran to completion.
    pub service_start_min: Minutes,
    pub completion_min: Minutes,
    pub price_paid_cents: Cents,
    /// Estimated cost of the chosen charger at decision time.
    pub estimated: CostBreakdown,
    /// Realized cost: actual waiting plus charging, actual price and effort.
    pub realized: CostBreakdown,
}

/// Per-origin-area realized-cost means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaMetrics {
    pub area: u32,
    pub users: usize,
    pub mean_delay_cost: Scalar,
    pub mean_price_cost: Scalar,
    pub mean_overall_cost: Scalar,
}

/// Aggregated result of one run; means cover post-warm-up completed users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scheme: Scheme,
    pub seed: u64,
    pub users: usize,
    pub warmup_excluded: usize,
    pub per_area: Vec<AreaMetrics>,
    pub mean_delay_cost: Scalar,
    pub mean_price_cost: Scalar,
    pub mean_effort_cost: Scalar,
    pub mean_overall_cost: Scalar,
    /// Mean of the decision-time estimates, for comparison with the
    /// realized means.
    pub mean_estimated_overall_cost: Scalar,
}

/// Optional engine features used by tests and audits.
#[derive(Debug, Clone, Default)]
pub struct SimOptions {
    /// Check conservation, capacity, FIFO order, and committed-energy
    /// bookkeeping after every event.
    pub audit: bool,
    /// Abort the first service stint of these users with the given fault;
    /// the user re-queues with its remaining demand.
    pub session_faults: BTreeMap<UserId, FaultSpec>,
}

impl SimOptions {
    pub fn audited() -> Self {
        SimOptions {
            audit: true,
            ..SimOptions::default()
        }
    }
}

/// Counters from an audited run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct AuditSummary {
    pub events: u64,
    pub checks: u64,
}

/// Full output of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub report: MetricsReport,
    pub outcomes: Vec<UserOutcome>,
    pub audit: Option<AuditSummary>,
}

/// Replication reports plus the summary of their mean overall costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSet {
    pub reports: Vec<MetricsReport>,
    pub summary: SummaryStats,
}

/// One point of a load-ratio sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub ratio: Scalar,
    pub scheme: Scheme,
    pub summary: SummaryStats,
}

/// Run one simulation with the scenario's own seed.
pub fn run(scenario: &Scenario, scheme: Scheme) -> Result<MetricsReport, SimError> {
    run_seeded(scenario, scheme, scenario.seed)
}

/// Run one simulation with an explicit seed.
pub fn run_seeded(
    scenario: &Scenario,
    scheme: Scheme,
    seed: u64,
) -> Result<MetricsReport, SimError> {
    Ok(run_detailed(scenario, scheme, seed, &SimOptions::default())?.report)
}

/// Run one simulation keeping per-user outcomes and audit data.
pub fn run_detailed(
    scenario: &Scenario,
    scheme: Scheme,
    seed: u64,
    options: &SimOptions,
) -> Result<SimOutput, SimError> {
    scenario.validate()?;
    let arrivals = generate_arrivals(scenario, seed);
    engine::run_engine(scenario, scheme, arrivals, seed, options)
}

/// Run one simulation over a hand-built arrival list (times must be
/// nondecreasing, ids unique).
pub fn run_with_arrivals(
    scenario: &Scenario,
    scheme: Scheme,
    arrivals: Vec<UserRequest>,
    options: &SimOptions,
) -> Result<SimOutput, SimError> {
    scenario.validate()?;
    if arrivals
        .windows(2)
        .any(|w| w[0].arrival_min > w[1].arrival_min)
    {
        return Err(SimError::Scenario(ScenarioError::Config(
            "arrival times must be nondecreasing".to_string(),
        )));
    }
    engine::run_engine(scenario, scheme, arrivals, scenario.seed, options)
}

/// Independent replications over explicit seeds, with a 95% CI summary of
/// the mean overall cost. Replications run in parallel; the report order
/// follows the seed order.
pub fn run_replications(
    scenario: &Scenario,
    scheme: Scheme,
    seeds: &[u64],
) -> Result<ReplicationSet, SimError> {
    let reports: Result<Vec<MetricsReport>, SimError> = seeds
        .par_iter()
        .map(|&seed| run_seeded(scenario, scheme, seed))
        .collect();
    let reports = reports?;
    let means: Vec<Scalar> = reports.iter().map(|r| r.mean_overall_cost).collect();
    Ok(ReplicationSet {
        reports,
        summary: summarize(&means),
    })
}

/// Rebuild the arrival rates for each load ratio (total rate held constant)
/// and run replications per ratio.
pub fn sweep_ratio(
    base: &Scenario,
    scheme: Scheme,
    ratios: &[Scalar],
    seeds: &[u64],
) -> Result<Vec<SweepPoint>, SimError> {
    let total = base.arrivals.total_rate();
    let areas = base.grid.area_count();
    let mut points = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        let rates = shaped_rates(total, ratio, areas)?;
        let scenario = base.clone().with_rates(rates);
        let set = run_replications(&scenario, scheme, seeds)?;
        points.push(SweepPoint {
            ratio,
            scheme,
            summary: set.summary,
        });
    }
    Ok(points)
}


/// Build the report for a run from its completed outcomes.
pub(crate) fn build_report(
    scenario: &Scenario,
    scheme: Scheme,
    seed: u64,
    outcomes: &[UserOutcome],
) -> MetricsReport {
    let warmup = scenario.warmup_min();
    let areas = scenario.grid.area_count();
    let included: Vec<&UserOutcome> = outcomes
        .iter()
        .filter(|o| o.assignment_min >= warmup)
        .collect();
    let excluded = outcomes.len() - included.len();

    let mut area_count = vec![0usize; areas as usize];
    let mut area_delay = vec![0.0; areas as usize];
    let mut area_price = vec![0.0; areas as usize];
    let mut area_overall = vec![0.0; areas as usize];
    let (mut delay, mut price, mut effort, mut overall, mut estimated) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for outcome in &included {
        let idx = (outcome.origin_area - 1) as usize;
        area_count[idx] += 1;
        area_delay[idx] += outcome.realized.delay;
        area_price[idx] += outcome.realized.price;
        area_overall[idx] += outcome.realized.overall;
        delay += outcome.realized.delay;
        price += outcome.realized.price;
        effort += outcome.realized.effort;
        overall += outcome.realized.overall;
        estimated += outcome.estimated.overall;
    }

    let safe_mean = |sum: Scalar, n: usize| if n == 0 { 0.0 } else { sum / n as Scalar };
    let per_area = (0..areas as usize)
        .map(|i| AreaMetrics {
            area: i as u32 + 1,
            users: area_count[i],
            mean_delay_cost: safe_mean(area_delay[i], area_count[i]),
            mean_price_cost: safe_mean(area_price[i], area_count[i]),
            mean_overall_cost: safe_mean(area_overall[i], area_count[i]),
        })
        .collect();

    let n = included.len();
    MetricsReport {
        scheme,
        seed,
        users: n,
        warmup_excluded: excluded,
        per_area,
        mean_delay_cost: safe_mean(delay, n),
        mean_price_cost: safe_mean(price, n),
        mean_effort_cost: safe_mean(effort, n),
        mean_overall_cost: safe_mean(overall, n),
        mean_estimated_overall_cost: safe_mean(estimated, n),
    }
}
