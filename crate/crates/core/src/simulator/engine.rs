//! The event loop behind [`super::run_detailed`].

use std::cmp::Ordering;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use crate::assignment::{individual_select, nearest, Scheme};
use crate::cost::{
    estimated_cost, realized_cost, ChargerLoad, ChargerStatus, CostBreakdown, CostParams,
};
use crate::protocol::{FaultKind, LiveSession, TerminalStatus};
use crate::registry::{InformationPolicy, Registry, StatusReply, StatusReport};
use crate::scenario::{ChargerId, ChargerSpec, Scenario, UserId, UserRequest};
use crate::{Minutes, Scalar};

use super::{build_report, AuditSummary, SimError, SimOptions, SimOutput, UserOutcome};

#[derive(Debug, Clone)]
enum EventKind {
    Arrival(usize),
    BatchTick,
    ServiceComplete {
        charger: usize,
        user: UserId,
    },
    SessionFault {
        charger: usize,
        user: UserId,
        fault: FaultKind,
    },
}

/// Tie-break classes: completions free slots before same-instant arrivals
/// decide, and batch ticks see every same-instant arrival.
const CLASS_COMPLETION: u8 = 0;
const CLASS_ARRIVAL: u8 = 1;
const CLASS_TICK: u8 = 2;

#[derive(Debug, Clone)]
struct QueuedEvent {
    time: Minutes,
    class: u8,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for QueuedEvent {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for QueuedEvent {}
impl PartialOrd for QueuedEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueuedEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.class.cmp(&other.class))
            .then(self.seq.cmp(&other.seq))
    }
}

#[derive(Debug)]
struct ActiveSession {
    user: UserId,
    demand_min: Minutes,
    started_min: Minutes,
    session: LiveSession,
}

#[derive(Debug)]
struct WaitingUser {
    user: UserId,
    demand_min: Minutes,
    join_seq: u64,
}

#[derive(Debug)]
struct ChargerRuntime {
    spec: ChargerSpec,
    in_service: Vec<ActiveSession>,
    waiting: VecDeque<WaitingUser>,
    waiting_demand_sum: Minutes,
    // Linear-drain bookkeeping, audited against the exact recomputation.
    cache_committed: Minutes,
    cache_as_of: Minutes,
    last_started_seq: Option<u64>,
}

impl ChargerRuntime {
    fn new(spec: ChargerSpec) -> Self {
        ChargerRuntime {
            spec,
            in_service: Vec::new(),
            waiting: VecDeque::new(),
            waiting_demand_sum: 0.0,
            cache_committed: 0.0,
            cache_as_of: 0.0,
            last_started_seq: None,
        }
    }

    /// Committed energy recomputed from queue contents.
    fn committed_exact(&self, now: Minutes) -> Minutes {
        let in_service: Minutes = self
            .in_service
            .iter()
            .map(|s| (s.demand_min - (now - s.started_min)).max(0.0))
            .sum();
        in_service + self.waiting_demand_sum
    }

    fn advance_cache(&mut self, now: Minutes) {
        let dt = now - self.cache_as_of;
        if dt > 0.0 {
            self.cache_committed =
                (self.cache_committed - self.in_service.len() as Scalar * dt).max(0.0);
            self.cache_as_of = now;
        }
    }

    fn status(&self, now: Minutes) -> ChargerStatus {
        ChargerStatus {
            charger: self.spec.clone(),
            load: ChargerLoad {
                committed_min: self.committed_exact(now),
                in_service: self.in_service.len() as u32,
                queued: self.waiting.len() as u32,
                as_of_min: now,
            },
        }
    }

    fn population(&self) -> usize {
        self.in_service.len() + self.waiting.len()
    }
}

#[derive(Debug, Clone, Default)]
struct Progress {
    charger: Option<usize>,
    decided_at: Option<Minutes>,
    estimated: Option<CostBreakdown>,
    service_start: Option<Minutes>,
    completion: Option<Minutes>,
}

struct Engine<'a> {
    scenario: &'a Scenario,
    scheme: Scheme,
    params: CostParams,
    options: &'a SimOptions,
    arrivals: Vec<UserRequest>,
    heap: BinaryHeap<Reverse<QueuedEvent>>,
    next_seq: u64,
    chargers: Vec<ChargerRuntime>,
    index_of: BTreeMap<ChargerId, usize>,
    arrival_of: BTreeMap<UserId, usize>,
    registry: Registry,
    progress: BTreeMap<UserId, Progress>,
    remaining_arrivals: usize,
    completed: usize,
    now: Minutes,
    tick_scheduled: bool,
    faults_applied: BTreeSet<UserId>,
    audit: AuditSummary,
}

pub(super) fn run_engine(
    scenario: &Scenario,
    scheme: Scheme,
    arrivals: Vec<UserRequest>,
    seed: u64,
    options: &SimOptions,
) -> Result<SimOutput, SimError> {
    let mut chargers: Vec<ChargerRuntime> = {
        let mut specs = scenario.chargers.clone();
        specs.sort_by_key(|c| c.id);
        specs.into_iter().map(ChargerRuntime::new).collect()
    };
    let index_of: BTreeMap<ChargerId, usize> = chargers
        .iter()
        .enumerate()
        .map(|(i, c)| (c.spec.id, i))
        .collect();
    let mut registry = Registry::new(&scenario.chargers);
    for charger in &mut chargers {
        charger.cache_as_of = 0.0;
        registry
            .report_status(StatusReport {
                charger: charger.spec.id,
                status: charger.status(0.0),
                report_min: 0.0,
            })
            .expect("charger is registered");
    }

    let arrival_of: BTreeMap<UserId, usize> = arrivals
        .iter()
        .enumerate()
        .map(|(i, u)| (u.id, i))
        .collect();
    let mut engine = Engine {
        scenario,
        scheme,
        params: CostParams::new(scenario.weights, scenario.effort_unit_m),
        options,
        arrivals,
        heap: BinaryHeap::new(),
        next_seq: 0,
        chargers,
        index_of,
        arrival_of,
        registry,
        progress: BTreeMap::new(),
        remaining_arrivals: 0,
        completed: 0,
        now: 0.0,
        tick_scheduled: false,
        faults_applied: BTreeSet::new(),
        audit: AuditSummary::default(),
    };
    engine.schedule_initial()?;
    engine.drain()?;
    engine.finish(seed)
}

impl<'a> Engine<'a> {
    fn push_event(&mut self, time: Minutes, class: u8, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(QueuedEvent {
            time,
            class,
            seq,
            kind,
        }));
    }

    fn schedule_initial(&mut self) -> Result<(), SimError> {
        for user in &self.arrivals {
            if self.progress.insert(user.id, Progress::default()).is_some() {
                return Err(SimError::Invariant(format!(
                    "duplicate user id {} in the arrival stream",
                    user.id
                )));
            }
        }
        self.remaining_arrivals = self.arrivals.len();
        let times: Vec<Minutes> = self.arrivals.iter().map(|u| u.arrival_min).collect();
        for (idx, time) in times.into_iter().enumerate() {
            self.push_event(time, CLASS_ARRIVAL, EventKind::Arrival(idx));
        }
        Ok(())
    }

    /// Batch ticks live on the `k * batch_interval` grid but are only
    /// materialized while users are pending. An arrival exactly on a grid
    /// point is served by the tick at that same instant (arrivals process
    /// before ticks at equal times).
    fn schedule_tick(&mut self) {
        if self.tick_scheduled {
            return;
        }
        let interval = self.scenario.batch_interval_min;
        let mut k = (self.now / interval).ceil() as u64;
        if (k as Minutes) * interval < self.now {
            k += 1;
        }
        k = k.max(1);
        self.tick_scheduled = true;
        self.push_event(k as Minutes * interval, CLASS_TICK, EventKind::BatchTick);
    }

    fn drain(&mut self) -> Result<(), SimError> {
        while let Some(Reverse(event)) = self.heap.pop() {
            if event.time < self.now {
                return Err(SimError::Invariant(format!(
                    "event time {} precedes the clock {}",
                    event.time, self.now
                )));
            }
            self.now = event.time;
            match event.kind {
                EventKind::Arrival(idx) => self.on_arrival(idx)?,
                EventKind::BatchTick => self.on_batch_tick()?,
                EventKind::ServiceComplete { charger, user } => {
                    self.on_service_complete(charger, user)?
                }
                EventKind::SessionFault {
                    charger,
                    user,
                    fault,
                } => self.on_session_fault(charger, user, fault)?,
            }
            self.audit.events += 1;
            if self.options.audit {
                self.check_invariants()?;
            }
        }
        Ok(())
    }

    fn on_arrival(&mut self, idx: usize) -> Result<(), SimError> {
        let user = self.arrivals[idx].clone();
        self.remaining_arrivals -= 1;
        match self.scheme {
            Scheme::Nearest => {
                let specs = match self
                    .registry
                    .query_statuses(self.now, &InformationPolicy::positions_only())
                {
                    StatusReply::Positions(specs) => specs,
                    StatusReply::Full(_) => unreachable!("positions-only policy"),
                };
                let decision = nearest(&user, &specs)?;
                let charger_idx = self.charger_index(decision.charger)?;
                // Bookkeeping estimate with full knowledge; the decision
                // itself used positions only.
                let estimate = estimated_cost(
                    user.demand_min,
                    &self.chargers[charger_idx].status(self.now),
                    user.position_m,
                    &self.params,
                );
                self.bind(&user, charger_idx, self.now, estimate)?;
            }
            Scheme::Individual => {
                let statuses = match self
                    .registry
                    .query_statuses(self.now, &InformationPolicy::full_fresh())
                {
                    StatusReply::Full(statuses) => statuses,
                    StatusReply::Positions(_) => unreachable!("full policy"),
                };
                let decision = individual_select(&user, &statuses, &self.params)?;
                let charger_idx = self.charger_index(decision.charger)?;
                let estimate = decision.estimate.expect("individual carries an estimate");
                self.bind(&user, charger_idx, self.now, estimate)?;
            }
            Scheme::Optimal => {
                self.registry.submit(user);
                self.schedule_tick();
            }
        }
        Ok(())
    }

    fn on_batch_tick(&mut self) -> Result<(), SimError> {
        self.tick_scheduled = false;
        let decisions =
            self.registry
                .run_batch(self.now, &InformationPolicy::full_fresh(), &self.params)?;
        // Decisions arrive in submission (user-index) order, which fixes the
        // within-batch queue order at each charger.
        for decision in decisions {
            let user = self
                .arrival_of
                .get(&decision.user)
                .map(|&i| self.arrivals[i].clone())
                .ok_or_else(|| {
                    SimError::Invariant(format!("decision for unknown user {}", decision.user))
                })?;
            let charger_idx = self.charger_index(decision.charger)?;
            let estimate = decision.estimate.expect("batch carries estimates");
            self.bind(&user, charger_idx, self.now, estimate)?;
        }
        Ok(())
    }

    fn charger_index(&self, id: ChargerId) -> Result<usize, SimError> {
        self.index_of
            .get(&id)
            .copied()
            .ok_or_else(|| SimError::Invariant(format!("decision for unknown charger {id}")))
    }

    /// Record the decision and put the user in the charger's queue.
    fn bind(
        &mut self,
        user: &UserRequest,
        charger_idx: usize,
        decided_at: Minutes,
        estimate: CostBreakdown,
    ) -> Result<(), SimError> {
        let progress = self
            .progress
            .get_mut(&user.id)
            .expect("progress entry exists for every arrival");
        progress.charger = Some(charger_idx);
        progress.decided_at = Some(decided_at);
        progress.estimated = Some(estimate);
        self.enqueue(charger_idx, user.id, user.demand_min)
    }

    fn enqueue(
        &mut self,
        charger_idx: usize,
        user: UserId,
        demand_min: Minutes,
    ) -> Result<(), SimError> {
        let join_seq = self.next_seq;
        self.next_seq += 1;
        let now = self.now;
        {
            let charger = &mut self.chargers[charger_idx];
            charger.advance_cache(now);
            charger.cache_committed += demand_min;
            charger.waiting.push_back(WaitingUser {
                user,
                demand_min,
                join_seq,
            });
            charger.waiting_demand_sum += demand_min;
        }
        self.start_free_slots(charger_idx)?;
        self.report(charger_idx);
        Ok(())
    }

    fn start_free_slots(&mut self, charger_idx: usize) -> Result<(), SimError> {
        let now = self.now;
        loop {
            let charger = &mut self.chargers[charger_idx];
            if charger.in_service.len() >= charger.spec.capacity as usize {
                return Ok(());
            }
            let Some(waiting) = charger.waiting.pop_front() else {
                return Ok(());
            };
            if let Some(last) = charger.last_started_seq {
                if waiting.join_seq <= last {
                    return Err(SimError::Invariant(format!(
                        "FIFO violated at charger {}: join seq {} started after {}",
                        charger.spec.id, waiting.join_seq, last
                    )));
                }
            }
            charger.last_started_seq = Some(waiting.join_seq);
            charger.waiting_demand_sum -= waiting.demand_min;
            let session = LiveSession::start(charger.spec.standard);
            if !session.transferring() {
                return Err(SimError::Invariant(
                    "session handshake did not reach power transfer".to_string(),
                ));
            }
            charger.in_service.push(ActiveSession {
                user: waiting.user,
                demand_min: waiting.demand_min,
                started_min: now,
                session,
            });
            let progress = self
                .progress
                .get_mut(&waiting.user)
                .expect("progress entry exists");
            progress.service_start = Some(now);

            let fault = self
                .options
                .session_faults
                .get(&waiting.user)
                .copied()
                .filter(|f| {
                    !self.faults_applied.contains(&waiting.user) && f.at_min < waiting.demand_min
                });
            match fault {
                Some(fault) => {
                    self.faults_applied.insert(waiting.user);
                    self.push_event(
                        now + fault.at_min,
                        CLASS_COMPLETION,
                        EventKind::SessionFault {
                            charger: charger_idx,
                            user: waiting.user,
                            fault: fault.kind,
                        },
                    );
                }
                None => {
                    self.push_event(
                        now + waiting.demand_min,
                        CLASS_COMPLETION,
                        EventKind::ServiceComplete {
                            charger: charger_idx,
                            user: waiting.user,
                        },
                    );
                }
            }
        }
    }

    fn take_session(
        &mut self,
        charger_idx: usize,
        user: UserId,
    ) -> Result<ActiveSession, SimError> {
        let now = self.now;
        let charger = &mut self.chargers[charger_idx];
        charger.advance_cache(now);
        let pos = charger
            .in_service
            .iter()
            .position(|s| s.user == user)
            .ok_or_else(|| {
                SimError::Invariant(format!(
                    "user {user} is not in service at charger {}",
                    charger.spec.id
                ))
            })?;
        Ok(charger.in_service.swap_remove(pos))
    }

    fn on_service_complete(&mut self, charger_idx: usize, user: UserId) -> Result<(), SimError> {
        let mut session = self.take_session(charger_idx, user)?;
        let leftover = session.demand_min - (self.now - session.started_min);
        if leftover.abs() > 1e-9 {
            return Err(SimError::Invariant(format!(
                "user {user} completed with {leftover} min of demand left"
            )));
        }
        if session.session.complete() != TerminalStatus::Completed {
            return Err(SimError::Invariant(
                "fault-free session did not complete".to_string(),
            ));
        }
        let progress = self.progress.get_mut(&user).expect("progress entry exists");
        progress.completion = Some(self.now);
        self.completed += 1;
        self.start_free_slots(charger_idx)?;
        self.report(charger_idx);
        Ok(())
    }

    fn on_session_fault(
        &mut self,
        charger_idx: usize,
        user: UserId,
        fault: FaultKind,
    ) -> Result<(), SimError> {
        let mut session = self.take_session(charger_idx, user)?;
        let remaining = session.demand_min - (self.now - session.started_min);
        if remaining <= 0.0 {
            return Err(SimError::Invariant(format!(
                "fault fired for user {user} after its demand elapsed"
            )));
        }
        let terminal = session.session.abort(fault);
        if terminal == TerminalStatus::Completed {
            return Err(SimError::Invariant(
                "aborted session reported completion".to_string(),
            ));
        }
        // The user re-queues at the back with its remaining demand.
        let join_seq = self.next_seq;
        self.next_seq += 1;
        {
            let charger = &mut self.chargers[charger_idx];
            charger.waiting.push_back(WaitingUser {
                user,
                demand_min: remaining,
                join_seq,
            });
            charger.waiting_demand_sum += remaining;
        }
        self.start_free_slots(charger_idx)?;
        self.report(charger_idx);
        Ok(())
    }

    fn report(&mut self, charger_idx: usize) {
        let status = self.chargers[charger_idx].status(self.now);
        self.registry
            .report_status(StatusReport {
                charger: status.charger.id,
                status: status.clone(),
                report_min: self.now,
            })
            .expect("charger is registered");
    }

    fn check_invariants(&mut self) -> Result<(), SimError> {
        self.audit.checks += 1;
        let in_system: usize = self.chargers.iter().map(|c| c.population()).sum();
        let accounted =
            self.completed + in_system + self.registry.pending_count() + self.remaining_arrivals;
        if accounted != self.arrivals.len() {
            return Err(SimError::Invariant(format!(
                "conservation broken at t={}: {} accounted of {} users",
                self.now,
                accounted,
                self.arrivals.len()
            )));
        }
        for charger in &self.chargers {
            if charger.in_service.len() > charger.spec.capacity as usize {
                return Err(SimError::Invariant(format!(
                    "charger {} exceeds capacity: {} sessions",
                    charger.spec.id,
                    charger.in_service.len()
                )));
            }
            let exact = charger.committed_exact(self.now);
            let mut cache = charger.cache_committed;
            if charger.cache_as_of < self.now {
                cache = (cache
                    - charger.in_service.len() as Scalar * (self.now - charger.cache_as_of))
                    .max(0.0);
            }
            if (cache - exact).abs() > 1e-6 {
                return Err(SimError::Invariant(format!(
                    "charger {} committed-energy drift: cache {cache} vs exact {exact}",
                    charger.spec.id
                )));
            }
        }
        Ok(())
    }

    fn finish(mut self, seed: u64) -> Result<SimOutput, SimError> {
        let mut outcomes = Vec::with_capacity(self.arrivals.len());
        for user in &self.arrivals {
            let progress = self.progress.remove(&user.id).expect("entry exists");
            let (Some(charger_idx), Some(decided_at), Some(estimated), Some(start), Some(done)) = (
                progress.charger,
                progress.decided_at,
                progress.estimated,
                progress.service_start,
                progress.completion,
            ) else {
                return Err(SimError::Invariant(format!(
                    "user {} never finished charging",
                    user.id
                )));
            };
            let spec = &self.chargers[charger_idx].spec;
            let price_paid = spec.price_cents_per_min * user.demand_min;
            let realized = realized_cost(
                user.arrival_min,
                Some(done),
                price_paid,
                user.position_m,
                spec.position_m,
                &self.params,
            )
            .expect("completion time is present");
            outcomes.push(UserOutcome {
                user: user.id,
                origin_area: user.origin_area,
                origin_m: user.position_m,
                demand_min: user.demand_min,
                charger: spec.id,
                assignment_min: user.arrival_min,
                decided_at_min: decided_at,
                service_start_min: start,
                completion_min: done,
                price_paid_cents: price_paid,
                estimated,
                realized,
            });
        }
        outcomes.sort_by_key(|o| o.user);
        let report = build_report(self.scenario, self.scheme, seed, &outcomes);
        let audit = self.options.audit.then_some(self.audit);
        Ok(SimOutput {
            report,
            outcomes,
            audit,
        })
    }
}
