//! The charger-network server: collects charger status reports, answers
//! status queries, and runs the periodic batch assignment of the optimal
//! scheme.
//!
//! Information availability is modeled by [`InformationPolicy`]: the nearest
//! scheme queries positions only (no load data at all), the informed schemes
//! query full statuses no older than the configured staleness.
//!
//! Served snapshots are the latest report per charger with the committed
//! energy extrapolated to the query time. Chargers report on every state
//! change and the extrapolation is exact between state changes, so served
//! data always has age zero and a staleness of zero means the exact current
//! simulator state. The staleness bound is a contract for deployments where
//! reports can lag; inside the simulator it never drops anything.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::{optimal_batch, AssignmentDecision, AssignmentError};
use crate::cost::{ChargerStatus, CostParams};
use crate::scenario::{ChargerId, ChargerSpec, UserRequest};
use crate::Minutes;

/// One status report from a charger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusReport {
    pub charger: ChargerId,
    pub status: ChargerStatus,
    pub report_min: Minutes,
}

/// How much charger information a query may see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InformationMode {
    /// Positions and static catalog data only; no load information.
    None,
    /// Full status snapshots.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationPolicy {
    pub mode: InformationMode,
    /// Maximum served snapshot age, in minutes. Zero means exact current
    /// state; infinity serves everything ever reported.
    pub staleness_min: Minutes,
}

impl InformationPolicy {
    pub fn positions_only() -> Self {
        InformationPolicy {
            mode: InformationMode::None,
            staleness_min: 0.0,
        }
    }

    pub fn full_fresh() -> Self {
        InformationPolicy {
            mode: InformationMode::Full,
            staleness_min: 0.0,
        }
    }
}

/// Answer to a status query; the variant encodes the information set by
/// construction, so the nearest scheme can never observe load data.
#[derive(Debug, Clone, PartialEq)]
pub enum StatusReply {
    Positions(Vec<ChargerSpec>),
    Full(Vec<ChargerStatus>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegistryError {
    #[error("charger {0} is not registered")]
    UnknownCharger(ChargerId),
}

/// Server state: latest snapshot per charger plus the users waiting for the
/// next batch assignment.
///
/// Reports, queries, and batch runs execute in a total order: the registry
/// is owned exclusively (`&mut self` for writes), so concurrent callers must
/// hand it around and thereby observe linearizable behavior.
#[derive(Debug, Clone)]
pub struct Registry {
    specs: BTreeMap<ChargerId, ChargerSpec>,
    latest: BTreeMap<ChargerId, StatusReport>,
    pending: Vec<UserRequest>,
}

impl Registry {
    pub fn new(chargers: &[ChargerSpec]) -> Self {
        Registry {
            specs: chargers.iter().map(|c| (c.id, c.clone())).collect(),
            latest: BTreeMap::new(),
            pending: Vec::new(),
        }
    }

    /// Store the latest snapshot per charger. Reports older than the stored
    /// one are ignored (last write by report time wins).
    pub fn report_status(&mut self, report: StatusReport) -> Result<(), RegistryError> {
        if !self.specs.contains_key(&report.charger) {
            return Err(RegistryError::UnknownCharger(report.charger));
        }
        match self.latest.get(&report.charger) {
            Some(stored) if stored.report_min > report.report_min => {}
            _ => {
                self.latest.insert(report.charger, report);
            }
        }
        Ok(())
    }

    /// Serve charger information under `policy`, in charger-id order.
    ///
    /// Full-mode records are extrapolated to `now` before the staleness
    /// check, so their served age is zero and the check never drops a
    /// charger that keeps reporting on every state change.
    pub fn query_statuses(&self, now: Minutes, policy: &InformationPolicy) -> StatusReply {
        match policy.mode {
            InformationMode::None => StatusReply::Positions(self.specs.values().cloned().collect()),
            InformationMode::Full => StatusReply::Full(
                self.latest
                    .values()
                    .map(|r| r.status.aged_to(now))
                    .filter(|s| now - s.load.as_of_min <= policy.staleness_min)
                    .collect(),
            ),
        }
    }

    /// Queue a user for the next batch assignment.
    pub fn submit(&mut self, user: UserRequest) {
        self.pending.push(user);
    }

    pub fn pending_count(&self) -> usize {
        self.pending.len()
    }

    /// Assign every pending user via the optimal batch scheme, then clear
    /// the pending set. Each pending user receives exactly one decision.
    pub fn run_batch(
        &mut self,
        now: Minutes,
        policy: &InformationPolicy,
        params: &CostParams,
    ) -> Result<Vec<AssignmentDecision>, AssignmentError> {
        if self.pending.is_empty() {
            return Ok(Vec::new());
        }
        let statuses = match self.query_statuses(now, policy) {
            StatusReply::Full(statuses) => statuses,
            StatusReply::Positions(_) => Vec::new(),
        };
        let decisions = optimal_batch(&self.pending, &statuses, params)?;
        self.pending.clear();
        Ok(decisions)
    }
}
