//! Charging-session protocol state machines for the Qi and A4WP standards.
//!
//! The step functions are pure transition tables: every `(state, event)` pair
//! is either legal and maps to a successor state, or rejected with a
//! [`ProtocolViolation`] naming the pair. [`session::run_session`] drives a
//! full handshake plus periodic control loop and records a replayable
//! [`session::SessionTrace`].

pub mod a4wp;
pub mod qi;
pub mod session;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use a4wp::{
    message_step, pru_step, ptu_step, A4wpMessage, AlertReason, ExchangePhase, PruEvent, PruState,
    PtuEvent, PtuState,
};
pub use qi::{qi_step, QiEvent, QiPhase, QiPositioning, QiPowerCategory, QiPowerProfile};
pub use session::{
    run_session, FaultKind, FaultSpec, LiveSession, SessionConfig, SessionError, SessionTrace,
    TerminalStatus, TraceEntry,
};

/// Charging standard a charger speaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Standard {
    Qi,
    A4wp,
}

impl std::fmt::Display for Standard {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Standard::Qi => f.write_str("qi"),
            Standard::A4wp => f.write_str("a4wp"),
        }
    }
}

impl std::str::FromStr for Standard {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qi" => Ok(Standard::Qi),
            "a4wp" => Ok(Standard::A4wp),
            other => Err(format!("unknown charging standard `{other}`")),
        }
    }
}

/// An event arrived in a state whose transition table does not accept it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("protocol violation: event `{event}` is illegal in state `{state}`")]
pub struct ProtocolViolation {
    pub state: &'static str,
    pub event: &'static str,
}
