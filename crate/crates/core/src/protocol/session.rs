//! Full charging sessions: handshake, periodic control loop, fault
//! injection, and a replayable trace.
//!
//! Handshake duration is abstracted to a constant (default 0 ms of session
//! time) so that protocol faults, not handshake latency, shape the metrics.
//! Dynamic-parameter updates (A4WP) and control-data feedback (Qi) happen
//! every `control_period_ms` of session time.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::a4wp::{
    message_step, pru_step, ptu_step, A4wpMessage, AlertReason, ExchangePhase, PruDynamics,
    PruEvent, PruState, PtuEvent, PtuState,
};
use super::qi::{qi_step, QiEvent, QiPhase, QiPowerProfile, QiProfileError};
use super::{ProtocolViolation, Standard};
use crate::{Minutes, Scalar};

/// Default dynamic-parameter / control-data period, in ms of session time.
pub const DEFAULT_CONTROL_PERIOD_MS: u64 = 250;

/// Default PTU power capability, in watts, used when checking A4WP power
/// requests. The standard only says no more power than specified may be
/// drawn; 50 W is this library's default capability.
pub const DEFAULT_PTU_MAX_POWER_W: Scalar = 50.0;

/// How a session ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TerminalStatus {
    Completed,
    Aborted,
    Error,
}

impl std::fmt::Display for TerminalStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TerminalStatus::Completed => "completed",
            TerminalStatus::Aborted => "aborted",
            TerminalStatus::Error => "error",
        };
        f.write_str(s)
    }
}

/// Injectable session fault.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultKind {
    OverTemperature,
    OverVoltage,
    OverCurrent,
    RogueObject,
    LocalFault,
    DeviceRemoved,
}

impl FaultKind {
    pub fn name(self) -> &'static str {
        match self {
            FaultKind::OverTemperature => "over-temp",
            FaultKind::OverVoltage => "over-voltage",
            FaultKind::OverCurrent => "over-current",
            FaultKind::RogueObject => "rogue-object",
            FaultKind::LocalFault => "local-fault",
            FaultKind::DeviceRemoved => "device-removed",
        }
    }
}

impl std::fmt::Display for FaultKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FaultKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "over-temp" | "over-temperature" => Ok(FaultKind::OverTemperature),
            "over-voltage" => Ok(FaultKind::OverVoltage),
            "over-current" => Ok(FaultKind::OverCurrent),
            "rogue-object" => Ok(FaultKind::RogueObject),
            "local-fault" => Ok(FaultKind::LocalFault),
            "device-removed" => Ok(FaultKind::DeviceRemoved),
            other => Err(format!("unknown fault kind `{other}`")),
        }
    }
}

/// A fault scheduled at a point of session time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub at_min: Minutes,
    pub kind: FaultKind,
}

impl std::str::FromStr for FaultSpec {
    type Err = String;

    /// Parses `kind@minutes`, e.g. `over-temp@10`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, at) = s
            .split_once('@')
            .ok_or_else(|| format!("fault spec `{s}` must look like `kind@minutes`"))?;
        let kind: FaultKind = kind.parse()?;
        let at_min: Minutes = at
            .parse()
            .map_err(|_| format!("fault time `{at}` is not a number of minutes"))?;
        Ok(FaultSpec { at_min, kind })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error(transparent)]
    QiProfile(#[from] QiProfileError),
    #[error("requested {requested_w} W exceeds the PTU capability of {capability_w} W")]
    A4wpPowerLimit {
        requested_w: Scalar,
        capability_w: Scalar,
    },
    #[error("fault kind `{kind}` is not applicable to the {standard} standard")]
    UnsupportedFault { kind: FaultKind, standard: Standard },
    #[error("fault time {at_min} min must be nonnegative")]
    InvalidFaultTime { at_min: Minutes },
    #[error("session demand must be positive, got {demand_min} min")]
    InvalidDemand { demand_min: Minutes },
}

/// Everything needed to run one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub standard: Standard,
    pub demand_min: Minutes,
    pub control_period_ms: u64,
    pub handshake_ms: u64,
    pub qi_profile: QiPowerProfile,
    pub a4wp_requested_power_w: Scalar,
    pub a4wp_ptu_max_power_w: Scalar,
    pub faults: Vec<FaultSpec>,
}

impl SessionConfig {
    pub fn new(standard: Standard, demand_min: Minutes) -> Self {
        SessionConfig {
            standard,
            demand_min,
            control_period_ms: DEFAULT_CONTROL_PERIOD_MS,
            handshake_ms: 0,
            qi_profile: QiPowerProfile::default(),
            a4wp_requested_power_w: 5.0,
            a4wp_ptu_max_power_w: DEFAULT_PTU_MAX_POWER_W,
            faults: Vec::new(),
        }
    }

    pub fn with_faults(mut self, faults: Vec<FaultSpec>) -> Self {
        self.faults = faults;
        self
    }
}

/// Who produced a trace entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Actor {
    Qi,
    Ptu,
    Pru,
}

impl std::fmt::Display for Actor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Actor::Qi => "qi",
            Actor::Ptu => "ptu",
            Actor::Pru => "pru",
        };
        f.write_str(s)
    }
}

/// One state, event, or message observed during a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TraceItem {
    QiPhase(QiPhase),
    QiEvent(QiEvent),
    PtuState(PtuState),
    PtuEvent(PtuEvent),
    PruState(PruState),
    PruEvent(PruEvent),
    Message(A4wpMessage),
}

impl std::fmt::Display for TraceItem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TraceItem::QiPhase(p) => write!(f, "{p}"),
            TraceItem::QiEvent(e) => write!(f, "{e}"),
            TraceItem::PtuState(s) => write!(f, "{s}"),
            TraceItem::PtuEvent(e) => write!(f, "{e}"),
            TraceItem::PruState(s) => write!(f, "{s}"),
            TraceItem::PruEvent(e) => write!(f, "{e}"),
            TraceItem::Message(m) => write!(f, "{m}"),
        }
    }
}

/// Timestamped trace entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub time_ms: u64,
    pub actor: Actor,
    pub item: TraceItem,
}

impl std::fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {}", self.time_ms, self.actor, self.item)
    }
}

/// Ordered record of one session, replayable through the step functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTrace {
    pub standard: Standard,
    pub entries: Vec<TraceEntry>,
    pub terminal: TerminalStatus,
}

impl SessionTrace {
    /// Line-oriented text form: `<time_ms> <actor> <state-or-message>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            out.push_str(&entry.to_string());
            out.push('\n');
        }
        out
    }

    /// The sequence of state names in order of appearance.
    pub fn state_names(&self) -> Vec<&'static str> {
        self.entries
            .iter()
            .filter_map(|e| match &e.item {
                TraceItem::QiPhase(p) => Some(p.name()),
                TraceItem::PtuState(s) => Some(s.name()),
                TraceItem::PruState(s) => Some(s.name()),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Violation(#[from] ProtocolViolation),
    #[error(
        "replayed state `{replayed}` does not match recorded state `{recorded}` at {time_ms} ms"
    )]
    StateMismatch {
        time_ms: u64,
        recorded: String,
        replayed: String,
    },
    #[error("trace times decrease at {time_ms} ms")]
    TimeRegression { time_ms: u64 },
}

/// Re-run a recorded trace through the step functions.
///
/// Event entries drive the machines, message entries are checked against the
/// exchange-phase rules, and every state entry must match the replayed
/// machine state. Returns the terminal status derived from the final states.
pub fn replay(trace: &SessionTrace) -> Result<TerminalStatus, ReplayError> {
    let mut qi: Option<QiPhase> = None;
    let mut ptu: Option<PtuState> = None;
    let mut pru: Option<PruState> = None;
    let mut exchange = ExchangePhase::AwaitAdvertisement;
    let mut saw_charge_complete_alert = false;
    let mut last_time = 0u64;

    for entry in &trace.entries {
        if entry.time_ms < last_time {
            return Err(ReplayError::TimeRegression {
                time_ms: entry.time_ms,
            });
        }
        last_time = entry.time_ms;
        match &entry.item {
            TraceItem::QiEvent(e) => {
                let cur = qi.unwrap_or(QiPhase::Start);
                qi = Some(qi_step(cur, *e)?);
            }
            TraceItem::PtuEvent(e) => {
                let cur = ptu.unwrap_or(PtuState::Configuration);
                ptu = Some(ptu_step(cur, *e)?);
            }
            TraceItem::PruEvent(e) => {
                let cur = pru.unwrap_or(PruState::Null);
                pru = Some(pru_step(cur, *e)?);
            }
            TraceItem::Message(m) => {
                exchange = message_step(exchange, m)?;
                if matches!(
                    m,
                    A4wpMessage::PruAlert {
                        reason: AlertReason::ChargeComplete
                    }
                ) {
                    saw_charge_complete_alert = true;
                }
            }
            TraceItem::QiPhase(recorded) => {
                let replayed = qi.get_or_insert(QiPhase::Start);
                if replayed != recorded {
                    return Err(ReplayError::StateMismatch {
                        time_ms: entry.time_ms,
                        recorded: recorded.to_string(),
                        replayed: replayed.to_string(),
                    });
                }
            }
            TraceItem::PtuState(recorded) => {
                let replayed = ptu.get_or_insert(PtuState::Configuration);
                if replayed != recorded {
                    return Err(ReplayError::StateMismatch {
                        time_ms: entry.time_ms,
                        recorded: recorded.to_string(),
                        replayed: replayed.to_string(),
                    });
                }
            }
            TraceItem::PruState(recorded) => {
                let replayed = pru.get_or_insert(PruState::Null);
                if replayed != recorded {
                    return Err(ReplayError::StateMismatch {
                        time_ms: entry.time_ms,
                        recorded: recorded.to_string(),
                        replayed: replayed.to_string(),
                    });
                }
            }
        }
    }

    Ok(match trace.standard {
        Standard::Qi => match qi {
            Some(QiPhase::Complete) => TerminalStatus::Completed,
            Some(QiPhase::Aborted) => TerminalStatus::Aborted,
            _ => TerminalStatus::Error,
        },
        Standard::A4wp => {
            if pru == Some(PruState::SystemError) {
                TerminalStatus::Error
            } else if ptu == Some(PtuState::PowerSave) && saw_charge_complete_alert {
                TerminalStatus::Completed
            } else {
                TerminalStatus::Aborted
            }
        }
    })
}

/// Run one session to its terminal status, recording the full trace.
pub fn run_session(config: &SessionConfig) -> Result<SessionTrace, SessionError> {
    if !(config.demand_min > 0.0) {
        return Err(SessionError::InvalidDemand {
            demand_min: config.demand_min,
        });
    }
    for fault in &config.faults {
        if !(fault.at_min >= 0.0) {
            return Err(SessionError::InvalidFaultTime {
                at_min: fault.at_min,
            });
        }
        if config.standard == Standard::A4wp && fault.kind == FaultKind::DeviceRemoved {
            return Err(SessionError::UnsupportedFault {
                kind: fault.kind,
                standard: config.standard,
            });
        }
    }

    let demand_ms = (config.demand_min * 60_000.0).round() as u64;
    let end_ms = config.handshake_ms + demand_ms;
    // Earliest fault that fires before the demand elapses, if any.
    let fault = config
        .faults
        .iter()
        .map(|f| {
            (
                config.handshake_ms + (f.at_min * 60_000.0).round() as u64,
                f.kind,
            )
        })
        .filter(|(t, _)| *t < end_ms)
        .min_by_key(|(t, _)| *t);

    match config.standard {
        Standard::Qi => run_qi(config, end_ms, fault),
        Standard::A4wp => run_a4wp(config, end_ms, fault),
    }
}

fn run_qi(
    config: &SessionConfig,
    end_ms: u64,
    fault: Option<(u64, FaultKind)>,
) -> Result<SessionTrace, SessionError> {
    config.qi_profile.validate()?;

    let mut entries = Vec::new();
    let mut phase = QiPhase::Start;
    let push_state = |entries: &mut Vec<TraceEntry>, t: u64, p: QiPhase| {
        entries.push(TraceEntry {
            time_ms: t,
            actor: Actor::Qi,
            item: TraceItem::QiPhase(p),
        });
    };
    let step = |entries: &mut Vec<TraceEntry>, t: u64, phase: &mut QiPhase, e: QiEvent| {
        entries.push(TraceEntry {
            time_ms: t,
            actor: Actor::Qi,
            item: TraceItem::QiEvent(e),
        });
        let next = qi_step(*phase, e).expect("scripted Qi transition is legal");
        if next != *phase {
            *phase = next;
            push_state(entries, t, next);
        }
    };

    push_state(&mut entries, 0, phase);
    step(&mut entries, 0, &mut phase, QiEvent::DeviceDetected);
    step(&mut entries, 0, &mut phase, QiEvent::SignalStrengthReported);
    step(&mut entries, 0, &mut phase, QiEvent::IdAndPowerIndicated);
    debug_assert_eq!(phase, QiPhase::PowerTransfer);

    let cut_ms = fault.map(|(t, _)| t).unwrap_or(end_ms);
    let mut t = config.handshake_ms + config.control_period_ms;
    while t < cut_ms {
        step(&mut entries, t, &mut phase, QiEvent::ControlData);
        t += config.control_period_ms;
    }

    let terminal = if let Some((t, _kind)) = fault {
        step(&mut entries, t, &mut phase, QiEvent::Fault);
        TerminalStatus::Aborted
    } else {
        step(&mut entries, end_ms, &mut phase, QiEvent::ChargeComplete);
        TerminalStatus::Completed
    };

    Ok(SessionTrace {
        standard: Standard::Qi,
        entries,
        terminal,
    })
}

fn run_a4wp(
    config: &SessionConfig,
    end_ms: u64,
    fault: Option<(u64, FaultKind)>,
) -> Result<SessionTrace, SessionError> {
    if !(config.a4wp_requested_power_w <= config.a4wp_ptu_max_power_w) {
        return Err(SessionError::A4wpPowerLimit {
            requested_w: config.a4wp_requested_power_w,
            capability_w: config.a4wp_ptu_max_power_w,
        });
    }

    let mut entries = Vec::new();
    let mut ptu = PtuState::Configuration;
    let mut pru = PruState::Null;

    let push = |entries: &mut Vec<TraceEntry>, t: u64, actor: Actor, item: TraceItem| {
        entries.push(TraceEntry {
            time_ms: t,
            actor,
            item,
        });
    };
    let ptu_apply = |entries: &mut Vec<TraceEntry>, t: u64, ptu: &mut PtuState, e: PtuEvent| {
        push(entries, t, Actor::Ptu, TraceItem::PtuEvent(e));
        let next = ptu_step(*ptu, e).expect("scripted PTU transition is legal");
        if next != *ptu {
            *ptu = next;
            push(entries, t, Actor::Ptu, TraceItem::PtuState(next));
        }
    };
    let pru_apply = |entries: &mut Vec<TraceEntry>, t: u64, pru: &mut PruState, e: PruEvent| {
        push(entries, t, Actor::Pru, TraceItem::PruEvent(e));
        let next = pru_step(*pru, e).expect("scripted PRU transition is legal");
        if next != *pru {
            *pru = next;
            push(entries, t, Actor::Pru, TraceItem::PruState(next));
        }
    };

    // Device detection and information exchange, at abstracted time zero.
    push(&mut entries, 0, Actor::Ptu, TraceItem::PtuState(ptu));
    push(&mut entries, 0, Actor::Pru, TraceItem::PruState(pru));
    ptu_apply(&mut entries, 0, &mut ptu, PtuEvent::SelfCheckPassed);
    ptu_apply(&mut entries, 0, &mut ptu, PtuEvent::ImpedanceChange);
    pru_apply(&mut entries, 0, &mut pru, PruEvent::PowerDetected);
    push(
        &mut entries,
        0,
        Actor::Pru,
        TraceItem::Message(A4wpMessage::Advertisement),
    );
    push(
        &mut entries,
        0,
        Actor::Ptu,
        TraceItem::Message(A4wpMessage::ConnectionRequest),
    );
    pru_apply(&mut entries, 0, &mut pru, PruEvent::LinkEstablished);
    push(
        &mut entries,
        0,
        Actor::Pru,
        TraceItem::Message(A4wpMessage::PruStaticParams {
            max_power_w: config.a4wp_requested_power_w,
        }),
    );
    push(
        &mut entries,
        0,
        Actor::Ptu,
        TraceItem::Message(A4wpMessage::PtuStaticParams {
            max_power_w: config.a4wp_ptu_max_power_w,
            max_devices: 8,
        }),
    );
    push(
        &mut entries,
        0,
        Actor::Pru,
        TraceItem::Message(A4wpMessage::PruDynamicParams(PruDynamics::nominal())),
    );
    ptu_apply(&mut entries, 0, &mut ptu, PtuEvent::RegistrationComplete);
    push(
        &mut entries,
        0,
        Actor::Ptu,
        TraceItem::Message(A4wpMessage::PruControl {
            enable: true,
            permitted_power_w: config.a4wp_requested_power_w,
        }),
    );

    // Charging control: periodic dynamic-parameter updates.
    let cut_ms = fault.map(|(t, _)| t).unwrap_or(end_ms);
    let mut t = config.handshake_ms + config.control_period_ms;
    while t < cut_ms {
        push(
            &mut entries,
            t,
            Actor::Pru,
            TraceItem::Message(A4wpMessage::PruDynamicParams(PruDynamics::nominal())),
        );
        t += config.control_period_ms;
    }

    let terminal = if let Some((t, kind)) = fault {
        match kind {
            FaultKind::OverTemperature | FaultKind::OverVoltage | FaultKind::OverCurrent => {
                let (event, reason) = match kind {
                    FaultKind::OverTemperature => {
                        (PruEvent::OverTemperatureAlert, AlertReason::OverTemperature)
                    }
                    FaultKind::OverVoltage => {
                        (PruEvent::OverVoltageAlert, AlertReason::OverVoltage)
                    }
                    _ => (PruEvent::OverCurrentAlert, AlertReason::OverCurrent),
                };
                pru_apply(&mut entries, t, &mut pru, event);
                push(
                    &mut entries,
                    t,
                    Actor::Pru,
                    TraceItem::Message(A4wpMessage::PruAlert { reason }),
                );
                pru_apply(&mut entries, t, &mut pru, PruEvent::ShutdownRequired);
                ptu_apply(&mut entries, t, &mut ptu, PtuEvent::SystemErrorReported);
                TerminalStatus::Error
            }
            FaultKind::RogueObject => {
                ptu_apply(&mut entries, t, &mut ptu, PtuEvent::RogueObjectDetected);
                TerminalStatus::Aborted
            }
            FaultKind::LocalFault => {
                ptu_apply(&mut entries, t, &mut ptu, PtuEvent::LocalFaultDetected);
                TerminalStatus::Aborted
            }
            FaultKind::DeviceRemoved => unreachable!("rejected at configuration time"),
        }
    } else {
        push(
            &mut entries,
            end_ms,
            Actor::Pru,
            TraceItem::Message(A4wpMessage::PruAlert {
                reason: AlertReason::ChargeComplete,
            }),
        );
        ptu_apply(&mut entries, end_ms, &mut ptu, PtuEvent::SessionsEnded);
        TerminalStatus::Completed
    };

    Ok(SessionTrace {
        standard: Standard::A4wp,
        entries,
        terminal,
    })
}

/// Lightweight session used by the simulator: the same state machines,
/// without materializing per-tick trace entries.
#[derive(Debug, Clone, PartialEq)]
pub enum LiveSession {
    Qi(QiPhase),
    A4wp { ptu: PtuState, pru: PruState },
}

impl LiveSession {
    /// Run the handshake and enter power transfer.
    pub fn start(standard: Standard) -> Self {
        match standard {
            Standard::Qi => {
                let mut p = QiPhase::Start;
                for e in [
                    QiEvent::DeviceDetected,
                    QiEvent::SignalStrengthReported,
                    QiEvent::IdAndPowerIndicated,
                ] {
                    p = qi_step(p, e).expect("handshake transition is legal");
                }
                LiveSession::Qi(p)
            }
            Standard::A4wp => {
                let mut ptu = PtuState::Configuration;
                for e in [
                    PtuEvent::SelfCheckPassed,
                    PtuEvent::ImpedanceChange,
                    PtuEvent::RegistrationComplete,
                ] {
                    ptu = ptu_step(ptu, e).expect("handshake transition is legal");
                }
                let mut pru = PruState::Null;
                for e in [PruEvent::PowerDetected, PruEvent::LinkEstablished] {
                    pru = pru_step(pru, e).expect("handshake transition is legal");
                }
                LiveSession::A4wp { ptu, pru }
            }
        }
    }

    /// Whether power is currently being transferred.
    pub fn transferring(&self) -> bool {
        match self {
            LiveSession::Qi(p) => *p == QiPhase::PowerTransfer,
            LiveSession::A4wp { ptu, .. } => *ptu == PtuState::PowerTransfer,
        }
    }

    /// Drive the machine through charge completion.
    pub fn complete(&mut self) -> TerminalStatus {
        match self {
            LiveSession::Qi(p) => {
                *p = qi_step(*p, QiEvent::ChargeComplete).expect("completion is legal");
                TerminalStatus::Completed
            }
            LiveSession::A4wp { ptu, .. } => {
                *ptu = ptu_step(*ptu, PtuEvent::SessionsEnded).expect("completion is legal");
                TerminalStatus::Completed
            }
        }
    }

    /// Abort the session with the given fault.
    pub fn abort(&mut self, kind: FaultKind) -> TerminalStatus {
        match self {
            LiveSession::Qi(p) => {
                *p = qi_step(*p, QiEvent::Fault).expect("abort is legal");
                TerminalStatus::Aborted
            }
            LiveSession::A4wp { ptu, pru } => match kind {
                FaultKind::OverTemperature | FaultKind::OverVoltage | FaultKind::OverCurrent => {
                    let event = match kind {
                        FaultKind::OverTemperature => PruEvent::OverTemperatureAlert,
                        FaultKind::OverVoltage => PruEvent::OverVoltageAlert,
                        _ => PruEvent::OverCurrentAlert,
                    };
                    *pru = pru_step(*pru, event).expect("alert is legal");
                    *pru = pru_step(*pru, PruEvent::ShutdownRequired).expect("shutdown is legal");
                    *ptu = ptu_step(*ptu, PtuEvent::SystemErrorReported).expect("report is legal");
                    TerminalStatus::Error
                }
                _ => {
                    *ptu = ptu_step(*ptu, PtuEvent::RogueObjectDetected).expect("latch is legal");
                    TerminalStatus::Aborted
                }
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qi_fault_free_trace_walks_the_phase_list() {
        let trace = run_session(&SessionConfig::new(Standard::Qi, 0.01)).unwrap();
        assert_eq!(trace.terminal, TerminalStatus::Completed);
        assert_eq!(
            trace.state_names(),
            vec![
                "Start",
                "Ping",
                "IdentificationConfiguration",
                "PowerTransfer",
                "Complete"
            ]
        );
    }

    #[test]
    fn qi_session_duration_and_tick_count() {
        let config = SessionConfig::new(Standard::Qi, 1.0); // 60_000 ms
        let trace = run_session(&config).unwrap();
        assert_eq!(trace.entries.last().unwrap().time_ms, 60_000);
        let ticks = trace
            .entries
            .iter()
            .filter(|e| matches!(e.item, TraceItem::QiEvent(QiEvent::ControlData)))
            .count();
        assert_eq!(ticks, 239); // 250 ms grid strictly inside (0, 60_000)
    }

    #[test]
    fn qi_power_limit_rejected_at_configuration() {
        let mut config = SessionConfig::new(Standard::Qi, 20.0);
        config.qi_profile.requested_power_w = 6.0;
        assert!(matches!(
            run_session(&config),
            Err(SessionError::QiProfile(QiProfileError::PowerLimit { .. }))
        ));
    }

    #[test]
    fn a4wp_fault_free_completes_with_alert() {
        let trace = run_session(&SessionConfig::new(Standard::A4wp, 0.01)).unwrap();
        assert_eq!(trace.terminal, TerminalStatus::Completed);
        let text = trace.to_text();
        assert!(text.contains("PruAlert reason=charge-complete"));
        assert!(text.ends_with("ptu PowerSave\n"));
    }

    #[test]
    fn a4wp_over_temperature_reaches_system_error() {
        let config = SessionConfig::new(Standard::A4wp, 20.0).with_faults(vec![FaultSpec {
            at_min: 10.0,
            kind: FaultKind::OverTemperature,
        }]);
        let trace = run_session(&config).unwrap();
        assert_eq!(trace.terminal, TerminalStatus::Error);
        let text = trace.to_text();
        assert!(text.contains("PruAlert reason=over-temperature"));
        assert!(text.contains("SystemErrorState"));
        assert!(text.contains("SystemError"));
        assert!(text.contains("LatchingFault"));
    }

    #[test]
    fn a4wp_power_limit() {
        let mut config = SessionConfig::new(Standard::A4wp, 20.0);
        config.a4wp_requested_power_w = 80.0;
        assert!(matches!(
            run_session(&config),
            Err(SessionError::A4wpPowerLimit { .. })
        ));
    }

    #[test]
    fn device_removed_is_qi_only() {
        let config = SessionConfig::new(Standard::A4wp, 20.0).with_faults(vec![FaultSpec {
            at_min: 1.0,
            kind: FaultKind::DeviceRemoved,
        }]);
        assert!(matches!(
            run_session(&config),
            Err(SessionError::UnsupportedFault { .. })
        ));
        let config = SessionConfig::new(Standard::Qi, 20.0).with_faults(vec![FaultSpec {
            at_min: 1.0,
            kind: FaultKind::DeviceRemoved,
        }]);
        assert_eq!(
            run_session(&config).unwrap().terminal,
            TerminalStatus::Aborted
        );
    }

    #[test]
    fn replay_reproduces_terminal_state() {
        for config in [
            SessionConfig::new(Standard::Qi, 0.5),
            SessionConfig::new(Standard::A4wp, 0.5),
            SessionConfig::new(Standard::Qi, 0.5).with_faults(vec![FaultSpec {
                at_min: 0.2,
                kind: FaultKind::DeviceRemoved,
            }]),
            SessionConfig::new(Standard::A4wp, 0.5).with_faults(vec![FaultSpec {
                at_min: 0.2,
                kind: FaultKind::OverVoltage,
            }]),
            SessionConfig::new(Standard::A4wp, 0.5).with_faults(vec![FaultSpec {
                at_min: 0.1,
                kind: FaultKind::RogueObject,
            }]),
            SessionConfig::new(Standard::A4wp, 0.5).with_faults(vec![FaultSpec {
                at_min: 0.1,
                kind: FaultKind::LocalFault,
            }]),
        ] {
            let trace = run_session(&config).unwrap();
            assert_eq!(replay(&trace).unwrap(), trace.terminal, "{config:?}");
        }
    }

    #[test]
    fn fault_after_completion_is_ignored() {
        let config = SessionConfig::new(Standard::Qi, 1.0).with_faults(vec![FaultSpec {
            at_min: 5.0,
            kind: FaultKind::DeviceRemoved,
        }]);
        assert_eq!(
            run_session(&config).unwrap().terminal,
            TerminalStatus::Completed
        );
    }

    #[test]
    fn fault_spec_parses() {
        let spec: FaultSpec = "over-temp@10".parse().unwrap();
        assert_eq!(spec.kind, FaultKind::OverTemperature);
        assert_eq!(spec.at_min, 10.0);
        assert!("nonsense".parse::<FaultSpec>().is_err());
        assert!("what@10".parse::<FaultSpec>().is_err());
        assert!("over-temp@x".parse::<FaultSpec>().is_err());
    }

    #[test]
    fn live_session_paths() {
        let mut s = LiveSession::start(Standard::Qi);
        assert!(s.transferring());
        assert_eq!(s.complete(), TerminalStatus::Completed);

        let mut s = LiveSession::start(Standard::A4wp);
        assert!(s.transferring());
        assert_eq!(s.complete(), TerminalStatus::Completed);

        let mut s = LiveSession::start(Standard::A4wp);
        assert_eq!(s.abort(FaultKind::OverCurrent), TerminalStatus::Error);
        let mut s = LiveSession::start(Standard::Qi);
        assert_eq!(s.abort(FaultKind::DeviceRemoved), TerminalStatus::Aborted);
    }
}
