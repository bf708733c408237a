//! A4WP power transmitter (PTU) and power receiver (PRU) state machines,
//! plus the BLE-style control messages exchanged between them.
//!
//! Messages are abstracted as typed values; there is no bit-level GATT
//! layout. Message legality is tracked by [`ExchangePhase`]: a `PruControl`
//! is only accepted once both static-parameter exchanges and the first
//! dynamic-parameter read have happened.

use serde::{Deserialize, Serialize};

use super::ProtocolViolation;
use crate::Scalar;

/// A4WP power transmitter unit state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PtuState {
    Configuration,
    PowerSave,
    LowPower,
    PowerTransfer,
    LocalFault,
    LatchingFault,
}

impl PtuState {
    pub const ALL: [PtuState; 6] = [
        PtuState::Configuration,
        PtuState::PowerSave,
        PtuState::LowPower,
        PtuState::PowerTransfer,
        PtuState::LocalFault,
        PtuState::LatchingFault,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PtuState::Configuration => "Configuration",
            PtuState::PowerSave => "PowerSave",
            PtuState::LowPower => "LowPower",
            PtuState::PowerTransfer => "PowerTransfer",
            PtuState::LocalFault => "LocalFault",
            PtuState::LatchingFault => "LatchingFault",
        }
    }
}

impl std::fmt::Display for PtuState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Event driving the PTU machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PtuEvent {
    /// Power-on self-check finished.
    SelfCheckPassed,
    /// Impedance change of the primary resonator detected.
    ImpedanceChange,
    /// A PRU completed registration (static + dynamic parameters read).
    RegistrationComplete,
    /// Periodic dynamic-parameter update processed.
    DynamicUpdate,
    /// All charging sessions ended.
    SessionsEnded,
    /// Local fault condition such as over-temperature.
    LocalFaultDetected,
    /// Local fault condition cleared.
    FaultCleared,
    /// Rogue object detected on the charger.
    RogueObjectDetected,
    /// A system error was reported by a PRU.
    SystemErrorReported,
    /// Explicit operator restart.
    Restart,
}

impl PtuEvent {
    pub const ALL: [PtuEvent; 10] = [
        PtuEvent::SelfCheckPassed,
        PtuEvent::ImpedanceChange,
        PtuEvent::RegistrationComplete,
        PtuEvent::DynamicUpdate,
        PtuEvent::SessionsEnded,
        PtuEvent::LocalFaultDetected,
        PtuEvent::FaultCleared,
        PtuEvent::RogueObjectDetected,
        PtuEvent::SystemErrorReported,
        PtuEvent::Restart,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PtuEvent::SelfCheckPassed => "self-check-passed",
            PtuEvent::ImpedanceChange => "impedance-change",
            PtuEvent::RegistrationComplete => "registration-complete",
            PtuEvent::DynamicUpdate => "dynamic-update",
            PtuEvent::SessionsEnded => "sessions-ended",
            PtuEvent::LocalFaultDetected => "local-fault-detected",
            PtuEvent::FaultCleared => "fault-cleared",
            PtuEvent::RogueObjectDetected => "rogue-object-detected",
            PtuEvent::SystemErrorReported => "system-error-reported",
            PtuEvent::Restart => "restart",
        }
    }
}

impl std::fmt::Display for PtuEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Apply one event to a PTU state.
///
/// `LatchingFault` absorbs every event except an explicit `Restart`, which
/// returns the PTU to `Configuration` for a new self-check.
pub fn ptu_step(state: PtuState, event: PtuEvent) -> Result<PtuState, ProtocolViolation> {
    use PtuEvent::*;
    use PtuState::*;
    let next = match (state, event) {
        (Configuration, SelfCheckPassed) => PowerSave,
        (PowerSave, ImpedanceChange) => LowPower,
        (LowPower, RegistrationComplete) => PowerTransfer,
        (PowerTransfer, DynamicUpdate) => PowerTransfer,
        (PowerTransfer, SessionsEnded) => PowerSave,
        (PowerTransfer, LocalFaultDetected) => LocalFault,
        (PowerTransfer, RogueObjectDetected) => LatchingFault,
        (PowerTransfer, SystemErrorReported) => LatchingFault,
        (LocalFault, FaultCleared) => PowerSave,
        (LatchingFault, Restart) => Configuration,
        (LatchingFault, _) => LatchingFault,
        _ => {
            return Err(ProtocolViolation {
                state: state.name(),
                event: event.name(),
            })
        }
    };
    Ok(next)
}

/// A4WP power receiving unit state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PruState {
    Null,
    Boot,
    On,
    SystemErrorState,
    SystemError,
}

impl PruState {
    pub const ALL: [PruState; 5] = [
        PruState::Null,
        PruState::Boot,
        PruState::On,
        PruState::SystemErrorState,
        PruState::SystemError,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PruState::Null => "Null",
            PruState::Boot => "Boot",
            PruState::On => "On",
            PruState::SystemErrorState => "SystemErrorState",
            PruState::SystemError => "SystemError",
        }
    }
}

impl std::fmt::Display for PruState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Event driving the PRU machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PruEvent {
    /// Rectified voltage appeared; the PRU leaves the under-voltage state.
    PowerDetected,
    /// Communication link with the PTU established.
    LinkEstablished,
    OverVoltageAlert,
    OverCurrentAlert,
    OverTemperatureAlert,
    /// The error requires the power to be shut down.
    ShutdownRequired,
}

impl PruEvent {
    pub const ALL: [PruEvent; 6] = [
        PruEvent::PowerDetected,
        PruEvent::LinkEstablished,
        PruEvent::OverVoltageAlert,
        PruEvent::OverCurrentAlert,
        PruEvent::OverTemperatureAlert,
        PruEvent::ShutdownRequired,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PruEvent::PowerDetected => "power-detected",
            PruEvent::LinkEstablished => "link-established",
            PruEvent::OverVoltageAlert => "over-voltage-alert",
            PruEvent::OverCurrentAlert => "over-current-alert",
            PruEvent::OverTemperatureAlert => "over-temperature-alert",
            PruEvent::ShutdownRequired => "shutdown-required",
        }
    }
}

impl std::fmt::Display for PruEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Apply one event to a PRU state. `SystemError` is terminal.
pub fn pru_step(state: PruState, event: PruEvent) -> Result<PruState, ProtocolViolation> {
    use PruEvent::*;
    use PruState::*;
    let next = match (state, event) {
        (Null, PowerDetected) => Boot,
        (Boot, LinkEstablished) => On,
        (On, OverVoltageAlert | OverCurrentAlert | OverTemperatureAlert) => SystemErrorState,
        (SystemErrorState, ShutdownRequired) => SystemError,
        _ => {
            return Err(ProtocolViolation {
                state: state.name(),
                event: event.name(),
            })
        }
    };
    Ok(next)
}

/// Reason carried by a `PruAlert` notification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlertReason {
    OverVoltage,
    OverCurrent,
    OverTemperature,
    ChargeComplete,
}

impl AlertReason {
    pub fn name(self) -> &'static str {
        match self {
            AlertReason::OverVoltage => "over-voltage",
            AlertReason::OverCurrent => "over-current",
            AlertReason::OverTemperature => "over-temperature",
            AlertReason::ChargeComplete => "charge-complete",
        }
    }
}

impl std::fmt::Display for AlertReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// PRU functional status carried in the dynamic parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionalStatus {
    Nominal,
    Alert,
}

/// Dynamic-parameter payload: electrical readings plus functional status.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruDynamics {
    pub current_a: Scalar,
    pub voltage_v: Scalar,
    pub temperature_c: Scalar,
    pub status: FunctionalStatus,
}

impl PruDynamics {
    pub fn nominal() -> Self {
        PruDynamics {
            current_a: 0.8,
            voltage_v: 5.0,
            temperature_c: 30.0,
            status: FunctionalStatus::Nominal,
        }
    }
}

/// Control message exchanged over the out-of-band link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum A4wpMessage {
    /// PRU advertises that it wants to be charged.
    Advertisement,
    /// PTU answers an advertisement.
    ConnectionRequest,
    /// PRU capabilities and status.
    PruStaticParams { max_power_w: Scalar },
    /// PTU capabilities.
    PtuStaticParams {
        max_power_w: Scalar,
        max_devices: u32,
    },
    /// Periodic PRU readings.
    PruDynamicParams(PruDynamics),
    /// PTU charging-control directive.
    PruControl {
        enable: bool,
        permitted_power_w: Scalar,
    },
    /// PRU alert notification with its reason.
    PruAlert { reason: AlertReason },
}

impl A4wpMessage {
    pub fn kind_name(&self) -> &'static str {
        match self {
            A4wpMessage::Advertisement => "Advertisement",
            A4wpMessage::ConnectionRequest => "ConnectionRequest",
            A4wpMessage::PruStaticParams { .. } => "PruStaticParams",
            A4wpMessage::PtuStaticParams { .. } => "PtuStaticParams",
            A4wpMessage::PruDynamicParams(_) => "PruDynamicParams",
            A4wpMessage::PruControl { .. } => "PruControl",
            A4wpMessage::PruAlert { .. } => "PruAlert",
        }
    }
}

impl std::fmt::Display for A4wpMessage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            A4wpMessage::PruAlert { reason } => write!(f, "PruAlert reason={reason}"),
            other => f.write_str(other.kind_name()),
        }
    }
}

/// Where the information exchange stands; gates which messages are legal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExchangePhase {
    AwaitAdvertisement,
    AwaitConnectionRequest,
    AwaitPruStatic,
    AwaitPtuStatic,
    AwaitPruDynamic,
    /// Registration done; control and periodic updates flow.
    Controlled,
}

impl ExchangePhase {
    pub fn name(self) -> &'static str {
        match self {
            ExchangePhase::AwaitAdvertisement => "AwaitAdvertisement",
            ExchangePhase::AwaitConnectionRequest => "AwaitConnectionRequest",
            ExchangePhase::AwaitPruStatic => "AwaitPruStatic",
            ExchangePhase::AwaitPtuStatic => "AwaitPtuStatic",
            ExchangePhase::AwaitPruDynamic => "AwaitPruDynamic",
            ExchangePhase::Controlled => "Controlled",
        }
    }
}

/// Check that `message` is legal in the current exchange phase and advance it.
pub fn message_step(
    phase: ExchangePhase,
    message: &A4wpMessage,
) -> Result<ExchangePhase, ProtocolViolation> {
    use ExchangePhase::*;
    let next = match (phase, message) {
        (AwaitAdvertisement, A4wpMessage::Advertisement) => AwaitConnectionRequest,
        (AwaitConnectionRequest, A4wpMessage::ConnectionRequest) => AwaitPruStatic,
        (AwaitPruStatic, A4wpMessage::PruStaticParams { .. }) => AwaitPtuStatic,
        (AwaitPtuStatic, A4wpMessage::PtuStaticParams { .. }) => AwaitPruDynamic,
        (AwaitPruDynamic, A4wpMessage::PruDynamicParams(_)) => Controlled,
        (Controlled, A4wpMessage::PruControl { .. }) => Controlled,
        (Controlled, A4wpMessage::PruDynamicParams(_)) => Controlled,
        (Controlled, A4wpMessage::PruAlert { .. }) => Controlled,
        _ => {
            return Err(ProtocolViolation {
                state: phase.name(),
                event: message.kind_name(),
            })
        }
    };
    Ok(next)
}
