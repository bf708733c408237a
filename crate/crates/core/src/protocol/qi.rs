//! Qi control-phase state machine and power profiles.
//!
//! The session walks Start → Ping → IdentificationConfiguration →
//! PowerTransfer and ends in Complete; any active phase aborts on a fault.
//! A Ping that gets no response falls back to Start.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ProtocolViolation;
use crate::Scalar;

/// Qi session phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QiPhase {
    Start,
    Ping,
    IdentificationConfiguration,
    PowerTransfer,
    Complete,
    Aborted,
}

impl QiPhase {
    pub const ALL: [QiPhase; 6] = [
        QiPhase::Start,
        QiPhase::Ping,
        QiPhase::IdentificationConfiguration,
        QiPhase::PowerTransfer,
        QiPhase::Complete,
        QiPhase::Aborted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QiPhase::Start => "Start",
            QiPhase::Ping => "Ping",
            QiPhase::IdentificationConfiguration => "IdentificationConfiguration",
            QiPhase::PowerTransfer => "PowerTransfer",
            QiPhase::Complete => "Complete",
            QiPhase::Aborted => "Aborted",
        }
    }
}

impl std::fmt::Display for QiPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Event driving the Qi phase machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QiEvent {
    /// The charger senses a potential charging device.
    DeviceDetected,
    /// The device reports received signal strength.
    SignalStrengthReported,
    /// The device indicates its identifier and required power.
    IdAndPowerIndicated,
    /// The device feeds back control data during power transfer.
    ControlData,
    /// Charging finished; power transfer is disabled.
    ChargeComplete,
    /// The device did not answer the ping.
    PingTimeout,
    /// Fault or device removal.
    Fault,
}

impl QiEvent {
    pub const ALL: [QiEvent; 7] = [
        QiEvent::DeviceDetected,
        QiEvent::SignalStrengthReported,
        QiEvent::IdAndPowerIndicated,
        QiEvent::ControlData,
        QiEvent::ChargeComplete,
        QiEvent::PingTimeout,
        QiEvent::Fault,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QiEvent::DeviceDetected => "device-detected",
            QiEvent::SignalStrengthReported => "signal-strength-reported",
            QiEvent::IdAndPowerIndicated => "id-and-power-indicated",
            QiEvent::ControlData => "control-data",
            QiEvent::ChargeComplete => "charge-complete",
            QiEvent::PingTimeout => "ping-timeout",
            QiEvent::Fault => "fault",
        }
    }
}

impl std::fmt::Display for QiEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Apply one event to a Qi phase.
pub fn qi_step(phase: QiPhase, event: QiEvent) -> Result<QiPhase, ProtocolViolation> {
    use QiEvent::*;
    use QiPhase::*;
    let next = match (phase, event) {
        (Start, DeviceDetected) => Ping,
        (Ping, SignalStrengthReported) => IdentificationConfiguration,
        (Ping, PingTimeout) => Start,
        (IdentificationConfiguration, IdAndPowerIndicated) => PowerTransfer,
        (PowerTransfer, ControlData) => PowerTransfer,
        (PowerTransfer, ChargeComplete) => Complete,
        // Any active phase aborts on fault; Complete and Aborted are terminal.
        (Start | Ping | IdentificationConfiguration | PowerTransfer, Fault) => Aborted,
        _ => {
            return Err(ProtocolViolation {
                state: phase.name(),
                event: event.name(),
            })
        }
    };
    Ok(next)
}

/// Qi charger power category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QiPowerCategory {
    /// Up to 5 W on 110–205 kHz.
    Low,
    /// Up to 120 W on 80–300 kHz.
    Medium,
}

impl QiPowerCategory {
    /// (max watts, allowed kHz range) for the category.
    pub fn limits(self) -> (Scalar, (Scalar, Scalar)) {
        match self {
            QiPowerCategory::Low => (5.0, (110.0, 205.0)),
            QiPowerCategory::Medium => (120.0, (80.0, 300.0)),
        }
    }
}

impl std::str::FromStr for QiPowerCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(QiPowerCategory::Low),
            "medium" => Ok(QiPowerCategory::Medium),
            other => Err(format!("unknown Qi power category `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QiProfileError {
    #[error(
        "requested {requested_w} W exceeds the {limit_w} W limit of the {category:?} category"
    )]
    PowerLimit {
        category: QiPowerCategory,
        requested_w: Scalar,
        limit_w: Scalar,
    },
    #[error(
        "frequency {frequency_khz} kHz outside the {lo}-{hi} kHz band of the {category:?} category"
    )]
    FrequencyOutOfBand {
        category: QiPowerCategory,
        frequency_khz: Scalar,
        lo: Scalar,
        hi: Scalar,
    },
}

/// Requested power and operating frequency for a Qi session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QiPowerProfile {
    pub category: QiPowerCategory,
    pub requested_power_w: Scalar,
    pub frequency_khz: Scalar,
}

impl QiPowerProfile {
    pub fn new(
        category: QiPowerCategory,
        requested_power_w: Scalar,
        frequency_khz: Scalar,
    ) -> Self {
        Self {
            category,
            requested_power_w,
            frequency_khz,
        }
    }

    /// No power more than the category limit may be drawn, and the operating
    /// frequency must stay inside the category band.
    pub fn validate(&self) -> Result<(), QiProfileError> {
        let (limit_w, (lo, hi)) = self.category.limits();
        if !(self.requested_power_w <= limit_w) {
            return Err(QiProfileError::PowerLimit {
                category: self.category,
                requested_w: self.requested_power_w,
                limit_w,
            });
        }
        if !(self.frequency_khz >= lo && self.frequency_khz <= hi) {
            return Err(QiProfileError::FrequencyOutOfBand {
                category: self.category,
                frequency_khz: self.frequency_khz,
                lo,
                hi,
            });
        }
        Ok(())
    }
}

impl Default for QiPowerProfile {
    fn default() -> Self {
        QiPowerProfile::new(QiPowerCategory::Low, 5.0, 145.0)
    }
}

/// Qi device-alignment approach. Charger metadata only; it does not alter
/// session dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QiPositioning {
    Guided,
    MovableCoil,
    CoilArray,
}
