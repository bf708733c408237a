//! Coarse physical feasibility checks for wireless power transfer.
//!
//! Near-field power falls off with the cube of the reciprocal distance,
//! far-field power with the reciprocal distance. Per-technique effective
//! ranges and the regulatory EIRP cap validate charger specs before a
//! scenario runs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::Real;
use crate::Meters;

/// Wireless power transfer technique.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technique {
    Inductive,
    Resonance,
    Microwave,
}

impl std::fmt::Display for Technique {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Technique::Inductive => "inductive",
            Technique::Resonance => "resonance",
            Technique::Microwave => "microwave",
        };
        f.write_str(s)
    }
}

/// Field region the technique operates in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldRegion {
    Near,
    Far,
}

/// Effective charging range and field region of one technique.
///
/// The ranges are the numeric operationalization of the qualitative
/// per-technique distances: millimeters-to-centimeters for inductive
/// coupling, centimeters-to-meters for resonance, tens of meters for
/// microwave radiation (capped at [`MICROWAVE_RANGE_CAP_M`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TechniqueProfile {
    pub technique: Technique,
    pub field: FieldRegion,
    pub min_range_m: Meters,
    pub max_range_m: Meters,
}

/// Default cap on the microwave effective range, in meters.
pub const MICROWAVE_RANGE_CAP_M: Meters = 50.0;

/// Regulatory cap on effective isotropic radiated power, in watts.
pub const EIRP_CAP_W: f64 = 4.0;

impl TechniqueProfile {
    /// The built-in profile for a technique.
    pub fn of(technique: Technique) -> Self {
        match technique {
            Technique::Inductive => TechniqueProfile {
                technique,
                field: FieldRegion::Near,
                min_range_m: 0.001,
                max_range_m: 0.05,
            },
            Technique::Resonance => TechniqueProfile {
                technique,
                field: FieldRegion::Near,
                min_range_m: 0.01,
                max_range_m: 5.0,
            },
            Technique::Microwave => TechniqueProfile {
                technique,
                field: FieldRegion::Far,
                min_range_m: 1.0,
                max_range_m: MICROWAVE_RANGE_CAP_M,
            },
        }
    }

    /// Whether `range` is a plausible effective range for this technique.
    pub fn contains(&self, range: Meters) -> bool {
        range >= self.min_range_m && range <= self.max_range_m
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkModelError {
    #[error("attenuation domain error: d = {d:?} must satisfy d >= d0 > 0 (d0 = {d0:?})")]
    AttenuationDomain { d: f64, d0: f64 },
}

/// Power attenuation factor at distance `d` relative to reference `d0`.
///
/// Near field: `(d0/d)^3`. Far field: `d0/d`. The factor is dimensionless
/// and lies in `(0, 1]` on the valid domain `d >= d0 > 0`.
pub fn attenuation_factor<R: Real>(field: FieldRegion, d: R, d0: R) -> Result<R, LinkModelError> {
    if !(d0 > R::zero()) || !(d >= d0) || !d.is_finite() {
        return Err(LinkModelError::AttenuationDomain {
            d: d.to_f64().unwrap_or(f64::NAN),
            d0: d0.to_f64().unwrap_or(f64::NAN),
        });
    }
    let ratio = d0 / d;
    Ok(match field {
        FieldRegion::Near => ratio * ratio * ratio,
        FieldRegion::Far => ratio,
    })
}

/// Whether a charger using `technique` can effectively charge at distance `d`.
pub fn in_range(technique: Technique, d: Meters) -> bool {
    d >= 0.0 && d <= TechniqueProfile::of(technique).max_range_m
}

/// Whether `device_power` watts with `antenna_gain` dBi stays within the
/// 4 W EIRP regulatory cap.
pub fn eirp_check<R: Real>(device_power: R, antenna_gain_dbi: R) -> bool {
    let ten = R::from_f64(10.0).unwrap();
    let eirp = device_power * ten.powf(antenna_gain_dbi / ten);
    eirp <= R::from_f64(EIRP_CAP_W).unwrap()
}
