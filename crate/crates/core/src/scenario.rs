//! Scenario construction: the area grid, charger fleet, price schedule,
//! arrival process, and the JSON file format.
//!
//! The default scenario is a campus split into a 4x4 grid of areas, one
//! resonance charger per area with three concurrent slots, 125 m between
//! neighboring chargers, a 20-minute charge per user, and 6 new users per
//! hour per area over an 8-hour horizon (first hour treated as warm-up).
//!
//! Areas are numbered column-major starting at 1: areas 1-4 form the first
//! column, 5-8 the second, and so on.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linkmodel::{Technique, TechniqueProfile};
use crate::numeric::Real;
use crate::protocol::{QiPositioning, Standard};
use crate::{Cents, Meters, Minutes, Scalar};

/// Position in meters.
pub type Position = (Meters, Meters);

/// Identifier of a charger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChargerId(pub u32);

impl std::fmt::Display for ChargerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier of an arriving user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub u64);

impl std::fmt::Display for UserId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("area index {area} is invalid (valid: 1..={max})")]
    InvalidArea { area: u32, max: u32 },
    #[error("load ratio {ratio} must be >= 1")]
    InvalidRatio { ratio: Scalar },
    #[error("shaped rates need at least 2 areas, got {areas}")]
    TooFewAreas { areas: u32 },
    #[error("total arrival rate must be positive, got {rate}")]
    NonPositiveRate { rate: Scalar },
    #[error("scenario configuration error: {0}")]
    Config(String),
    #[error("scenario file parse error: {0}")]
    Parse(String),
}

/// Rectangular grid of areas with one coordinate frame for the whole campus.
///
/// Area `j` (1-based) maps column-major to the center coordinate
/// `((j-1)/rows * spacing, (j-1)%rows * spacing)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaGrid {
    pub rows: u32,
    pub cols: u32,
    pub spacing_m: Meters,
}

impl AreaGrid {
    pub fn area_count(&self) -> u32 {
        self.rows * self.cols
    }

    pub fn contains(&self, area: u32) -> bool {
        area >= 1 && area <= self.area_count()
    }

    /// Center coordinate of an area.
    pub fn center(&self, area: u32) -> Result<Position, ScenarioError> {
        if !self.contains(area) {
            return Err(ScenarioError::InvalidArea {
                area,
                max: self.area_count(),
            });
        }
        let idx = area - 1;
        let col = idx / self.rows;
        let row = idx % self.rows;
        Ok((
            col as Scalar * self.spacing_m,
            row as Scalar * self.spacing_m,
        ))
    }
}

/// Static description of one charger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargerSpec {
    pub id: ChargerId,
    pub area: u32,
    pub position_m: Position,
    /// Number of devices the charger serves concurrently.
    pub capacity: u32,
    /// Price per minute of charging, in cents.
    pub price_cents_per_min: Cents,
    pub technique: Technique,
    pub standard: Standard,
    pub effective_range_m: Meters,
    /// Qi alignment approach; metadata only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qi_positioning: Option<QiPositioning>,
}

/// Weights for the delay, price, and user-effort cost components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub w1: Scalar,
    pub w2: Scalar,
    pub w3: Scalar,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            w1: 1.0,
            w2: 1.0,
            w3: 1.0,
        }
    }
}

/// Where inside its origin area a new user stands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PositionPolicy {
    /// Deterministically at the area center (the charger position in the
    /// default scenario).
    #[default]
    AreaCenter,
    /// Uniformly over the area's square.
    UniformInArea,
}

/// Per-area homogeneous Poisson arrivals over a finite horizon.
///
/// Serialized field names match the scenario file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalModel {
    /// Arrival rate per area, users/hour. Length equals the grid area count.
    #[serde(rename = "rates")]
    pub rates_per_hour: Vec<Scalar>,
    #[serde(rename = "horizon_h")]
    pub horizon_hours: Scalar,
    /// Initial interval excluded from metrics, in hours.
    #[serde(rename = "warmup_h")]
    pub warmup_hours: Scalar,
    pub position_policy: PositionPolicy,
}

impl ArrivalModel {
    pub fn total_rate(&self) -> Scalar {
        self.rates_per_hour.iter().sum()
    }
}

/// Immutable description of one simulation setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub grid: AreaGrid,
    pub chargers: Vec<ChargerSpec>,
    pub weights: Weights,
    pub arrivals: ArrivalModel,
    /// Charging minutes demanded by every user.
    pub demand_min: Minutes,
    /// Meters of walking that count as one unit of effort cost.
    pub effort_unit_m: Meters,
    pub seed: u64,
    /// Assignment period of the optimal scheme, in minutes.
    pub batch_interval_min: Minutes,
}

/// Default number of concurrent charging slots per charger.
pub const DEFAULT_CAPACITY: u32 = 3;
/// Default per-user demand, in charging minutes.
pub const DEFAULT_DEMAND_MIN: Minutes = 20.0;
/// Default per-area arrival rate, users per hour.
pub const DEFAULT_RATE_PER_HOUR: Scalar = 6.0;
/// Default simulated horizon, in hours.
pub const DEFAULT_HORIZON_HOURS: Scalar = 8.0;
/// Default warm-up excluded from metrics, in hours.
pub const DEFAULT_WARMUP_HOURS: Scalar = 1.0;
/// Default effort normalization: meters per effort unit.
pub const DEFAULT_EFFORT_UNIT_M: Meters = 100.0;
/// Default batch assignment period of the optimal scheme, in minutes.
pub const DEFAULT_BATCH_INTERVAL_MIN: Minutes = 1.0;
/// Default PRNG seed.
pub const DEFAULT_SEED: u64 = 1;

/// Price per charging minute at area `j`: `0.25 + j * 0.08` cents.
///
/// Chargers at low-index areas are the cheapest.
pub fn price_schedule<R: Real>(area: u32) -> Result<R, ScenarioError> {
    if area < 1 {
        return Err(ScenarioError::InvalidArea {
            area,
            max: u32::MAX,
        });
    }
    let base = R::from_f64(0.25).unwrap();
    let slope = R::from_f64(0.08).unwrap();
    Ok(base + R::from_u32(area).unwrap() * slope)
}

/// Per-area arrival rates forming an arithmetic progression from area 1 to
/// area `areas`, with last/first ratio `ratio` and the given total preserved.
pub fn shaped_rates<R: Real>(total_rate: R, ratio: R, areas: u32) -> Result<Vec<R>, ScenarioError> {
    if !(total_rate > R::zero()) {
        return Err(ScenarioError::NonPositiveRate {
            rate: total_rate.to_f64().unwrap_or(f64::NAN),
        });
    }
    if !(ratio >= R::one()) {
        return Err(ScenarioError::InvalidRatio {
            ratio: ratio.to_f64().unwrap_or(f64::NAN),
        });
    }
    if areas < 2 {
        return Err(ScenarioError::TooFewAreas { areas });
    }
    let n = R::from_u32(areas).unwrap();
    let two = R::from_f64(2.0).unwrap();
    // Sum of an arithmetic progression: n * (first + last) / 2 with last = ratio * first.
    let first = two * total_rate / (n * (R::one() + ratio));
    let step = first * (ratio - R::one()) / (n - R::one());
    Ok((0..areas)
        .map(|i| first + R::from_u32(i).unwrap() * step)
        .collect())
}

/// The default 16-area campus scenario.
pub fn build_default_scenario() -> Scenario {
    let grid = AreaGrid {
        rows: 4,
        cols: 4,
        spacing_m: 125.0,
    };
    let chargers = (1..=grid.area_count())
        .map(|area| ChargerSpec {
            id: ChargerId(area),
            area,
            position_m: grid.center(area).expect("area is in the grid"),
            capacity: DEFAULT_CAPACITY,
            price_cents_per_min: price_schedule(area).expect("area is valid"),
            technique: Technique::Resonance,
            standard: Standard::A4wp,
            effective_range_m: 2.0,
            qi_positioning: None,
        })
        .collect();
    Scenario {
        grid,
        chargers,
        weights: Weights::default(),
        arrivals: ArrivalModel {
            rates_per_hour: vec![DEFAULT_RATE_PER_HOUR; grid.area_count() as usize],
            horizon_hours: DEFAULT_HORIZON_HOURS,
            warmup_hours: DEFAULT_WARMUP_HOURS,
            position_policy: PositionPolicy::AreaCenter,
        },
        demand_min: DEFAULT_DEMAND_MIN,
        effort_unit_m: DEFAULT_EFFORT_UNIT_M,
        seed: DEFAULT_SEED,
        batch_interval_min: DEFAULT_BATCH_INTERVAL_MIN,
    }
}

impl Scenario {
    /// Scenario with the per-area rates replaced (totals may differ).
    pub fn with_rates(mut self, rates_per_hour: Vec<Scalar>) -> Self {
        self.arrivals.rates_per_hour = rates_per_hour;
        self
    }

    pub fn warmup_min(&self) -> Minutes {
        self.arrivals.warmup_hours * 60.0
    }

    pub fn horizon_min(&self) -> Minutes {
        self.arrivals.horizon_hours * 60.0
    }

    /// Check structural invariants; every run calls this first.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let fail = |msg: String| Err(ScenarioError::Config(msg));
        if self.grid.rows < 1 || self.grid.cols < 1 {
            return fail(format!(
                "grid must be at least 1x1, got {}x{}",
                self.grid.rows, self.grid.cols
            ));
        }
        if !(self.grid.spacing_m > 0.0) {
            return fail(format!(
                "grid spacing must be positive, got {}",
                self.grid.spacing_m
            ));
        }
        if self.chargers.is_empty() {
            return fail("scenario has no chargers".to_string());
        }
        let mut seen = std::collections::BTreeSet::new();
        for charger in &self.chargers {
            if !seen.insert(charger.id) {
                return fail(format!("duplicate charger id {}", charger.id));
            }
            if !self.grid.contains(charger.area) {
                return fail(format!(
                    "charger {} is in area {} outside the {} areas of the grid",
                    charger.id,
                    charger.area,
                    self.grid.area_count()
                ));
            }
            if charger.capacity < 1 {
                return fail(format!("charger {} capacity must be >= 1", charger.id));
            }
            if !(charger.price_cents_per_min >= 0.0) {
                return fail(format!("charger {} price must be >= 0", charger.id));
            }
            if !charger.position_m.0.is_finite() || !charger.position_m.1.is_finite() {
                return fail(format!("charger {} position must be finite", charger.id));
            }
            let profile = TechniqueProfile::of(charger.technique);
            if !profile.contains(charger.effective_range_m) {
                return fail(format!(
                    "charger {} effective range {} m is outside the {} profile [{}, {}] m",
                    charger.id,
                    charger.effective_range_m,
                    charger.technique,
                    profile.min_range_m,
                    profile.max_range_m
                ));
            }
        }
        if self.arrivals.rates_per_hour.len() != self.grid.area_count() as usize {
            return fail(format!(
                "{} per-area rates given for {} areas",
                self.arrivals.rates_per_hour.len(),
                self.grid.area_count()
            ));
        }
        if self
            .arrivals
            .rates_per_hour
            .iter()
            .any(|r| !(*r >= 0.0) || !r.is_finite())
        {
            return fail("arrival rates must be finite and >= 0".to_string());
        }
        if !(self.arrivals.horizon_hours >= 0.0) {
            return fail("horizon must be >= 0 hours".to_string());
        }
        if !(self.arrivals.warmup_hours >= 0.0) {
            return fail("warm-up must be >= 0 hours".to_string());
        }
        if !(self.demand_min > 0.0) {
            return fail(format!(
                "demand must be positive, got {} min",
                self.demand_min
            ));
        }
        if !(self.effort_unit_m > 0.0) {
            return fail("effort unit must be positive meters".to_string());
        }
        if !(self.batch_interval_min > 0.0) {
            return fail("batch interval must be positive minutes".to_string());
        }
        if !(self.weights.w1 >= 0.0 && self.weights.w2 >= 0.0 && self.weights.w3 >= 0.0) {
            return fail("weights must be >= 0".to_string());
        }
        Ok(())
    }

    /// Parse a scenario from its JSON file form, filling omitted keys with
    /// the defaults of [`build_default_scenario`].
    pub fn from_json_str(text: &str) -> Result<Scenario, ScenarioError> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        file.resolve()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// One arriving user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRequest {
    pub id: UserId,
    pub arrival_min: Minutes,
    pub origin_area: u32,
    pub position_m: Position,
    pub demand_min: Minutes,
}

/// Generate the merged, time-ordered arrival stream for a scenario.
///
/// Each area runs an independent homogeneous Poisson process on its own
/// PRNG stream, so the stream for a fixed `(seed, area)` pair does not
/// depend on the other areas' rates.
pub fn generate_arrivals(scenario: &Scenario, seed: u64) -> Vec<UserRequest> {
    let horizon_min = scenario.horizon_min();
    let mut raw: Vec<(Minutes, u32, Position)> = Vec::new();
    for (idx, &rate_per_hour) in scenario.arrivals.rates_per_hour.iter().enumerate() {
        if rate_per_hour <= 0.0 {
            continue;
        }
        let area = idx as u32 + 1;
        let center = scenario.grid.center(area).expect("validated area");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(area as u64);
        let exp = Exp::new(rate_per_hour / 60.0).expect("positive rate");
        let jitter = Uniform::new(-0.5, 0.5).expect("valid range");
        let mut t: Minutes = 0.0;
        loop {
            t += exp.sample(&mut rng);
            if t >= horizon_min {
                break;
            }
            let position = match scenario.arrivals.position_policy {
                PositionPolicy::AreaCenter => center,
                PositionPolicy::UniformInArea => (
                    center.0 + jitter.sample(&mut rng) * scenario.grid.spacing_m,
                    center.1 + jitter.sample(&mut rng) * scenario.grid.spacing_m,
                ),
            };
            raw.push((t, area, position));
        }
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    raw.into_iter()
        .enumerate()
        .map(|(i, (arrival_min, origin_area, position_m))| UserRequest {
            id: UserId(i as u64),
            arrival_min,
            origin_area,
            position_m,
            demand_min: scenario.demand_min,
        })
        .collect()
}

// --- JSON file form -------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    rows: u32,
    cols: u32,
    spacing_m: Meters,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChargerFile {
    #[serde(default)]
    id: Option<u32>,
    area: u32,
    #[serde(default)]
    position_m: Option<[Meters; 2]>,
    #[serde(default)]
    capacity: Option<u32>,
    #[serde(default)]
    price_cents_per_min: Option<Cents>,
    #[serde(default)]
    technique: Option<Technique>,
    #[serde(default)]
    standard: Option<Standard>,
    #[serde(default)]
    effective_range_m: Option<Meters>,
    #[serde(default)]
    qi_positioning: Option<QiPositioning>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArrivalsFile {
    #[serde(default)]
    rates: Option<Vec<Scalar>>,
    #[serde(default)]
    horizon_h: Option<Scalar>,
    #[serde(default)]
    warmup_h: Option<Scalar>,
    #[serde(default)]
    position_policy: Option<PositionPolicy>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    grid: Option<GridFile>,
    #[serde(default)]
    chargers: Option<Vec<ChargerFile>>,
    #[serde(default)]
    weights: Option<Weights>,
    #[serde(default)]
    arrivals: Option<ArrivalsFile>,
    #[serde(default)]
    demand_min: Option<Minutes>,
    #[serde(default)]
    effort_unit_m: Option<Meters>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    batch_interval_min: Option<Minutes>,
}

impl ScenarioFile {
    fn resolve(self) -> Result<Scenario, ScenarioError> {
        let grid = match self.grid {
            Some(g) => AreaGrid {
                rows: g.rows,
                cols: g.cols,
                spacing_m: g.spacing_m,
            },
            None => AreaGrid {
                rows: 4,
                cols: 4,
                spacing_m: 125.0,
            },
        };
        if grid.rows < 1 || grid.cols < 1 || !(grid.spacing_m > 0.0) {
            return Err(ScenarioError::Config(format!(
                "invalid grid {}x{} spacing {}",
                grid.rows, grid.cols, grid.spacing_m
            )));
        }

        let chargers = match self.chargers {
            Some(entries) => {
                let mut out = Vec::with_capacity(entries.len());
                for entry in entries {
                    if !grid.contains(entry.area) {
                        return Err(ScenarioError::InvalidArea {
                            area: entry.area,
                            max: grid.area_count(),
                        });
                    }
                    let technique = entry.technique.unwrap_or(Technique::Resonance);
                    out.push(ChargerSpec {
                        id: ChargerId(entry.id.unwrap_or(entry.area)),
                        area: entry.area,
                        position_m: entry
                            .position_m
                            .map(|[x, y]| (x, y))
                            .unwrap_or(grid.center(entry.area)?),
                        capacity: entry.capacity.unwrap_or(DEFAULT_CAPACITY),
                        price_cents_per_min: match entry.price_cents_per_min {
                            Some(p) => p,
                            None => price_schedule(entry.area)?,
                        },
                        technique,
                        standard: entry.standard.unwrap_or(match technique {
                            Technique::Inductive => Standard::Qi,
                            _ => Standard::A4wp,
                        }),
                        effective_range_m: entry.effective_range_m.unwrap_or(match technique {
                            Technique::Inductive => 0.04,
                            Technique::Resonance => 2.0,
                            Technique::Microwave => 10.0,
                        }),
                        qi_positioning: entry.qi_positioning,
                    });
                }
                out
            }
            None => (1..=grid.area_count())
                .map(|area| {
                    Ok(ChargerSpec {
                        id: ChargerId(area),
                        area,
                        position_m: grid.center(area)?,
                        capacity: DEFAULT_CAPACITY,
                        price_cents_per_min: price_schedule(area)?,
                        technique: Technique::Resonance,
                        standard: Standard::A4wp,
                        effective_range_m: 2.0,
                        qi_positioning: None,
                    })
                })
                .collect::<Result<Vec<_>, ScenarioError>>()?,
        };

        let arrivals = self.arrivals;
        let (rates, horizon_h, warmup_h, position_policy) = match arrivals {
            Some(a) => (a.rates, a.horizon_h, a.warmup_h, a.position_policy),
            None => (None, None, None, None),
        };
        let rates_per_hour =
            rates.unwrap_or_else(|| vec![DEFAULT_RATE_PER_HOUR; grid.area_count() as usize]);

        let scenario = Scenario {
            grid,
            chargers,
            weights: self.weights.unwrap_or_default(),
            arrivals: ArrivalModel {
                rates_per_hour,
                horizon_hours: horizon_h.unwrap_or(DEFAULT_HORIZON_HOURS),
                warmup_hours: warmup_h.unwrap_or(DEFAULT_WARMUP_HOURS),
                position_policy: position_policy.unwrap_or_default(),
            },
            demand_min: self.demand_min.unwrap_or(DEFAULT_DEMAND_MIN),
            effort_unit_m: self.effort_unit_m.unwrap_or(DEFAULT_EFFORT_UNIT_M),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            batch_interval_min: self
                .batch_interval_min
                .unwrap_or(DEFAULT_BATCH_INTERVAL_MIN),
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_scenario_shape() {
        let s = build_default_scenario();
        s.validate().unwrap();
        assert_eq!(s.chargers.len(), 16);
        assert!(s.chargers.iter().all(|c| c.capacity == 3));
        assert_relative_eq!(s.arrivals.total_rate(), 96.0, epsilon = 1e-12);
        assert_eq!(s.demand_min, 20.0);
    }

    #[test]
    fn neighboring_area_centers_are_one_spacing_apart() {
        let s = build_default_scenario();
        let a = s.grid.center(1).unwrap();
        let b = s.grid.center(2).unwrap();
        let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
        assert_eq!(d, 125.0);
    }

    #[test]
    fn column_major_numbering() {
        let grid = AreaGrid {
            rows: 4,
            cols: 4,
            spacing_m: 125.0,
        };
        // First column: areas 1-4 share x = 0; second column starts at area 5.
        for area in 1..=4 {
            assert_eq!(grid.center(area).unwrap().0, 0.0);
        }
        assert_eq!(grid.center(5).unwrap(), (125.0, 0.0));
        assert_eq!(grid.center(16).unwrap(), (375.0, 375.0));
        assert!(grid.center(0).is_err());
        assert!(grid.center(17).is_err());
    }

    #[test]
    fn center_mapping_is_a_bijection() {
        let grid = AreaGrid {
            rows: 5,
            cols: 3,
            spacing_m: 50.0,
        };
        let mut seen = std::collections::BTreeSet::new();
        for area in 1..=grid.area_count() {
            let (x, y) = grid.center(area).unwrap();
            assert!(seen.insert((x as i64, y as i64)));
        }
        assert_eq!(seen.len(), 15);
    }

    #[test]
    fn price_schedule_examples() {
        assert_relative_eq!(price_schedule::<f64>(1).unwrap(), 0.33, epsilon = 1e-12);
        assert_relative_eq!(price_schedule::<f64>(16).unwrap(), 1.53, epsilon = 1e-12);
        assert!(price_schedule::<f64>(16).unwrap() > price_schedule::<f64>(1).unwrap());
        assert!(price_schedule::<f64>(0).is_err());
        assert!((price_schedule::<f32>(1).unwrap() - 0.33f32).abs() < 1e-6);
    }

    #[test]
    fn shaped_rates_uniform_and_ratio_four() {
        let uniform = shaped_rates::<f64>(96.0, 1.0, 16).unwrap();
        assert!(uniform.iter().all(|&r| r == 6.0));

        let shaped = shaped_rates::<f64>(96.0, 4.0, 16).unwrap();
        assert_relative_eq!(shaped[0], 2.4, epsilon = 1e-12);
        assert_relative_eq!(shaped[15], 9.6, epsilon = 1e-12);
        for ratio in [1.0, 2.0, 3.0, 4.0] {
            let rates = shaped_rates::<f64>(96.0, ratio, 16).unwrap();
            assert_relative_eq!(rates.iter().sum::<f64>(), 96.0, epsilon = 1e-9);
            assert_relative_eq!(rates[15] / rates[0], ratio, epsilon = 1e-9);
        }
    }

    #[test]
    fn shaped_rates_errors() {
        assert!(matches!(
            shaped_rates::<f64>(96.0, 0.5, 16),
            Err(ScenarioError::InvalidRatio { .. })
        ));
        assert!(matches!(
            shaped_rates::<f64>(96.0, 2.0, 1),
            Err(ScenarioError::TooFewAreas { .. })
        ));
        assert!(matches!(
            shaped_rates::<f64>(0.0, 2.0, 16),
            Err(ScenarioError::NonPositiveRate { .. })
        ));
    }

    #[test]
    fn zero_rates_give_no_arrivals() {
        let s = build_default_scenario().with_rates(vec![0.0; 16]);
        assert!(generate_arrivals(&s, 3).is_empty());
    }

    #[test]
    fn arrivals_are_deterministic_and_ordered() {
        let s = build_default_scenario();
        let a = generate_arrivals(&s, 42);
        let b = generate_arrivals(&s, 42);
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].arrival_min <= w[1].arrival_min));
        let c = generate_arrivals(&s, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn arrival_counts_match_the_poisson_mean() {
        // 16 areas x 6/hour x 10 h: mean 960, sigma sqrt(960). The mean over
        // 30 seeds must land within 3 sigma of the replication mean.
        let mut s = build_default_scenario();
        s.arrivals.horizon_hours = 10.0;
        let replications = 30;
        let total: usize = (0..replications)
            .map(|seed| generate_arrivals(&s, seed).len())
            .sum();
        let mean = total as f64 / replications as f64;
        let sigma_mean = (960.0f64).sqrt() / (replications as f64).sqrt();
        assert!(
            (mean - 960.0).abs() <= 3.0 * sigma_mean,
            "mean arrival count {mean} strays from 960 (allowed ±{})",
            3.0 * sigma_mean
        );
    }

    #[test]
    fn uniform_positions_stay_inside_the_area_square() {
        let mut s = build_default_scenario();
        s.arrivals.position_policy = PositionPolicy::UniformInArea;
        let users = generate_arrivals(&s, 9);
        assert!(!users.is_empty());
        let half = s.grid.spacing_m / 2.0;
        let mut off_center = 0;
        for user in &users {
            let center = s.grid.center(user.origin_area).unwrap();
            assert!((user.position_m.0 - center.0).abs() <= half);
            assert!((user.position_m.1 - center.1).abs() <= half);
            if user.position_m != center {
                off_center += 1;
            }
        }
        assert!(off_center > 0);
    }

    #[test]
    fn per_area_streams_are_rate_independent() {
        // Changing one area's rate must not disturb the others' streams.
        let s = build_default_scenario();
        let mut shifted = s.clone();
        shifted.arrivals.rates_per_hour[0] = 0.0;
        let base: Vec<_> = generate_arrivals(&s, 5)
            .into_iter()
            .filter(|u| u.origin_area != 1)
            .map(|u| (u.arrival_min, u.origin_area))
            .collect();
        let with_zero: Vec<_> = generate_arrivals(&shifted, 5)
            .into_iter()
            .map(|u| (u.arrival_min, u.origin_area))
            .collect();
        assert_eq!(base, with_zero);
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let s = build_default_scenario();
        let text = s.to_json_string();
        let parsed = Scenario::from_json_str(&text).unwrap();
        assert_eq!(parsed, s);

        // An empty object resolves to the full default scenario.
        let defaulted = Scenario::from_json_str("{}").unwrap();
        assert_eq!(defaulted, s);

        // Partial override keeps the remaining defaults.
        let partial = Scenario::from_json_str(r#"{"seed": 9, "demand_min": 5.0}"#).unwrap();
        assert_eq!(partial.seed, 9);
        assert_eq!(partial.demand_min, 5.0);
        assert_eq!(partial.chargers.len(), 16);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = Scenario::from_json_str("{\n  \"seed\": }").unwrap_err();
        match err {
            ScenarioError::Parse(msg) => assert!(msg.contains("line"), "{msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
        let err = Scenario::from_json_str(r#"{"sedd": 9}"#).unwrap_err();
        assert!(matches!(err, ScenarioError::Parse(_)));
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut s = build_default_scenario();
        s.chargers.clear();
        assert!(s.validate().is_err());

        let mut s = build_default_scenario();
        s.chargers[0].effective_range_m = 50.0; // outside the resonance profile
        assert!(s.validate().is_err());

        let mut s = build_default_scenario();
        s.chargers[1].id = s.chargers[0].id;
        assert!(s.validate().is_err());

        let mut s = build_default_scenario();
        s.arrivals.rates_per_hour.pop();
        assert!(s.validate().is_err());

        let mut s = build_default_scenario();
        s.demand_min = 0.0;
        assert!(s.validate().is_err());
    }
}
