//! Synthetic mobility traces with the Wi-Fi scans the devices would record.
//!
//! A scenario plants groups that walk a shared waypoint path together and
//! loners that wander independently. Every sampling cycle each device that
//! is not dropped contributes one trajectory point and one fingerprint
//! listing every access point whose modeled signal clears its detection
//! floor. Runs are deterministic for a given seed.

mod radio;
mod scenarios;

use std::collections::BTreeSet;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::proximity::{ApObservation, DeviceId, EnvironmentSnapshot, Fingerprint, ProximityLog, Timestamp};
use crate::trajectory::{ObjectId, Point2D, Tick, TrajectoryDb};

pub use radio::{rssi_at, ApNode, RadioModel, REFERENCE_DISTANCE};
pub use scenarios::{corridor_scenario, fig4_scenario, CORRIDOR_LONERS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("cannot parse scenario: {0}")]
    Parse(String),
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

fn default_spread() -> f64 {
    1.0
}

/// Devices that walk `path` side by side.
///
/// Member `i` of `k` keeps a fixed offset of `spread * (i - (k-1)/2)` meters
/// along the y axis from the path point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub id: String,
    pub members: Vec<DeviceId>,
    pub path: Vec<Point2D>,
    /// Meters per second.
    pub speed: f64,
    #[serde(default = "default_spread")]
    pub spread: f64,
}

/// An independent walker: follows `path` when given, otherwise random
/// waypoints drawn uniformly from the scenario area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LonerSpec {
    pub device: DeviceId,
    pub speed: f64,
    #[serde(default)]
    pub path: Option<Vec<Point2D>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub min: Point2D,
    pub max: Point2D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityScenario {
    #[serde(default)]
    pub name: String,
    /// Seconds between sampling cycles.
    pub sample_interval: f64,
    /// Seconds; cycles run at `0, interval, 2*interval, ...` up to `duration`.
    pub duration: f64,
    #[serde(default)]
    pub dropout_rate: f64,
    pub radio: RadioModel,
    #[serde(default)]
    pub area: Option<Area>,
    #[serde(default)]
    pub aps: Vec<ApNode>,
    #[serde(default)]
    pub groups: Vec<GroupSpec>,
    #[serde(default)]
    pub loners: Vec<LonerSpec>,
}

impl MobilityScenario {
    /// Parse a TOML scenario description.
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let scenario: MobilityScenario = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenarios always serialize")
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.radio.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.sample_interval.is_finite() && self.sample_interval > 0.0) {
            return Err(invalid("sample_interval must be > 0"));
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(invalid("duration must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(invalid("dropout_rate must lie in [0, 1)"));
        }
        if !(self.radio.path_loss_exponent.is_finite() && self.radio.path_loss_exponent > 0.0) {
            return Err(invalid("path_loss_exponent must be > 0"));
        }
        if !(self.radio.noise_sigma_db.is_finite() && self.radio.noise_sigma_db >= 0.0) {
            return Err(invalid("noise_sigma_db must be >= 0"));
        }
        let mut bssids = BTreeSet::new();
        for ap in &self.aps {
            if ap.detection_floor_dbm >= ap.tx_power_dbm
                || !ap.detection_floor_dbm.is_finite()
                || !ap.tx_power_dbm.is_finite()
            {
                return Err(invalid(format!("ap {}: detection floor must be below tx power", ap.bssid)));
            }
            if !ap.position.is_finite() {
                return Err(invalid(format!("ap {}: non-finite position", ap.bssid)));
            }
            if !bssids.insert(ap.bssid) {
                return Err(invalid(format!("duplicate ap bssid {}", ap.bssid)));
            }
        }
        if let Some(area) = &self.area {
            if !(area.min.is_finite() && area.max.is_finite() && area.min.x <= area.max.x && area.min.y <= area.max.y) {
                return Err(invalid("area min must not exceed max"));
            }
        }
        let mut devices = BTreeSet::new();
        let mut group_ids = BTreeSet::new();
        for g in &self.groups {
            if !group_ids.insert(g.id.as_str()) {
                return Err(invalid(format!("duplicate group id {}", g.id)));
            }
            if g.members.is_empty() {
                return Err(invalid(format!("group {} has no members", g.id)));
            }
            check_path(&g.path, &format!("group {}", g.id))?;
            check_speed(g.speed, &format!("group {}", g.id))?;
            if !(g.spread.is_finite() && g.spread >= 0.0) {
                return Err(invalid(format!("group {}: spread must be >= 0", g.id)));
            }
            for d in &g.members {
                if !devices.insert(*d) {
                    return Err(invalid(format!("device {d} appears twice")));
                }
            }
        }
        for l in &self.loners {
            if !devices.insert(l.device) {
                return Err(invalid(format!("device {} appears twice", l.device)));
            }
            check_speed(l.speed, &format!("loner {}", l.device))?;
            match &l.path {
                Some(p) => check_path(p, &format!("loner {}", l.device))?,
                None if self.area.is_none() => {
                    return Err(invalid(format!("loner {} has no path and the scenario has no area", l.device)))
                }
                None => {}
            }
        }
        Ok(())
    }

    /// Number of sampling cycles.
    pub fn tick_count(&self) -> Tick {
        (self.duration / self.sample_interval + 1e-9).floor() as Tick + 1
    }

    pub fn tick_time(&self, tick: Tick) -> Timestamp {
        f64::from(tick) * self.sample_interval
    }

    /// All devices in simulation order: group members first, then loners.
    pub fn devices(&self) -> Vec<DeviceId> {
        self.groups.iter().flat_map(|g| g.members.iter().copied()).chain(self.loners.iter().map(|l| l.device)).collect()
    }
}

fn check_path(path: &[Point2D], what: &str) -> Result<(), ScenarioError> {
    if path.is_empty() || !path.iter().all(Point2D::is_finite) {
        return Err(invalid(format!("{what}: path must be a non-empty list of finite points")));
    }
    Ok(())
}

fn check_speed(speed: f64, what: &str) -> Result<(), ScenarioError> {
    if !(speed.is_finite() && speed >= 0.0) {
        return Err(invalid(format!("{what}: speed must be >= 0")));
    }
    Ok(())
}

/// Position after traveling `dist` meters along `path`; rests at the last waypoint.
fn along(path: &[Point2D], mut dist: f64) -> Point2D {
    for leg in path.windows(2) {
        let len = leg[0].distance(&leg[1]);
        if dist <= len {
            if len == 0.0 {
                return leg[0];
            }
            let f = dist / len;
            return Point2D::new(leg[0].x + f * (leg[1].x - leg[0].x), leg[0].y + f * (leg[1].y - leg[0].y));
        }
        dist -= len;
    }
    *path.last().expect("paths are non-empty")
}

fn random_waypoints<R: Rng>(area: &Area, needed: f64, rng: &mut R) -> Vec<Point2D> {
    let draw = |rng: &mut R| {
        Point2D::new(
            area.min.x + rng.random::<f64>() * (area.max.x - area.min.x),
            area.min.y + rng.random::<f64>() * (area.max.y - area.min.y),
        )
    };
    let mut path = vec![draw(rng)];
    let mut covered = 0.0;
    // Bounded so a degenerate (zero-size) area cannot loop forever.
    while covered < needed && path.len() < 10_000 {
        let next = draw(rng);
        covered += path.last().unwrap().distance(&next);
        path.push(next);
    }
    path
}

/// Ground-truth record for one device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub device: DeviceId,
    /// Planted group id, `None` for loners.
    pub group: Option<String>,
    pub t_start: Timestamp,
    pub t_end: Timestamp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub trajectories: TrajectoryDb,
    pub log: ProximityLog,
    pub truth: Vec<GroundTruth>,
}

impl SimOutput {
    /// Members of each planted group, in scenario order.
    pub fn planted_groups(&self) -> Vec<(String, BTreeSet<DeviceId>)> {
        let mut out: Vec<(String, BTreeSet<DeviceId>)> = Vec::new();
        for rec in &self.truth {
            let Some(g) = &rec.group else { continue };
            match out.iter_mut().find(|(id, _)| id == g) {
                Some((_, set)) => {
                    set.insert(rec.device);
                }
                None => out.push((g.clone(), BTreeSet::from([rec.device]))),
            }
        }
        out
    }

    pub fn loners(&self) -> Vec<DeviceId> {
        self.truth.iter().filter(|r| r.group.is_none()).map(|r| r.device).collect()
    }
}

/// Trajectory object id used for a device.
pub fn object_id(device: &DeviceId) -> ObjectId {
    ObjectId(device.to_string())
}

pub fn simulate(scenario: &MobilityScenario) -> Result<SimOutput, ScenarioError> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.radio.seed);
    let travel = scenario.duration;

    // (device, path, speed, y offset)
    let mut walkers: Vec<(DeviceId, Vec<Point2D>, f64, f64)> = Vec::new();
    for g in &scenario.groups {
        let k = g.members.len() as f64;
        for (i, d) in g.members.iter().enumerate() {
            let offset = g.spread * (i as f64 - (k - 1.0) / 2.0);
            walkers.push((*d, g.path.clone(), g.speed, offset));
        }
    }
    for l in &scenario.loners {
        let path = match (&l.path, &scenario.area) {
            (Some(p), _) => p.clone(),
            (None, Some(area)) => random_waypoints(area, l.speed * travel, &mut rng),
            (None, None) => unreachable!("validated"),
        };
        walkers.push((l.device, path, l.speed, 0.0));
    }

    let mut trajectories = TrajectoryDb::new();
    let mut log = ProximityLog::new();
    for tick in 0..scenario.tick_count() {
        let t = scenario.tick_time(tick);
        for (device, path, speed, offset) in &walkers {
            let dropped = rng.random::<f64>() < scenario.dropout_rate;
            if dropped {
                continue;
            }
            let base = along(path, speed * t);
            let pos = Point2D::new(base.x, base.y + offset);
            let observations = scenario
                .aps
                .iter()
                .filter_map(|ap| {
                    scenario
                        .radio
                        .sample_rssi(ap, &pos, &mut rng)
                        .map(|rssi| ApObservation::new(ap.ssid.clone(), ap.bssid, rssi))
                })
                .collect();
            let env = EnvironmentSnapshot::new(observations).expect("bssids validated unique");
            trajectories.insert(object_id(device), tick, pos).expect("ticks increase");
            log.ingest(*device, Fingerprint::new(t, env)).expect("times increase");
        }
    }

    let t_end = scenario.tick_time(scenario.tick_count() - 1);
    let truth = scenario
        .groups
        .iter()
        .flat_map(|g| {
            g.members.iter().map(|d| GroundTruth { device: *d, group: Some(g.id.clone()), t_start: 0.0, t_end })
        })
        .chain(scenario.loners.iter().map(|l| GroundTruth { device: l.device, group: None, t_start: 0.0, t_end }))
        .collect();

    Ok(SimOutput { trajectories, log, truth })
}

pub fn write_ground_truth<W: Write>(truth: &[GroundTruth], mut out: W) -> std::io::Result<()> {
    for rec in truth {
        writeln!(out, "{}", serde_json::to_string(rec).map_err(std::io::Error::other)?)?;
    }
    Ok(())
}
