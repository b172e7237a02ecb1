//! Backward-scan discovery of the devices traveling with a user.
//!
//! Starting from the user's current snapshot, the candidate set is seeded
//! with every other device whose latest measurement in `[t0 - delta, t0]`
//! is comparable with it. The scan then walks the user's own history
//! backwards through the lookback horizon. At each earlier user sample the
//! candidates are re-matched to their nearest measurement within
//! `t ± delta`; candidates with no measurement there, or whose measurement
//! is not comparable with the user's snapshot, are dropped for good. Missing
//! samples are never interpolated.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::comparability::{check_delta, check_omega, comparable, ParamError};
use crate::proximity::{DeviceId, EnvironmentSnapshot, Fingerprint, ProximityLog, Timestamp};

/// Default minimum number of user samples a query must consume.
pub const DEFAULT_MIN_STEPS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupQueryParams {
    delta: f64,
    omega: f64,
    t_max: f64,
    n: usize,
    min_steps: usize,
}

impl GroupQueryParams {
    /// `delta` seconds, `omega` dB, lookback `t_max` seconds, group size `n`
    /// counting the querying user.
    pub fn new(delta: f64, omega: f64, t_max: f64, n: usize) -> Result<Self, ParamError> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(ParamError::TMax(t_max));
        }
        if n == 0 {
            return Err(ParamError::Count { name: "n" });
        }
        Ok(GroupQueryParams {
            delta: check_delta(delta)?,
            omega: check_omega(omega)?,
            t_max,
            n,
            min_steps: DEFAULT_MIN_STEPS,
        })
    }

    pub fn with_min_steps(mut self, min_steps: usize) -> Result<Self, ParamError> {
        if min_steps == 0 {
            return Err(ParamError::Count { name: "min_steps" });
        }
        self.min_steps = min_steps;
        Ok(self)
    }

    pub fn with_t_max(self, t_max: f64) -> Result<Self, ParamError> {
        GroupQueryParams::new(self.delta, self.omega, t_max, self.n)?.with_min_steps(self.min_steps)
    }

    pub fn with_n(self, n: usize) -> Result<Self, ParamError> {
        GroupQueryParams::new(self.delta, self.omega, self.t_max, n)?.with_min_steps(self.min_steps)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn t_max(&self) -> f64 {
        self.t_max
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn min_steps(&self) -> usize {
        self.min_steps
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("the current environment snapshot is empty")]
    EmptyEnvironment,
}

/// Devices still matching the user, each with its latest matched fingerprint.
#[derive(Debug, Clone, Default)]
pub struct CandidateSet<'a> {
    entries: BTreeMap<DeviceId, &'a Fingerprint>,
}

impl<'a> CandidateSet<'a> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn devices(&self) -> impl Iterator<Item = DeviceId> + '_ {
        self.entries.keys().copied()
    }

    pub fn get(&self, device: &DeviceId) -> Option<&'a Fingerprint> {
        self.entries.get(device).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupResult {
    /// Companions, excluding the querying user.
    pub members: BTreeSet<DeviceId>,
    /// User samples consumed, the current snapshot included.
    pub steps_processed: usize,
    /// Timestamp of the earliest user sample consumed.
    pub oldest_step_time: Timestamp,
}

impl GroupResult {
    /// Group size counting the querying user.
    pub fn group_size(&self) -> usize {
        self.members.len() + 1
    }
}

/// Observer for the individual steps of a query; used by tests to check
/// that candidates are only ever removed.
pub trait ScanObserver {
    fn step(&mut self, _t: Timestamp, _candidates: &CandidateSet<'_>) {}
}

impl ScanObserver for () {}

pub fn discover_group(
    log: &ProximityLog,
    user: &DeviceId,
    t0: Timestamp,
    e0: &EnvironmentSnapshot,
    params: &GroupQueryParams,
) -> Result<GroupResult, GroupError> {
    discover_group_observed(log, user, t0, e0, params, &mut ())
}

pub fn discover_group_observed(
    log: &ProximityLog,
    user: &DeviceId,
    t0: Timestamp,
    e0: &EnvironmentSnapshot,
    params: &GroupQueryParams,
    observer: &mut impl ScanObserver,
) -> Result<GroupResult, GroupError> {
    if e0.is_empty() {
        return Err(GroupError::EmptyEnvironment);
    }
    let delta = params.delta;
    let omega = params.omega;
    let horizon = t0 - params.t_max;

    let mut candidates = CandidateSet {
        entries: log
            .measurements_in_window(t0 - delta, t0, user)
            .into_iter()
            .filter(|(_, fp)| comparable(&fp.env, e0, omega))
            .collect(),
    };
    observer.step(t0, &candidates);

    let mut steps = 1;
    let mut oldest = t0;
    let user_track = log.track(user);
    let mut t = t0;
    while t > horizon && !candidates.is_empty() {
        // No user history (or none left inside the horizon) ends the scan.
        let Some(prev) = user_track.and_then(|tr| tr.previous(t)) else {
            break;
        };
        if prev.t < horizon {
            break;
        }
        t = prev.t;
        steps += 1;
        oldest = t;
        candidates.entries = std::mem::take(&mut candidates.entries)
            .into_keys()
            .filter_map(|device| {
                log.track(&device)
                    .and_then(|tr| tr.nearest_in_window(t, delta))
                    .filter(|fp| comparable(&fp.env, &prev.env, omega))
                    .map(|fp| (device, fp))
            })
            .collect();
        observer.step(t, &candidates);
    }

    let members = if steps >= params.min_steps { candidates.devices().collect() } else { BTreeSet::new() };
    Ok(GroupResult { members, steps_processed: steps, oldest_step_time: oldest })
}

/// `IN_GROUP_OF(n, t)`: whether the user has traveled with at least `n - 1`
/// companions over the lookback horizon.
pub fn in_group_of(
    log: &ProximityLog,
    user: &DeviceId,
    t0: Timestamp,
    e0: &EnvironmentSnapshot,
    params: &GroupQueryParams,
) -> Result<bool, GroupError> {
    Ok(discover_group(log, user, t0, e0, params)?.group_size() >= params.n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proximity::{ApObservation, MacAddr};

    const X: MacAddr = MacAddr::new([0x10, 0, 0, 0, 0, 1]);
    const Y: MacAddr = MacAddr::new([0x10, 0, 0, 0, 0, 2]);
    const A: MacAddr = MacAddr::new([0xaa, 0, 0, 0, 0, 0xa]);
    const B: MacAddr = MacAddr::new([0xaa, 0, 0, 0, 0, 0xb]);
    const C: MacAddr = MacAddr::new([0xaa, 0, 0, 0, 0, 0xc]);

    fn snap(aps: &[(MacAddr, i32)]) -> EnvironmentSnapshot {
        EnvironmentSnapshot::new(aps.iter().map(|&(b, r)| ApObservation::new("", b, r)).collect()).unwrap()
    }

    fn example_log() -> ProximityLog {
        let mut log = ProximityLog::new();
        let rows: [(MacAddr, [i32; 3]); 3] = [(A, [-60, -52, -50]), (B, [-65, -55, -53]), (C, [-61, -80, -54])];
        for (dev, [r80, r90, r100]) in rows {
            log.ingest(dev, Fingerprint::new(80.0, snap(&[(Y, r80)]))).unwrap();
            log.ingest(dev, Fingerprint::new(90.0, snap(&[(X, r90)]))).unwrap();
            log.ingest(dev, Fingerprint::new(100.0, snap(&[(X, r100)]))).unwrap();
        }
        log
    }

    fn e0() -> EnvironmentSnapshot {
        snap(&[(X, -50)])
    }

    #[test]
    fn worked_example() {
        let params = GroupQueryParams::new(2.0, 10.0, 20.0, 2).unwrap();
        let r = discover_group(&example_log(), &A, 100.0, &e0(), &params).unwrap();
        assert_eq!(r.members, BTreeSet::from([B]));
        assert_eq!(r.steps_processed, 3);
        assert_eq!(r.oldest_step_time, 80.0);
        assert!(in_group_of(&example_log(), &A, 100.0, &e0(), &params).unwrap());
        let params = params.with_n(3).unwrap();
        assert!(!in_group_of(&example_log(), &A, 100.0, &e0(), &params).unwrap());
    }

    #[test]
    fn tight_omega_empties_initial_set() {
        let params = GroupQueryParams::new(2.0, 2.0, 20.0, 2).unwrap();
        let r = discover_group(&example_log(), &A, 100.0, &e0(), &params).unwrap();
        assert!(r.members.is_empty());
        assert_eq!(r.steps_processed, 1);
    }

    #[test]
    fn lone_user_has_no_group() {
        let mut log = ProximityLog::new();
        log.ingest(A, Fingerprint::new(100.0, e0())).unwrap();
        let params = GroupQueryParams::new(2.0, 10.0, 20.0, 1).unwrap();
        let r = discover_group(&log, &A, 100.0, &e0(), &params).unwrap();
        assert!(r.members.is_empty());
        assert!(in_group_of(&log, &A, 100.0, &e0(), &params).unwrap());
    }

    #[test]
    fn n_of_one_is_always_true() {
        let params = GroupQueryParams::new(2.0, 1.0, 20.0, 1).unwrap();
        assert!(in_group_of(&example_log(), &A, 100.0, &e0(), &params).unwrap());
    }

    #[test]
    fn empty_environment_is_an_error() {
        let params = GroupQueryParams::new(2.0, 10.0, 20.0, 2).unwrap();
        let err = discover_group(&example_log(), &A, 100.0, &EnvironmentSnapshot::empty(), &params);
        assert_eq!(err, Err(GroupError::EmptyEnvironment));
    }

    #[test]
    fn unknown_user_with_explicit_snapshot() {
        let params = GroupQueryParams::new(2.0, 10.0, 20.0, 2).unwrap();
        let stranger = MacAddr::new([1, 2, 3, 4, 5, 6]);
        let r = discover_group(&example_log(), &stranger, 100.0, &e0(), &params).unwrap();
        assert_eq!(r.steps_processed, 1);
        assert_eq!(r.members, BTreeSet::from([A, B, C]));
        let strict = params.with_min_steps(2).unwrap();
        let r = discover_group(&example_log(), &stranger, 100.0, &e0(), &strict).unwrap();
        assert!(r.members.is_empty());
    }

    #[test]
    fn horizon_bounds_the_scan() {
        // t_max = 15: the sample at 80 lies before the horizon at 85.
        let params = GroupQueryParams::new(2.0, 10.0, 15.0, 2).unwrap();
        let r = discover_group(&example_log(), &A, 100.0, &e0(), &params).unwrap();
        assert_eq!(r.steps_processed, 2);
        assert_eq!(r.oldest_step_time, 90.0);
        assert_eq!(r.members, BTreeSet::from([B]));
    }

    #[test]
    fn param_validation() {
        assert!(GroupQueryParams::new(-1.0, 10.0, 20.0, 2).is_err());
        assert!(GroupQueryParams::new(1.0, 0.0, 20.0, 2).is_err());
        assert!(GroupQueryParams::new(1.0, 10.0, 0.0, 2).is_err());
        assert!(GroupQueryParams::new(1.0, 10.0, 20.0, 0).is_err());
        assert!(GroupQueryParams::new(1.0, 10.0, 20.0, 1).unwrap().with_min_steps(0).is_err());
    }

    struct Recorder(Vec<BTreeSet<DeviceId>>);
    impl ScanObserver for Recorder {
        fn step(&mut self, _t: Timestamp, c: &CandidateSet<'_>) {
            self.0.push(c.devices().collect());
        }
    }

    #[test]
    fn candidates_only_shrink() {
        let params = GroupQueryParams::new(2.0, 10.0, 20.0, 2).unwrap();
        let mut rec = Recorder(Vec::new());
        discover_group_observed(&example_log(), &A, 100.0, &e0(), &params, &mut rec).unwrap();
        assert_eq!(rec.0, vec![BTreeSet::from([B, C]), BTreeSet::from([B]), BTreeSet::from([B])]);
    }
}
