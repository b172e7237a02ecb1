//! Discovery of co-traveling device groups from Wi-Fi proximity logs.
//!
//! Devices record timestamped snapshots of the access points they can hear.
//! Two devices travel together when their snapshot sequences can be matched
//! in time order with at least one shared access point of similar signal
//! strength at every step. The crate provides:
//!
//! - [`proximity`]: fingerprints, per-device tracks and the log store.
//! - [`comparability`]: the snapshot comparison metric and the exhaustive
//!   track-similarity check.
//! - [`group`]: the backward-scan group query behind `IN_GROUP_OF(n, t)`.
//! - [`trajectory`]: density-connected convoy discovery over coordinates.
//! - [`simulator`]: paired coordinate/proximity traces from planted groups.
//! - [`rules`]: parsing and evaluating proximity production rules.

pub mod comparability;
pub mod group;
pub mod jsonl;
pub mod proximity;
pub mod rules;
pub mod simulator;
pub mod trajectory;

pub use proximity::{
    ApObservation, DeviceId, EnvironmentSnapshot, Fingerprint, MacAddr, ProximityLog, ProximityTrack, Timestamp,
};
