//! Timestamped Wi-Fi fingerprints and the per-device log that stores them.

mod log;
mod mac;

pub mod jsonl;

use thiserror::Error;

pub use log::{ApObservation, EnvironmentSnapshot, Fingerprint, ProximityLog, ProximityTrack};
pub use mac::{DeviceId, MacAddr, MacParseError};

/// Seconds, epoch-relative.
pub type Timestamp = f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LogError {
    #[error("bssid {0} appears more than once in one snapshot")]
    DuplicateBssid(MacAddr),
    #[error("timestamp {t} for device {device} is not after its previous sample at {last}")]
    NonMonotoneTimestamp { device: DeviceId, t: Timestamp, last: Timestamp },
    #[error("non-finite timestamp for device {device}")]
    NonFiniteTimestamp { device: DeviceId },
    #[error("unknown device {0}")]
    UnknownDevice(DeviceId),
}
