use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DeviceId, LogError, MacAddr, Timestamp};

/// One access point as seen in a scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApObservation {
    pub ssid: String,
    pub bssid: MacAddr,
    /// Signal strength in dBm.
    pub rssi: i32,
}

impl ApObservation {
    pub fn new(ssid: impl Into<String>, bssid: MacAddr, rssi: i32) -> Self {
        ApObservation { ssid: ssid.into(), bssid, rssi }
    }
}

/// The set of access points visible at one instant, at most one entry per bssid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct EnvironmentSnapshot {
    observations: Vec<ApObservation>,
}

impl EnvironmentSnapshot {
    pub fn new(observations: Vec<ApObservation>) -> Result<Self, LogError> {
        for (i, obs) in observations.iter().enumerate() {
            if observations[..i].iter().any(|o| o.bssid == obs.bssid) {
                return Err(LogError::DuplicateBssid(obs.bssid));
            }
        }
        Ok(EnvironmentSnapshot { observations })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn observations(&self) -> &[ApObservation] {
        &self.observations
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn get(&self, bssid: &MacAddr) -> Option<&ApObservation> {
        self.observations.iter().find(|o| &o.bssid == bssid)
    }

    pub fn rssi(&self, bssid: &MacAddr) -> Option<i32> {
        self.get(bssid).map(|o| o.rssi)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ApObservation> {
        self.observations.iter()
    }
}

impl<'de> Deserialize<'de> for EnvironmentSnapshot {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let observations = Vec::<ApObservation>::deserialize(deserializer)?;
        EnvironmentSnapshot::new(observations).map_err(serde::de::Error::custom)
    }
}

/// A timestamped environment snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub t: Timestamp,
    pub env: EnvironmentSnapshot,
}

impl Fingerprint {
    pub fn new(t: Timestamp, env: EnvironmentSnapshot) -> Self {
        Fingerprint { t, env }
    }
}

/// All fingerprints recorded by one device, strictly increasing in time.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityTrack {
    device: DeviceId,
    samples: Vec<Fingerprint>,
}

impl ProximityTrack {
    pub fn new(device: DeviceId) -> Self {
        ProximityTrack { device, samples: Vec::new() }
    }

    pub fn device(&self) -> DeviceId {
        self.device
    }

    pub fn samples(&self) -> &[Fingerprint] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn latest(&self) -> Option<&Fingerprint> {
        self.samples.last()
    }

    fn push(&mut self, fp: Fingerprint) -> Result<(), LogError> {
        if !fp.t.is_finite() {
            return Err(LogError::NonFiniteTimestamp { device: self.device });
        }
        if let Some(last) = self.samples.last() {
            if fp.t <= last.t {
                return Err(LogError::NonMonotoneTimestamp { device: self.device, t: fp.t, last: last.t });
            }
        }
        self.samples.push(fp);
        Ok(())
    }

    /// Latest sample with `t` strictly before `before`.
    pub fn previous(&self, before: Timestamp) -> Option<&Fingerprint> {
        let idx = self.samples.partition_point(|s| s.t < before);
        idx.checked_sub(1).map(|i| &self.samples[i])
    }

    /// Latest sample inside `[t_lo, t_hi]`.
    pub fn latest_in(&self, t_lo: Timestamp, t_hi: Timestamp) -> Option<&Fingerprint> {
        let idx = self.samples.partition_point(|s| s.t <= t_hi);
        idx.checked_sub(1).map(|i| &self.samples[i]).filter(|s| s.t >= t_lo)
    }

    /// Sample closest to `t` within `t ± delta`; ties go to the earlier sample.
    pub fn nearest_in_window(&self, t: Timestamp, delta: f64) -> Option<&Fingerprint> {
        let lo = self.samples.partition_point(|s| s.t < t - delta);
        let hi = self.samples.partition_point(|s| s.t <= t + delta);
        let mut best: Option<&Fingerprint> = None;
        for s in &self.samples[lo..hi] {
            match best {
                Some(b) if (s.t - t).abs() >= (b.t - t).abs() => {}
                _ => best = Some(s),
            }
        }
        best
    }

    /// Samples inside `[t_lo, t_hi]`.
    pub fn window(&self, t_lo: Timestamp, t_hi: Timestamp) -> &[Fingerprint] {
        let lo = self.samples.partition_point(|s| s.t < t_lo);
        let hi = self.samples.partition_point(|s| s.t <= t_hi);
        &self.samples[lo..hi.max(lo)]
    }
}

/// Multi-device store of fingerprints.
///
/// Writers need `&mut`; every query takes `&self`, so a shared reference (or
/// an `Arc`) is a consistent snapshot for any number of concurrent readers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProximityLog {
    tracks: BTreeMap<DeviceId, ProximityTrack>,
}

impl ProximityLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a fingerprint to the device's track.
    pub fn ingest(&mut self, device: DeviceId, fp: Fingerprint) -> Result<(), LogError> {
        match self.tracks.get_mut(&device) {
            Some(track) => track.push(fp),
            None => {
                let mut track = ProximityTrack::new(device);
                track.push(fp)?;
                self.tracks.insert(device, track);
                Ok(())
            }
        }
    }

    pub fn track(&self, device: &DeviceId) -> Option<&ProximityTrack> {
        self.tracks.get(device)
    }

    pub fn tracks(&self) -> impl Iterator<Item = &ProximityTrack> {
        self.tracks.values()
    }

    pub fn devices(&self) -> impl Iterator<Item = DeviceId> + '_ {
        self.tracks.keys().copied()
    }

    pub fn device_count(&self) -> usize {
        self.tracks.len()
    }

    pub fn sample_count(&self) -> usize {
        self.tracks.values().map(ProximityTrack::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    /// For each device other than `exclude`, its latest sample inside
    /// `[t_lo, t_hi]` (the one nearest `t_hi`). Devices without a sample in
    /// the window are omitted. Output is ordered by device.
    pub fn measurements_in_window(
        &self,
        t_lo: Timestamp,
        t_hi: Timestamp,
        exclude: &DeviceId,
    ) -> Vec<(DeviceId, &Fingerprint)> {
        self.tracks
            .iter()
            .filter(|(d, _)| *d != exclude)
            .filter_map(|(d, track)| track.latest_in(t_lo, t_hi).map(|fp| (*d, fp)))
            .collect()
    }

    pub fn previous_measurement(&self, device: &DeviceId, before: Timestamp) -> Result<Option<&Fingerprint>, LogError> {
        self.tracks.get(device).map(|t| t.previous(before)).ok_or(LogError::UnknownDevice(*device))
    }

    /// Remove one sample; returns it if it existed. Empty tracks are dropped.
    pub fn remove_sample(&mut self, device: &DeviceId, index: usize) -> Option<Fingerprint> {
        let track = self.tracks.get_mut(device)?;
        if index >= track.samples.len() {
            return None;
        }
        let fp = track.samples.remove(index);
        if track.samples.is_empty() {
            self.tracks.remove(device);
        }
        Some(fp)
    }

    /// All samples as `(device, fingerprint)` in `(t, device)` order.
    pub fn time_ordered(&self) -> Vec<(DeviceId, &Fingerprint)> {
        let mut all: Vec<_> =
            self.tracks.iter().flat_map(|(d, tr)| tr.samples.iter().map(move |fp| (*d, fp))).collect();
        all.sort_by(|a, b| a.1.t.total_cmp(&b.1.t).then(a.0.cmp(&b.0)));
        all
    }
}
