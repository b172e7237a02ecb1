//! Log-distance path loss with additive Gaussian noise.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::proximity::MacAddr;
use crate::trajectory::Point2D;

/// Reference distance for `tx_power_dbm`, in meters.
pub const REFERENCE_DISTANCE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApNode {
    pub bssid: MacAddr,
    pub ssid: String,
    pub position: Point2D,
    /// RSSI at the reference distance.
    pub tx_power_dbm: f64,
    /// Weakest signal a scan still reports.
    pub detection_floor_dbm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioModel {
    pub path_loss_exponent: f64,
    pub noise_sigma_db: f64,
    pub seed: u64,
}

impl RadioModel {
    pub fn noiseless(path_loss_exponent: f64) -> Self {
        RadioModel { path_loss_exponent, noise_sigma_db: 0.0, seed: 0 }
    }

    /// Noise-free received power at `pos`; distances below the reference
    /// distance are clamped to it.
    pub fn mean_rssi(&self, ap: &ApNode, pos: &Point2D) -> f64 {
        let d = ap.position.distance(pos).max(REFERENCE_DISTANCE);
        ap.tx_power_dbm - 10.0 * self.path_loss_exponent * (d / REFERENCE_DISTANCE).log10()
    }

    /// Modeled RSSI for one scan, rounded to whole dBm, or `None` when the
    /// modeled value falls below the AP's detection floor. Draws exactly one
    /// normal variate from `rng` regardless of the outcome.
    pub fn sample_rssi<R: Rng + ?Sized>(&self, ap: &ApNode, pos: &Point2D, rng: &mut R) -> Option<i32> {
        let z: f64 = rng.sample(StandardNormal);
        let value = self.mean_rssi(ap, pos) + self.noise_sigma_db * z;
        (value >= ap.detection_floor_dbm).then(|| value.round() as i32)
    }
}

/// Noise-free scan result for one AP at `pos`.
pub fn rssi_at(ap: &ApNode, pos: &Point2D, model: &RadioModel) -> Option<i32> {
    let value = model.mean_rssi(ap, pos);
    (value >= ap.detection_floor_dbm).then(|| value.round() as i32)
}
