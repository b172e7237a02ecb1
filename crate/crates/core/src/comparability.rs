//! Snapshot comparability and pairwise track similarity.
//!
//! Two snapshots are comparable when they share at least one access point
//! whose signal strengths differ by strictly less than `omega` dB. Two
//! tracks are similar when every fingerprint of the first can be assigned a
//! comparable fingerprint of the second within `± delta` seconds, with the
//! assigned timestamps non-decreasing along the first track.

use thiserror::Error;

use crate::proximity::{EnvironmentSnapshot, Fingerprint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("omega must be a finite value > 0 dB, got {0}")]
    Omega(f64),
    #[error("delta must be a finite value >= 0 s, got {0}")]
    Delta(f64),
    #[error("t_max must be a finite value > 0 s, got {0}")]
    TMax(f64),
    #[error("{name} must be at least 1")]
    Count { name: &'static str },
    #[error("e must be a finite distance > 0 m, got {0}")]
    Distance(f64),
}

pub(crate) fn check_omega(omega: f64) -> Result<f64, ParamError> {
    if omega.is_finite() && omega > 0.0 {
        Ok(omega)
    } else {
        Err(ParamError::Omega(omega))
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<f64, ParamError> {
    if delta.is_finite() && delta >= 0.0 {
        Ok(delta)
    } else {
        Err(ParamError::Delta(delta))
    }
}

/// RSSI threshold `omega` (dB) and time threshold `delta` (s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparabilityParams {
    omega: f64,
    delta: f64,
}

impl ComparabilityParams {
    pub fn new(omega: f64, delta: f64) -> Result<Self, ParamError> {
        Ok(ComparabilityParams { omega: check_omega(omega)?, delta: check_delta(delta)? })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// True iff some bssid is present in both snapshots with `|rssi_a - rssi_b| < omega`.
pub fn comparable(a: &EnvironmentSnapshot, b: &EnvironmentSnapshot, omega: f64) -> bool {
    a.iter().any(|oa| b.rssi(&oa.bssid).is_some_and(|rb| f64::from((oa.rssi - rb).abs()) < omega))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimilarityError {
    #[error("the first track is empty")]
    EmptyTrack,
}

/// Exhaustive order-preserving matching of `first` into `second`.
///
/// Every fingerprint of `first` must be matched; `second` may have unmatched
/// fingerprints and one fingerprint of `second` may serve several of
/// `first`. The search enumerates assignments by backtracking, so the worst
/// case is exponential in the track length. It is meant as a reference
/// check at small scale, not as a production query.
pub fn tracks_similar(
    first: &[Fingerprint],
    second: &[Fingerprint],
    params: &ComparabilityParams,
) -> Result<bool, SimilarityError> {
    if first.is_empty() {
        return Err(SimilarityError::EmptyTrack);
    }
    Ok(assign(first, second, params, f64::NEG_INFINITY))
}

fn assign(rest: &[Fingerprint], second: &[Fingerprint], params: &ComparabilityParams, floor: f64) -> bool {
    let Some((head, tail)) = rest.split_first() else {
        return true;
    };
    second.iter().any(|cand| {
        cand.t >= floor
            && (cand.t - head.t).abs() <= params.delta
            && comparable(&head.env, &cand.env, params.omega)
            && assign(tail, second, params, cand.t)
    })
}
