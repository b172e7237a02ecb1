//! Coordinate trajectories and density-connected convoy discovery.
//!
//! Objects are sampled on a shared discrete time grid. At every grid step
//! the present objects are clustered by density connection; a convoy is a
//! set of at least `m` objects that stays inside one cluster for at least
//! `k` consecutive steps. A missing sample breaks membership at that step.

mod convoy;
mod dbscan;
pub mod jsonl;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comparability::ParamError;

pub use convoy::{discover_convoys, Convoy};
pub use dbscan::{density_clusters, neighborhood};

/// Grid timestamp.
pub type Tick = u32;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub String);

impl ObjectId {
    pub fn new(id: impl Into<String>) -> Self {
        ObjectId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ObjectId {
    fn from(s: &str) -> Self {
        ObjectId(s.to_string())
    }
}

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("object {object}: tick {t} is not after its previous tick {last}")]
    NonMonotoneTick { object: ObjectId, t: Tick, last: Tick },
    #[error("object {object}: non-finite position at tick {t}")]
    NonFinitePoint { object: ObjectId, t: Tick },
}

/// Positions of every object, keyed by object, each strictly increasing in tick.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryDb {
    objects: BTreeMap<ObjectId, Vec<(Tick, Point2D)>>,
}

impl TrajectoryDb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, object: ObjectId, t: Tick, p: Point2D) -> Result<(), TrajectoryError> {
        if !p.is_finite() {
            return Err(TrajectoryError::NonFinitePoint { object, t });
        }
        let samples = self.objects.entry(object.clone()).or_default();
        if let Some(&(last, _)) = samples.last() {
            if t <= last {
                return Err(TrajectoryError::NonMonotoneTick { object, t, last });
            }
        }
        samples.push((t, p));
        Ok(())
    }

    pub fn objects(&self) -> impl Iterator<Item = (&ObjectId, &[(Tick, Point2D)])> {
        self.objects.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn position(&self, object: &ObjectId, t: Tick) -> Option<Point2D> {
        let samples = self.objects.get(object)?;
        samples.binary_search_by_key(&t, |&(tick, _)| tick).ok().map(|i| samples[i].1)
    }

    /// One past the largest tick present (0 for an empty database).
    pub fn horizon(&self) -> Tick {
        self.objects.values().filter_map(|s| s.last().map(|&(t, _)| t + 1)).max().unwrap_or(0)
    }

    /// Objects present at tick `t`, ordered by id.
    pub fn snapshot(&self, t: Tick) -> Vec<(ObjectId, Point2D)> {
        self.objects.keys().filter_map(|id| self.position(id, t).map(|p| (id.clone(), p))).collect()
    }

    /// All samples in `(t, object)` order.
    pub fn time_ordered(&self) -> Vec<(Tick, &ObjectId, Point2D)> {
        let mut all: Vec<_> = self.objects.iter().flat_map(|(id, s)| s.iter().map(move |&(t, p)| (t, id, p))).collect();
        all.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(b.1)));
        all
    }
}

/// Distance threshold `e` (m), minimum cluster size `m`, minimum lifetime `k` (ticks).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvoyParams {
    e: f64,
    m: usize,
    k: usize,
}

impl ConvoyParams {
    pub fn new(e: f64, m: usize, k: usize) -> Result<Self, ParamError> {
        if !(e.is_finite() && e > 0.0) {
            return Err(ParamError::Distance(e));
        }
        if m == 0 {
            return Err(ParamError::Count { name: "m" });
        }
        if k == 0 {
            return Err(ParamError::Count { name: "k" });
        }
        Ok(ConvoyParams { e, m, k })
    }

    pub fn e(&self) -> f64 {
        self.e
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn k(&self) -> usize {
        self.k
    }
}

pub(crate) type Members = BTreeSet<ObjectId>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_rejects_out_of_order_ticks() {
        let mut db = TrajectoryDb::new();
        db.insert("a".into(), 2, Point2D::new(0.0, 0.0)).unwrap();
        assert!(db.insert("a".into(), 2, Point2D::new(0.0, 0.0)).is_err());
        assert!(db.insert("a".into(), 1, Point2D::new(0.0, 0.0)).is_err());
        assert!(db.insert("b".into(), 0, Point2D::new(f64::NAN, 0.0)).is_err());
        assert_eq!(db.horizon(), 3);
    }

    #[test]
    fn snapshot_skips_missing_objects() {
        let mut db = TrajectoryDb::new();
        db.insert("a".into(), 0, Point2D::new(0.0, 0.0)).unwrap();
        db.insert("a".into(), 2, Point2D::new(1.0, 0.0)).unwrap();
        db.insert("b".into(), 1, Point2D::new(5.0, 0.0)).unwrap();
        assert_eq!(db.snapshot(1), vec![(ObjectId::from("b"), Point2D::new(5.0, 0.0))]);
        assert_eq!(db.snapshot(2).len(), 1);
        assert!(db.snapshot(7).is_empty());
    }

    #[test]
    fn convoy_params_validation() {
        assert!(ConvoyParams::new(0.0, 2, 2).is_err());
        assert!(ConvoyParams::new(1.0, 0, 2).is_err());
        assert!(ConvoyParams::new(1.0, 2, 0).is_err());
        assert!(ConvoyParams::new(1.0, 1, 1).is_ok());
    }
}
