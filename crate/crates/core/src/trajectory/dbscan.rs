use std::collections::{BTreeSet, VecDeque};

use super::{ObjectId, Point2D};

/// Points of `points` within Euclidean distance `e` of `p` (boundary included).
pub fn neighborhood(p: &Point2D, points: &[Point2D], e: f64) -> Vec<Point2D> {
    points.iter().filter(|q| p.distance(q) <= e).copied().collect()
}

/// Density-based clustering of labeled points.
///
/// A point is core when its `e`-neighborhood (itself included) holds at
/// least `m` points. Clusters are the density-connected components grown
/// from core points; noise is dropped. Points are visited in `ObjectId`
/// order, so a border point reachable from several clusters lands in the
/// one whose seed (smallest core id) is smallest, and the output does not
/// depend on input order. Clusters are returned in seed order.
pub fn density_clusters(points: &[(ObjectId, Point2D)], e: f64, m: usize) -> Vec<BTreeSet<ObjectId>> {
    let mut sorted: Vec<&(ObjectId, Point2D)> = points.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let n = sorted.len();

    let neighbors: Vec<Vec<usize>> =
        (0..n).map(|i| (0..n).filter(|&j| sorted[i].1.distance(&sorted[j].1) <= e).collect()).collect();
    let core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= m).collect();

    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut clusters: Vec<BTreeSet<ObjectId>> = Vec::new();
    for seed in 0..n {
        if !core[seed] || label[seed].is_some() {
            continue;
        }
        let id = clusters.len();
        let mut members = BTreeSet::new();
        let mut queue = VecDeque::from([seed]);
        label[seed] = Some(id);
        members.insert(sorted[seed].0.clone());
        while let Some(p) = queue.pop_front() {
            for &q in &neighbors[p] {
                if label[q].is_some() {
                    continue;
                }
                label[q] = Some(id);
                members.insert(sorted[q].0.clone());
                if core[q] {
                    queue.push_back(q);
                }
            }
        }
        clusters.push(members);
    }
    clusters
}
