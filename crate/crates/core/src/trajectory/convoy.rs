use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{density_clusters, ConvoyParams, Members, Tick, TrajectoryDb};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Convoy {
    pub members: Members,
    pub t_start: Tick,
    pub t_end: Tick,
}

impl Convoy {
    pub fn lifetime(&self) -> usize {
        (self.t_end - self.t_start) as usize + 1
    }

    fn covers(&self, other: &Convoy) -> bool {
        self.t_start <= other.t_start && self.t_end >= other.t_end && other.members.is_subset(&self.members)
    }
}

/// Cluster every tick, then follow candidate member sets across consecutive
/// ticks by intersecting them with that tick's clusters.
///
/// A candidate `(S, start)` survives a tick unchanged when some cluster
/// contains all of `S`; otherwise it is closed at the previous tick and each
/// intersection with at least `m` objects continues with the same start.
/// Every cluster also opens a fresh candidate. Candidates dominated by a
/// superset that started no later are pruned. The result keeps only
/// maximal convoys: none is a member subset of another whose interval
/// contains its own.
pub fn discover_convoys(db: &TrajectoryDb, params: &ConvoyParams) -> Vec<Convoy> {
    let horizon = db.horizon();
    let m = params.m();
    let per_tick: Vec<Vec<Members>> = (0..horizon)
        .into_par_iter()
        .map(|t| density_clusters(&db.snapshot(t), params.e(), m).into_iter().filter(|c| c.len() >= m).collect())
        .collect();

    let mut found = Vec::new();
    let mut close = |members: Members, t_start: Tick, t_end: Tick| {
        if (t_end - t_start) as usize + 1 >= params.k() {
            found.push(Convoy { members, t_start, t_end });
        }
    };

    let mut alive: BTreeMap<Members, Tick> = BTreeMap::new();
    for (t, clusters) in (0..horizon).zip(&per_tick) {
        let mut next: BTreeMap<Members, Tick> = BTreeMap::new();
        for (set, &start) in &alive {
            let mut kept_whole = false;
            for c in clusters {
                let common: Members = set.intersection(c).cloned().collect();
                if common.len() == set.len() {
                    kept_whole = true;
                }
                if common.len() >= m {
                    insert_earliest(&mut next, common, start);
                }
            }
            if !kept_whole {
                close(set.clone(), start, t - 1);
            }
        }
        for c in clusters {
            insert_earliest(&mut next, c.clone(), t);
        }
        alive = prune_dominated(next);
    }
    for (set, start) in alive {
        close(set, start, horizon - 1);
    }

    let mut maximal: Vec<Convoy> =
        found.iter().filter(|c| !found.iter().any(|o| o != *c && o.covers(c))).cloned().collect();
    maximal.sort();
    maximal.dedup();
    maximal
}

fn insert_earliest(map: &mut BTreeMap<Members, Tick>, set: Members, start: Tick) {
    map.entry(set).and_modify(|s| *s = (*s).min(start)).or_insert(start);
}

fn prune_dominated(cands: BTreeMap<Members, Tick>) -> BTreeMap<Members, Tick> {
    cands
        .iter()
        .filter(|(set, start)| {
            !cands.iter().any(|(other, ostart)| other != *set && ostart <= start && set.is_subset(other))
        })
        .map(|(s, t)| (s.clone(), *t))
        .collect()
}
