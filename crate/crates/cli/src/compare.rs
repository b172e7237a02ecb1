//! Side-by-side evaluation of proximity group discovery against the planted
//! ground truth and the coordinate convoy baseline.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use proxconvoy_core::group::{discover_group, GroupQueryParams};
use proxconvoy_core::simulator::{object_id, SimOutput};
use proxconvoy_core::trajectory::{discover_convoys, Convoy, ConvoyParams};
use proxconvoy_core::DeviceId;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Score {
    pub precision: f64,
    pub recall: f64,
}

fn score(found: &BTreeSet<DeviceId>, truth: &BTreeSet<DeviceId>) -> Score {
    let hit = found.intersection(truth).count() as f64;
    Score {
        precision: if found.is_empty() { 0.0 } else { hit / found.len() as f64 },
        recall: if truth.is_empty() { 0.0 } else { hit / truth.len() as f64 },
    }
}

fn mean(scores: &[Score]) -> Score {
    let n = scores.len().max(1) as f64;
    Score {
        precision: scores.iter().map(|s| s.precision).sum::<f64>() / n,
        recall: scores.iter().map(|s| s.recall).sum::<f64>() / n,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupReport {
    pub id: String,
    pub members: BTreeSet<DeviceId>,
    pub proximity_vs_truth: Score,
    pub proximity_vs_baseline: Score,
    pub baseline_vs_truth: Score,
    /// Other planted groups whose devices the proximity pipeline pulled in.
    pub proximity_merged_with: Vec<String>,
    /// Other planted groups the baseline merged with this one.
    pub baseline_merged_with: Vec<String>,
}

impl GroupReport {
    /// Proximity merged this group with another one that the baseline kept apart.
    pub fn diverges(&self) -> bool {
        self.proximity_merged_with.iter().any(|g| !self.baseline_merged_with.contains(g))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub scenario: String,
    pub devices: usize,
    pub convoys: Vec<Convoy>,
    pub groups: Vec<GroupReport>,
    /// Fraction of (member query, loner) pairs where the loner was reported.
    pub loner_false_positive_rate: f64,
}

/// The device set the baseline assigns to `device`: members of its longest
/// convoy (larger member set on ties), or just the device itself.
fn baseline_group(convoys: &[Convoy], device: &DeviceId) -> BTreeSet<DeviceId> {
    let oid = object_id(device);
    convoys
        .iter()
        .filter(|c| c.members.contains(&oid))
        .max_by(|a, b| a.lifetime().cmp(&b.lifetime()).then(a.members.len().cmp(&b.members.len())).then(b.cmp(a)))
        .map(|c| c.members.iter().filter_map(|o| o.as_str().parse().ok()).collect())
        .unwrap_or_else(|| BTreeSet::from([*device]))
}

/// Query every planted member at its latest sample and score the result.
pub fn compare(
    sim: &SimOutput,
    scenario_name: &str,
    group_params: &GroupQueryParams,
    convoy_params: &ConvoyParams,
) -> CompareReport {
    let convoys = discover_convoys(&sim.trajectories, convoy_params);
    let planted = sim.planted_groups();
    let loners: BTreeSet<DeviceId> = sim.loners().into_iter().collect();
    let group_of = |d: &DeviceId| planted.iter().find(|(_, m)| m.contains(d)).map(|(g, _)| g.clone());

    let mut loner_hits = 0usize;
    let mut loner_chances = 0usize;
    let mut groups = Vec::new();
    for (id, truth) in &planted {
        let mut prox_truth = Vec::new();
        let mut prox_base = Vec::new();
        let mut base_truth = Vec::new();
        let mut prox_merged = BTreeSet::new();
        let mut base_merged = BTreeSet::new();
        for user in truth {
            let Some(latest) = sim.log.track(user).and_then(|t| t.latest()) else {
                continue;
            };
            let found = match discover_group(&sim.log, user, latest.t, &latest.env, group_params) {
                Ok(r) => r.members,
                Err(_) => BTreeSet::new(),
            };
            loner_hits += found.intersection(&loners).count();
            loner_chances += loners.len();
            let mut found = found;
            found.insert(*user);
            let base = baseline_group(&convoys, user);
            prox_truth.push(score(&found, truth));
            prox_base.push(score(&found, &base));
            base_truth.push(score(&base, truth));
            prox_merged.extend(found.iter().filter_map(group_of).filter(|g| g != id));
            base_merged.extend(base.iter().filter_map(group_of).filter(|g| g != id));
        }
        groups.push(GroupReport {
            id: id.clone(),
            members: truth.clone(),
            proximity_vs_truth: mean(&prox_truth),
            proximity_vs_baseline: mean(&prox_base),
            baseline_vs_truth: mean(&base_truth),
            proximity_merged_with: prox_merged.into_iter().collect(),
            baseline_merged_with: base_merged.into_iter().collect(),
        });
    }

    CompareReport {
        scenario: scenario_name.to_string(),
        devices: sim.log.device_count(),
        convoys,
        groups,
        loner_false_positive_rate: if loner_chances == 0 { 0.0 } else { loner_hits as f64 / loner_chances as f64 },
    }
}

impl CompareReport {
    /// Line-oriented `key: value` rendering. An empty scenario renders as
    /// an empty string.
    pub fn render(&self, group_params: &GroupQueryParams, convoy_params: &ConvoyParams) -> String {
        let mut out = String::new();
        if self.devices == 0 {
            return out;
        }
        let w = &mut out;
        let _ = writeln!(w, "scenario: {}", self.scenario);
        let _ = writeln!(w, "devices: {}", self.devices);
        let _ = writeln!(w, "groups: {}", self.groups.len());
        let _ = writeln!(w, "params.delta: {}", group_params.delta());
        let _ = writeln!(w, "params.omega: {}", group_params.omega());
        let _ = writeln!(w, "params.t_max: {}", group_params.t_max());
        let _ = writeln!(w, "params.min_steps: {}", group_params.min_steps());
        let _ = writeln!(w, "params.e: {}", convoy_params.e());
        let _ = writeln!(w, "params.m: {}", convoy_params.m());
        let _ = writeln!(w, "params.k: {}", convoy_params.k());
        let _ = writeln!(w, "baseline.convoys: {}", self.convoys.len());
        for c in &self.convoys {
            let names: Vec<_> = c.members.iter().map(|o| o.as_str()).collect();
            let _ = writeln!(w, "baseline.convoy: [{}] {}..{}", names.join(","), c.t_start, c.t_end);
        }
        for g in &self.groups {
            let p = &g.id;
            let _ = writeln!(w, "{p}.size: {}", g.members.len());
            for (name, s) in [
                ("proximity_vs_truth", g.proximity_vs_truth),
                ("proximity_vs_baseline", g.proximity_vs_baseline),
                ("baseline_vs_truth", g.baseline_vs_truth),
            ] {
                let _ = writeln!(w, "{p}.{name}.precision: {:.4}", s.precision);
                let _ = writeln!(w, "{p}.{name}.recall: {:.4}", s.recall);
            }
            let _ = writeln!(w, "{p}.proximity_merged_with: {}", g.proximity_merged_with.join(","));
            let _ = writeln!(w, "{p}.baseline_merged_with: {}", g.baseline_merged_with.join(","));
            let _ = writeln!(w, "{p}.divergence: {}", if g.diverges() { "merged" } else { "none" });
        }
        let _ = writeln!(w, "loners.false_positive_rate: {:.4}", self.loner_false_positive_rate);
        out
    }
}
