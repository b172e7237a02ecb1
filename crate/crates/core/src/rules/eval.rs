use crate::group::{in_group_of, GroupQueryParams, DEFAULT_MIN_STEPS};
use crate::proximity::{DeviceId, EnvironmentSnapshot, ProximityLog, Timestamp};

use super::{NetRef, Predicate, RuleSet, TimeOfDay};

pub const DEFAULT_DELTA: f64 = 2.5;
pub const DEFAULT_OMEGA: f64 = 10.0;
pub const DEFAULT_SESSION_GAP: f64 = 1800.0;

/// Operator-side settings. Group thresholds live here rather than in rule
/// text so rule authors only state group size and duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    /// Time threshold for `IN_GROUP_OF`, seconds.
    pub delta: f64,
    /// RSSI threshold for `IN_GROUP_OF`, dB.
    pub omega: f64,
    pub min_steps: usize,
    /// A pause longer than this (seconds) separates two visits.
    pub session_gap: f64,
    /// Added to timestamps before deriving the local time of day.
    pub utc_offset: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            delta: DEFAULT_DELTA,
            omega: DEFAULT_OMEGA,
            min_steps: DEFAULT_MIN_STEPS,
            session_gap: DEFAULT_SESSION_GAP,
            utc_offset: 0.0,
        }
    }
}

/// What a rule sees: the device, its live snapshot and its history.
#[derive(Debug, Clone, Copy)]
pub struct EvalContext<'a> {
    pub device: DeviceId,
    pub now: Timestamp,
    pub current: &'a EnvironmentSnapshot,
    pub log: &'a ProximityLog,
    pub config: &'a EngineConfig,
}

impl EvalContext<'_> {
    pub fn time_of_day(&self) -> TimeOfDay {
        TimeOfDay::from_timestamp(self.now, self.config.utc_offset)
    }

    /// Strongest RSSI among current observations whose SSID is `net`; when
    /// none match and `net` is shaped like a BSSID, that access point's RSSI.
    fn rssi_of(&self, net: &NetRef) -> Option<i32> {
        let by_ssid = self.current.iter().filter(|o| o.ssid == net.text()).map(|o| o.rssi).max();
        by_ssid.or_else(|| self.current.rssi(&net.bssid()?))
    }

    /// Whether any access point in the current snapshot was also seen by
    /// this device during an earlier visit.
    ///
    /// Walking back from `now` through the device's samples, the current
    /// visit ends at the first pause longer than `session_gap`; everything
    /// before that pause belongs to previous visits.
    fn returning_visitor(&self) -> bool {
        let Some(track) = self.log.track(&self.device) else {
            return false;
        };
        let history = track.window(f64::NEG_INFINITY, self.now);
        let history = match history.last() {
            Some(last) if last.t == self.now => &history[..history.len() - 1],
            _ => history,
        };
        let mut boundary = self.now;
        let mut split = history.len();
        while split > 0 && boundary - history[split - 1].t <= self.config.session_gap {
            boundary = history[split - 1].t;
            split -= 1;
        }
        history[..split].iter().any(|fp| self.current.iter().any(|o| fp.env.get(&o.bssid).is_some()))
    }
}

pub fn eval_predicate(p: &Predicate, ctx: &EvalContext<'_>) -> bool {
    match p {
        Predicate::IsVisible(r) => ctx.rssi_of(r).is_some(),
        Predicate::NotVisible(r) => ctx.rssi_of(r).is_none(),
        Predicate::CloseThan(a, b) => match (ctx.rssi_of(a), ctx.rssi_of(b)) {
            (Some(ra), Some(rb)) => ra > rb,
            (Some(_), None) => true,
            (None, _) => false,
        },
        Predicate::FirstVisit => !ctx.returning_visitor(),
        Predicate::FollowUpVisit => ctx.returning_visitor(),
        Predicate::TimeWithin(start, end) => {
            let now = ctx.time_of_day();
            if start <= end {
                *start <= now && now < *end
            } else {
                now >= *start || now < *end
            }
        }
        Predicate::TimeCompare(rel, v) => rel.holds(ctx.time_of_day(), *v),
        Predicate::InGroupOf { n, t } => {
            let params = GroupQueryParams::new(ctx.config.delta, ctx.config.omega, *t as f64, *n)
                .and_then(|p| p.with_min_steps(ctx.config.min_steps));
            match params {
                Ok(params) => in_group_of(ctx.log, &ctx.device, ctx.now, ctx.current, &params).unwrap_or(false),
                Err(_) => false,
            }
        }
        Predicate::And(a, b) => eval_predicate(a, ctx) && eval_predicate(b, ctx),
        Predicate::Or(a, b) => eval_predicate(a, ctx) || eval_predicate(b, ctx),
        Predicate::Not(a) => !eval_predicate(a, ctx),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Firing<'r> {
    pub rule_id: &'r str,
    pub content: &'r str,
}

/// Rules whose condition holds, in declaration order.
pub fn eval_rules<'r>(rules: &'r RuleSet, ctx: &EvalContext<'_>) -> Vec<Firing<'r>> {
    rules
        .rules()
        .iter()
        .filter(|r| eval_predicate(&r.condition, ctx))
        .map(|r| Firing { rule_id: &r.id, content: &r.content })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proximity::{ApObservation, Fingerprint, MacAddr};
    use crate::rules::{parse_rules, Relation};

    const X: MacAddr = MacAddr::new([0x10, 0, 0, 0, 0, 1]);
    const Y: MacAddr = MacAddr::new([0x10, 0, 0, 0, 0, 2]);
    const CAFE: MacAddr = MacAddr::new([0x10, 0, 0, 0, 0, 3]);
    const ME: MacAddr = MacAddr::new([0xaa, 0, 0, 0, 0, 1]);

    fn snap(aps: &[(&str, MacAddr, i32)]) -> EnvironmentSnapshot {
        EnvironmentSnapshot::new(aps.iter().map(|&(s, b, r)| ApObservation::new(s, b, r)).collect()).unwrap()
    }

    fn eval(p: &Predicate, current: &EnvironmentSnapshot, log: &ProximityLog, now: f64) -> bool {
        let config = EngineConfig::default();
        let ctx = EvalContext { device: ME, now, current, log, config: &config };
        eval_predicate(p, &ctx)
    }

    fn net(s: &str) -> NetRef {
        NetRef::new(s)
    }

    #[test]
    fn visibility_by_ssid_and_bssid() {
        let cur = snap(&[("mycafe", CAFE, -60)]);
        let log = ProximityLog::new();
        assert!(eval(&Predicate::IsVisible(net("mycafe")), &cur, &log, 0.0));
        assert!(eval(&Predicate::IsVisible(net(&CAFE.to_string())), &cur, &log, 0.0));
        assert!(eval(&Predicate::IsVisible(net("10-00-00-00-00-03")), &cur, &log, 0.0));
        assert!(!eval(&Predicate::IsVisible(net("MyCafe")), &cur, &log, 0.0));
        assert!(eval(&Predicate::NotVisible(net("other")), &cur, &log, 0.0));
    }

    #[test]
    fn ssid_match_takes_precedence_over_bssid() {
        let odd = MacAddr::new([0x10, 0, 0, 0, 0, 9]);
        let text = odd.to_string();
        let cur = snap(&[(text.as_str(), CAFE, -80), ("lobby", odd, -40)]);
        let log = ProximityLog::new();
        let strong = Predicate::CloseThan(net(&text), net("lobby"));
        assert!(!eval(&strong, &cur, &log, 0.0));
        let cur = snap(&[("lobby", odd, -40), ("x", CAFE, -80)]);
        assert!(eval(&Predicate::CloseThan(net(&text), net("x")), &cur, &log, 0.0));
    }

    #[test]
    fn close_than_decision_table() {
        let log = ProximityLog::new();
        let ct = Predicate::CloseThan(net("x"), net("y"));
        assert!(eval(&ct, &snap(&[("x", X, -50), ("y", Y, -70)]), &log, 0.0));
        assert!(!eval(&ct, &snap(&[("x", X, -70), ("y", Y, -50)]), &log, 0.0));
        assert!(!eval(&ct, &snap(&[("x", X, -50), ("y", Y, -50)]), &log, 0.0));
        assert!(eval(&ct, &snap(&[("x", X, -90)]), &log, 0.0));
        assert!(!eval(&ct, &snap(&[("y", Y, -90)]), &log, 0.0));
    }

    #[test]
    fn visits() {
        let cur = snap(&[("mycafe", CAFE, -60)]);
        let now = 3.0 * 86_400.0;
        let empty = ProximityLog::new();
        assert!(eval(&Predicate::FirstVisit, &cur, &empty, now));
        assert!(!eval(&Predicate::FollowUpVisit, &cur, &empty, now));

        let mut log = ProximityLog::new();
        log.ingest(ME, Fingerprint::new(now - 2.0 * 86_400.0, cur.clone())).unwrap();
        assert!(eval(&Predicate::FollowUpVisit, &cur, &log, now));

        // Continuous presence is one visit: samples every 10 minutes for two hours.
        let mut log = ProximityLog::new();
        let mut t = now - 7200.0;
        while t <= now {
            log.ingest(ME, Fingerprint::new(t, cur.clone())).unwrap();
            t += 600.0;
        }
        assert!(eval(&Predicate::FirstVisit, &cur, &log, now));

        // A previous visit that saw different networks does not count.
        let mut log = ProximityLog::new();
        log.ingest(ME, Fingerprint::new(now - 86_400.0, snap(&[("x", X, -50)]))).unwrap();
        assert!(eval(&Predicate::FirstVisit, &cur, &log, now));

        // An earlier visit separated by a gap further back in the history.
        let mut log = ProximityLog::new();
        log.ingest(ME, Fingerprint::new(now - 10_000.0, cur.clone())).unwrap();
        log.ingest(ME, Fingerprint::new(now - 1_000.0, snap(&[("x", X, -50)]))).unwrap();
        assert!(eval(&Predicate::FollowUpVisit, &cur, &log, now));
    }

    #[test]
    fn time_predicates() {
        let cur = snap(&[("x", X, -50)]);
        let log = ProximityLog::new();
        let at = |h: f64, m: f64| h * 3600.0 + m * 60.0;
        let t = |h, m| TimeOfDay::new(h, m).unwrap();
        let within = Predicate::TimeWithin(t(9, 0), t(17, 0));
        assert!(eval(&within, &cur, &log, at(9.0, 0.0)));
        assert!(!eval(&within, &cur, &log, at(17.0, 0.0)));
        let night = Predicate::TimeWithin(t(22, 0), t(6, 0));
        assert!(eval(&night, &cur, &log, at(23.0, 30.0)));
        assert!(eval(&night, &cur, &log, at(2.0, 0.0)));
        assert!(!eval(&night, &cur, &log, at(12.0, 0.0)));
        assert!(eval(&Predicate::TimeCompare(Relation::Eq, t(12, 0)), &cur, &log, at(12.0, 0.5)));
        assert!(eval(&Predicate::TimeCompare(Relation::Ge, t(12, 0)), &cur, &log, at(12.0, 0.0)));
        assert!(!eval(&Predicate::TimeCompare(Relation::Gt, t(12, 0)), &cur, &log, at(12.0, 0.0)));
        assert!(eval(&Predicate::TimeCompare(Relation::Lt, t(12, 0)), &cur, &log, at(11.0, 59.0)));
    }

    #[test]
    fn in_group_of_uses_engine_thresholds() {
        let friend = MacAddr::new([0xbb, 0, 0, 0, 0, 1]);
        let mut log = ProximityLog::new();
        for (i, r) in [-50, -52, -51].into_iter().enumerate() {
            let t = 100.0 + 10.0 * i as f64;
            log.ingest(ME, Fingerprint::new(t, snap(&[("x", X, r)]))).unwrap();
            log.ingest(friend, Fingerprint::new(t - 1.0, snap(&[("x", X, r - 3)]))).unwrap();
        }
        let cur = log.track(&ME).unwrap().latest().unwrap().env.clone();
        assert!(eval(&Predicate::InGroupOf { n: 2, t: 30 }, &cur, &log, 120.0));
        assert!(!eval(&Predicate::InGroupOf { n: 3, t: 30 }, &cur, &log, 120.0));
        // Empty snapshot: no group can be established.
        assert!(!eval(&Predicate::InGroupOf { n: 2, t: 30 }, &EnvironmentSnapshot::empty(), &log, 120.0));
    }

    #[test]
    fn eval_rules_keeps_declaration_order() {
        let rules = parse_rules(
            "RULE b: IF IS_VISIBLE('x') THEN \"second\"\nRULE a: IF NOT_VISIBLE('zzz') THEN \"first\"\nRULE c: IF IS_VISIBLE('zzz') THEN \"never\"",
        )
        .unwrap();
        let cur = snap(&[("x", X, -50)]);
        let log = ProximityLog::new();
        let config = EngineConfig::default();
        let ctx = EvalContext { device: ME, now: 0.0, current: &cur, log: &log, config: &config };
        let fired = eval_rules(&rules, &ctx);
        let ids: Vec<_> = fired.iter().map(|f| f.rule_id).collect();
        assert_eq!(ids, ["b", "a"]);
        assert!(eval_rules(&RuleSet::default(), &ctx).is_empty());
    }
}
