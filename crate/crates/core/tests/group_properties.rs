use std::collections::BTreeSet;

use proptest::prelude::*;
use proxconvoy_core::group::{discover_group, in_group_of, GroupQueryParams};
use proxconvoy_core::proximity::jsonl::{read_log, write_log};
use proxconvoy_core::{ApObservation, DeviceId, EnvironmentSnapshot, Fingerprint, MacAddr, ProximityLog};

const USER: MacAddr = MacAddr::new([0xee, 0, 0, 0, 0, 1]);

fn snapshot() -> impl Strategy<Value = EnvironmentSnapshot> {
    prop::collection::btree_map(0u8..4, -80i32..-40, 0..4).prop_map(|aps| {
        EnvironmentSnapshot::new(
            aps.into_iter()
                .map(|(i, rssi)| ApObservation::new(format!("ap {i}"), MacAddr::new([2, 0, 0, 0, 0, i]), rssi))
                .collect(),
        )
        .unwrap()
    })
}

/// Per device: strictly increasing timestamps on a half-second grid.
fn track() -> impl Strategy<Value = Vec<Fingerprint>> {
    prop::collection::vec((1u32..12, snapshot()), 1..8).prop_map(|steps| {
        let mut t = 0.0;
        steps
            .into_iter()
            .map(|(gap, env)| {
                t += f64::from(gap) * 0.5;
                Fingerprint::new(t, env)
            })
            .collect()
    })
}

fn tracks() -> impl Strategy<Value = Vec<(DeviceId, Vec<Fingerprint>)>> {
    prop::collection::vec(track(), 1..5).prop_map(|ts| {
        ts.into_iter()
            .enumerate()
            .map(|(i, t)| (if i == 0 { USER } else { MacAddr::new([0xdd, 0, 0, 0, 0, i as u8]) }, t))
            .collect()
    })
}

fn build(tracks: &[(DeviceId, Vec<Fingerprint>)], interleave: bool) -> ProximityLog {
    let mut log = ProximityLog::new();
    if interleave {
        let mut all: Vec<(DeviceId, Fingerprint)> =
            tracks.iter().flat_map(|(d, fps)| fps.iter().map(move |fp| (*d, fp.clone()))).collect();
        all.sort_by(|a, b| a.1.t.total_cmp(&b.1.t).then(b.0.cmp(&a.0)));
        for (d, fp) in all {
            log.ingest(d, fp).unwrap();
        }
    } else {
        for (d, fps) in tracks {
            for fp in fps {
                log.ingest(*d, fp.clone()).unwrap();
            }
        }
    }
    log
}

fn params() -> impl Strategy<Value = GroupQueryParams> {
    (1u32..8, 1u32..15, 1u32..40, 1usize..4)
        .prop_map(|(d, o, t, n)| GroupQueryParams::new(f64::from(d) * 0.5, f64::from(o), f64::from(t), n).unwrap())
}

proptest! {
    #[test]
    fn ingestion_order_does_not_matter(ts in tracks(), p in params()) {
        let a = build(&ts, false);
        let b = build(&ts, true);
        prop_assert_eq!(&a, &b);
        let cur = a.track(&USER).unwrap().latest().unwrap();
        if !cur.env.is_empty() {
            prop_assert_eq!(
                discover_group(&a, &USER, cur.t, &cur.env, &p).unwrap(),
                discover_group(&b, &USER, cur.t, &cur.env, &p).unwrap()
            );
        }
    }

    #[test]
    fn members_exclude_user_and_match_in_group_of(ts in tracks(), p in params()) {
        let log = build(&ts, false);
        let cur = log.track(&USER).unwrap().latest().unwrap();
        prop_assume!(!cur.env.is_empty());
        let res = discover_group(&log, &USER, cur.t, &cur.env, &p).unwrap();
        prop_assert!(!res.members.contains(&USER));
        prop_assert!(res.oldest_step_time <= cur.t);
        prop_assert!(res.oldest_step_time >= cur.t - p.t_max());
        prop_assert_eq!(in_group_of(&log, &USER, cur.t, &cur.env, &p).unwrap(), res.members.len() + 1 >= p.n());
        let known: BTreeSet<DeviceId> = log.devices().collect();
        prop_assert!(res.members.is_subset(&known));
    }

    #[test]
    fn jsonl_round_trip(ts in tracks()) {
        let log = build(&ts, false);
        let mut buf = Vec::new();
        write_log(&log, &mut buf).unwrap();
        let back = read_log(buf.as_slice()).unwrap();
        prop_assert_eq!(back, log);
    }
}
