use std::collections::BTreeSet;

use proptest::prelude::*;
use proxconvoy_core::trajectory::{
    density_clusters, discover_convoys, Convoy, ConvoyParams, ObjectId, Point2D, Tick, TrajectoryDb,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every (member set, interval) that stays inside one cluster per tick for
/// at least `k` ticks, filtered to the maximal ones.
fn brute_force(db: &TrajectoryDb, params: &ConvoyParams) -> Vec<Convoy> {
    let objects: Vec<ObjectId> = db.objects().map(|(id, _)| id.clone()).collect();
    let horizon = db.horizon();
    let clusters: Vec<Vec<BTreeSet<ObjectId>>> =
        (0..horizon).map(|t| density_clusters(&db.snapshot(t), params.e(), params.m())).collect();
    let together = |set: &BTreeSet<ObjectId>, t: Tick| clusters[t as usize].iter().any(|c| set.is_subset(c));

    let mut valid = Vec::new();
    for mask in 1u32..(1 << objects.len()) {
        let set: BTreeSet<ObjectId> =
            objects.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, o)| o.clone()).collect();
        if set.len() < params.m() {
            continue;
        }
        for a in 0..horizon {
            for b in a..horizon {
                if ((b - a) as usize) + 1 >= params.k() && (a..=b).all(|t| together(&set, t)) {
                    valid.push(Convoy { members: set.clone(), t_start: a, t_end: b });
                }
            }
        }
    }
    let covers = |o: &Convoy, c: &Convoy| {
        o != c && o.t_start <= c.t_start && o.t_end >= c.t_end && c.members.is_subset(&o.members)
    };
    let mut maximal: Vec<Convoy> = valid.iter().filter(|c| !valid.iter().any(|o| covers(o, c))).cloned().collect();
    maximal.sort();
    maximal
}

fn small_db() -> impl Strategy<Value = TrajectoryDb> {
    (2usize..=6, 1u32..=7).prop_flat_map(|(objects, ticks)| {
        // Coarse grid so that objects meet and part often.
        prop::collection::vec(prop::collection::vec((0u8..5, 0u8..3, any::<bool>()), ticks as usize), objects).prop_map(
            move |paths| {
                let mut db = TrajectoryDb::new();
                for (i, path) in paths.iter().enumerate() {
                    for (t, &(x, y, present)) in path.iter().enumerate() {
                        if present || t == 0 {
                            let p = Point2D::new(f64::from(x) * 3.0, f64::from(y) * 3.0);
                            db.insert(ObjectId::new(format!("o{i}")), t as Tick, p).unwrap();
                        }
                    }
                }
                db
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn convoys_match_brute_force(db in small_db(), m in 1usize..=3, k in 1usize..=4, e in prop::sample::select(vec![2.0, 3.0, 4.5])) {
        let params = ConvoyParams::new(e, m, k).unwrap();
        prop_assert_eq!(discover_convoys(&db, &params), brute_force(&db, &params));
    }
}

#[test]
fn planted_convoy_among_scattered_objects() {
    let mut db = TrajectoryDb::new();
    for t in 0..10u32 {
        let x = f64::from(t) * 10.0;
        for (i, dy) in [0.0, 1.0, 2.0].iter().enumerate() {
            db.insert(ObjectId::new(format!("g{i}")), t, Point2D::new(x, *dy)).unwrap();
        }
        for i in 0..4u32 {
            // Far apart from everything and from each other.
            let p = Point2D::new(f64::from(i) * 100.0 + f64::from(t), 500.0 + f64::from(i) * 100.0);
            db.insert(ObjectId::new(format!("s{i}")), t, p).unwrap();
        }
    }
    let convoys = discover_convoys(&db, &ConvoyParams::new(1.5, 2, 3).unwrap());
    assert_eq!(convoys.len(), 1);
    let members: Vec<&str> = convoys[0].members.iter().map(ObjectId::as_str).collect();
    assert_eq!(members, ["g0", "g1", "g2"]);
    assert_eq!((convoys[0].t_start, convoys[0].t_end), (0, 9));
}

#[test]
fn planted_convoy_among_random_walkers() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut db = TrajectoryDb::new();
    let mut walkers: Vec<Point2D> =
        (0..10).map(|_| Point2D::new(rng.random_range(0.0..400.0), rng.random_range(0.0..400.0))).collect();
    for t in 0..8u32 {
        for (i, dy) in [0.0, 1.5, 3.0].iter().enumerate() {
            db.insert(ObjectId::new(format!("g{i}")), t, Point2D::new(50.0 + 4.0 * f64::from(t), 200.0 + dy)).unwrap();
        }
        for (i, w) in walkers.iter_mut().enumerate() {
            w.x += rng.random_range(-5.0..5.0);
            w.y += rng.random_range(-5.0..5.0);
            db.insert(ObjectId::new(format!("w{i}")), t, *w).unwrap();
        }
    }
    let params = ConvoyParams::new(2.0, 2, 4).unwrap();
    let convoys = discover_convoys(&db, &params);
    assert_eq!(convoys, brute_force(&db, &params));
    assert_eq!(convoys.len(), 1);
    let members: Vec<&str> = convoys[0].members.iter().map(ObjectId::as_str).collect();
    assert_eq!(members, ["g0", "g1", "g2"]);
    assert_eq!((convoys[0].t_start, convoys[0].t_end), (0, 7));
}
