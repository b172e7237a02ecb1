//! Built-in scenarios.

use super::{ApNode, Area, GroupSpec, LonerSpec, MobilityScenario, RadioModel};
use crate::proximity::MacAddr;
use crate::trajectory::Point2D;

pub const CORRIDOR_LONERS: usize = 7;

fn ap(index: u8, ssid: String, position: Point2D, tx: f64, floor: f64) -> ApNode {
    ApNode {
        bssid: MacAddr::new([0x02, 0x00, 0x5e, 0x00, 0x00, index]),
        ssid,
        position,
        tx_power_dbm: tx,
        detection_floor_dbm: floor,
    }
}

fn device(group: u8, index: u8) -> MacAddr {
    MacAddr::new([0x0a, 0x00, 0x00, 0x00, group, index])
}

/// A 200 m x 60 m hall covered by a 20 m grid of access points. Three
/// devices walk the center line together; seven loners wander at random.
pub fn corridor_scenario(seed: u64, noise_sigma_db: f64) -> MobilityScenario {
    let mut aps = Vec::new();
    for row in 0..4u8 {
        for col in 0..11u8 {
            let position = Point2D::new(f64::from(col) * 20.0, f64::from(row) * 20.0);
            aps.push(ap(row * 11 + col, format!("hall-{row}-{col}"), position, -40.0, -80.0));
        }
    }
    let loners = (0..CORRIDOR_LONERS as u8)
        .map(|i| LonerSpec { device: device(0xff, i), speed: 1.0 + 0.1 * f64::from(i), path: None })
        .collect();
    MobilityScenario {
        name: "corridor".into(),
        sample_interval: 10.0,
        duration: 180.0,
        dropout_rate: 0.0,
        radio: RadioModel { path_loss_exponent: 3.0, noise_sigma_db, seed },
        area: Some(Area { min: Point2D::new(0.0, 0.0), max: Point2D::new(200.0, 60.0) }),
        aps,
        groups: vec![GroupSpec {
            id: "g1".into(),
            members: (0..3).map(|i| device(1, i)).collect(),
            path: vec![Point2D::new(10.0, 30.0), Point2D::new(190.0, 30.0)],
            speed: 1.0,
            spread: 1.0,
        }],
        loners,
    }
}

/// Two pairs approach a single omni-directional access point from opposite
/// sides along mirrored paths. Their distances to the AP, and therefore
/// their signal strengths, coincide at every cycle while the pairs never
/// come closer than 12 m to each other.
pub fn fig4_scenario() -> MobilityScenario {
    let pair = |id: &str, g: u8, from: f64, to: f64| GroupSpec {
        id: id.into(),
        members: vec![device(g, 0), device(g, 1)],
        path: vec![Point2D::new(from, 0.0), Point2D::new(to, 0.0)],
        speed: 1.0,
        spread: 1.0,
    };
    MobilityScenario {
        name: "fig4".into(),
        sample_interval: 5.0,
        duration: 60.0,
        dropout_rate: 0.0,
        radio: RadioModel { path_loss_exponent: 2.0, noise_sigma_db: 0.0, seed: 4 },
        area: None,
        aps: vec![ap(0, "omni".into(), Point2D::new(0.0, 0.0), -40.0, -95.0)],
        groups: vec![pair("g1", 1, -60.0, -6.0), pair("g2", 2, 60.0, 6.0)],
        loners: vec![],
    }
}
