//! Shared fixtures for the integration suites.

use planarsep::engine::{Meter, Mode, SimConfig};
use planarsep::graph::{Partition, PlanarGraph};
use planarsep::tree::{self, RootedForest};

pub fn charged_meter(g: &PlanarGraph) -> Meter {
    let cfg = SimConfig {
        mode: Mode::Charged,
        ..SimConfig::default()
    };
    Meter::new(g, &cfg).expect("connected instance")
}

pub fn literal_meter(g: &PlanarGraph) -> Meter {
    let cfg = SimConfig {
        mode: Mode::Literal,
        ..SimConfig::default()
    };
    Meter::new(g, &cfg).expect("connected instance")
}

/// Single-part instance with tree and both DFS orders ready.
pub fn single_instance(g: &PlanarGraph) -> (Partition, RootedForest) {
    let partition = Partition::single(g);
    let mut meter = charged_meter(g);
    let mut forest = tree::build_part_trees(g, &partition, &mut meter).expect("tree builds");
    tree::dfs_orders(g, &partition, &mut forest, &mut meter).expect("orders compute");
    (partition, forest)
}

/// Quadrant partition of a k x k grid (k even).
pub fn quadrants(k: u32) -> Vec<u32> {
    (0..k * k)
        .map(|v| {
            let (r, c) = (v / k, v % k);
            ((r >= k / 2) as u32) * 2 + ((c >= k / 2) as u32)
        })
        .collect()
}

/// The weight-exactness corpus sizes used by the fast differential suites.
pub fn small_triangulation_specs() -> Vec<(u32, u64)> {
    (0..20u64).map(|seed| (20 + (seed as u32 * 7) % 80, seed)).collect()
}
