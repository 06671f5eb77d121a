//! Shared builders for hand-laid static and scripted topologies.

use manetsim_core::scenario::ScenarioConfig;
use manetsim_core::world::TraceWaypoint;
use manetsim_core::{NodeId, Scalar};

/// A config over explicitly placed nodes with explicit flows; mobility comes
/// from the returned scripts (static unless a script says otherwise).
pub fn static_setup(
    positions: &[(Scalar, Scalar)],
    pairs: &[(u16, u16)],
    adversary_nodes: &[u16],
) -> (ScenarioConfig, Vec<Vec<TraceWaypoint>>) {
    let mut cfg = ScenarioConfig::template("paper-20").unwrap();
    cfg.name = "static-test".into();
    cfg.node_count = positions.len();
    cfg.traffic.flows = pairs.len();
    cfg.traffic.pairs = Some(pairs.to_vec());
    cfg.adversary.nodes = adversary_nodes.to_vec();
    cfg.adversary.fraction = 0.0;
    let scripts = positions
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            vec![TraceWaypoint {
                node: NodeId(i as u16),
                time: 0.0,
                x,
                y,
                speed_mps: 0.0,
            }]
        })
        .collect();
    (cfg, scripts)
}

/// Appends a movement record: node departs toward (x, y) at `time` with the
/// given speed.
pub fn add_leg(
    scripts: &mut [Vec<TraceWaypoint>],
    node: u16,
    time: Scalar,
    x: Scalar,
    y: Scalar,
    speed: Scalar,
) {
    scripts[node as usize].push(TraceWaypoint {
        node: NodeId(node),
        time,
        x,
        y,
        speed_mps: speed,
    });
}
