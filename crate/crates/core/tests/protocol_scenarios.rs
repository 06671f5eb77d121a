//! End-to-end protocol behavior on hand-laid topologies: delivery, link
//! breaks, detection, warnings, route errors, knock tests and redemption.

mod common;

use common::{add_leg, static_setup};
use manetsim_core::engine::SimTime;
use manetsim_core::ids::ReputationClass;
use manetsim_core::sim::Simulation;
use manetsim_core::trace::{SharedBuf, Traces};
use manetsim_core::NodeId;

fn n(i: u16) -> NodeId {
    NodeId(i)
}

#[test]
fn lossless_pair_delivers_everything_with_two_control_packets() {
    let (cfg, scripts) = static_setup(&[(0.0, 0.0), (100.0, 0.0)], &[(0, 1)], &[]);
    let result = Simulation::new_scripted(cfg, Some(scripts), Traces::none())
        .unwrap()
        .run();
    assert_eq!(result.data_sent, 3600);
    assert_eq!(result.data_received, 3600);
    assert_eq!(result.pdr, Some(1.0));
    // One discovery: a single request broadcast and a single reply.
    assert_eq!(result.control_tx, 2);
    assert_eq!(result.routing_overhead, Some(2.0 / 3600.0));
    assert_eq!(result.ids_overhead, Some(0.0));
    // 3600 * 512 bits / 900 s / 2 nodes.
    assert_eq!(result.throughput_bps, 1024.0);
    assert!(result.avg_latency_s.unwrap() < 0.01);
    assert_eq!(result.malicious_declarations, 0);
    assert_eq!(result.in_flight, 0);
}

#[test]
fn boundary_range_is_inclusive() {
    let (cfg, scripts) = static_setup(&[(0.0, 0.0), (250.0, 0.0)], &[(0, 1)], &[]);
    let result = Simulation::new_scripted(cfg, Some(scripts), Traces::none())
        .unwrap()
        .run();
    assert_eq!(result.pdr, Some(1.0));

    let (cfg, scripts) = static_setup(&[(0.0, 0.0), (250.1, 0.0)], &[(0, 1)], &[]);
    let result = Simulation::new_scripted(cfg, Some(scripts), Traces::none())
        .unwrap()
        .run();
    assert_eq!(result.data_received, 0);
    // Everything generated is eventually a congestion (buffer overflow) or
    // no-route (buffer expiry) drop, minus what is still parked at horizon.
    assert_eq!(
        result.drop_congestion + result.drop_no_route + result.in_flight,
        result.data_sent
    );
}

#[test]
fn departing_next_hop_reports_undelivered_while_neighbors_overhear() {
    let (cfg, mut scripts) = static_setup(
        &[(0.0, 0.0), (50.0, 0.0), (200.0, 0.0)],
        &[(0, 2)],
        &[],
    );
    // Node 2 sits in range until t=30, then walks far away.
    add_leg(&mut scripts, 2, 30.0, 1000.0, 0.0, 10.0);
    let mut cfg = cfg;
    cfg.horizon_s = 120.0;
    let packets = SharedBuf::new();
    let traces = Traces {
        packets: Some(Box::new(packets.clone())),
        reputation: None,
    };
    let result = Simulation::new_scripted(cfg, Some(scripts), traces)
        .unwrap()
        .run();
    assert!(result.data_received > 100, "early traffic flows");
    assert!(result.drop_no_route > 0, "departed next hop loses packets");
    let text = packets.into_string();
    // The bystander (node 1) overhears data it is not addressed.
    assert!(text.lines().any(|l| l.contains(" 1 overhear DATA")));
    // The sender registers undelivered transmissions as route failures.
    assert!(text.lines().any(|l| l.contains(" 0 drop[no_route] DATA")));
}

/// Paired-seed comparison on a diamond where the alternative relay only
/// walks into range after the attacker is declared: the overlay recovers the
/// flow and pays for it with extra discovery traffic.
#[test]
fn ids_recovers_flow_plain_dsr_starves() {
    let positions = [(0.0, 0.0), (200.0, 0.0), (0.0, 600.0), (200.0, 200.0)];
    let run = |ids: bool| {
        let (mut cfg, mut scripts) = static_setup(&positions, &[(0, 3)], &[1]);
        cfg.adversary.profile.drop_probability = 1.0;
        cfg.ids_enabled = ids;
        // Node 2 arrives near (0, 200) around t=50 and becomes the clean relay.
        add_leg(&mut scripts, 2, 10.0, 0.0, 200.0, 10.0);
        Simulation::new_scripted(cfg, Some(scripts), Traces::none())
            .unwrap()
            .run()
    };
    let plain = run(false);
    let with_ids = run(true);

    assert_eq!(plain.pdr, Some(0.0), "plain DSR never notices the black hole");
    assert!(
        with_ids.pdr.unwrap() > 0.8,
        "overlay reroutes after detection: pdr {:?}",
        with_ids.pdr
    );
    assert_eq!(with_ids.malicious_declarations, 1);
    assert_eq!(with_ids.honest_flagged, 0);
    assert!(with_ids.warning_tx >= 1);
    assert!(
        with_ids.control_tx > plain.control_tx,
        "declaration costs rediscovery traffic: {} vs {}",
        with_ids.control_tx,
        plain.control_tx
    );
    assert!(with_ids.routing_overhead.unwrap() > plain.routing_overhead.unwrap());
}

/// The spec's cache-hygiene property, observed in vivo right after a
/// declaration (the alternative relay only arrives later, so the attacker
/// path is unavoidable and the monitor must declare).
#[test]
fn declared_node_vanishes_from_route_cache() {
    let positions = [(0.0, 0.0), (200.0, 0.0), (0.0, 600.0), (200.0, 200.0)];
    let (mut cfg, mut scripts) = static_setup(&positions, &[(0, 3)], &[1]);
    cfg.adversary.profile.drop_probability = 1.0;
    add_leg(&mut scripts, 2, 10.0, 0.0, 200.0, 10.0);
    let mut sim = Simulation::new_scripted(cfg, Some(scripts), Traces::none()).unwrap();
    sim.run_until(SimTime(15.0));
    assert_eq!(
        sim.reputation_class(n(0), n(1)),
        Some(ReputationClass::Malicious)
    );
    assert!(
        sim.cached_routes(n(0)).iter().all(|r| !r.contains(&n(1))),
        "no cached route of the declarer contains the declared node"
    );
    // The late clean path revives the flow.
    let result = sim.run();
    assert!(result.pdr.unwrap() > 0.8);
}

/// With a clean alternative cached from the start, the priority formula
/// already downranks the dropper's path after its first penalty: traffic
/// reroutes without any declaration ever being needed.
#[test]
fn priority_ranking_reroutes_before_declaration() {
    let positions = [(0.0, 0.0), (200.0, 0.0), (0.0, 200.0), (200.0, 200.0)];
    let (mut cfg, scripts) = static_setup(&positions, &[(0, 3)], &[1]);
    cfg.adversary.profile.drop_probability = 1.0;
    let result = Simulation::new_scripted(cfg, Some(scripts), Traces::none())
        .unwrap()
        .run();
    assert!(result.pdr.unwrap() > 0.95, "pdr {:?}", result.pdr);
    assert_eq!(result.malicious_declarations, 0);
    assert!(result.drop_adversarial < 10);
}

/// Warnings act one hop from the accuser and only about current neighbors:
/// the common neighbor applies the weight, a two-hop node never hears it.
#[test]
fn warning_radius_is_one_hop() {
    let positions = [
        (0.0, 0.0),     // 0: attacker A
        (200.0, 0.0),   // 1: monitor B (flows through A)
        (150.0, 200.0), // 2: C, neighbor of both A and B
        (350.0, 300.0), // 3: F, neighbor of C only
        (-250.0, 0.0),  // 4: Z, flow sink behind A
    ];
    let (mut cfg, scripts) = static_setup(&positions, &[(1, 4)], &[0]);
    cfg.adversary.profile.drop_probability = 1.0;
    let mut sim = Simulation::new_scripted(cfg, Some(scripts), Traces::none()).unwrap();
    // Ten breached windows declare A at t=10; the warning lands immediately,
    // before the first rediscovery flood can add avoid-list citations.
    sim.run_until(SimTime(10.1));
    assert_eq!(
        sim.reputation_class(n(1), n(0)),
        Some(ReputationClass::Malicious)
    );
    assert_eq!(sim.reputation_value(n(2), n(0)), Some(-2.0));
    assert_eq!(sim.reputation_value(n(3), n(0)), Some(0.0));
    assert_eq!(sim.reputation_value(n(4), n(0)), Some(0.0));
}

/// Colluding liars can push a victim only to the suspicious threshold; knock
/// tests then vindicate it. First-hand-only malice, end to end.
#[test]
fn colluding_liar_cannot_get_honest_victim_declared() {
    let positions = [
        (0.0, 0.0),     // 0: liar
        (200.0, 0.0),   // 1: observer O
        (200.0, 200.0), // 2: clean relay U (carries O's flow)
        (400.0, 0.0),   // 3: victim V (idle route material)
        (400.0, 200.0), // 4: sink X
    ];
    let (mut cfg, scripts) = static_setup(&positions, &[(1, 4)], &[0]);
    cfg.adversary.profile.drop_probability = 0.0; // the liar forwards honestly
    cfg.adversary.profile.false_accusation_victims = vec![n(3)];
    let mut sim = Simulation::new_scripted(cfg, Some(scripts), Traces::none()).unwrap();
    sim.run_until(SimTime(92.0));
    // Eighteen false warnings, two points each, clamped at the threshold.
    assert_eq!(sim.reputation_value(n(1), n(3)), Some(-35.0));
    assert_eq!(
        sim.reputation_class(n(1), n(3)),
        Some(ReputationClass::Suspicious)
    );
    let result = sim.run();
    assert_eq!(result.malicious_declarations, 0);
    assert_eq!(result.honest_flagged, 0);
    assert!(result.probe_tx >= 1, "knock tests were exercised");
    assert_eq!(result.pdr, Some(1.0), "the flow never suffers");
}

/// A knock test the victim passes resets its reputation to neutral.
#[test]
fn passed_knock_test_restores_neutral_rating() {
    let positions = [
        (0.0, 0.0),
        (200.0, 0.0),
        (200.0, 200.0),
        (400.0, 0.0),
        (400.0, 200.0),
    ];
    let (mut cfg, scripts) = static_setup(&positions, &[(1, 4)], &[0]);
    cfg.adversary.profile.drop_probability = 0.0;
    cfg.adversary.profile.false_accusation_victims = vec![n(3)];
    let mut sim = Simulation::new_scripted(cfg, Some(scripts), Traces::none()).unwrap();
    // t=95: the nineteenth warning triggers the knock; V forwards the probe.
    sim.run_until(SimTime(96.0));
    assert_eq!(sim.reputation_value(n(1), n(3)), Some(0.0));
    assert_eq!(
        sim.reputation_class(n(1), n(3)),
        Some(ReputationClass::Normal)
    );
}

/// A temporary attacker is declared, starves the flow, fades back to the
/// suspicious midpoint, relapses once, and after turning honest earns its
/// way back to neutral while traffic resumes.
#[test]
fn fading_redemption_restores_a_reformed_node() {
    let positions = [(0.0, 0.0), (200.0, 0.0), (400.0, 0.0)];
    let (mut cfg, scripts) = static_setup(&positions, &[(0, 2)], &[1]);
    cfg.adversary.profile.drop_probability = 1.0;
    cfg.adversary.profile.active_until_s = 60.0;
    let mut sim = Simulation::new_scripted(cfg, Some(scripts), Traces::none()).unwrap();

    sim.run_until(SimTime(15.0));
    assert_eq!(
        sim.reputation_class(n(0), n(1)),
        Some(ReputationClass::Malicious)
    );
    sim.run_until(SimTime(31.5));
    assert_eq!(sim.reputation_value(n(0), n(1)), Some(-45.0));
    sim.run_until(SimTime(51.5));
    // Fading caps at the middle of the suspicious band; routing resumes.
    assert_eq!(sim.reputation_value(n(0), n(1)), Some(-42.5));
    assert_eq!(
        sim.reputation_class(n(0), n(1)),
        Some(ReputationClass::Suspicious)
    );

    let result = sim.run();
    // Relapse before t=60 re-declares; honesty afterwards redeems fully.
    assert_eq!(result.malicious_declarations, 2);
    assert!(result.pdr.unwrap() > 0.7, "pdr {:?}", result.pdr);
    assert!(result.drop_adversarial > 0);
    assert!(result.drop_no_route > 0);
    let mut check = Simulation::new_scripted(
        {
            let (mut cfg, _) = static_setup(&positions, &[(0, 2)], &[1]);
            cfg.adversary.profile.drop_probability = 1.0;
            cfg.adversary.profile.active_until_s = 60.0;
            cfg
        },
        Some({
            let (_, scripts) = static_setup(&positions, &[(0, 2)], &[1]);
            scripts
        }),
        Traces::none(),
    )
    .unwrap();
    check.run_until(SimTime(900.0));
    assert_eq!(check.reputation_value(n(0), n(1)), Some(0.0));
    assert_eq!(
        check.reputation_class(n(0), n(1)),
        Some(ReputationClass::Normal)
    );
}

/// A relay that declares its next hop emits a route error toward the source,
/// and the route-error rule clears its own activity log so honest refusals
/// are never penalized.
#[test]
fn declaration_route_errors_and_activity_log_clearing() {
    let positions = [(0.0, 0.0), (200.0, 0.0), (400.0, 0.0), (600.0, 0.0)];
    let (mut cfg, scripts) = static_setup(&positions, &[(0, 3)], &[2]);
    cfg.adversary.profile.drop_probability = 1.0;
    let result = Simulation::new_scripted(cfg.clone(), Some(scripts.clone()), Traces::none())
        .unwrap()
        .run();
    assert_eq!(result.pdr, Some(0.0), "single poisoned path");
    // The relay declares the attacker; fading periodically rehabilitates it
    // to suspicious, it re-breaches, and is re-declared.
    assert!(result.malicious_declarations >= 1);
    assert!(result.rerr_tx > 0, "route errors flow back to the source");
    assert_eq!(
        result.honest_flagged, 0,
        "the refusing relay is excused by the route-error rule"
    );

    let mut sim = Simulation::new_scripted(cfg, Some(scripts), Traces::none()).unwrap();
    sim.run_until(SimTime(900.0));
    // The source keeps a neutral view of the honest relay throughout.
    assert_eq!(sim.reputation_value(n(0), n(1)), Some(0.0));
    assert_eq!(
        sim.reputation_class(n(0), n(1)),
        Some(ReputationClass::Normal)
    );
}
