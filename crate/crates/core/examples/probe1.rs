use manetsim_core::scenario::ScenarioConfig;
use manetsim_core::sim::run_scenario;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let frac: f64 = args[1].parse().unwrap();
    let ids: bool = args[2].parse().unwrap();
    let seed: u64 = args[3].parse().unwrap();
    let t0 = std::time::Instant::now();
    let mut cfg = ScenarioConfig::template("paper-20").unwrap();
    cfg.seed = seed;
    cfg.adversary.fraction = frac;
    cfg.ids_enabled = ids;
    cfg.mobility.pause_time_s = 100.0;
    let r = run_scenario(cfg).unwrap();
    println!(
        "pdr={:?} overhead={:?} ids_ov={:?} decls={} flagged={} rreq={} rrep={} rerr={} sent={} recv={} drops: adv={} cong={} nr={} avoid={} inflight={}  [{:?}]",
        r.pdr, r.routing_overhead, r.ids_overhead, r.malicious_declarations, r.honest_flagged,
        r.rreq_tx, r.rrep_tx, r.rerr_tx, r.data_sent, r.data_received,
        r.drop_adversarial, r.drop_congestion, r.drop_no_route, r.drop_avoid_list, r.in_flight,
        t0.elapsed()
    );
}
