use manetsim_core::scenario::ScenarioConfig;
use manetsim_core::sim::run_scenario;

fn main() {
    for frac in [0.0, 0.1, 0.2, 0.3, 0.5, 0.7] {
        for ids in [false, true] {
            let mut pdrs = Vec::new();
            let mut ovs = Vec::new();
            let mut decls = 0u64;
            let mut flagged = 0u64;
            let t0 = std::time::Instant::now();
            for seed in 0..10u64 {
                let mut cfg = ScenarioConfig::template("paper-20").unwrap();
                cfg.seed = seed * 7919 + 13;
                cfg.adversary.fraction = frac;
                cfg.ids_enabled = ids;
                cfg.mobility.pause_time_s = 100.0;
                let r = run_scenario(cfg).unwrap();
                pdrs.push(r.pdr.unwrap());
                ovs.push(r.routing_overhead.unwrap());
                decls += r.malicious_declarations;
                flagged += r.honest_flagged;
            }
            let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
            println!(
                "frac={:.1} ids={:5} pdr={:.3} overhead={:.4} decls={} honest_flagged={} ({:.2?}/10 runs)",
                frac, ids, mean(&pdrs), mean(&ovs), decls, flagged, t0.elapsed()
            );
        }
    }
}
