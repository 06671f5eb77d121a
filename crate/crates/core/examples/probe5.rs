use manetsim_core::scenario::ScenarioConfig;
use manetsim_core::sim::run_scenario;

fn main() {
    let frac: f64 = std::env::args().nth(1).unwrap().parse().unwrap();
    println!("seed      pdr_plain  pdr_ids   delta     ov_plain ov_ids  decls flagged");
    for i in 0..10u64 {
        let seed = i * 7919 + 13;
        let mut r = [None, None];
        for (k, ids) in [false, true].into_iter().enumerate() {
            let mut cfg = ScenarioConfig::template("paper-20").unwrap();
            cfg.seed = seed;
            cfg.adversary.fraction = frac;
            cfg.ids_enabled = ids;
            cfg.mobility.pause_time_s = 100.0;
            r[k] = Some(run_scenario(cfg).unwrap());
        }
        let (p, q) = (r[0].take().unwrap(), r[1].take().unwrap());
        println!(
            "{:8}  {:.4}     {:.4}   {:+.4}   {:.3}    {:.3}   {:4} {:3}",
            seed,
            p.pdr.unwrap(),
            q.pdr.unwrap(),
            q.pdr.unwrap() - p.pdr.unwrap(),
            p.routing_overhead.unwrap(),
            q.routing_overhead.unwrap(),
            q.malicious_declarations,
            q.honest_flagged,
        );
    }
}
