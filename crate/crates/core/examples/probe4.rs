use manetsim_core::scenario::ScenarioConfig;
use manetsim_core::sim::Simulation;
use manetsim_core::trace::{SharedBuf, Traces};
use std::collections::BTreeMap;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let frac: f64 = args[1].parse().unwrap();
    let seed: u64 = args[2].parse().unwrap();
    let mut flows_report: BTreeMap<usize, [u64; 2]> = BTreeMap::new();
    let mut kinds: Vec<String> = Vec::new();
    for (pass, ids) in [false, true].into_iter().enumerate() {
        let mut cfg = ScenarioConfig::template("paper-20").unwrap();
        cfg.seed = seed;
        cfg.adversary.fraction = frac;
        cfg.ids_enabled = ids;
        cfg.mobility.pause_time_s = 100.0;
        let packets = SharedBuf::new();
        let traces = Traces { packets: Some(Box::new(packets.clone())), reputation: None };
        let sim = Simulation::new(cfg, traces).unwrap();
        let flows: Vec<(u16, u16, bool, bool)> = sim
            .flows()
            .iter()
            .map(|f| (f.source.0, f.sink.0, sim.is_adversary(f.source), sim.is_adversary(f.sink)))
            .collect();
        let _res = {
            let mut s = sim;
            s.run_until(manetsim_core::engine::SimTime(900.0));
            s.finalize()
        };
        let text = packets.into_string();
        // recv DATA at sink, and sends at source (line: "t node recv DATA (s,d,p,id,f) sl=0")
        let mut per_pair: BTreeMap<(u16, u16), [u64; 2]> = BTreeMap::new();
        for line in text.lines() {
            let mut it = line.split_whitespace();
            let _t = it.next().unwrap();
            let node: u16 = it.next().unwrap().parse().unwrap();
            let ev = it.next().unwrap();
            let kind = it.next().unwrap();
            if kind != "DATA" { continue; }
            let ident = it.next().unwrap();
            let inner = &ident[1..ident.len() - 1];
            let fs: Vec<&str> = inner.split(',').collect();
            let (s, d): (u16, u16) = (fs[0].parse().unwrap(), fs[1].parse().unwrap());
            if ev == "recv" && node == d {
                per_pair.entry((s, d)).or_default()[1] += 1;
            }
        }
        for (i, &(s, d, sadv, dadv)) in flows.iter().enumerate() {
            let recv = per_pair.get(&(s, d)).map(|v| v[1]).unwrap_or(0);
            flows_report.entry(i).or_default()[pass] = recv;
            if pass == 1 {
                kinds.push(format!("flow{i} {s}->{d} src_adv={sadv} dst_adv={dadv}"));
            }
        }
    }
    println!("per-flow delivered (of 3600): plain | ids");
    for (i, k) in kinds.iter().enumerate() {
        let v = flows_report[&i];
        println!("{:55} {:5} | {:5}  (delta {:+})", k, v[0], v[1], v[1] as i64 - v[0] as i64);
    }
}
