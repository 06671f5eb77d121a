use manetsim_core::engine::SimTime;
use manetsim_core::scenario::ScenarioConfig;
use manetsim_core::sim::Simulation;
use manetsim_core::trace::Traces;
use std::io::Write;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let frac: f64 = args[1].parse().unwrap();
    let ids: bool = args[2].parse().unwrap();
    let horizon: f64 = args[3].parse().unwrap();
    let mut cfg = ScenarioConfig::template("paper-20").unwrap();
    cfg.seed = 13;
    cfg.adversary.fraction = frac;
    cfg.ids_enabled = ids;
    cfg.mobility.pause_time_s = 100.0;
    cfg.horizon_s = horizon;
    let mut sim = Simulation::new(cfg, Traces::none()).unwrap();
    let t0 = std::time::Instant::now();
    let mut step = 0.0f64;
    while step < horizon {
        step += 1.0;
        let n = sim.run_until(SimTime(step));
        if n > 2000 {
            println!("t={:5.0} events_in_step={:9} elapsed={:?}", step, n, t0.elapsed());
            std::io::stdout().flush().unwrap();
        }
        if t0.elapsed().as_secs() > 45 {
            println!("BAIL at t={step}");
            std::io::stdout().flush().unwrap();
            break;
        }
    }
    let m = sim.metrics();
    println!("rreq={} rrep={} rerr={} warn={} probe={} sent={} recv={} adv={} cong={} nr={} avoid={}",
        m.rreq_tx, m.rrep_tx, m.rerr_tx, m.warning_tx, m.probe_tx, m.data_sent, m.data_received,
        m.drop_count(manetsim_core::traffic::DropCause::Adversarial),
        m.drop_count(manetsim_core::traffic::DropCause::Congestion),
        m.drop_count(manetsim_core::traffic::DropCause::NoRoute),
        m.drop_count(manetsim_core::traffic::DropCause::AvoidList));
}
