use manetsim_core::engine::SimTime;
use manetsim_core::scenario::ScenarioConfig;
use manetsim_core::sim::Simulation;
use manetsim_core::trace::Traces;
use manetsim_core::traffic::DropCause;
use std::io::Write;

fn main() {
    let mut cfg = ScenarioConfig::template("paper-20").unwrap();
    cfg.seed = 13;
    cfg.adversary.fraction = 0.3;
    cfg.ids_enabled = true;
    cfg.mobility.pause_time_s = 100.0;
    cfg.horizon_s = 900.0;
    let mut sim = Simulation::new(cfg, Traces::none()).unwrap();
    let t0 = std::time::Instant::now();
    let mut step = 0.0f64;
    let mut prev = (0u64, 0u64, 0u64, 0u64, 0u64);
    while step < 900.0 {
        step += 0.5;
        let n = sim.run_until(SimTime(step));
        let m = sim.metrics();
        let cur = (m.rreq_tx, m.rrep_tx, m.rerr_tx, m.warning_tx, m.probe_tx);
        if n > 20_000 || t0.elapsed().as_secs() > 30 {
            println!(
                "t={:6.1} ev={} d_rreq={} d_rrep={} d_rerr={} d_warn={} d_probe={} cong={} sent={} recv={}",
                step, n,
                cur.0 - prev.0, cur.1 - prev.1, cur.2 - prev.2, cur.3 - prev.3, cur.4 - prev.4,
                m.drop_count(DropCause::Congestion), m.data_sent, m.data_received
            );
            std::io::stdout().flush().unwrap();
        }
        if t0.elapsed().as_secs() > 40 { println!("BAIL t={step}"); break; }
        prev = cur;
    }
}
