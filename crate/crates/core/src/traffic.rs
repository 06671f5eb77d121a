//! Constant-bit-rate traffic and run-level metric accounting.

use std::collections::BTreeSet;

use crate::engine::SimTime;
use crate::num;
use crate::{NodeId, Scalar};

/// One CBR connection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbrFlow {
    pub source: NodeId,
    pub sink: NodeId,
    pub packet_size_bytes: u32,
    pub rate_pps: Scalar,
    pub start: SimTime,
    pub stop: SimTime,
}

impl CbrFlow {
    /// Gap between consecutive sends: exactly `1 / rate`.
    pub fn gap_s(&self) -> Scalar {
        1.0 / self.rate_pps
    }

    /// All send instants: `start + k / rate` for `k` with `t < stop`.
    pub fn send_times(&self) -> Vec<SimTime> {
        let mut times = Vec::new();
        let mut k = 0u64;
        loop {
            let t = self.start.seconds() + k as Scalar * self.gap_s();
            if t >= self.stop.seconds() {
                break;
            }
            times.push(SimTime(t));
            k += 1;
        }
        times
    }
}

/// Why a data packet never reached its sink.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropCause {
    /// Silently discarded by a misbehaving relay.
    Adversarial,
    /// Drop-tail at an interface queue or send-buffer overflow.
    Congestion,
    /// No usable route: buffer expiry, a broken link mid-flight, or a next
    /// hop the forwarder refuses to use.
    NoRoute,
    /// Refused because the sender or originator is classified malicious.
    AvoidList,
}

impl DropCause {
    pub fn label(self) -> &'static str {
        match self {
            DropCause::Adversarial => "adversarial",
            DropCause::Congestion => "congestion",
            DropCause::NoRoute => "no_route",
            DropCause::AvoidList => "avoid_list",
        }
    }
}

/// Per-run counters. Data counters cover CBR packets only; knock probes and
/// warnings are accounted separately as intrusion-detection overhead.
#[derive(Debug, Clone, Default)]
pub struct MetricsAccumulator {
    pub data_sent: u64,
    pub data_received: u64,
    pub payload_bits_delivered: u64,
    pub drops: [u64; 4],
    latency_sum_s: Scalar,
    latency_count: u64,
    pub rreq_tx: u64,
    pub rrep_tx: u64,
    pub rerr_tx: u64,
    pub warning_tx: u64,
    pub probe_tx: u64,
    pub malicious_declarations: u64,
    /// Honest nodes ever declared malicious by any peer.
    pub honest_flagged: BTreeSet<NodeId>,
    /// Outstanding CBR packets: sent minus delivered minus dropped.
    live_data: i64,
}

impl MetricsAccumulator {
    pub fn note_data_sent(&mut self) {
        self.data_sent += 1;
        self.live_data += 1;
    }

    pub fn note_data_delivered(&mut self, payload_bytes: u32, latency_s: Scalar) {
        self.data_received += 1;
        self.payload_bits_delivered += payload_bytes as u64 * 8;
        self.latency_sum_s += latency_s;
        self.latency_count += 1;
        self.live_data -= 1;
    }

    pub fn note_data_drop(&mut self, cause: DropCause) {
        self.drops[cause as usize] += 1;
        self.live_data -= 1;
    }

    pub fn drop_count(&self, cause: DropCause) -> u64 {
        self.drops[cause as usize]
    }

    pub fn control_tx(&self) -> u64 {
        self.rreq_tx + self.rrep_tx + self.rerr_tx
    }

    pub fn ids_tx(&self) -> u64 {
        self.warning_tx + self.probe_tx
    }

    /// CBR packets not yet delivered or dropped (in queues, buffers or on
    /// the air).
    pub fn in_flight(&self) -> i64 {
        self.live_data
    }

    /// Delivered over sent; absent when nothing was sent.
    pub fn packet_delivery_ratio(&self) -> Option<Scalar> {
        if self.data_sent == 0 {
            return None;
        }
        Some(self.data_received as Scalar / self.data_sent as Scalar)
    }

    /// Routing control emissions (request, reply, error — every hop-level
    /// transmission) over data packets sent; absent when nothing was sent.
    pub fn routing_overhead(&self) -> Option<Scalar> {
        if self.data_sent == 0 {
            return None;
        }
        Some(self.control_tx() as Scalar / self.data_sent as Scalar)
    }

    /// Warning and knock-probe emissions over data packets sent.
    pub fn ids_overhead(&self) -> Option<Scalar> {
        if self.data_sent == 0 {
            return None;
        }
        Some(self.ids_tx() as Scalar / self.data_sent as Scalar)
    }

    /// Mean one-way latency over delivered packets only.
    pub fn avg_latency_s(&self) -> Option<Scalar> {
        if self.latency_count == 0 {
            return None;
        }
        Some(self.latency_sum_s / self.latency_count as Scalar)
    }

    /// Delivered payload bits per second, averaged per node.
    pub fn throughput_bps_per_node(&self, horizon_s: Scalar, nodes: usize) -> Scalar {
        if horizon_s <= 0.0 || nodes == 0 {
            return 0.0;
        }
        self.payload_bits_delivered as Scalar / horizon_s / nodes as Scalar
    }
}

/// One finished run, flattened for the results CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub scenario_id: String,
    pub seed: u64,
    pub nodes: usize,
    pub malicious_fraction: Scalar,
    pub pause_time_s: Scalar,
    pub window_size_s: Scalar,
    pub ids_enabled: bool,
    pub pdr: Option<Scalar>,
    pub routing_overhead: Option<Scalar>,
    pub ids_overhead: Option<Scalar>,
    pub avg_latency_s: Option<Scalar>,
    pub throughput_bps: Scalar,
    pub drop_adversarial: u64,
    pub drop_congestion: u64,
    pub drop_no_route: u64,
    pub drop_avoid_list: u64,
    pub data_sent: u64,
    pub data_received: u64,
    pub control_tx: u64,
    pub rreq_tx: u64,
    pub rrep_tx: u64,
    pub rerr_tx: u64,
    pub warning_tx: u64,
    pub probe_tx: u64,
    pub malicious_declarations: u64,
    pub honest_flagged: u64,
    pub honest_nodes: u64,
    pub in_flight: u64,
}

fn fmt_opt(v: Option<Scalar>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl RunResult {
    pub const CSV_HEADER: &'static str = "scenario_id,seed,nodes,malicious_fraction,pause_time_s,\
window_size_s,ids,pdr,routing_overhead,ids_overhead,avg_latency_s,throughput_bps,\
drop_adversarial,drop_congestion,drop_no_route,drop_avoid_list,data_sent,data_received,\
control_tx,rreq_tx,rrep_tx,rerr_tx,warning_tx,probe_tx,malicious_declarations,\
honest_flagged,honest_nodes,in_flight";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{:.6},{},{},{},{},{},{:.6},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.scenario_id,
            self.seed,
            self.nodes,
            self.malicious_fraction,
            self.pause_time_s,
            self.window_size_s,
            self.ids_enabled,
            fmt_opt(self.pdr),
            fmt_opt(self.routing_overhead),
            fmt_opt(self.ids_overhead),
            fmt_opt(self.avg_latency_s),
            self.throughput_bps,
            self.drop_adversarial,
            self.drop_congestion,
            self.drop_no_route,
            self.drop_avoid_list,
            self.data_sent,
            self.data_received,
            self.control_tx,
            self.rreq_tx,
            self.rrep_tx,
            self.rerr_tx,
            self.warning_tx,
            self.probe_tx,
            self.malicious_declarations,
            self.honest_flagged,
            self.honest_nodes,
            self.in_flight,
        )
    }
}

/// Aggregated cell of a sweep: one group label (dimension value), split by
/// overlay on/off.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub group: String,
    pub ids_enabled: bool,
    pub runs: usize,
    pub pdr_mean: Option<Scalar>,
    pub pdr_stddev: Option<Scalar>,
    pub routing_overhead_mean: Option<Scalar>,
    pub routing_overhead_stddev: Option<Scalar>,
    pub ids_overhead_mean: Option<Scalar>,
    pub avg_latency_mean_s: Option<Scalar>,
    pub throughput_mean_bps: Scalar,
}

impl SummaryRow {
    pub const CSV_HEADER: &'static str = "group,ids,runs,pdr_mean,pdr_stddev,\
routing_overhead_mean,routing_overhead_stddev,ids_overhead_mean,avg_latency_mean_s,\
throughput_mean_bps";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.6}",
            self.group,
            self.ids_enabled,
            self.runs,
            fmt_opt(self.pdr_mean),
            fmt_opt(self.pdr_stddev),
            fmt_opt(self.routing_overhead_mean),
            fmt_opt(self.routing_overhead_stddev),
            fmt_opt(self.ids_overhead_mean),
            fmt_opt(self.avg_latency_mean_s),
            self.throughput_mean_bps,
        )
    }
}

/// Groups results by `(label, ids flag)` and reports per-metric mean and
/// standard deviation. Groups are never pooled; a single run yields a zero
/// standard deviation.
pub fn aggregate_runs(
    results: &[RunResult],
    label: impl Fn(&RunResult) -> String,
) -> Vec<SummaryRow> {
    let mut groups: std::collections::BTreeMap<(String, bool), Vec<&RunResult>> =
        Default::default();
    for r in results {
        groups.entry((label(r), r.ids_enabled)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((group, ids_enabled), rs)| {
            let collect = |f: &dyn Fn(&RunResult) -> Option<Scalar>| -> Vec<Scalar> {
                rs.iter().filter_map(|r| f(r)).collect()
            };
            let pdrs = collect(&|r| r.pdr);
            let overheads = collect(&|r| r.routing_overhead);
            let ids_overheads = collect(&|r| r.ids_overhead);
            let latencies = collect(&|r| r.avg_latency_s);
            let throughputs: Vec<Scalar> = rs.iter().map(|r| r.throughput_bps).collect();
            SummaryRow {
                group,
                ids_enabled,
                runs: rs.len(),
                pdr_mean: num::mean(&pdrs),
                pdr_stddev: (!pdrs.is_empty()).then(|| num::stddev(&pdrs)),
                routing_overhead_mean: num::mean(&overheads),
                routing_overhead_stddev: (!overheads.is_empty()).then(|| num::stddev(&overheads)),
                ids_overhead_mean: num::mean(&ids_overheads),
                avg_latency_mean_s: num::mean(&latencies),
                throughput_mean_bps: num::mean(&throughputs).unwrap_or(0.0),
            }
        })
        .collect()
}
