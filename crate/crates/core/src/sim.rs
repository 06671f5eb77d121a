//! The run loop: wires the event engine, world, DSR state machines,
//! reputation overlay, adversaries and metrics into one deterministic
//! simulation.

use std::collections::{BTreeMap, BTreeSet};

use crate::adversary::AdversaryProfile;
use crate::dsr::{DsrState, PendingData, RegisteredPacket, SEND_BUFFER_TIMEOUT_S};
use crate::engine::{EventHandle, EventQueue, RngStreams, SimTime, StreamId};
use crate::ids::{
    self, FadeOutcome, ReputationClass, ReputationTable, SecondHand, SelfObservation,
};
use crate::packet::{
    sizes, DataKind, Packet, PacketIdentity, PacketKind, RreqHeader, SourceRoute,
};
use crate::scenario::{ConfigError, ScenarioConfig};
use crate::trace::{PacketEvent, Traces};
use crate::traffic::{CbrFlow, DropCause, MetricsAccumulator, RunResult};
use crate::world::{EnqueueResult, InterfaceQueue, MobilityModel, RadioParams, TraceWaypoint, World};
use crate::{NodeId, Scalar};

/// IP protocol numbers stamped into packet identities.
pub const PROTO_DATA: u8 = 17;
pub const PROTO_CONTROL: u8 = 48;

/// How recently a flow must have been forwarded for a malicious declaration
/// to trigger an eager route error toward its source.
const ACTIVE_FLOW_HORIZON_S: Scalar = 5.0;

/// Period of false-warning broadcasts by colluding liars.
const LIAR_WARNING_PERIOD_S: Scalar = 5.0;

#[derive(Debug, Clone)]
enum Ev {
    MotionChange(NodeId),
    FlowSend { flow: usize, k: u64 },
    WindowClose(NodeId),
    TxComplete(NodeId),
    FrameDelivered {
        transmitter: NodeId,
        packet: Packet,
        receivers: Vec<NodeId>,
        next_hop: Option<NodeId>,
        delivered: bool,
    },
    KnockDeadline {
        prober: NodeId,
        target: NodeId,
        identification: u16,
    },
    FadeCheck {
        observer: NodeId,
        subject: NodeId,
    },
    LiarTick(NodeId),
}

#[derive(Debug, Clone)]
struct Outgoing {
    pkt: Packet,
    next_hop: Option<NodeId>,
}

struct LinkState {
    queue: InterfaceQueue<Outgoing>,
    transmitting: Option<Outgoing>,
}

#[derive(Debug, Clone)]
struct KnockPending {
    identity: PacketIdentity,
    segments_left: u8,
    deadline: Option<EventHandle>,
}

struct IdsOverlay {
    reputation: ReputationTable,
    warnings_seen: BTreeSet<(NodeId, u32)>,
    knock_pending: BTreeMap<NodeId, KnockPending>,
    fade_scheduled: BTreeSet<NodeId>,
}

struct NodeCtx {
    dsr: DsrState,
    ids: Option<IdsOverlay>,
    adversary: Option<AdversaryProfile>,
    next_warning_id: u32,
}

impl NodeCtx {
    fn reputation(&self) -> Option<&ReputationTable> {
        self.ids.as_ref().map(|o| &o.reputation)
    }

    fn classifies_malicious(&self, subject: NodeId) -> bool {
        self.reputation().is_some_and(|r| r.is_malicious(subject))
    }
}

/// One simulation run. Construct, [`Simulation::run`] to the horizon, and
/// collect the [`RunResult`].
pub struct Simulation {
    cfg: ScenarioConfig,
    engine: EventQueue<Ev>,
    streams: RngStreams,
    world: World,
    links: Vec<LinkState>,
    nodes: Vec<NodeCtx>,
    flows: Vec<CbrFlow>,
    metrics: MetricsAccumulator,
    traces: Traces,
}

impl Simulation {
    pub fn new(cfg: ScenarioConfig, traces: Traces) -> Result<Simulation, ConfigError> {
        let scripts = match &cfg.mobility.trace_file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    ConfigError::Invalid(format!("cannot read movement trace '{path}': {e}"))
                })?;
                Some(
                    crate::world::parse_movement_trace(&text, cfg.node_count)
                        .map_err(ConfigError::Invalid)?,
                )
            }
            None => None,
        };
        Self::new_scripted(cfg, scripts, traces)
    }

    /// Like [`Simulation::new`] but with movement scripts injected directly,
    /// bypassing the trace file.
    pub fn new_scripted(
        cfg: ScenarioConfig,
        scripts: Option<Vec<Vec<TraceWaypoint>>>,
        traces: Traces,
    ) -> Result<Simulation, ConfigError> {
        cfg.validate()?;
        let n = cfg.node_count;
        let mut streams = RngStreams::new(cfg.seed);
        let radio = RadioParams {
            range_m: cfg.radio.range_m,
            bandwidth_bps: cfg.radio.bandwidth_bps,
            per_hop_processing_delay_s: cfg.radio.per_hop_processing_delay_s,
        };
        let mobility = match scripts {
            Some(s) => MobilityModel::Scripted(s),
            None => MobilityModel::RandomWaypoint {
                max_speed_mps: cfg.mobility.max_speed_mps,
                pause_time_s: cfg.mobility.pause_time_s,
            },
        };
        let world = World::new(
            n,
            cfg.field.width_m,
            cfg.field.height_m,
            radio,
            mobility,
            &mut streams,
        );

        // Adversary selection: explicit list, or sampled without replacement
        // from the placement stream.
        let adversary_ids: BTreeSet<NodeId> = if !cfg.adversary.nodes.is_empty() {
            cfg.adversary_node_set().into_iter().collect()
        } else {
            let count = cfg.adversary_count().min(n);
            let mut picked = BTreeSet::new();
            while picked.len() < count {
                picked.insert(NodeId(streams.index(StreamId::Placement, n) as u16));
            }
            picked
        };

        // Flow endpoints: explicit pairs, or drawn per run.
        let pairs: Vec<(NodeId, NodeId)> = match &cfg.traffic.pairs {
            Some(pairs) => pairs.iter().map(|&(s, d)| (NodeId(s), NodeId(d))).collect(),
            None => (0..cfg.traffic.flows)
                .map(|_| {
                    let s = streams.index(StreamId::Placement, n) as u16;
                    let d = loop {
                        let d = streams.index(StreamId::Placement, n) as u16;
                        if d != s {
                            break d;
                        }
                    };
                    (NodeId(s), NodeId(d))
                })
                .collect(),
        };
        let flows: Vec<CbrFlow> = pairs
            .into_iter()
            .map(|(source, sink)| {
                let gap = 1.0 / cfg.traffic.rate_pps;
                let start = streams.uniform(StreamId::Traffic, 0.0, gap);
                CbrFlow {
                    source,
                    sink,
                    packet_size_bytes: cfg.traffic.packet_size_bytes,
                    rate_pps: cfg.traffic.rate_pps,
                    start: SimTime(start),
                    stop: SimTime(cfg.horizon_s),
                }
            })
            .collect();

        let nodes: Vec<NodeCtx> = (0..n as u16)
            .map(|i| {
                let id = NodeId(i);
                let adversary = adversary_ids
                    .contains(&id)
                    .then(|| cfg.adversary.profile.clone());
                let ids = (cfg.ids_enabled && adversary.is_none())
                    .then(|| IdsOverlay {
                        reputation: ReputationTable::new(cfg.ids),
                        warnings_seen: BTreeSet::new(),
                        knock_pending: BTreeMap::new(),
                        fade_scheduled: BTreeSet::new(),
                    });
                NodeCtx {
                    dsr: DsrState::new(cfg.radio.queue_capacity),
                    ids,
                    adversary,
                    next_warning_id: 0,
                }
            })
            .collect();
        let links = (0..n)
            .map(|_| LinkState {
                queue: InterfaceQueue::new(cfg.radio.queue_capacity),
                transmitting: None,
            })
            .collect();

        let mut sim = Simulation {
            engine: EventQueue::new(),
            streams,
            world,
            links,
            nodes,
            flows,
            metrics: MetricsAccumulator::default(),
            traces,
            cfg,
        };

        for i in 0..n as u16 {
            let id = NodeId(i);
            let change = sim.world.next_motion_change(id);
            if change.seconds().is_finite() {
                sim.engine.schedule(change, Ev::MotionChange(id));
            }
        }
        for (i, flow) in sim.flows.iter().enumerate() {
            if flow.start < flow.stop {
                sim.engine.schedule(flow.start, Ev::FlowSend { flow: i, k: 0 });
            }
        }
        let window = sim.cfg.ids.window_size_s;
        for i in 0..n as u16 {
            if sim.nodes[i as usize].ids.is_some() {
                sim.engine.schedule(SimTime(window), Ev::WindowClose(NodeId(i)));
            }
        }
        for i in 0..n as u16 {
            let id = NodeId(i);
            if let Some(p) = &sim.nodes[i as usize].adversary {
                if !p.false_accusation_victims.is_empty() {
                    let first = p.active_from_s.max(LIAR_WARNING_PERIOD_S);
                    sim.engine.schedule(SimTime(first), Ev::LiarTick(id));
                }
            }
        }
        Ok(sim)
    }

    pub fn now(&self) -> SimTime {
        self.engine.now()
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn metrics(&self) -> &MetricsAccumulator {
        &self.metrics
    }

    pub fn flows(&self) -> &[CbrFlow] {
        &self.flows
    }

    pub fn is_adversary(&self, node: NodeId) -> bool {
        self.nodes[node.index()].adversary.is_some()
    }

    pub fn reputation_value(&self, observer: NodeId, subject: NodeId) -> Option<Scalar> {
        self.nodes[observer.index()]
            .reputation()
            .map(|r| r.value_of(subject))
    }

    pub fn reputation_class(&self, observer: NodeId, subject: NodeId) -> Option<ReputationClass> {
        self.nodes[observer.index()]
            .reputation()
            .map(|r| r.class_of(subject))
    }

    pub fn cached_routes(&self, node: NodeId) -> Vec<Vec<NodeId>> {
        self.nodes[node.index()].dsr.cache.iter().cloned().collect()
    }

    /// Dispatches every event up to `end`. Returns the dispatch count.
    pub fn run_until(&mut self, end: SimTime) -> u64 {
        let before = self.engine.dispatched();
        let debug_every = std::env::var("MANETSIM_DEBUG_EVERY")
            .ok()
            .and_then(|v| v.parse::<u64>().ok());
        while let Some(ev) = self.engine.pop_due(end) {
            if let Some(k) = debug_every {
                if self.engine.dispatched() % k == 0 {
                    eprintln!(
                        "[debug] n={} t={} ev={:?}",
                        self.engine.dispatched(),
                        ev.fire_at,
                        &ev.payload
                    );
                }
            }
            self.dispatch(ev.fire_at, ev.payload);
        }
        self.engine.finish(end);
        self.engine.dispatched() - before
    }

    /// Runs to the configured horizon and produces the result row.
    pub fn run(mut self) -> RunResult {
        let horizon = SimTime(self.cfg.horizon_s);
        self.run_until(horizon);
        self.finalize()
    }

    /// Closes the run: verifies packet conservation and flattens metrics.
    pub fn finalize(mut self) -> RunResult {
        let is_cbr = |pkt: &Packet| {
            matches!(
                pkt.kind,
                PacketKind::Data {
                    data: DataKind::Cbr { .. }
                }
            )
        };
        let mut live: i64 = 0;
        for link in &self.links {
            live += link.queue.iter().filter(|o| is_cbr(&o.pkt)).count() as i64;
            if let Some(out) = &link.transmitting {
                if is_cbr(&out.pkt) {
                    live += 1;
                }
            }
        }
        for node in &self.nodes {
            live += node.dsr.send_buffer.len() as i64;
        }
        for payload in self.engine.drain_remaining() {
            if let Ev::FrameDelivered { packet, .. } = payload {
                if is_cbr(&packet) {
                    live += 1;
                }
            }
        }
        assert_eq!(
            live,
            self.metrics.in_flight(),
            "packet conservation violated: {} residents vs {} unaccounted",
            live,
            self.metrics.in_flight()
        );

        let honest_nodes = self
            .nodes
            .iter()
            .filter(|n| n.adversary.is_none())
            .count() as u64;
        RunResult {
            scenario_id: self.cfg.name.clone(),
            seed: self.cfg.seed,
            nodes: self.cfg.node_count,
            malicious_fraction: self.cfg.malicious_fraction(),
            pause_time_s: self.cfg.mobility.pause_time_s,
            window_size_s: self.cfg.ids.window_size_s,
            ids_enabled: self.cfg.ids_enabled,
            pdr: self.metrics.packet_delivery_ratio(),
            routing_overhead: self.metrics.routing_overhead(),
            ids_overhead: self.metrics.ids_overhead(),
            avg_latency_s: self.metrics.avg_latency_s(),
            throughput_bps: self
                .metrics
                .throughput_bps_per_node(self.cfg.horizon_s, self.cfg.node_count),
            drop_adversarial: self.metrics.drop_count(DropCause::Adversarial),
            drop_congestion: self.metrics.drop_count(DropCause::Congestion),
            drop_no_route: self.metrics.drop_count(DropCause::NoRoute),
            drop_avoid_list: self.metrics.drop_count(DropCause::AvoidList),
            data_sent: self.metrics.data_sent,
            data_received: self.metrics.data_received,
            control_tx: self.metrics.control_tx(),
            rreq_tx: self.metrics.rreq_tx,
            rrep_tx: self.metrics.rrep_tx,
            rerr_tx: self.metrics.rerr_tx,
            warning_tx: self.metrics.warning_tx,
            probe_tx: self.metrics.probe_tx,
            malicious_declarations: self.metrics.malicious_declarations,
            honest_flagged: self.metrics.honest_flagged.len() as u64,
            honest_nodes,
            in_flight: self.metrics.in_flight().max(0) as u64,
        }
    }

    fn dispatch(&mut self, t: SimTime, ev: Ev) {
        match ev {
            Ev::MotionChange(node) => {
                let next = self.world.advance_motion(node, t, &mut self.streams);
                if next.seconds().is_finite() {
                    self.engine.schedule(next, Ev::MotionChange(node));
                }
            }
            Ev::FlowSend { flow, k } => self.flow_send(flow, k, t),
            Ev::WindowClose(node) => self.window_close(node, t),
            Ev::TxComplete(node) => self.tx_complete(node, t),
            Ev::FrameDelivered {
                transmitter,
                packet,
                receivers,
                next_hop,
                delivered,
            } => self.frame_delivered(transmitter, packet, receivers, next_hop, delivered, t),
            Ev::KnockDeadline {
                prober,
                target,
                identification,
            } => self.knock_deadline(prober, target, identification, t),
            Ev::FadeCheck { observer, subject } => self.fade_check(observer, subject, t),
            Ev::LiarTick(node) => self.liar_tick(node, t),
        }
    }

    // ------------------------------------------------------------------
    // Traffic
    // ------------------------------------------------------------------

    fn flow_send(&mut self, flow_idx: usize, k: u64, t: SimTime) {
        let flow = self.flows[flow_idx];
        let next = flow.start.seconds() + (k + 1) as Scalar * flow.gap_s();
        if next < flow.stop.seconds() {
            self.engine
                .schedule(SimTime(next), Ev::FlowSend { flow: flow_idx, k: k + 1 });
        }
        self.metrics.note_data_sent();
        let source = flow.source;
        let identification = self.nodes[source.index()].dsr.fresh_ip_id();
        let pending = PendingData {
            data: DataKind::Cbr { flow: flow_idx },
            identity: PacketIdentity {
                source,
                destination: flow.sink,
                protocol: PROTO_DATA,
                identification,
                fragment_offset: 0,
            },
            originated_at: t,
        };
        self.dispatch_data(source, pending, t);
    }

    /// Sends a data packet along the best cached route, or parks it in the
    /// send buffer and starts discovery.
    fn dispatch_data(&mut self, source: NodeId, pending: PendingData, t: SimTime) {
        self.expire_send_buffer(source, t);
        let destination = pending.identity.destination;
        let route = {
            let node = &self.nodes[source.index()];
            node.dsr
                .cache
                .select_route(destination, node.reputation())
                .cloned()
        };
        match route {
            Some(hops) => {
                let next_hop = hops[1];
                let pkt = Packet {
                    kind: PacketKind::Data { data: pending.data },
                    identity: pending.identity,
                    source_route: Some(SourceRoute::new(hops)),
                    size_bytes: self.cfg.traffic.packet_size_bytes,
                    originated_at: pending.originated_at,
                };
                self.forward_enqueue(source, pkt, Some(next_hop), t);
            }
            None => {
                let buffered = self.nodes[source.index()].dsr.buffer_data(pending.clone());
                if !buffered {
                    let pkt = self.data_placeholder(&pending);
                    self.traces
                        .packet(t, source, PacketEvent::Drop(DropCause::Congestion.label()), &pkt);
                    self.metrics.note_data_drop(DropCause::Congestion);
                }
                if self.nodes[source.index()].dsr.may_discover(destination, t) {
                    self.originate_route_request(source, destination, t);
                }
            }
        }
    }

    fn data_placeholder(&self, pending: &PendingData) -> Packet {
        Packet {
            kind: PacketKind::Data { data: pending.data },
            identity: pending.identity,
            source_route: None,
            size_bytes: self.cfg.traffic.packet_size_bytes,
            originated_at: pending.originated_at,
        }
    }

    /// Drops send-buffer entries that waited longer than the buffer timeout.
    fn expire_send_buffer(&mut self, node: NodeId, t: SimTime) {
        let expired: Vec<PendingData> = {
            let buffer = &mut self.nodes[node.index()].dsr.send_buffer;
            let mut expired = Vec::new();
            buffer.retain(|p| {
                if t.seconds() - p.originated_at.seconds() > SEND_BUFFER_TIMEOUT_S {
                    expired.push(p.clone());
                    false
                } else {
                    true
                }
            });
            expired
        };
        for pending in expired {
            let pkt = self.data_placeholder(&pending);
            self.traces
                .packet(t, node, PacketEvent::Drop(DropCause::NoRoute.label()), &pkt);
            self.metrics.note_data_drop(DropCause::NoRoute);
        }
    }

    /// Re-attempts buffered packets toward `destination` after a route
    /// appeared.
    fn drain_send_buffer(&mut self, node: NodeId, destination: NodeId, t: SimTime) {
        let drained: Vec<PendingData> = {
            let buffer = &mut self.nodes[node.index()].dsr.send_buffer;
            let mut drained = Vec::new();
            buffer.retain(|p| {
                if p.identity.destination == destination {
                    drained.push(p.clone());
                    false
                } else {
                    true
                }
            });
            drained
        };
        for pending in drained {
            self.dispatch_data(node, pending, t);
        }
    }

    // ------------------------------------------------------------------
    // Route discovery
    // ------------------------------------------------------------------

    fn originate_route_request(&mut self, node: NodeId, target: NodeId, t: SimTime) {
        let (request_id, identification, avoid_list) = {
            let ctx = &mut self.nodes[node.index()];
            ctx.dsr.note_discovery(target, t);
            let avoid = ctx
                .reputation()
                .map(|r| r.malicious_list())
                .unwrap_or_default();
            (ctx.dsr.fresh_request_id(), ctx.dsr.fresh_ip_id(), avoid)
        };
        let header = RreqHeader {
            originator: node,
            request_id,
            target,
            accumulated: vec![node],
            avoid_list,
        };
        let pkt = Packet {
            size_bytes: sizes::rreq(header.accumulated.len(), header.avoid_list.len()),
            kind: PacketKind::RouteRequest(header),
            identity: PacketIdentity {
                source: node,
                destination: target,
                protocol: PROTO_CONTROL,
                identification,
                fragment_offset: 0,
            },
            source_route: None,
            originated_at: t,
        };
        self.forward_enqueue(node, pkt, None, t);
    }

    // ------------------------------------------------------------------
    // Link layer
    // ------------------------------------------------------------------

    /// Applies the transmit-side segments-left decrement and enqueues on the
    /// node's interface. Returns false on drop-tail.
    fn forward_enqueue(
        &mut self,
        node: NodeId,
        mut pkt: Packet,
        next_hop: Option<NodeId>,
        t: SimTime,
    ) -> bool {
        if let Some(route) = pkt.source_route.as_mut() {
            debug_assert!(route.segments_left > 0, "forwarding an exhausted route");
            route.segments_left -= 1;
        }
        let is_cbr = matches!(
            pkt.kind,
            PacketKind::Data {
                data: DataKind::Cbr { .. }
            }
        );
        let accepted = {
            let link = &mut self.links[node.index()];
            link.queue.enqueue(Outgoing {
                pkt: pkt.clone(),
                next_hop,
            }) == EnqueueResult::Accepted
        };
        if !accepted {
            self.traces
                .packet(t, node, PacketEvent::Drop(DropCause::Congestion.label()), &pkt);
            if is_cbr {
                self.metrics.note_data_drop(DropCause::Congestion);
            }
            return false;
        }
        if self.links[node.index()].transmitting.is_none() {
            self.start_transmission(node, t);
        }
        true
    }

    fn start_transmission(&mut self, node: NodeId, t: SimTime) {
        let out = match self.links[node.index()].queue.dequeue() {
            Some(out) => out,
            None => return,
        };
        let delay = self.world.radio.transmission_delay(out.pkt.size_bits());
        self.links[node.index()].transmitting = Some(out);
        self.engine.schedule(t.after(delay), Ev::TxComplete(node));
    }

    fn tx_complete(&mut self, node: NodeId, t: SimTime) {
        let out = self.links[node.index()]
            .transmitting
            .take()
            .expect("transmission completion without a frame in flight");
        self.start_transmission(node, t);

        match &out.pkt.kind {
            PacketKind::RouteRequest(_) => self.metrics.rreq_tx += 1,
            PacketKind::RouteReply { .. } => self.metrics.rrep_tx += 1,
            PacketKind::RouteError { .. } => self.metrics.rerr_tx += 1,
            PacketKind::Warning { .. } => self.metrics.warning_tx += 1,
            PacketKind::Data {
                data: DataKind::KnockProbe { .. },
            } => self.metrics.probe_tx += 1,
            PacketKind::Data { .. } => {}
        }
        self.traces.packet(t, node, PacketEvent::Send, &out.pkt);

        let receivers = self.world.neighbors_of(node, t);
        let delivered = out.next_hop.is_some_and(|y| receivers.contains(&y));
        self.engine.schedule(
            t.after(self.world.radio.per_hop_processing_delay_s),
            Ev::FrameDelivered {
                transmitter: node,
                packet: out.pkt,
                receivers,
                next_hop: out.next_hop,
                delivered,
            },
        );
    }

    fn frame_delivered(
        &mut self,
        transmitter: NodeId,
        packet: Packet,
        receivers: Vec<NodeId>,
        next_hop: Option<NodeId>,
        delivered: bool,
        t: SimTime,
    ) {
        // Promiscuous pass: every current neighbor overhears, including the
        // addressed next hop.
        for &r in &receivers {
            self.traces.packet(t, r, PacketEvent::Overhear, &packet);
            self.monitor_overhear(r, transmitter, &packet, t);
        }

        // Sender-side passive-ack registration for frames the link layer
        // confirmed; the final hop is covered by the link-layer ack itself
        // and is not monitored.
        if let PacketKind::Data { data } = &packet.kind {
            let route = packet.source_route.as_ref().expect("data carries a route");
            match data {
                DataKind::Cbr { .. } => {
                    if delivered
                        && next_hop.is_some_and(|y| y != route.destination())
                        && self.nodes[transmitter.index()].ids.is_some()
                    {
                        self.nodes[transmitter.index()].dsr.registry.register(
                            next_hop.unwrap(),
                            RegisteredPacket {
                                identity: packet.identity,
                                segments_left: route.segments_left,
                            },
                            t,
                        );
                    }
                }
                DataKind::KnockProbe { prober } if *prober == transmitter => {
                    let target = next_hop.expect("probes are unicast");
                    if delivered {
                        let deadline = self.engine.schedule(
                            t.after(self.cfg.ids.window_size_s),
                            Ev::KnockDeadline {
                                prober: transmitter,
                                target,
                                identification: packet.identity.identification,
                            },
                        );
                        if let Some(overlay) = self.nodes[transmitter.index()].ids.as_mut() {
                            if let Some(p) = overlay.knock_pending.get_mut(&target) {
                                if p.identity == packet.identity {
                                    p.deadline = Some(deadline);
                                }
                            }
                        }
                    } else if let Some(overlay) = self.nodes[transmitter.index()].ids.as_mut() {
                        // Target out of range: unverifiable, retry on the
                        // next trigger.
                        if overlay
                            .knock_pending
                            .get(&target)
                            .is_some_and(|p| p.identity == packet.identity)
                        {
                            overlay.knock_pending.remove(&target);
                        }
                    }
                }
                DataKind::KnockProbe { .. } => {}
            }
        }

        match next_hop {
            Some(hop) if delivered => self.receive_packet(hop, transmitter, packet, t),
            Some(hop) => self.link_break(transmitter, hop, packet, t),
            None => {
                for &r in &receivers {
                    self.receive_packet(r, transmitter, packet.clone(), t);
                }
            }
        }
    }

    /// Unicast next hop out of range: the sender learns immediately (the
    /// idealized link layer stands in for 802.11 retransmission failure).
    fn link_break(&mut self, node: NodeId, dead_hop: NodeId, packet: Packet, t: SimTime) {
        self.nodes[node.index()].dsr.cache.purge_link(node, dead_hop);
        if let PacketKind::Data {
            data: DataKind::Cbr { .. },
        } = &packet.kind
        {
            self.traces
                .packet(t, node, PacketEvent::Drop(DropCause::NoRoute.label()), &packet);
            self.metrics.note_data_drop(DropCause::NoRoute);
            let route = packet.source_route.as_ref().unwrap().hops.clone();
            if packet.identity.source != node {
                self.emit_route_error(node, dead_hop, &route, t);
            }
        }
    }

    /// Generates a route error at `node` for a broken or refused link toward
    /// `dead_hop`, unicast back to the source of `route_hops`. Routes over
    /// the dead link are purged locally first.
    fn emit_route_error(&mut self, node: NodeId, dead_hop: NodeId, route_hops: &[NodeId], t: SimTime) {
        self.nodes[node.index()].dsr.cache.purge_link(node, dead_hop);
        let Some(pos) = route_hops.iter().position(|&h| h == node) else {
            return;
        };
        if pos == 0 {
            return; // the source itself needs no notification
        }
        let reverse: Vec<NodeId> = route_hops[..=pos].iter().rev().copied().collect();
        let flow_source = *reverse.last().unwrap();
        let identification = self.nodes[node.index()].dsr.fresh_ip_id();
        let next = reverse[1];
        let pkt = Packet {
            kind: PacketKind::RouteError {
                reporter: node,
                from: node,
                to: dead_hop,
            },
            identity: PacketIdentity {
                source: node,
                destination: flow_source,
                protocol: PROTO_CONTROL,
                identification,
                fragment_offset: 0,
            },
            source_route: Some(SourceRoute::new(reverse)),
            size_bytes: sizes::rerr(),
            originated_at: t,
        };
        self.forward_enqueue(node, pkt, Some(next), t);
    }

    // ------------------------------------------------------------------
    // Reception
    // ------------------------------------------------------------------

    fn receive_packet(&mut self, receiver: NodeId, transmitter: NodeId, pkt: Packet, t: SimTime) {
        self.traces.packet(t, receiver, PacketEvent::Recv, &pkt);
        match &pkt.kind {
            PacketKind::Data { .. } => self.handle_data(receiver, transmitter, pkt, t),
            PacketKind::RouteRequest(_) => self.handle_rreq(receiver, transmitter, pkt, t),
            PacketKind::RouteReply { .. } => self.handle_rrep(receiver, transmitter, pkt, t),
            PacketKind::RouteError { .. } => self.handle_rerr(receiver, transmitter, pkt, t),
            PacketKind::Warning { .. } => self.handle_warning(receiver, transmitter, pkt, t),
        }
    }

    fn handle_data(&mut self, receiver: NodeId, transmitter: NodeId, pkt: Packet, t: SimTime) {
        let route = pkt.source_route.clone().expect("data carries a route");
        let is_cbr = matches!(
            pkt.kind,
            PacketKind::Data {
                data: DataKind::Cbr { .. }
            }
        );

        // Traffic from nodes classified malicious is refused outright. A
        // refusing relay reports its link toward the destination broken:
        // the flow stops coming through it, and the route-error rule keeps
        // the upstream monitor from blaming the refusal on the relay.
        let refused = {
            let ctx = &self.nodes[receiver.index()];
            ctx.classifies_malicious(transmitter) || ctx.classifies_malicious(pkt.identity.source)
        };
        if refused {
            self.traces
                .packet(t, receiver, PacketEvent::Drop(DropCause::AvoidList.label()), &pkt);
            if is_cbr {
                self.metrics.note_data_drop(DropCause::AvoidList);
            }
            if receiver != route.destination() {
                if let Some(next) = route.next_hop_after(receiver) {
                    self.emit_route_error(receiver, next, &route.hops, t);
                }
            }
            return;
        }

        if receiver == route.destination() {
            debug_assert_eq!(route.segments_left, 0, "delivery with segments remaining");
            if is_cbr {
                self.metrics.note_data_delivered(
                    pkt.size_bytes,
                    t.seconds() - pkt.originated_at.seconds(),
                );
            }
            return; // knock probes are swallowed silently
        }

        // Relay: the adversary hook sits exactly here.
        let dropped = {
            match self.nodes[receiver.index()].adversary.clone() {
                Some(profile) => profile.should_drop(&pkt, t, &mut self.streams),
                None => false,
            }
        };
        if dropped {
            self.traces.packet(
                t,
                receiver,
                PacketEvent::Drop(DropCause::Adversarial.label()),
                &pkt,
            );
            if is_cbr {
                self.metrics.note_data_drop(DropCause::Adversarial);
            }
            return;
        }

        let Some(next) = route.next_hop_after(receiver) else {
            self.traces
                .packet(t, receiver, PacketEvent::Drop(DropCause::NoRoute.label()), &pkt);
            if is_cbr {
                self.metrics.note_data_drop(DropCause::NoRoute);
            }
            return;
        };

        if is_cbr {
            self.nodes[receiver.index()].dsr.recent_forwards.insert(
                (pkt.identity.source, route.destination()),
                (route.hops.clone(), t),
            );
        }

        // A malicious next hop is unusable as a relay: report the link
        // broken toward the source. Delivery *to* such a node (as final
        // destination) still happens; the monitor cannot watch final hops
        // anyway.
        if next != route.destination() && self.nodes[receiver.index()].classifies_malicious(next) {
            self.traces
                .packet(t, receiver, PacketEvent::Drop(DropCause::NoRoute.label()), &pkt);
            if is_cbr {
                self.metrics.note_data_drop(DropCause::NoRoute);
            }
            self.emit_route_error(receiver, next, &route.hops, t);
            return;
        }

        self.forward_enqueue(receiver, pkt, Some(next), t);
    }

    fn handle_rreq(&mut self, receiver: NodeId, transmitter: NodeId, pkt: Packet, t: SimTime) {
        let mut header = match pkt.kind {
            PacketKind::RouteRequest(h) => h,
            _ => unreachable!(),
        };
        if header.originator == receiver {
            return; // own flood echoed back
        }
        let runs_ids = self.nodes[receiver.index()].ids.is_some();

        // Black-hole variants that drop routing traffic.
        if let Some(profile) = &self.nodes[receiver.index()].adversary {
            if profile.drops_routing && profile.active_at(t) {
                return;
            }
        }
        // Requests relayed by a malicious-classified neighbor, or originated
        // by a malicious-classified node, are not processed: a known dropper
        // is not served routes.
        if self.nodes[receiver.index()].classifies_malicious(transmitter)
            || self.nodes[receiver.index()].classifies_malicious(header.originator)
        {
            return;
        }
        // A node finding itself on the avoid list drops the request without
        // processing it (attackers ignore the list: they want the route).
        if runs_ids && header.avoid_list.contains(&receiver) {
            return;
        }
        // Citations are applied once per request id; the target still
        // answers every arriving copy (each carries a distinct route), while
        // relays re-flood only the first.
        let first_copy = self.nodes[receiver.index()]
            .dsr
            .note_request(header.originator, header.request_id);
        if runs_ids {
            if first_copy {
                // Scan the avoid list and decrement every cited node.
                for cited in header.avoid_list.clone() {
                    if cited != receiver {
                        self.apply_avoid_citation(receiver, cited, t);
                    }
                }
            }
            // Append own malicious list, avoiding repetition.
            let own = self.nodes[receiver.index()]
                .reputation()
                .unwrap()
                .malicious_list();
            header.extend_avoid_list(&own);
        }

        if header.target == receiver {
            let mut discovered = header.accumulated.clone();
            discovered.push(receiver);
            let reply_route: Vec<NodeId> = discovered.iter().rev().copied().collect();
            let next = reply_route[1];
            let identification = self.nodes[receiver.index()].dsr.fresh_ip_id();
            let reply = Packet {
                size_bytes: sizes::rrep(discovered.len()),
                kind: PacketKind::RouteReply { discovered },
                identity: PacketIdentity {
                    source: receiver,
                    destination: header.originator,
                    protocol: PROTO_CONTROL,
                    identification,
                    fragment_offset: 0,
                },
                source_route: Some(SourceRoute::new(reply_route)),
                originated_at: t,
            };
            self.forward_enqueue(receiver, reply, Some(next), t);
            return;
        }

        if !first_copy {
            return; // duplicate flood copy
        }
        if header.accumulated.contains(&receiver) {
            return; // cycle
        }
        header.accumulated.push(receiver);
        let rebroadcast = Packet {
            size_bytes: sizes::rreq(header.accumulated.len(), header.avoid_list.len()),
            kind: PacketKind::RouteRequest(header),
            identity: pkt.identity,
            source_route: None,
            originated_at: pkt.originated_at,
        };
        self.forward_enqueue(receiver, rebroadcast, None, t);
    }

    fn handle_rrep(&mut self, receiver: NodeId, transmitter: NodeId, pkt: Packet, t: SimTime) {
        // Replies from malicious-classified neighbors are dropped.
        if self.nodes[receiver.index()].classifies_malicious(transmitter) {
            self.traces
                .packet(t, receiver, PacketEvent::Drop(DropCause::AvoidList.label()), &pkt);
            return;
        }
        let route = pkt.source_route.clone().expect("replies carry a route");
        let discovered = match &pkt.kind {
            PacketKind::RouteReply { discovered } => discovered.clone(),
            _ => unreachable!(),
        };
        if receiver == route.destination() {
            // We are the discovery originator. Routes relaying through a
            // malicious node are discarded; the target itself is exempt.
            let target = *discovered.last().unwrap();
            let poisoned = self.nodes[receiver.index()]
                .reputation()
                .map(|r| {
                    discovered[..discovered.len() - 1]
                        .iter()
                        .any(|&h| r.is_malicious(h))
                })
                .unwrap_or(false);
            if poisoned {
                self.traces
                    .packet(t, receiver, PacketEvent::Drop(DropCause::AvoidList.label()), &pkt);
                return;
            }
            self.nodes[receiver.index()].dsr.cache.insert(discovered);
            self.nodes[receiver.index()].dsr.note_route_found(target);
            self.drain_send_buffer(receiver, target, t);
            return;
        }
        // Relay along the reply route.
        if let Some(profile) = &self.nodes[receiver.index()].adversary {
            if profile.drops_routing && profile.active_at(t) {
                return;
            }
        }
        let Some(next) = route.next_hop_after(receiver) else {
            return;
        };
        if next != route.destination() && self.nodes[receiver.index()].classifies_malicious(next) {
            return;
        }
        self.forward_enqueue(receiver, pkt, Some(next), t);
    }

    fn handle_rerr(&mut self, receiver: NodeId, _transmitter: NodeId, pkt: Packet, t: SimTime) {
        let (from, to) = match &pkt.kind {
            PacketKind::RouteError { from, to, .. } => (*from, *to),
            _ => unreachable!(),
        };
        self.nodes[receiver.index()].dsr.cache.purge_link(from, to);
        let route = pkt.source_route.clone().expect("errors carry a route");
        if receiver == route.destination() {
            return; // affected source informed; rediscovery is lazy
        }
        if let Some(profile) = &self.nodes[receiver.index()].adversary {
            if profile.drops_routing && profile.active_at(t) {
                return;
            }
        }
        let Some(next) = route.next_hop_after(receiver) else {
            return;
        };
        if next != route.destination() && self.nodes[receiver.index()].classifies_malicious(next) {
            return;
        }
        self.forward_enqueue(receiver, pkt, Some(next), t);
    }

    fn handle_warning(&mut self, receiver: NodeId, _transmitter: NodeId, pkt: Packet, t: SimTime) {
        let (accuser, accused, warning_id) = match &pkt.kind {
            PacketKind::Warning {
                accuser,
                accused,
                warning_id,
            } => (*accuser, *accused, *warning_id),
            _ => unreachable!(),
        };
        if self.nodes[receiver.index()].ids.is_none() {
            return;
        }
        if accused == receiver {
            return; // a node never penalizes itself
        }
        {
            let overlay = self.nodes[receiver.index()].ids.as_mut().unwrap();
            if !overlay.warnings_seen.insert((accuser, warning_id)) {
                return;
            }
        }
        // Warnings only concern current 1-hop neighbors.
        if !self.world.in_range(receiver, accused, t) {
            return;
        }
        let outcome = self.nodes[receiver.index()]
            .ids
            .as_mut()
            .unwrap()
            .reputation
            .second_hand(accused, ids::Channel::Warning, t);
        match outcome {
            SecondHand::Decremented(delta) => self.traces.reputation(t, receiver, &delta),
            SecondHand::KnockWanted => self.try_knock(receiver, accused, t),
            SecondHand::AlreadyMalicious => {}
        }
    }

    fn apply_avoid_citation(&mut self, node: NodeId, cited: NodeId, t: SimTime) {
        let outcome = self.nodes[node.index()]
            .ids
            .as_mut()
            .unwrap()
            .reputation
            .second_hand(cited, ids::Channel::Avoid, t);
        match outcome {
            SecondHand::Decremented(delta) => self.traces.reputation(t, node, &delta),
            SecondHand::KnockWanted => self.try_knock(node, cited, t),
            SecondHand::AlreadyMalicious => {}
        }
    }

    // ------------------------------------------------------------------
    // Knock test
    // ------------------------------------------------------------------

    /// Launches a knock test from `prober` against its suspicious neighbor
    /// `target`: a dummy data packet with a two-hop route budget, sent along
    /// the last known route through the target. Without route material the
    /// test is unverifiable and retried at the next trigger.
    fn try_knock(&mut self, prober: NodeId, target: NodeId, t: SimTime) {
        {
            let ctx = &self.nodes[prober.index()];
            let overlay = ctx.ids.as_ref().unwrap();
            if overlay.knock_pending.contains_key(&target) {
                return;
            }
            if overlay.reputation.class_of(target) != ReputationClass::Suspicious {
                return;
            }
        }
        if !self.world.in_range(prober, target, t) {
            return;
        }
        let Some(witness) = self.nodes[prober.index()].dsr.cache.knock_witness(target, prober)
        else {
            return;
        };
        if witness == target {
            return;
        }
        let identification = self.nodes[prober.index()].dsr.fresh_ip_id();
        let identity = PacketIdentity {
            source: prober,
            destination: witness,
            protocol: PROTO_DATA,
            identification,
            fragment_offset: 0,
        };
        let probe = Packet {
            kind: PacketKind::Data {
                data: DataKind::KnockProbe { prober },
            },
            identity,
            source_route: Some(SourceRoute::new(vec![prober, target, witness])),
            size_bytes: self.cfg.traffic.packet_size_bytes,
            originated_at: t,
        };
        self.nodes[prober.index()]
            .ids
            .as_mut()
            .unwrap()
            .knock_pending
            .insert(
                target,
                KnockPending {
                    identity,
                    segments_left: 1, // the probe leaves the prober with one segment left
                    deadline: None,
                },
            );
        if !self.forward_enqueue(prober, probe, Some(target), t) {
            self.nodes[prober.index()]
                .ids
                .as_mut()
                .unwrap()
                .knock_pending
                .remove(&target);
        }
    }

    fn knock_deadline(&mut self, prober: NodeId, target: NodeId, identification: u16, t: SimTime) {
        let failed = {
            match self.nodes[prober.index()].ids.as_mut() {
                Some(overlay) => match overlay.knock_pending.get(&target) {
                    Some(p) if p.identity.identification == identification => {
                        overlay.knock_pending.remove(&target);
                        true
                    }
                    _ => false,
                },
                None => false,
            }
        };
        if !failed {
            return;
        }
        let delta = self.nodes[prober.index()]
            .ids
            .as_mut()
            .unwrap()
            .reputation
            .knock_failed(target);
        self.traces.reputation(t, prober, &delta);
        self.declaration_side_effects(prober, target, t);
    }

    // ------------------------------------------------------------------
    // Monitor
    // ------------------------------------------------------------------

    /// Promiscuous processing at `observer` of a transmission by
    /// `transmitter`: passive-ack matching, knock-probe confirmation, and
    /// the route-error activity-log rule.
    fn monitor_overhear(&mut self, observer: NodeId, transmitter: NodeId, pkt: &Packet, t: SimTime) {
        if self.nodes[observer.index()].ids.is_none() {
            return;
        }
        if let PacketKind::RouteError { reporter, .. } = &pkt.kind {
            // A neighbor announcing a broken link is excused for this
            // window's unacknowledged packets.
            if *reporter == transmitter {
                self.nodes[observer.index()]
                    .dsr
                    .registry
                    .clear_neighbor(transmitter);
            }
            return;
        }
        if !pkt.kind.is_data() {
            return;
        }
        let knock_hit = {
            let overlay = self.nodes[observer.index()].ids.as_ref().unwrap();
            overlay.knock_pending.get(&transmitter).is_some_and(|p| {
                p.deadline.is_some()
                    && crate::dsr::pack_match(
                        &RegisteredPacket {
                            identity: p.identity,
                            segments_left: p.segments_left,
                        },
                        pkt,
                    )
            })
        };
        if knock_hit {
            let (pending, delta) = {
                let overlay = self.nodes[observer.index()].ids.as_mut().unwrap();
                let pending = overlay.knock_pending.remove(&transmitter).unwrap();
                let delta = overlay.reputation.knock_passed(transmitter);
                (pending, delta)
            };
            if let Some(handle) = pending.deadline {
                self.engine.cancel(handle);
            }
            self.traces.reputation(t, observer, &delta);
            return;
        }
        if self.nodes[observer.index()]
            .dsr
            .registry
            .try_pack(transmitter, pkt)
            .is_some()
        {
            self.traces.packet(t, observer, PacketEvent::Pack, pkt);
        }
    }

    // ------------------------------------------------------------------
    // Timing windows
    // ------------------------------------------------------------------

    fn window_close(&mut self, node: NodeId, t: SimTime) {
        let window = self.cfg.ids.window_size_s;
        self.engine
            .schedule(t.after(window), Ev::WindowClose(node));
        if self.nodes[node.index()].ids.is_none() {
            return;
        }
        // Congestion is sampled from the observer's own queue, before this
        // event inserts anything.
        let congestion: Scalar = ids::congestion_parameter(
            self.links[node.index()].queue.occupancy(),
            self.links[node.index()].queue.capacity(),
        );
        let threshold =
            ids::malicious_drop_threshold(self.cfg.ids.max_packet_rate_pps, congestion, window);
        let counts = self.nodes[node.index()].dsr.registry.window_counts();
        let mut declared = Vec::new();
        let mut deltas = Vec::new();
        {
            let overlay = self.nodes[node.index()].ids.as_mut().unwrap();
            for c in counts {
                if c.registered == 0 {
                    continue;
                }
                match overlay.reputation.self_observation(
                    c.neighbor,
                    c.missing() as usize,
                    threshold,
                ) {
                    SelfObservation::Appraised(delta) => deltas.push(delta),
                    SelfObservation::Penalized {
                        delta,
                        declared_malicious,
                    } => {
                        deltas.push(delta);
                        if declared_malicious {
                            declared.push(c.neighbor);
                        }
                    }
                    SelfObservation::Skipped => {}
                }
            }
        }
        self.nodes[node.index()].dsr.registry.clear_window();
        for delta in deltas {
            self.traces.reputation(t, node, &delta);
        }
        for subject in declared {
            self.declaration_side_effects(node, subject, t);
        }
    }

    // ------------------------------------------------------------------
    // Malicious declaration, fading
    // ------------------------------------------------------------------

    /// Everything that happens once first-hand evidence declared `subject`
    /// malicious at `observer`: one-hop warning, cache purge, route errors
    /// for active flows, and the fading timer.
    fn declaration_side_effects(&mut self, observer: NodeId, subject: NodeId, t: SimTime) {
        self.metrics.malicious_declarations += 1;
        if self.nodes[subject.index()].adversary.is_none() {
            self.metrics.honest_flagged.insert(subject);
        }

        // One-hop warning broadcast, never relayed further.
        let warning_id = {
            let ctx = &mut self.nodes[observer.index()];
            let id = ctx.next_warning_id;
            ctx.next_warning_id += 1;
            id
        };
        let identification = self.nodes[observer.index()].dsr.fresh_ip_id();
        let warning = Packet {
            kind: PacketKind::Warning {
                accuser: observer,
                accused: subject,
                warning_id,
            },
            identity: PacketIdentity {
                source: observer,
                destination: subject,
                protocol: PROTO_CONTROL,
                identification,
                fragment_offset: 0,
            },
            source_route: None,
            size_bytes: sizes::WARNING,
            originated_at: t,
        };
        self.forward_enqueue(observer, warning, None, t);

        // Route errors for flows recently relayed through the subject (as a
        // relay, not as their final destination).
        let affected: Vec<Vec<NodeId>> = {
            let forwards = &mut self.nodes[observer.index()].dsr.recent_forwards;
            let mut affected = Vec::new();
            forwards.retain(|_, (route, last)| {
                let through = route[..route.len() - 1].contains(&subject);
                if through {
                    if t.seconds() - last.seconds() <= ACTIVE_FLOW_HORIZON_S
                        && route
                            .iter()
                            .position(|&h| h == observer)
                            .and_then(|i| route.get(i + 1))
                            == Some(&subject)
                    {
                        affected.push(route.clone());
                    }
                    false
                } else {
                    true
                }
            });
            affected
        };

        // All paths through the subject leave the cache.
        self.nodes[observer.index()].dsr.cache.purge_through(subject);

        for route in affected {
            self.emit_route_error(observer, subject, &route, t);
        }

        // Redemption: fading begins after one quiet inactivity period.
        let timeout = self.cfg.ids.inactivity_timeout_s;
        let overlay = self.nodes[observer.index()].ids.as_mut().unwrap();
        if overlay.fade_scheduled.insert(subject) {
            self.engine.schedule(
                t.after(timeout),
                Ev::FadeCheck {
                    observer,
                    subject,
                },
            );
        }
    }

    fn fade_check(&mut self, observer: NodeId, subject: NodeId, t: SimTime) {
        let timeout = self.cfg.ids.inactivity_timeout_s;
        let outcome = {
            let Some(overlay) = self.nodes[observer.index()].ids.as_mut() else {
                return;
            };
            overlay.fade_scheduled.remove(&subject);
            overlay.reputation.fade_tick(subject, t)
        };
        match outcome {
            FadeOutcome::NotMalicious => {}
            FadeOutcome::CitedRecently { cited_at } => {
                let overlay = self.nodes[observer.index()].ids.as_mut().unwrap();
                if overlay.fade_scheduled.insert(subject) {
                    self.engine
                        .schedule(cited_at.after(timeout), Ev::FadeCheck { observer, subject });
                }
            }
            FadeOutcome::Faded { delta, rejoined } => {
                self.traces.reputation(t, observer, &delta);
                if !rejoined {
                    let overlay = self.nodes[observer.index()].ids.as_mut().unwrap();
                    if overlay.fade_scheduled.insert(subject) {
                        self.engine
                            .schedule(t.after(timeout), Ev::FadeCheck { observer, subject });
                    }
                }
            }
        }
    }

    // ------------------------------------------------------------------
    // Colluding liars
    // ------------------------------------------------------------------

    fn liar_tick(&mut self, node: NodeId, t: SimTime) {
        let Some(profile) = self.nodes[node.index()].adversary.clone() else {
            return;
        };
        if t.seconds() + LIAR_WARNING_PERIOD_S <= profile.active_until_s {
            self.engine
                .schedule(t.after(LIAR_WARNING_PERIOD_S), Ev::LiarTick(node));
        }
        if !profile.active_at(t) {
            return;
        }
        for &victim in &profile.false_accusation_victims {
            if victim == node {
                continue;
            }
            let warning_id = {
                let ctx = &mut self.nodes[node.index()];
                let id = ctx.next_warning_id;
                ctx.next_warning_id += 1;
                id
            };
            let identification = self.nodes[node.index()].dsr.fresh_ip_id();
            let warning = Packet {
                kind: PacketKind::Warning {
                    accuser: node,
                    accused: victim,
                    warning_id,
                },
                identity: PacketIdentity {
                    source: node,
                    destination: victim,
                    protocol: PROTO_CONTROL,
                    identification,
                    fragment_offset: 0,
                },
                source_route: None,
                size_bytes: sizes::WARNING,
                originated_at: t,
            };
            self.forward_enqueue(node, warning, None, t);
        }
    }
}

/// Convenience: build, run and summarize one scenario without traces.
pub fn run_scenario(cfg: ScenarioConfig) -> Result<RunResult, ConfigError> {
    Ok(Simulation::new(cfg, Traces::none())?.run())
}
