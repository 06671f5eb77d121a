//! Packets and source-route headers.

use crate::engine::SimTime;
use crate::NodeId;

/// IP-header fields whose field-wise equality identifies a packet for
/// passive-acknowledgment matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PacketIdentity {
    pub source: NodeId,
    pub destination: NodeId,
    pub protocol: u8,
    pub identification: u16,
    pub fragment_offset: u16,
}

impl std::fmt::Display for PacketIdentity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({},{},{},{},{})",
            self.source, self.destination, self.protocol, self.identification, self.fragment_offset
        )
    }
}

/// Full hop list from source to destination plus the remaining-transmissions
/// countdown.
///
/// `segments_left` starts at the number of hops (`hops.len() - 1`) and is
/// decremented by each transmitting node, so a delivered packet carries zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceRoute {
    pub hops: Vec<NodeId>,
    pub segments_left: u8,
}

impl SourceRoute {
    pub fn new(hops: Vec<NodeId>) -> Self {
        debug_assert!(hops.len() >= 2, "a route needs at least two nodes");
        debug_assert!(no_duplicates(&hops), "route contains a repeated node");
        let segments_left = (hops.len() - 1) as u8;
        SourceRoute {
            hops,
            segments_left,
        }
    }

    /// Number of hop transmissions end to end.
    pub fn hop_count(&self) -> usize {
        self.hops.len() - 1
    }

    /// Nodes strictly between source and destination.
    pub fn interior(&self) -> &[NodeId] {
        &self.hops[1..self.hops.len() - 1]
    }

    pub fn source(&self) -> NodeId {
        self.hops[0]
    }

    pub fn destination(&self) -> NodeId {
        *self.hops.last().unwrap()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.hops.contains(&node)
    }

    /// Contains the directed link `from -> to` as adjacent hops.
    pub fn contains_link(&self, from: NodeId, to: NodeId) -> bool {
        self.hops.windows(2).any(|w| w[0] == from && w[1] == to)
    }

    /// Position of `node` along the route, if present.
    pub fn position_of(&self, node: NodeId) -> Option<usize> {
        self.hops.iter().position(|&h| h == node)
    }

    /// Next hop after `node`, if `node` is on the route and not the end.
    pub fn next_hop_after(&self, node: NodeId) -> Option<NodeId> {
        self.position_of(node)
            .and_then(|i| self.hops.get(i + 1).copied())
    }
}

pub fn no_duplicates(nodes: &[NodeId]) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    nodes.iter().all(|&n| seen.insert(n))
}

/// Route-request header flooded during discovery. The avoid list carries the
/// union of the malicious-node lists of the originator and every relay so
/// far, duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RreqHeader {
    pub originator: NodeId,
    pub request_id: u32,
    pub target: NodeId,
    /// Route accumulated so far, starting with the originator.
    pub accumulated: Vec<NodeId>,
    pub avoid_list: Vec<NodeId>,
}

impl RreqHeader {
    /// Appends `nodes` to the avoid list, skipping entries already present.
    pub fn extend_avoid_list(&mut self, nodes: &[NodeId]) {
        for &n in nodes {
            if !self.avoid_list.contains(&n) {
                self.avoid_list.push(n);
            }
        }
    }
}

/// Payload kind of a data packet. Knock probes travel as ordinary data so a
/// dropper cannot tell them apart, but they are excluded from delivery
/// metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    /// CBR payload belonging to flow `flow`.
    Cbr { flow: usize },
    /// Knock-test dummy packet issued by `prober`.
    KnockProbe { prober: NodeId },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PacketKind {
    Data { data: DataKind },
    RouteRequest(RreqHeader),
    RouteReply {
        /// The discovered forward route (originator .. target).
        discovered: Vec<NodeId>,
    },
    RouteError {
        /// Node that detected the break and generated the error.
        reporter: NodeId,
        /// Broken directed link.
        from: NodeId,
        to: NodeId,
    },
    Warning {
        accuser: NodeId,
        accused: NodeId,
        warning_id: u32,
    },
}

impl PacketKind {
    pub fn label(&self) -> &'static str {
        match self {
            PacketKind::Data {
                data: DataKind::Cbr { .. },
            } => "DATA",
            PacketKind::Data {
                data: DataKind::KnockProbe { .. },
            } => "PROBE",
            PacketKind::RouteRequest(_) => "RREQ",
            PacketKind::RouteReply { .. } => "RREP",
            PacketKind::RouteError { .. } => "RERR",
            PacketKind::Warning { .. } => "WARN",
        }
    }

    pub fn is_data(&self) -> bool {
        matches!(self, PacketKind::Data { .. })
    }

    /// Routing control traffic as counted by the overhead metric.
    pub fn is_routing_control(&self) -> bool {
        matches!(
            self,
            PacketKind::RouteRequest(_) | PacketKind::RouteReply { .. } | PacketKind::RouteError { .. }
        )
    }
}

/// A simulated packet. `source_route` is present on source-routed traffic
/// (data, replies and errors travel the listed hops; requests are flooded).
#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub kind: PacketKind,
    pub identity: PacketIdentity,
    pub source_route: Option<SourceRoute>,
    pub size_bytes: u32,
    pub originated_at: SimTime,
}

impl Packet {
    pub fn size_bits(&self) -> u64 {
        self.size_bytes as u64 * 8
    }
}

/// Wire sizes in bytes. Data packets are 64 B as configured by the traffic
/// model; control sizes follow conventional simulator encodings (fixed base
/// plus four bytes per listed node).
pub mod sizes {
    pub const CONTROL_BASE: u32 = 32;
    pub const PER_NODE_ENTRY: u32 = 4;
    pub const WARNING: u32 = 24;

    pub fn rreq(accumulated: usize, avoid: usize) -> u32 {
        CONTROL_BASE + PER_NODE_ENTRY * (accumulated + avoid) as u32
    }

    pub fn rrep(route: usize) -> u32 {
        CONTROL_BASE + PER_NODE_ENTRY * route as u32
    }

    pub fn rerr() -> u32 {
        CONTROL_BASE
    }
}
