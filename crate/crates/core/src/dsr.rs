//! Per-node dynamic source routing state: route cache with
//! reputation-aware ranking, duplicate-request suppression, the send buffer
//! used during discovery, and the passive-acknowledgment machinery (sent
//! registry and matcher).

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::engine::SimTime;
use crate::ids::{self, ReputationClass, ReputationTable};
use crate::packet::{DataKind, Packet, PacketIdentity};
use crate::{NodeId, Scalar};

/// First route discovery retry interval; doubles per attempt.
pub const DISCOVERY_BACKOFF_INITIAL_S: Scalar = 0.5;
/// Ceiling on the discovery retry interval.
pub const DISCOVERY_BACKOFF_MAX_S: Scalar = 10.0;
/// How long one flooded request is considered outstanding.
pub const DISCOVERY_TIMEOUT_S: Scalar = 1.0;
/// Data packets waiting for a route are dropped after this long.
pub const SEND_BUFFER_TIMEOUT_S: Scalar = 30.0;

/// A packet registered for passive acknowledgment: identity plus the
/// segments-left value it was transmitted with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisteredPacket {
    pub identity: PacketIdentity,
    pub segments_left: u8,
}

/// The two passive-acknowledgment tests: the five identity fields must match
/// field-wise, and the overheard packet must carry a source-route header
/// whose segments-left value is strictly below the registered one.
pub fn pack_match(registered: &RegisteredPacket, overheard: &Packet) -> bool {
    if registered.identity != overheard.identity {
        return false;
    }
    match &overheard.source_route {
        Some(route) => route.segments_left < registered.segments_left,
        None => false,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SentEntry {
    pub packet: RegisteredPacket,
    pub sent_at: SimTime,
}

#[derive(Debug, Clone, Default)]
struct NeighborLog {
    pending: Vec<SentEntry>,
    registered: u32,
    packed: u32,
}

/// Per-neighbor registry of forwarded data packets awaiting passive
/// acknowledgment within the current timing window.
#[derive(Debug, Clone, Default)]
pub struct SentRegistry {
    logs: BTreeMap<NodeId, NeighborLog>,
}

/// Counters reported per neighbor at window close.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowCounts {
    pub neighbor: NodeId,
    pub registered: u32,
    pub packed: u32,
}

impl WindowCounts {
    pub fn missing(&self) -> u32 {
        self.registered - self.packed
    }
}

impl SentRegistry {
    /// Registers a packet sent to `next_hop`.
    pub fn register(&mut self, next_hop: NodeId, packet: RegisteredPacket, sent_at: SimTime) {
        let log = self.logs.entry(next_hop).or_default();
        log.pending.push(SentEntry { packet, sent_at });
        log.registered += 1;
    }

    /// Matches an overheard transmission by `transmitter` against its pending
    /// entries; on success the entry is consumed and counted as acknowledged.
    pub fn try_pack(&mut self, transmitter: NodeId, overheard: &Packet) -> Option<RegisteredPacket> {
        let log = self.logs.get_mut(&transmitter)?;
        let idx = log
            .pending
            .iter()
            .position(|e| pack_match(&e.packet, overheard))?;
        let entry = log.pending.remove(idx);
        log.packed += 1;
        Some(entry.packet)
    }

    /// Per-neighbor counts for the closing window, ascending by neighbor id.
    pub fn window_counts(&self) -> Vec<WindowCounts> {
        self.logs
            .iter()
            .map(|(&neighbor, log)| WindowCounts {
                neighbor,
                registered: log.registered,
                packed: log.packed,
            })
            .collect()
    }

    /// Clears all entries and counters at a window boundary.
    pub fn clear_window(&mut self) {
        self.logs.clear();
    }

    /// Clears the activity log of one neighbor (the route-error rule).
    pub fn clear_neighbor(&mut self, neighbor: NodeId) {
        self.logs.remove(&neighbor);
    }

    pub fn pending_total(&self) -> usize {
        self.logs.values().map(|l| l.pending.len()).sum()
    }
}

/// Ranked set of source routes from the owning node. Routes are stored in
/// insertion order; ranking happens at selection time against the current
/// reputation table.
#[derive(Debug, Clone, Default)]
pub struct RouteCache {
    routes: Vec<Vec<NodeId>>,
}

impl RouteCache {
    /// Inserts a route (self .. destination); duplicates are ignored.
    pub fn insert(&mut self, route: Vec<NodeId>) -> bool {
        debug_assert!(route.len() >= 2);
        if self.routes.contains(&route) {
            return false;
        }
        self.routes.push(route);
        true
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<NodeId>> {
        self.routes.iter()
    }

    /// Removes every route passing through `node` as a relay. A route whose
    /// final destination is `node` survives: transactions *through* a
    /// blocked node are refused, delivery *to* it cannot be rerouted.
    pub fn purge_through(&mut self, node: NodeId) {
        self.routes
            .retain(|r| !r[..r.len() - 1].contains(&node));
    }

    /// Removes every route using the directed link `from -> to`.
    pub fn purge_link(&mut self, from: NodeId, to: NodeId) {
        self.routes
            .retain(|r| !r.windows(2).any(|w| w[0] == from && w[1] == to));
    }

    /// Selects the best cached route to `destination`.
    ///
    /// With a reputation table: routes containing a malicious node are
    /// excluded; all-clean routes (every interior node normal) are preferred
    /// over those containing suspicious nodes; within a tier the path
    /// priority formula ranks, then hop count, then the hop list itself as a
    /// deterministic tie break. Without a table (plain DSR) ranking is by
    /// hop count alone.
    pub fn select_route(
        &self,
        destination: NodeId,
        reputation: Option<&ReputationTable>,
    ) -> Option<&Vec<NodeId>> {
        let candidates = self
            .routes
            .iter()
            .filter(|r| *r.last().unwrap() == destination)
            .filter(|r| match reputation {
                // No relaying through malicious nodes; the destination
                // itself is beyond choice.
                Some(table) => !r[..r.len() - 1].iter().any(|&n| table.is_malicious(n)),
                None => true,
            });
        match reputation {
            Some(table) => candidates.min_by(|a, b| {
                let key = |r: &Vec<NodeId>| {
                    let interior = &r[1..r.len() - 1];
                    let clean = interior
                        .iter()
                        .all(|&n| table.class_of(n) == ReputationClass::Normal);
                    let hops = r.len() - 1;
                    let priority = ids::path_priority(table.min_value_over(interior), hops);
                    (clean, priority, hops)
                };
                let (a_clean, a_prio, a_hops) = key(a);
                let (b_clean, b_prio, b_hops) = key(b);
                b_clean
                    .cmp(&a_clean)
                    .then(b_prio.total_cmp(&a_prio))
                    .then(a_hops.cmp(&b_hops))
                    .then(a.cmp(b))
            }),
            None => candidates.min_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b))),
        }
    }

    /// Witness hop for a knock test: the node following `target` in the most
    /// recently learned route through it, falling back to any other node
    /// adjacent to `target` in a cached route. `exclude` (the prober) is
    /// never returned.
    pub fn knock_witness(&self, target: NodeId, exclude: NodeId) -> Option<NodeId> {
        for route in self.routes.iter().rev() {
            if let Some(i) = route.iter().position(|&n| n == target) {
                if i + 1 < route.len() && route[i + 1] != exclude {
                    return Some(route[i + 1]);
                }
            }
        }
        for route in self.routes.iter().rev() {
            if let Some(i) = route.iter().position(|&n| n == target) {
                if i > 0 && route[i - 1] != exclude {
                    return Some(route[i - 1]);
                }
            }
        }
        None
    }
}

/// A data packet parked while discovery runs.
#[derive(Debug, Clone)]
pub struct PendingData {
    pub data: DataKind,
    pub identity: PacketIdentity,
    pub originated_at: SimTime,
}

/// Discovery pacing per target: exponential backoff between floods.
#[derive(Debug, Clone, Copy)]
pub struct DiscoveryState {
    pub next_allowed: SimTime,
    pub backoff_s: Scalar,
    pub outstanding_until: SimTime,
}

/// Per-node DSR protocol state.
#[derive(Debug, Clone)]
pub struct DsrState {
    pub cache: RouteCache,
    pub registry: SentRegistry,
    seen_requests: BTreeSet<(NodeId, u32)>,
    next_request_id: u32,
    next_ip_id: u16,
    pub send_buffer: VecDeque<PendingData>,
    send_buffer_capacity: usize,
    discovery: BTreeMap<NodeId, DiscoveryState>,
    /// Routes recently forwarded on, per (source, destination) flow; lets a
    /// relay report a broken or newly-malicious next hop back to the source.
    pub recent_forwards: BTreeMap<(NodeId, NodeId), (Vec<NodeId>, SimTime)>,
}

impl DsrState {
    pub fn new(send_buffer_capacity: usize) -> Self {
        DsrState {
            cache: RouteCache::default(),
            registry: SentRegistry::default(),
            seen_requests: BTreeSet::new(),
            next_request_id: 0,
            next_ip_id: 0,
            send_buffer: VecDeque::new(),
            send_buffer_capacity,
            discovery: BTreeMap::new(),
            recent_forwards: BTreeMap::new(),
        }
    }

    pub fn fresh_request_id(&mut self) -> u32 {
        let id = self.next_request_id;
        self.next_request_id += 1;
        id
    }

    pub fn fresh_ip_id(&mut self) -> u16 {
        let id = self.next_ip_id;
        self.next_ip_id = self.next_ip_id.wrapping_add(1);
        id
    }

    /// Records a request id; returns false if it was already seen.
    pub fn note_request(&mut self, originator: NodeId, request_id: u32) -> bool {
        self.seen_requests.insert((originator, request_id))
    }

    /// Parks a data packet during discovery. Returns false on overflow (a
    /// congestion drop).
    pub fn buffer_data(&mut self, pending: PendingData) -> bool {
        if self.send_buffer.len() >= self.send_buffer_capacity {
            return false;
        }
        self.send_buffer.push_back(pending);
        true
    }

    /// Whether a new discovery flood toward `target` may start at `now`,
    /// honoring the retry backoff and the outstanding-request window.
    pub fn may_discover(&self, target: NodeId, now: SimTime) -> bool {
        match self.discovery.get(&target) {
            None => true,
            Some(d) => now >= d.next_allowed && now >= d.outstanding_until,
        }
    }

    /// Marks a discovery flood toward `target` as started, doubling the
    /// retry backoff.
    pub fn note_discovery(&mut self, target: NodeId, now: SimTime) {
        let state = self
            .discovery
            .entry(target)
            .or_insert_with(|| DiscoveryState {
                next_allowed: now,
                backoff_s: DISCOVERY_BACKOFF_INITIAL_S,
                outstanding_until: now,
            });
        state.outstanding_until = now.after(DISCOVERY_TIMEOUT_S);
        state.next_allowed = now.after(state.backoff_s);
        state.backoff_s = (state.backoff_s * 2.0).min(DISCOVERY_BACKOFF_MAX_S);
    }

    /// Resets the discovery backoff once a usable route to `target` exists.
    pub fn note_route_found(&mut self, target: NodeId) {
        self.discovery.remove(&target);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::{Channel, IdsConstants};
    use crate::packet::{PacketKind, SourceRoute};

    fn n(i: u16) -> NodeId {
        NodeId(i)
    }

    fn identity(id: u16) -> PacketIdentity {
        PacketIdentity {
            source: n(0),
            destination: n(3),
            protocol: 17,
            identification: id,
            fragment_offset: 0,
        }
    }

    fn data_packet(id: u16, segments_left: u8) -> Packet {
        let mut route = SourceRoute::new(vec![n(0), n(1), n(2), n(3)]);
        route.segments_left = segments_left;
        Packet {
            kind: PacketKind::Data {
                data: DataKind::Cbr { flow: 0 },
            },
            identity: identity(id),
            source_route: Some(route),
            size_bytes: 64,
            originated_at: SimTime::ZERO,
        }
    }

    #[test]
    fn pack_match_requires_smaller_segments_left() {
        let reg = RegisteredPacket {
            identity: identity(7),
            segments_left: 3,
        };
        assert!(pack_match(&reg, &data_packet(7, 2)));
        assert!(!pack_match(&reg, &data_packet(7, 3)));
        assert!(!pack_match(&reg, &data_packet(8, 2)));
        let mut bare = data_packet(7, 2);
        bare.source_route = None;
        assert!(!pack_match(&reg, &bare));
    }

    #[test]
    fn registry_counts_and_window_clear() {
        let mut reg = SentRegistry::default();
        let t = SimTime(1.0);
        reg.register(
            n(1),
            RegisteredPacket {
                identity: identity(1),
                segments_left: 3,
            },
            t,
        );
        reg.register(
            n(1),
            RegisteredPacket {
                identity: identity(2),
                segments_left: 3,
            },
            t,
        );
        assert!(reg.try_pack(n(1), &data_packet(1, 2)).is_some());
        // Same transmission matched against a different neighbor: no entry.
        assert!(reg.try_pack(n(2), &data_packet(2, 2)).is_none());
        let counts = reg.window_counts();
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[0].registered, 2);
        assert_eq!(counts[0].packed, 1);
        assert_eq!(counts[0].missing(), 1);
        reg.clear_window();
        assert!(reg.window_counts().is_empty());
    }

    #[test]
    fn registry_clear_neighbor_drops_its_log() {
        let mut reg = SentRegistry::default();
        reg.register(
            n(1),
            RegisteredPacket {
                identity: identity(1),
                segments_left: 3,
            },
            SimTime(0.1),
        );
        reg.register(
            n(2),
            RegisteredPacket {
                identity: identity(2),
                segments_left: 3,
            },
            SimTime(0.1),
        );
        reg.clear_neighbor(n(1));
        let counts = reg.window_counts();
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[0].neighbor, n(2));
    }

    #[test]
    fn cache_ranking_prefers_clean_then_priority() {
        let mut cache = RouteCache::default();
        cache.insert(vec![n(0), n(1), n(2), n(9)]); // 3 hops, clean
        cache.insert(vec![n(0), n(3), n(9)]); // 2 hops, clean
        let mut table = ReputationTable::new(IdsConstants::default());
        // Equal min reputation (0): the 2-hop route wins by the formula.
        let best = cache.select_route(n(9), Some(&table)).unwrap();
        assert_eq!(best, &vec![n(0), n(3), n(9)]);

        // Make node 3 suspicious: the clean 3-hop route now outranks it.
        for _ in 0..18 {
            table.second_hand(n(3), Channel::Warning, SimTime(1.0));
        }
        let best = cache.select_route(n(9), Some(&table)).unwrap();
        assert_eq!(best, &vec![n(0), n(1), n(2), n(9)]);

        // Declare node 1 malicious: its route is excluded outright.
        table.knock_failed(n(1));
        let best = cache.select_route(n(9), Some(&table)).unwrap();
        assert_eq!(best, &vec![n(0), n(3), n(9)]);
        table.knock_failed(n(3));
        assert!(cache.select_route(n(9), Some(&table)).is_none());
    }

    #[test]
    fn plain_ranking_is_by_hop_count() {
        let mut cache = RouteCache::default();
        cache.insert(vec![n(0), n(1), n(2), n(9)]);
        cache.insert(vec![n(0), n(3), n(9)]);
        assert_eq!(
            cache.select_route(n(9), None).unwrap(),
            &vec![n(0), n(3), n(9)]
        );
    }

    #[test]
    fn cache_purges() {
        let mut cache = RouteCache::default();
        cache.insert(vec![n(0), n(1), n(9)]);
        cache.insert(vec![n(0), n(2), n(9)]);
        cache.insert(vec![n(0), n(2), n(1), n(9)]);
        cache.insert(vec![n(0), n(2), n(1)]); // route *to* node 1 survives
        cache.purge_through(n(1));
        assert_eq!(cache.len(), 2);
        let mut cache = RouteCache::default();
        cache.insert(vec![n(0), n(1), n(9)]);
        cache.insert(vec![n(0), n(9), n(1)]);
        cache.purge_link(n(1), n(9));
        assert_eq!(cache.len(), 1);
    }

    #[test]
    fn malicious_destination_still_routable() {
        let mut cache = RouteCache::default();
        cache.insert(vec![n(0), n(2), n(5)]);
        let mut table = ReputationTable::new(IdsConstants::default());
        table.knock_failed(n(5));
        assert_eq!(
            cache.select_route(n(5), Some(&table)).unwrap(),
            &vec![n(0), n(2), n(5)]
        );
        // But not through it.
        cache.insert(vec![n(0), n(5), n(7)]);
        assert!(cache.select_route(n(7), Some(&table)).is_none());
    }

    #[test]
    fn knock_witness_prefers_latest_downstream_hop() {
        let mut cache = RouteCache::default();
        cache.insert(vec![n(0), n(5), n(7), n(9)]);
        cache.insert(vec![n(0), n(5), n(8)]);
        assert_eq!(cache.knock_witness(n(5), n(0)), Some(n(8)));
        // Target only ever appears as a terminal hop: fall back to the node
        // before it.
        let mut cache = RouteCache::default();
        cache.insert(vec![n(0), n(4), n(5)]);
        assert_eq!(cache.knock_witness(n(5), n(0)), Some(n(4)));
        assert_eq!(cache.knock_witness(n(6), n(0)), None);
        // The prober itself is never a witness.
        let mut cache = RouteCache::default();
        cache.insert(vec![n(0), n(5), n(0)]); // degenerate, but exercised
        assert_eq!(cache.knock_witness(n(5), n(0)), None);
    }

    #[test]
    fn discovery_backoff_doubles_and_resets() {
        let mut s = DsrState::new(50);
        assert!(s.may_discover(n(9), SimTime(0.0)));
        s.note_discovery(n(9), SimTime(0.0));
        assert!(!s.may_discover(n(9), SimTime(0.4)));
        // Outstanding window (1 s) dominates the first 0.5 s backoff.
        assert!(!s.may_discover(n(9), SimTime(0.8)));
        assert!(s.may_discover(n(9), SimTime(1.0)));
        s.note_discovery(n(9), SimTime(1.0));
        assert!(!s.may_discover(n(9), SimTime(1.9)));
        assert!(s.may_discover(n(9), SimTime(2.0)));
        s.note_route_found(n(9));
        assert!(s.may_discover(n(9), SimTime(2.0)));
    }

    #[test]
    fn send_buffer_overflow() {
        let mut s = DsrState::new(2);
        let pending = |id| PendingData {
            data: DataKind::Cbr { flow: 0 },
            identity: identity(id),
            originated_at: SimTime::ZERO,
        };
        assert!(s.buffer_data(pending(1)));
        assert!(s.buffer_data(pending(2)));
        assert!(!s.buffer_data(pending(3)));
    }

    #[test]
    fn duplicate_request_ids_are_flagged() {
        let mut s = DsrState::new(50);
        assert!(s.note_request(n(1), 0));
        assert!(!s.note_request(n(1), 0));
        assert!(s.note_request(n(1), 1));
        assert!(s.note_request(n(2), 0));
    }
}
