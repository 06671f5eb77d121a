//! Misbehavior profiles. The baseline attacker silently discards almost all
//! relayed data packets while cooperating fully on routing traffic, so it
//! keeps getting itself onto routes.

use crate::engine::{RngStreams, SimTime, StreamId};
use crate::packet::Packet;
use crate::{NodeId, Scalar};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdversaryProfile {
    /// Probability of silently dropping a relayed data packet.
    pub drop_probability: Scalar,
    /// Whether routing packets (RREQ/RREP/RERR) are dropped too. The
    /// baseline attacker forwards them: a full black hole excludes itself
    /// from every route and ends up harmless.
    pub drops_routing: bool,
    /// Active window; outside it the node behaves honestly.
    pub active_from_s: Scalar,
    pub active_until_s: Scalar,
    /// Colluding-liar extension: victims to spread false warnings about.
    pub false_accusation_victims: Vec<NodeId>,
}

impl Default for AdversaryProfile {
    fn default() -> Self {
        AdversaryProfile {
            drop_probability: 0.99,
            drops_routing: false,
            active_from_s: 0.0,
            active_until_s: Scalar::INFINITY,
            false_accusation_victims: Vec::new(),
        }
    }
}

impl AdversaryProfile {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.drop_probability) {
            return Err("drop probability must lie in [0, 1]".into());
        }
        if self.active_from_s > self.active_until_s {
            return Err("adversary active window is reversed".into());
        }
        Ok(())
    }

    pub fn active_at(&self, t: SimTime) -> bool {
        (self.active_from_s..=self.active_until_s).contains(&t.seconds())
    }

    /// Drop decision for a packet this node relays (it is neither source nor
    /// destination). Data packets are dropped with `drop_probability` using
    /// the adversary stream; routing packets only when `drops_routing`.
    pub fn should_drop(&self, pkt: &Packet, t: SimTime, streams: &mut RngStreams) -> bool {
        if !self.active_at(t) {
            return false;
        }
        if pkt.kind.is_data() {
            streams.chance(StreamId::Adversary, self.drop_probability)
        } else {
            self.drops_routing
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::SimTime;
    use crate::packet::{DataKind, PacketIdentity, PacketKind, RreqHeader, SourceRoute};

    fn data() -> Packet {
        Packet {
            kind: PacketKind::Data {
                data: DataKind::Cbr { flow: 0 },
            },
            identity: PacketIdentity {
                source: NodeId(0),
                destination: NodeId(2),
                protocol: 17,
                identification: 0,
                fragment_offset: 0,
            },
            source_route: Some(SourceRoute::new(vec![NodeId(0), NodeId(1), NodeId(2)])),
            size_bytes: 64,
            originated_at: SimTime::ZERO,
        }
    }

    fn rreq() -> Packet {
        Packet {
            kind: PacketKind::RouteRequest(RreqHeader {
                originator: NodeId(0),
                request_id: 0,
                target: NodeId(2),
                accumulated: vec![NodeId(0)],
                avoid_list: vec![],
            }),
            identity: PacketIdentity {
                source: NodeId(0),
                destination: NodeId(2),
                protocol: 0,
                identification: 0,
                fragment_offset: 0,
            },
            source_route: None,
            size_bytes: 36,
            originated_at: SimTime::ZERO,
        }
    }

    #[test]
    fn drop_fraction_tracks_probability() {
        let profile = AdversaryProfile::default();
        let mut streams = RngStreams::new(123);
        let trials = 10_000;
        let drops = (0..trials)
            .filter(|_| profile.should_drop(&data(), SimTime(1.0), &mut streams))
            .count();
        let fraction = drops as f64 / trials as f64;
        assert!((fraction - 0.99).abs() < 0.005, "fraction {fraction}");
    }

    #[test]
    fn routing_packets_pass_through() {
        let profile = AdversaryProfile::default();
        let mut streams = RngStreams::new(123);
        for _ in 0..100 {
            assert!(!profile.should_drop(&rreq(), SimTime(1.0), &mut streams));
        }
    }

    #[test]
    fn zero_probability_behaves_honestly() {
        let profile = AdversaryProfile {
            drop_probability: 0.0,
            ..Default::default()
        };
        let mut streams = RngStreams::new(123);
        for _ in 0..100 {
            assert!(!profile.should_drop(&data(), SimTime(1.0), &mut streams));
        }
    }

    #[test]
    fn inactive_window_is_honest() {
        let profile = AdversaryProfile {
            active_from_s: 100.0,
            active_until_s: 200.0,
            ..Default::default()
        };
        let mut streams = RngStreams::new(123);
        assert!(!profile.should_drop(&data(), SimTime(50.0), &mut streams));
        assert!(profile.should_drop(&data(), SimTime(150.0), &mut streams) || {
            // 1% forwarding chance; retry a few times.
            (0..100).any(|_| profile.should_drop(&data(), SimTime(150.0), &mut streams))
        });
    }
}
