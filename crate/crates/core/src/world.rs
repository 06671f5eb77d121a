//! Physical layer: random-waypoint mobility, unit-disk radio with
//! promiscuous overhearing, and per-node interface queues feeding the
//! congestion parameter.

use crate::engine::{RngStreams, SimTime, StreamId};
use crate::num::lerp;
use crate::{NodeId, Scalar};

/// A point inside the field rectangle, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: Scalar,
    pub y: Scalar,
}

impl Position {
    pub fn distance_to(self, other: Position) -> Scalar {
        self.distance_sq(other).sqrt()
    }

    pub fn distance_sq(self, other: Position) -> Scalar {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Radio and link-layer parameters.
#[derive(Debug, Clone, Copy)]
pub struct RadioParams {
    /// Reception range in meters; the boundary is inclusive.
    pub range_m: Scalar,
    /// Link bandwidth in bits per second.
    pub bandwidth_bps: Scalar,
    /// Extra per-hop processing delay in seconds.
    pub per_hop_processing_delay_s: Scalar,
}

impl RadioParams {
    /// Serialization delay of `bits` on this link.
    pub fn transmission_delay(&self, bits: u64) -> Scalar {
        bits as Scalar / self.bandwidth_bps
    }
}

/// One movement leg or pause of the random waypoint model.
#[derive(Debug, Clone)]
pub enum Motion {
    /// Holding position until `until` (destination reached, or initial pause).
    Paused { at: Position, until: SimTime },
    /// Straight-line leg at constant speed.
    Moving {
        origin: Position,
        destination: Position,
        speed_mps: Scalar,
        depart_at: SimTime,
    },
}

impl Motion {
    fn arrival_time(&self) -> Option<SimTime> {
        match self {
            Motion::Paused { .. } => None,
            Motion::Moving {
                origin,
                destination,
                speed_mps,
                depart_at,
            } => {
                let dist = origin.distance_to(*destination);
                Some(depart_at.after(dist / speed_mps))
            }
        }
    }

    fn position_at(&self, t: SimTime) -> Position {
        match *self {
            Motion::Paused { at, .. } => at,
            Motion::Moving {
                origin,
                destination,
                speed_mps,
                depart_at,
            } => {
                if t <= depart_at {
                    return origin;
                }
                let dist = origin.distance_to(destination);
                if dist == 0.0 {
                    return destination;
                }
                let travelled = (t.seconds() - depart_at.seconds()) * speed_mps;
                if travelled >= dist {
                    return destination;
                }
                let s = travelled / dist;
                Position {
                    x: lerp(origin.x, destination.x, s),
                    y: lerp(origin.y, destination.y, s),
                }
            }
        }
    }
}

/// Scripted waypoint record loaded from a movement-trace file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceWaypoint {
    pub node: NodeId,
    pub time: Scalar,
    pub x: Scalar,
    pub y: Scalar,
    pub speed_mps: Scalar,
}

/// Mobility driver: either the random waypoint model or a scripted trace.
#[derive(Debug, Clone)]
pub enum MobilityModel {
    RandomWaypoint {
        max_speed_mps: Scalar,
        pause_time_s: Scalar,
    },
    /// Per-node waypoint scripts, each sorted by time. The earliest record
    /// fixes the initial position; later records start a leg toward (x, y)
    /// at the given speed.
    Scripted(Vec<Vec<TraceWaypoint>>),
}

/// Drop-tail interface queue. Occupancy counts packets awaiting
/// transmission; `occupancy / capacity` is exactly the congestion parameter.
#[derive(Debug, Clone)]
pub struct InterfaceQueue<T> {
    capacity: usize,
    items: std::collections::VecDeque<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnqueueResult {
    Accepted,
    /// Queue full: drop-tail, a congestion drop.
    DropTail,
}

impl<T> InterfaceQueue<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "queue capacity must be positive");
        InterfaceQueue {
            capacity,
            items: Default::default(),
        }
    }

    pub fn occupancy(&self) -> usize {
        self.items.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn enqueue(&mut self, item: T) -> EnqueueResult {
        if self.items.len() >= self.capacity {
            return EnqueueResult::DropTail;
        }
        self.items.push_back(item);
        EnqueueResult::Accepted
    }

    pub fn dequeue(&mut self) -> Option<T> {
        self.items.pop_front()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }
}

/// Field geometry plus per-node motion state.
pub struct World {
    pub field_width_m: Scalar,
    pub field_height_m: Scalar,
    pub radio: RadioParams,
    motions: Vec<Motion>,
    mobility: MobilityModel,
    /// Index of the next scripted waypoint per node (Scripted only).
    script_cursor: Vec<usize>,
}

impl World {
    /// Places `node_count` nodes uniformly over the field (placement stream)
    /// and leaves every node paused at its initial position. For the random
    /// waypoint model the first departure happens after one pause time; a
    /// scripted model follows its records.
    pub fn new(
        node_count: usize,
        field_width_m: Scalar,
        field_height_m: Scalar,
        radio: RadioParams,
        mobility: MobilityModel,
        streams: &mut RngStreams,
    ) -> World {
        let mut motions = Vec::with_capacity(node_count);
        match &mobility {
            MobilityModel::RandomWaypoint { pause_time_s, .. } => {
                for _ in 0..node_count {
                    let at = Position {
                        x: streams.uniform(StreamId::Placement, 0.0, field_width_m),
                        y: streams.uniform(StreamId::Placement, 0.0, field_height_m),
                    };
                    motions.push(Motion::Paused {
                        at,
                        until: SimTime(*pause_time_s),
                    });
                }
            }
            MobilityModel::Scripted(scripts) => {
                assert_eq!(scripts.len(), node_count, "trace covers every node");
                for script in scripts {
                    let first = script.first().expect("empty movement script");
                    motions.push(Motion::Paused {
                        at: Position {
                            x: first.x,
                            y: first.y,
                        },
                        until: SimTime(
                            script.get(1).map(|w| w.time).unwrap_or(Scalar::INFINITY),
                        ),
                    });
                }
            }
        }
        World {
            field_width_m,
            field_height_m,
            radio,
            motions,
            script_cursor: vec![1; node_count],
            mobility,
        }
    }

    pub fn node_count(&self) -> usize {
        self.motions.len()
    }

    /// Current position: linear interpolation along the active leg, or the
    /// held position while paused.
    pub fn position_at(&self, node: NodeId, t: SimTime) -> Position {
        self.motions[node.index()].position_at(t)
    }

    /// Time of the next motion change for `node` (leg arrival or pause end),
    /// used to schedule mobility events.
    pub fn next_motion_change(&self, node: NodeId) -> SimTime {
        match &self.motions[node.index()] {
            Motion::Paused { until, .. } => *until,
            m => m.arrival_time().unwrap(),
        }
    }

    /// Advances `node` past a motion-change instant at time `t`: a finished
    /// leg becomes a pause, an elapsed pause becomes a fresh leg. Returns the
    /// time of the following change.
    pub fn advance_motion(&mut self, node: NodeId, t: SimTime, streams: &mut RngStreams) -> SimTime {
        let current = self.motions[node.index()].clone();
        let next = match current {
            Motion::Moving { destination, .. } => {
                let until = match &self.mobility {
                    MobilityModel::RandomWaypoint { pause_time_s, .. } => t.after(*pause_time_s),
                    MobilityModel::Scripted(scripts) => {
                        let cursor = self.script_cursor[node.index()];
                        // A leg that overran the next record departs at once.
                        SimTime(
                            scripts[node.index()]
                                .get(cursor)
                                .map(|w| w.time.max(t.seconds()))
                                .unwrap_or(Scalar::INFINITY),
                        )
                    }
                };
                Motion::Paused {
                    at: destination,
                    until,
                }
            }
            Motion::Paused { at, .. } => match &self.mobility {
                MobilityModel::RandomWaypoint { max_speed_mps, .. } => {
                    let destination = Position {
                        x: streams.uniform(StreamId::Mobility(node.0), 0.0, self.field_width_m),
                        y: streams.uniform(StreamId::Mobility(node.0), 0.0, self.field_height_m),
                    };
                    // Speed uniform in (0, max]: zero would never terminate
                    // the leg.
                    let u = streams.uniform(StreamId::Mobility(node.0), 0.0, 1.0);
                    let speed_mps = (1.0 - u) * max_speed_mps;
                    Motion::Moving {
                        origin: at,
                        destination,
                        speed_mps,
                        depart_at: t,
                    }
                }
                MobilityModel::Scripted(scripts) => {
                    let cursor = &mut self.script_cursor[node.index()];
                    match scripts[node.index()].get(*cursor) {
                        Some(w) => {
                            *cursor += 1;
                            Motion::Moving {
                                origin: at,
                                destination: Position { x: w.x, y: w.y },
                                speed_mps: w.speed_mps.max(Scalar::MIN_POSITIVE),
                                depart_at: t,
                            }
                        }
                        None => Motion::Paused {
                            at,
                            until: SimTime(Scalar::INFINITY),
                        },
                    }
                }
            },
        };
        self.motions[node.index()] = next;
        self.next_motion_change(node)
    }

    /// Nodes within radio range of `node` at `t`, boundary inclusive,
    /// excluding `node` itself, in ascending id order.
    pub fn neighbors_of(&self, node: NodeId, t: SimTime) -> Vec<NodeId> {
        let here = self.position_at(node, t);
        let range_sq = self.radio.range_m * self.radio.range_m;
        (0..self.motions.len() as u16)
            .map(NodeId)
            .filter(|&other| other != node)
            .filter(|&other| self.position_at(other, t).distance_sq(here) <= range_sq)
            .collect()
    }

    pub fn in_range(&self, a: NodeId, b: NodeId, t: SimTime) -> bool {
        let range_sq = self.radio.range_m * self.radio.range_m;
        self.position_at(a, t).distance_sq(self.position_at(b, t)) <= range_sq
    }
}

/// Parses a movement-trace file: one whitespace-separated record per line,
/// `node time x y speed`, `#` comments allowed. Records are grouped per node
/// and sorted by time; the earliest record per node is its initial position.
pub fn parse_movement_trace(
    text: &str,
    node_count: usize,
) -> Result<Vec<Vec<TraceWaypoint>>, String> {
    let mut scripts: Vec<Vec<TraceWaypoint>> = vec![Vec::new(); node_count];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(format!(
                "movement trace line {}: expected 5 fields (node time x y speed), got {}",
                lineno + 1,
                fields.len()
            ));
        }
        let parse = |what: &str, s: &str| -> Result<Scalar, String> {
            s.parse::<Scalar>()
                .map_err(|_| format!("movement trace line {}: bad {what} '{s}'", lineno + 1))
        };
        let node: u16 = fields[0]
            .parse()
            .map_err(|_| format!("movement trace line {}: bad node id '{}'", lineno + 1, fields[0]))?;
        if node as usize >= node_count {
            return Err(format!(
                "movement trace line {}: node {} out of range (node count {})",
                lineno + 1,
                node,
                node_count
            ));
        }
        scripts[node as usize].push(TraceWaypoint {
            node: NodeId(node),
            time: parse("time", fields[1])?,
            x: parse("x", fields[2])?,
            y: parse("y", fields[3])?,
            speed_mps: parse("speed", fields[4])?,
        });
    }
    for (i, script) in scripts.iter_mut().enumerate() {
        if script.is_empty() {
            return Err(format!("movement trace has no records for node {i}"));
        }
        script.sort_by(|a, b| a.time.total_cmp(&b.time));
    }
    Ok(scripts)
}
