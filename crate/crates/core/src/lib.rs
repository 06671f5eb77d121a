//! Deterministic discrete-event simulator of mobile ad-hoc networks running
//! dynamic source routing, with an optional reputation-based intrusion
//! detection overlay and a batch metrics harness.
//!
//! The crate is organized around the pieces of a single simulation run:
//!
//! - [`engine`]: virtual clock, event queue and seeded random streams;
//! - [`world`]: random-waypoint mobility, unit-disk radio and interface queues;
//! - [`packet`] / [`dsr`]: source-routed packets and the per-node DSR state;
//! - [`ids`]: the reputation engine (monitor windows, warnings, avoid lists,
//!   knock tests, redemption and fading);
//! - [`adversary`]: pluggable packet-drop misbehavior profiles;
//! - [`traffic`]: CBR flows and run-level metric accounting;
//! - [`scenario`]: the experiment configuration file format;
//! - [`sim`]: the run loop tying everything together.
//!
//! Numeric formulas are generic over the scalar type through [`num::Real`];
//! the simulation itself is instantiated at [`Scalar`].

pub mod adversary;
pub mod dsr;
pub mod engine;
pub mod ids;
pub mod num;
pub mod packet;
pub mod scenario;
pub mod sim;
pub mod trace;
pub mod traffic;
pub mod world;

/// Scalar type the simulation runs at.
pub type Scalar = f64;

/// Identifier of a node in the simulated network, dense in `0..node_count`.
#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    serde::Serialize,
    serde::Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u16);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u16> for NodeId {
    fn from(v: u16) -> Self {
        NodeId(v)
    }
}
