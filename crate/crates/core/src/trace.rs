//! Optional debug traces: per-packet events and per-reputation-change
//! events, one line each, stable across runs of the same scenario.

use std::io::Write;

use crate::engine::SimTime;
use crate::ids::ReputationDelta;
use crate::packet::Packet;
use crate::NodeId;

/// Packet-level event kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketEvent {
    Send,
    Recv,
    Overhear,
    Drop(&'static str),
    Pack,
}

/// Clonable in-memory sink, handy for tests and byte-level comparisons.
#[derive(Debug, Clone, Default)]
pub struct SharedBuf(std::sync::Arc<std::sync::Mutex<Vec<u8>>>);

impl SharedBuf {
    pub fn new() -> Self {
        SharedBuf::default()
    }

    pub fn contents(&self) -> Vec<u8> {
        self.0.lock().unwrap().clone()
    }

    pub fn into_string(self) -> String {
        String::from_utf8(self.contents()).expect("trace output is utf-8")
    }
}

impl Write for SharedBuf {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

#[derive(Default)]
pub struct Traces {
    pub packets: Option<Box<dyn Write>>,
    pub reputation: Option<Box<dyn Write>>,
}

impl Traces {
    pub fn none() -> Self {
        Traces::default()
    }

    pub fn packet(&mut self, t: SimTime, node: NodeId, event: PacketEvent, pkt: &Packet) {
        if let Some(w) = self.packets.as_mut() {
            let event = match event {
                PacketEvent::Send => "send".to_string(),
                PacketEvent::Recv => "recv".to_string(),
                PacketEvent::Overhear => "overhear".to_string(),
                PacketEvent::Drop(cause) => format!("drop[{cause}]"),
                PacketEvent::Pack => "pack".to_string(),
            };
            let segments = pkt
                .source_route
                .as_ref()
                .map(|r| format!(" sl={}", r.segments_left))
                .unwrap_or_default();
            writeln!(
                w,
                "{t} {node} {event} {} {}{segments}",
                pkt.kind.label(),
                pkt.identity
            )
            .expect("packet trace write");
        }
    }

    pub fn reputation(&mut self, t: SimTime, observer: NodeId, delta: &ReputationDelta) {
        if let Some(w) = self.reputation.as_mut() {
            writeln!(
                w,
                "{t} {observer} {} {} {:+.3} {:.3} {}",
                delta.subject, delta.channel, delta.delta, delta.new_value, delta.new_class
            )
            .expect("reputation trace write");
        }
    }
}
