//! Reputation engine: congestion-adaptive misbehavior thresholds, the
//! three reputation channels (self observation, warning messages, avoid-list
//! citations), knock tests, malicious declaration and redemption through
//! fading.
//!
//! Reputation is a non-positive real per observed node. Second-hand evidence
//! (warnings, avoid-list citations) can lower it only to the suspicious
//! threshold; crossing into the malicious class always requires first-hand
//! evidence — a self-observed window breach or a failed knock test.

use std::collections::BTreeMap;

use crate::engine::SimTime;
use crate::num::Real;
use crate::{NodeId, Scalar};

/// Ratio of current to total interface-queue length, in `[0, 1]`.
///
/// Panics if `capacity` is zero.
pub fn congestion_parameter<F: Real>(occupancy: usize, capacity: usize) -> F {
    assert!(capacity > 0, "queue capacity must be positive");
    assert!(occupancy <= capacity, "occupancy exceeds capacity");
    F::from_usize_lossy(occupancy) / F::from_usize_lossy(capacity)
}

/// Allowed number of unacknowledged packets per timing window:
/// `max_packet_rate * congestion_parameter * window_size`.
pub fn malicious_drop_threshold<F: Real>(max_packet_rate: F, congestion: F, window_size: F) -> F {
    debug_assert!(max_packet_rate >= F::zero());
    debug_assert!(congestion >= F::zero());
    debug_assert!(window_size >= F::zero());
    max_packet_rate * congestion * window_size
}

/// Path priority `1 / (|min reputation| * hops)`, with the absolute
/// reputation floored at one so an all-clean path is not singular. Higher is
/// better.
///
/// Panics if `hops` is zero.
pub fn path_priority<F: Real>(min_reputation: F, hops: usize) -> F {
    assert!(hops >= 1, "a path has at least one hop");
    let denom = min_reputation.abs().max(F::one()) * F::from_usize_lossy(hops);
    F::one() / denom
}

/// Constant parameters of the reputation system.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdsConstants {
    pub neutral_rating: Scalar,
    pub suspicious_threshold: Scalar,
    pub malicious_threshold: Scalar,
    pub window_size_s: Scalar,
    pub self_observation_weight: Scalar,
    pub warning_weight: Scalar,
    pub avoid_list_weight: Scalar,
    pub inactivity_timeout_s: Scalar,
    pub positive_appraisal: Scalar,
    pub fading_rate: Scalar,
    /// Nominal per-flow packet rate feeding the drop threshold.
    pub max_packet_rate_pps: Scalar,
}

impl Default for IdsConstants {
    fn default() -> Self {
        IdsConstants {
            neutral_rating: 0.0,
            suspicious_threshold: -35.0,
            malicious_threshold: -50.0,
            window_size_s: 1.0,
            self_observation_weight: -5.0,
            warning_weight: -2.0,
            avoid_list_weight: -1.0,
            inactivity_timeout_s: 20.0,
            positive_appraisal: 1.0,
            fading_rate: 5.0,
            max_packet_rate_pps: 4.0,
        }
    }
}

impl IdsConstants {
    /// Fading ceiling: the midpoint of the suspicious band.
    pub fn suspicious_midpoint(&self) -> Scalar {
        (self.malicious_threshold + self.suspicious_threshold) / 2.0
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.malicious_threshold < self.suspicious_threshold
            && self.suspicious_threshold < 0.0)
        {
            return Err("thresholds must satisfy malicious < suspicious < 0".into());
        }
        if self.neutral_rating != 0.0 {
            return Err("neutral rating must be 0".into());
        }
        if self.self_observation_weight >= 0.0
            || self.warning_weight >= 0.0
            || self.avoid_list_weight >= 0.0
        {
            return Err("reputation weights must be negative".into());
        }
        if self.positive_appraisal <= 0.0 {
            return Err("positive appraisal must be positive".into());
        }
        if self.self_observation_weight.abs() <= self.positive_appraisal {
            return Err("self-observation weight must outweigh positive appraisal".into());
        }
        if !(self.self_observation_weight.abs() > self.warning_weight.abs()
            && self.warning_weight.abs() > self.avoid_list_weight.abs())
        {
            return Err("weights must be ordered |self| > |warning| > |avoid|".into());
        }
        if self.window_size_s <= 0.0 {
            return Err("window size must be positive".into());
        }
        if self.inactivity_timeout_s <= 0.0 {
            return Err("inactivity timeout must be positive".into());
        }
        if self.fading_rate <= 0.0 {
            return Err("fading rate must be positive".into());
        }
        if self.max_packet_rate_pps < 0.0 {
            return Err("max packet rate must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReputationClass {
    Normal,
    Suspicious,
    Malicious,
}

impl std::fmt::Display for ReputationClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReputationClass::Normal => "normal",
            ReputationClass::Suspicious => "suspicious",
            ReputationClass::Malicious => "malicious",
        })
    }
}

/// Reputation channel, for tracing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    SelfObservation,
    Warning,
    Avoid,
    Knock,
    Fade,
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Channel::SelfObservation => "self",
            Channel::Warning => "warning",
            Channel::Avoid => "avoid",
            Channel::Knock => "knock",
            Channel::Fade => "fade",
        })
    }
}

/// One observer's record of one subject.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReputationRecord {
    pub value: Scalar,
    pub class: ReputationClass,
    /// Last time the subject appeared in a received warning or avoid list;
    /// fading requires a full inactivity period without citations.
    pub last_cited_at: SimTime,
}

impl ReputationRecord {
    fn fresh() -> Self {
        ReputationRecord {
            value: 0.0,
            class: ReputationClass::Normal,
            last_cited_at: SimTime::ZERO,
        }
    }
}

/// A recorded reputation change, suitable for tracing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReputationDelta {
    pub subject: NodeId,
    pub channel: Channel,
    pub delta: Scalar,
    pub new_value: Scalar,
    pub new_class: ReputationClass,
}

/// Outcome of a window self-observation update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelfObservation {
    Appraised(ReputationDelta),
    Penalized {
        delta: ReputationDelta,
        /// True when this penalty drove the value to the malicious threshold.
        declared_malicious: bool,
    },
    /// Malicious subjects are outside the monitor loop; only fading recovers
    /// them.
    Skipped,
}

/// Outcome of a second-hand citation (warning or avoid list).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SecondHand {
    Decremented(ReputationDelta),
    /// Subject already at or below the suspicious threshold: a knock test is
    /// wanted instead of a further decrement.
    KnockWanted,
    /// Subject already malicious: the citation only refreshes the
    /// inactivity clock.
    AlreadyMalicious,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadeOutcome {
    Faded {
        delta: ReputationDelta,
        /// Reached the fading ceiling and moved back to the suspicious class.
        rejoined: bool,
    },
    /// A citation arrived within the inactivity window; retry after it.
    CitedRecently { cited_at: SimTime },
    NotMalicious,
}

/// One node's table of reputation records about its peers.
#[derive(Debug, Clone)]
pub struct ReputationTable {
    constants: IdsConstants,
    records: BTreeMap<NodeId, ReputationRecord>,
}

impl ReputationTable {
    pub fn new(constants: IdsConstants) -> Self {
        ReputationTable {
            constants,
            records: BTreeMap::new(),
        }
    }

    pub fn constants(&self) -> &IdsConstants {
        &self.constants
    }

    pub fn record(&self, subject: NodeId) -> ReputationRecord {
        self.records
            .get(&subject)
            .copied()
            .unwrap_or_else(ReputationRecord::fresh)
    }

    pub fn value_of(&self, subject: NodeId) -> Scalar {
        self.record(subject).value
    }

    pub fn class_of(&self, subject: NodeId) -> ReputationClass {
        self.record(subject).class
    }

    pub fn is_malicious(&self, subject: NodeId) -> bool {
        self.class_of(subject) == ReputationClass::Malicious
    }

    /// The node's malicious list: exactly its malicious-class subjects, in
    /// ascending id order. Suspicious nodes are never listed.
    pub fn malicious_list(&self) -> Vec<NodeId> {
        self.records
            .iter()
            .filter(|(_, r)| r.class == ReputationClass::Malicious)
            .map(|(&n, _)| n)
            .collect()
    }

    /// Iterates all records (subject ascending).
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &ReputationRecord)> {
        self.records.iter().map(|(&n, r)| (n, r))
    }

    /// Minimum reputation value over `nodes`; unknown nodes count as neutral.
    pub fn min_value_over(&self, nodes: &[NodeId]) -> Scalar {
        nodes
            .iter()
            .map(|&n| self.value_of(n))
            .fold(0.0, Scalar::min)
    }

    fn entry(&mut self, subject: NodeId) -> &mut ReputationRecord {
        self.records
            .entry(subject)
            .or_insert_with(ReputationRecord::fresh)
    }

    /// Reclassifies by value band, leaving the sticky malicious class alone.
    fn reclassify(record: &mut ReputationRecord, constants: &IdsConstants) {
        if record.class == ReputationClass::Malicious {
            return;
        }
        record.class = if record.value <= constants.suspicious_threshold {
            ReputationClass::Suspicious
        } else {
            ReputationClass::Normal
        };
    }

    fn delta_for(&self, subject: NodeId, channel: Channel, delta: Scalar) -> ReputationDelta {
        let r = self.record(subject);
        ReputationDelta {
            subject,
            channel,
            delta,
            new_value: r.value,
            new_class: r.class,
        }
    }

    /// Applies one window's self observation of `subject`: a penalty when
    /// `missing` exceeds the drop threshold, otherwise a positive appraisal
    /// clamped at zero. Reaching the malicious threshold through a penalty
    /// declares the subject malicious (first-hand evidence).
    pub fn self_observation(
        &mut self,
        subject: NodeId,
        missing: usize,
        threshold: Scalar,
    ) -> SelfObservation {
        let constants = self.constants;
        let record = self.entry(subject);
        if record.class == ReputationClass::Malicious {
            return SelfObservation::Skipped;
        }
        if missing as Scalar > threshold {
            let before = record.value;
            record.value = (record.value + constants.self_observation_weight)
                .max(constants.malicious_threshold);
            let declared = record.value <= constants.malicious_threshold;
            if declared {
                record.class = ReputationClass::Malicious;
            } else {
                Self::reclassify(record, &constants);
            }
            let applied = record.value - before;
            SelfObservation::Penalized {
                delta: self.delta_for(subject, Channel::SelfObservation, applied),
                declared_malicious: declared,
            }
        } else {
            let before = record.value;
            record.value = (record.value + constants.positive_appraisal).min(constants.neutral_rating);
            Self::reclassify(record, &constants);
            let applied = record.value - before;
            SelfObservation::Appraised(self.delta_for(subject, Channel::SelfObservation, applied))
        }
    }

    /// Applies a second-hand citation of `subject` (warning message or
    /// avoid-list appearance) observed at `at`. Decrements are clamped at
    /// the suspicious threshold; at or below it, the caller should run a
    /// knock test instead.
    pub fn second_hand(&mut self, subject: NodeId, channel: Channel, at: SimTime) -> SecondHand {
        let constants = self.constants;
        let weight = match channel {
            Channel::Warning => constants.warning_weight,
            Channel::Avoid => constants.avoid_list_weight,
            _ => panic!("second-hand channel must be warning or avoid"),
        };
        let record = self.entry(subject);
        record.last_cited_at = at;
        if record.class == ReputationClass::Malicious {
            return SecondHand::AlreadyMalicious;
        }
        if record.value <= constants.suspicious_threshold {
            return SecondHand::KnockWanted;
        }
        let before = record.value;
        record.value = (record.value + weight).max(constants.suspicious_threshold);
        Self::reclassify(record, &constants);
        let applied = record.value - before;
        SecondHand::Decremented(self.delta_for(subject, channel, applied))
    }

    /// A passed knock test restores the subject to the default (neutral)
    /// reputation.
    pub fn knock_passed(&mut self, subject: NodeId) -> ReputationDelta {
        let constants = self.constants;
        let record = self.entry(subject);
        let before = record.value;
        record.value = constants.neutral_rating;
        record.class = ReputationClass::Normal;
        let applied = record.value - before;
        self.delta_for(subject, Channel::Knock, applied)
    }

    /// A failed knock test is first-hand evidence: the subject is declared
    /// malicious at the malicious threshold.
    pub fn knock_failed(&mut self, subject: NodeId) -> ReputationDelta {
        let constants = self.constants;
        let record = self.entry(subject);
        let before = record.value;
        record.value = constants.malicious_threshold;
        record.class = ReputationClass::Malicious;
        let applied = record.value - before;
        self.delta_for(subject, Channel::Knock, applied)
    }

    /// One fading step for a malicious subject after a full inactivity
    /// period: value rises by the fading rate, capped at the midpoint of the
    /// suspicious band; reaching the cap rejoins the subject as suspicious,
    /// never directly as neutral.
    pub fn fade_tick(&mut self, subject: NodeId, now: SimTime) -> FadeOutcome {
        let constants = self.constants;
        let midpoint = constants.suspicious_midpoint();
        let record = self.entry(subject);
        if record.class != ReputationClass::Malicious {
            return FadeOutcome::NotMalicious;
        }
        // Same expression the retry scheduler uses (last_cited + timeout), so
        // a check that fires exactly then always proceeds; a subtraction here
        // can round below the timeout and loop forever.
        if now.seconds() < record.last_cited_at.seconds() + constants.inactivity_timeout_s {
            return FadeOutcome::CitedRecently {
                cited_at: record.last_cited_at,
            };
        }
        let before = record.value;
        record.value = (record.value + constants.fading_rate).min(midpoint);
        let rejoined = record.value >= midpoint;
        if rejoined {
            record.class = ReputationClass::Suspicious;
        }
        let applied = record.value - before;
        FadeOutcome::Faded {
            delta: self.delta_for(subject, Channel::Fade, applied),
            rejoined,
        }
    }
}
