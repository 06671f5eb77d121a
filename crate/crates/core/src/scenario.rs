//! Experiment configuration: a TOML file with nested sections, fully
//! populated by the built-in templates and overridable key by key.
//!
//! `paper-20` is the default setup (20 nodes, 10 CBR connections); `paper-10`
//! is the small one (10 nodes, 5 connections). Both use a 1000 m x 1000 m
//! field, 250 m radio range, 2 Mb/s links, 64 B packets at 4 pkt/s and a
//! 900 s horizon.

use serde::{Deserialize, Serialize};

use crate::adversary::AdversaryProfile;
use crate::ids::IdsConstants;
use crate::{NodeId, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown template '{0}' (expected paper-10 or paper-20)")]
    UnknownTemplate(String),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("bad override '{0}': {1}")]
    Override(String, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    pub width_m: Scalar,
    pub height_m: Scalar,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            width_m: 1000.0,
            height_m: 1000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub range_m: Scalar,
    pub bandwidth_bps: Scalar,
    pub per_hop_processing_delay_s: Scalar,
    pub queue_capacity: usize,
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig {
            range_m: 250.0,
            bandwidth_bps: 2e6,
            per_hop_processing_delay_s: 0.0,
            queue_capacity: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilityConfig {
    pub max_speed_mps: Scalar,
    pub pause_time_s: Scalar,
    /// Optional movement-trace file (one `node time x y speed` record per
    /// line) replacing the random waypoint model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_file: Option<String>,
}

impl Default for MobilityConfig {
    fn default() -> Self {
        MobilityConfig {
            max_speed_mps: 10.0,
            pause_time_s: 100.0,
            trace_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    pub flows: usize,
    pub packet_size_bytes: u32,
    pub rate_pps: Scalar,
    /// Explicit (source, sink) pairs; when absent, pairs are drawn from the
    /// placement stream per run so every seed gets fresh connections.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<(u16, u16)>>,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            flows: 10,
            packet_size_bytes: 64,
            rate_pps: 4.0,
            pairs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdversaryConfig {
    /// Fraction of nodes misbehaving, selected via the placement stream.
    pub fraction: Scalar,
    /// Explicit misbehaving node ids; overrides `fraction` when non-empty.
    pub nodes: Vec<u16>,
    pub profile: AdversaryProfile,
}

impl Default for AdversaryConfig {
    fn default() -> Self {
        AdversaryConfig {
            fraction: 0.0,
            nodes: Vec::new(),
            profile: AdversaryProfile::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    pub horizon_s: Scalar,
    pub ids_enabled: bool,
    pub node_count: usize,
    pub field: FieldConfig,
    pub radio: RadioConfig,
    pub mobility: MobilityConfig,
    pub traffic: TrafficConfig,
    pub adversary: AdversaryConfig,
    pub ids: IdsConstants,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: "paper-20".into(),
            seed: 1,
            horizon_s: 900.0,
            ids_enabled: true,
            node_count: 20,
            field: FieldConfig::default(),
            radio: RadioConfig::default(),
            mobility: MobilityConfig::default(),
            traffic: TrafficConfig::default(),
            adversary: AdversaryConfig::default(),
            ids: IdsConstants::default(),
        }
    }
}

impl ScenarioConfig {
    /// Built-in templates.
    pub fn template(name: &str) -> Result<ScenarioConfig, ConfigError> {
        match name {
            "paper-20" => Ok(ScenarioConfig::default()),
            "paper-10" => Ok(ScenarioConfig {
                name: "paper-10".into(),
                node_count: 10,
                traffic: TrafficConfig {
                    flows: 5,
                    ..Default::default()
                },
                ..Default::default()
            }),
            other => Err(ConfigError::UnknownTemplate(other.into())),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    /// Applies one `dotted.key=value` override by editing the serialized
    /// tree and re-validating.
    pub fn apply_override(&self, spec: &str) -> Result<ScenarioConfig, ConfigError> {
        let (path, raw_value) = spec
            .split_once('=')
            .ok_or_else(|| ConfigError::Override(spec.into(), "expected key=value".into()))?;
        let path = path.trim();
        let raw_value = raw_value.trim();
        if path.is_empty() {
            return Err(ConfigError::Override(spec.into(), "empty key".into()));
        }
        let mut tree: toml::Value = toml::Value::try_from(self)
            .map_err(|e| ConfigError::Parse(e.to_string()))?;
        let parsed: toml::Value = match toml::from_str::<toml::Value>(&format!("v = {raw_value}")) {
            Ok(toml::Value::Table(t)) => t.get("v").cloned().unwrap(),
            _ => toml::Value::String(raw_value.to_string()),
        };
        let mut cursor = &mut tree;
        let segments: Vec<&str> = path.split('.').collect();
        for (i, seg) in segments.iter().enumerate() {
            let table = cursor.as_table_mut().ok_or_else(|| {
                ConfigError::Override(spec.into(), format!("'{seg}' is not a table"))
            })?;
            if i + 1 == segments.len() {
                if !table.contains_key(*seg) {
                    return Err(ConfigError::Override(
                        spec.into(),
                        format!("unknown key '{path}'"),
                    ));
                }
                table.insert(seg.to_string(), parsed);
                break;
            }
            cursor = table.get_mut(*seg).ok_or_else(|| {
                ConfigError::Override(spec.into(), format!("unknown section '{seg}'"))
            })?;
        }
        let cfg: ScenarioConfig = tree
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Override(spec.into(), e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Number of misbehaving nodes this config resolves to.
    pub fn adversary_count(&self) -> usize {
        if !self.adversary.nodes.is_empty() {
            self.adversary.nodes.len()
        } else {
            (self.adversary.fraction * self.node_count as Scalar).round() as usize
        }
    }

    /// Actual malicious fraction after rounding.
    pub fn malicious_fraction(&self) -> Scalar {
        self.adversary_count() as Scalar / self.node_count as Scalar
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if self.node_count < 2 {
            return bad("node_count must be at least 2".into());
        }
        if self.node_count > u16::MAX as usize {
            return bad("node_count too large".into());
        }
        if self.horizon_s <= 0.0 {
            return bad("horizon_s must be positive".into());
        }
        if self.field.width_m <= 0.0 || self.field.height_m <= 0.0 {
            return bad("field dimensions must be positive".into());
        }
        if self.radio.range_m <= 0.0 {
            return bad("radio range must be positive".into());
        }
        if self.radio.bandwidth_bps <= 0.0 {
            return bad("bandwidth must be positive".into());
        }
        if self.radio.per_hop_processing_delay_s < 0.0 {
            return bad("processing delay must be non-negative".into());
        }
        if self.radio.queue_capacity == 0 {
            return bad("queue capacity must be positive".into());
        }
        if self.mobility.max_speed_mps <= 0.0 {
            return bad("max speed must be positive".into());
        }
        if self.mobility.pause_time_s < 0.0 {
            return bad("pause time must be non-negative".into());
        }
        if self.traffic.packet_size_bytes == 0 {
            return bad("packet size must be positive".into());
        }
        if self.traffic.rate_pps <= 0.0 {
            return bad("traffic rate must be positive".into());
        }
        if let Some(pairs) = &self.traffic.pairs {
            if pairs.len() != self.traffic.flows {
                return bad("traffic.pairs length must equal traffic.flows".into());
            }
            for &(s, d) in pairs {
                if s == d {
                    return bad(format!("flow {s}->{d} has identical endpoints"));
                }
                if s as usize >= self.node_count || d as usize >= self.node_count {
                    return bad(format!("flow {s}->{d} references a missing node"));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.adversary.fraction) {
            return bad("adversary fraction must lie in [0, 1]".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for &n in &self.adversary.nodes {
            if n as usize >= self.node_count {
                return bad(format!("adversary node {n} does not exist"));
            }
            if !seen.insert(n) {
                return bad(format!("adversary node {n} listed twice"));
            }
        }
        self.adversary
            .profile
            .validate()
            .map_err(ConfigError::Invalid)?;
        self.ids.validate().map_err(ConfigError::Invalid)?;
        Ok(())
    }

    pub fn adversary_node_set(&self) -> Vec<NodeId> {
        self.adversary.nodes.iter().copied().map(NodeId).collect()
    }
}

/// Derives a per-cell seed for sweeps: a pure function of the base seed, the
/// sweep dimension value and the repeat index, so any cell can be reproduced
/// in isolation.
pub fn derive_seed(base_seed: u64, dimension: &str, value_millis: u64, repeat: u32) -> u64 {
    // FNV-1a over the cell coordinates.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(&base_seed.to_le_bytes());
    eat(dimension.as_bytes());
    eat(&value_millis.to_le_bytes());
    eat(&repeat.to_le_bytes());
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates_resolve_paper_defaults() {
        let cfg = ScenarioConfig::template("paper-20").unwrap();
        assert_eq!(cfg.node_count, 20);
        assert_eq!(cfg.traffic.flows, 10);
        assert_eq!(cfg.horizon_s, 900.0);
        assert_eq!(cfg.radio.range_m, 250.0);
        assert_eq!(cfg.radio.bandwidth_bps, 2e6);
        assert_eq!(cfg.traffic.packet_size_bytes, 64);
        assert_eq!(cfg.traffic.rate_pps, 4.0);
        assert_eq!(cfg.ids.window_size_s, 1.0);
        cfg.validate().unwrap();

        let cfg = ScenarioConfig::template("paper-10").unwrap();
        assert_eq!(cfg.node_count, 10);
        assert_eq!(cfg.traffic.flows, 5);
        cfg.validate().unwrap();

        assert!(matches!(
            ScenarioConfig::template("paper-99"),
            Err(ConfigError::UnknownTemplate(_))
        ));
    }

    #[test]
    fn toml_round_trip_preserves_parameters() {
        let mut cfg = ScenarioConfig::template("paper-20").unwrap();
        cfg.adversary.fraction = 0.3;
        cfg.seed = 17;
        let text = cfg.to_toml_string();
        let back = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn overrides_apply_and_validate() {
        let cfg = ScenarioConfig::template("paper-20").unwrap();
        let cfg = cfg.apply_override("adversary.fraction=0.3").unwrap();
        assert_eq!(cfg.adversary.fraction, 0.3);
        assert_eq!(cfg.adversary_count(), 6);
        let cfg = cfg.apply_override("mobility.pause_time_s=900").unwrap();
        assert_eq!(cfg.mobility.pause_time_s, 900.0);
        let cfg = cfg.apply_override("ids_enabled=false").unwrap();
        assert!(!cfg.ids_enabled);
        let cfg = cfg.apply_override("name=\"custom\"").unwrap();
        assert_eq!(cfg.name, "custom");

        assert!(cfg.apply_override("no_such_key=1").is_err());
        assert!(cfg.apply_override("radio.bogus=1").is_err());
        assert!(cfg.apply_override("adversary.fraction=1.5").is_err());
        assert!(cfg.apply_override("garbage").is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        let mut text = ScenarioConfig::default().to_toml_string();
        text.push_str("\nwhatever = 3\n");
        assert!(matches!(
            ScenarioConfig::from_toml_str(&text),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn invalid_configs_are_named() {
        let mut cfg = ScenarioConfig::default();
        cfg.traffic.pairs = Some(vec![(0, 0); 10]);
        assert!(matches!(cfg.validate(), Err(ConfigError::Invalid(_))));
        let mut cfg = ScenarioConfig::default();
        cfg.adversary.nodes = vec![55];
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::default();
        cfg.ids.suspicious_threshold = -60.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn derived_seeds_are_pure_and_distinct() {
        let a = derive_seed(1, "malicious_pct", 300, 0);
        assert_eq!(a, derive_seed(1, "malicious_pct", 300, 0));
        assert_ne!(a, derive_seed(1, "malicious_pct", 300, 1));
        assert_ne!(a, derive_seed(1, "window_size", 300, 0));
        assert_ne!(a, derive_seed(2, "malicious_pct", 300, 0));
    }
}
