//! Scenario configuration: JSON schema, defaults, and semantic validation.

use crate::link::energy::{CostModel, Role};
use crate::link::frame::BROADCAST_ADDR;
use crate::link::snep::MAX_PAYLOAD_LEN;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum ScenarioError {
    /// Malformed document; the message carries serde's line/column diagnostics.
    #[error("scenario parse error: {0}")]
    Parse(#[from] serde_json::Error),
    /// Well-formed document with inconsistent content.
    #[error("scenario semantic error: {0}")]
    Semantic(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeCfg {
    pub id: u16,
    pub battery: f64,
    #[serde(default)]
    pub role: Role,
    /// Clock skew, bounded by `mutesla.delta_ms`.
    #[serde(default)]
    pub skew_ms: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkCfg {
    pub a: u16,
    pub b: u16,
    #[serde(default = "default_latency")]
    pub latency_ms: u64,
    #[serde(default)]
    pub loss_prob: f64,
}

fn default_latency() -> u64 {
    1
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficMode {
    /// Periodic sealed unicast.
    Snep,
    /// Periodic nonce challenge; the peer answers with a sealed echo.
    SnepFresh,
    /// Periodic authenticated broadcast from `src` to all its neighbors.
    Mutesla,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficCfg {
    pub src: u16,
    /// Peer node, or 65535 for broadcast flows.
    pub dst: u16,
    pub period_ms: u64,
    pub payload_len: usize,
    pub mode: TrafficMode,
    /// First emission time; defaults to one period.
    #[serde(default)]
    pub start_ms: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MuteslaCfg {
    pub t_int_ms: u64,
    /// Disclosure delay in intervals.
    pub d: u64,
    pub chain_len: usize,
    /// Maximum tolerated clock skew.
    pub delta_ms: u64,
}

impl Default for MuteslaCfg {
    fn default() -> MuteslaCfg {
        MuteslaCfg { t_int_ms: 100, d: 2, chain_len: 32, delta_ms: 0 }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackMode {
    /// Record wire bytes; confidentiality is scored against this log.
    Eavesdrop,
    /// Re-emit every observed frame after `delay_ms`.
    Replay,
    /// Flip `bits` random bits of each frame in transit.
    Tamper,
    /// Fabricate frames with random contents every `period_ms`.
    Inject,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttackParams {
    /// Replay: delay before re-emission.
    pub delay_ms: u64,
    /// Tamper: bits flipped per frame.
    pub bits: u32,
    /// Inject: fabrication period.
    pub period_ms: u64,
    /// Inject: fabricated body length.
    pub payload_len: usize,
}

impl Default for AttackParams {
    fn default() -> AttackParams {
        AttackParams { delay_ms: 10, bits: 1, period_ms: 100, payload_len: 16 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackerCfg {
    /// Tapped link, as its two endpoint ids.
    pub link: (u16, u16),
    pub mode: AttackMode,
    #[serde(default)]
    pub params: AttackParams,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExposureCfg {
    pub time_ms: u64,
    pub link: (u16, u16),
}

/// Which cipher suite sealed unicast uses. The null suite (identity
/// encryption, tagless frames accepted) exists purely as the baseline that
/// proves the confidentiality metric discriminates; broadcast authentication
/// always uses the real chain construction.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CipherKind {
    Lsa,
    Null,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub duration_ms: u64,
    pub nodes: Vec<NodeCfg>,
    pub links: Vec<LinkCfg>,
    #[serde(default)]
    pub traffic: Vec<TrafficCfg>,
    #[serde(default)]
    pub mutesla: MuteslaCfg,
    #[serde(default)]
    pub attackers: Vec<AttackerCfg>,
    #[serde(default)]
    pub cost_model: CostModel,
    #[serde(default)]
    pub exposure_events: Vec<ExposureCfg>,
    #[serde(default = "default_cipher")]
    pub cipher: CipherKind,
}

fn default_cipher() -> CipherKind {
    CipherKind::Lsa
}

/// Parse and validate a scenario document.
pub fn load_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let cfg: ScenarioConfig = serde_json::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}

impl ScenarioConfig {
    fn node_exists(&self, id: u16) -> bool {
        self.nodes.iter().any(|n| n.id == id)
    }

    fn link_exists(&self, a: u16, b: u16) -> bool {
        self.links
            .iter()
            .any(|l| (l.a, l.b) == (a, b) || (l.a, l.b) == (b, a))
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let fail = |msg: String| Err(ScenarioError::Semantic(msg));

        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if n.id == BROADCAST_ADDR {
                return fail(format!("node id {} is reserved for broadcast", n.id));
            }
            if !ids.insert(n.id) {
                return fail(format!("duplicate node id {}", n.id));
            }
            if !n.battery.is_finite() || n.battery < 0.0 {
                return fail(format!("node {} has negative battery {}", n.id, n.battery));
            }
            if n.skew_ms.unsigned_abs() > self.mutesla.delta_ms {
                return fail(format!(
                    "node {} skew {} ms exceeds mutesla.delta_ms {}",
                    n.id, n.skew_ms, self.mutesla.delta_ms
                ));
            }
        }

        let mut pairs = BTreeSet::new();
        for l in &self.links {
            if l.a == l.b {
                return fail(format!("link ({}, {}) joins a node to itself", l.a, l.b));
            }
            for end in [l.a, l.b] {
                if !self.node_exists(end) {
                    return fail(format!(
                        "link ({}, {}) references unknown node id {end}",
                        l.a, l.b
                    ));
                }
            }
            if !pairs.insert((l.a.min(l.b), l.a.max(l.b))) {
                return fail(format!("duplicate link between {} and {}", l.a, l.b));
            }
            if !(0.0..=1.0).contains(&l.loss_prob) || !l.loss_prob.is_finite() {
                return fail(format!(
                    "link ({}, {}) loss_prob {} outside [0, 1]",
                    l.a, l.b, l.loss_prob
                ));
            }
        }

        for (i, t) in self.traffic.iter().enumerate() {
            if t.period_ms == 0 {
                return fail(format!("traffic[{i}] has zero period"));
            }
            if t.payload_len > MAX_PAYLOAD_LEN {
                return fail(format!(
                    "traffic[{i}] payload_len {} exceeds the frame limit {MAX_PAYLOAD_LEN}",
                    t.payload_len
                ));
            }
            if !self.node_exists(t.src) {
                return fail(format!("traffic[{i}] references unknown node id {}", t.src));
            }
            match t.mode {
                TrafficMode::Snep | TrafficMode::SnepFresh => {
                    if !self.node_exists(t.dst) {
                        return fail(format!(
                            "traffic[{i}] references unknown node id {}",
                            t.dst
                        ));
                    }
                    if t.src == t.dst {
                        return fail(format!("traffic[{i}] sends node {} to itself", t.src));
                    }
                    if !self.link_exists(t.src, t.dst) {
                        return fail(format!(
                            "traffic[{i}] has no link between {} and {}",
                            t.src, t.dst
                        ));
                    }
                }
                TrafficMode::Mutesla => {
                    if t.dst != BROADCAST_ADDR {
                        return fail(format!(
                            "traffic[{i}] is broadcast and must use dst {BROADCAST_ADDR}"
                        ));
                    }
                    if !self.links.iter().any(|l| l.a == t.src || l.b == t.src) {
                        return fail(format!(
                            "traffic[{i}] broadcasts from node {} which has no links",
                            t.src
                        ));
                    }
                    // Interval 0 is the bootstrap interval (its key is the
                    // public commitment), so broadcasting must start later.
                    let start = t.start_ms.unwrap_or(t.period_ms);
                    if start < self.mutesla.t_int_ms {
                        return fail(format!(
                            "traffic[{i}] first broadcast at {start} ms falls in the bootstrap \
                             interval; start at or after mutesla.t_int_ms ({} ms)",
                            self.mutesla.t_int_ms
                        ));
                    }
                }
            }
        }

        // A challenge is recognized by its 8-byte payload, so a plain flow
        // with 8-byte payloads on the same ordered pair would be ambiguous.
        for (i, t) in self.traffic.iter().enumerate() {
            if t.mode == TrafficMode::SnepFresh {
                let clash = self.traffic.iter().any(|o| {
                    o.mode == TrafficMode::Snep
                        && (o.src, o.dst) == (t.src, t.dst)
                        && o.payload_len == 8
                });
                if clash {
                    return fail(format!(
                        "traffic[{i}] (snep_fresh) clashes with an 8-byte snep flow on the same pair"
                    ));
                }
            }
        }

        let uses_mutesla = self.traffic.iter().any(|t| t.mode == TrafficMode::Mutesla);
        if uses_mutesla {
            let m = &self.mutesla;
            if m.t_int_ms == 0 {
                return fail("mutesla.t_int_ms must be positive".into());
            }
            if m.d == 0 {
                return fail("mutesla.d must be at least 1 interval".into());
            }
            if m.chain_len == 0 || m.chain_len > 1000 {
                return fail(format!("mutesla.chain_len {} outside 1..=1000", m.chain_len));
            }
            let lifetime = m.chain_len as u64 * m.t_int_ms;
            if lifetime <= self.duration_ms {
                return fail(format!(
                    "mutesla chain ends at {lifetime} ms, before duration {} ms",
                    self.duration_ms
                ));
            }
        }

        for (i, a) in self.attackers.iter().enumerate() {
            if !self.link_exists(a.link.0, a.link.1) {
                return fail(format!(
                    "attackers[{i}] taps missing link ({}, {})",
                    a.link.0, a.link.1
                ));
            }
            match a.mode {
                AttackMode::Tamper if a.params.bits == 0 => {
                    return fail(format!("attackers[{i}] tamper needs bits >= 1"));
                }
                AttackMode::Inject if a.params.period_ms == 0 => {
                    return fail(format!("attackers[{i}] inject needs a positive period"));
                }
                AttackMode::Inject if a.params.payload_len > MAX_PAYLOAD_LEN => {
                    return fail(format!("attackers[{i}] inject payload exceeds the frame limit"));
                }
                _ => {}
            }
        }

        for (i, e) in self.exposure_events.iter().enumerate() {
            if !self.link_exists(e.link.0, e.link.1) {
                return fail(format!(
                    "exposure_events[{i}] references missing link ({}, {})",
                    e.link.0, e.link.1
                ));
            }
        }

        Ok(())
    }
}
