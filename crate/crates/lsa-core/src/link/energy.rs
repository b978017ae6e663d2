//! Per-node energy accounting and the packet admission gate.
//!
//! Every transmission or reception costs `bytes × rate` plus `e_block` per
//! 128-bit cipher operation spent sealing or opening the frame. A node admits
//! a frame only if its remaining battery covers the full cost (the boundary
//! is inclusive); otherwise the frame is discarded and the battery untouched.
//!
//! The battery is tracked as `initial − spent` with a single spend
//! accumulator, so the conservation identity `initial − remaining = spent`
//! holds exactly, with no floating-point drift.

use crate::cipher::{ctr_blocks, mac_blocks};
use crate::link::frame::{Frame, FrameType, MAC_LEN};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    #[default]
    Ordinary,
    BaseStation,
}

/// A node's identity, battery, and role.
#[derive(Clone, Debug)]
pub struct NodeState {
    pub id: u16,
    initial_battery: f64,
    spent: f64,
    pub role: Role,
}

/// Outcome of the energy gate.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum Gate {
    Allow,
    Deny,
}

impl NodeState {
    pub fn new(id: u16, battery: f64, role: Role) -> NodeState {
        debug_assert!(battery >= 0.0);
        NodeState { id, initial_battery: battery, spent: 0.0, role }
    }

    pub fn battery(&self) -> f64 {
        self.initial_battery - self.spent
    }

    pub fn initial_battery(&self) -> f64 {
        self.initial_battery
    }

    /// Total energy charged so far; `initial_battery() - battery()` exactly.
    pub fn energy_spent(&self) -> f64 {
        self.spent
    }
}

/// Admit a frame costing `cost` if the battery covers it (inclusive
/// boundary), charging the node; otherwise deny and leave the battery alone.
pub fn energy_gate(ns: &mut NodeState, cost: f64) -> Gate {
    debug_assert!(cost >= 0.0);
    if cost <= ns.battery() {
        ns.spent += cost;
        Gate::Allow
    } else {
        Gate::Deny
    }
}

/// Energy rates; defaults are frozen so scenario results are comparable.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostModel {
    /// Units per byte transmitted.
    pub e_tx: f64,
    /// Units per byte received.
    pub e_rx: f64,
    /// Units per 128-bit cipher operation (keystream or MAC block).
    pub e_block: f64,
}

impl Default for CostModel {
    fn default() -> CostModel {
        CostModel { e_tx: 1.0, e_rx: 0.5, e_block: 0.05 }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Direction {
    Tx,
    Rx,
}

/// Cipher blocks spent sealing or opening a frame of this shape: keystream
/// blocks for the encrypted body (sealed unicast only; broadcasts and
/// disclosures travel in plaintext) plus CBC-MAC blocks over header and body.
pub fn crypto_blocks(frame_type: FrameType, body_len: usize) -> usize {
    let keystream = match frame_type {
        FrameType::Data | FrameType::DataFresh => ctr_blocks(body_len),
        FrameType::Bcast | FrameType::Disclose => 0,
    };
    keystream + mac_blocks(frame_type.header_len() + body_len)
}

/// Cost of moving a frame of this shape in `direction` under `cm`.
pub fn frame_cost_parts(
    frame_type: FrameType,
    body_len: usize,
    direction: Direction,
    cm: &CostModel,
) -> f64 {
    let bytes = (frame_type.header_len() + body_len + MAC_LEN) as f64;
    let rate = match direction {
        Direction::Tx => cm.e_tx,
        Direction::Rx => cm.e_rx,
    };
    bytes * rate + cm.e_block * crypto_blocks(frame_type, body_len) as f64
}

/// Cost of moving `f` in `direction` under `cm`.
pub fn frame_cost(f: &Frame, direction: Direction, cm: &CostModel) -> f64 {
    frame_cost_parts(f.frame_type, f.body.len(), direction, cm)
}
