//! Lightweight security stack for wireless sensor networks.
//!
//! Three layers, bottom up:
//!
//! - [`cipher`] — the LSA block cipher (5-round Feistel over two SP layers,
//!   128-bit blocks, five 64-bit round keys) plus counter-mode encryption,
//!   CBC-MAC, and a one-way hash built from it.
//! - [`link`] — authenticated link protocols: SNEP-style sealed unicast with
//!   counter freshness and nonce echo, key-exposure rekeying, broadcast
//!   authentication with delayed key disclosure, and the per-node energy gate.
//! - [`sim`] — a deterministic discrete-event simulator that runs the stack
//!   over a configurable topology with seeded loss, clock skew, energy
//!   budgets, and wire-level attackers, and tallies a [`MetricsReport`].
//!
//! [`oracle`] holds an independent straight-line reimplementation of the
//! cipher used only to cross-check the optimized path and the frozen golden
//! vectors.

pub mod cipher;
pub mod link;
pub mod oracle;
pub mod sim;

pub use cipher::{
    cbc_mac, ctr_blocks, ctr_crypt, decrypt_block, dm_hash, encrypt_block, expand_key, mac_blocks,
    Block, CipherError, HalfBlock, MacTag, MasterKey, RoundKeySchedule,
};
pub use link::energy::{
    crypto_blocks, energy_gate, frame_cost, frame_cost_parts, CostModel, Direction, Gate,
    NodeState, Role,
};
pub use link::frame::{Frame, FrameError, FrameType, BROADCAST_ADDR};
pub use link::mutesla::{ChainState, ReceiverChainState};
pub use link::snep::{derive_link_keys, LinkState, Reject, RekeyError, SealError};
pub use sim::config::{load_scenario, ScenarioConfig, ScenarioError};
pub use sim::metrics::MetricsReport;
pub use sim::run::run_simulation;
