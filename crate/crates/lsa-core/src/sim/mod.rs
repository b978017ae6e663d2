//! Deterministic discrete-event simulation of the protocol stack over a
//! configured topology, with wire-level attackers and a metrics report.

pub mod attacker;
pub mod config;
pub mod metrics;
pub mod rng;
pub mod run;
