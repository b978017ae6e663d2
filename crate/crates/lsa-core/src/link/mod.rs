//! Authenticated link protocols built on the cipher: wire frames, sealed
//! unicast with freshness and rekeying, broadcast authentication with
//! delayed key disclosure, and the per-node energy gate.

pub mod energy;
pub mod frame;
pub mod mutesla;
pub mod snep;
