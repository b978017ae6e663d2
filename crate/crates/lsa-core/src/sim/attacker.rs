//! Link-local adversaries: passive recording, replay, tampering, injection.

use crate::cipher::MacTag;
use crate::link::frame::{Frame, FrameType};
use crate::sim::config::{AttackMode, AttackerCfg};
use rand::Rng;
use rand_chacha::ChaCha12Rng;

/// What the attacker does with one observed transmission.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct StepResult {
    /// Whether the original frame still reaches the receiver.
    pub forward_original: bool,
    /// Attacker emissions as `(absolute emit time, wire bytes)`.
    pub inject: Vec<(u64, Vec<u8>)>,
}

/// One attacker sitting on one link.
pub struct AttackerState {
    pub cfg: AttackerCfg,
    /// Everything seen on the wire; scored for plaintext recovery at the end.
    pub recorded: Vec<Vec<u8>>,
    pub emitted: u64,
    rng: ChaCha12Rng,
}

impl AttackerState {
    pub fn new(cfg: AttackerCfg, rng: ChaCha12Rng) -> AttackerState {
        AttackerState { cfg, recorded: Vec::new(), emitted: 0, rng }
    }

    /// React to a frame crossing the tapped link at time `now`.
    pub fn attacker_step(&mut self, observed: &[u8], now: u64) -> StepResult {
        match self.cfg.mode {
            AttackMode::Eavesdrop => {
                self.recorded.push(observed.to_vec());
                StepResult { forward_original: true, inject: Vec::new() }
            }
            AttackMode::Replay => {
                let at = now + self.cfg.params.delay_ms;
                self.emitted += 1;
                StepResult {
                    forward_original: true,
                    inject: vec![(at, observed.to_vec())],
                }
            }
            AttackMode::Tamper => {
                let mut bytes = observed.to_vec();
                let total = bytes.len() * 8;
                let flips = (self.cfg.params.bits as usize).min(total);
                for pos in rand::seq::index::sample(&mut self.rng, total, flips) {
                    bytes[pos / 8] ^= 0x80 >> (pos % 8);
                }
                self.emitted += 1;
                StepResult {
                    forward_original: false,
                    inject: vec![(now, bytes)],
                }
            }
            AttackMode::Inject => {
                // Periodic fabrication runs on its own timer; traffic on the
                // link passes through untouched.
                StepResult { forward_original: true, inject: Vec::new() }
            }
        }
    }

    /// Build one fabricated frame for an injection tick. The attacker knows
    /// the endpoint addresses but no keys, so everything else is guesswork.
    pub fn fabricate(&mut self) -> Vec<u8> {
        let (a, b) = self.cfg.link;
        let (src, dst) = if self.rng.gen_bool(0.5) { (a, b) } else { (b, a) };
        let mut body = vec![0u8; self.cfg.params.payload_len];
        self.rng.fill(&mut body[..]);
        let mut mac = [0u8; 8];
        self.rng.fill(&mut mac);
        let frame = Frame {
            frame_type: FrameType::Data,
            src,
            dst,
            epoch: self.rng.gen(),
            counter: self.rng.gen(),
            nonce: None,
            body,
            mac: MacTag(mac),
        };
        self.emitted += 1;
        frame.serialize()
    }
}
