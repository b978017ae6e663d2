//! Sealed unicast between two nodes sharing a master secret.
//!
//! Each link endpoint keeps a [`LinkState`]: an epoch, encryption and MAC key
//! schedules derived from the master secret for that epoch, a send counter,
//! and the highest counter accepted so far. Frames are encrypted in counter
//! mode and authenticated with a CBC-MAC over every header and body byte.
//! Freshness comes in two strengths: the strictly-increasing counter (weak,
//! per frame) and an optional nonce echo (strong, per exchange).
//!
//! When a key is exposed the state refuses to seal or open anything until
//! [`LinkState::rekey`] advances the epoch and re-derives keys.

use crate::cipher::{
    cbc_mac, ctr_crypt, encrypt_block, expand_key, Block, MasterKey, RoundKeySchedule,
};
use crate::link::frame::{Frame, FrameType};
use rand::RngCore;
use thiserror::Error;

/// Largest payload a sealed frame can carry (the len field is 16 bits).
pub const MAX_PAYLOAD_LEN: usize = u16::MAX as usize;

/// Derive the per-epoch encryption and MAC schedules from a link master
/// secret: each is the expansion of a tagged block encrypted under the
/// expanded master secret (tag 0x01 for encryption, 0x02 for MAC).
pub fn derive_link_keys(
    master_secret: &MasterKey,
    epoch: u8,
) -> (RoundKeySchedule, RoundKeySchedule) {
    let root = expand_key(master_secret);
    let derive = |tag: u8| {
        let mut b = [0u8; 16];
        b[0] = tag;
        b[1] = epoch;
        let sub = encrypt_block(Block::from_bytes(b), &root);
        expand_key(&MasterKey(sub.to_bytes()))
    };
    (derive(0x01), derive(0x02))
}

#[derive(Error, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SealError {
    #[error("link key is marked exposed; rekey before sealing")]
    Exposed,
    #[error("payload of {len} bytes exceeds the {MAX_PAYLOAD_LEN}-byte frame limit")]
    Oversized { len: usize },
}

#[derive(Error, Debug, Clone, Copy, PartialEq, Eq)]
pub enum RekeyError {
    #[error("link epoch space exhausted (epoch 255 reached)")]
    EpochExhausted,
}

/// Why an inbound frame was rejected. Each variant is a separately counted
/// outcome, not an internal error.
#[derive(Error, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reject {
    #[error("authentication tag mismatch")]
    BadMac,
    #[error("counter not beyond the last accepted frame")]
    Replay,
    #[error("frame epoch differs from the link epoch")]
    StaleEpoch,
    #[error("echoed nonce does not match the outstanding challenge")]
    NotFresh,
    #[error("link key is marked exposed; rekey before opening")]
    Exposed,
}

#[derive(Clone, Debug)]
pub struct LinkState {
    pub local_id: u16,
    pub peer_id: u16,
    master_secret: MasterKey,
    pub epoch: u8,
    k_encr: RoundKeySchedule,
    k_mac: RoundKeySchedule,
    pub send_counter: u64,
    pub last_accepted_counter: Option<u64>,
    pub exposed: bool,
}

impl LinkState {
    /// Fresh state at epoch 0. Both endpoints of a link construct this from
    /// the same master secret (with local/peer swapped) and stay in step.
    pub fn new(local_id: u16, peer_id: u16, master_secret: MasterKey) -> LinkState {
        let (k_encr, k_mac) = derive_link_keys(&master_secret, 0);
        LinkState {
            local_id,
            peer_id,
            master_secret,
            epoch: 0,
            k_encr,
            k_mac,
            send_counter: 0,
            last_accepted_counter: None,
            exposed: false,
        }
    }

    /// Seal `payload` into a DATA frame (or DATA_FRESH when echoing a
    /// challenge nonce). Consumes one send counter.
    pub fn snep_seal(
        &mut self,
        payload: &[u8],
        nonce_echo: Option<[u8; 8]>,
    ) -> Result<Frame, SealError> {
        if self.exposed {
            return Err(SealError::Exposed);
        }
        if payload.len() > MAX_PAYLOAD_LEN {
            return Err(SealError::Oversized { len: payload.len() });
        }
        let counter = self.send_counter;
        let body = ctr_crypt(&self.k_encr, counter, self.epoch, payload)
            .expect("payload length already checked");
        let mut frame = Frame {
            frame_type: if nonce_echo.is_some() { FrameType::DataFresh } else { FrameType::Data },
            src: self.local_id,
            dst: self.peer_id,
            epoch: self.epoch,
            counter,
            nonce: nonce_echo,
            body,
            mac: crate::cipher::MacTag([0; 8]),
        };
        frame.mac = cbc_mac(&self.k_mac, &frame.signed_bytes())
            .expect("frame header plus body is within the MAC limit");
        self.send_counter += 1;
        Ok(frame)
    }

    /// The shared verification pipeline: authenticity first (under the keys
    /// of the epoch the frame claims, so tampering anywhere — including the
    /// epoch byte — reads as a MAC failure), then epoch equality, then the
    /// strictly-greater counter rule. No state is touched on rejection.
    fn open_checks(&self, f: &Frame) -> Result<(), Reject> {
        if self.exposed {
            return Err(Reject::Exposed);
        }
        let mac_schedule = if f.epoch == self.epoch {
            self.k_mac
        } else {
            derive_link_keys(&self.master_secret, f.epoch).1
        };
        let expected = cbc_mac(&mac_schedule, &f.signed_bytes()).map_err(|_| Reject::BadMac)?;
        if expected != f.mac {
            return Err(Reject::BadMac);
        }
        if f.epoch != self.epoch {
            return Err(Reject::StaleEpoch);
        }
        if let Some(last) = self.last_accepted_counter {
            if f.counter <= last {
                return Err(Reject::Replay);
            }
        }
        Ok(())
    }

    fn commit_open(&mut self, f: &Frame) -> Vec<u8> {
        let payload = ctr_crypt(&self.k_encr, f.counter, f.epoch, &f.body)
            .expect("parsed body is within the frame limit");
        self.last_accepted_counter = Some(f.counter);
        payload
    }

    /// Verify and decrypt an inbound sealed frame.
    pub fn snep_open(&mut self, f: &Frame) -> Result<Vec<u8>, Reject> {
        self.open_checks(f)?;
        Ok(self.commit_open(f))
    }

    /// Start a strong-freshness exchange: draw a nonce and seal it as the
    /// challenge payload. The caller keeps the nonce for
    /// [`LinkState::verify_fresh_response`].
    pub fn nonce_challenge(
        &mut self,
        rng: &mut impl RngCore,
    ) -> Result<([u8; 8], Frame), SealError> {
        let mut nonce = [0u8; 8];
        rng.fill_bytes(&mut nonce);
        let frame = self.snep_seal(&nonce, None)?;
        Ok((nonce, frame))
    }

    /// Open a DATA_FRESH response and additionally require it to echo the
    /// retained challenge nonce.
    pub fn verify_fresh_response(
        &mut self,
        nonce: [u8; 8],
        f: &Frame,
    ) -> Result<Vec<u8>, Reject> {
        debug_assert_eq!(f.frame_type, FrameType::DataFresh);
        self.open_checks(f)?;
        if f.nonce != Some(nonce) {
            return Err(Reject::NotFresh);
        }
        Ok(self.commit_open(f))
    }

    /// Flag the link keys as exposed; sealing and opening refuse until rekey.
    pub fn mark_key_exposed(&mut self) {
        self.exposed = true;
    }

    /// Advance to the next epoch: re-derive keys, reset both counters, clear
    /// the exposure flag. Fails once the 8-bit epoch space is used up.
    pub fn rekey(&mut self) -> Result<(), RekeyError> {
        if self.epoch == u8::MAX {
            return Err(RekeyError::EpochExhausted);
        }
        self.epoch += 1;
        let (k_encr, k_mac) = derive_link_keys(&self.master_secret, self.epoch);
        self.k_encr = k_encr;
        self.k_mac = k_mac;
        self.send_counter = 0;
        self.last_accepted_counter = None;
        self.exposed = false;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn pair() -> (LinkState, LinkState) {
        let secret = MasterKey(*b"link secret 0123");
        (LinkState::new(1, 2, secret), LinkState::new(2, 1, secret))
    }

    #[test]
    fn derive_keys_distinct_and_epoch_dependent() {
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        for _ in 0..100 {
            let secret = MasterKey(rng.gen());
            let (e0, m0) = derive_link_keys(&secret, 0);
            let (e1, _) = derive_link_keys(&secret, 1);
            assert_ne!(e0, m0);
            assert_ne!(e0, e1);
            assert_eq!(derive_link_keys(&secret, 0), (e0, m0));
        }
    }

    #[test]
    fn seal_open_roundtrip() {
        let (mut a, mut b) = pair();
        let payload = b"temperature=21.5C";
        let f = a.snep_seal(payload, None).unwrap();
        assert_ne!(f.body, payload); // body is ciphertext
        assert_eq!(b.snep_open(&f).unwrap(), payload);
    }

    #[test]
    fn counters_increment_per_seal() {
        let (mut a, _) = pair();
        let f1 = a.snep_seal(b"x", None).unwrap();
        let f2 = a.snep_seal(b"y", None).unwrap();
        assert_eq!(f1.counter, 0);
        assert_eq!(f2.counter, 1);
    }

    #[test]
    fn replay_rejected() {
        let (mut a, mut b) = pair();
        let f = a.snep_seal(b"reading", None).unwrap();
        assert!(b.snep_open(&f).is_ok());
        assert_eq!(b.snep_open(&f), Err(Reject::Replay));
    }

    #[test]
    fn out_of_order_counters() {
        let (mut a, mut b) = pair();
        let f0 = a.snep_seal(b"0", None).unwrap();
        let f1 = a.snep_seal(b"1", None).unwrap();
        assert!(b.snep_open(&f1).is_ok());
        assert_eq!(b.snep_open(&f0), Err(Reject::Replay));
    }

    #[test]
    fn tamper_any_bit_is_bad_mac() {
        let (mut a, mut b) = pair();
        let f = a.snep_seal(b"tamper target", None).unwrap();
        let bytes = f.serialize();
        for bit in 0..bytes.len() * 8 {
            let mut mutated = bytes.clone();
            mutated[bit / 8] ^= 0x80 >> (bit % 8);
            let mut receiver = b.clone();
            match Frame::parse(&mutated) {
                Ok(parsed) => {
                    assert_eq!(receiver.snep_open(&parsed), Err(Reject::BadMac), "bit {bit}")
                }
                // Structural damage (version/type/len bits) is also a reject.
                Err(_) => {}
            }
        }
        assert_eq!(b.snep_open(&f).unwrap(), b"tamper target");
    }

    #[test]
    fn fresh_exchange_accepts_and_rejects() {
        let (mut a, mut b) = pair();
        let mut rng = ChaCha12Rng::seed_from_u64(88);
        let (nonce, challenge) = a.nonce_challenge(&mut rng).unwrap();
        let echoed = b.snep_open(&challenge).unwrap();
        assert_eq!(echoed, nonce);

        let response = b.snep_seal(b"ok", Some(echoed.try_into().unwrap())).unwrap();
        assert_eq!(a.verify_fresh_response(nonce, &response).unwrap(), b"ok");

        // A response echoing some other nonce is not fresh.
        let stale = b.snep_seal(b"ok", Some([0xAB; 8])).unwrap();
        assert_eq!(a.verify_fresh_response(nonce, &stale), Err(Reject::NotFresh));
    }

    #[test]
    fn fresh_nonce_field_is_mac_covered() {
        let (mut a, mut b) = pair();
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let (nonce, challenge) = a.nonce_challenge(&mut rng).unwrap();
        b.snep_open(&challenge).unwrap();
        let response = b.snep_seal(b"ok", Some(nonce)).unwrap();
        let mut zeroed = response.clone();
        zeroed.nonce = Some([0u8; 8]);
        assert_eq!(a.verify_fresh_response(nonce, &zeroed), Err(Reject::BadMac));
    }

    #[test]
    fn seeded_rng_reproducible_nonces() {
        let (mut a, _) = pair();
        let (n1, _) = a.nonce_challenge(&mut ChaCha12Rng::seed_from_u64(5)).unwrap();
        let (mut c, _) = pair();
        let (n2, _) = c.nonce_challenge(&mut ChaCha12Rng::seed_from_u64(5)).unwrap();
        assert_eq!(n1, n2);
    }

    #[test]
    fn exposure_blocks_both_directions_until_rekey() {
        let (mut a, mut b) = pair();
        let in_flight = a.snep_seal(b"pre", None).unwrap();
        a.mark_key_exposed();
        a.mark_key_exposed(); // idempotent
        assert_eq!(a.snep_seal(b"post", None), Err(SealError::Exposed));
        b.mark_key_exposed();
        assert_eq!(b.snep_open(&in_flight), Err(Reject::Exposed));

        a.rekey().unwrap();
        b.rekey().unwrap();
        let f = a.snep_seal(b"post", None).unwrap();
        assert_eq!(b.snep_open(&f).unwrap(), b"post");
    }

    #[test]
    fn stale_epoch_rejected_after_rekey() {
        let (mut a, mut b) = pair();
        let old = a.snep_seal(b"old epoch", None).unwrap();
        a.rekey().unwrap();
        b.rekey().unwrap();
        // Honest frame from the previous epoch: authentic, but stale.
        assert_eq!(b.snep_open(&old), Err(Reject::StaleEpoch));
        // Tampering the epoch byte of a current frame is a MAC failure, not stale.
        let current = a.snep_seal(b"new epoch", None).unwrap();
        let mut forged = current.clone();
        forged.epoch = 0;
        assert_eq!(b.snep_open(&forged), Err(Reject::BadMac));
        assert_eq!(b.snep_open(&current).unwrap(), b"new epoch");
    }

    #[test]
    fn rekey_resets_counters_and_exhausts() {
        let (mut a, _) = pair();
        a.snep_seal(b"x", None).unwrap();
        assert_eq!(a.send_counter, 1);
        a.rekey().unwrap();
        assert_eq!(a.send_counter, 0);
        assert_eq!(a.last_accepted_counter, None);
        for _ in 2..=255 {
            a.rekey().unwrap();
        }
        assert_eq!(a.epoch, 255);
        assert_eq!(a.rekey(), Err(RekeyError::EpochExhausted));
    }

    #[test]
    fn oversized_payload_refused() {
        let (mut a, _) = pair();
        let big = vec![0u8; MAX_PAYLOAD_LEN + 1];
        assert_eq!(
            a.snep_seal(&big, None),
            Err(SealError::Oversized { len: MAX_PAYLOAD_LEN + 1 })
        );
    }

    /// Exhaustive replay interleavings: three honest frames and a byte-exact
    /// copy of each, delivered in every one of the 6! orderings. No byte
    /// pattern may ever be accepted twice, every repeat delivery must be
    /// rejected as a replay, and accepted counters must be strictly
    /// increasing.
    #[test]
    fn replay_immune_under_all_interleavings() {
        let (mut a, b) = pair();
        let honest: Vec<Vec<u8>> = (0..3)
            .map(|i| a.snep_seal(format!("frame {i}").as_bytes(), None).unwrap().serialize())
            .collect();
        // Delivery schedule: indices 0..3 are originals, 3..6 are replays.
        let deliveries: Vec<&[u8]> =
            honest.iter().chain(honest.iter()).map(|v| v.as_slice()).collect();

        let mut order: Vec<usize> = (0..6).collect();
        let mut orderings = Vec::new();
        permutations(&mut order, 0, &mut orderings);
        assert_eq!(orderings.len(), 720);

        for ordering in orderings {
            let mut receiver = b.clone();
            let mut seen: Vec<&[u8]> = Vec::new();
            let mut last_counter = None;
            for &i in &ordering {
                let bytes = deliveries[i];
                let frame = Frame::parse(bytes).unwrap();
                let result = receiver.snep_open(&frame);
                if seen.contains(&bytes) {
                    assert_eq!(result, Err(Reject::Replay), "ordering {ordering:?}");
                } else if let Ok(_) = result {
                    assert!(last_counter < Some(frame.counter));
                    last_counter = Some(frame.counter);
                }
                seen.push(bytes);
            }
        }
    }

    fn permutations(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permutations(items, k + 1, out);
            items.swap(k, i);
        }
    }
}
