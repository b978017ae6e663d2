//! The LSA block cipher and its derived symmetric primitives.
//!
//! A 128-bit block is split into two 64-bit halves and run through a 5-round
//! Feistel network. The round function is two substitution-permutation layers
//! (4-bit S-box, PRESENT-style bit scatter) over `half XOR round_key`. The
//! five 64-bit round keys come from a substitute-constant-rotate-extract
//! schedule over the 128-bit master key.
//!
//! On top of the raw block operation sit counter-mode stream encryption
//! ([`ctr_crypt`]), a length-prefixed CBC-MAC ([`cbc_mac`]), and a
//! Davies-Meyer style one-way function ([`dm_hash`]).
//!
//! All functions here are pure; every multi-byte serialization is big-endian
//! and bit 0 of a value means its most significant bit.

use thiserror::Error;

/// A Feistel half: 64 bits, bit 0 = most significant.
pub type HalfBlock = u64;

/// Maximum byte length accepted by [`ctr_crypt`] and [`cbc_mac`].
pub const MAX_DATA_LEN: usize = 1 << 16;

/// 128-bit secret key, serialized most-significant byte first.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct MasterKey(pub [u8; 16]);

/// 128-bit cipher block, serialized most-significant byte first.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Block(pub u128);

impl Block {
    pub const ZERO: Block = Block(0);

    pub fn from_bytes(b: [u8; 16]) -> Block {
        Block(u128::from_be_bytes(b))
    }

    pub fn to_bytes(self) -> [u8; 16] {
        self.0.to_be_bytes()
    }
}

/// The five 64-bit round keys K_1..K_5 expanded from a master key.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RoundKeySchedule(pub [u64; 5]);

/// 64-bit authentication tag (the truncated CBC-MAC chain head).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct MacTag(pub [u8; 8]);

#[derive(Error, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CipherError {
    #[error("data of {len} bytes exceeds the {MAX_DATA_LEN}-byte limit")]
    Oversized { len: usize },
}

/// The fixed bijective 4-bit S-box.
#[rustfmt::skip]
pub const SBOX: [u8; 16] = [
    0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD,
    0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2,
];

/// Inverse of [`SBOX`].
#[rustfmt::skip]
pub const SBOX_INV: [u8; 16] = [
    0x5, 0xE, 0xF, 0x8, 0xC, 0x1, 0x2, 0xD,
    0xB, 0x4, 0x6, 0x3, 0x0, 0x7, 0x9, 0xA,
];

/// S-box lookup for a single nibble.
pub fn sbox(n: u8) -> u8 {
    debug_assert!(n <= 0xF);
    SBOX[(n & 0xF) as usize]
}

/// Destination bit position for source position `i` (0 = MSB) under the
/// 64-bit permutation layer.
const fn p_dest(i: usize) -> usize {
    if i < 63 {
        (16 * i) % 63
    } else {
        63
    }
}

/// S-box applied to both nibbles of each byte value, tabulated once.
const SUB_BYTE: [u8; 256] = {
    let mut t = [0u8; 256];
    let mut b = 0;
    while b < 256 {
        t[b] = (SBOX[b >> 4] << 4) | SBOX[b & 0xF];
        b += 1;
    }
    t
};

/// Fused substitution+permutation contributions: `SP_TABLE[i][v]` is the
/// scattered image of nibble value `v` sitting at nibble index `i` (i = 0 is
/// the most significant nibble) after S-box and bit permutation.
const SP_TABLE: [[u64; 16]; 16] = {
    let mut t = [[0u64; 16]; 16];
    let mut ni = 0;
    while ni < 16 {
        let mut v = 0;
        while v < 16 {
            let s = SBOX[v] as u64;
            let mut b = 0;
            while b < 4 {
                if (s >> (3 - b)) & 1 == 1 {
                    let dst = p_dest(4 * ni + b);
                    t[ni][v] |= 1u64 << (63 - dst);
                }
                b += 1;
            }
            v += 1;
        }
        ni += 1;
    }
    t
};

/// Apply the S-box to all 16 nibbles of a half block.
pub fn sub_nibbles_64(x: HalfBlock) -> HalfBlock {
    let mut out = 0u64;
    for (i, b) in x.to_be_bytes().into_iter().enumerate() {
        out |= (SUB_BYTE[b as usize] as u64) << (56 - 8 * i);
    }
    out
}

/// Bit permutation layer: bit i (0 = MSB) moves to position `(16*i) mod 63`,
/// with bit 63 fixed.
pub fn permute64(h: HalfBlock) -> HalfBlock {
    let mut out = 0u64;
    for i in 0..64 {
        if (h >> (63 - i)) & 1 == 1 {
            out |= 1u64 << (63 - p_dest(i));
        }
    }
    out
}

/// One fused substitution-permutation layer (equals
/// `permute64(sub_nibbles_64(x))`).
fn sp_layer(x: u64) -> u64 {
    let mut out = 0u64;
    let mut i = 0;
    while i < 16 {
        out |= SP_TABLE[i][((x >> (60 - 4 * i)) & 0xF) as usize];
        i += 1;
    }
    out
}

/// Feistel round function: two SP layers over `x XOR k`.
pub fn round_f(x: HalfBlock, k: u64) -> HalfBlock {
    sp_layer(sp_layer(x ^ k))
}

/// Round constant for round `r`: byte j = (16*r + j) mod 256, big-endian.
const fn round_constant(r: usize) -> u128 {
    let mut rc = 0u128;
    let mut j = 0;
    while j < 16 {
        rc |= (((16 * r + j) % 256) as u128) << (120 - 8 * j);
        j += 1;
    }
    rc
}

fn sub_nibbles_128(x: u128) -> u128 {
    let mut out = 0u128;
    for (i, b) in x.to_be_bytes().into_iter().enumerate() {
        out |= (SUB_BYTE[b as usize] as u128) << (120 - 8 * i);
    }
    out
}

/// Expand a master key into the five round keys: per round, substitute all
/// nibbles, XOR the round constant, rotate left by `13*r mod 128`, and take
/// the most significant 64 bits.
pub fn expand_key(mk: &MasterKey) -> RoundKeySchedule {
    let mut state = u128::from_be_bytes(mk.0);
    let mut ks = [0u64; 5];
    for r in 1..=5usize {
        state = sub_nibbles_128(state);
        state ^= round_constant(r);
        state = state.rotate_left(((13 * r) % 128) as u32);
        ks[r - 1] = (state >> 64) as u64;
    }
    RoundKeySchedule(ks)
}

/// Encrypt one block: five Feistel rounds and a final half swap.
pub fn encrypt_block(p: Block, ks: &RoundKeySchedule) -> Block {
    let mut l = (p.0 >> 64) as u64;
    let mut r = p.0 as u64;
    for k in ks.0 {
        let next_r = l ^ round_f(r, k);
        l = r;
        r = next_r;
    }
    Block(((r as u128) << 64) | l as u128)
}

/// Decrypt one block: the same network with the key order reversed.
pub fn decrypt_block(c: Block, ks: &RoundKeySchedule) -> Block {
    let mut l = (c.0 >> 64) as u64;
    let mut r = c.0 as u64;
    for k in ks.0.into_iter().rev() {
        let next_r = l ^ round_f(r, k);
        l = r;
        r = next_r;
    }
    Block(((r as u128) << 64) | l as u128)
}

/// Counter-mode keystream block i for a (counter, epoch) pair:
/// `counter(8) || epoch(1) || 0x000000 || i(4)`, big-endian.
fn counter_block(counter: u64, epoch: u8, i: u32) -> Block {
    let mut b = [0u8; 16];
    b[0..8].copy_from_slice(&counter.to_be_bytes());
    b[8] = epoch;
    b[12..16].copy_from_slice(&i.to_be_bytes());
    Block::from_bytes(b)
}

/// XOR `data` with the keystream for (counter, epoch). Applying the same call
/// twice restores the input.
pub fn ctr_crypt(
    ks: &RoundKeySchedule,
    counter: u64,
    epoch: u8,
    data: &[u8],
) -> Result<Vec<u8>, CipherError> {
    if data.len() > MAX_DATA_LEN {
        return Err(CipherError::Oversized { len: data.len() });
    }
    let mut out = Vec::with_capacity(data.len());
    for (i, chunk) in data.chunks(16).enumerate() {
        let stream = encrypt_block(counter_block(counter, epoch, i as u32), ks).to_bytes();
        out.extend(chunk.iter().zip(stream.iter()).map(|(d, s)| d ^ s));
    }
    Ok(out)
}

/// Number of keystream blocks [`ctr_crypt`] uses for `len` bytes.
pub fn ctr_blocks(len: usize) -> usize {
    len.div_ceil(16)
}

/// Number of cipher blocks [`cbc_mac`] chains over `len` bytes of data
/// (8-byte length prefix, the data, 0x80, zero padding to a block multiple).
pub fn mac_blocks(len: usize) -> usize {
    (8 + len + 1).div_ceil(16)
}

/// CBC-MAC over `len(data) || data || 0x80 || zero padding`; the tag is the
/// most significant 64 bits of the final chain block.
pub fn cbc_mac(ks: &RoundKeySchedule, data: &[u8]) -> Result<MacTag, CipherError> {
    if data.len() > MAX_DATA_LEN {
        return Err(CipherError::Oversized { len: data.len() });
    }
    let mut m = Vec::with_capacity(8 + data.len() + 16);
    m.extend_from_slice(&(data.len() as u64).to_be_bytes());
    m.extend_from_slice(data);
    m.push(0x80);
    while m.len() % 16 != 0 {
        m.push(0x00);
    }
    let mut c = Block::ZERO;
    for chunk in m.chunks(16) {
        let mut x = [0u8; 16];
        x.copy_from_slice(chunk);
        c = encrypt_block(Block(c.0 ^ Block::from_bytes(x).0), ks);
    }
    let mut tag = [0u8; 8];
    tag.copy_from_slice(&c.to_bytes()[0..8]);
    Ok(MacTag(tag))
}

/// One-way function for hash chains: `E(0, expand_key(x)) XOR x`
/// (Davies-Meyer style feedforward, keyed by the input).
pub fn dm_hash(x: Block) -> Block {
    let ks = expand_key(&MasterKey(x.to_bytes()));
    Block(encrypt_block(Block::ZERO, &ks).0 ^ x.0)
}
