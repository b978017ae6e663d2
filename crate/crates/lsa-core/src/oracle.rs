//! Straight-line reference implementation of the block cipher.
//!
//! This module exists to cross-check the optimized path in [`crate::cipher`]
//! and to generate/verify the frozen golden vectors. It deliberately shares no
//! code with the optimized implementation: values are byte arrays, every bit
//! move is an explicit loop, and no lookup tables beyond the S-box itself are
//! used. Keep it slow and obvious.

/// The cipher's 4-bit S-box (same fixed table as the optimized path; the
/// table is part of the algorithm definition, not an implementation detail).
const S: [u8; 16] = [
    0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD, 0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2,
];

/// Bit `i` of `bytes`, where bit 0 is the most significant bit of byte 0.
fn get_bit(bytes: &[u8], i: usize) -> u8 {
    (bytes[i / 8] >> (7 - (i % 8))) & 1
}

/// Set bit `i` (same MSB-first convention) to 1 if `b` is 1.
fn set_bit(bytes: &mut [u8], i: usize, b: u8) {
    if b == 1 {
        bytes[i / 8] |= 0x80 >> (i % 8);
    }
}

/// Destination of bit position `i` under the 64-bit permutation layer.
fn p_dest(i: usize) -> usize {
    if i < 63 {
        (16 * i) % 63
    } else {
        63
    }
}

/// Apply the S-box to every nibble of an 8-byte half.
fn sub_nibbles_half(x: &[u8; 8]) -> [u8; 8] {
    let mut out = [0u8; 8];
    for (o, b) in out.iter_mut().zip(x.iter()) {
        *o = (S[(b >> 4) as usize] << 4) | S[(b & 0xF) as usize];
    }
    out
}

/// Scatter the 64 bits of `x`: bit i moves to position p_dest(i).
fn permute_half(x: &[u8; 8]) -> [u8; 8] {
    let mut out = [0u8; 8];
    for i in 0..64 {
        set_bit(&mut out, p_dest(i), get_bit(x, i));
    }
    out
}

/// Feistel round function: two substitution-permutation layers over `x XOR k`.
pub fn oracle_round_f(x: &[u8; 8], k: &[u8; 8]) -> [u8; 8] {
    let mut t = [0u8; 8];
    for i in 0..8 {
        t[i] = x[i] ^ k[i];
    }
    t = permute_half(&sub_nibbles_half(&t));
    permute_half(&sub_nibbles_half(&t))
}

/// Rotate a 16-byte value left by `n` bits (MSB-first bit order).
fn rotl128(x: &[u8; 16], n: usize) -> [u8; 16] {
    let mut out = [0u8; 16];
    for j in 0..128 {
        set_bit(&mut out, j, get_bit(x, (j + n) % 128));
    }
    out
}

/// Key schedule: substitute all nibbles, XOR a round constant, rotate, and
/// extract the top half, five times over.
pub fn oracle_expand_key(mk: &[u8; 16]) -> [[u8; 8]; 5] {
    let mut state = *mk;
    let mut ks = [[0u8; 8]; 5];
    for r in 1..=5usize {
        let mut subbed = [0u8; 16];
        for (o, b) in subbed.iter_mut().zip(state.iter()) {
            *o = (S[(b >> 4) as usize] << 4) | S[(b & 0xF) as usize];
        }
        for (j, byte) in subbed.iter_mut().enumerate() {
            *byte ^= ((16 * r + j) % 256) as u8;
        }
        state = rotl128(&subbed, (13 * r) % 128);
        ks[r - 1].copy_from_slice(&state[0..8]);
    }
    ks
}

/// Five Feistel rounds with a final half swap.
pub fn oracle_encrypt_block(p: &[u8; 16], ks: &[[u8; 8]; 5]) -> [u8; 16] {
    let mut l = [0u8; 8];
    let mut r = [0u8; 8];
    l.copy_from_slice(&p[0..8]);
    r.copy_from_slice(&p[8..16]);
    for k in ks {
        let f = oracle_round_f(&r, k);
        let mut new_r = [0u8; 8];
        for i in 0..8 {
            new_r[i] = l[i] ^ f[i];
        }
        l = r;
        r = new_r;
    }
    let mut out = [0u8; 16];
    out[0..8].copy_from_slice(&r);
    out[8..16].copy_from_slice(&l);
    out
}

/// Inverse of [`oracle_encrypt_block`]: the same network with reversed keys.
pub fn oracle_decrypt_block(c: &[u8; 16], ks: &[[u8; 8]; 5]) -> [u8; 16] {
    let mut rev = *ks;
    rev.reverse();
    oracle_encrypt_block(c, &rev)
}

/// CBC-MAC over `len || data || 0x80 || zero padding`, tag = top 8 bytes.
pub fn oracle_cbc_mac(ks: &[[u8; 8]; 5], data: &[u8]) -> [u8; 8] {
    let mut m = Vec::with_capacity(8 + data.len() + 16);
    m.extend_from_slice(&(data.len() as u64).to_be_bytes());
    m.extend_from_slice(data);
    m.push(0x80);
    while m.len() % 16 != 0 {
        m.push(0x00);
    }
    let mut c = [0u8; 16];
    for chunk in m.chunks(16) {
        let mut x = [0u8; 16];
        for i in 0..16 {
            x[i] = c[i] ^ chunk[i];
        }
        c = oracle_encrypt_block(&x, ks);
    }
    let mut tag = [0u8; 8];
    tag.copy_from_slice(&c[0..8]);
    tag
}

/// One-way function: encrypt the zero block under `expand_key(x)` and fold
/// `x` back in.
pub fn oracle_dm_hash(x: &[u8; 16]) -> [u8; 16] {
    let ks = oracle_expand_key(x);
    let mut h = oracle_encrypt_block(&[0u8; 16], &ks);
    for i in 0..16 {
        h[i] ^= x[i];
    }
    h
}
