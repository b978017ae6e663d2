//! Wire frame format.
//!
//! Every frame is laid out big-endian as
//!
//! ```text
//! ver(1) type(1) src(2) dst(2) epoch(1) counter(8) [nonce(8)] len(2) body(len) mac(8)
//! ```
//!
//! The nonce field exists only for type 0x02 (DATA_FRESH). The mac covers
//! every preceding byte of the frame. Parsing requires the buffer to contain
//! exactly one frame.

use crate::cipher::MacTag;
use thiserror::Error;

/// Protocol version carried in every frame.
pub const FRAME_VERSION: u8 = 0x01;

/// Destination address used by broadcast frames.
pub const BROADCAST_ADDR: u16 = 0xFFFF;

/// Fixed part of the header (everything before the optional nonce and len's
/// body): ver + type + src + dst + epoch + counter + len.
pub const BASE_HEADER_LEN: usize = 1 + 1 + 2 + 2 + 1 + 8 + 2;

/// Length of the trailing authentication tag.
pub const MAC_LEN: usize = 8;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FrameType {
    /// Sealed unicast payload.
    Data = 0x01,
    /// Sealed unicast payload echoing a challenge nonce.
    DataFresh = 0x02,
    /// Broadcast payload authenticated by a chain key disclosed later.
    Bcast = 0x03,
    /// Delayed disclosure of a chain key.
    Disclose = 0x04,
}

impl FrameType {
    pub fn from_byte(b: u8) -> Option<FrameType> {
        match b {
            0x01 => Some(FrameType::Data),
            0x02 => Some(FrameType::DataFresh),
            0x03 => Some(FrameType::Bcast),
            0x04 => Some(FrameType::Disclose),
            _ => None,
        }
    }

    /// Header length for this type (base header plus nonce where present).
    pub fn header_len(self) -> usize {
        match self {
            FrameType::DataFresh => BASE_HEADER_LEN + 8,
            _ => BASE_HEADER_LEN,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Frame {
    pub frame_type: FrameType,
    pub src: u16,
    pub dst: u16,
    pub epoch: u8,
    /// Link counter for sealed unicast; interval index for broadcast types.
    pub counter: u64,
    /// Echoed challenge nonce; present exactly when `frame_type` is DataFresh.
    pub nonce: Option<[u8; 8]>,
    pub body: Vec<u8>,
    pub mac: MacTag,
}

#[derive(Error, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameError {
    #[error("frame of {len} bytes is shorter than the minimal frame")]
    TooShort { len: usize },
    #[error("unsupported frame version 0x{0:02x}")]
    BadVersion(u8),
    #[error("unknown frame type 0x{0:02x}")]
    BadType(u8),
    #[error("declared body length {declared} does not fit a {total}-byte frame")]
    LengthMismatch { declared: usize, total: usize },
}

impl Frame {
    /// Total serialized length for a frame of `frame_type` with `body_len`
    /// payload bytes.
    pub fn serialized_len_for(frame_type: FrameType, body_len: usize) -> usize {
        frame_type.header_len() + body_len + MAC_LEN
    }

    pub fn serialized_len(&self) -> usize {
        Frame::serialized_len_for(self.frame_type, self.body.len())
    }

    /// Every byte the mac covers, in wire order.
    pub fn signed_bytes(&self) -> Vec<u8> {
        debug_assert_eq!(
            self.nonce.is_some(),
            self.frame_type == FrameType::DataFresh,
            "nonce is present exactly on DATA_FRESH frames"
        );
        let mut out = Vec::with_capacity(self.serialized_len() - MAC_LEN);
        out.push(FRAME_VERSION);
        out.push(self.frame_type as u8);
        out.extend_from_slice(&self.src.to_be_bytes());
        out.extend_from_slice(&self.dst.to_be_bytes());
        out.push(self.epoch);
        out.extend_from_slice(&self.counter.to_be_bytes());
        if let Some(nonce) = &self.nonce {
            out.extend_from_slice(nonce);
        }
        out.extend_from_slice(&(self.body.len() as u16).to_be_bytes());
        out.extend_from_slice(&self.body);
        out
    }

    pub fn serialize(&self) -> Vec<u8> {
        let mut out = self.signed_bytes();
        out.extend_from_slice(&self.mac.0);
        out
    }

    /// Parse exactly one frame from `bytes`; trailing bytes are an error.
    pub fn parse(bytes: &[u8]) -> Result<Frame, FrameError> {
        if bytes.len() < BASE_HEADER_LEN + MAC_LEN {
            return Err(FrameError::TooShort { len: bytes.len() });
        }
        if bytes[0] != FRAME_VERSION {
            return Err(FrameError::BadVersion(bytes[0]));
        }
        let frame_type = FrameType::from_byte(bytes[1]).ok_or(FrameError::BadType(bytes[1]))?;
        let header = frame_type.header_len();
        if bytes.len() < header + MAC_LEN {
            return Err(FrameError::TooShort { len: bytes.len() });
        }
        let src = u16::from_be_bytes([bytes[2], bytes[3]]);
        let dst = u16::from_be_bytes([bytes[4], bytes[5]]);
        let epoch = bytes[6];
        let counter = u64::from_be_bytes(bytes[7..15].try_into().unwrap());
        let nonce = match frame_type {
            FrameType::DataFresh => Some(bytes[15..23].try_into().unwrap()),
            _ => None,
        };
        let len_off = header - 2;
        let declared =
            u16::from_be_bytes([bytes[len_off], bytes[len_off + 1]]) as usize;
        if bytes.len() != header + declared + MAC_LEN {
            return Err(FrameError::LengthMismatch { declared, total: bytes.len() });
        }
        let body = bytes[header..header + declared].to_vec();
        let mac = MacTag(bytes[header + declared..].try_into().unwrap());
        Ok(Frame { frame_type, src, dst, epoch, counter, nonce, body, mac })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(frame_type: FrameType) -> Frame {
        Frame {
            frame_type,
            src: 1,
            dst: 2,
            epoch: 3,
            counter: 0x0102030405060708,
            nonce: (frame_type == FrameType::DataFresh).then_some(*b"NONCE!!!"),
            body: b"abc".to_vec(),
            mac: MacTag(*b"MACMACMA"),
        }
    }

    #[test]
    fn layout_golden() {
        let f = Frame {
            frame_type: FrameType::Data,
            src: 0x0001,
            dst: 0x0002,
            epoch: 0x00,
            counter: 5,
            nonce: None,
            body: vec![0xaa, 0xbb, 0xcc],
            mac: MacTag([0x11, 0x22, 0x33, 0x44, 0x55, 0x66, 0x77, 0x88]),
        };
        assert_eq!(
            hex::encode(f.serialize()),
            "0101000100020000000000000000050003aabbcc1122334455667788"
        );
    }

    #[test]
    fn header_lengths() {
        assert_eq!(FrameType::Data.header_len(), 17);
        assert_eq!(FrameType::DataFresh.header_len(), 25);
        assert_eq!(Frame::serialized_len_for(FrameType::Data, 0), 25);
        assert_eq!(Frame::serialized_len_for(FrameType::DataFresh, 0), 33);
    }

    #[test]
    fn roundtrip_all_types() {
        for ft in [FrameType::Data, FrameType::DataFresh, FrameType::Bcast, FrameType::Disclose] {
            let f = sample(ft);
            let bytes = f.serialize();
            assert_eq!(bytes.len(), f.serialized_len());
            assert_eq!(Frame::parse(&bytes).unwrap(), f);
        }
    }

    #[test]
    fn parse_rejects_structural_damage() {
        let good = sample(FrameType::Data).serialize();
        assert_eq!(Frame::parse(&good[..10]), Err(FrameError::TooShort { len: 10 }));

        let mut bad_ver = good.clone();
        bad_ver[0] = 0x02;
        assert_eq!(Frame::parse(&bad_ver), Err(FrameError::BadVersion(0x02)));

        let mut bad_type = good.clone();
        bad_type[1] = 0x7F;
        assert_eq!(Frame::parse(&bad_type), Err(FrameError::BadType(0x7F)));

        let mut bad_len = good.clone();
        bad_len[16] = 0xFF; // low byte of the len field
        assert!(matches!(Frame::parse(&bad_len), Err(FrameError::LengthMismatch { .. })));

        let mut trailing = good;
        trailing.push(0x00);
        assert!(matches!(Frame::parse(&trailing), Err(FrameError::LengthMismatch { .. })));
    }

    #[test]
    fn mac_covers_every_preceding_byte() {
        let f = sample(FrameType::DataFresh);
        let bytes = f.serialize();
        let signed = f.signed_bytes();
        assert_eq!(&bytes[..bytes.len() - MAC_LEN], &signed[..]);
    }
}
