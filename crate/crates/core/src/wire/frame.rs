//! Link-layer frame codec.
//!
//! ```text
//! +---------+------+-----+-----+-----------------+--------+--------+
//! | version | kind | seq | len | payload (len B) | crc_hi | crc_lo |
//! +---------+------+-----+-----+-----------------+--------+--------+
//! ```
//!
//! `version` is always 0x01. `kind` is 0x01 (CMD) or 0x02 (ACK). The CRC
//! covers every byte before it and is sent big-endian.

use thiserror::Error;

use super::crc::crc16_ccitt_false;

pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 4;
pub const CRC_LEN: usize = 2;
pub const MAX_PAYLOAD: usize = 48;
pub const MIN_FRAME_LEN: usize = HEADER_LEN + CRC_LEN;
pub const MAX_FRAME_LEN: usize = MIN_FRAME_LEN + MAX_PAYLOAD;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameKind {
    Cmd = 0x01,
    Ack = 0x02,
}

impl FrameKind {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0x01 => Some(FrameKind::Cmd),
            0x02 => Some(FrameKind::Ack),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    pub kind: FrameKind,
    pub seq: u8,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("payload of {0} bytes exceeds {MAX_PAYLOAD}")]
    PayloadTooLong(usize),
    #[error("truncated frame")]
    Truncated,
    #[error("unsupported frame version {0:#04x}")]
    BadVersion(u8),
    #[error("unknown frame kind {0:#04x}")]
    BadKind(u8),
    #[error("CRC mismatch")]
    BadCrc,
}

impl Frame {
    pub fn cmd(seq: u8, payload: impl Into<Vec<u8>>) -> Self {
        Self {
            kind: FrameKind::Cmd,
            seq,
            payload: payload.into(),
        }
    }

    pub fn ack(seq: u8, payload: impl Into<Vec<u8>>) -> Self {
        Self {
            kind: FrameKind::Ack,
            seq,
            payload: payload.into(),
        }
    }

    pub fn encoded_len(&self) -> usize {
        MIN_FRAME_LEN + self.payload.len()
    }
}

pub fn encode_frame(frame: &Frame) -> Result<Vec<u8>, FrameError> {
    let len = frame.payload.len();
    if len > MAX_PAYLOAD {
        return Err(FrameError::PayloadTooLong(len));
    }
    let mut out = Vec::with_capacity(frame.encoded_len());
    out.extend_from_slice(&[VERSION, frame.kind as u8, frame.seq, len as u8]);
    out.extend_from_slice(&frame.payload);
    let crc = crc16_ccitt_false(&out);
    out.extend_from_slice(&crc.to_be_bytes());
    Ok(out)
}

/// Decodes one frame.
///
/// Length and CRC are checked before version and kind, so any corruption
/// of a valid frame surfaces as `Truncated` or `BadCrc`.
pub fn decode_frame(bytes: &[u8]) -> Result<Frame, FrameError> {
    if bytes.len() < MIN_FRAME_LEN {
        return Err(FrameError::Truncated);
    }
    let len = usize::from(bytes[3]);
    if bytes.len() != MIN_FRAME_LEN + len {
        return Err(FrameError::Truncated);
    }
    let (body, crc) = bytes.split_at(HEADER_LEN + len);
    if crc16_ccitt_false(body) != u16::from_be_bytes([crc[0], crc[1]]) {
        return Err(FrameError::BadCrc);
    }
    if bytes[0] != VERSION {
        return Err(FrameError::BadVersion(bytes[0]));
    }
    let kind = FrameKind::from_byte(bytes[1]).ok_or(FrameError::BadKind(bytes[1]))?;
    if len > MAX_PAYLOAD {
        return Err(FrameError::PayloadTooLong(len));
    }
    Ok(Frame {
        kind,
        seq: bytes[2],
        payload: body[HEADER_LEN..].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cmd_frame_layout() {
        let bytes = encode_frame(&Frame::cmd(0, "led1_on")).unwrap();
        assert_eq!(bytes.len(), 13);
        assert_eq!(&bytes[..4], &[0x01, 0x01, 0x00, 0x07]);
        assert_eq!(&bytes[4..11], b"led1_on");
        let crc = crc16_ccitt_false(&bytes[..11]);
        assert_eq!(&bytes[11..], &crc.to_be_bytes());
        // pinned in docs/protocol.md
        assert_eq!(&bytes[11..], &[0x77, 0x77]);
    }

    #[test]
    fn empty_payload() {
        let f = Frame::ack(200, Vec::new());
        let bytes = encode_frame(&f).unwrap();
        assert_eq!(bytes.len(), 6);
        assert_eq!(decode_frame(&bytes).unwrap(), f);
    }

    #[test]
    fn payload_limits() {
        assert_eq!(
            encode_frame(&Frame::cmd(1, vec![b'x'; 48])).unwrap().len(),
            MAX_FRAME_LEN
        );
        assert_eq!(
            encode_frame(&Frame::cmd(1, vec![b'x'; 49])),
            Err(FrameError::PayloadTooLong(49))
        );
    }

    #[test]
    fn decode_errors_are_distinct() {
        assert_eq!(decode_frame(&[1, 1, 0, 0, 0]), Err(FrameError::Truncated));
        assert_eq!(decode_frame(&[]), Err(FrameError::Truncated));

        let good = encode_frame(&Frame::cmd(3, "led2_on")).unwrap();
        assert_eq!(
            decode_frame(&good[..good.len() - 1]),
            Err(FrameError::Truncated)
        );
        let mut longer = good.clone();
        longer.push(0);
        assert_eq!(decode_frame(&longer), Err(FrameError::Truncated));

        let mut bad_crc = good.clone();
        bad_crc[5] ^= 0x20;
        assert_eq!(decode_frame(&bad_crc), Err(FrameError::BadCrc));

        let reseal = |mut b: Vec<u8>| {
            let n = b.len() - 2;
            let crc = crc16_ccitt_false(&b[..n]);
            b[n..].copy_from_slice(&crc.to_be_bytes());
            b
        };
        let mut v2 = good.clone();
        v2[0] = 0x02;
        assert_eq!(decode_frame(&reseal(v2)), Err(FrameError::BadVersion(0x02)));
        let mut k9 = good.clone();
        k9[1] = 0x09;
        assert_eq!(decode_frame(&reseal(k9)), Err(FrameError::BadKind(0x09)));
    }

    #[test]
    fn single_bit_flips_never_decode_silently() {
        let good = encode_frame(&Frame::cmd(0, "led1_on")).unwrap();
        for bit in 0..good.len() * 8 {
            let mut b = good.clone();
            b[bit / 8] ^= 1 << (bit % 8);
            let r = decode_frame(&b);
            assert!(
                matches!(r, Err(FrameError::BadCrc | FrameError::Truncated)),
                "bit {bit}: {r:?}"
            );
        }
    }

    fn frame_strategy() -> impl Strategy<Value = Frame> {
        (
            prop_oneof![Just(FrameKind::Cmd), Just(FrameKind::Ack)],
            any::<u8>(),
            prop::collection::vec(any::<u8>(), 0..=MAX_PAYLOAD),
        )
            .prop_map(|(kind, seq, payload)| Frame { kind, seq, payload })
    }

    proptest! {
        #[test]
        fn round_trip(f in frame_strategy()) {
            let bytes = encode_frame(&f).unwrap();
            prop_assert_eq!(bytes.len(), f.encoded_len());
            prop_assert_eq!(decode_frame(&bytes).unwrap(), f);
        }

        #[test]
        fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
            if let Ok(f) = decode_frame(&bytes) {
                prop_assert_eq!(encode_frame(&f).unwrap(), bytes);
            }
        }
    }
}
