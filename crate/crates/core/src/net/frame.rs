//! Bit-exact frame codec.
//!
//! ```text
//! +-------+------+------+-------------+-----------------+
//! | magic | type | role | payload_len | payload         |
//! | SPC1  | u8   | u8   | u32 LE      | payload_len B   |
//! +-------+------+------+-------------+-----------------+
//! ```
//!
//! Payload layouts (all little-endian):
//!
//! | type | name      | payload                                  |
//! |------|-----------|------------------------------------------|
//! | 0x01 | HELLO     | 32-byte params hash, u8 variant, u64 n   |
//! | 0x02 | ERR_VEC   | n x f64                                  |
//! | 0x03 | ERR_SUM   | 1 x f64                                  |
//! | 0x04 | SHARE_VEC | n x u64 field element                    |
//! | 0x05 | MASKED_DE | n x u64 (d shares) then n x u64 (e)      |
//! | 0x06 | SHARE_A   | 1 x u64 field element                    |
//! | 0x07 | BYE       | empty                                    |

use thiserror::Error;

use crate::field::{FieldElement, FieldError, Prime};
use crate::mpc::Role;
use crate::protocol::Variant;

pub const MAGIC: [u8; 4] = *b"SPC1";
pub const HEADER_LEN: usize = 10;
pub const HELLO_LEN: usize = 32 + 1 + 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unknown message type 0x{0:02x}")]
    UnknownType(u8),
    #[error("unknown sender role {0}")]
    UnknownRole(u8),
    #[error("unknown protocol variant flag {0}")]
    UnknownVariant(u8),
    #[error("{kind:?} payload must be {expected} bytes, header says {declared}")]
    LengthMismatch {
        kind: MessageKind,
        expected: usize,
        declared: usize,
    },
    #[error("frame truncated: need {needed} bytes, have {have}")]
    Truncated { needed: usize, have: usize },
    #[error("{0} trailing bytes after frame")]
    TrailingBytes(usize),
    #[error("field element out of range: {0}")]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    Hello = 0x01,
    ErrVec = 0x02,
    ErrSum = 0x03,
    ShareVec = 0x04,
    MaskedDe = 0x05,
    ShareA = 0x06,
    Bye = 0x07,
}

impl MessageKind {
    pub fn from_byte(b: u8) -> Result<Self, FrameError> {
        Ok(match b {
            0x01 => MessageKind::Hello,
            0x02 => MessageKind::ErrVec,
            0x03 => MessageKind::ErrSum,
            0x04 => MessageKind::ShareVec,
            0x05 => MessageKind::MaskedDe,
            0x06 => MessageKind::ShareA,
            0x07 => MessageKind::Bye,
            other => return Err(FrameError::UnknownType(other)),
        })
    }

    /// Payload size in bytes for a session of `n` samples.
    pub fn payload_len(self, n: usize) -> usize {
        match self {
            MessageKind::Hello => HELLO_LEN,
            MessageKind::ErrVec | MessageKind::ShareVec => 8 * n,
            MessageKind::ErrSum | MessageKind::ShareA => 8,
            MessageKind::MaskedDe => 16 * n,
            MessageKind::Bye => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Hello {
        params_hash: [u8; 32],
        variant: Variant,
        n: u64,
    },
    /// Rounding errors of the sender's z-scores.
    ErrVec(Vec<f64>),
    /// Sender's z-scores dotted with the receiver's rounding errors.
    ErrSum(f64),
    /// Receiver's shares of the sender's encoded grid values.
    ShareVec(Vec<FieldElement>),
    /// Sender's shares of the Beaver openings.
    MaskedDe {
        d: Vec<FieldElement>,
        e: Vec<FieldElement>,
    },
    /// Sender's share of the accumulated product sum.
    ShareA(FieldElement),
    Bye,
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::Hello { .. } => MessageKind::Hello,
            Message::ErrVec(_) => MessageKind::ErrVec,
            Message::ErrSum(_) => MessageKind::ErrSum,
            Message::ShareVec(_) => MessageKind::ShareVec,
            Message::MaskedDe { .. } => MessageKind::MaskedDe,
            Message::ShareA(_) => MessageKind::ShareA,
            Message::Bye => MessageKind::Bye,
        }
    }

    /// Number of real (binary64) values carried.
    pub fn real_count(&self) -> usize {
        match self {
            Message::ErrVec(v) => v.len(),
            Message::ErrSum(_) => 1,
            _ => 0,
        }
    }

    /// Number of field elements carried.
    pub fn field_count(&self) -> usize {
        match self {
            Message::ShareVec(v) => v.len(),
            Message::MaskedDe { d, e } => d.len() + e.len(),
            Message::ShareA(_) => 1,
            _ => 0,
        }
    }

    /// Field elements in payload order.
    pub fn field_elements(&self) -> Vec<FieldElement> {
        match self {
            Message::ShareVec(v) => v.clone(),
            Message::MaskedDe { d, e } => d.iter().chain(e).copied().collect(),
            Message::ShareA(a) => vec![*a],
            _ => Vec::new(),
        }
    }
}

/// A message together with its sender.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub sender: Role,
    pub message: Message,
}

/// What the decoder must know to validate payload sizes and residues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireContext {
    pub n: usize,
    pub prime: Prime,
}

fn variant_flag(v: Variant) -> u8 {
    match v {
        Variant::Exact => 0,
        Variant::Approximate => 1,
    }
}

pub fn frame_encode(frame: &Frame) -> Vec<u8> {
    let mut payload = Vec::new();
    match &frame.message {
        Message::Hello {
            params_hash,
            variant,
            n,
        } => {
            payload.extend_from_slice(params_hash);
            payload.push(variant_flag(*variant));
            payload.extend_from_slice(&n.to_le_bytes());
        }
        Message::ErrVec(v) => v.iter().for_each(|x| payload.extend_from_slice(&x.to_le_bytes())),
        Message::ErrSum(x) => payload.extend_from_slice(&x.to_le_bytes()),
        Message::ShareVec(v) => v.iter().for_each(|x| payload.extend_from_slice(&x.to_le_bytes())),
        Message::MaskedDe { d, e } => d
            .iter()
            .chain(e)
            .for_each(|x| payload.extend_from_slice(&x.to_le_bytes())),
        Message::ShareA(a) => payload.extend_from_slice(&a.to_le_bytes()),
        Message::Bye => {}
    }
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&MAGIC);
    out.push(frame.message.kind() as u8);
    out.push(frame.sender.index());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&payload);
    out
}

/// Parsed and checked frame header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub kind: MessageKind,
    pub sender: Role,
    pub payload_len: usize,
}

/// Validates magic, type, role and that the declared length matches `(type, n)`.
pub fn decode_header(bytes: &[u8; HEADER_LEN], n: usize) -> Result<Header, FrameError> {
    let magic: [u8; 4] = bytes[..4].try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(FrameError::BadMagic(magic));
    }
    let kind = MessageKind::from_byte(bytes[4])?;
    let sender = Role::from_index(bytes[5]).ok_or(FrameError::UnknownRole(bytes[5]))?;
    let declared = u32::from_le_bytes(bytes[6..10].try_into().expect("4 bytes")) as usize;
    let expected = kind.payload_len(n);
    if declared != expected {
        return Err(FrameError::LengthMismatch {
            kind,
            expected,
            declared,
        });
    }
    Ok(Header {
        kind,
        sender,
        payload_len: declared,
    })
}

fn words(payload: &[u8]) -> impl Iterator<Item = [u8; 8]> + '_ {
    payload.chunks_exact(8).map(|c| c.try_into().expect("8 bytes"))
}

pub fn decode_payload(header: &Header, payload: &[u8], ctx: &WireContext) -> Result<Message, FrameError> {
    if payload.len() != header.payload_len {
        return Err(FrameError::Truncated {
            needed: header.payload_len,
            have: payload.len(),
        });
    }
    let fields = |p: &[u8]| -> Result<Vec<FieldElement>, FrameError> {
        words(p)
            .map(|w| FieldElement::from_le_bytes(w, ctx.prime).map_err(FrameError::from))
            .collect()
    };
    let reals = |p: &[u8]| -> Vec<f64> { words(p).map(f64::from_le_bytes).collect() };
    Ok(match header.kind {
        MessageKind::Hello => {
            let params_hash: [u8; 32] = payload[..32].try_into().expect("32 bytes");
            let variant = match payload[32] {
                0 => Variant::Exact,
                1 => Variant::Approximate,
                other => return Err(FrameError::UnknownVariant(other)),
            };
            let n = u64::from_le_bytes(payload[33..41].try_into().expect("8 bytes"));
            Message::Hello {
                params_hash,
                variant,
                n,
            }
        }
        MessageKind::ErrVec => Message::ErrVec(reals(payload)),
        MessageKind::ErrSum => Message::ErrSum(reals(payload)[0]),
        MessageKind::ShareVec => Message::ShareVec(fields(payload)?),
        MessageKind::MaskedDe => {
            let mut all = fields(payload)?;
            let e = all.split_off(all.len() / 2);
            Message::MaskedDe { d: all, e }
        }
        MessageKind::ShareA => Message::ShareA(fields(payload)?[0]),
        MessageKind::Bye => Message::Bye,
    })
}

/// Decodes exactly one frame occupying all of `bytes`.
pub fn frame_decode(bytes: &[u8], ctx: &WireContext) -> Result<Frame, FrameError> {
    if bytes.len() < HEADER_LEN {
        return Err(FrameError::Truncated {
            needed: HEADER_LEN,
            have: bytes.len(),
        });
    }
    let header = decode_header(bytes[..HEADER_LEN].try_into().expect("header"), ctx.n)?;
    let end = HEADER_LEN + header.payload_len;
    if bytes.len() < end {
        return Err(FrameError::Truncated {
            needed: end,
            have: bytes.len(),
        });
    }
    if bytes.len() > end {
        return Err(FrameError::TrailingBytes(bytes.len() - end));
    }
    let message = decode_payload(&header, &bytes[HEADER_LEN..], ctx)?;
    Ok(Frame {
        sender: header.sender,
        message,
    })
}
