//! Wire format, byte transports and the blocking two-party runner.

mod frame;
mod runner;
mod transport;

pub use frame::{
    decode_header, decode_payload, frame_decode, frame_encode, Frame, FrameError, Header, Message, MessageKind,
    WireContext, HEADER_LEN, HELLO_LEN, MAGIC,
};
pub use runner::{protocol_bytes_sent, run_party, NetError, RunOutcome};
pub use transport::{accept_one, connect_with_retry, loopback_pair, Channel, BIND_ENV};
