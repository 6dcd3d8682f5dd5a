use std::io::{self, Read, Write};
use std::sync::mpsc;
use std::thread;

use rand::RngCore;
use thiserror::Error;

use super::frame::{decode_header, decode_payload, frame_encode, Frame, FrameError, Message, WireContext, HEADER_LEN};
use super::transport::Channel;
use crate::mpc::Role;
use crate::protocol::{Direction, PartyState, Phase, ProtocolError, Variant};

#[derive(Debug, Error)]
pub enum NetError {
    #[error("handshake rejected: {0}")]
    Handshake(String),
    #[error("timed out in phase {phase:?}")]
    Timeout { phase: Phase },
    #[error("connection lost in phase {phase:?}")]
    ConnectionLost { phase: Phase },
    #[error("peer said goodbye early, in phase {phase:?}")]
    PeerEnded { phase: Phase },
    #[error("frame from {got} where the peer was expected, in phase {phase:?}")]
    UnexpectedSender { phase: Phase, got: Role },
    #[error("bad frame in phase {phase:?}: {source}")]
    Frame { phase: Phase, source: FrameError },
    #[error("i/o error in phase {phase:?}: {source}")]
    Io { phase: Phase, source: io::Error },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

impl NetError {
    fn from_io(phase: Phase, e: io::Error) -> NetError {
        use io::ErrorKind::*;
        match e.kind() {
            TimedOut | WouldBlock => NetError::Timeout { phase },
            UnexpectedEof | ConnectionReset | ConnectionAborted | BrokenPipe => NetError::ConnectionLost { phase },
            _ => NetError::Io { phase, source: e },
        }
    }
}

/// A finished networked party together with the raw frames it exchanged,
/// in the order they were written or read.
#[derive(Debug)]
pub struct RunOutcome<R: RngCore> {
    pub output: f64,
    pub state: PartyState<R>,
    pub frames: Vec<(Direction, Vec<u8>)>,
}

impl<R: RngCore> RunOutcome<R> {
    fn filtered(&self, direction: Direction) -> impl Iterator<Item = &[u8]> {
        self.frames
            .iter()
            .filter(move |(d, _)| *d == direction)
            .map(|(_, f)| f.as_slice())
    }

    pub fn sent(&self) -> impl Iterator<Item = &[u8]> {
        self.filtered(Direction::Sent)
    }

    pub fn received(&self) -> impl Iterator<Item = &[u8]> {
        self.filtered(Direction::Received)
    }

    pub fn bytes_sent(&self) -> usize {
        self.sent().map(<[u8]>::len).sum()
    }
}

/// Bytes one party puts on the wire for a whole session: `HELLO`, the data
/// frames and `BYE`. Each frame carries a 10-byte header; reals and field
/// elements take 8 bytes each.
pub fn protocol_bytes_sent(n: usize, variant: Variant) -> usize {
    let header = HEADER_LEN;
    let hello = header + super::frame::HELLO_LEN;
    let bye = header;
    let data = match variant {
        Variant::Exact => 5 * header + 8 * (n + 1) + 8 * (3 * n + 1),
        Variant::Approximate => 3 * header + 8 * (3 * n + 1),
    };
    hello + data + bye
}

/// Drives `state` to completion over `channel`: `HELLO` exchange and check,
/// the protocol steps, then `BYE` in both directions.
pub fn run_party<R: RngCore>(channel: Channel, mut state: PartyState<R>) -> Result<RunOutcome<R>, NetError> {
    let Channel { mut reader, mut writer } = channel;
    let role = state.role();
    let ctx = WireContext {
        n: state.params().n,
        prime: state.params().prime,
    };
    let (tx, rx) = mpsc::channel::<Vec<u8>>();

    thread::scope(|scope| {
        let writer_thread = scope.spawn(move || -> io::Result<()> {
            for bytes in rx {
                writer.write_all(&bytes)?;
                writer.flush()?;
            }
            Ok(())
        });

        let mut log = Vec::new();
        let send = |message: Message, log: &mut Vec<(Direction, Vec<u8>)>, phase: Phase| -> Result<(), NetError> {
            let bytes = frame_encode(&Frame { sender: role, message });
            log.push((Direction::Sent, bytes.clone()));
            tx.send(bytes).map_err(|_| NetError::ConnectionLost { phase })
        };

        let result = (|| -> Result<f64, NetError> {
            let hello = Message::Hello {
                params_hash: state.params().fingerprint(),
                variant: state.variant(),
                n: ctx.n as u64,
            };
            send(hello.clone(), &mut log, Phase::Start)?;
            let peer = read_frame(&mut reader, &ctx, role, Phase::Start, &mut log)?;
            check_hello(&hello, &peer)?;

            while !state.is_done() {
                let incoming = if state.phase() == Phase::Start {
                    Vec::new()
                } else {
                    let phase = state.phase();
                    match read_frame(&mut reader, &ctx, role, phase, &mut log)? {
                        Message::Bye => return Err(NetError::PeerEnded { phase }),
                        m => vec![m],
                    }
                };
                let (out, _) = state.step(incoming)?;
                for m in out {
                    send(m, &mut log, state.phase())?;
                }
            }
            send(Message::Bye, &mut log, Phase::Done)?;
            match read_frame(&mut reader, &ctx, role, Phase::Done, &mut log)? {
                Message::Bye => {}
                other => {
                    return Err(NetError::Protocol(ProtocolError::PhaseMismatch {
                        phase: Phase::Done,
                        got: other.kind(),
                    }))
                }
            }
            Ok(state.output().expect("finished"))
        })();
        drop(tx);
        let written = writer_thread.join().expect("writer thread panicked");
        let output = result?;
        written.map_err(|e| NetError::from_io(Phase::Done, e))?;
        Ok(RunOutcome {
            output,
            state,
            frames: log,
        })
    })
}

fn read_frame(
    reader: &mut Box<dyn Read + Send>,
    ctx: &WireContext,
    role: Role,
    phase: Phase,
    log: &mut Vec<(Direction, Vec<u8>)>,
) -> Result<Message, NetError> {
    let mut header = [0u8; HEADER_LEN];
    reader
        .read_exact(&mut header)
        .map_err(|e| NetError::from_io(phase, e))?;
    let parsed = decode_header(&header, ctx.n).map_err(|source| NetError::Frame { phase, source })?;
    if parsed.sender != role.peer() {
        return Err(NetError::UnexpectedSender {
            phase,
            got: parsed.sender,
        });
    }
    let mut payload = vec![0u8; parsed.payload_len];
    reader
        .read_exact(&mut payload)
        .map_err(|e| NetError::from_io(phase, e))?;
    let message = decode_payload(&parsed, &payload, ctx).map_err(|source| NetError::Frame { phase, source })?;
    let mut raw = header.to_vec();
    raw.extend_from_slice(&payload);
    log.push((Direction::Received, raw));
    Ok(message)
}

fn check_hello(own: &Message, peer: &Message) -> Result<(), NetError> {
    let (
        Message::Hello {
            params_hash: h1,
            variant: v1,
            n: n1,
        },
        Message::Hello {
            params_hash: h2,
            variant: v2,
            n: n2,
        },
    ) = (own, peer)
    else {
        return Err(NetError::Handshake(format!("expected HELLO, got {:?}", peer.kind())));
    };
    if n1 != n2 {
        return Err(NetError::Handshake(format!("sample counts differ ({n1} vs {n2})")));
    }
    if v1 != v2 {
        return Err(NetError::Handshake(format!("variants differ ({v1} vs {v2})")));
    }
    if h1 != h2 {
        return Err(NetError::Handshake(format!(
            "parameter hashes differ ({} vs {})",
            hex::encode(&h1[..8]),
            hex::encode(&h2[..8])
        )));
    }
    Ok(())
}
