//! Party state machines for the exact and approximate correlation protocols.
//!
//! Both parties run the same [`PartyState`]; each call to
//! [`PartyState::step`] consumes one inbound message (none for the first
//! call) and emits the messages of the next protocol step.
//!
//! Exact variant, per party `i`:
//!
//! 1. standardize, round to the grid, send the rounding errors (`ERR_VEC`)
//! 2. send `sum_j z_j^(i) eps_j^(3-i)` (`ERR_SUM`)
//! 3. share the encoded grid values (`SHARE_VEC`)
//! 4. open the Beaver masks for all `n` products in one batch (`MASKED_DE`)
//! 5. reveal the share of `a = sum_j x_j y_j` (`SHARE_A`), party 1 first
//! 6. output `(a delta^2 + c_12 + c_21 - sum_j eps_j^(1) eps_j^(2)) / (n - 1)`
//!
//! The approximate variant skips steps 1-2 and outputs `a delta^2 / (n - 1)`.

mod party;
mod session;
mod simulator;
mod transcript;

use thiserror::Error;

use crate::fixedpoint::FixedPointError;
use crate::mpc::MpcError;
use crate::net::MessageKind;
use crate::params::ParamError;
use crate::stats::StatsError;

pub use party::{exact_output, LeakageRecord, PartyState, Phase};
pub use session::{drive, run_session, session_rngs, SessionOutcome};
pub use simulator::simulate_view;
pub use transcript::{Direction, Transcript, TranscriptEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Reveals rounding errors and cross sums; output equals the plaintext correlation.
    Exact,
    /// Reveals nothing beyond the output; output carries the grid rounding error.
    Approximate,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Exact => "exact",
            Variant::Approximate => "approx",
        })
    }
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    FixedPoint(#[from] FixedPointError),
    #[error(transparent)]
    Mpc(#[from] MpcError),
    #[error("sample {index}: grid value {value} exceeds R = {bound}")]
    RangeAbort { index: usize, value: f64, bound: f64 },
    #[error("input has {got} samples but the session expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("triple store belongs to the wrong party")]
    TripleOwner,
    #[error("in phase {phase:?}: expected {expected} inbound message(s), got {got}")]
    UnexpectedCount { phase: Phase, expected: usize, got: usize },
    #[error("in phase {phase:?}: unexpected {got:?} message")]
    PhaseMismatch { phase: Phase, got: MessageKind },
    #[error("malformed {kind:?} message: {detail}")]
    Malformed { kind: MessageKind, detail: String },
    #[error("protocol already finished")]
    Finished,
    #[error("the approximate variant reveals no leakage record")]
    NoLeakage,
    #[error("leakage not yet available in phase {0:?}")]
    NotReady(Phase),
    #[error("session deadlocked: no party can make progress")]
    Deadlock,
    #[error("inconsistent output and leakage: {0}")]
    Inconsistent(String),
}
