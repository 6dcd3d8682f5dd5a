use std::collections::VecDeque;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{PartyState, ProtocolError, Variant};
use crate::mpc::{deal_triples, split_triples, Role};
use crate::net::Message;
use crate::params::ProtocolParams;
use crate::stats::SampleVector;

/// Independent streams `(dealer, P1, P2)` derived from one session seed.
pub fn session_rngs(seed: u64) -> (ChaCha20Rng, ChaCha20Rng, ChaCha20Rng) {
    let stream = |s: u64| {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(s);
        rng
    };
    (stream(0), stream(1), stream(2))
}

/// Both finished parties of an in-process session.
#[derive(Debug)]
pub struct SessionOutcome<R: RngCore = ChaCha20Rng> {
    pub p1: PartyState<R>,
    pub p2: PartyState<R>,
}

impl<R: RngCore> SessionOutcome<R> {
    pub fn party(&self, role: Role) -> &PartyState<R> {
        match role {
            Role::P1 => &self.p1,
            Role::P2 => &self.p2,
        }
    }

    pub fn outputs(&self) -> (f64, f64) {
        (
            self.p1.output().expect("finished session"),
            self.p2.output().expect("finished session"),
        )
    }
}

/// Deals `n` triples from the dealer stream and runs both parties to completion.
pub fn run_session(
    params: &ProtocolParams,
    variant: Variant,
    x1: &SampleVector,
    x2: &SampleVector,
    seed: u64,
) -> Result<SessionOutcome, ProtocolError> {
    let (mut dealer, rng1, rng2) = session_rngs(seed);
    let (t1, t2) = split_triples(deal_triples(params.n, params.prime, &mut dealer));
    let p1 = PartyState::new(Role::P1, params.clone(), variant, x1, t1, rng1)?;
    let p2 = PartyState::new(Role::P2, params.clone(), variant, x2, t2, rng2)?;
    drive(p1, p2)
}

/// Delivers messages between two parties until both are done.
pub fn drive<R: RngCore>(mut p1: PartyState<R>, mut p2: PartyState<R>) -> Result<SessionOutcome<R>, ProtocolError> {
    let mut inbox: [VecDeque<Message>; 2] = [VecDeque::new(), VecDeque::new()];
    while !(p1.is_done() && p2.is_done()) {
        let mut progressed = false;
        for party in [&mut p1, &mut p2] {
            let me = party.role().index() as usize - 1;
            let incoming = if party.is_done() {
                continue;
            } else if party.phase() == super::Phase::Start {
                Vec::new()
            } else if let Some(m) = inbox[me].pop_front() {
                vec![m]
            } else {
                continue;
            };
            let (out, _) = party.step(incoming)?;
            inbox[1 - me].extend(out);
            progressed = true;
        }
        if !progressed {
            return Err(ProtocolError::Deadlock);
        }
    }
    Ok(SessionOutcome { p1, p2 })
}
