//! Two-party additive secret sharing over F_p and Beaver multiplication.
//!
//! Triples come from a trusted dealer ([`deal_triples`]); each party keeps
//! only its own [`TripleShare`]s in a [`TripleStore`]. A triple share is
//! single-use: [`beaver_masked`] refuses a consumed triple and
//! [`beaver_combine`] marks it consumed.
//!
//! Multiplying `x * y` with triple `(u, v, w)`, `uv = w`:
//!
//! ```text
//! d = x - u, e = y - v               (opened)
//! z_1 = w_1 + u_1 e + v_1 d + d e
//! z_2 = w_2 + u_2 e + v_2 d
//! ```

use std::fmt;
use std::io::{self, Read, Write};

use rand::RngCore;
use thiserror::Error;

use crate::field::{FieldElement, FieldError, Prime};

#[derive(Debug, Error)]
pub enum MpcError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("triple {0} has already been consumed")]
    TripleConsumed(u64),
    #[error("share belongs to party {found}, expected party {expected}")]
    WrongParty { expected: Role, found: Role },
    #[error("need {needed} triples but only {available} remain")]
    TriplesExhausted { needed: usize, available: usize },
    #[error("triple file: {0}")]
    TripleFile(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Which of the two participants a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    P1,
    P2,
}

impl Role {
    pub fn index(self) -> u8 {
        match self {
            Role::P1 => 1,
            Role::P2 => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Role> {
        match i {
            1 => Some(Role::P1),
            2 => Some(Role::P2),
            _ => None,
        }
    }

    pub fn peer(self) -> Role {
        match self {
            Role::P1 => Role::P2,
            Role::P2 => Role::P1,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.index())
    }
}

/// One party's additive share `[x]_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdditiveShare {
    pub party: Role,
    pub value: FieldElement,
}

impl AdditiveShare {
    pub fn new(party: Role, value: FieldElement) -> Self {
        AdditiveShare { party, value }
    }
}

/// Splits `secret` into `(s_1, s_2)` with `s_1` uniform and `s_2 = secret - s_1`.
pub fn share<R: RngCore + ?Sized>(secret: FieldElement, rng: &mut R) -> (AdditiveShare, AdditiveShare) {
    let s1 = secret.prime().random(rng);
    let s2 = secret.sub(s1).expect("same prime");
    (AdditiveShare::new(Role::P1, s1), AdditiveShare::new(Role::P2, s2))
}

pub fn reconstruct(a: AdditiveShare, b: AdditiveShare) -> Result<FieldElement, MpcError> {
    Ok(a.value.add(b.value)?)
}

/// One party's half of a Beaver triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleShare {
    pub index: u64,
    pub party: Role,
    pub u: FieldElement,
    pub v: FieldElement,
    pub w: FieldElement,
    consumed: bool,
}

impl TripleShare {
    pub fn new(index: u64, party: Role, u: FieldElement, v: FieldElement, w: FieldElement) -> Self {
        TripleShare {
            index,
            party,
            u,
            v,
            w,
            consumed: false,
        }
    }

    pub fn is_consumed(&self) -> bool {
        self.consumed
    }
}

/// A dealt triple with both parties' halves; `u * v = w` after reconstruction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeaverTriple {
    pub p1: TripleShare,
    pub p2: TripleShare,
}

impl BeaverTriple {
    pub fn u(&self) -> FieldElement {
        self.p1.u.add(self.p2.u).expect("same prime")
    }

    pub fn v(&self) -> FieldElement {
        self.p1.v.add(self.p2.v).expect("same prime")
    }

    pub fn w(&self) -> FieldElement {
        self.p1.w.add(self.p2.w).expect("same prime")
    }
}

/// The trusted-dealer triple functionality: `count` fresh triples with
/// uniform `u`, `v` and `w = uv`, each split into fresh additive shares.
pub fn deal_triples<R: RngCore + ?Sized>(count: usize, prime: Prime, rng: &mut R) -> Vec<BeaverTriple> {
    (0..count as u64)
        .map(|index| {
            let u = prime.random(rng);
            let v = prime.random(rng);
            let w = u.mul(v).expect("same prime");
            let (u1, u2) = share(u, rng);
            let (v1, v2) = share(v, rng);
            let (w1, w2) = share(w, rng);
            BeaverTriple {
                p1: TripleShare::new(index, Role::P1, u1.value, v1.value, w1.value),
                p2: TripleShare::new(index, Role::P2, u2.value, v2.value, w2.value),
            }
        })
        .collect()
}

/// Splits dealt triples into the two parties' stores.
pub fn split_triples(triples: Vec<BeaverTriple>) -> (TripleStore, TripleStore) {
    let (a, b): (Vec<_>, Vec<_>) = triples.into_iter().map(|t| (t.p1, t.p2)).unzip();
    (TripleStore::new(Role::P1, a), TripleStore::new(Role::P2, b))
}

/// Local masked values `d_i = x_i - u_i`, `e_i = y_i - v_i`.
pub fn beaver_masked(
    x: AdditiveShare,
    y: AdditiveShare,
    triple: &TripleShare,
) -> Result<(AdditiveShare, AdditiveShare), MpcError> {
    if triple.consumed {
        return Err(MpcError::TripleConsumed(triple.index));
    }
    for s in [x.party, y.party] {
        if s != triple.party {
            return Err(MpcError::WrongParty {
                expected: triple.party,
                found: s,
            });
        }
    }
    let d = x.value.sub(triple.u)?;
    let e = y.value.sub(triple.v)?;
    Ok((AdditiveShare::new(triple.party, d), AdditiveShare::new(triple.party, e)))
}

/// This party's share of `xy` from the opened `d`, `e`; consumes the triple.
pub fn beaver_combine(
    party: Role,
    triple: &mut TripleShare,
    d: FieldElement,
    e: FieldElement,
) -> Result<AdditiveShare, MpcError> {
    if triple.consumed {
        return Err(MpcError::TripleConsumed(triple.index));
    }
    if party != triple.party {
        return Err(MpcError::WrongParty {
            expected: triple.party,
            found: party,
        });
    }
    let mut z = triple.w.add(triple.u.mul(e)?)?.add(triple.v.mul(d)?)?;
    if party == Role::P1 {
        z = z.add(d.mul(e)?)?;
    }
    triple.consumed = true;
    Ok(AdditiveShare::new(party, z))
}

/// A party's ordered supply of triple shares, handed out front to back.
#[derive(Debug, Clone)]
pub struct TripleStore {
    party: Role,
    triples: Vec<TripleShare>,
    next: usize,
}

impl TripleStore {
    pub fn new(party: Role, triples: Vec<TripleShare>) -> Self {
        TripleStore {
            party,
            triples,
            next: 0,
        }
    }

    pub fn party(&self) -> Role {
        self.party
    }

    pub fn remaining(&self) -> usize {
        self.triples.len() - self.next
    }

    /// Number of triples handed out so far.
    pub fn consumed(&self) -> usize {
        self.next
    }

    /// Reserves the next `count` unused triple shares.
    pub fn take(&mut self, count: usize) -> Result<Vec<TripleShare>, MpcError> {
        if self.remaining() < count {
            return Err(MpcError::TriplesExhausted {
                needed: count,
                available: self.remaining(),
            });
        }
        let batch = self.triples[self.next..self.next + count].to_vec();
        self.next += count;
        Ok(batch)
    }

    /// File layout: 8-byte LE count, then `count` records of `u, v, w`, each
    /// an 8-byte LE field element.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), MpcError> {
        let rest = &self.triples[self.next..];
        out.write_all(&(rest.len() as u64).to_le_bytes())?;
        for t in rest {
            out.write_all(&t.u.to_le_bytes())?;
            out.write_all(&t.v.to_le_bytes())?;
            out.write_all(&t.w.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R, party: Role, prime: Prime) -> Result<Self, MpcError> {
        let mut word = [0u8; 8];
        input.read_exact(&mut word)?;
        let count = u64::from_le_bytes(word);
        let mut body = Vec::new();
        input.read_to_end(&mut body)?;
        let expected = count
            .checked_mul(24)
            .ok_or_else(|| MpcError::TripleFile(format!("count {count} is too large")))?;
        if body.len() as u64 != expected {
            return Err(MpcError::TripleFile(format!(
                "header announces {count} triples ({expected} bytes) but body has {} bytes",
                body.len()
            )));
        }
        let elem = |chunk: &[u8]| -> Result<FieldElement, MpcError> {
            let bytes: [u8; 8] = chunk.try_into().expect("8-byte chunk");
            Ok(FieldElement::from_le_bytes(bytes, prime)?)
        };
        let triples = body
            .chunks_exact(24)
            .enumerate()
            .map(|(i, rec)| {
                Ok(TripleShare::new(
                    i as u64,
                    party,
                    elem(&rec[..8])?,
                    elem(&rec[8..16])?,
                    elem(&rec[16..])?,
                ))
            })
            .collect::<Result<Vec<_>, MpcError>>()?;
        Ok(TripleStore::new(party, triples))
    }
}
