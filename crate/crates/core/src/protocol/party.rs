use rand::RngCore;

use super::{ProtocolError, Transcript, Variant};
use crate::field::{fe_sum, FieldElement};
use crate::fixedpoint::{decode, decode_grid, encode, round_to_grid, GridValue};
use crate::mpc::{beaver_combine, beaver_masked, share, AdditiveShare, Role, TripleShare, TripleStore};
use crate::net::Message;
use crate::params::ProtocolParams;
use crate::protocol::Direction;
use crate::stats::{dot, z_scores, SampleVector, ZScoreVector};

/// Protocol position; the name says which inbound message is awaited next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Start,
    AwaitErrVec,
    AwaitErrSum,
    AwaitShares,
    AwaitMasked,
    AwaitShareA,
    Done,
}

/// Everything the exact variant deliberately reveals, seen from one party.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageRecord {
    pub eps_own: Vec<f64>,
    pub eps_other: Vec<f64>,
    /// `sum_j z_j^(own) eps_j^(other)`, sent by this party.
    pub cross_sum_sent: f64,
    /// `sum_j z_j^(other) eps_j^(own)`, received from the peer.
    pub cross_sum_received: f64,
}

impl LeakageRecord {
    /// `sum_j eps_j^(1) eps_j^(2)`; symmetric in the two parties.
    pub fn eps_product_sum(&self) -> f64 {
        dot(&self.eps_own, &self.eps_other)
    }

    /// Cross sums ordered as `(c_12, c_21)` with `c_12 = sum_j z_j^(1) eps_j^(2)`.
    pub fn cross_sums(&self, role: Role) -> (f64, f64) {
        match role {
            Role::P1 => (self.cross_sum_sent, self.cross_sum_received),
            Role::P2 => (self.cross_sum_received, self.cross_sum_sent),
        }
    }

    /// CSV: `index,eps1,eps2` rows, then the two cross sums as a footer.
    pub fn to_csv(&self, role: Role) -> String {
        let (e1, e2) = match role {
            Role::P1 => (&self.eps_own, &self.eps_other),
            Role::P2 => (&self.eps_other, &self.eps_own),
        };
        let (c12, c21) = self.cross_sums(role);
        let mut out = String::from("index,eps1,eps2\n");
        for (j, (a, b)) in e1.iter().zip(e2).enumerate() {
            out.push_str(&format!("{},{:e},{:e}\n", j + 1, a, b));
        }
        out.push_str(&format!("# sum_z1_eps2,{c12:e}\n"));
        out.push_str(&format!("# sum_z2_eps1,{c21:e}\n"));
        out
    }
}

/// Final combination of the exact variant:
/// `(decoded_a + c_12 + c_21 - sum eps1 eps2) / (n - 1)`.
pub fn exact_output(decoded_a: f64, c12: f64, c21: f64, eps_products: f64, n: usize) -> f64 {
    (decoded_a + c12 + c21 - eps_products) / (n - 1) as f64
}

/// One participant's protocol state.
pub struct PartyState<R: RngCore> {
    role: Role,
    params: ProtocolParams,
    variant: Variant,
    phase: Phase,
    z: ZScoreVector,
    grid: Vec<GridValue>,
    eps: Vec<f64>,
    encoded: Vec<FieldElement>,
    eps_other: Option<Vec<f64>>,
    cross_sent: Option<f64>,
    cross_received: Option<f64>,
    own_shares: Vec<FieldElement>,
    peer_shares: Vec<FieldElement>,
    triples: TripleStore,
    active: Vec<TripleShare>,
    masked: Option<(Vec<FieldElement>, Vec<FieldElement>)>,
    opened: Option<(Vec<FieldElement>, Vec<FieldElement>)>,
    a_share: Option<FieldElement>,
    a: Option<FieldElement>,
    output: Option<f64>,
    transcript: Transcript,
    rng: R,
}

impl<R: RngCore> PartyState<R> {
    /// Standardizes and rounds the local data. Fails before any message is
    /// produced when the data is degenerate or a grid value exceeds `R`.
    pub fn new(
        role: Role,
        params: ProtocolParams,
        variant: Variant,
        data: &SampleVector,
        triples: TripleStore,
        rng: R,
    ) -> Result<Self, ProtocolError> {
        if data.len() != params.n {
            return Err(ProtocolError::LengthMismatch {
                expected: params.n,
                got: data.len(),
            });
        }
        if triples.party() != role {
            return Err(ProtocolError::TripleOwner);
        }
        let z = z_scores(data)?;
        let mut grid = Vec::with_capacity(params.n);
        let mut eps = Vec::with_capacity(params.n);
        let mut encoded = Vec::with_capacity(params.n);
        for (index, &zj) in z.values().iter().enumerate() {
            let rounded = round_to_grid(zj, params.delta)?;
            if rounded.grid.multiplier.abs() > params.max_multiplier() {
                return Err(ProtocolError::RangeAbort {
                    index,
                    value: rounded.grid.to_f64(),
                    bound: params.bound,
                });
            }
            encoded.push(encode(rounded.grid, params.prime)?);
            grid.push(rounded.grid);
            eps.push(rounded.epsilon);
        }
        Ok(PartyState {
            role,
            params,
            variant,
            phase: Phase::Start,
            z,
            grid,
            eps,
            encoded,
            eps_other: None,
            cross_sent: None,
            cross_received: None,
            own_shares: Vec::new(),
            peer_shares: Vec::new(),
            triples,
            active: Vec::new(),
            masked: None,
            opened: None,
            a_share: None,
            a: None,
            output: None,
            transcript: Transcript::new(),
            rng,
        })
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn is_done(&self) -> bool {
        self.phase == Phase::Done
    }

    pub fn z_scores(&self) -> &ZScoreVector {
        &self.z
    }

    pub fn grid_values(&self) -> &[GridValue] {
        &self.grid
    }

    pub fn grid_multipliers(&self) -> Vec<i64> {
        self.grid.iter().map(|g| g.multiplier).collect()
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.eps
    }

    /// `phi_delta` of the local grid values.
    pub fn encoded(&self) -> &[FieldElement] {
        &self.encoded
    }

    /// This party's share of `a`, once the Beaver products are combined.
    pub fn a_share(&self) -> Option<FieldElement> {
        self.a_share
    }

    /// The reconstructed product sum `a`.
    pub fn a(&self) -> Option<FieldElement> {
        self.a
    }

    /// Publicly opened Beaver values `(d, e)`.
    pub fn opened(&self) -> Option<&(Vec<FieldElement>, Vec<FieldElement>)> {
        self.opened.as_ref()
    }

    pub fn output(&self) -> Option<f64> {
        self.output
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn triples_consumed(&self) -> usize {
        self.triples.consumed()
    }

    pub fn leakage_record(&self) -> Result<LeakageRecord, ProtocolError> {
        if self.variant == Variant::Approximate {
            return Err(ProtocolError::NoLeakage);
        }
        match (&self.eps_other, self.cross_sent, self.cross_received) {
            (Some(eps_other), Some(sent), Some(received)) => Ok(LeakageRecord {
                eps_own: self.eps.clone(),
                eps_other: eps_other.clone(),
                cross_sum_sent: sent,
                cross_sum_received: received,
            }),
            _ => Err(ProtocolError::NotReady(self.phase)),
        }
    }

    /// Advances exactly one protocol step.
    pub fn step(&mut self, incoming: Vec<Message>) -> Result<(Vec<Message>, Option<f64>), ProtocolError> {
        let expected = match self.phase {
            Phase::Start => 0,
            Phase::Done => return Err(ProtocolError::Finished),
            _ => 1,
        };
        if incoming.len() != expected {
            return Err(ProtocolError::UnexpectedCount {
                phase: self.phase,
                expected,
                got: incoming.len(),
            });
        }
        let msg = incoming.into_iter().next();
        if let Some(m) = &msg {
            self.check_inbound(m)?;
            self.transcript.push(Direction::Received, self.role.peer(), m.clone());
        }
        let outgoing = match (self.phase, msg) {
            (Phase::Start, None) => match self.variant {
                Variant::Exact => {
                    self.phase = Phase::AwaitErrVec;
                    vec![Message::ErrVec(self.eps.clone())]
                }
                Variant::Approximate => self.send_shares(),
            },
            (Phase::AwaitErrVec, Some(Message::ErrVec(eps_other))) => {
                let sum = dot(self.z.values(), &eps_other);
                self.eps_other = Some(eps_other);
                self.cross_sent = Some(sum);
                self.phase = Phase::AwaitErrSum;
                vec![Message::ErrSum(sum)]
            }
            (Phase::AwaitErrSum, Some(Message::ErrSum(sum))) => {
                self.cross_received = Some(sum);
                self.send_shares()
            }
            (Phase::AwaitShares, Some(Message::ShareVec(shares))) => {
                self.peer_shares = shares;
                self.send_masked()?
            }
            (Phase::AwaitMasked, Some(Message::MaskedDe { d, e })) => self.combine(d, e)?,
            (Phase::AwaitShareA, Some(Message::ShareA(peer))) => {
                let own = self.a_share.expect("set in AwaitMasked");
                self.a = Some(own.add(peer).map_err(crate::mpc::MpcError::from)?);
                self.output = Some(self.compute_output());
                self.phase = Phase::Done;
                match self.role {
                    Role::P1 => Vec::new(),
                    Role::P2 => vec![Message::ShareA(own)],
                }
            }
            (phase, Some(m)) => return Err(ProtocolError::PhaseMismatch { phase, got: m.kind() }),
            (phase, None) => {
                return Err(ProtocolError::UnexpectedCount {
                    phase,
                    expected: 1,
                    got: 0,
                })
            }
        };
        for m in &outgoing {
            self.transcript.push(Direction::Sent, self.role, m.clone());
        }
        Ok((outgoing, self.output))
    }

    fn check_inbound(&self, m: &Message) -> Result<(), ProtocolError> {
        let n = self.params.n;
        let bad = |detail: String| ProtocolError::Malformed { kind: m.kind(), detail };
        match m {
            Message::ErrVec(v) if v.len() != n => Err(bad(format!("{} errors for n = {n}", v.len()))),
            Message::ErrVec(v) if v.iter().any(|x| !x.is_finite()) => Err(bad("non-finite error".into())),
            Message::ErrSum(x) if !x.is_finite() => Err(bad("non-finite sum".into())),
            Message::ShareVec(v) if v.len() != n => Err(bad(format!("{} shares for n = {n}", v.len()))),
            Message::MaskedDe { d, e } if d.len() != n || e.len() != n => {
                Err(bad(format!("{}+{} openings for n = {n}", d.len(), e.len())))
            }
            _ => {
                let prime = self.params.prime;
                if m.field_elements().iter().any(|x| x.prime() != prime) {
                    return Err(bad("element of a different field".into()));
                }
                Ok(())
            }
        }
    }

    fn send_shares(&mut self) -> Vec<Message> {
        let mut keep = Vec::with_capacity(self.params.n);
        let mut send = Vec::with_capacity(self.params.n);
        for &x in &self.encoded {
            let (s1, s2) = share(x, &mut self.rng);
            let (mine, theirs) = match self.role {
                Role::P1 => (s1, s2),
                Role::P2 => (s2, s1),
            };
            keep.push(mine.value);
            send.push(theirs.value);
        }
        self.own_shares = keep;
        self.phase = Phase::AwaitShares;
        vec![Message::ShareVec(send)]
    }

    /// Shares of party 1's values are the left factors `x`, party 2's the right `y`.
    fn factor_shares(&self) -> (&[FieldElement], &[FieldElement]) {
        match self.role {
            Role::P1 => (&self.own_shares, &self.peer_shares),
            Role::P2 => (&self.peer_shares, &self.own_shares),
        }
    }

    fn send_masked(&mut self) -> Result<Vec<Message>, ProtocolError> {
        self.active = self.triples.take(self.params.n)?;
        let (xs, ys) = self.factor_shares();
        let mut d = Vec::with_capacity(xs.len());
        let mut e = Vec::with_capacity(xs.len());
        for ((&x, &y), t) in xs.iter().zip(ys).zip(&self.active) {
            let (dj, ej) = beaver_masked(AdditiveShare::new(self.role, x), AdditiveShare::new(self.role, y), t)?;
            d.push(dj.value);
            e.push(ej.value);
        }
        self.masked = Some((d.clone(), e.clone()));
        self.phase = Phase::AwaitMasked;
        Ok(vec![Message::MaskedDe { d, e }])
    }

    fn combine(&mut self, d_peer: Vec<FieldElement>, e_peer: Vec<FieldElement>) -> Result<Vec<Message>, ProtocolError> {
        let (d_own, e_own) = self.masked.take().expect("set in AwaitShares");
        let open = |a: &[FieldElement], b: &[FieldElement]| -> Result<Vec<FieldElement>, ProtocolError> {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.add(*y).map_err(|e| ProtocolError::Mpc(e.into())))
                .collect()
        };
        let d = open(&d_own, &d_peer)?;
        let e = open(&e_own, &e_peer)?;
        let mut products = Vec::with_capacity(d.len());
        for ((t, &dj), &ej) in self.active.iter_mut().zip(&d).zip(&e) {
            products.push(beaver_combine(self.role, t, dj, ej)?.value);
        }
        let a_share = fe_sum(self.params.prime, &products).map_err(|e| ProtocolError::Mpc(e.into()))?;
        self.a_share = Some(a_share);
        self.opened = Some((d, e));
        self.phase = Phase::AwaitShareA;
        Ok(match self.role {
            Role::P1 => vec![Message::ShareA(a_share)],
            Role::P2 => Vec::new(),
        })
    }

    fn compute_output(&self) -> f64 {
        let a = self.a.expect("reconstructed");
        let n = self.params.n;
        match self.variant {
            Variant::Approximate => decode_grid(a, self.params.product_scale()).divided_f64((n - 1) as u64),
            Variant::Exact => {
                let decoded = decode(a, self.params.product_scale());
                let record = self.leakage_record().expect("exact steps 1-2 completed");
                let (c12, c21) = record.cross_sums(self.role);
                exact_output(decoded, c12, c21, record.eps_product_sum(), n)
            }
        }
    }
}

impl<R: RngCore> std::fmt::Debug for PartyState<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PartyState")
            .field("role", &self.role)
            .field("variant", &self.variant)
            .field("phase", &self.phase)
            .field("n", &self.params.n)
            .finish_non_exhaustive()
    }
}
