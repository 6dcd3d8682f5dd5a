use rand::RngCore;

use super::{LeakageRecord, PartyState, ProtocolError, Transcript, Variant};
use crate::field::{fe_from_centered, FieldElement};
use crate::fixedpoint::Scale;
use crate::mpc::{MpcError, Role, TripleShare, TripleStore};
use crate::net::Message;
use crate::params::ProtocolParams;
use crate::stats::SampleVector;

/// Produces the corrupt party's view from its input, the output `r` and the
/// leakage record (as seen by the corrupt party); `None` for the approximate
/// variant, where `r` is the approximate output.
///
/// Randomness is drawn from `rng` in a fixed order: the corrupt party's
/// triple shares (`u, v, w` per triple), the honest party's share vector,
/// the honest party's masked openings (`d` then `e`), and finally the
/// corrupt party's own sharing randomness. The honest party's last share
/// of `a` is forced so that both shares open to `phi_{delta^2}` of the
/// value determined by `r` and the leakage.
pub fn simulate_view<R: RngCore>(
    corrupt_role: Role,
    corrupt_input: &SampleVector,
    r: f64,
    leakage: Option<&LeakageRecord>,
    params: &ProtocolParams,
    rng: &mut R,
) -> Result<Transcript, ProtocolError> {
    let n = params.n;
    let prime = params.prime;
    let variant = if leakage.is_some() {
        Variant::Exact
    } else {
        Variant::Approximate
    };

    let triples = (0..n as u64)
        .map(|index| {
            let u = prime.random(rng);
            let v = prime.random(rng);
            let w = prime.random(rng);
            TripleShare::new(index, corrupt_role, u, v, w)
        })
        .collect();
    let fake_shares: Vec<FieldElement> = (0..n).map(|_| prime.random(rng)).collect();
    let fake_d: Vec<FieldElement> = (0..n).map(|_| prime.random(rng)).collect();
    let fake_e: Vec<FieldElement> = (0..n).map(|_| prime.random(rng)).collect();

    let target = match leakage {
        Some(l) => {
            let (c12, c21) = l.cross_sums(corrupt_role);
            (n - 1) as f64 * r - c12 - c21 + l.eps_product_sum()
        }
        None => (n - 1) as f64 * r,
    };
    let target = encode_product(target, params)?;

    let store = TripleStore::new(corrupt_role, triples);
    let mut party = PartyState::new(corrupt_role, params.clone(), variant, corrupt_input, store, &mut *rng)?;
    party.step(Vec::new())?;
    if let Some(l) = leakage {
        party.step(vec![Message::ErrVec(l.eps_other.clone())])?;
        party.step(vec![Message::ErrSum(l.cross_sum_received)])?;
    }
    party.step(vec![Message::ShareVec(fake_shares)])?;
    party.step(vec![Message::MaskedDe { d: fake_d, e: fake_e }])?;
    let own = party.a_share().expect("set after the masked openings");
    let honest = target.sub(own).map_err(MpcError::from)?;
    party.step(vec![Message::ShareA(honest)])?;
    Ok(party.transcript().clone())
}

/// `phi_{delta^2}(x)`, requiring `x` to sit on the product grid within
/// floating-point noise and inside the centered range.
fn encode_product(x: f64, params: &ProtocolParams) -> Result<FieldElement, ProtocolError> {
    let scale: Scale = params.product_scale();
    let num = (scale.numerator() as f64).powi(scale.exponent() as i32);
    let den = (scale.denominator() as f64).powi(scale.exponent() as i32);
    let q = x * den / num;
    let m = q.round();
    if !q.is_finite() || (q - m).abs() > 1e-3 + 1e-12 * q.abs() {
        return Err(ProtocolError::Inconsistent(format!("{x} is not on the product grid")));
    }
    if m.abs() > params.m as f64 {
        return Err(ProtocolError::Inconsistent(format!(
            "{x} exceeds the representable range"
        )));
    }
    fe_from_centered(m as i64, params.prime).map_err(|e| ProtocolError::Mpc(e.into()))
}
