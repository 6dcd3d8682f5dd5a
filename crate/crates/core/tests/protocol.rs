mod common;

use common::{pearson, worked_pair, worked_params, zscores, Script};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use semicorr::field::{fe_to_centered, FieldElement, Prime};
use semicorr::fixedpoint::Scale;
use semicorr::mpc::{deal_triples, split_triples, MpcError, Role, TripleStore};
use semicorr::net::{frame_encode, Frame, Message, MessageKind};
use semicorr::params::ProtocolParams;
use semicorr::protocol::{
    run_session, session_rngs, simulate_view, Direction, PartyState, Phase, ProtocolError, Transcript, Variant,
};
use semicorr::stats::{SampleVector, StatsError};

fn party(role: Role, params: &ProtocolParams, variant: Variant, data: &SampleVector) -> PartyState<ChaCha20Rng> {
    let mut dealer = ChaCha20Rng::seed_from_u64(5);
    let (t1, t2) = split_triples(deal_triples(params.n, params.prime, &mut dealer));
    let store = if role == Role::P1 { t1 } else { t2 };
    PartyState::new(
        role,
        params.clone(),
        variant,
        data,
        store,
        ChaCha20Rng::seed_from_u64(6),
    )
    .unwrap()
}

fn centered(v: &[FieldElement]) -> Vec<i64> {
    v.iter().map(|&x| fe_to_centered(x)).collect()
}

#[test]
fn worked_exact_run_reproduces_the_worked_values() {
    let (x1, x2) = worked_pair();
    let params = worked_params();
    let s = run_session(&params, Variant::Exact, &x1, &x2, 1).unwrap();
    assert_eq!(s.p1.grid_multipliers(), vec![8, -9, -7, -12, 6, 18, -4, 0]);
    assert_eq!(s.p2.grid_multipliers(), vec![8, -11, 0, -9, 6, 18, -3, -9]);
    let image: Vec<u64> = s.p1.encoded().iter().map(|x| x.value()).collect();
    assert_eq!(image, vec![8, 1802, 1804, 1799, 6, 18, 1807, 0]);
    let image: Vec<u64> = s.p2.encoded().iter().map(|x| x.value()).collect();
    assert_eq!(image, vec![8, 1800, 0, 1802, 6, 18, 1808, 1802]);
    let y: Vec<u64> =
        s.p1.encoded()
            .iter()
            .zip(s.p2.encoded())
            .map(|(a, b)| a.mul(*b).unwrap().value())
            .collect();
    assert_eq!(y, vec![64, 99, 0, 108, 36, 324, 12, 0]);
    assert_eq!(s.p1.a().unwrap().value(), 643);
    assert_eq!(s.p2.a().unwrap().value(), 643);

    let (o1, o2) = s.outputs();
    assert_eq!(o1, o2);
    let reference = pearson(x1.values(), x2.values());
    assert!((o1 - 0.904).abs() < 5e-3, "{o1}");
    assert!((o1 - reference).abs() < 1e-9, "{o1} vs {reference}");
}

#[test]
fn worked_leakage_record_matches_an_independent_computation() {
    let (x1, x2) = worked_pair();
    let s = run_session(&worked_params(), Variant::Exact, &x1, &x2, 2).unwrap();
    let rec1 = s.p1.leakage_record().unwrap();
    let rec2 = s.p2.leakage_record().unwrap();
    let (c12, c21) = rec1.cross_sums(Role::P1);
    assert_eq!((c12, c21), rec2.cross_sums(Role::P2));
    assert!((c12 + 0.079).abs() < 1e-3, "{c12}");
    assert!((c21 + 0.029).abs() < 1e-3, "{c21}");

    let z1 = zscores(x1.values());
    let z2 = zscores(x2.values());
    let eps = |z: &[f64]| -> Vec<f64> { z.iter().map(|v| v - (v * 10.0).round() / 10.0).collect() };
    let (e1, e2) = (eps(&z1), eps(&z2));
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    assert!((c12 - dot(&z1, &e2)).abs() < 1e-12);
    assert!((c21 - dot(&z2, &e1)).abs() < 1e-12);
    assert!((rec1.eps_product_sum() - dot(&e1, &e2)).abs() < 1e-12);
    assert!((rec1.eps_product_sum() + 0.003530622800665179).abs() < 1e-9);
    let half = 0.05 + f64::EPSILON;
    assert!(rec1.eps_own.iter().chain(&rec1.eps_other).all(|e| e.abs() <= half));

    // The sent cross sum is recomputable from local data and the received errors.
    let local: f64 = dot(s.p2.z_scores().values(), &rec2.eps_other);
    assert!((rec2.cross_sum_sent - local).abs() < 1e-9);
}

#[test]
fn worked_approximate_run() {
    let (x1, x2) = worked_pair();
    let s = run_session(&worked_params(), Variant::Approximate, &x1, &x2, 3).unwrap();
    let (o1, o2) = s.outputs();
    assert_eq!(o1, o2);
    // 643 / 700 is the correctly rounded value of phi^-1(643) / 7.
    assert_eq!(o1, 643.0 / 700.0);
    assert!((o1 - 6.43 / 7.0).abs() < 1e-9);
    assert!(matches!(s.p1.leakage_record(), Err(ProtocolError::NoLeakage)));
    assert_eq!(s.p1.transcript().sent_reals(), 0);
    assert_eq!(s.p2.transcript().sent_reals(), 0);
}

#[test]
fn identical_inputs_give_unit_correlation() {
    let (x1, _) = worked_pair();
    let s = run_session(&worked_params(), Variant::Exact, &x1, &x1, 4).unwrap();
    let (o1, o2) = s.outputs();
    assert!((o1 - 1.0).abs() < 1e-9 && (o2 - 1.0).abs() < 1e-9, "{o1}");
}

#[test]
fn inputs_on_the_grid_leak_zero_errors() {
    let params = ProtocolParams::validate(3, 2.5, Scale::parse("0.1").unwrap(), Prime::new(1811).unwrap()).unwrap();
    let x1 = SampleVector::new(vec![-1.0, 0.0, 1.0]).unwrap();
    let x2 = SampleVector::new(vec![0.0, -1.0, 1.0]).unwrap();
    let s = run_session(&params, Variant::Exact, &x1, &x2, 5).unwrap();
    let rec = s.p1.leakage_record().unwrap();
    assert!(rec.eps_own.iter().chain(&rec.eps_other).all(|&e| e == 0.0));
    assert_eq!(rec.cross_sums(Role::P1), (0.0, 0.0));
    assert!((s.outputs().0 - 0.5).abs() < 1e-12);
}

#[test]
fn out_of_range_grid_value_aborts_before_any_message() {
    let mut data = vec![0.0; 10];
    data.push(1.0);
    let data = SampleVector::new(data).unwrap();
    let delta = Scale::parse("0.1").unwrap();
    let prime = semicorr::params::suggest_prime(11, 2.5, delta).unwrap();
    let params = ProtocolParams::validate(11, 2.5, delta, prime).unwrap();
    let (t1, _) = split_triples(deal_triples(11, params.prime, &mut ChaCha20Rng::seed_from_u64(0)));
    let err = PartyState::new(
        Role::P1,
        params,
        Variant::Exact,
        &data,
        t1,
        ChaCha20Rng::seed_from_u64(0),
    )
    .unwrap_err();
    match err {
        ProtocolError::RangeAbort { index, value, bound } => {
            assert_eq!(index, 10);
            assert!((value - 3.0).abs() < 1e-12 && bound == 2.5);
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn constructor_rejects_bad_inputs() {
    let params = worked_params();
    let constant = SampleVector::new(vec![1.0; 8]).unwrap();
    let (t1, t2) = split_triples(deal_triples(8, params.prime, &mut ChaCha20Rng::seed_from_u64(0)));
    let rng = || ChaCha20Rng::seed_from_u64(0);
    let err = PartyState::new(Role::P1, params.clone(), Variant::Exact, &constant, t1.clone(), rng()).unwrap_err();
    assert!(matches!(err, ProtocolError::Stats(StatsError::Degenerate)));

    let (x1, _) = worked_pair();
    let err = PartyState::new(Role::P1, params.clone(), Variant::Exact, &x1, t2, rng()).unwrap_err();
    assert!(matches!(err, ProtocolError::TripleOwner));

    let short = SampleVector::new(vec![1.0, 2.0, 3.0]).unwrap();
    let err = PartyState::new(Role::P1, params, Variant::Exact, &short, t1, rng()).unwrap_err();
    assert!(matches!(err, ProtocolError::LengthMismatch { expected: 8, got: 3 }));
}

#[test]
fn out_of_order_and_malformed_input_is_rejected() {
    let (x1, _) = worked_pair();
    let params = worked_params();
    let mut p = party(Role::P1, &params, Variant::Exact, &x1);
    assert!(matches!(
        p.step(vec![Message::Bye]),
        Err(ProtocolError::UnexpectedCount {
            phase: Phase::Start,
            expected: 0,
            got: 1
        })
    ));
    let (out, output) = p.step(Vec::new()).unwrap();
    assert!(output.is_none());
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].kind(), MessageKind::ErrVec);
    assert_eq!(p.phase(), Phase::AwaitErrVec);

    let shares = vec![params.prime.zero(); 8];
    assert!(matches!(
        p.step(vec![Message::ShareVec(shares)]),
        Err(ProtocolError::PhaseMismatch {
            phase: Phase::AwaitErrVec,
            got: MessageKind::ShareVec
        })
    ));
    assert!(matches!(
        p.step(vec![Message::ErrVec(vec![0.0; 7])]),
        Err(ProtocolError::Malformed {
            kind: MessageKind::ErrVec,
            ..
        })
    ));
    assert!(matches!(
        p.step(vec![Message::ErrVec(vec![f64::NAN; 8])]),
        Err(ProtocolError::Malformed { .. })
    ));
    assert!(matches!(p.step(Vec::new()), Err(ProtocolError::UnexpectedCount { .. })));
    assert!(matches!(
        p.leakage_record(),
        Err(ProtocolError::NotReady(Phase::AwaitErrVec))
    ));
    p.step(vec![Message::ErrVec(vec![0.0; 8])]).unwrap();
    assert_eq!(p.phase(), Phase::AwaitErrSum);
}

#[test]
fn elements_of_a_foreign_field_are_rejected() {
    let (x1, _) = worked_pair();
    let params = worked_params();
    let mut p = party(Role::P1, &params, Variant::Approximate, &x1);
    p.step(Vec::new()).unwrap();
    let foreign = vec![Prime::new(1823).unwrap().one(); 8];
    assert!(matches!(
        p.step(vec![Message::ShareVec(foreign)]),
        Err(ProtocolError::Malformed { .. })
    ));
}

#[test]
fn missing_triples_surface_as_exhaustion() {
    let (x1, x2) = worked_pair();
    let params = worked_params();
    let (t1, t2) = split_triples(deal_triples(7, params.prime, &mut ChaCha20Rng::seed_from_u64(0)));
    let p1 = PartyState::new(
        Role::P1,
        params.clone(),
        Variant::Approximate,
        &x1,
        t1,
        ChaCha20Rng::seed_from_u64(1),
    )
    .unwrap();
    let p2 = PartyState::new(
        Role::P2,
        params,
        Variant::Approximate,
        &x2,
        t2,
        ChaCha20Rng::seed_from_u64(2),
    )
    .unwrap();
    let err = semicorr::protocol::drive(p1, p2).unwrap_err();
    assert!(matches!(
        err,
        ProtocolError::Mpc(MpcError::TriplesExhausted {
            needed: 8,
            available: 7
        })
    ));
}

#[test]
fn finished_party_refuses_further_steps() {
    let (x1, x2) = worked_pair();
    let mut s = run_session(&worked_params(), Variant::Exact, &x1, &x2, 9).unwrap();
    assert!(matches!(s.p1.step(vec![Message::Bye]), Err(ProtocolError::Finished)));
}

#[test]
fn transcript_counts_match_the_complexity_claims() {
    let (x1, x2) = worked_pair();
    for variant in [Variant::Exact, Variant::Approximate] {
        let s = run_session(&worked_params(), variant, &x1, &x2, 10).unwrap();
        for p in [&s.p1, &s.p2] {
            let t = p.transcript();
            let reals = if variant == Variant::Exact { 9 } else { 0 };
            assert_eq!(t.sent_reals(), reals);
            assert_eq!(t.sent_field_elements(), 3 * 8 + 1);
            assert_eq!(p.triples_consumed(), 8);
        }
    }
    let s = run_session(&worked_params(), Variant::Exact, &x1, &x2, 10).unwrap();
    let kinds = s.p1.transcript().sent_kinds();
    use MessageKind::*;
    assert_eq!(kinds, vec![ErrVec, ErrSum, ShareVec, MaskedDe, ShareA]);
    let kinds = s.p2.transcript().sent_kinds();
    assert_eq!(kinds, vec![ErrVec, ErrSum, ShareVec, MaskedDe, ShareA]);
}

#[test]
fn sessions_are_deterministic_per_seed() {
    let (x1, x2) = worked_pair();
    let a = run_session(&worked_params(), Variant::Exact, &x1, &x2, 11).unwrap();
    let b = run_session(&worked_params(), Variant::Exact, &x1, &x2, 11).unwrap();
    let c = run_session(&worked_params(), Variant::Exact, &x1, &x2, 12).unwrap();
    assert_eq!(a.p1.transcript(), b.p1.transcript());
    assert_ne!(a.p1.transcript(), c.p1.transcript());
    assert_eq!(a.outputs(), c.outputs());
}

fn final_reveal(t: &Transcript) -> FieldElement {
    let mut shares = t
        .entries()
        .iter()
        .filter(|e| e.message.kind() == MessageKind::ShareA)
        .map(|e| match e.message {
            Message::ShareA(a) => a,
            _ => unreachable!(),
        });
    let a = shares.next().unwrap();
    let b = shares.next().unwrap();
    assert!(shares.next().is_none());
    a.add(b).unwrap()
}

#[test]
fn simulated_final_reveal_opens_to_the_product_sum() {
    let (x1, x2) = worked_pair();
    let params = worked_params();
    let s = run_session(&params, Variant::Exact, &x1, &x2, 13).unwrap();
    let r = s.outputs().0;
    for (role, data) in [(Role::P1, &x1), (Role::P2, &x2)] {
        let rec = s.party(role).leakage_record().unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        let t = simulate_view(role, data, r, Some(&rec), &params, &mut rng).unwrap();
        assert_eq!(final_reveal(&t).value(), 643);
        assert_eq!(t.sent_kinds(), s.party(role).transcript().sent_kinds());
    }

    let s = run_session(&params, Variant::Approximate, &x1, &x2, 13).unwrap();
    let r = s.outputs().0;
    let mut rng = ChaCha20Rng::seed_from_u64(98);
    let t = simulate_view(Role::P2, &x2, r, None, &params, &mut rng).unwrap();
    assert_eq!(final_reveal(&t).value(), 643);
}

#[test]
fn simulator_rejects_inconsistent_output() {
    let (x1, x2) = worked_pair();
    let params = worked_params();
    let s = run_session(&params, Variant::Exact, &x1, &x2, 14).unwrap();
    let rec = s.p1.leakage_record().unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    let err = simulate_view(Role::P1, &x1, 0.8, Some(&rec), &params, &mut rng).unwrap_err();
    assert!(matches!(err, ProtocolError::Inconsistent(_)));
    let err = simulate_view(Role::P1, &x1, 1e6, None, &params, &mut rng).unwrap_err();
    assert!(matches!(err, ProtocolError::Inconsistent(_)));
}

fn frames(role: Role, t: &Transcript) -> Vec<Vec<u8>> {
    t.entries()
        .iter()
        .map(|e| {
            let sender = if e.direction == Direction::Sent {
                role
            } else {
                role.peer()
            };
            assert_eq!(sender, e.sender);
            frame_encode(&Frame {
                sender,
                message: e.message.clone(),
            })
        })
        .collect()
}

/// Feeding the simulator the very randomness of a real run reproduces the
/// corrupt party's transcript byte for byte.
#[test]
fn simulator_replays_a_real_transcript_under_forced_randomness() {
    let (x1, x2) = worked_pair();
    let params = worked_params();
    let seed = 15;
    let s = run_session(&params, Variant::Exact, &x1, &x2, seed).unwrap();
    let r = s.outputs().0;
    let (mut dealer, _, _) = session_rngs(seed);
    let dealt = deal_triples(params.n, params.prime, &mut dealer);

    for (role, data) in [(Role::P1, &x1), (Role::P2, &x2)] {
        let me = s.party(role);
        let peer = s.party(role.peer());
        let mut words = Vec::new();
        for t in &dealt {
            let share = if role == Role::P1 { &t.p1 } else { &t.p2 };
            words.extend([share.u.value(), share.v.value(), share.w.value()]);
        }
        let mut peer_sent = peer.transcript().sent();
        let mut own_sent = me.transcript().sent();
        let sent_of = |it: &mut dyn Iterator<Item = &Message>, kind: MessageKind| loop {
            let m = it.next().unwrap();
            if m.kind() == kind {
                return m.clone();
            }
        };
        let Message::ShareVec(peer_shares) = sent_of(&mut peer_sent, MessageKind::ShareVec) else {
            unreachable!()
        };
        words.extend(peer_shares.iter().map(|x| x.value()));
        let Message::MaskedDe { d, e } = sent_of(&mut peer_sent, MessageKind::MaskedDe) else {
            unreachable!()
        };
        words.extend(d.iter().chain(&e).map(|x| x.value()));
        let Message::ShareVec(own_sent_shares) = sent_of(&mut own_sent, MessageKind::ShareVec) else {
            unreachable!()
        };
        // The sharing draws the first share; party 1 keeps it, party 2 sends it.
        let draws: Vec<u64> = match role {
            Role::P1 => me
                .encoded()
                .iter()
                .zip(&own_sent_shares)
                .map(|(x, s2)| x.sub(*s2).unwrap().value())
                .collect(),
            Role::P2 => own_sent_shares.iter().map(|x| x.value()).collect(),
        };
        words.extend(draws);

        let mut script = Script::new(words);
        let rec = me.leakage_record().unwrap();
        let sim = simulate_view(role, data, r, Some(&rec), &params, &mut script).unwrap();
        assert!(script.exhausted());
        assert_eq!(frames(role, &sim), frames(role, me.transcript()), "role {role}");
        assert_eq!(
            centered(&sim.received_field_elements()),
            centered(&me.transcript().received_field_elements())
        );
    }
}

#[test]
fn triple_files_drive_a_session() {
    let (x1, x2) = worked_pair();
    let params = worked_params();
    let (t1, t2) = split_triples(deal_triples(8, params.prime, &mut ChaCha20Rng::seed_from_u64(3)));
    let mut f1 = Vec::new();
    t1.write_to(&mut f1).unwrap();
    let t1 = TripleStore::read_from(f1.as_slice(), Role::P1, params.prime).unwrap();
    let p1 = PartyState::new(
        Role::P1,
        params.clone(),
        Variant::Exact,
        &x1,
        t1,
        ChaCha20Rng::seed_from_u64(1),
    )
    .unwrap();
    let p2 = PartyState::new(Role::P2, params, Variant::Exact, &x2, t2, ChaCha20Rng::seed_from_u64(2)).unwrap();
    let s = semicorr::protocol::drive(p1, p2).unwrap();
    assert!((s.outputs().0 - pearson(x1.values(), x2.values())).abs() < 1e-9);
}
