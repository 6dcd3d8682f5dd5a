mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use semicorr::field::{fe_from_centered, fe_mul, fe_to_centered, Prime};
use semicorr::fixedpoint::{decode, decode_grid, encode, round_to_grid, GridValue, Scale};
use semicorr::mpc::{beaver_combine, beaver_masked, deal_triples, reconstruct, share, AdditiveShare, Role};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn f1811() -> Prime {
    Prime::new(1811).unwrap()
}

fn beaver_product(x: u64, y: u64, prime: Prime, rng: &mut ChaCha20Rng) -> u64 {
    let x = prime.element(x).unwrap();
    let y = prime.element(y).unwrap();
    let mut t = deal_triples(1, prime, rng).pop().unwrap();
    let (x1, x2) = share(x, rng);
    let (y1, y2) = share(y, rng);
    let (d1, e1) = beaver_masked(x1, y1, &t.p1).unwrap();
    let (d2, e2) = beaver_masked(x2, y2, &t.p2).unwrap();
    let d = reconstruct(d1, d2).unwrap();
    let e = reconstruct(e1, e2).unwrap();
    let z1 = beaver_combine(Role::P1, &mut t.p1, d, e).unwrap();
    let z2 = beaver_combine(Role::P2, &mut t.p2, d, e).unwrap();
    reconstruct(z1, z2).unwrap().value()
}

#[test]
fn beaver_products_reconstruct_to_the_field_product() {
    let mut rng = ChaCha20Rng::seed_from_u64(100);
    for prime in [
        f1811(),
        Prime::new(Prime::LARGEST_32_BIT).unwrap(),
        Prime::new(3).unwrap(),
    ] {
        for _ in 0..10_000 {
            let x = rng.random_range(0..prime.get());
            let y = rng.random_range(0..prime.get());
            let want = (x as u128 * y as u128 % prime.get() as u128) as u64;
            assert_eq!(beaver_product(x, y, prime, &mut rng), want);
            let fx = prime.element(x).unwrap();
            assert_eq!(fe_mul(fx, prime.element(y).unwrap()).unwrap().value(), want);
        }
    }
}

#[test]
fn share_round_trips() {
    let mut rng = ChaCha20Rng::seed_from_u64(101);
    for prime in [f1811(), Prime::new(Prime::LARGEST_32_BIT).unwrap()] {
        for _ in 0..10_000 {
            let x = prime.random(&mut rng);
            let (a, b) = share(x, &mut rng);
            assert_eq!(a.party, Role::P1);
            assert_eq!(b.party, Role::P2);
            assert_eq!(reconstruct(a, b).unwrap(), x);
            assert_eq!(reconstruct(b, a).unwrap(), x);
        }
    }
}

#[test]
fn masked_difference_in_1811() {
    let p = f1811();
    let mut rng = ChaCha20Rng::seed_from_u64(103);
    let mut t = deal_triples(1, p, &mut rng).pop().unwrap();
    let u = t.u();
    // Re-split u so that it reconstructs to 3.
    let three = p.element(3).unwrap();
    let shift = three.sub(u).unwrap();
    t.p1.u = t.p1.u.add(shift).unwrap();
    let (x1, x2) = share(p.element(8).unwrap(), &mut rng);
    let zero = AdditiveShare::new(Role::P1, p.zero());
    let (d1, _) = beaver_masked(x1, zero, &t.p1).unwrap();
    let (d2, _) = beaver_masked(x2, AdditiveShare::new(Role::P2, p.zero()), &t.p2).unwrap();
    assert_eq!(reconstruct(d1, d2).unwrap().value(), 5);
}

#[test]
fn eight_times_eight_in_1811() {
    let mut rng = ChaCha20Rng::seed_from_u64(104);
    assert_eq!(beaver_product(8, 8, f1811(), &mut rng), 64);
}

#[test]
fn centered_map_is_a_bijection_for_1811() {
    let p = f1811();
    let m = p.half() as i64;
    assert_eq!(m, 905);
    let mut seen = vec![false; 1811];
    for x in -m..=m {
        let e = fe_from_centered(x, p).unwrap();
        assert_eq!(fe_to_centered(e), x);
        assert!(!seen[e.value() as usize]);
        seen[e.value() as usize] = true;
    }
    assert!(seen.iter().all(|&s| s));
    assert!(fe_from_centered(m + 1, p).is_err());
    assert!(fe_from_centered(-m - 1, p).is_err());
}

/// Either share alone is uniform on the field, whatever the secret.
#[test]
fn single_shares_are_uniform() {
    let p = Prime::new(23).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(102);
    let secret = p.element(7).unwrap();
    let runs = 46_000;
    let mut counts = [[0u64; 23]; 2];
    for _ in 0..runs {
        let (a, b) = share(secret, &mut rng);
        counts[0][a.value.value() as usize] += 1;
        counts[1][b.value.value() as usize] += 1;
    }
    let expected = runs as f64 / 23.0;
    let chi = ChiSquared::new(22.0).unwrap();
    for c in counts {
        let stat: f64 = c.iter().map(|&k| (k as f64 - expected).powi(2) / expected).sum();
        assert!(chi.sf(stat) > 1e-3, "chi-square {stat}");
    }
}

fn rational(num: i64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[test]
fn decoding_products_uses_the_squared_spacing() {
    let p = f1811();
    let delta = Scale::parse("0.1").unwrap();
    let a = fe_from_centered(643, p).unwrap();
    assert_eq!(decode(a, delta.squared()), 6.43);
    let g = decode_grid(a, delta.squared());
    assert_eq!(g.to_rational(), rational(643, 100));
    assert_eq!(g.divided_f64(7), 643.0 / 700.0);
}

proptest! {
    #[test]
    fn rounding_lands_within_half_a_step(z in -50.0f64..50.0, den in 1u64..64) {
        let scale = Scale::new(1, den).unwrap();
        let r = round_to_grid(z, scale).unwrap();
        let step = 1.0 / den as f64;
        prop_assert!(r.epsilon.abs() <= step / 2.0 + 1e-12);
        prop_assert_eq!(r.grid.to_f64() + r.epsilon, z);
    }

    #[test]
    fn encode_decode_round_trips_on_the_grid(m in -905i64..=905, den in 1u64..1000) {
        let scale = Scale::new(1, den).unwrap();
        let g = GridValue::new(m, scale);
        let e = encode(g, f1811()).unwrap();
        prop_assert_eq!(decode_grid(e, scale), g);
        prop_assert_eq!(decode(e, scale), m as f64 / den as f64);
    }

    #[test]
    fn field_arithmetic_matches_wide_integers(a in 0u64..4294967291, b in 0u64..4294967291) {
        let p = Prime::new(Prime::LARGEST_32_BIT).unwrap();
        let (x, y) = (p.element(a).unwrap(), p.element(b).unwrap());
        let m = p.get() as u128;
        prop_assert_eq!(x.mul(y).unwrap().value() as u128, a as u128 * b as u128 % m);
        prop_assert_eq!(x.add(y).unwrap().value() as u128, (a as u128 + b as u128) % m);
        prop_assert_eq!(x.sub(y).unwrap().value() as u128, (a as u128 + m - b as u128) % m);
    }
}
