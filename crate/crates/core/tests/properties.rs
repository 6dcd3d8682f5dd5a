mod common;

use common::{approx_oracle, pearson, random_pair, round_multiplier, zscores};
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use semicorr::fixedpoint::Scale;
use semicorr::params::{suggest_prime, ProtocolParams};
use semicorr::protocol::{run_session, Variant};
use semicorr::stats::SampleVector;

fn params(n: usize, delta: &str) -> ProtocolParams {
    let delta = Scale::parse(delta).unwrap();
    ProtocolParams::validate(n, 2.5, delta, suggest_prime(n, 2.5, delta).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_output_is_the_plaintext_correlation(n in 4usize..=64, data_seed: u64, seed: u64) {
        let (x, y) = random_pair(&mut ChaCha20Rng::seed_from_u64(data_seed), n);
        let p = params(n, "0.1");
        let s = run_session(&p, Variant::Exact, &SampleVector::new(x.clone()).unwrap(),
            &SampleVector::new(y.clone()).unwrap(), seed).unwrap();
        let (o1, o2) = s.outputs();
        prop_assert_eq!(o1, o2);
        prop_assert!((o1 - pearson(&x, &y)).abs() < 1e-9);
    }

    #[test]
    fn approximate_output_is_the_rounded_product_sum(
        n in 4usize..=64,
        den in prop::sample::select(vec![4u64, 10, 20, 100]),
        data_seed: u64,
        seed: u64,
    ) {
        let (x, y) = random_pair(&mut ChaCha20Rng::seed_from_u64(data_seed), n);
        let delta = format!("1/{den}");
        let p = params(n, &delta);
        let s = run_session(&p, Variant::Approximate, &SampleVector::new(x.clone()).unwrap(),
            &SampleVector::new(y.clone()).unwrap(), seed).unwrap();
        let m1: Vec<i64> = zscores(&x).iter().map(|&z| round_multiplier(z, 1, den)).collect();
        let m2: Vec<i64> = zscores(&y).iter().map(|&z| round_multiplier(z, 1, den)).collect();
        prop_assert_eq!(s.p1.grid_multipliers(), m1.clone());
        prop_assert_eq!(s.p2.grid_multipliers(), m2.clone());
        let want = approx_oracle(&m1, &m2, &p.delta.to_rational()).to_f64().unwrap();
        let (o1, o2) = s.outputs();
        prop_assert_eq!(o1, want);
        prop_assert_eq!(o2, want);
        prop_assert!((o1 - pearson(&x, &y)).abs() <= p.max_error());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// `r = r~ + (sum z1 eps2 + sum z2 eps1 - sum eps1 eps2) / (n - 1)`, in plaintext.
    #[test]
    fn correlation_splits_into_rounded_part_and_error_terms(n in 4usize..=64, data_seed: u64, den in 1u64..200) {
        let (x, y) = random_pair(&mut ChaCha20Rng::seed_from_u64(data_seed), n);
        let (z1, z2) = (zscores(&x), zscores(&y));
        let d = 1.0 / den as f64;
        let g1: Vec<f64> = z1.iter().map(|&z| round_multiplier(z, 1, den) as f64 * d).collect();
        let g2: Vec<f64> = z2.iter().map(|&z| round_multiplier(z, 1, den) as f64 * d).collect();
        let e1: Vec<f64> = z1.iter().zip(&g1).map(|(z, g)| z - g).collect();
        let e2: Vec<f64> = z2.iter().zip(&g2).map(|(z, g)| z - g).collect();
        let s = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        let m = (n - 1) as f64;
        let rebuilt = s(&g1, &g2) / m + (s(&z1, &e2) + s(&z2, &e1) - s(&e1, &e2)) / m;
        prop_assert!((rebuilt - pearson(&x, &y)).abs() < 1e-9);
    }
}
