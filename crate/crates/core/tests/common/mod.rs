#![allow(dead_code)]

use std::path::PathBuf;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, RngCore};
use rand_chacha::ChaCha20Rng;
use semicorr::field::Prime;
use semicorr::fixedpoint::Scale;
use semicorr::leakage::LinearSystem;
use semicorr::params::ProtocolParams;
use semicorr::stats::SampleVector;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn worked_pair() -> (SampleVector, SampleVector) {
    (
        SampleVector::load(&fixture("worked_p1.txt")).unwrap(),
        SampleVector::load(&fixture("worked_p2.txt")).unwrap(),
    )
}

pub fn worked_params() -> ProtocolParams {
    ProtocolParams::validate(8, 2.5, Scale::parse("0.1").unwrap(), Prime::new(1811).unwrap()).unwrap()
}

/// Plaintext Pearson correlation computed the textbook way, independent of the library.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    sxy / (sxx * syy).sqrt()
}

/// z-scores with the (n-1) denominator, computed independently.
pub fn zscores(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let s = (x.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (n - 1.0)).sqrt();
    x.iter().map(|a| (a - m) / s).collect()
}

/// Grid multiplier of `z` for spacing `num / den`: nearest integer, ties to even.
pub fn round_multiplier(z: f64, num: u64, den: u64) -> i64 {
    (z * den as f64 / num as f64).round_ties_even() as i64
}

/// The approximate output as an exact rational:
/// `delta^2 sum_j m1_j m2_j / (n - 1)`.
pub fn approx_oracle(m1: &[i64], m2: &[i64], delta: &BigRational) -> BigRational {
    let sum: i64 = m1.iter().zip(m2).map(|(a, b)| a * b).sum();
    BigRational::from_integer(BigInt::from(sum)) * delta * delta / BigRational::from_integer(BigInt::from(m1.len() - 1))
}

/// Random correlated sample pair of length `n` with all z-scores well inside 2.5.
pub fn random_pair<R: RngCore>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>) {
    loop {
        let rho: f64 = rng.random_range(-0.9..0.9);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|a| rho * a + (1.0 - rho * rho).sqrt() * rng.random_range(-1.0..1.0))
            .collect();
        let ok = |v: &[f64]| zscores(v).iter().all(|z| z.abs() < 2.4);
        if ok(&x) && ok(&y) {
            return (x, y);
        }
    }
}

/// A random-number generator that replays a fixed script of 64-bit words.
pub struct Script {
    words: Vec<u64>,
    pos: usize,
}

impl Script {
    pub fn new(words: Vec<u64>) -> Script {
        Script { words, pos: 0 }
    }

    pub fn exhausted(&self) -> bool {
        self.pos == self.words.len()
    }
}

impl RngCore for Script {
    fn next_u32(&mut self) -> u32 {
        self.next_u64() as u32
    }

    fn next_u64(&mut self) -> u64 {
        let w = self.words[self.pos];
        self.pos += 1;
        w
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let w = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&w[..chunk.len()]);
        }
    }
}

/// Every assignment in `{-k..k}^n`, checked directly against both equations.
pub fn brute_force(system: &LinearSystem, delta: f64, k: i64, tolerance: f64) -> (u64, Vec<Vec<u64>>) {
    let n = system.n();
    let g = (2 * k + 1) as usize;
    let mut counts = vec![vec![0u64; g]; n];
    let mut total = 0;
    let mut m = vec![-k; n];
    loop {
        let x: Vec<f64> = m.iter().map(|&v| v as f64 * delta).collect();
        if (0..2).all(|row| system.residual(row, &x).abs() <= tolerance) {
            total += 1;
            for (j, &v) in m.iter().enumerate() {
                counts[j][(v + k) as usize] += 1;
            }
        }
        let mut j = 0;
        loop {
            if j == n {
                return (total, counts);
            }
            m[j] += 1;
            if m[j] <= k {
                break;
            }
            m[j] = -k;
            j += 1;
        }
    }
}

/// A peer data set taking two values, `k` copies of `a` and the rest `b`.
pub fn two_point_data(rng: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    let k = rng.random_range(1..n);
    let a: f64 = rng.random_range(-5.0..5.0);
    let b = a + rng.random_range(0.5..5.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let mut v: Vec<f64> = (0..n).map(|j| if j < k { a } else { b }).collect();
    for j in (1..n).rev() {
        v.swap(j, rng.random_range(0..=j));
    }
    v
}
