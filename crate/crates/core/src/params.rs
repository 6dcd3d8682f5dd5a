//! Session parameters and the planner that picks them.
//!
//! Admissibility is decided in exact rational arithmetic:
//!
//! * `R <= n / delta`
//! * `(n - 1) / delta^2 + n (R / delta + 1/4) <= M = (p - 1) / 2`
//!
//! The planner also answers the inverse question: for a given modulus, the
//! smallest `delta` satisfying the second inequality, and the worst-case
//! approximation error that spacing implies.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::field::{FieldError, Prime};
use crate::fixedpoint::{max_multiplier_within, Scale};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("need n >= 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("bound R must be positive and finite, got {0}")]
    InvalidBound(f64),
    #[error("R <= n/delta violated: R = {bound}, n/delta = {limit}")]
    RangeBound { bound: f64, limit: f64 },
    #[error("(n-1)/delta^2 + n(R/delta + 1/4) <= M violated: bound = {required}, M = {available}")]
    ModulusBound { required: f64, available: u64 },
    #[error("delta_min needs M > n/4 (M = {m}, n = {n})")]
    ModulusTooSmall { m: u64, n: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

fn rational(x: f64) -> Result<BigRational, ParamError> {
    if !x.is_finite() || x <= 0.0 {
        return Err(ParamError::InvalidBound(x));
    }
    BigRational::from_float(x).ok_or(ParamError::InvalidBound(x))
}

fn int(x: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// `(n - 1) / delta^2 + n (R / delta + 1/4)`, exactly.
pub fn modulus_requirement(n: usize, bound: f64, delta: Scale) -> Result<BigRational, ParamError> {
    let r = rational(bound)?;
    let d = delta.delta_rational();
    let n_r = int(n as u64);
    let quarter = BigRational::new(1.into(), 4.into());
    Ok((n_r.clone() - int(1)) / (d.clone() * d.clone()) + n_r * (r / d + quarter))
}

/// `R <= n / delta`, exactly.
pub fn check_range_bound(n: usize, bound: f64, delta: Scale) -> Result<(), ParamError> {
    let r = rational(bound)?;
    let limit = int(n as u64) / delta.delta_rational();
    if r > limit {
        return Err(ParamError::RangeBound {
            bound,
            limit: limit.to_f64().unwrap_or(f64::INFINITY),
        });
    }
    Ok(())
}

/// Agreed session parameters `(n, R, delta, p)` with `M = (p - 1) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolParams {
    pub n: usize,
    pub bound: f64,
    pub delta: Scale,
    pub prime: Prime,
    pub m: u64,
    max_multiplier: i64,
    enforced: bool,
}

impl ProtocolParams {
    /// Checks every inequality; the error names the first one that fails.
    pub fn validate(n: usize, bound: f64, delta: Scale, prime: Prime) -> Result<Self, ParamError> {
        let params = Self::build(n, bound, delta, prime, true)?;
        check_range_bound(n, bound, delta)?;
        let required = modulus_requirement(n, bound, delta)?;
        if required > int(params.m) {
            return Err(ParamError::ModulusBound {
                required: required.to_f64().unwrap_or(f64::INFINITY),
                available: params.m,
            });
        }
        Ok(params)
    }

    /// Skips the modulus bound so tiny primes can be used in statistical
    /// tests. Outputs are only meaningful if the accumulated products happen
    /// to fit the centered range. Never used by the networked runner.
    pub fn relaxed(n: usize, bound: f64, delta: Scale, prime: Prime) -> Result<Self, ParamError> {
        Self::build(n, bound, delta, prime, false)
    }

    fn build(n: usize, bound: f64, delta: Scale, prime: Prime, enforced: bool) -> Result<Self, ParamError> {
        if n < 2 {
            return Err(ParamError::TooFewSamples(n));
        }
        let r = rational(bound)?;
        let delta = delta.with_exponent(1);
        Ok(ProtocolParams {
            n,
            bound,
            delta,
            prime,
            m: prime.half(),
            max_multiplier: max_multiplier_within(&r, delta),
            enforced,
        })
    }

    /// Largest `|m|` with `|m| * delta <= R`.
    pub fn max_multiplier(&self) -> i64 {
        self.max_multiplier
    }

    /// Whether the modulus bound was checked at construction.
    pub fn is_enforced(&self) -> bool {
        self.enforced
    }

    pub fn product_scale(&self) -> Scale {
        self.delta.squared()
    }

    pub fn max_error(&self) -> f64 {
        max_error(self.n, self.bound, self.delta.delta_f64())
    }

    /// SHA-256 over a canonical little-endian encoding of `(n, R, delta, p)`.
    pub fn fingerprint(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"semicorr-params-v1");
        h.update((self.n as u64).to_le_bytes());
        h.update(self.bound.to_bits().to_le_bytes());
        h.update(self.delta.numerator().to_le_bytes());
        h.update(self.delta.denominator().to_le_bytes());
        h.update(self.prime.get().to_le_bytes());
        h.finalize().into()
    }
}

impl fmt::Display for ProtocolParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} R={} delta={} p={} M={}",
            self.n, self.bound, self.delta, self.prime, self.m
        )
    }
}

/// Smallest prime whose `M = (p - 1) / 2` covers the modulus requirement.
pub fn suggest_prime(n: usize, bound: f64, delta: Scale) -> Result<Prime, ParamError> {
    let required = modulus_requirement(n, bound, delta)?;
    let m = required.ceil().to_integer();
    let lower = (m * BigInt::from(2) + BigInt::from(1))
        .to_u64()
        .ok_or(FieldError::NoPrimeAvailable)?;
    Ok(Prime::smallest_at_least(lower)?)
}

/// `delta^2 (M - n/4) - delta n R - n + 1`, exactly.
pub fn spacing_slack(n: usize, bound: f64, m: u64, delta: &BigRational) -> Result<BigRational, ParamError> {
    let r = rational(bound)?;
    let n_r = int(n as u64);
    let quarter = BigRational::new(1.into(), 4.into());
    Ok(
        delta.clone() * delta.clone() * (int(m) - n_r.clone() * quarter) - delta.clone() * n_r.clone() * r - n_r
            + int(1),
    )
}

/// The tabulated minimal spacing
/// `(-nR + sqrt(n^2 R^2 + 4(M - n/4)(n - 1))) / (2(M - n/4))`.
///
/// This is the positive root of `delta^2 (M - n/4) + delta n R - n + 1`.
/// Note the sign of the middle term: the modulus bound itself rearranges to
/// `delta^2 (M - n/4) - delta n R - n + 1 >= 0`, whose smallest admissible
/// spacing is [`delta_min_admissible`]. The two agree while `nR` is small
/// compared to `sqrt(M n)`.
///
/// Evaluated in the cancellation-free form `2(n-1) / (nR + sqrt(...))`, then
/// refined by one Newton step on the exact polynomial.
pub fn delta_min(n: usize, bound: f64, m: u64) -> Result<f64, ParamError> {
    let (lead, nr, root) = discriminant_root(n, bound, m)?;
    let nf = n as f64;
    let mut d = 2.0 * (nf - 1.0) / (nr + root);
    if d > 0.0 {
        let exact = BigRational::from_float(d).expect("finite");
        let f = tabulated_polynomial(n, bound, m, &exact)?.to_f64().unwrap_or(0.0);
        let fp = 2.0 * d * lead + nr;
        if fp != 0.0 {
            d -= f / fp;
        }
    }
    Ok(d)
}

/// Smallest `delta > 0` satisfying the modulus bound, i.e. the positive root
/// of `delta^2 (M - n/4) - delta n R - n + 1`.
pub fn delta_min_admissible(n: usize, bound: f64, m: u64) -> Result<f64, ParamError> {
    let (lead, nr, root) = discriminant_root(n, bound, m)?;
    let mut d = (nr + root) / (2.0 * lead);
    if d > 0.0 {
        let exact = BigRational::from_float(d).expect("finite");
        let f = spacing_slack(n, bound, m, &exact)?.to_f64().unwrap_or(0.0);
        let fp = 2.0 * d * lead - nr;
        if fp != 0.0 {
            d -= f / fp;
        }
    }
    Ok(d)
}

fn discriminant_root(n: usize, bound: f64, m: u64) -> Result<(f64, f64, f64), ParamError> {
    let nf = n as f64;
    let lead = m as f64 - nf / 4.0;
    if !(lead > 0.0) {
        return Err(ParamError::ModulusTooSmall { m, n });
    }
    rational(bound)?;
    let nr = nf * bound;
    let disc = nr * nr + 4.0 * lead * (nf - 1.0);
    Ok((lead, nr, disc.sqrt()))
}

/// `delta^2 (M - n/4) + delta n R - n + 1`, exactly.
pub fn tabulated_polynomial(n: usize, bound: f64, m: u64, delta: &BigRational) -> Result<BigRational, ParamError> {
    let r = rational(bound)?;
    let n_r = int(n as u64);
    Ok(spacing_slack(n, bound, m, delta)? + int(2) * delta.clone() * n_r * r)
}

/// Worst-case `|r - r~|`: `(n delta / (n - 1)) (R + delta / 4)`.
pub fn max_error(n: usize, bound: f64, delta: f64) -> f64 {
    let nf = n as f64;
    nf * delta / (nf - 1.0) * (bound + delta / 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub n: usize,
    pub bound: f64,
    pub delta_min: f64,
    pub err_max: f64,
}

pub const TABLE1_SIZES: [usize; 5] = [100, 1_000, 10_000, 100_000, 1_000_000];
pub const TABLE1_BOUNDS: [f64; 3] = [2.5, 5.0, 10.0];

/// Minimal spacing and worst-case error for the reference 32-bit prime.
pub fn table1() -> Vec<Table1Row> {
    let m = (Prime::LARGEST_32_BIT - 1) / 2;
    let mut rows = Vec::with_capacity(15);
    for &n in &TABLE1_SIZES {
        for &bound in &TABLE1_BOUNDS {
            let d = delta_min(n, bound, m).expect("reference prime is large enough");
            rows.push(Table1Row {
                n,
                bound,
                delta_min: d,
                err_max: max_error(n, bound, d),
            });
        }
    }
    rows
}

/// Renders rows as CSV with header `n,R,delta_min,err_max`.
pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut out = String::from("n,R,delta_min,err_max\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{:.6e},{:.6e}\n",
            row.n, row.bound, row.delta_min, row.err_max
        ));
    }
    out
}
