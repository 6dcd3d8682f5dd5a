//! Arithmetic in the prime field F_p for primes 2 < p < 2^32.
//!
//! Elements are stored as canonical residues in a `u64`; products are reduced
//! through a `u128` intermediate so `(p - 1)^2` never overflows. The centered
//! maps [`fe_from_centered`] and [`fe_to_centered`] translate between the
//! symmetric integer range `[-M, M]` (with `M = (p - 1) / 2`) and the field.

use std::fmt;

use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {0} is out of range (need 2 < p < 2^32)")]
    PrimeOutOfRange(u64),
    #[error("field elements belong to different primes ({left} and {right})")]
    PrimeMismatch { left: u64, right: u64 },
    #[error("value {value} is outside the centered range [-{max}, {max}]")]
    CenteredOutOfRange { value: i64, max: u64 },
    #[error("residue {value} is not reduced modulo {prime}")]
    NotReduced { value: u64, prime: u64 },
    #[error("no prime below 2^32 satisfies the request")]
    NoPrimeAvailable,
}

/// Deterministic Miller-Rabin; this witness set is exact for all n < 2^64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &w in &WITNESSES {
        if n == w {
            return true;
        }
        if n.is_multiple_of(w) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// A validated prime modulus with 2 < p < 2^32.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Prime(u64);

impl Prime {
    /// The largest prime below 2^32.
    pub const LARGEST_32_BIT: u64 = 4_294_967_291;

    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p <= 2 || p >= 1u64 << 32 {
            return Err(FieldError::PrimeOutOfRange(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Prime(p))
    }

    /// Smallest prime `p >= lower` with `2 < p < 2^32`.
    pub fn smallest_at_least(lower: u64) -> Result<Self, FieldError> {
        let mut candidate = lower.max(3);
        while candidate < (1u64 << 32) {
            if is_prime(candidate) {
                return Ok(Prime(candidate));
            }
            candidate += 1;
        }
        Err(FieldError::NoPrimeAvailable)
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// `M = (p - 1) / 2`, the largest magnitude in the centered range.
    #[inline]
    pub fn half(self) -> u64 {
        (self.0 - 1) / 2
    }

    pub fn zero(self) -> FieldElement {
        FieldElement { value: 0, prime: self }
    }

    pub fn one(self) -> FieldElement {
        FieldElement { value: 1, prime: self }
    }

    /// Builds an element from a residue that must already be reduced.
    pub fn element(self, value: u64) -> Result<FieldElement, FieldError> {
        if value >= self.0 {
            return Err(FieldError::NotReduced { value, prime: self.0 });
        }
        Ok(FieldElement { value, prime: self })
    }

    /// Reduces an arbitrary `u64` modulo p.
    pub fn reduce(self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.0,
            prime: self,
        }
    }

    /// Uniform element via rejection sampling on 64-bit draws.
    ///
    /// Kept independent of `rand`'s range sampling so transcripts stay
    /// reproducible across `rand` releases. An all-zero generator yields 0.
    pub fn random<R: RngCore + ?Sized>(self, rng: &mut R) -> FieldElement {
        let p = self.0;
        let zone = u64::MAX - (u64::MAX % p);
        loop {
            let x = rng.next_u64();
            if x < zone {
                return FieldElement {
                    value: x % p,
                    prime: self,
                };
            }
        }
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A residue modulo a session prime; `0 <= value < p` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    prime: Prime,
}

// Fallible on mismatched primes, so these are methods rather than operator impls.
#[allow(clippy::should_implement_trait)]
impl FieldElement {
    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn prime(self) -> Prime {
        self.prime
    }

    fn check(self, other: FieldElement) -> Result<u64, FieldError> {
        if self.prime != other.prime {
            return Err(FieldError::PrimeMismatch {
                left: self.prime.0,
                right: other.prime.0,
            });
        }
        Ok(self.prime.0)
    }

    pub fn add(self, other: FieldElement) -> Result<FieldElement, FieldError> {
        let p = self.check(other)?;
        let s = self.value + other.value;
        Ok(FieldElement {
            value: if s >= p { s - p } else { s },
            prime: self.prime,
        })
    }

    pub fn sub(self, other: FieldElement) -> Result<FieldElement, FieldError> {
        let p = self.check(other)?;
        let value = if self.value >= other.value {
            self.value - other.value
        } else {
            self.value + p - other.value
        };
        Ok(FieldElement {
            value,
            prime: self.prime,
        })
    }

    pub fn mul(self, other: FieldElement) -> Result<FieldElement, FieldError> {
        let p = self.check(other)?;
        Ok(FieldElement {
            value: mul_mod(self.value, other.value, p),
            prime: self.prime,
        })
    }

    pub fn neg(self) -> FieldElement {
        let value = if self.value == 0 { 0 } else { self.prime.0 - self.value };
        FieldElement {
            value,
            prime: self.prime,
        }
    }

    /// Little-endian 8-byte wire encoding.
    pub fn to_le_bytes(self) -> [u8; 8] {
        self.value.to_le_bytes()
    }

    pub fn from_le_bytes(bytes: [u8; 8], prime: Prime) -> Result<FieldElement, FieldError> {
        prime.element(u64::from_le_bytes(bytes))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

pub fn fe_add(a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
    a.add(b)
}

pub fn fe_mul(a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
    a.mul(b)
}

/// `x mod p` for `|x| <= M`.
pub fn fe_from_centered(x: i64, prime: Prime) -> Result<FieldElement, FieldError> {
    let max = prime.half();
    if x.unsigned_abs() > max {
        return Err(FieldError::CenteredOutOfRange { value: x, max });
    }
    let p = prime.get() as i64;
    Ok(FieldElement {
        value: x.rem_euclid(p) as u64,
        prime,
    })
}

/// The centered representative in `[-M, M]`; inverse of [`fe_from_centered`].
pub fn fe_to_centered(a: FieldElement) -> i64 {
    if a.value <= a.prime.half() {
        a.value as i64
    } else {
        a.value as i64 - a.prime.get() as i64
    }
}

/// Sum of a slice of elements sharing one prime.
pub fn fe_sum(prime: Prime, items: &[FieldElement]) -> Result<FieldElement, FieldError> {
    items.iter().try_fold(prime.zero(), |acc, &x| acc.add(x))
}
