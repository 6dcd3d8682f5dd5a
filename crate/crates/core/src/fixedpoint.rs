//! Fixed-point grid `{ m * delta^k : |m| <= M }` and its embedding in F_p.
//!
//! The scaling factor is an exact rational so that grid values, encodings and
//! the product scale `delta^2` are exact; binary64 only appears when a real
//! input is rounded onto the grid or a decoded value is handed back out.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Pow, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::field::{fe_from_centered, fe_to_centered, FieldElement, FieldError, Prime};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FixedPointError {
    #[error("cannot parse scaling factor {0:?}")]
    Parse(String),
    #[error("scaling factor must be positive")]
    NonPositive,
    #[error("scaling factor {0} does not fit 64-bit numerator/denominator")]
    TooLarge(String),
    #[error("cannot round non-finite value {0}")]
    NonFinite(f64),
    #[error("grid multiplier {0} overflows the integer range")]
    MultiplierOverflow(f64),
    #[error("grid multiplier {multiplier} exceeds M = {max}")]
    OutOfRange { multiplier: i64, max: u64 },
}

impl From<FieldError> for FixedPointError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::CenteredOutOfRange { value, max } => FixedPointError::OutOfRange { multiplier: value, max },
            other => FixedPointError::Parse(other.to_string()),
        }
    }
}

/// Grid spacing `delta^k` with `delta = numerator / denominator` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scale {
    numerator: u64,
    denominator: u64,
    exponent: u32,
}

impl Scale {
    pub fn new(numerator: u64, denominator: u64) -> Result<Self, FixedPointError> {
        if numerator == 0 || denominator == 0 {
            return Err(FixedPointError::NonPositive);
        }
        let g = numerator.gcd(&denominator);
        Ok(Scale {
            numerator: numerator / g,
            denominator: denominator / g,
            exponent: 1,
        })
    }

    /// Parses `"0.1"`, `"2.15e-4"`, `"3"` or `"1/3"` exactly.
    pub fn parse(s: &str) -> Result<Self, FixedPointError> {
        let r = parse_decimal(s)?;
        Self::from_rational(&r)
    }

    pub fn from_rational(r: &BigRational) -> Result<Self, FixedPointError> {
        if !r.is_positive() {
            return Err(FixedPointError::NonPositive);
        }
        let (n, d) = (r.numer().to_u64(), r.denom().to_u64());
        match (n, d) {
            (Some(n), Some(d)) => Scale::new(n, d),
            _ => Err(FixedPointError::TooLarge(r.to_string())),
        }
    }

    pub fn with_exponent(self, exponent: u32) -> Self {
        Scale { exponent, ..self }
    }

    /// The product scale `delta^(2k)`.
    pub fn squared(self) -> Self {
        self.with_exponent(self.exponent * 2)
    }

    pub fn numerator(self) -> u64 {
        self.numerator
    }

    pub fn denominator(self) -> u64 {
        self.denominator
    }

    pub fn exponent(self) -> u32 {
        self.exponent
    }

    /// `delta` itself (exponent ignored), exactly.
    pub fn delta_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.numerator), BigInt::from(self.denominator))
    }

    /// `delta^k`, exactly.
    pub fn to_rational(self) -> BigRational {
        Pow::pow(self.delta_rational(), self.exponent)
    }

    /// `delta` as the nearest binary64.
    pub fn delta_f64(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// `delta^k` as binary64, correctly rounded when both parts fit 2^53.
    pub fn spacing_f64(self) -> f64 {
        multiple_to_f64(1, self)
    }
}

impl FromStr for Scale {
    type Err = FixedPointError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scale::parse(s)
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator == 1 {
            write!(f, "{}", self.numerator)?;
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator)?;
        }
        if self.exponent != 1 {
            write!(f, "^{}", self.exponent)?;
        }
        Ok(())
    }
}

/// Exact rational value of a decimal literal (optional sign, fraction, exponent)
/// or of a `p/q` fraction.
pub fn parse_decimal(s: &str) -> Result<BigRational, FixedPointError> {
    let err = || FixedPointError::Parse(s.to_string());
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all.parse::<BigInt>().map_err(|_| err())?);
    let shift = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if shift >= 0 {
        value *= Pow::pow(ten, shift as u32);
    } else {
        value /= Pow::pow(ten, shift.unsigned_abs());
    }
    Ok(if neg { -value } else { value })
}

/// `m * delta^k` as binary64.
fn multiple_to_f64(m: i64, scale: Scale) -> f64 {
    ratio_to_f64(m, scale, 1)
}

/// `m * delta^k / divisor`, correctly rounded.
fn ratio_to_f64(m: i64, scale: Scale, divisor: u64) -> f64 {
    const EXACT: u128 = 1 << 53;
    let k = scale.exponent;
    let num = (scale.numerator as u128).checked_pow(k);
    let den = (scale.denominator as u128)
        .checked_pow(k)
        .and_then(|d| d.checked_mul(divisor as u128));
    if let (Some(num), Some(den)) = (num, den) {
        if let Some(top) = (m.unsigned_abs() as u128).checked_mul(num) {
            if top <= EXACT && den <= EXACT {
                let v = top as f64 / den as f64;
                return if m < 0 { -v } else { v };
            }
        }
    }
    let exact = scale.to_rational() * BigRational::from_integer(BigInt::from(m))
        / BigRational::from_integer(BigInt::from(divisor));
    exact.to_f64().unwrap_or(f64::NAN)
}

/// A point `multiplier * delta^k` on the fixed-point grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridValue {
    pub multiplier: i64,
    pub scale: Scale,
}

impl GridValue {
    pub fn new(multiplier: i64, scale: Scale) -> Self {
        GridValue { multiplier, scale }
    }

    pub fn to_f64(self) -> f64 {
        multiple_to_f64(self.multiplier, self.scale)
    }

    /// `self / divisor`, rounded once.
    pub fn divided_f64(self, divisor: u64) -> f64 {
        ratio_to_f64(self.multiplier, self.scale, divisor)
    }

    pub fn to_rational(self) -> BigRational {
        self.scale.to_rational() * BigRational::from_integer(BigInt::from(self.multiplier))
    }
}

/// A real split as `grid + epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingResult {
    pub grid: GridValue,
    pub epsilon: f64,
}

/// Rounds `z` to the nearest grid point (ties to even multiplier).
pub fn round_to_grid(z: f64, scale: Scale) -> Result<RoundingResult, FixedPointError> {
    if !z.is_finite() {
        return Err(FixedPointError::NonFinite(z));
    }
    let spacing = scale.spacing_f64();
    let q = if scale.exponent == 1 {
        z * scale.denominator as f64 / scale.numerator as f64
    } else {
        z / spacing
    };
    let m = q.round_ties_even();
    if m.abs() >= 9.0e15 {
        return Err(FixedPointError::MultiplierOverflow(m));
    }
    let grid = GridValue::new(m as i64, scale);
    Ok(RoundingResult {
        grid,
        epsilon: z - grid.to_f64(),
    })
}

/// `phi_delta`: grid value to field element via its centered multiplier.
pub fn encode(g: GridValue, prime: Prime) -> Result<FieldElement, FixedPointError> {
    Ok(fe_from_centered(g.multiplier, prime)?)
}

/// `phi_delta^-1`: field element to `psi(a) * delta^k`.
pub fn decode(a: FieldElement, scale: Scale) -> f64 {
    multiple_to_f64(fe_to_centered(a), scale)
}

/// Exact counterpart of [`decode`].
pub fn decode_grid(a: FieldElement, scale: Scale) -> GridValue {
    GridValue::new(fe_to_centered(a), scale)
}

/// `floor(bound / delta)`: the largest multiplier whose grid value stays within `bound`.
pub fn max_multiplier_within(bound: &BigRational, scale: Scale) -> i64 {
    let q = bound / scale.to_rational();
    if q.is_negative() {
        return -1;
    }
    q.floor().to_integer().to_i64().unwrap_or(i64::MAX)
}
