//! Plaintext sample statistics: z-scores and the reference Pearson correlation.

use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("sample standard deviation is zero")]
    Degenerate,
    #[error("sample vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("{path}:{line}: cannot parse {text:?} as a number")]
    Parse { path: String, line: usize, text: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Pairwise (tree) summation; error grows as O(log n) rather than O(n).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

/// Pairwise-summed dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    const LEAF: usize = 64;
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= LEAF {
        return a.iter().zip(b).map(|(x, y)| x * y).sum();
    }
    let mid = a.len() / 2;
    dot(&a[..mid], &b[..mid]) + dot(&a[mid..], &b[mid..])
}

/// A party's private samples: at least two finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector(Vec<f64>);

impl SampleVector {
    pub fn new(values: Vec<f64>) -> Result<Self, StatsError> {
        if values.len() < 2 {
            return Err(StatsError::TooFewSamples(values.len()));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(StatsError::NonFinite { index, value });
        }
        Ok(SampleVector(values))
    }

    /// One number per line; blank lines and `#` comments are skipped. A line
    /// holding comma-separated fields uses the first field.
    pub fn parse(text: &str, origin: &str) -> Result<Self, StatsError> {
        let mut values = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let field = line.split(',').next().unwrap_or("").trim();
            let v: f64 = field.parse().map_err(|_| StatsError::Parse {
                path: origin.to_string(),
                line: i + 1,
                text: field.to_string(),
            })?;
            values.push(v);
        }
        SampleVector::new(values)
    }

    pub fn load(path: &Path) -> Result<Self, StatsError> {
        let text = fs::read_to_string(path).map_err(|e| StatsError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        SampleVector::parse(&text, &path.display().to_string())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.0) / self.0.len() as f64
    }

    /// Sample standard deviation with the `n - 1` denominator.
    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        let sq: Vec<f64> = self.0.iter().map(|x| (x - mean) * (x - mean)).collect();
        (pairwise_sum(&sq) / (self.0.len() - 1) as f64).sqrt()
    }
}

/// Standardized samples: mean zero, sum of squares `n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZScoreVector(Vec<f64>);

impl ZScoreVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn z_scores(x: &SampleVector) -> Result<ZScoreVector, StatsError> {
    let n = x.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples(n));
    }
    let mean = x.mean();
    let s = x.std_dev();
    // A spread below a few ulps of the mean is rounding noise, not variance.
    if !(s > 0.0) || s <= mean.abs() * f64::EPSILON * 4.0 {
        return Err(StatsError::Degenerate);
    }
    Ok(ZScoreVector(x.values().iter().map(|v| (v - mean) / s).collect()))
}

/// Pearson sample correlation as the normalized scalar product of z-scores.
pub fn correlation_plain(x1: &SampleVector, x2: &SampleVector) -> Result<f64, StatsError> {
    if x1.len() != x2.len() {
        return Err(StatsError::LengthMismatch(x1.len(), x2.len()));
    }
    let z1 = z_scores(x1)?;
    let z2 = z_scores(x2)?;
    Ok(dot(z1.values(), z2.values()) / (x1.len() - 1) as f64)
}
