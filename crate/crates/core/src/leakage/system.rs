use rand::RngCore;

use super::LeakageError;
use crate::protocol::{LeakageRecord, PartyState};
use crate::stats::dot;

/// Everything one participant of an exact run knows that bears on the
/// peer's data: its own z-scores, its leakage record and the output.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryView {
    pub z_own: Vec<f64>,
    pub record: Option<LeakageRecord>,
    pub r: f64,
}

impl AdversaryView {
    /// The view of a finished party. Parties of the approximate variant yield
    /// a view without a record.
    pub fn from_party<R: RngCore>(party: &PartyState<R>) -> Result<AdversaryView, LeakageError> {
        let r = party
            .output()
            .ok_or_else(|| LeakageError::Shape("party has not finished".into()))?;
        Ok(AdversaryView {
            z_own: party.z_scores().values().to_vec(),
            record: party.leakage_record().ok(),
            r,
        })
    }

    pub fn n(&self) -> usize {
        self.z_own.len()
    }

    pub(crate) fn record(&self) -> Result<&LeakageRecord, LeakageError> {
        let rec = self.record.as_ref().ok_or(LeakageError::MissingRecord)?;
        let n = self.z_own.len();
        if rec.eps_own.len() != n || rec.eps_other.len() != n {
            return Err(LeakageError::Shape(format!(
                "{} z-scores but error vectors of length {} and {}",
                n,
                rec.eps_own.len(),
                rec.eps_other.len()
            )));
        }
        Ok(rec)
    }
}

/// Two equations `coefficients[i] . z~ = rhs[i]` in the peer's grid values.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub coefficients: [Vec<f64>; 2],
    pub rhs: [f64; 2],
    pub labels: Vec<String>,
}

impl LinearSystem {
    pub fn new(coefficients: [Vec<f64>; 2], rhs: [f64; 2]) -> LinearSystem {
        let labels = (1..=coefficients[0].len()).map(|j| format!("z~{j}")).collect();
        LinearSystem {
            coefficients,
            rhs,
            labels,
        }
    }

    pub fn n(&self) -> usize {
        self.coefficients[0].len()
    }

    /// `coefficients[row] . x - rhs[row]`.
    pub fn residual(&self, row: usize, x: &[f64]) -> f64 {
        dot(&self.coefficients[row], x) - self.rhs[row]
    }
}

/// The adversary's equations in the peer's grid values `z~`:
///
/// ```text
/// sum_j z~_j z_j^own = (n-1) r           - sum_j eps_j^other z_j^own
/// sum_j z~_j eps_j^own = received cross sum - sum_j eps_j^other eps_j^own
/// ```
pub fn build_system(view: &AdversaryView) -> Result<LinearSystem, LeakageError> {
    let rec = view.record()?;
    let n = view.n();
    let rhs1 = (n - 1) as f64 * view.r - dot(&rec.eps_other, &view.z_own);
    let rhs2 = rec.cross_sum_received - dot(&rec.eps_other, &rec.eps_own);
    Ok(LinearSystem::new(
        [view.z_own.clone(), rec.eps_own.clone()],
        [rhs1, rhs2],
    ))
}
