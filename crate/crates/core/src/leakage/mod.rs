//! What a curious participant can infer from the exact variant's leakage.
//!
//! The output `r`, the peer's rounding errors and the received cross sum give
//! two linear equations in the peer's grid values. [`enumerate_solutions`]
//! lists every grid assignment within `[-R, R]` consistent with them and
//! tabulates per-variable frequencies; [`two_point_attack`] solves the
//! special case where the peer's data takes only two distinct values.

mod enumerate;
mod system;
mod two_point;

use thiserror::Error;

use crate::protocol::ProtocolError;

pub use enumerate::{enumerate_solutions, EnumerateOptions, FrequencyTable, DEFAULT_BUDGET};
pub use system::{build_system, AdversaryView, LinearSystem};
pub use two_point::two_point_attack;

#[derive(Debug, Error)]
pub enum LeakageError {
    #[error("no leakage record: the exact variant must have completed its error exchange")]
    MissingRecord,
    #[error("view is inconsistent: {0}")]
    Shape(String),
    #[error("{candidates:.3e} candidate assignments exceed the budget of {budget:.3e}; pass the long-running flag to proceed")]
    BudgetExceeded { candidates: f64, budget: f64 },
    #[error("the peer's rounding errors take a single value, so its two support points cannot be told apart")]
    Indistinguishable,
    #[error("the peer's rounding errors take {0} distinct values, not two")]
    NotTwoPoint(usize),
    #[error("the two equations are linearly dependent")]
    DependentEquations,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}
