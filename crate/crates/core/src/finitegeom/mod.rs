//! Curves and Jacobians over finite fields: point counts, group structure
//! and discrete logarithms.

use thiserror::Error;

pub mod count;
pub mod fq;
pub mod group;
pub mod jacobian;

pub use count::{ZetaData, DEFAULT_ORDER_CAP};
pub use fq::{FiniteField, Fq};
pub use group::{AbelianGroup, GroupStructure};
pub use jacobian::JacobianFq;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FiniteGeomError {
    #[error("residue field of size {q} exceeds the enumeration cap {cap}")]
    FieldTooLarge { q: u64, cap: u64 },
    #[error("{ell}-Sylow search stalled at order {found} of {expected}")]
    StructureBudget { ell: u64, found: u64, expected: u64 },
    #[error("random element is not killed by the claimed group order {order}")]
    OrderMismatch { order: u64 },
}
