//! Truncated multivariate Taylor jets with exact-order arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients of a real function of `nvars` real
//! variables about a base point, truncated at total degree `order`. Complex
//! coordinates `z_i = x_i + i y_i` use variable `2i` for `x_i` and `2i + 1`
//! for `y_i`; [`CJet`] pairs two real jets and supplies Wirtinger derivatives.

mod basis;
mod complex;
mod jet;

pub use complex::{complex_partial, CJet, Wirtinger};
pub use jet::Jet;

use thiserror::Error;

/// Truncation order used when callers do not ask for one.
pub const DEFAULT_ORDER: usize = 10;

/// Most real variables a jet may carry (four complex dimensions).
pub const MAX_VARS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jets live in different variable counts ({0} vs {1})")]
    VariableMismatch(usize, usize),
    #[error("jets truncated at different orders ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("jets expanded about different base points")]
    BaseMismatch,
    #[error("division by a jet whose constant term is {0:e}")]
    SingularDivision(f64),
    #[error("cannot differentiate an order-0 jet")]
    OrderUnderflow,
    #[error("{func} is not analytic at {value:e}")]
    Domain { func: &'static str, value: f64 },
    #[error("unsupported variable count {0} (1..={MAX_VARS})")]
    TooManyVariables(usize),
    #[error("order {order} in {nvars} variables exceeds the supported table size")]
    OrderTooLarge { nvars: usize, order: usize },
    #[error("variable index {0} out of range")]
    BadVariable(usize),
    #[error("coefficient vector has length {got}, expected {expected}")]
    BadLength { got: usize, expected: usize },
}
