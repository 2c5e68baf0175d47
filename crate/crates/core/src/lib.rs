//! Quantum instruments, their sequential convolution and trajectory
//! sampling, with numerical checks of the associated group-algebra
//! identities.

// `!(x > 0.0)` guards reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod commutative;
pub mod dilation;
pub mod error;
pub mod expm;
pub mod fit;
pub mod group_analysis;
pub mod iga;
pub mod instrument;
pub mod operator;
pub mod presets;
pub mod quadrature;
pub mod random;
pub mod superop;
pub mod trajectory;

pub use error::{Error, Result};
pub use instrument::{Atom, Instrument, InstrumentKind, WeakKind, WeakSpec};
pub use operator::Operator;
pub use superop::{ChoiMatrix, SuperOperator};
