//! Greedy maximization of nondecreasing submodular set functions under a
//! cardinality constraint, with overlap-aware guarantees, worst-case
//! instances and exact verification tools.
//!
//! Scalars come in two modes. [`Mode::Exact`] uses arbitrary precision
//! rationals so equalities can be asserted; [`Mode::Float`] uses `f64` with an
//! absolute tolerance of [`FLOAT_TOL`] for random sweeps.

pub mod bounds;
pub mod error;
pub mod greedy;
pub mod instance;
pub mod instances;
pub mod lp;
pub mod scalar;
pub mod subset;
pub mod verify;

pub use error::{Error, Result};
pub use greedy::{run_greedy, run_lazy_greedy, GreedyTrace, TiePolicy};
pub use instance::{Instance, InstanceDoc, InstanceKind};
pub use scalar::{format_rat, parse_rat, rat, Mode, Rat, Value, FLOAT_TOL};
pub use subset::{ElementId, SubsetMask};
