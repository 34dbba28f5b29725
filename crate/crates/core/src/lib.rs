//! Workflow specifications for single-page applications and an explicit-state
//! model checker for them.
//!
//! A `.spa` file declares constants, state variables (one per observable widget
//! property), guarded actions (one per user action) and temporal properties. The
//! checker explores the reachable state graph breadth-first, checks deadlock
//! freedom and invariants, and checks eventually / leads-to / always-eventually
//! properties under weak fairness of the state-changing next-step relation.

pub mod cli;
pub mod explorer;
pub mod lexer;
pub mod liveness;
pub mod model;
pub mod parser;
pub mod pretty;
pub mod report;
pub mod semantics;
pub mod value;

pub use model::{canonical_key, state_to_record, Record, SpecModel, State};
pub use parser::{parse_expr, parse_spec, ParseError};
pub use pretty::pretty_print;
pub use semantics::{bind_constants, BoundSpec, EvalError, Machine};
pub use value::{Kind, Value};
