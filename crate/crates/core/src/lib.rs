//! Exact arithmetic for nonlocality swapping between bipartite binary boxes.
//!
//! Scalars live in `Q(2^(1/4))`, so quantum landmarks such as `1/2 + 1/√2`
//! are represented without rounding. On top of that sit boxes, linear
//! functionals, the swapping protocol, coupler families for theory models
//! and the enumeration of extremal wirings.

pub mod boxes;
pub mod error;
pub mod exact_scalar;
pub mod functionals;
pub mod linalg;
pub mod models;
pub mod swap;
pub mod wirings;

pub use boxes::{BipartiteBox, BoxLabel, LabelledBox, SinglePartyBox};
pub use error::{Error, Result};
pub use exact_scalar::{ExactScalar, Rational};
pub use functionals::{Coupler, LinearFunctional};
pub use models::{CouplerClass, TheoryModel};
pub use swap::SwapOutcome;
pub use wirings::{Wiring, WiringKind};
