//! Stochastic Boolean function evaluation: formulas, testing strategies,
//! exact optimal solvers, heuristics and instance families for measuring
//! the gap between adaptive and non-adaptive testing.
//!
//! ```
//! use sbfe_core::generators::gen_tribes;
//! use sbfe_core::num::ratio;
//! use sbfe_core::solve::{opt_adaptive, opt_nonadaptive};
//!
//! let inst = gen_tribes(2, 2)?;
//! assert_eq!(opt_adaptive(&inst)?.value, ratio(21, 8));
//! assert_eq!(opt_nonadaptive(&inst)?.value, ratio(25, 8));
//! # Ok::<(), sbfe_core::SbfeError>(())
//! ```

pub mod error;
pub mod formula;
pub mod generators;
pub mod heuristics;
pub mod instance;
pub mod num;
pub mod solve;
pub mod strategy;
pub mod verify;

pub use error::{Result, SbfeError};
pub use formula::{DnfFormula, Formula, Literal, Mask, PartialAssignment, ReadOnceDnf, RoNode, RoTree, TruthTable};
pub use instance::{Instance, Mode};
pub use num::{CostValue, Rational};
pub use strategy::{AdaptiveTree, NonAdaptiveStrategy, Strategy, TreeNode};
