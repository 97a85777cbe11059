//! Quantitative reasoning engine for epistemic logic programs.
//!
//! The pipeline: [`parser`] reads the surface language into the
//! [`model`] types, [`grounder`] instantiates programs over their
//! Herbrand universe, [`asp`] computes answer sets of epistemic-free
//! ground programs, [`elp`] enumerates and counts candidate world views,
//! and [`quant`] turns counts into plausibility levels and exact
//! probabilities. [`reductions`] compiles quantified-Boolean difference
//! instances into programs whose world-view counts match an independent
//! brute-force evaluator, and [`treewidth`] provides primal graphs,
//! heuristic tree decompositions, and bag-wise grounding.

pub mod asp;
pub mod budget;
pub mod elp;
pub mod gen;
pub mod grounder;
pub mod model;
pub mod parser;
pub mod quant;
pub mod reductions;
mod sat;
pub mod treewidth;

pub use budget::Budgets;
pub use model::{classify, Program, ProgramClass, Rule};
