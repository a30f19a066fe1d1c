//! A small SMT solver for QF_LIRA, used as the default backend process when no
//! external solver is configured.
//!
//! The solver reads a subset of SMT-LIB2 (declare-const, assert, push/pop,
//! check-sat, get-model, minimize) and decides satisfiability with a DPLL-style
//! search over atoms backed by an exact rational simplex with branch-and-bound
//! for integer variables. All arithmetic is exact (BigRational); strict
//! inequalities use infinitesimal (delta) bounds.

pub mod engine;
pub mod sexpr;
pub mod simplex;
pub mod solver;
pub mod term;

pub use engine::Engine;
