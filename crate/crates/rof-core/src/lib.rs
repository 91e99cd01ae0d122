//! Toolkit for property testing of read-once formulas.
//!
//! A read-once formula is a rooted tree of gates in which every variable
//! appears in at most one leaf. The formula itself is free to read; the
//! assignment is available only through queries. This crate provides:
//!
//! * [`formula`]: the arena representation, a text format, evaluation,
//!   subtree statistics, and the query-counting assignment oracle;
//! * [`normalize`]: rewriting into k-x-basic and k-basic form (negations at
//!   leaves, no constants, no like-parented And/Or edges, unforceable
//!   bounded-arity gates);
//! * [`distance`]: an exact oracle for the Hamming distance from satisfying
//!   the formula, plus critical-vertex enumeration;
//! * [`testers`]: three sublinear-query randomized algorithms (a one-sided
//!   tester for bounded-arity formulas, a distance estimator for monotone
//!   ones, and a cheap one-sided tester for And/Or formulas);
//! * [`lowerbound`]: the multi-valued balancing formulas whose satisfaction
//!   needs a near-linear number of queries, with the matching distribution
//!   pair and indistinguishability experiments;
//! * [`harness`]: seeded batch execution with JSON/CSV reports;
//! * [`generate`]: formula and assignment generators used by the harness and
//!   the test suites.

pub mod distance;
pub mod formula;
pub mod frac;
pub mod generate;
pub mod harness;
pub mod lowerbound;
pub mod normalize;
pub mod testers;

pub use formula::{Alphabet, Assignment, CountingOracle, Formula, GateKind, Sym, VertexId};
pub use frac::Frac;
