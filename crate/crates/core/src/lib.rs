//! Equivalence of count-distinct conjunctive queries with order comparisons.
//!
//! Everything is generic over an exact ordered field ([`Scalar`]). The
//! aliases at the crate root fix it to 64-bit rationals, which is what the
//! command-line tool uses; `Big*` aliases use arbitrary precision.

pub mod cores;
pub mod decision;
pub mod error;
pub mod eval;
pub mod flipset;
pub mod fuzz;
pub mod gen;
pub mod ir;
pub mod morphism;
pub mod order;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Rational = num_rational::Rational64;
pub type BigRational = num_rational::BigRational;

pub type Query = ir::Query<Rational>;
pub type Term = ir::Term<Rational>;
pub type Atom = ir::Atom<Rational>;
pub type Comparison = ir::Comparison<Rational>;
pub type Database = ir::Database<Rational>;
pub type ComparisonSet = order::ComparisonSet<Rational>;

pub type BigQuery = ir::Query<BigRational>;
pub type BigDatabase = ir::Database<BigRational>;

pub use ir::{Aggregate, CmpOp, Rel, Var};
