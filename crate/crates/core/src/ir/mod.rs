//! Query and database value model, text syntax and canonical printing.

mod database;
mod parse;
mod query;
mod term;

pub use database::{Database, Fact};
pub use parse::{parse_database, parse_database_with, parse_query};
pub use query::{Aggregate, Query, Schema};
pub use term::{Atom, CmpOp, Comparison, Rel, Term, Var};
