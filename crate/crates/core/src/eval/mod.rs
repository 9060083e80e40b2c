//! Brute-force evaluation and database generation.

pub mod answer;
pub mod databases;
pub mod engine;
pub mod semiring;

pub use answer::{render_map, render_set, tuple, NestedAnswer};
pub use databases::{count_databases, enumerate_databases, random_database, DatabaseFamily, MAX_DATABASES};
pub use engine::{assignments, eval_bag, eval_countd, eval_ga, eval_semiring, eval_set};
pub use semiring::{Boolean, Natural, Semiring};
