//! Answer values and their canonical text.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::scalar::Scalar;

/// Per group key, the bag of aggregated value tuples.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NestedAnswer<T> {
    pub groups: BTreeMap<Vec<T>, BTreeMap<Vec<T>, u64>>,
}

impl<T: Scalar> Default for NestedAnswer<T> {
    fn default() -> Self {
        NestedAnswer { groups: BTreeMap::new() }
    }
}

impl<T: Scalar> NestedAnswer<T> {
    pub fn add(&mut self, group: Vec<T>, values: Vec<T>, n: u64) {
        *self.groups.entry(group).or_default().entry(values).or_insert(0) += n;
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn group(&self, key: &[T]) -> Option<&BTreeMap<Vec<T>, u64>> {
        self.groups.get(key)
    }
}

impl<T: Scalar> fmt::Display for NestedAnswer<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (g, inner) in &self.groups {
            let parts: Vec<String> = inner.iter().map(|(v, n)| format!("{}:{n}", tuple(v))).collect();
            writeln!(f, "{}: {{{}}}", tuple(g), parts.join(", "))?;
        }
        Ok(())
    }
}

/// `(1, 2/3)`; the empty tuple is `()`.
pub fn tuple<T: Scalar>(t: &[T]) -> String {
    let parts: Vec<String> = t.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

/// One tuple per line, sorted.
pub fn render_set<T: Scalar>(answer: &BTreeSet<Vec<T>>) -> String {
    answer.iter().map(|t| format!("{}\n", tuple(t))).collect()
}

/// One `tuple: value` line per tuple, sorted by tuple.
pub fn render_map<T: Scalar, V: fmt::Display>(answer: &BTreeMap<Vec<T>, V>) -> String {
    answer.iter().map(|(t, v)| format!("{}: {v}\n", tuple(t))).collect()
}
