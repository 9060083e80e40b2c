use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::query::{merge_arity, Schema};
use super::term::Rel;
use crate::error::Result;
use crate::eval::semiring::{Natural, Semiring};
use crate::scalar::Scalar;

/// A ground fact with its annotation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Fact<T, A = u64> {
    pub relation: Rel,
    pub args: Vec<T>,
    pub annotation: A,
}

/// A finite set of annotated facts over rational constants.
///
/// Facts are unique per `(relation, args)`; inserting a duplicate adds
/// the annotations, and a zero annotation removes the fact.
#[derive(Clone, PartialEq, Eq)]
pub struct Database<T, A = u64> {
    relations: BTreeMap<Rel, BTreeMap<Vec<T>, A>>,
    schema: Schema,
}

impl<T: Scalar, A: Clone + PartialEq> Default for Database<T, A> {
    fn default() -> Self {
        Database { relations: BTreeMap::new(), schema: Schema::new() }
    }
}

impl<T: Scalar, A: Clone + PartialEq> Database<T, A> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a relation without facts, fixing its arity.
    pub fn declare(&mut self, relation: &Rel, arity: usize) -> Result<()> {
        merge_arity(&mut self.schema, relation, arity)
    }

    /// Adds a fact, merging duplicates with the semiring's addition.
    pub fn add_fact<K: Semiring<Elem = A>>(
        &mut self,
        k: &K,
        relation: &str,
        args: Vec<T>,
        annotation: A,
    ) -> Result<()> {
        let rel = Rel::new(relation);
        merge_arity(&mut self.schema, &rel, args.len())?;
        let table = self.relations.entry(rel).or_default();
        let merged = match table.remove(&args) {
            Some(prev) => k.add(&prev, &annotation),
            None => annotation,
        };
        if !k.is_zero(&merged) {
            table.insert(args, merged);
        }
        Ok(())
    }

    pub fn annotation(&self, relation: &Rel, args: &[T]) -> Option<&A> {
        self.relations.get(relation)?.get(args)
    }

    pub fn contains(&self, relation: &Rel, args: &[T]) -> bool {
        self.annotation(relation, args).is_some()
    }

    pub fn relation(&self, relation: &Rel) -> Option<&BTreeMap<Vec<T>, A>> {
        self.relations.get(relation)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn facts(&self) -> impl Iterator<Item = Fact<T, A>> + '_ {
        self.relations.iter().flat_map(|(rel, table)| {
            table.iter().map(move |(args, a)| Fact {
                relation: rel.clone(),
                args: args.clone(),
                annotation: a.clone(),
            })
        })
    }

    pub fn len(&self) -> usize {
        self.relations.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Active domain: every constant occurring in some fact.
    pub fn adom(&self) -> BTreeSet<T> {
        self.relations
            .values()
            .flat_map(|t| t.keys().flat_map(|args| args.iter().cloned()))
            .collect()
    }

    pub fn map_annotations<B: Clone + PartialEq>(&self, f: impl Fn(&A) -> B) -> Database<T, B> {
        Database {
            relations: self
                .relations
                .iter()
                .map(|(r, t)| (r.clone(), t.iter().map(|(k, a)| (k.clone(), f(a))).collect()))
                .collect(),
            schema: self.schema.clone(),
        }
    }

    /// Database without the given fact.
    pub fn without(&self, relation: &Rel, args: &[T]) -> Self {
        let mut out = self.clone();
        if let Some(t) = out.relations.get_mut(relation) {
            t.remove(args);
        }
        out
    }

    /// Canonical text, one fact per line; annotations equal to `one` are omitted.
    pub fn render<K: Semiring<Elem = A>>(&self, k: &K) -> String
    where
        A: fmt::Display,
    {
        let one = k.one();
        let mut out = String::new();
        for f in self.facts() {
            let args: Vec<String> = f.args.iter().map(ToString::to_string).collect();
            out.push_str(&format!("{}({})", f.relation, args.join(", ")));
            if f.annotation != one {
                out.push_str(&format!(" @ {}", f.annotation));
            }
            out.push_str(".\n");
        }
        out
    }
}

impl<T: Scalar> Database<T, u64> {
    /// Adds a fact with annotation 1.
    pub fn insert(&mut self, relation: &str, args: Vec<T>) -> Result<()> {
        self.add_fact(&Natural, relation, args, 1)
    }

    pub fn from_facts<'a>(facts: impl IntoIterator<Item = (&'a str, Vec<T>)>) -> Result<Self> {
        let mut db = Self::new();
        for (r, args) in facts {
            db.insert(r, args)?;
        }
        Ok(db)
    }
}

impl<T: Scalar> fmt::Display for Database<T, u64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&Natural))
    }
}

impl<T: Scalar, A: Clone + PartialEq + fmt::Display> fmt::Debug for Database<T, A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let facts: Vec<String> = self
            .facts()
            .map(|x| {
                let args: Vec<String> = x.args.iter().map(ToString::to_string).collect();
                format!("{}({})@{}", x.relation, args.join(","), x.annotation)
            })
            .collect();
        write!(f, "{{{}}}", facts.join(", "))
    }
}
