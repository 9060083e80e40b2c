//! Exhaustive and random database generation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ir::{Database, Rel, Schema};
use crate::scalar::{int, Scalar};

/// Largest family [`enumerate_databases`] agrees to produce.
pub const MAX_DATABASES: u128 = 10_000_000;

fn all_tuples<T: Scalar>(arity: usize, max_adom: usize) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (1..=max_adom).map(move |v| {
                    let mut t = t.clone();
                    t.push(int(v as i64));
                    t
                })
            })
            .collect();
    }
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Number of databases in the family, saturating.
pub fn count_databases(schema: &Schema, max_adom: usize, max_facts: usize) -> u128 {
    schema.values().fold(1u128, |acc, &arity| {
        let n = (max_adom as u128).saturating_pow(arity as u32);
        let per: u128 = (0..=max_facts as u128).map(|k| binomial(n, k)).fold(0u128, u128::saturating_add);
        acc.saturating_mul(per)
    })
}

/// Every database over active domain `{1..max_adom}` with at most
/// `max_facts` facts per relation, indexable for parallel consumption.
pub struct DatabaseFamily<T> {
    relations: Vec<(Rel, usize, Vec<Vec<Vec<T>>>)>,
    len: usize,
}

fn subsets<T: Clone>(items: &[T], max: usize) -> Vec<Vec<T>> {
    // by size, then lexicographically by position
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<(Vec<T>, usize)> = vec![(Vec::new(), 0)];
    for _ in 0..max {
        let mut next = Vec::new();
        for (s, from) in &frontier {
            for i in *from..items.len() {
                let mut t = s.clone();
                t.push(items[i].clone());
                out.push(t.clone());
                next.push((t, i + 1));
            }
        }
        frontier = next;
    }
    out
}

impl<T: Scalar> DatabaseFamily<T> {
    pub fn new(schema: &Schema, max_adom: usize, max_facts: usize) -> Result<Self> {
        let total = count_databases(schema, max_adom, max_facts);
        if total > MAX_DATABASES {
            return Err(Error::BoundExceeded { what: "databases", limit: MAX_DATABASES, actual: total });
        }
        let relations = schema
            .iter()
            .map(|(r, &arity)| (r.clone(), arity, subsets(&all_tuples::<T>(arity, max_adom), max_facts)))
            .collect();
        Ok(DatabaseFamily { relations, len: total as usize })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The `i`-th database; the first relation varies slowest.
    pub fn get(&self, mut i: usize) -> Database<T> {
        let mut picks = vec![0; self.relations.len()];
        for (slot, (_, _, choices)) in self.relations.iter().enumerate().rev() {
            picks[slot] = i % choices.len();
            i /= choices.len();
        }
        let mut db = Database::new();
        for ((rel, arity, choices), pick) in self.relations.iter().zip(picks) {
            db.declare(rel, *arity).expect("fresh database");
            for args in &choices[pick] {
                db.insert(rel.name(), args.clone()).expect("arity fixed by schema");
            }
        }
        db
    }

    pub fn iter(&self) -> impl Iterator<Item = Database<T>> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}

/// Every database over the schema within the bounds, in a fixed order.
/// Refuses families larger than [`MAX_DATABASES`].
pub fn enumerate_databases<T: Scalar>(
    schema: &Schema,
    max_adom: usize,
    max_facts: usize,
) -> Result<impl Iterator<Item = Database<T>>> {
    let fam = DatabaseFamily::new(schema, max_adom, max_facts)?;
    Ok((0..fam.len()).map(move |i| fam.get(i)))
}

/// A database drawn from the same family, determined by `seed`.
pub fn random_database<T: Scalar>(schema: &Schema, max_adom: usize, max_facts: usize, seed: u64) -> Database<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut db = Database::new();
    for (rel, &arity) in schema {
        let mut tuples = all_tuples::<T>(arity, max_adom);
        tuples.shuffle(&mut rng);
        let k = rng.gen_range(0..=max_facts.min(tuples.len()));
        for args in tuples.into_iter().take(k) {
            db.insert(rel.name(), args).expect("arity fixed by schema");
        }
    }
    db
}
