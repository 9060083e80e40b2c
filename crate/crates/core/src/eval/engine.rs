//! Generate-and-test evaluation.
//!
//! Variables are assigned active-domain values one at a time in order of
//! first occurrence; an atom or comparison is tested as soon as all of its
//! variables are assigned. Values are replaced by their rank in the sorted
//! set of database and query constants, which preserves order and equality.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::ir::{CmpOp, Database, Query, Rel, Term, Var};
use crate::scalar::Scalar;

use super::answer::NestedAnswer;
use super::semiring::Semiring;

#[derive(Clone, Copy)]
enum Slot {
    Var(usize),
    Const(u32),
}

struct Compiled<T> {
    values: Vec<T>,
    vars: Vec<Var>,
    domain: Vec<u32>,
    /// Per atom: relation facts (as ranks) and argument slots.
    atoms: Vec<(Option<HashSet<Vec<u32>>>, Vec<Slot>)>,
    comparisons: Vec<(Slot, CmpOp, Slot)>,
    /// Atoms and comparisons to test once variable `i` is assigned
    /// (index 0 holds the variable-free ones).
    atoms_at: Vec<Vec<usize>>,
    comparisons_at: Vec<Vec<usize>>,
}

impl<T: Scalar> Compiled<T> {
    fn new<A: Clone + PartialEq>(q: &Query<T>, db: &Database<T, A>) -> Self {
        let adom = db.adom();
        let mut all: BTreeSet<T> = adom.clone();
        all.extend(q.constants());
        let values: Vec<T> = all.into_iter().collect();
        let rank: HashMap<&T, u32> = values.iter().enumerate().map(|(i, v)| (v, i as u32)).collect();
        let domain: Vec<u32> = adom.iter().map(|v| rank[v]).collect();
        let vars: Vec<Var> = q.vars_in_order();
        let var_ix: HashMap<&Var, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let slot = |t: &Term<T>| match t {
            Term::Var(v) => Slot::Var(var_ix[v]),
            Term::Const(c) => Slot::Const(rank[c]),
        };
        // 1 + index of the last variable of a term list; 0 when ground.
        let level = |slots: &[Slot]| {
            slots
                .iter()
                .filter_map(|s| match s {
                    Slot::Var(i) => Some(i + 1),
                    Slot::Const(_) => None,
                })
                .max()
                .unwrap_or(0)
        };
        let mut atoms_at = vec![Vec::new(); vars.len() + 1];
        let mut comparisons_at = vec![Vec::new(); vars.len() + 1];
        let mut atoms = Vec::new();
        for a in q.atoms() {
            let facts = db.relation(&a.relation).map(|r| {
                r.keys().map(|args| args.iter().map(|v| rank[v]).collect()).collect::<HashSet<Vec<u32>>>()
            });
            let slots: Vec<Slot> = a.args.iter().map(slot).collect();
            atoms_at[level(&slots)].push(atoms.len());
            atoms.push((facts, slots));
        }
        let mut comparisons = Vec::new();
        for c in q.comparisons() {
            let (l, r) = (slot(&c.lhs), slot(&c.rhs));
            comparisons_at[level(&[l, r])].push(comparisons.len());
            comparisons.push((l, c.op, r));
        }
        Compiled { values, vars, domain, atoms, comparisons, atoms_at, comparisons_at }
    }

    fn get(assign: &[u32], s: Slot) -> u32 {
        match s {
            Slot::Var(i) => assign[i],
            Slot::Const(c) => c,
        }
    }

    fn holds(&self, level: usize, assign: &[u32]) -> bool {
        let atoms_ok = self.atoms_at[level].iter().all(|&i| {
            let (facts, slots) = &self.atoms[i];
            let Some(facts) = facts else { return false };
            let key: Vec<u32> = slots.iter().map(|s| Self::get(assign, *s)).collect();
            facts.contains(&key)
        });
        atoms_ok
            && self.comparisons_at[level].iter().all(|&i| {
                let (l, op, r) = self.comparisons[i];
                op.holds(&Self::get(assign, l), &Self::get(assign, r))
            })
    }

    fn run(&self, assign: &mut Vec<u32>, visit: &mut dyn FnMut(&[u32])) {
        let level = assign.len();
        if level == self.vars.len() {
            visit(assign);
            return;
        }
        for &v in &self.domain {
            assign.push(v);
            if self.holds(level + 1, assign) {
                self.run(assign, visit);
            }
            assign.pop();
        }
    }

    fn for_each(&self, visit: &mut dyn FnMut(&[u32])) {
        if !self.holds(0, &[]) {
            return;
        }
        let mut assign = Vec::with_capacity(self.vars.len());
        self.run(&mut assign, visit);
    }

    fn positions(&self, vs: &[Var]) -> Vec<usize> {
        vs.iter().map(|v| self.vars.iter().position(|u| u == v).expect("output variable")).collect()
    }

    fn tuple(&self, assign: &[u32], pos: &[usize]) -> Vec<T> {
        pos.iter().map(|&i| self.values[assign[i] as usize].clone()).collect()
    }
}

/// Satisfying assignments of the query body, each as a map from variables
/// to values.
pub fn assignments<T: Scalar, A: Clone + PartialEq>(q: &Query<T>, db: &Database<T, A>) -> Vec<BTreeMap<Var, T>> {
    let c = Compiled::new(q, db);
    let mut out = Vec::new();
    c.for_each(&mut |a| {
        out.push(c.vars.iter().cloned().zip(a.iter().map(|&r| c.values[r as usize].clone())).collect());
    });
    out
}

fn require_plain<T: Scalar>(q: &Query<T>) -> Result<()> {
    if q.is_plain() {
        Ok(())
    } else {
        Err(Error::WrongQueryKind { expected: "plain conjunctive" })
    }
}

/// Set semantics: the distinct head tuples of satisfying assignments.
pub fn eval_set<T: Scalar, A: Clone + PartialEq>(q: &Query<T>, db: &Database<T, A>) -> Result<BTreeSet<Vec<T>>> {
    require_plain(q)?;
    let c = Compiled::new(q, db);
    let pos = c.positions(q.disting());
    let mut out = BTreeSet::new();
    c.for_each(&mut |a| {
        out.insert(c.tuple(a, &pos));
    });
    Ok(out)
}

/// Set-bag semantics: each head tuple with its number of satisfying
/// assignments.
pub fn eval_bag<T: Scalar, A: Clone + PartialEq>(q: &Query<T>, db: &Database<T, A>) -> Result<BTreeMap<Vec<T>, u64>> {
    require_plain(q)?;
    let c = Compiled::new(q, db);
    let pos = c.positions(q.disting());
    let mut out = BTreeMap::new();
    c.for_each(&mut |a| {
        *out.entry(c.tuple(a, &pos)).or_insert(0) += 1;
    });
    Ok(out)
}

/// Count-distinct semantics: per group, the number of distinct values of
/// the count variable.
pub fn eval_countd<T: Scalar, A: Clone + PartialEq>(
    q: &Query<T>,
    db: &Database<T, A>,
) -> Result<BTreeMap<Vec<T>, u64>> {
    let y = q.count_var().ok_or(Error::WrongQueryKind { expected: "count-distinct" })?;
    let c = Compiled::new(q, db);
    let pos = c.positions(q.disting());
    let ypos = c.positions(std::slice::from_ref(y))[0];
    let mut seen: BTreeMap<Vec<T>, BTreeSet<u32>> = BTreeMap::new();
    c.for_each(&mut |a| {
        seen.entry(c.tuple(a, &pos)).or_default().insert(a[ypos]);
    });
    Ok(seen.into_iter().map(|(k, s)| (k, s.len() as u64)).collect())
}

/// Nested semantics of an aggregate query: per group, the bag of
/// aggregated value tuples with their multiplicities.
pub fn eval_ga<T: Scalar, A: Clone + PartialEq>(q: &Query<T>, db: &Database<T, A>) -> Result<NestedAnswer<T>> {
    if q.aggregate_vars().is_empty() {
        return Err(Error::WrongQueryKind { expected: "aggregate" });
    }
    let c = Compiled::new(q, db);
    let gpos = c.positions(q.disting());
    let apos = c.positions(q.aggregate_vars());
    let mut out = NestedAnswer::default();
    c.for_each(&mut |a| {
        out.add(c.tuple(a, &gpos), c.tuple(a, &apos), 1);
    });
    Ok(out)
}

/// K-relation semantics: per head tuple, the sum over satisfying
/// assignments of the product of the annotations of the matched facts.
/// Tuples whose value is zero are omitted.
pub fn eval_semiring<T: Scalar, K: Semiring>(
    q: &Query<T>,
    db: &Database<T, K::Elem>,
    k: &K,
) -> Result<BTreeMap<Vec<T>, K::Elem>> {
    require_plain(q)?;
    let c = Compiled::new(q, db);
    let pos = c.positions(q.disting());
    let atoms: Vec<(&Rel, Vec<Slot>)> = q
        .atoms()
        .iter()
        .zip(&c.atoms)
        .map(|(a, (_, slots))| (&a.relation, slots.clone()))
        .collect();
    let mut out: BTreeMap<Vec<T>, K::Elem> = BTreeMap::new();
    c.for_each(&mut |a| {
        let mut prod = k.one();
        for (rel, slots) in &atoms {
            let args: Vec<T> = slots.iter().map(|s| c.values[Compiled::<T>::get(a, *s) as usize].clone()).collect();
            let ann = db.annotation(rel, &args).expect("matched fact exists");
            prod = k.mul(&prod, ann);
        }
        let key = c.tuple(a, &pos);
        let entry = out.entry(key).or_insert_with(|| k.zero());
        *entry = k.add(entry, &prod);
    });
    out.retain(|_, v| !k.is_zero(v));
    Ok(out)
}
