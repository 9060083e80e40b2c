//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cdq::flipset::ComparisonDag;
use cdq::ir::{parse_query, Comparison, Database, Schema, Term, Var};
use cdq::morphism::VarMap;
use cdq::order::{entails_oracle, ComparisonSet};
use cdq::{Query, Rational};
use rayon::prelude::*;

pub fn q(s: &str) -> Query {
    parse_query(s).unwrap()
}

pub fn k(n: i64) -> Rational {
    Rational::from_integer(n)
}

/// Checks a mapping by atom membership and oracle entailment.
pub fn valid_hom(h: &VarMap<Rational>, from: &Query, to: &Query) -> bool {
    let target = ComparisonSet::from(to.comparisons());
    from.vars().iter().all(|v| h.get(v).is_some())
        && from.atoms().iter().all(|a| to.atoms().contains(&h.apply_atom(a)))
        && from
            .comparisons()
            .iter()
            .all(|c| entails_oracle(&target, &h.apply_cmp(c)).unwrap())
}

/// Every map from the variables of `from` into the terms of `to`
/// extending `pin`, tested with [`valid_hom`].
pub fn brute_homs(from: &Query, to: &Query, pin: &VarMap<Rational>) -> Vec<VarMap<Rational>> {
    let vars: Vec<Var> = from.vars().into_iter().filter(|v| pin.get(v).is_none()).collect();
    let mut images: BTreeSet<Term<Rational>> = to.terms();
    images.extend(to.vars().into_iter().map(Term::Var));
    let images: Vec<Term<Rational>> = images.into_iter().collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; vars.len()];
    if images.is_empty() && !vars.is_empty() {
        return out;
    }
    loop {
        let mut h = pin.clone();
        for (v, &i) in vars.iter().zip(&idx) {
            h.insert(v.clone(), images[i].clone());
        }
        if valid_hom(&h, from, to) {
            out.push(h);
        }
        let mut pos = 0;
        loop {
            if pos == vars.len() {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < images.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

pub fn identity_pin(q: &Query) -> VarMap<Rational> {
    q.output_vars().into_iter().map(|v| (v.clone(), Term::Var(v))).collect()
}

/// Counts the distinct values of `y` over all assignments of the dag's
/// nodes into `{1..n}`.
pub fn brute_count(dag: &ComparisonDag, y: &Var, n: usize) -> usize {
    let nodes: Vec<&Var> = dag.nodes().iter().collect();
    let yi = nodes.iter().position(|v| *v == y).unwrap();
    let ix: BTreeMap<&Var, usize> = nodes.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut values = BTreeSet::new();
    if n == 0 {
        return 0;
    }
    let m = nodes.len();
    let mut a = vec![1usize; m];
    loop {
        let ok = dag.edges().iter().all(|(hi, lo, w)| {
            let (h, l) = (a[ix[hi]], a[ix[lo]]);
            if *w == 1 {
                h > l
            } else {
                h >= l
            }
        });
        if ok {
            values.insert(a[yi]);
        }
        let mut pos = 0;
        loop {
            if pos == m {
                return values.len();
            }
            a[pos] += 1;
            if a[pos] <= n {
                break;
            }
            a[pos] = 1;
            pos += 1;
        }
    }
}

pub fn union_schema(qs: &[&Query]) -> Schema {
    let mut s = Schema::new();
    for q in qs {
        s.extend(q.schema());
    }
    s
}

pub type FactSets = (String, usize, Vec<Vec<Vec<Rational>>>);

/// Per relation, every fact set over `{1..max_adom}` with at most
/// `max_facts` facts.
pub fn fact_sets(schema: &Schema, max_adom: usize, max_facts: usize) -> Vec<FactSets> {
    schema
        .iter()
        .map(|(rel, &arity)| {
            let n = max_adom.pow(arity as u32);
            let tuples: Vec<Vec<Rational>> = (0..n)
                .map(|mut c| {
                    let mut t = vec![k(0); arity];
                    for slot in t.iter_mut().rev() {
                        *slot = k((c % max_adom) as i64 + 1);
                        c /= max_adom;
                    }
                    t
                })
                .collect();
            let mut sets = Vec::new();
            for mask in 0u64..(1 << n) {
                if mask.count_ones() as usize <= max_facts {
                    sets.push((0..n).filter(|i| mask >> i & 1 == 1).map(|i| tuples[i].clone()).collect());
                }
            }
            (rel.name().to_string(), arity, sets)
        })
        .collect()
}

pub fn family_size(sets: &[FactSets]) -> usize {
    sets.iter().map(|(_, _, s)| s.len()).product()
}

pub fn family_member(sets: &[FactSets], mut i: usize) -> Database<Rational> {
    let mut db = Database::new();
    for (rel, arity, choices) in sets.iter().rev() {
        db.declare(&cdq::Rel::new(rel), *arity).unwrap();
        for t in &choices[i % choices.len()] {
            db.insert(rel, t.clone()).unwrap();
        }
        i /= choices.len();
    }
    db
}

/// The first database of the family on which `differ` holds. Enumerates
/// independently of the library's generator and without its size guard.
pub fn first_difference(
    schema: &Schema,
    max_adom: usize,
    max_facts: usize,
    differ: impl Fn(&Database<Rational>) -> bool + Sync,
) -> Option<Database<Rational>> {
    let sets = fact_sets(schema, max_adom, max_facts);
    (0..family_size(&sets)).into_par_iter().find_map_first(|i| {
        let db = family_member(&sets, i);
        differ(&db).then_some(db)
    })
}

/// All equality-free comparisons between two distinct terms.
pub fn all_comparisons(terms: &[Term<Rational>]) -> Vec<Comparison<Rational>> {
    let mut out = Vec::new();
    for a in terms {
        for b in terms {
            if a != b {
                out.push(Comparison::lt(a.clone(), b.clone()));
                out.push(Comparison::le(a.clone(), b.clone()));
            }
        }
    }
    out
}

/// Every dag over `y` plus up to `extra` further nodes, with at most one
/// relationship per pair of nodes: none, strict or non-strict either way,
/// or forced equal. Inconsistent ones are skipped.
pub fn all_dags(extra: usize) -> Vec<ComparisonDag> {
    let names = ["y", "a", "b", "c", "d"];
    let mut out = Vec::new();
    for size in 1..=extra + 1 {
        let nodes: Vec<Var> = names[..size].iter().map(|n| Var::new(n)).collect();
        let pairs: Vec<(usize, usize)> = (0..size).flat_map(|i| (i + 1..size).map(move |j| (i, j))).collect();
        let total = 6usize.pow(pairs.len() as u32);
        for code in 0..total {
            let mut c = code;
            let mut edges = Vec::new();
            for &(i, j) in &pairs {
                let (a, b) = (nodes[i].clone(), nodes[j].clone());
                match c % 6 {
                    1 => edges.push((a, b, 1)),
                    2 => edges.push((a, b, 0)),
                    3 => edges.push((b, a, 1)),
                    4 => edges.push((b, a, 0)),
                    5 => {
                        edges.push((a.clone(), b.clone(), 0));
                        edges.push((b, a, 0));
                    }
                    _ => {}
                }
                c /= 6;
            }
            let dag = ComparisonDag::new(nodes.clone(), edges).unwrap();
            if dag.is_consistent() {
                out.push(dag);
            }
        }
    }
    out
}

/// Distinct values of `y` for every domain size `0..=max_n`, from a single
/// pass over assignments into `{1..max_n}`.
pub fn brute_counts(dag: &ComparisonDag, y: &Var, max_n: usize) -> Vec<usize> {
    let nodes: Vec<&Var> = dag.nodes().iter().collect();
    let yi = nodes.iter().position(|v| *v == y).unwrap();
    let ix: BTreeMap<&Var, usize> = nodes.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let edges: Vec<(usize, usize, u8)> = dag.edges().iter().map(|(h, l, w)| (ix[h], ix[l], *w)).collect();
    let m = nodes.len();
    let mut seen: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); max_n + 1];
    let mut a = vec![1usize; m];
    if max_n == 0 {
        return vec![0];
    }
    loop {
        if edges.iter().all(|&(h, l, w)| if w == 1 { a[h] > a[l] } else { a[h] >= a[l] }) {
            let top = *a.iter().max().unwrap();
            for n in top..=max_n {
                seen[n].insert(a[yi]);
            }
        }
        let mut pos = 0;
        loop {
            if pos == m {
                return seen.iter().map(BTreeSet::len).collect();
            }
            a[pos] += 1;
            if a[pos] <= max_n {
                break;
            }
            a[pos] = 1;
            pos += 1;
        }
    }
}

/// Every total map from the query's variables into the active domain that
/// satisfies the body, paired with the matched fact annotations in atom
/// order. Plain nested loops, no pruning.
pub fn naive_matches<A: Clone + PartialEq>(q: &Query, db: &Database<Rational, A>) -> Vec<(BTreeMap<Var, Rational>, Vec<A>)> {
    let vars: Vec<Var> = q.vars().into_iter().collect();
    let adom: Vec<Rational> = db.adom().into_iter().collect();
    let mut out = Vec::new();
    if adom.is_empty() && !vars.is_empty() {
        return out;
    }
    let value = |a: &BTreeMap<Var, Rational>, t: &Term<Rational>| match t {
        Term::Var(v) => a[v],
        Term::Const(c) => *c,
    };
    let mut idx = vec![0usize; vars.len()];
    loop {
        let a: BTreeMap<Var, Rational> = vars.iter().cloned().zip(idx.iter().map(|&i| adom[i])).collect();
        let anns: Option<Vec<A>> = q
            .atoms()
            .iter()
            .map(|at| db.annotation(&at.relation, &at.args.iter().map(|t| value(&a, t)).collect::<Vec<_>>()).cloned())
            .collect();
        let cmp_ok = q.comparisons().iter().all(|c| c.op.holds(&value(&a, &c.lhs), &value(&a, &c.rhs)));
        if let (Some(anns), true) = (anns, cmp_ok) {
            out.push((a, anns));
        }
        let mut pos = 0;
        loop {
            if pos == vars.len() {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < adom.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

pub fn project(a: &BTreeMap<Var, Rational>, vars: &[Var]) -> Vec<Rational> {
    vars.iter().map(|v| a[v]).collect()
}
