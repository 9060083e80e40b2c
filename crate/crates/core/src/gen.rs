//! Random queries and query pairs for differential testing.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cores::compute_core;
use crate::flipset::flip;
use crate::ir::{Aggregate, Atom, CmpOp, Comparison, Query, Term, Var};
use crate::order::{is_satisfiable, ComparisonSet};
use crate::scalar::{int, Scalar};

/// What kind of head to generate.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Shape {
    Plain,
    CountDistinct,
    General,
}

/// Bounds for [`random_query`].
#[derive(Clone, Debug)]
pub struct GenConfig {
    pub relations: Vec<(String, usize)>,
    pub max_atoms: usize,
    pub max_vars: usize,
    pub max_comparisons: usize,
    pub max_disting: usize,
    /// Chance that a comparison has a constant side.
    pub constant_prob: f64,
    pub constants: Vec<i64>,
    /// Chance of adding a self-join atom next to the count variable's atom.
    pub self_join_prob: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            relations: vec![("R".into(), 2), ("A".into(), 1), ("B".into(), 1)],
            max_atoms: 4,
            max_vars: 5,
            max_comparisons: 3,
            max_disting: 1,
            constant_prob: 0.1,
            constants: vec![2],
            self_join_prob: 0.5,
        }
    }
}

const NAMES: [&str; 10] = ["z", "w", "u", "v", "s", "t", "p", "r", "m", "n"];

fn pool(n: usize) -> Vec<Var> {
    (0..n).map(|i| Var::new(&format!("v{i}"))).collect()
}

fn random_atoms<R: Rng>(rng: &mut R, cfg: &GenConfig, vars: &[Var]) -> Vec<(String, Vec<Var>)> {
    let n = rng.gen_range(1..=cfg.max_atoms.max(1));
    let mut used = 1usize;
    let mut atoms = Vec::new();
    for _ in 0..n {
        let (rel, arity) = cfg.relations.choose(rng).expect("relations").clone();
        let args: Vec<Var> = (0..arity)
            .map(|_| {
                // prefer reusing variables, occasionally open a fresh one
                let i = if used < vars.len() && rng.gen_bool(0.4) {
                    used += 1;
                    used - 1
                } else {
                    rng.gen_range(0..used)
                };
                vars[i].clone()
            })
            .collect();
        atoms.push((rel, args));
    }
    atoms
}

/// A random satisfiable, equality-free query of the given shape.
pub fn random_query<T: Scalar, R: Rng>(rng: &mut R, cfg: &GenConfig, shape: Shape) -> Query<T> {
    loop {
        if let Some(q) = try_random_query(rng, cfg, shape) {
            return q;
        }
    }
}

fn try_random_query<T: Scalar, R: Rng>(rng: &mut R, cfg: &GenConfig, shape: Shape) -> Option<Query<T>> {
    let vars = pool(cfg.max_vars.max(1));
    let mut atoms = random_atoms(rng, cfg, &vars);
    let in_atoms: Vec<Var> = atoms.iter().flat_map(|(_, a)| a.iter().cloned()).collect::<BTreeSet<_>>().into_iter().collect();
    let mut shuffled = in_atoms.clone();
    shuffled.shuffle(rng);
    let aggregated = if shape == Shape::Plain { None } else { shuffled.pop() };
    let k = rng.gen_range(0..=cfg.max_disting.min(shuffled.len()));
    let head: Vec<Var> = shuffled[..k].to_vec();
    if let Some(y) = &aggregated {
        let fresh: Vec<&Var> = vars.iter().filter(|v| !in_atoms.contains(v)).collect();
        if let (Some(z), true) = (fresh.first(), atoms.len() < cfg.max_atoms && rng.gen_bool(cfg.self_join_prob)) {
            let (rel, args) = atoms.iter().find(|(_, a)| a.contains(y)).expect("aggregate var occurs").clone();
            let copy: Vec<Var> = args.iter().map(|v| if v == y { (*z).clone() } else { v.clone() }).collect();
            atoms.push((rel, copy));
        }
    }
    let body_vars: Vec<Var> = atoms.iter().flat_map(|(_, a)| a.iter().cloned()).collect::<BTreeSet<_>>().into_iter().collect();
    let mut comps = Vec::new();
    if body_vars.len() > 1 || !cfg.constants.is_empty() {
        for _ in 0..rng.gen_range(0..=cfg.max_comparisons) {
            let a = Term::Var(body_vars.choose(rng)?.clone());
            let b = if rng.gen_bool(cfg.constant_prob) && !cfg.constants.is_empty() {
                Term::Const(int::<T>(*cfg.constants.choose(rng)?))
            } else {
                Term::Var(body_vars.choose(rng)?.clone())
            };
            if a == b {
                continue;
            }
            let op = if rng.gen_bool(0.7) { CmpOp::Lt } else { CmpOp::Le };
            let (l, r) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
            comps.push(Comparison::new(l, op, r));
        }
    }
    if !is_satisfiable(&comps.iter().cloned().collect::<ComparisonSet<T>>()) {
        return None;
    }
    let aggregate = match (shape, &aggregated) {
        (Shape::CountDistinct, Some(y)) => Aggregate::CountDistinct(y.clone()),
        (Shape::General, Some(y)) => Aggregate::General { func: "sum".into(), vars: vec![y.clone()] },
        _ => Aggregate::None,
    };
    let atoms: Vec<Atom<T>> =
        atoms.into_iter().map(|(r, a)| Atom::new(&r, a.into_iter().map(Term::Var).collect())).collect();
    let q = Query::new("q", head, aggregate, atoms, comps).ok()?;
    Some(readable_names(&q))
}

/// Renames variables to `x`, `x2`, ... for group-by, `y` for the
/// aggregated variable and short letters for the rest.
pub fn readable_names<T: Scalar>(q: &Query<T>) -> Query<T> {
    let mut map: HashMap<Var, Var> = HashMap::new();
    for (i, v) in q.disting().iter().enumerate() {
        let name = if i == 0 { "x".to_string() } else { format!("x{}", i + 1) };
        map.insert(v.clone(), Var::new(&name));
    }
    for (i, v) in q.aggregate_vars().iter().enumerate() {
        let name = if i == 0 { "y".to_string() } else { format!("y{}", i + 1) };
        map.insert(v.clone(), Var::new(&name));
    }
    let mut next = 0;
    for v in q.vars_in_order() {
        if !map.contains_key(&v) {
            let name = NAMES.get(next).map_or_else(|| format!("z{next}"), |s| s.to_string());
            map.insert(v, Var::new(&name));
            next += 1;
        }
    }
    q.rename(&map)
}

/// Renames every variable by appending a suffix.
pub fn alpha_rename<T: Scalar>(q: &Query<T>, suffix: &str) -> Query<T> {
    let map: HashMap<Var, Var> = q.vars().into_iter().map(|v| (v.clone(), Var::new(&format!("{v}{suffix}")))).collect();
    q.rename(&map)
}

/// How the second query of a pair was obtained.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PairKind {
    Identical,
    Renamed,
    CoreReduced,
    Flipped,
    /// An extra atom over a relation absent from the first query, holding
    /// the count variable: the two disagree on any database satisfying the
    /// first query with that relation empty.
    FreshRelation,
    Independent,
    Mutated,
}

/// A query pair with its provenance.
#[derive(Clone)]
pub struct QueryPair<T> {
    pub left: Query<T>,
    pub right: Query<T>,
    pub kind: PairKind,
}

fn fresh_relation_variant<T: Scalar>(q: &Query<T>) -> Query<T> {
    let y = q.count_var().expect("count-distinct").clone();
    let mut atoms = q.atoms().clone();
    atoms.insert(Atom::new("Fresh", vec![Term::Var(y)]));
    q.with_atoms(atoms)
}

/// Small edits that may or may not preserve equivalence.
pub fn mutate<T: Scalar, R: Rng>(rng: &mut R, q: &Query<T>) -> Query<T> {
    let comps: Vec<Comparison<T>> = q.comparisons().iter().cloned().collect();
    for _ in 0..8 {
        let candidate = match rng.gen_range(0..4) {
            0 if !comps.is_empty() => {
                let i = rng.gen_range(0..comps.len());
                let mut cs: BTreeSet<_> = q.comparisons().clone();
                cs.remove(&comps[i]);
                cs.insert(comps[i].reversed());
                q.with_comparisons(cs)
            }
            1 if !comps.is_empty() => {
                let i = rng.gen_range(0..comps.len());
                let mut cs: BTreeSet<_> = q.comparisons().clone();
                cs.remove(&comps[i]);
                let c = &comps[i];
                let op = if c.op == CmpOp::Lt { CmpOp::Le } else { CmpOp::Lt };
                cs.insert(Comparison::new(c.lhs.clone(), op, c.rhs.clone()));
                q.with_comparisons(cs)
            }
            2 if !comps.is_empty() => {
                let mut cs: BTreeSet<_> = q.comparisons().clone();
                cs.remove(&comps[rng.gen_range(0..comps.len())]);
                q.with_comparisons(cs)
            }
            _ => {
                let vars: Vec<Var> = q.atom_vars().into_iter().collect();
                let a = vars.choose(rng).expect("vars").clone();
                let b = vars.choose(rng).expect("vars").clone();
                if a == b {
                    continue;
                }
                let mut cs: BTreeSet<_> = q.comparisons().clone();
                cs.insert(Comparison::lt(Term::Var(a), Term::Var(b)));
                q.with_comparisons(cs)
            }
        };
        if is_satisfiable(&ComparisonSet::from(candidate.comparisons())) && candidate != *q {
            return candidate;
        }
    }
    q.clone()
}

/// Random count-distinct pairs: mostly mutations of one query, some
/// independent draws. Every query is also paired with its core and flip.
pub fn random_pairs<T: Scalar>(cfg: &GenConfig, n: usize, seed: u64) -> Vec<QueryPair<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let q: Query<T> = random_query(&mut rng, cfg, Shape::CountDistinct);
        let (right, kind) = if rng.gen_bool(0.25) {
            let mut cfg2 = cfg.clone();
            cfg2.max_disting = q.disting().len();
            let mut r: Query<T> = random_query(&mut rng, &cfg2, Shape::CountDistinct);
            while r.disting().len() != q.disting().len() {
                r = random_query(&mut rng, &cfg2, Shape::CountDistinct);
            }
            (r, PairKind::Independent)
        } else {
            (mutate(&mut rng, &q), PairKind::Mutated)
        };
        out.push(QueryPair { left: q.clone(), right, kind });
        if out.len() < n {
            let c = compute_core(&q).expect("generated queries are satisfiable");
            out.push(QueryPair { left: q.clone(), right: c, kind: PairKind::CoreReduced });
        }
        if out.len() < n {
            let f = flip(&q).expect("generated queries are count-distinct");
            out.push(QueryPair { left: q, right: f, kind: PairKind::Flipped });
        }
    }
    out
}

/// A fixed corpus of count-distinct pairs whose status is known by
/// construction: the opposite-order pair, identical queries, renamings,
/// core reductions and flips (all equivalent), and fresh-relation
/// extensions (inequivalent).
pub fn decision_corpus<T: Scalar>(cfg: &GenConfig, n: usize, seed: u64) -> Vec<QueryPair<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lt = crate::ir::parse_query::<T>("q(x, countd(y)) :- R(x, y), R(x, z), y < z.").expect("valid");
    let gt = crate::ir::parse_query::<T>("q(x, countd(y)) :- R(x, y), R(x, z), z < y.").expect("valid");
    let mut out = vec![QueryPair { left: lt, right: gt, kind: PairKind::Flipped }];
    let kinds = [
        PairKind::Identical,
        PairKind::Renamed,
        PairKind::CoreReduced,
        PairKind::Flipped,
        PairKind::FreshRelation,
    ];
    let mut i = 0;
    while out.len() < n {
        let q: Query<T> = random_query(&mut rng, cfg, Shape::CountDistinct);
        let kind = kinds[i % kinds.len()];
        i += 1;
        let right = match kind {
            PairKind::Identical => q.clone(),
            PairKind::Renamed => alpha_rename(&q, "_r"),
            PairKind::CoreReduced => compute_core(&q).expect("satisfiable"),
            PairKind::Flipped => flip(&q).expect("count-distinct"),
            _ => fresh_relation_variant(&q),
        };
        out.push(QueryPair { left: q, right, kind });
    }
    out
}
