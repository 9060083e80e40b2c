//! Homomorphisms and isomorphisms between queries.
//!
//! A homomorphism `h: q -> q'` maps variables of `q` to terms of `q'`,
//! fixes constants, sends every atom of `q` onto an atom of `q'`, and sends
//! every comparison of `q` to one entailed by the comparisons of `q'`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::ir::{Atom, Comparison, Query, Rel, Term, Var};
use crate::order::{closure, ComparisonSet, OrderGraph};
use crate::scalar::Scalar;

/// A variable mapping. Constants are implicitly fixed.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VarMap<T>(BTreeMap<Var, Term<T>>);

impl<T: Scalar> Default for VarMap<T> {
    fn default() -> Self {
        VarMap(BTreeMap::new())
    }
}

impl<T: Scalar> VarMap<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, v: Var, t: Term<T>) -> Option<Term<T>> {
        self.0.insert(v, t)
    }

    pub fn get(&self, v: &Var) -> Option<&Term<T>> {
        self.0.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term<T>)> + '_ {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, t: &Term<T>) -> Term<T> {
        match t {
            Term::Var(v) => self.0.get(v).cloned().unwrap_or_else(|| t.clone()),
            c => c.clone(),
        }
    }

    pub fn apply_atom(&self, a: &Atom<T>) -> Atom<T> {
        a.map_terms(|t| self.apply(t))
    }

    pub fn apply_cmp(&self, c: &Comparison<T>) -> Comparison<T> {
        c.map_terms(|t| self.apply(t))
    }

    pub fn as_map(&self) -> &BTreeMap<Var, Term<T>> {
        &self.0
    }
}

impl<T: Scalar> FromIterator<(Var, Term<T>)> for VarMap<T> {
    fn from_iter<I: IntoIterator<Item = (Var, Term<T>)>>(iter: I) -> Self {
        VarMap(iter.into_iter().collect())
    }
}

impl<T: Scalar> fmt::Display for VarMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k} -> {v}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl<T: Scalar> fmt::Debug for VarMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Pins variable `i` of the first head to variable `i` of the second.
/// `None` when the heads have different lengths.
pub fn head_pin<T: Scalar>(from: &[Var], to: &[Var]) -> Option<VarMap<T>> {
    if from.len() != to.len() {
        return None;
    }
    Some(from.iter().zip(to).map(|(a, b)| (a.clone(), Term::Var(b.clone()))).collect())
}

/// Checks the homomorphism conditions for a complete mapping.
pub fn is_homomorphism<T: Scalar>(h: &VarMap<T>, from: &Query<T>, to: &Query<T>) -> bool {
    if from.vars().iter().any(|v| h.get(v).is_none()) {
        return false;
    }
    let g = OrderGraph::new(to.comparisons().iter(), to.terms());
    from.atoms().iter().all(|a| to.atoms().contains(&h.apply_atom(a)))
        && from.comparisons().iter().all(|c| g.entails_cmp(&h.apply_cmp(c)))
}

struct Search<'a, T> {
    steps: Vec<&'a Atom<T>>,
    comparisons_at: Vec<Vec<&'a Comparison<T>>>,
    targets: HashMap<Rel, Vec<&'a Atom<T>>>,
    graph: OrderGraph<T>,
    injective: bool,
}

impl<'a, T: Scalar> Search<'a, T> {
    fn new(from: &'a Query<T>, to: &'a Query<T>, pin: &VarMap<T>, injective: bool) -> Self {
        let mut targets: HashMap<Rel, Vec<&Atom<T>>> = HashMap::new();
        for a in to.atoms() {
            targets.entry(a.relation.clone()).or_default().push(a);
        }
        // Most-constrained-first atom order: prefer atoms whose variables are
        // already bound, then relations with few candidate targets.
        let mut bound: BTreeSet<&Var> = pin.as_map().keys().collect();
        let mut rest: Vec<&Atom<T>> = from.atoms().iter().collect();
        let mut steps = Vec::with_capacity(rest.len());
        while !rest.is_empty() {
            let best = (0..rest.len())
                .min_by_key(|&i| {
                    let a = rest[i];
                    let free = a.vars().filter(|v| !bound.contains(v)).count();
                    let fanout = targets.get(&a.relation).map_or(0, Vec::len);
                    (free > 0 && free == a.vars().count(), fanout, free, i)
                })
                .expect("non-empty");
            let a = rest.remove(best);
            bound.extend(a.vars());
            steps.push(a);
        }
        // Each comparison is checked right after the step binding its last variable.
        let mut comparisons_at = vec![Vec::new(); steps.len() + 1];
        let mut seen: BTreeSet<&Var> = pin.as_map().keys().collect();
        let mut placed: BTreeSet<&Comparison<T>> = BTreeSet::new();
        let ready = |c: &Comparison<T>, seen: &BTreeSet<&Var>| {
            c.terms().iter().all(|t| t.as_var().map_or(true, |v| seen.contains(v)))
        };
        for c in from.comparisons() {
            if ready(c, &seen) {
                comparisons_at[0].push(c);
                placed.insert(c);
            }
        }
        for (i, a) in steps.iter().enumerate() {
            seen.extend(a.vars());
            for c in from.comparisons() {
                if !placed.contains(c) && ready(c, &seen) {
                    comparisons_at[i + 1].push(c);
                    placed.insert(c);
                }
            }
        }
        let graph = OrderGraph::new(to.comparisons().iter(), to.terms());
        Search { steps, comparisons_at, targets, graph, injective }
    }

    fn comparisons_ok(&self, level: usize, h: &VarMap<T>) -> bool {
        self.comparisons_at[level].iter().all(|c| self.graph.entails_cmp(&h.apply_cmp(c)))
    }

    fn run(&self, level: usize, h: &mut VarMap<T>, accept: &mut dyn FnMut(&VarMap<T>) -> bool) -> bool {
        if level == self.steps.len() {
            return accept(h);
        }
        let atom = self.steps[level];
        let Some(cands) = self.targets.get(&atom.relation) else {
            return false;
        };
        for target in cands {
            if target.args.len() != atom.args.len() {
                continue;
            }
            let mut added: Vec<Var> = Vec::new();
            let mut ok = true;
            for (s, t) in atom.args.iter().zip(&target.args) {
                match s {
                    Term::Const(_) => ok = s == t,
                    Term::Var(v) => match h.get(v) {
                        Some(img) => ok = img == t,
                        None => {
                            if self.injective && (t.is_const() || h.iter().any(|(_, u)| u == t)) {
                                ok = false;
                            } else {
                                h.insert(v.clone(), t.clone());
                                added.push(v.clone());
                            }
                        }
                    },
                }
                if !ok {
                    break;
                }
            }
            if ok && self.comparisons_ok(level + 1, h) && self.run(level + 1, h, accept) {
                return true;
            }
            for v in added {
                h.0.remove(&v);
            }
        }
        false
    }
}

fn search<T: Scalar>(
    from: &Query<T>,
    to: &Query<T>,
    pin: &VarMap<T>,
    injective: bool,
    accept: &mut dyn FnMut(&VarMap<T>) -> bool,
) -> Option<VarMap<T>> {
    let s = Search::new(from, to, pin, injective);
    let mut h = pin.clone();
    if !s.comparisons_ok(0, &h) {
        return None;
    }
    let mut found = None;
    let mut wrap = |m: &VarMap<T>| {
        if accept(m) {
            found = Some(m.clone());
            true
        } else {
            false
        }
    };
    s.run(0, &mut h, &mut wrap);
    found
}

/// Finds a homomorphism `from -> to` extending `pin`.
///
/// Search is deterministic; the first mapping found is returned.
pub fn find_homomorphism<T: Scalar>(from: &Query<T>, to: &Query<T>, pin: &VarMap<T>) -> Option<VarMap<T>> {
    search(from, to, pin, false, &mut |_| true)
}

/// Like [`find_homomorphism`] but only accepts mappings that send
/// variables to pairwise distinct variables.
pub fn find_injective_homomorphism<T: Scalar>(
    from: &Query<T>,
    to: &Query<T>,
    pin: &VarMap<T>,
) -> Option<VarMap<T>> {
    let injective_pin = pin.iter().all(|(_, t)| !t.is_const())
        && pin.iter().map(|(_, t)| t).collect::<BTreeSet<_>>().len() == pin.len();
    if !injective_pin {
        return None;
    }
    search(from, to, pin, true, &mut |_| true)
}

/// Finds an isomorphism `a -> b` extending `pin`: a bijection between the
/// variables that maps the atoms of `a` exactly onto those of `b` and the
/// closed comparisons of `a` exactly onto the closed comparisons of `b`.
/// Both queries must have satisfiable comparisons.
pub fn find_isomorphism<T: Scalar>(a: &Query<T>, b: &Query<T>, pin: &VarMap<T>) -> Option<VarMap<T>> {
    if a.vars().len() != b.vars().len() || a.atoms().len() != b.atoms().len() {
        return None;
    }
    if a.constants() != b.constants() {
        return None;
    }
    let ca = closure(&ComparisonSet::from(a.comparisons()), &a.terms()).ok()?;
    let cb = closure(&ComparisonSet::from(b.comparisons()), &b.terms()).ok()?;
    if ca.len() != cb.len() {
        return None;
    }
    let injective_pin = pin.iter().all(|(_, t)| !t.is_const())
        && pin.iter().map(|(_, t)| t).collect::<BTreeSet<_>>().len() == pin.len();
    if !injective_pin {
        return None;
    }
    search(a, b, pin, true, &mut |h| {
        let mapped: ComparisonSet<T> = ca.iter().map(|c| h.apply_cmp(c)).collect();
        mapped == cb
    })
}
