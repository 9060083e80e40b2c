//! Order constraints over a dense ordered domain.
//!
//! A comparison set is read as a weighted digraph: `r < s` is an edge
//! `s -> r` of weight 1 and `r <= s` an edge `s -> r` of weight 0, so edges
//! point from the greater term to the lesser one. Constants are linked by
//! strict edges following their numeric order. The set is satisfiable iff
//! the graph has no cycle of positive weight, `m <= n` is entailed iff `n`
//! reaches `m`, and `m < n` is entailed iff some such path carries a strict
//! edge.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::ir::{CmpOp, Comparison, Query, Term, Var};
use crate::scalar::{int, Scalar};

/// A set of comparisons.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ComparisonSet<T>(BTreeSet<Comparison<T>>);

impl<T: Scalar> Default for ComparisonSet<T> {
    fn default() -> Self {
        ComparisonSet(BTreeSet::new())
    }
}

impl<T: Scalar> ComparisonSet<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, c: Comparison<T>) -> bool {
        self.0.insert(c)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Comparison<T>> + '_ {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: &Comparison<T>) -> bool {
        self.0.contains(c)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn terms(&self) -> BTreeSet<Term<T>> {
        self.0.iter().flat_map(|c| [c.lhs.clone(), c.rhs.clone()]).collect()
    }

    pub fn as_set(&self) -> &BTreeSet<Comparison<T>> {
        &self.0
    }

    pub fn into_set(self) -> BTreeSet<Comparison<T>> {
        self.0
    }

    pub fn has_equalities(&self) -> bool {
        self.0.iter().any(|c| c.op == CmpOp::Eq)
    }

    /// Keeps comparisons whose terms all satisfy `keep`.
    pub fn restrict(&self, keep: impl Fn(&Term<T>) -> bool) -> Self {
        ComparisonSet(self.0.iter().filter(|c| keep(&c.lhs) && keep(&c.rhs)).cloned().collect())
    }
}

impl<T: Scalar> fmt::Debug for ComparisonSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl<T: Scalar> fmt::Display for ComparisonSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl<T: Scalar> FromIterator<Comparison<T>> for ComparisonSet<T> {
    fn from_iter<I: IntoIterator<Item = Comparison<T>>>(iter: I) -> Self {
        ComparisonSet(iter.into_iter().collect())
    }
}

impl<'a, T: Scalar> From<&'a BTreeSet<Comparison<T>>> for ComparisonSet<T> {
    fn from(s: &'a BTreeSet<Comparison<T>>) -> Self {
        ComparisonSet(s.clone())
    }
}

impl<T: Scalar> From<BTreeSet<Comparison<T>>> for ComparisonSet<T> {
    fn from(s: BTreeSet<Comparison<T>>) -> Self {
        ComparisonSet(s)
    }
}

const NONE: i8 = -1;

/// All-pairs strongest-relation table over a fixed set of terms.
///
/// `rel(a, b)` is -1 when `a >= b` is not derivable, 0 when only `a >= b`
/// is, and 1 when `a > b` is.
#[derive(Clone)]
pub struct OrderGraph<T> {
    terms: Vec<Term<T>>,
    index: HashMap<Term<T>, usize>,
    dist: Vec<Vec<i8>>,
    satisfiable: bool,
}

impl<T: Scalar> OrderGraph<T> {
    /// Builds the table for `comparisons` over their own terms plus `extra`.
    /// `=` is read as two non-strict edges.
    pub fn new<'a>(
        comparisons: impl IntoIterator<Item = &'a Comparison<T>>,
        extra: impl IntoIterator<Item = Term<T>>,
    ) -> Self {
        let comparisons: Vec<&Comparison<T>> = comparisons.into_iter().collect();
        let mut all: BTreeSet<Term<T>> = extra.into_iter().collect();
        for c in &comparisons {
            all.insert(c.lhs.clone());
            all.insert(c.rhs.clone());
        }
        let terms: Vec<Term<T>> = all.into_iter().collect();
        let index: HashMap<Term<T>, usize> =
            terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let n = terms.len();
        let mut dist = vec![vec![NONE; n]; n];
        for (i, row) in dist.iter_mut().enumerate() {
            row[i] = 0;
        }
        let edge = |from: usize, to: usize, w: i8, dist: &mut Vec<Vec<i8>>| {
            if dist[from][to] < w {
                dist[from][to] = w;
            }
        };
        for c in &comparisons {
            let (l, r) = (index[&c.lhs], index[&c.rhs]);
            match c.op {
                CmpOp::Lt => edge(r, l, 1, &mut dist),
                CmpOp::Le => edge(r, l, 0, &mut dist),
                CmpOp::Eq => {
                    edge(r, l, 0, &mut dist);
                    edge(l, r, 0, &mut dist);
                }
            }
        }
        // Constants sort first in term order, so this prefix is sorted by value.
        let consts: Vec<usize> = (0..n).filter(|&i| terms[i].is_const()).collect();
        for (a, &i) in consts.iter().enumerate() {
            for &j in &consts[a + 1..] {
                edge(j, i, 1, &mut dist);
            }
        }
        for k in 0..n {
            for i in 0..n {
                let ik = dist[i][k];
                if ik == NONE {
                    continue;
                }
                for j in 0..n {
                    let kj = dist[k][j];
                    if kj == NONE {
                        continue;
                    }
                    let cand = (ik + kj).min(1);
                    if cand > dist[i][j] {
                        dist[i][j] = cand;
                    }
                }
            }
        }
        let satisfiable = (0..n).all(|i| dist[i][i] == 0);
        OrderGraph { terms, index, dist, satisfiable }
    }

    pub fn is_satisfiable(&self) -> bool {
        self.satisfiable
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn contains(&self, t: &Term<T>) -> bool {
        self.index.contains_key(t)
    }

    fn idx(&self, t: &Term<T>) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// Strength of `a >= b`: -1 none, 0 non-strict, 1 strict. Terms outside
    /// the graph are unrelated to everything but themselves.
    pub fn rel(&self, a: &Term<T>, b: &Term<T>) -> i8 {
        if a == b {
            return 0;
        }
        match (self.idx(a), self.idx(b)) {
            (Some(i), Some(j)) => self.dist[i][j],
            _ => match (a.as_const(), b.as_const()) {
                (Some(x), Some(y)) if x > y => 1,
                _ => NONE,
            },
        }
    }

    /// Whether every linearization satisfies `lhs op rhs`. Vacuously true
    /// when the set is unsatisfiable.
    pub fn entails(&self, lhs: &Term<T>, op: CmpOp, rhs: &Term<T>) -> bool {
        if !self.satisfiable {
            return true;
        }
        match op {
            CmpOp::Lt => self.rel(rhs, lhs) >= 1,
            CmpOp::Le => self.rel(rhs, lhs) >= 0,
            CmpOp::Eq => self.rel(rhs, lhs) >= 0 && self.rel(lhs, rhs) >= 0,
        }
    }

    pub fn entails_cmp(&self, c: &Comparison<T>) -> bool {
        self.entails(&c.lhs, c.op, &c.rhs)
    }

    /// Strongest entailed comparison between every ordered pair of the
    /// given terms, skipping reflexive and constant-constant pairs.
    pub fn closure_over(&self, terms: &BTreeSet<Term<T>>) -> ComparisonSet<T> {
        let mut out = ComparisonSet::new();
        for r in terms {
            for s in terms {
                if r == s || (r.is_const() && s.is_const()) {
                    continue;
                }
                match self.rel(s, r) {
                    1 => out.insert(Comparison::lt(r.clone(), s.clone())),
                    0 => out.insert(Comparison::le(r.clone(), s.clone())),
                    _ => false,
                };
            }
        }
        out
    }

    /// A satisfying assignment, if one exists.
    pub fn linearization(&self) -> Option<Linearization<T>> {
        if !self.satisfiable {
            return None;
        }
        let n = self.terms.len();
        // Classes of terms forced equal (mutually reachable).
        let mut class = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            if class[i] != usize::MAX {
                continue;
            }
            let members: Vec<usize> =
                (0..n).filter(|&j| self.dist[i][j] >= 0 && self.dist[j][i] >= 0).collect();
            for &j in &members {
                class[j] = classes.len();
            }
            classes.push(members);
        }
        // Order classes bottom-up: a class goes after every class it dominates.
        let k = classes.len();
        let below = |a: usize, b: usize| self.dist[classes[a][0]][classes[b][0]] >= 0;
        let mut placed = vec![false; k];
        let mut order = Vec::with_capacity(k);
        while order.len() < k {
            let next = (0..k)
                .find(|&a| !placed[a] && (0..k).all(|b| b == a || placed[b] || !below(a, b)))
                .expect("acyclic after contracting equal classes");
            placed[next] = true;
            order.push(next);
        }
        let fixed: Vec<Option<T>> = order
            .iter()
            .map(|&c| classes[c].iter().find_map(|&i| self.terms[i].as_const().cloned()))
            .collect();
        let mut values: Vec<T> = vec![T::zero(); k];
        let mut pos = 0;
        let mut prev: Option<T> = None;
        while pos < k {
            if let Some(v) = &fixed[pos] {
                values[pos] = v.clone();
                prev = Some(v.clone());
                pos += 1;
                continue;
            }
            let end = (pos..k).find(|&p| fixed[p].is_some()).unwrap_or(k);
            let next = if end < k { fixed[end].clone() } else { None };
            let count = end - pos;
            for (step, slot) in (pos..end).enumerate() {
                let j: T = int(step as i64 + 1);
                values[slot] = match (&prev, &next) {
                    (None, None) => j,
                    (Some(lo), None) => lo.clone() + j,
                    (None, Some(hi)) => hi.clone() - int::<T>(count as i64) - T::one() + j,
                    (Some(lo), Some(hi)) => {
                        let width = hi.clone() - lo.clone();
                        lo.clone() + width * j / int::<T>(count as i64 + 1)
                    }
                };
            }
            pos = end;
        }
        let mut assignment = BTreeMap::new();
        for (slot, &c) in order.iter().enumerate() {
            for &i in &classes[c] {
                if let Term::Var(v) = &self.terms[i] {
                    assignment.insert(v.clone(), values[slot].clone());
                }
            }
        }
        Some(Linearization { assignment })
    }
}

/// A concrete assignment of values to variables.
#[derive(Clone, PartialEq, Eq)]
pub struct Linearization<T> {
    pub assignment: BTreeMap<Var, T>,
}

impl<T: Scalar> fmt::Debug for Linearization<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.assignment.iter().map(|(k, v)| (k, v.to_string()))).finish()
    }
}

impl<T: Scalar> Linearization<T> {
    pub fn value(&self, t: &Term<T>) -> Option<T> {
        match t {
            Term::Const(c) => Some(c.clone()),
            Term::Var(v) => self.assignment.get(v).cloned(),
        }
    }

    pub fn satisfies(&self, c: &Comparison<T>) -> bool {
        match (self.value(&c.lhs), self.value(&c.rhs)) {
            (Some(a), Some(b)) => c.op.holds(&a, &b),
            _ => false,
        }
    }
}

pub fn is_satisfiable<T: Scalar>(c: &ComparisonSet<T>) -> bool {
    OrderGraph::new(c.iter(), []).is_satisfiable()
}

/// Whether every linearization of `c` satisfies `goal`.
pub fn entails<T: Scalar>(c: &ComparisonSet<T>, goal: &Comparison<T>) -> bool {
    OrderGraph::new(c.iter(), [goal.lhs.clone(), goal.rhs.clone()]).entails_cmp(goal)
}

/// Enumeration bound for [`entails_oracle`].
pub const ORACLE_MAX_TERMS: usize = 8;

/// Entailment by exhaustive search over assignments.
///
/// Only the order type of finitely many terms matters over a dense domain,
/// so each variable ranges over a finite grid: the constants themselves
/// plus as many fresh points as there are variables below the least
/// constant, between each pair of neighbouring constants and above the
/// greatest one. Every order type realizable over the rationals is
/// realized on that grid.
pub fn entails_oracle<T: Scalar>(c: &ComparisonSet<T>, goal: &Comparison<T>) -> Result<bool> {
    let terms = c.terms();
    if terms.len() > ORACLE_MAX_TERMS {
        return Err(Error::BoundExceeded {
            what: "oracle terms",
            limit: ORACLE_MAX_TERMS as u128,
            actual: terms.len() as u128,
        });
    }
    let mut all = terms;
    all.insert(goal.lhs.clone());
    all.insert(goal.rhs.clone());
    let vars: Vec<Var> = all.iter().filter_map(|t| t.as_var().cloned()).collect();
    let consts: Vec<T> = all.iter().filter_map(|t| t.as_const().cloned()).collect();
    let grid = dense_grid(&consts, vars.len());
    let comps: Vec<&Comparison<T>> = c.iter().collect();
    let mut assignment: BTreeMap<Var, T> = BTreeMap::new();
    Ok(!find_counterexample(&vars, 0, &grid, &comps, goal, &mut assignment))
}

fn dense_grid<T: Scalar>(consts: &[T], slots: usize) -> Vec<T> {
    let mut grid = Vec::new();
    let step = |k: usize| int::<T>(k as i64);
    if consts.is_empty() {
        return (1..=slots.max(1)).map(step).collect();
    }
    for k in (1..=slots).rev() {
        grid.push(consts[0].clone() - step(k));
    }
    for (i, c) in consts.iter().enumerate() {
        grid.push(c.clone());
        match consts.get(i + 1) {
            Some(next) => {
                let width = next.clone() - c.clone();
                for k in 1..=slots {
                    grid.push(c.clone() + width.clone() * step(k) / step(slots + 1));
                }
            }
            None => {
                for k in 1..=slots {
                    grid.push(c.clone() + step(k));
                }
            }
        }
    }
    grid
}

fn value_of<T: Scalar>(t: &Term<T>, a: &BTreeMap<Var, T>) -> Option<T> {
    match t {
        Term::Const(c) => Some(c.clone()),
        Term::Var(v) => a.get(v).cloned(),
    }
}

fn find_counterexample<T: Scalar>(
    vars: &[Var],
    next: usize,
    grid: &[T],
    comps: &[&Comparison<T>],
    goal: &Comparison<T>,
    a: &mut BTreeMap<Var, T>,
) -> bool {
    for c in comps {
        if let (Some(l), Some(r)) = (value_of(&c.lhs, a), value_of(&c.rhs, a)) {
            if !c.op.holds(&l, &r) {
                return false;
            }
        }
    }
    if let (Some(l), Some(r)) = (value_of(&goal.lhs, a), value_of(&goal.rhs, a)) {
        if goal.op.holds(&l, &r) {
            return false;
        }
    }
    if next == vars.len() {
        return true;
    }
    for v in grid {
        a.insert(vars[next].clone(), v.clone());
        if find_counterexample(vars, next + 1, grid, comps, goal, a) {
            return true;
        }
    }
    a.remove(&vars[next]);
    false
}

/// Every comparison among `terms` entailed by `c`, with the strongest
/// operator per ordered pair.
pub fn closure<T: Scalar>(c: &ComparisonSet<T>, terms: &BTreeSet<Term<T>>) -> Result<ComparisonSet<T>> {
    let g = OrderGraph::new(c.iter(), terms.iter().cloned());
    if !g.is_satisfiable() {
        return Err(Error::Unsatisfiable);
    }
    Ok(g.closure_over(terms))
}

/// Result of [`normalize_equalities`].
#[derive(Clone)]
pub struct Normalized<T> {
    pub query: Query<T>,
    /// Variables replaced by their class representative.
    pub substitution: BTreeMap<Var, Term<T>>,
    /// Pairs of pinned terms (distinguished or aggregate variables,
    /// constants) forced equal. They are kept apart and tied by `<=` both
    /// ways, since neither can be substituted away.
    pub collapsed: Vec<(Term<T>, Term<T>)>,
}

impl<T: Scalar> fmt::Debug for Normalized<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Normalized")
            .field("query", &self.query.to_string())
            .field("substitution", &self.substitution)
            .field("collapsed", &self.collapsed)
            .finish()
    }
}

/// Removes `=` and every other forced equality from a query.
///
/// Terms forced equal are grouped; each group keeps one representative,
/// chosen as distinguished variable, then aggregate variable, then
/// constant, then the least variable name. Unpinned members are
/// substituted by the representative everywhere in the body.
pub fn normalize_equalities<T: Scalar>(q: &Query<T>) -> Result<Normalized<T>> {
    let g = OrderGraph::new(q.comparisons().iter(), q.terms());
    if !g.is_satisfiable() {
        return Err(match forced_equal_constants(q.comparisons()) {
            Some((a, b)) => Error::ConstantClash(a.to_string(), b.to_string()),
            None => Error::Unsatisfiable,
        });
    }
    let head: Vec<Var> = q.disting().to_vec();
    let aggs: Vec<Var> = q.aggregate_vars().to_vec();
    let rank = |t: &Term<T>| -> (u8, usize) {
        match t {
            Term::Var(v) => {
                if let Some(i) = head.iter().position(|h| h == v) {
                    (0, i)
                } else if let Some(i) = aggs.iter().position(|h| h == v) {
                    (1, i)
                } else {
                    (3, 0)
                }
            }
            Term::Const(_) => (2, 0),
        }
    };
    let pinned = |t: &Term<T>| rank(t).0 < 3;
    let terms = g.terms().to_vec();
    let mut done: BTreeSet<Term<T>> = BTreeSet::new();
    let mut substitution = BTreeMap::new();
    let mut ties = Vec::new();
    let mut collapsed = Vec::new();
    for t in &terms {
        if done.contains(t) {
            continue;
        }
        let class: Vec<Term<T>> = terms
            .iter()
            .filter(|u| g.rel(t, u) >= 0 && g.rel(u, t) >= 0)
            .cloned()
            .collect();
        done.extend(class.iter().cloned());
        if class.len() == 1 {
            continue;
        }
        let rep = class
            .iter()
            .min_by(|a, b| rank(a).cmp(&rank(b)).then_with(|| a.cmp(b)))
            .expect("non-empty class")
            .clone();
        for m in &class {
            if *m == rep {
                continue;
            }
            if pinned(m) {
                ties.push(Comparison::le(m.clone(), rep.clone()));
                ties.push(Comparison::le(rep.clone(), m.clone()));
                if pinned(&rep) {
                    collapsed.push((rep.clone(), m.clone()));
                }
            } else if let Term::Var(v) = m {
                substitution.insert(v.clone(), rep.clone());
            }
        }
    }
    let subst = |t: &Term<T>| match t {
        Term::Var(v) => substitution.get(v).cloned().unwrap_or_else(|| t.clone()),
        c => c.clone(),
    };
    let mut comparisons: BTreeSet<Comparison<T>> = BTreeSet::new();
    for c in q.comparisons() {
        let m = c.map_terms(subst);
        if m.lhs == m.rhs {
            continue;
        }
        match m.op {
            CmpOp::Eq => {
                comparisons.insert(Comparison::le(m.lhs.clone(), m.rhs.clone()));
                comparisons.insert(Comparison::le(m.rhs, m.lhs));
            }
            _ => {
                comparisons.insert(m);
            }
        }
    }
    comparisons.extend(ties);
    let body = q.substitute_body(subst);
    let query = body.with_comparisons(comparisons);
    Ok(Normalized { query, substitution, collapsed })
}

/// Two distinct constants tied together by non-strict comparisons alone.
fn forced_equal_constants<T: Scalar>(comparisons: &BTreeSet<Comparison<T>>) -> Option<(Term<T>, Term<T>)> {
    let weak: Vec<&Comparison<T>> = comparisons.iter().filter(|c| c.op != CmpOp::Lt).collect();
    let mut terms: BTreeSet<Term<T>> = BTreeSet::new();
    for c in &weak {
        terms.insert(c.lhs.clone());
        terms.insert(c.rhs.clone());
    }
    let terms: Vec<Term<T>> = terms.into_iter().collect();
    let ix: HashMap<&Term<T>, usize> = terms.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let n = terms.len();
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for c in &weak {
        let (l, r) = (ix[&c.lhs], ix[&c.rhs]);
        reach[r][l] = true;
        if c.op == CmpOp::Eq {
            reach[l][r] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if terms[i].is_const() && terms[j].is_const() && reach[i][j] && reach[j][i] {
                return Some((terms[i].clone(), terms[j].clone()));
            }
        }
    }
    None
}
