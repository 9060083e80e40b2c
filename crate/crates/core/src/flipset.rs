//! Equal sets, flips, and counting the distinct values of a variable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::ir::{Aggregate, Atom, CmpOp, Comparison, Query, Term, Var};
use crate::morphism::{find_homomorphism, VarMap};
use crate::scalar::Scalar;

/// Default variable bound for [`equal_set`].
pub const EQUAL_SET_MAX_VARS: usize = 12;

/// A set of variables interchangeable with `anchor`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EqualSet {
    pub members: BTreeSet<Var>,
    pub anchor: Var,
}

impl EqualSet {
    pub fn contains(&self, v: &Var) -> bool {
        self.members.contains(v)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

impl fmt::Display for EqualSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.members.iter().map(Var::name).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

fn inside(c: &Comparison<impl Scalar>, s: &BTreeSet<Var>) -> bool {
    c.terms().iter().all(|t| t.as_var().is_some_and(|v| s.contains(v)))
}

/// Whether `s` is a potential equal set of `q`: after dropping the
/// comparisons among members of `s`, every member can be sent to every
/// other member by an endomorphism fixing the distinguished variables.
pub fn check_equal_set<T: Scalar>(q: &Query<T>, s: &BTreeSet<Var>) -> bool {
    let stripped = strip(q, s);
    let base: VarMap<T> = q.disting().iter().map(|x| (x.clone(), Term::Var(x.clone()))).collect();
    for x1 in s {
        for x2 in s {
            if x1 == x2 {
                continue;
            }
            let mut pin = base.clone();
            if let Some(prev) = pin.insert(x1.clone(), Term::Var(x2.clone())) {
                if prev != Term::Var(x2.clone()) {
                    return false;
                }
            }
            if find_homomorphism(&stripped, &stripped, &pin).is_none() {
                return false;
            }
        }
    }
    true
}

fn strip<T: Scalar>(q: &Query<T>, s: &BTreeSet<Var>) -> Query<T> {
    q.with_comparisons(q.comparisons().iter().filter(|c| !inside(c, s)).cloned().collect())
}

/// Whether the members of `s` lie in distinct components of the graph
/// joining non-distinguished variables that share an atom or a comparison
/// not internal to `s`. Members of such a set take their values
/// independently of each other once the group-by values are fixed.
pub fn members_independent<T: Scalar>(q: &Query<T>, s: &BTreeSet<Var>) -> bool {
    let q = &strip(q, s);
    let disting: BTreeSet<&Var> = q.disting().iter().collect();
    let vars: Vec<Var> = q.vars().into_iter().filter(|v| !disting.contains(v)).collect();
    let ix: BTreeMap<&Var, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..vars.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let groups = q
        .atoms()
        .iter()
        .map(|a| a.vars().collect::<Vec<_>>())
        .chain(q.comparisons().iter().map(|c| c.terms().iter().filter_map(|t| t.as_var()).collect()));
    for g in groups {
        let members: Vec<usize> = g.into_iter().filter_map(|v| ix.get(v).copied()).collect();
        for w in members.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }
    let mut seen = BTreeSet::new();
    s.iter().all(|v| ix.get(v).map_or(true, |&i| seen.insert(find(&mut parent, i))))
}

/// The largest potential equal set containing `v`, provided it contains
/// every other one; `{v}` when no such set exists.
pub fn equal_set<T: Scalar>(q: &Query<T>, v: &Var) -> Result<EqualSet> {
    equal_set_bounded(q, v, EQUAL_SET_MAX_VARS)
}

/// [`equal_set`] with an explicit bound on the number of query variables.
///
/// Every candidate superset of `{v}` is checked. The union of the valid
/// ones is returned when it is itself valid, which makes it the unique
/// largest valid set; otherwise the result is `{v}`.
pub fn equal_set_bounded<T: Scalar>(q: &Query<T>, v: &Var, max_vars: usize) -> Result<EqualSet> {
    let vars = q.vars();
    if !vars.contains(v) {
        return Err(Error::Precondition(format!("{v} is not a variable of the query")));
    }
    if vars.len() > max_vars {
        return Err(Error::BoundExceeded {
            what: "equal set variables",
            limit: max_vars as u128,
            actual: vars.len() as u128,
        });
    }
    let disting: BTreeSet<&Var> = q.disting().iter().collect();
    let singleton = EqualSet { members: [v.clone()].into(), anchor: v.clone() };
    if disting.contains(v) {
        return Ok(singleton);
    }
    // A distinguished member could never be sent elsewhere, so only
    // non-distinguished variables are candidates.
    let cands: Vec<&Var> = vars.iter().filter(|u| *u != v && !disting.contains(u)).collect();
    let k = cands.len();
    let mut union = 0u32;
    for m in 1..1u32 << k {
        if m & !union == 0 {
            continue;
        }
        let mut s: BTreeSet<Var> = (0..k).filter(|i| m >> i & 1 == 1).map(|i| cands[i].clone()).collect();
        s.insert(v.clone());
        if check_equal_set(q, &s) {
            union |= m;
        }
    }
    let mut members: BTreeSet<Var> = (0..k).filter(|i| union >> i & 1 == 1).map(|i| cands[i].clone()).collect();
    members.insert(v.clone());
    if members.len() > 1 && check_equal_set(q, &members) {
        assert!(members.iter().all(|u| !disting.contains(u)), "equal set {members:?} holds a distinguished variable");
        return Ok(EqualSet { members, anchor: v.clone() });
    }
    Ok(singleton)
}

/// Reverses every comparison whose two sides lie in `set`.
pub fn flip_with<T: Scalar>(q: &Query<T>, set: &EqualSet) -> Query<T> {
    let comps = q
        .comparisons()
        .iter()
        .map(|c| if inside(c, &set.members) { c.reversed() } else { c.clone() })
        .collect();
    q.with_comparisons(comps)
}

/// The flip of a count-distinct query: comparisons inside the equal set of
/// the count variable are reversed. When the members of that set are not
/// independent (see [`members_independent`]) the query is returned as is.
/// The query must be free of `=`.
pub fn flip<T: Scalar>(q: &Query<T>) -> Result<Query<T>> {
    let y = q.count_var().ok_or(Error::WrongQueryKind { expected: "count-distinct" })?;
    if let Some(c) = q.comparisons().iter().find(|c| c.op == CmpOp::Eq) {
        return Err(Error::EqualityPresent(c.to_string()));
    }
    let set = equal_set(q, y)?;
    if !members_independent(q, &set.members) {
        return Ok(q.clone());
    }
    Ok(flip_with(q, &set))
}

/// Order constraints among variables as a weighted digraph. An edge
/// `(from, to, w)` states `from > to` when `w = 1` and `from >= to` when
/// `w = 0`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ComparisonDag {
    nodes: BTreeSet<Var>,
    edges: BTreeSet<(Var, Var, u8)>,
}

impl ComparisonDag {
    pub fn new(nodes: impl IntoIterator<Item = Var>, edges: impl IntoIterator<Item = (Var, Var, u8)>) -> Result<Self> {
        let mut nodes: BTreeSet<Var> = nodes.into_iter().collect();
        let edges: BTreeSet<(Var, Var, u8)> = edges.into_iter().collect();
        for (a, b, w) in &edges {
            if *w > 1 {
                return Err(Error::Precondition(format!("edge weight {w} is not 0 or 1")));
            }
            nodes.insert(a.clone());
            nodes.insert(b.clone());
        }
        Ok(ComparisonDag { nodes, edges })
    }

    /// The variable-to-variable comparisons among `nodes`. `=` is not allowed.
    pub fn from_comparisons<'a, T: Scalar>(
        comparisons: impl IntoIterator<Item = &'a Comparison<T>>,
        nodes: &BTreeSet<Var>,
    ) -> Result<Self> {
        let mut edges = Vec::new();
        for c in comparisons {
            let (Some(l), Some(r)) = (c.lhs.as_var(), c.rhs.as_var()) else { continue };
            if !nodes.contains(l) || !nodes.contains(r) {
                continue;
            }
            match c.op {
                CmpOp::Lt => edges.push((r.clone(), l.clone(), 1)),
                CmpOp::Le => edges.push((r.clone(), l.clone(), 0)),
                CmpOp::Eq => return Err(Error::EqualityPresent(c.to_string())),
            }
        }
        Self::new(nodes.iter().cloned(), edges)
    }

    pub fn nodes(&self) -> &BTreeSet<Var> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(Var, Var, u8)> {
        &self.edges
    }

    /// Same constraints with every direction reversed.
    pub fn flipped(&self) -> Self {
        ComparisonDag {
            nodes: self.nodes.clone(),
            edges: self.edges.iter().map(|(a, b, w)| (b.clone(), a.clone(), *w)).collect(),
        }
    }

    /// Heaviest path weight between every pair; `None` when unreachable.
    /// Fails on a cycle through a strict edge.
    fn longest(&self) -> Result<(Vec<Var>, Vec<Vec<Option<usize>>>)> {
        let nodes: Vec<Var> = self.nodes.iter().cloned().collect();
        let ix: BTreeMap<&Var, usize> = nodes.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let n = nodes.len();
        let mut d = vec![vec![None; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = Some(0);
        }
        for (a, b, w) in &self.edges {
            let (i, j) = (ix[a], ix[b]);
            let w = *w as usize;
            if d[i][j].map_or(true, |x| x < w) {
                d[i][j] = Some(w);
            }
        }
        for k in 0..n {
            for i in 0..n {
                let Some(ik) = d[i][k] else { continue };
                for j in 0..n {
                    let Some(kj) = d[k][j] else { continue };
                    let cand = ik + kj;
                    if cand > n {
                        return Err(Error::Precondition("comparison dag has a strict cycle".into()));
                    }
                    if d[i][j].map_or(true, |x| x < cand) {
                        d[i][j] = Some(cand);
                    }
                }
            }
        }
        if (0..n).any(|i| d[i][i] != Some(0)) {
            return Err(Error::Precondition("comparison dag has a strict cycle".into()));
        }
        Ok((nodes, d))
    }

    pub fn is_consistent(&self) -> bool {
        self.longest().is_ok()
    }

    /// The dag as a query with one unary atom per node, so that
    /// homomorphisms between dags reuse the query machinery.
    fn as_query(&self) -> Query<num_rational::Rational64> {
        let atoms: Vec<Atom<num_rational::Rational64>> =
            self.nodes.iter().map(|v| Atom::new("node", vec![Term::Var(v.clone())])).collect();
        let comps: Vec<Comparison<num_rational::Rational64>> = self
            .edges
            .iter()
            .map(|(a, b, w)| {
                let op = if *w == 1 { CmpOp::Lt } else { CmpOp::Le };
                Comparison::new(Term::Var(b.clone()), op, Term::Var(a.clone()))
            })
            .collect();
        Query::new("dag", vec![], Aggregate::None, atoms, comps).expect("dag query is safe")
    }
}

/// Number of distinct values `y` takes over the assignments of the dag's
/// nodes into a domain of `n` ordered values.
///
/// With `M_h` the heaviest path from any node down to `y` and `M_l` the
/// heaviest path from `y` down to any node, the count is `n - (M_h + M_l)`.
/// When the heaviest path of the whole dag does not fit in `n` values there
/// is no assignment at all and the count is 0.
pub fn distinct_value_count(dag: &ComparisonDag, y: &Var, n: usize) -> Result<usize> {
    let (nodes, d) = dag.longest()?;
    let Some(iy) = nodes.iter().position(|v| v == y) else {
        return Err(Error::Precondition(format!("{y} is not a node of the dag")));
    };
    let m_h = (0..nodes.len()).filter_map(|u| d[u][iy]).max().unwrap_or(0);
    let m_l = (0..nodes.len()).filter_map(|u| d[iy][u]).max().unwrap_or(0);
    let longest = d.iter().flatten().filter_map(|x| *x).max().unwrap_or(0);
    if n < longest + 1 {
        return Ok(0);
    }
    Ok(n - (m_h + m_l))
}

/// Whether `y` in `c` never takes more distinct values than `y2` in `c2`,
/// decided by looking for a comparison-preserving map from `c2` (or from
/// `c2` flipped) into `c` sending `y2` to `y`.
pub fn count_dominates(c: &ComparisonDag, y: &Var, c2: &ComparisonDag, y2: &Var) -> bool {
    let target = c.as_query();
    let pin: VarMap<num_rational::Rational64> = [(y2.clone(), Term::Var(y.clone()))].into_iter().collect();
    [c2.clone(), c2.flipped()]
        .iter()
        .any(|src| find_homomorphism(&src.as_query(), &target, &pin).is_some())
}
