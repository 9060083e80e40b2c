//! Cores of conjunctive queries with comparisons.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::ir::{Atom, Query, Term};
use crate::morphism::{find_homomorphism, find_isomorphism, head_pin, VarMap};
use crate::order::{closure, is_satisfiable, normalize_equalities, ComparisonSet};
use crate::scalar::Scalar;

/// Order in which atoms are tried for removal.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum RemovalOrder {
    #[default]
    Canonical,
    Reverse,
}

/// A core together with the homomorphisms relating it to its query.
#[derive(Clone)]
pub struct Core<T> {
    pub query: Query<T>,
    /// `q -> core`, identity on output variables.
    pub to_core: VarMap<T>,
    /// `core -> q`, injective (the inclusion).
    pub from_core: VarMap<T>,
}

impl<T: Scalar> std::fmt::Debug for Core<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Core")
            .field("query", &self.query.to_string())
            .field("to_core", &self.to_core)
            .finish()
    }
}

fn identity_pin<T: Scalar>(q: &Query<T>) -> VarMap<T> {
    q.output_vars().into_iter().map(|v| (v.clone(), Term::Var(v))).collect()
}

/// The query with its comparison set replaced by its closure over the
/// query's terms.
pub fn close_query<T: Scalar>(q: &Query<T>) -> Result<Query<T>> {
    let c = closure(&ComparisonSet::from(q.comparisons()), &q.terms())?;
    Ok(q.with_comparisons(c.into_set()))
}

/// Computes the core of `q`.
///
/// Output variables (distinguished and aggregated) are held fixed. Atoms are
/// removed greedily, restarting after each successful removal, as long as
/// `q` still maps homomorphically into the smaller query. The comparison set
/// of the result is the closure of `q`'s comparisons restricted to the
/// surviving terms.
pub fn compute_core<T: Scalar>(q: &Query<T>) -> Result<Query<T>> {
    compute_core_with(q, RemovalOrder::Canonical).map(|c| c.query)
}

pub fn compute_core_with<T: Scalar>(q: &Query<T>, order: RemovalOrder) -> Result<Core<T>> {
    if let Some(c) = q.comparisons().iter().find(|c| c.op == crate::ir::CmpOp::Eq) {
        return Err(Error::EqualityPresent(c.to_string()));
    }
    if !is_satisfiable(&ComparisonSet::from(q.comparisons())) {
        return Err(Error::Unsatisfiable);
    }
    let original = close_query(q)?;
    let constants: BTreeSet<Term<T>> = original.constants().into_iter().map(Term::Const).collect();
    let pin = identity_pin(q);
    let mut current = original.clone();
    let mut to_core = identity_pin(&original);
    for v in original.vars() {
        to_core.insert(v.clone(), Term::Var(v));
    }
    'restart: loop {
        let mut atoms: Vec<&Atom<T>> = current.atoms().iter().collect();
        if order == RemovalOrder::Reverse {
            atoms.reverse();
        }
        for a in atoms {
            let kept: BTreeSet<Atom<T>> = current.atoms().iter().filter(|b| *b != a).cloned().collect();
            let mut surviving: BTreeSet<Term<T>> = kept.iter().flat_map(|b| b.args.iter().cloned()).collect();
            surviving.extend(constants.iter().cloned());
            let comps = ComparisonSet::from(current.comparisons()).restrict(|t| surviving.contains(t));
            let candidate = current.with_atoms(kept).with_comparisons(comps.into_set());
            if let Some(h) = find_homomorphism(&original, &candidate, &pin) {
                to_core = h;
                current = candidate;
                continue 'restart;
            }
        }
        break;
    }
    let from_core = current.vars().into_iter().map(|v| (v.clone(), Term::Var(v))).collect();
    Ok(Core { query: current, to_core, from_core })
}

/// Set-semantics equivalence of plain queries: their cores are isomorphic
/// with distinguished variables matched positionally.
pub fn cq_equivalent<T: Scalar>(q1: &Query<T>, q2: &Query<T>) -> Result<bool> {
    Ok(cq_isomorphism(q1, q2)?.is_some())
}

/// Like [`cq_equivalent`], returning the isomorphism between the cores.
/// Two unsatisfiable queries are equivalent with an empty witness.
pub fn cq_isomorphism<T: Scalar>(q1: &Query<T>, q2: &Query<T>) -> Result<Option<VarMap<T>>> {
    for q in [q1, q2] {
        if !q.is_plain() {
            return Err(Error::WrongQueryKind { expected: "plain conjunctive" });
        }
    }
    let pin = head_pin(q1.disting(), q2.disting()).ok_or(Error::ArityMismatch {
        left: q1.disting().len(),
        right: q2.disting().len(),
    })?;
    let c1 = core_or_empty(q1)?;
    let c2 = core_or_empty(q2)?;
    Ok(match (c1, c2) {
        (None, None) => Some(VarMap::new()),
        (Some(a), Some(b)) => find_isomorphism(&a, &b, &pin),
        _ => None,
    })
}

/// Normalizes equalities and computes the core; `None` when the query's
/// comparisons are unsatisfiable.
pub fn core_or_empty<T: Scalar>(q: &Query<T>) -> Result<Option<Query<T>>> {
    let n = match normalize_equalities(q) {
        Ok(n) => n,
        Err(Error::Unsatisfiable | Error::ConstantClash(..)) => return Ok(None),
        Err(e) => return Err(e),
    };
    match compute_core(&n.query) {
        Ok(c) => Ok(Some(c)),
        Err(Error::Unsatisfiable) => Ok(None),
        Err(e) => Err(e),
    }
}
