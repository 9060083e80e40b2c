use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use super::term::{Atom, CmpOp, Comparison, Rel, Term, Var};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Aggregate part of a query head.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Aggregate {
    None,
    /// `countd(y)`
    CountDistinct(Var),
    /// `f(y1, ..., yk)`; evaluated with the nested general-aggregate semantics.
    General { func: String, vars: Vec<Var> },
}

impl Aggregate {
    pub fn vars(&self) -> &[Var] {
        match self {
            Aggregate::None => &[],
            Aggregate::CountDistinct(v) => std::slice::from_ref(v),
            Aggregate::General { vars, .. } => vars,
        }
    }
}

/// A conjunctive query with order comparisons, optionally aggregating.
///
/// Atoms and comparisons are sets kept in canonical order, so two queries
/// that differ only in the order of their body items are equal values.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Query<T> {
    name: String,
    head: Vec<Var>,
    aggregate: Aggregate,
    atoms: BTreeSet<Atom<T>>,
    comparisons: BTreeSet<Comparison<T>>,
}

pub type Schema = BTreeMap<Rel, usize>;

impl<T: Scalar> Query<T> {
    /// Builds a query and checks safety, arity consistency and head shape.
    pub fn new(
        name: &str,
        head: Vec<Var>,
        aggregate: Aggregate,
        atoms: impl IntoIterator<Item = Atom<T>>,
        comparisons: impl IntoIterator<Item = Comparison<T>>,
    ) -> Result<Self> {
        let q = Query {
            name: name.to_string(),
            head,
            aggregate,
            atoms: atoms.into_iter().collect(),
            comparisons: comparisons.into_iter().collect(),
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for v in &self.head {
            if !seen.insert(v) {
                return Err(Error::DuplicateHeadVar(v.to_string()));
            }
        }
        let mut agg_seen = BTreeSet::new();
        for v in self.aggregate.vars() {
            if seen.contains(v) {
                return Err(Error::AggregateInGroupBy(v.to_string()));
            }
            if !agg_seen.insert(v) {
                return Err(Error::DuplicateHeadVar(v.to_string()));
            }
        }
        schema_of(self.atoms.iter())?;
        let atom_vars = self.atom_vars();
        for v in self.head.iter().chain(self.aggregate.vars()) {
            if !atom_vars.contains(v) {
                return Err(Error::Unsafe(v.to_string()));
            }
        }
        for c in &self.comparisons {
            for t in c.terms() {
                if let Term::Var(v) = t {
                    if !atom_vars.contains(v) {
                        return Err(Error::Unsafe(v.to_string()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Distinguished (group-by) variables in head order.
    pub fn disting(&self) -> &[Var] {
        &self.head
    }

    pub fn aggregate(&self) -> &Aggregate {
        &self.aggregate
    }

    pub fn atoms(&self) -> &BTreeSet<Atom<T>> {
        &self.atoms
    }

    pub fn comparisons(&self) -> &BTreeSet<Comparison<T>> {
        &self.comparisons
    }

    pub fn count_var(&self) -> Option<&Var> {
        match &self.aggregate {
            Aggregate::CountDistinct(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_plain(&self) -> bool {
        matches!(self.aggregate, Aggregate::None)
    }

    pub fn is_count_distinct(&self) -> bool {
        matches!(self.aggregate, Aggregate::CountDistinct(_))
    }

    pub fn is_general_aggregate(&self) -> bool {
        matches!(self.aggregate, Aggregate::General { .. })
    }

    pub fn aggregate_vars(&self) -> &[Var] {
        self.aggregate.vars()
    }

    /// Distinguished variables followed by aggregate variables.
    pub fn output_vars(&self) -> Vec<Var> {
        self.head.iter().chain(self.aggregate.vars()).cloned().collect()
    }

    pub fn atom_vars(&self) -> BTreeSet<Var> {
        self.atoms.iter().flat_map(|a| a.vars().cloned()).collect()
    }

    /// All variables of the query.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut vs = self.atom_vars();
        vs.extend(self.head.iter().cloned());
        vs.extend(self.aggregate.vars().iter().cloned());
        vs
    }

    /// Variables that are neither distinguished nor aggregated.
    pub fn nondisting(&self) -> BTreeSet<Var> {
        let out: BTreeSet<&Var> = self.head.iter().chain(self.aggregate.vars()).collect();
        self.vars().into_iter().filter(|v| !out.contains(v)).collect()
    }

    /// Variables in order of first occurrence: head, aggregate, then atoms
    /// and comparisons in canonical order.
    pub fn vars_in_order(&self) -> Vec<Var> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let atom_terms = self.atoms.iter().flat_map(|a| a.args.iter());
        let cmp_terms = self.comparisons.iter().flat_map(|c| [&c.lhs, &c.rhs]);
        let head = self.head.iter().chain(self.aggregate.vars());
        for v in head.chain(atom_terms.chain(cmp_terms).filter_map(Term::as_var)) {
            if seen.insert(v.clone()) {
                out.push(v.clone());
            }
        }
        out
    }

    /// Terms of atoms and comparisons (the query's active domain).
    pub fn terms(&self) -> BTreeSet<Term<T>> {
        let mut ts: BTreeSet<Term<T>> =
            self.atoms.iter().flat_map(|a| a.args.iter().cloned()).collect();
        for c in &self.comparisons {
            ts.insert(c.lhs.clone());
            ts.insert(c.rhs.clone());
        }
        ts
    }

    pub fn constants(&self) -> BTreeSet<T> {
        self.terms().into_iter().filter_map(|t| t.as_const().cloned()).collect()
    }

    pub fn schema(&self) -> Schema {
        schema_of(self.atoms.iter()).expect("validated query has a consistent schema")
    }

    pub fn with_comparisons(&self, comparisons: BTreeSet<Comparison<T>>) -> Self {
        Query { comparisons, ..self.clone() }
    }

    pub fn with_atoms(&self, atoms: BTreeSet<Atom<T>>) -> Self {
        Query { atoms, ..self.clone() }
    }

    pub fn with_name(&self, name: &str) -> Self {
        Query { name: name.to_string(), ..self.clone() }
    }

    /// Applies a variable renaming everywhere. Variables missing from
    /// `map` are left untouched. The caller keeps the renaming injective.
    pub fn rename(&self, map: &HashMap<Var, Var>) -> Self {
        let rv = |v: &Var| map.get(v).cloned().unwrap_or_else(|| v.clone());
        let rt = |t: &Term<T>| match t {
            Term::Var(v) => Term::Var(rv(v)),
            c => c.clone(),
        };
        let aggregate = match &self.aggregate {
            Aggregate::None => Aggregate::None,
            Aggregate::CountDistinct(v) => Aggregate::CountDistinct(rv(v)),
            Aggregate::General { func, vars } => {
                Aggregate::General { func: func.clone(), vars: vars.iter().map(rv).collect() }
            }
        };
        Query {
            name: self.name.clone(),
            head: self.head.iter().map(rv).collect(),
            aggregate,
            atoms: self.atoms.iter().map(|a| a.map_terms(rt)).collect(),
            comparisons: self.comparisons.iter().map(|c| c.map_terms(rt)).collect(),
        }
    }

    /// Applies a term substitution to the body only.
    pub(crate) fn substitute_body(&self, f: impl Fn(&Term<T>) -> Term<T>) -> Self {
        Query {
            atoms: self.atoms.iter().map(|a| a.map_terms(&f)).collect(),
            comparisons: self.comparisons.iter().map(|c| c.map_terms(&f)).collect(),
            ..self.clone()
        }
    }

    /// The plain query with aggregate variables promoted to outputs
    /// (`q̂(x̄, ȳ)` for `q(x̄, α(ȳ))`). Plain queries are returned unchanged.
    pub fn promote_aggregate(&self) -> Self {
        Query {
            head: self.output_vars(),
            aggregate: Aggregate::None,
            ..self.clone()
        }
    }

    /// The same body with a plain head over the given variables.
    pub fn project(&self, head: Vec<Var>) -> Result<Self> {
        Query::new(&self.name, head, Aggregate::None, self.atoms.clone(), self.comparisons.clone())
    }

    pub fn has_equalities(&self) -> bool {
        self.comparisons.iter().any(|c| c.op == CmpOp::Eq)
    }
}

pub(crate) fn schema_of<'a, T: Scalar>(atoms: impl Iterator<Item = &'a Atom<T>>) -> Result<Schema> {
    let mut schema = Schema::new();
    for a in atoms {
        merge_arity(&mut schema, &a.relation, a.arity())?;
    }
    Ok(schema)
}

pub(crate) fn merge_arity(schema: &mut Schema, rel: &Rel, arity: usize) -> Result<()> {
    match schema.get(rel) {
        Some(&k) if k != arity => Err(Error::ArityConflict {
            relation: rel.to_string(),
            expected: k,
            found: arity,
        }),
        Some(_) => Ok(()),
        None => {
            schema.insert(rel.clone(), arity);
            Ok(())
        }
    }
}

impl<T: Scalar> fmt::Display for Query<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        let mut first = true;
        for v in &self.head {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{v}")?;
        }
        let agg = match &self.aggregate {
            Aggregate::None => None,
            Aggregate::CountDistinct(v) => Some(format!("countd({v})")),
            Aggregate::General { func, vars } => Some(format!(
                "{func}({})",
                vars.iter().map(Var::name).collect::<Vec<_>>().join(", ")
            )),
        };
        if let Some(a) = agg {
            if !first {
                f.write_str(", ")?;
            }
            f.write_str(&a)?;
        }
        f.write_str(")")?;
        let body: Vec<String> = self
            .atoms
            .iter()
            .map(ToString::to_string)
            .chain(self.comparisons.iter().map(ToString::to_string))
            .collect();
        if !body.is_empty() {
            write!(f, " :- {}", body.join(", "))?;
        }
        f.write_str(".")
    }
}

impl<T: Scalar> fmt::Debug for Query<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
