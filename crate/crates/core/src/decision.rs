//! Equivalence of count-distinct queries.
//!
//! Both queries are reduced to their cores, each core is also flipped, and
//! the queries are equivalent when some core or flipped core of the first is
//! isomorphic to some core or flipped core of the second, with group-by
//! variables matched positionally and count variable matched to count
//! variable.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::cores::{close_query, core_or_empty, cq_isomorphism};
use crate::error::{Error, Result};
use crate::eval::{eval_countd, eval_set, render_map, render_set, DatabaseFamily};
use crate::flipset::flip;
use crate::ir::{Database, Query, Term};
use crate::morphism::{find_isomorphism, head_pin, VarMap};
use crate::scalar::Scalar;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Equivalent => "equivalent",
            Verdict::NotEquivalent => "not equivalent",
        })
    }
}

/// Which reduced form of an input query took part in a comparison.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Form {
    Core,
    FlippedCore,
}

/// One of the isomorphism checks between reduced forms.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Pair {
    pub left: Form,
    pub right: Form,
}

impl Pair {
    fn side(form: Form, i: u8) -> String {
        match form {
            Form::Core => format!("core(q{i})"),
            Form::FlippedCore => format!("flip(core(q{i}))"),
        }
    }

    pub fn describe(&self, matched: bool) -> String {
        let rel = if matched { "≅" } else { "≇" };
        format!("{} {rel} {}", Self::side(self.left, 1), Self::side(self.right, 2))
    }
}

/// Why the verdict was reached.
#[derive(Clone, PartialEq, Eq)]
pub enum Reason<T> {
    Matched { pair: Pair, witness: VarMap<T> },
    NoMatch { failed: Vec<Pair> },
    BothUnsatisfiable,
    /// Only input `which` (1 or 2) has unsatisfiable comparisons.
    OneUnsatisfiable { which: u8 },
}

/// A database on which the two queries disagree.
#[derive(Clone, PartialEq, Eq)]
pub struct Counterexample<T> {
    pub database: Database<T>,
    pub left: String,
    pub right: String,
}

/// Verdict plus the evidence behind it.
#[derive(Clone)]
pub struct Certificate<T> {
    pub verdict: Verdict,
    pub reason: Reason<T>,
    /// Reduced forms of each input, in the order core, flipped core.
    pub forms: [Vec<(Form, Query<T>)>; 2],
    pub counterexample: Option<Counterexample<T>>,
}

impl<T: Scalar> Certificate<T> {
    pub fn is_equivalent(&self) -> bool {
        self.verdict == Verdict::Equivalent
    }

    /// The first line of the text form.
    pub fn headline(&self) -> String {
        match &self.reason {
            Reason::Matched { pair, .. } => format!("{} ({})", self.verdict, pair.describe(true)),
            Reason::BothUnsatisfiable => format!("{} (both queries unsatisfiable)", self.verdict),
            Reason::OneUnsatisfiable { which } => format!("{} (q{which} unsatisfiable)", self.verdict),
            Reason::NoMatch { .. } => self.verdict.to_string(),
        }
    }
}

impl<T: Scalar> fmt::Display for Certificate<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.headline())?;
        for (i, forms) in self.forms.iter().enumerate() {
            for (form, q) in forms {
                writeln!(f, "{}: {q}", Pair::side(*form, i as u8 + 1))?;
            }
        }
        match &self.reason {
            Reason::Matched { witness, .. } => writeln!(f, "witness: {witness}")?,
            Reason::NoMatch { failed } => {
                for p in failed {
                    writeln!(f, "failed: {}", p.describe(false))?;
                }
            }
            _ => {}
        }
        if let Some(c) = &self.counterexample {
            writeln!(f, "counterexample:")?;
            for line in c.database.to_string().lines() {
                writeln!(f, "  {line}")?;
            }
            for (name, answer) in [("q1", &c.left), ("q2", &c.right)] {
                writeln!(f, "{name} answer:")?;
                if answer.is_empty() {
                    writeln!(f, "  (empty)")?;
                }
                for line in answer.lines() {
                    writeln!(f, "  {line}")?;
                }
            }
        }
        Ok(())
    }
}

impl<T: Scalar> fmt::Debug for Certificate<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Knobs for [`countd_equivalent_with`].
#[derive(Clone, Copy, Debug)]
pub struct DecisionOptions {
    /// Also compare flipped cores. Turning this off gives a deliberately
    /// weaker procedure, useful for checking that the fuzz harness notices.
    pub use_flip: bool,
}

impl Default for DecisionOptions {
    fn default() -> Self {
        DecisionOptions { use_flip: true }
    }
}

/// The pin used when comparing count-distinct queries: every group-by
/// variable and the count variable map to themselves.
pub fn flip_pin_policy<T: Scalar>(q: &Query<T>) -> VarMap<T> {
    q.output_vars().into_iter().map(|v| (v.clone(), Term::Var(v))).collect()
}

fn check_countd<T: Scalar>(q1: &Query<T>, q2: &Query<T>) -> Result<VarMap<T>> {
    for q in [q1, q2] {
        if !q.is_count_distinct() {
            return Err(Error::WrongQueryKind { expected: "count-distinct" });
        }
    }
    head_pin(&q1.output_vars(), &q2.output_vars())
        .ok_or(Error::ArityMismatch { left: q1.disting().len(), right: q2.disting().len() })
}

fn reduced_forms<T: Scalar>(q: &Query<T>, use_flip: bool) -> Result<Option<Vec<(Form, Query<T>)>>> {
    let Some(core) = core_or_empty(q)? else { return Ok(None) };
    let mut forms = vec![(Form::Core, core.clone())];
    if use_flip {
        if let Ok(f) = close_query(&flip(&core)?) {
            forms.push((Form::FlippedCore, f));
        }
    }
    Ok(Some(forms))
}

/// Decides whether two count-distinct queries return the same counts on
/// every database.
pub fn countd_equivalent<T: Scalar>(q1: &Query<T>, q2: &Query<T>) -> Result<Certificate<T>> {
    countd_equivalent_with(q1, q2, &DecisionOptions::default())
}

pub fn countd_equivalent_with<T: Scalar>(
    q1: &Query<T>,
    q2: &Query<T>,
    opts: &DecisionOptions,
) -> Result<Certificate<T>> {
    let pin = check_countd(q1, q2)?;
    let f1 = reduced_forms(q1, opts.use_flip)?;
    let f2 = reduced_forms(q2, opts.use_flip)?;
    let (f1, f2) = match (f1, f2) {
        (Some(a), Some(b)) => (a, b),
        (a, b) => {
            let reason = match (&a, &b) {
                (None, None) => Reason::BothUnsatisfiable,
                (None, _) => Reason::OneUnsatisfiable { which: 1 },
                _ => Reason::OneUnsatisfiable { which: 2 },
            };
            let verdict = if reason == Reason::BothUnsatisfiable { Verdict::Equivalent } else { Verdict::NotEquivalent };
            return Ok(Certificate {
                verdict,
                reason,
                forms: [a.unwrap_or_default(), b.unwrap_or_default()],
                counterexample: None,
            });
        }
    };
    let mut failed = Vec::new();
    // order: (c1, c2), (f1, c2), (c1, f2), (f1, f2)
    for (r, b) in &f2 {
        for (l, a) in &f1 {
            let pair = Pair { left: *l, right: *r };
            if let Some(witness) = find_isomorphism(a, b, &pin) {
                return Ok(Certificate {
                    verdict: Verdict::Equivalent,
                    reason: Reason::Matched { pair, witness },
                    forms: [f1, f2],
                    counterexample: None,
                });
            }
            failed.push(pair);
        }
    }
    Ok(Certificate {
        verdict: Verdict::NotEquivalent,
        reason: Reason::NoMatch { failed },
        forms: [f1, f2],
        counterexample: None,
    })
}

/// Set-semantics equivalence of plain queries with the same kind of
/// certificate.
pub fn cq_equivalent_certified<T: Scalar>(q1: &Query<T>, q2: &Query<T>) -> Result<Certificate<T>> {
    let iso = cq_isomorphism(q1, q2)?;
    let c1 = core_or_empty(q1)?;
    let c2 = core_or_empty(q2)?;
    let forms = [
        c1.iter().map(|q| (Form::Core, q.clone())).collect(),
        c2.iter().map(|q| (Form::Core, q.clone())).collect(),
    ];
    let pair = Pair { left: Form::Core, right: Form::Core };
    let (verdict, reason) = match (iso, &c1, &c2) {
        (Some(_), None, None) => (Verdict::Equivalent, Reason::BothUnsatisfiable),
        (Some(witness), _, _) => (Verdict::Equivalent, Reason::Matched { pair, witness }),
        (None, None, _) => (Verdict::NotEquivalent, Reason::OneUnsatisfiable { which: 1 }),
        (None, _, None) => (Verdict::NotEquivalent, Reason::OneUnsatisfiable { which: 2 }),
        (None, _, _) => (Verdict::NotEquivalent, Reason::NoMatch { failed: vec![pair] }),
    };
    Ok(Certificate { verdict, reason, forms, counterexample: None })
}

/// Which answers to compare when looking for a separating database.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Semantics {
    Set,
    CountDistinct,
}

/// Searches the exhaustive database family over both queries' relations
/// for one where the answers differ. Returns the first such database in
/// enumeration order.
pub fn find_counterexample<T: Scalar>(
    q1: &Query<T>,
    q2: &Query<T>,
    semantics: Semantics,
    max_adom: usize,
    max_facts: usize,
) -> Result<Option<Counterexample<T>>> {
    let mut schema = q1.schema();
    for (r, a) in q2.schema() {
        if let Some(prev) = schema.insert(r.clone(), a) {
            if prev != a {
                return Err(Error::ArityConflict { relation: r.to_string(), expected: prev, found: a });
            }
        }
    }
    let family = DatabaseFamily::<T>::new(&schema, max_adom, max_facts)?;
    let answer = |q: &Query<T>, db: &Database<T>| -> Result<String> {
        Ok(match semantics {
            Semantics::Set => render_set(&eval_set(q, db)?),
            Semantics::CountDistinct => render_map(&eval_countd(q, db)?),
        })
    };
    // Surface kind errors before the parallel scan.
    let empty = Database::new();
    answer(q1, &empty)?;
    answer(q2, &empty)?;
    let hit = (0..family.len()).into_par_iter().find_map_first(|i| {
        let db = family.get(i);
        let (a, b) = (answer(q1, &db).ok()?, answer(q2, &db).ok()?);
        (a != b).then_some(Counterexample { database: db, left: a, right: b })
    });
    Ok(hit)
}

/// Attaches the first separating database found within the bounds.
pub fn attach_counterexample<T: Scalar>(
    cert: &mut Certificate<T>,
    q1: &Query<T>,
    q2: &Query<T>,
    semantics: Semantics,
    max_adom: usize,
    max_facts: usize,
) -> Result<()> {
    cert.counterexample = find_counterexample(q1, q2, semantics, max_adom, max_facts)?;
    Ok(())
}

/// Count-distinct answers of both queries on one database.
pub fn compare_on<T: Scalar>(
    q1: &Query<T>,
    q2: &Query<T>,
    db: &Database<T>,
) -> Result<(BTreeMap<Vec<T>, u64>, BTreeMap<Vec<T>, u64>)> {
    Ok((eval_countd(q1, db)?, eval_countd(q2, db)?))
}
