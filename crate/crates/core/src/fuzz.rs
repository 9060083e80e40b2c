//! Differential fuzzing of the decision procedure against evaluation.

use std::fmt;

use rayon::prelude::*;

use crate::decision::{countd_equivalent_with, find_counterexample, Counterexample, DecisionOptions, Semantics, Verdict};
use crate::error::Result;
use crate::eval::{eval_countd, random_database, render_map};
use crate::gen::{random_pairs, GenConfig, PairKind};
use crate::ir::{Database, Query, Schema};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct FuzzConfig {
    pub max_adom: usize,
    pub max_facts: usize,
    pub num_pairs: usize,
    pub seed: u64,
    /// Check every database within the bounds instead of sampling.
    pub exhaustive: bool,
    /// Databases drawn per pair when not exhaustive.
    pub samples: usize,
    pub decision: DecisionOptions,
    pub gen: GenConfig,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            max_adom: 3,
            max_facts: 3,
            num_pairs: 50,
            seed: 42,
            exhaustive: true,
            samples: 500,
            decision: DecisionOptions::default(),
            gen: GenConfig::default(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DiscrepancyKind {
    /// Declared equivalent, yet a database separates the queries.
    Unsound,
    /// Declared not equivalent, yet no database within the bounds
    /// separates them (only reported for exhaustive runs).
    Unrefuted,
}

#[derive(Clone)]
pub struct Discrepancy<T> {
    pub case: usize,
    pub kind: DiscrepancyKind,
    pub left: Query<T>,
    pub right: Query<T>,
    /// Minimized separating database, for unsound verdicts.
    pub witness: Option<Counterexample<T>>,
}

#[derive(Clone)]
pub struct FuzzReport<T> {
    pub pairs: usize,
    pub equivalent: usize,
    pub not_equivalent: usize,
    pub refuted: usize,
    pub discrepancies: Vec<Discrepancy<T>>,
}

impl<T: Scalar> FuzzReport<T> {
    pub fn is_clean(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

impl<T: Scalar> fmt::Display for FuzzReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pairs: {}", self.pairs)?;
        writeln!(f, "equivalent: {}", self.equivalent)?;
        writeln!(f, "not equivalent: {} ({} with separating database)", self.not_equivalent, self.refuted)?;
        writeln!(f, "discrepancies: {}", self.discrepancies.len())?;
        for d in &self.discrepancies {
            let kind = match d.kind {
                DiscrepancyKind::Unsound => "declared equivalent but answers differ",
                DiscrepancyKind::Unrefuted => "declared not equivalent but no separating database",
            };
            writeln!(f, "case {}: {kind}", d.case)?;
            writeln!(f, "  q1: {}", d.left)?;
            writeln!(f, "  q2: {}", d.right)?;
            if let Some(w) = &d.witness {
                writeln!(f, "  database:")?;
                for line in w.database.to_string().lines() {
                    writeln!(f, "    {line}")?;
                }
                writeln!(f, "  q1 answer: {}", w.left.trim_end().replace('\n', "; "))?;
                writeln!(f, "  q2 answer: {}", w.right.trim_end().replace('\n', "; "))?;
            }
        }
        Ok(())
    }
}

fn answers<T: Scalar>(q1: &Query<T>, q2: &Query<T>, db: &Database<T>) -> Option<(String, String)> {
    let a = render_map(&eval_countd(q1, db).ok()?);
    let b = render_map(&eval_countd(q2, db).ok()?);
    (a != b).then_some((a, b))
}

/// Greedily deletes facts while the queries still disagree.
pub fn minimize<T: Scalar>(q1: &Query<T>, q2: &Query<T>, db: &Database<T>) -> Counterexample<T> {
    let mut current = db.clone();
    'outer: loop {
        for fact in current.facts().collect::<Vec<_>>() {
            let smaller = current.without(&fact.relation, &fact.args);
            if answers(q1, q2, &smaller).is_some() {
                current = smaller;
                continue 'outer;
            }
        }
        break;
    }
    let (left, right) = answers(q1, q2, &current).unwrap_or_default();
    Counterexample { database: current, left, right }
}

fn union_schema<T: Scalar>(q1: &Query<T>, q2: &Query<T>) -> Schema {
    let mut s = q1.schema();
    s.extend(q2.schema());
    s
}

fn sampled_counterexample<T: Scalar>(
    q1: &Query<T>,
    q2: &Query<T>,
    cfg: &FuzzConfig,
    case: usize,
) -> Option<Counterexample<T>> {
    let schema = union_schema(q1, q2);
    (0..cfg.samples).find_map(|j| {
        let seed = cfg.seed.wrapping_mul(1_000_003).wrapping_add((case * cfg.samples + j) as u64);
        let db = random_database(&schema, cfg.max_adom, cfg.max_facts, seed);
        answers(q1, q2, &db).map(|(left, right)| Counterexample { database: db, left, right })
    })
}

enum Outcome<T> {
    Agree { verdict: Verdict, refuted: bool },
    Disagree(Discrepancy<T>),
}

/// Runs the decision procedure on generated pairs and checks each verdict
/// against count-distinct evaluation.
pub fn run_fuzz<T: Scalar>(cfg: &FuzzConfig) -> Result<FuzzReport<T>> {
    let pairs = random_pairs::<T>(&cfg.gen, cfg.num_pairs, cfg.seed);
    let outcomes: Vec<Result<Outcome<T>>> = pairs
        .par_iter()
        .enumerate()
        .map(|(case, p)| {
            let cert = countd_equivalent_with(&p.left, &p.right, &cfg.decision)?;
            let found = if cfg.exhaustive {
                find_counterexample(&p.left, &p.right, Semantics::CountDistinct, cfg.max_adom, cfg.max_facts)?
            } else {
                sampled_counterexample(&p.left, &p.right, cfg, case)
            };
            let disagree = |kind, witness| {
                Outcome::Disagree(Discrepancy { case, kind, left: p.left.clone(), right: p.right.clone(), witness })
            };
            Ok(match (cert.verdict, found) {
                (Verdict::Equivalent, Some(c)) => {
                    disagree(DiscrepancyKind::Unsound, Some(minimize(&p.left, &p.right, &c.database)))
                }
                (Verdict::NotEquivalent, None) if cfg.exhaustive => disagree(DiscrepancyKind::Unrefuted, None),
                (v, found) => Outcome::Agree { verdict: v, refuted: found.is_some() },
            })
        })
        .collect();
    let mut report =
        FuzzReport { pairs: pairs.len(), equivalent: 0, not_equivalent: 0, refuted: 0, discrepancies: Vec::new() };
    for o in outcomes {
        match o? {
            Outcome::Agree { verdict: Verdict::Equivalent, .. } => report.equivalent += 1,
            Outcome::Agree { verdict: Verdict::NotEquivalent, refuted } => {
                report.not_equivalent += 1;
                report.refuted += usize::from(refuted);
            }
            Outcome::Disagree(d) => {
                match d.kind {
                    DiscrepancyKind::Unsound => report.equivalent += 1,
                    DiscrepancyKind::Unrefuted => report.not_equivalent += 1,
                }
                report.discrepancies.push(d);
            }
        }
    }
    Ok(report)
}

/// Pair kinds whose verdict is known in advance, for callers that want to
/// report them separately.
pub fn expected_equivalent(kind: PairKind) -> Option<bool> {
    match kind {
        PairKind::Identical | PairKind::Renamed | PairKind::CoreReduced | PairKind::Flipped => Some(true),
        PairKind::FreshRelation => Some(false),
        PairKind::Independent | PairKind::Mutated => None,
    }
}
