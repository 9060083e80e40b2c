mod common;

use std::collections::BTreeSet;

use cdq::eval::{eval_countd, DatabaseFamily};
use cdq::flipset::{check_equal_set, count_dominates, distinct_value_count, equal_set, flip, ComparisonDag};
use cdq::gen::{random_query, GenConfig, Shape};
use cdq::ir::{Term, Var};
use cdq::morphism::{find_homomorphism, find_isomorphism, head_pin};
use cdq::Query;
use common::{all_dags, brute_count, brute_counts, first_difference, q};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn corpus(n: u64, cfg: &GenConfig) -> Vec<Query> {
    (0..n).map(|s| random_query(&mut ChaCha8Rng::seed_from_u64(2000 + s), cfg, Shape::CountDistinct)).collect()
}

fn valid_sets(p: &Query, y: &Var) -> Vec<BTreeSet<Var>> {
    let others: Vec<Var> = p.vars().into_iter().filter(|v| v != y).collect();
    (0..1u32 << others.len())
        .map(|m| {
            let mut s: BTreeSet<Var> =
                (0..others.len()).filter(|i| m >> i & 1 == 1).map(|i| others[i].clone()).collect();
            s.insert(y.clone());
            s
        })
        .filter(|s| check_equal_set(p, s))
        .collect()
}

#[test]
fn equal_sets_are_closed_under_union() {
    let cfg = GenConfig { max_atoms: 4, max_vars: 6, ..GenConfig::default() };
    for p in corpus(150, &cfg) {
        let y = p.count_var().unwrap().clone();
        let valid = valid_sets(&p, &y);
        for a in &valid {
            for b in &valid {
                let u: BTreeSet<Var> = a.union(b).cloned().collect();
                assert!(check_equal_set(&p, &u), "{p}: {a:?} and {b:?}");
            }
        }
        let largest = valid.iter().max_by_key(|s| s.len()).unwrap();
        let found = equal_set(&p, &y).unwrap();
        assert_eq!(&found.members, largest, "{p}");
        assert!(valid.iter().all(|s| s.is_subset(&found.members)));
        if found.len() > 1 {
            assert!(p.disting().iter().all(|x| !found.contains(x)));
        }
    }
}

#[test]
fn flip_properties() {
    let cfg = GenConfig { max_atoms: 4, max_vars: 5, ..GenConfig::default() };
    for p in corpus(200, &cfg) {
        let f = flip(&p).unwrap();
        assert_eq!(flip(&f).unwrap(), p, "involution for {p}");
        let pin = head_pin(p.disting(), f.disting()).unwrap();
        assert!(find_isomorphism(&p, &f, &pin).is_some(), "{p} vs its flip");
    }
}

#[test]
fn flip_preserves_counts_on_small_databases() {
    let cfg = GenConfig { max_atoms: 4, max_vars: 5, ..GenConfig::default() };
    for p in corpus(40, &cfg) {
        let f = flip(&p).unwrap();
        if f == p {
            continue;
        }
        let fam = DatabaseFamily::<cdq::Rational>::new(&p.schema(), 3, 3).unwrap();
        for db in fam.iter() {
            assert_eq!(eval_countd(&p, &db).unwrap(), eval_countd(&f, &db).unwrap(), "{p} on {db}");
        }
    }
}

#[test]
fn counting_formula_small_dags() {
    let y = Var::new("y");
    for dag in all_dags(2) {
        let counts = brute_counts(&dag, &y, 6);
        for (n, &c) in counts.iter().enumerate() {
            assert_eq!(distinct_value_count(&dag, &y, n).unwrap(), c, "{dag:?} n={n}");
        }
    }
    let chain = ComparisonDag::new([], [(Var::new("y"), Var::new("x"), 1), (Var::new("z"), Var::new("y"), 1)]).unwrap();
    assert_eq!(brute_count(&chain, &y, 5), 3);
}

/// Renames a dag's nodes with a suffix so it can serve as the second side.
fn primed(dag: &ComparisonDag) -> ComparisonDag {
    let p = |v: &Var| Var::new(&format!("{v}2"));
    ComparisonDag::new(dag.nodes().iter().map(p), dag.edges().iter().map(|(a, b, w)| (p(a), p(b), *w))).unwrap()
}

#[test]
fn dominance_is_sound() {
    let y = Var::new("y");
    let y2 = Var::new("y2");
    let dags = all_dags(2);
    let counts: Vec<Vec<usize>> = dags.iter().map(|d| brute_counts(d, &y, 6)).collect();
    for (i, c) in dags.iter().enumerate() {
        for (j, c2) in dags.iter().enumerate() {
            if count_dominates(c, &y, &primed(c2), &y2) {
                assert!(counts[i].iter().zip(&counts[j]).all(|(a, b)| a <= b), "{c:?} vs {c2:?}");
            }
        }
    }
}

/// `y` in the middle of a three-chain and `y` at the bottom of one take
/// the same number of values, yet neither dag maps into the other, plain
/// or flipped, with `y` fixed. The map-based test is sufficient for
/// dominance but not necessary.
#[test]
fn known_limitation_dominance_is_incomplete() {
    let v = |s: &str| Var::new(s);
    let middle = ComparisonDag::new([], [(v("y"), v("w"), 1), (v("z"), v("y"), 1)]).unwrap();
    let bottom = ComparisonDag::new([], [(v("z2"), v("y2"), 1), (v("w2"), v("z2"), 1)]).unwrap();
    for n in 0..=6 {
        assert_eq!(brute_count(&middle, &v("y"), n), brute_count(&bottom, &v("y2"), n));
    }
    assert!(!count_dominates(&middle, &v("y"), &bottom, &v("y2")));
}

#[test]
fn spec_style_examples() {
    let p = q("q(x, countd(y)) :- R(x, y), R(x, z), y < z.");
    assert_eq!(flip(&p).unwrap().to_string(), "q(x, countd(y)) :- R(x, y), R(x, z), z < y.");
}

/// `{y, w}` is an equal set, since `z` is not a group-by variable and may
/// move freely. Reversing `w < y` changes the count, so flip leaves the
/// query alone.
#[test]
fn coupled_equal_set_is_not_flipped() {
    let p = q("q(countd(y)) :- R(z, w), R(z, y), w < y.");
    let swapped = p.with_comparisons(p.comparisons().iter().map(|c| c.reversed()).collect());
    let stripped = p.with_comparisons(Default::default());
    let pin = |a: &str, b: &str| [(Var::new(a), Term::var(b))].into_iter().collect();
    assert!(find_homomorphism(&stripped, &stripped, &pin("y", "w")).is_some());
    assert!(find_homomorphism(&stripped, &stripped, &pin("w", "y")).is_some());
    let set: BTreeSet<Var> = [Var::new("y"), Var::new("w")].into();
    assert!(check_equal_set(&p, &set));
    assert_eq!(equal_set(&p, &Var::new("y")).unwrap().members, set);
    let db = first_difference(&p.schema(), 3, 4, |db| eval_countd(&p, db).unwrap() != eval_countd(&swapped, db).unwrap());
    assert!(db.is_some());
    assert_eq!(flip(&p).unwrap(), p);
}

/// `{v, y}` and `{y, z}` are both equal sets of `y` but their union is
/// not: with `y < v` dropped, nothing lies above `v`, so `z` cannot be
/// sent there. A largest equal set still exists: with every comparison
/// dropped all five variables are interchangeable.
#[test]
fn known_limitation_equal_sets_not_closed_under_union() {
    let p = q("q(countd(y)) :- B(u), B(v), B(w), B(y), B(z), y < v, z < w.");
    let set = |names: &[&str]| -> BTreeSet<Var> { names.iter().map(|n| Var::new(n)).collect() };
    assert!(check_equal_set(&p, &set(&["v", "y"])));
    assert!(check_equal_set(&p, &set(&["y", "z"])));
    assert!(!check_equal_set(&p, &set(&["v", "y", "z"])));
    assert_eq!(equal_set(&p, &Var::new("y")).unwrap().members, set(&["u", "v", "w", "y", "z"]));
}
