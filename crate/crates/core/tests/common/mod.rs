#![allow(dead_code)]

use std::sync::Arc;

use probex::counting::{CdclOracle, SatOracle};
use probex::encoding::{Formula, Lit, Var};
use probex::model::{ExplanationProblem, Model};
use probex::scalar::Scalar;
use probex::space::{FeatureSet, FeatureSpace};

pub fn set(xs: &[usize]) -> FeatureSet {
    xs.iter().copied().collect()
}

pub fn all_points(space: &FeatureSpace) -> Vec<Vec<i64>> {
    let base: Vec<i64> = space.domains().iter().map(|d| d[0]).collect();
    space.free_points(&base, &FeatureSet::new()).collect()
}

/// Number of points of each class, by evaluating the classifier.
pub fn class_counts<T: Scalar>(model: &Model<T>) -> Vec<u64> {
    let mut counts = vec![0; model.num_classes()];
    for x in all_points(&model.space) {
        counts[model.predict(&x).unwrap()] += 1;
    }
    counts
}

/// Exact precision `(hits, total)` of `fixed` by direct enumeration of the
/// whole space.
pub fn brute_precision<T: Scalar>(p: &ExplanationProblem<T>, fixed: &FeatureSet) -> (u64, u64) {
    let v = &p.instance.values;
    let (mut hits, mut total) = (0, 0);
    for x in all_points(p.space()) {
        if fixed.iter().all(|&i| x[i] == v[i]) {
            total += 1;
            if p.model.predict(&x).unwrap() == p.label() {
                hits += 1;
            }
        }
    }
    (hits, total)
}

pub fn problem<T: Scalar>(model: Model<T>, v: &[i64]) -> ExplanationProblem<T> {
    ExplanationProblem::for_point(Arc::new(model), v.to_vec()).unwrap()
}

/// Assignments of `vars` (as 0/1 patterns) that extend to a model of the
/// formula's clauses, found by one solver call per pattern.
pub fn projected_models(f: &Formula, vars: &[Var]) -> Vec<u64> {
    assert!(vars.len() <= 16);
    let mut o = CdclOracle::load(f, None);
    (0..1u64 << vars.len())
        .filter(|&bits| {
            let lits: Vec<Lit> = vars
                .iter()
                .enumerate()
                .map(|(i, &v)| if bits >> i & 1 == 1 { v.pos() } else { v.neg() })
                .collect();
            o.solve(&lits).unwrap()
        })
        .collect()
}

pub fn satisfiable_at(f: &Formula, point: &[i64]) -> bool {
    let lits: Vec<Lit> = point
        .iter()
        .enumerate()
        .map(|(i, &v)| f.input_lit(i, v).unwrap())
        .collect();
    CdclOracle::load(f, None).solve(&lits).unwrap()
}

/// Deletion pass simulated on exact precisions from a table: the reference
/// behaviour of a one-pass extraction with revisits, independent of the
/// library's implementation.
pub fn simulate_deletion(
    table: &probex::explain::PrecisionTable,
    start: u32,
    order: &[usize],
    tau: &num_rational::BigRational,
) -> u32 {
    let mut s = start;
    loop {
        let before = s;
        for &u in order {
            if s >> u & 1 == 1 && table.passes(s & !(1 << u), tau) {
                s &= !(1 << u);
            }
        }
        if s == before {
            return s;
        }
    }
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}
