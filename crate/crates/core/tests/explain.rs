mod common;

use std::time::Instant;

use common::*;
use num_rational::BigRational;
use probex::explain::*;
use probex::fixtures::{self, NEG, POS};
use probex::model::ExplanationProblem;
use probex::scalar::threshold_rational;
use probex::space::{FeatureSet, FeatureSpace};
use probex::{seed, Error};
use rand::Rng;

fn dt1() -> Explainer {
    Explainer::new(problem(fixtures::dt1(), &[1, 0]))
}

fn exact_opts(tau: f64, order: OrderPolicy, seed_set: SeedSet) -> LmpaxpOptions {
    LmpaxpOptions {
        tau,
        estimator: Estimator::Exact,
        seed_set,
        order,
        ..Default::default()
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn weak_axp_queries() {
    for engine in [Engine::Sat, Engine::BruteForce] {
        let mut e = dt1();
        assert!(e.is_weak_axp(&set(&[0, 1]), engine).unwrap());
        assert!(e.is_weak_axp(&set(&[0]), engine).unwrap());
        assert!(!e.is_weak_axp(&set(&[1]), engine).unwrap());
    }
}

#[test]
fn axp_extraction() {
    for order in permutations(2) {
        assert_eq!(dt1().extract_axp(&order, Engine::Sat).unwrap().features, set(&[0]));
        let mut rf = Explainer::new(problem(fixtures::rf1(), &[1, 1]));
        assert_eq!(rf.extract_axp(&order, Engine::Sat).unwrap().features, set(&[0]));
    }
    let mut c = Explainer::new(problem(fixtures::constant(3, NEG), &[0, 1, 0]));
    assert!(c.extract_axp(&[0, 1, 2], Engine::Sat).unwrap().is_empty());
}

#[test]
fn weak_paxp_queries() {
    let mut e = dt1();
    let (_, ev) = e.is_weak_paxp(&set(&[]), 0.75, &Estimator::Exact, 0).unwrap();
    assert_eq!(ev.rational(), q(3, 4));
    assert!(e.is_weak_paxp(&set(&[]), 0.75, &Estimator::Exact, 0).unwrap().0);
    assert!(!e.is_weak_paxp(&set(&[]), 0.76, &Estimator::Exact, 0).unwrap().0);
    let (ok, ev) = e.is_weak_paxp(&set(&[1]), 0.95, &Estimator::Exact, 0).unwrap();
    assert!(!ok);
    assert_eq!(ev.rational(), q(1, 2));
    assert!(e.is_weak_paxp(&set(&[]), 0.0, &Estimator::Exact, 0).is_err());
}

#[test]
fn tau_one_is_weak_axp() {
    for s in 0..5 {
        let space = FeatureSpace::ranges(&[2, 3, 2, 2]).unwrap();
        let m = fixtures::random_forest_model(space, 5, 3, 3, &mut seed::rng(s));
        let mut e = Explainer::new(problem(m, &[1, 2, 2, 1]));
        for mask in 0u32..16 {
            let x: FeatureSet = (0..4).filter(|i| mask >> i & 1 == 1).collect();
            let weak = e.is_weak_axp(&x, Engine::Sat).unwrap();
            assert_eq!(e.is_weak_paxp(&x, 1.0, &Estimator::Exact, 0).unwrap().0, weak);
        }
    }
}

#[test]
fn lmpaxp_examples() {
    for seed_set in [SeedSet::All, SeedSet::Axp] {
        for order in [OrderPolicy::Lexicographic, OrderPolicy::Explicit(vec![1, 0]), OrderPolicy::Heuristic] {
            let e = dt1().extract_lmpaxp(&exact_opts(0.95, order.clone(), seed_set)).unwrap();
            assert_eq!(e.features, set(&[0]));
            assert_eq!(e.precision.unwrap().rational(), q(1, 1));
            assert_eq!(e.kind, ExplanationKind::LmPaxp);
            let e = dt1().extract_lmpaxp(&exact_opts(0.7, order, seed_set)).unwrap();
            assert!(e.is_empty());
            assert_eq!(e.precision.unwrap().rational(), q(3, 4));
        }
    }
}

#[test]
fn nothing_removable_keeps_the_seed() {
    // At τ = 1 on an AXp no deletion can keep precision 1.
    let m = fixtures::random_forest_model(FeatureSpace::boolean(6), 7, 3, 2, &mut seed::rng(12));
    let p = problem(m, &[1, 0, 1, 1, 0, 0]);
    let axp = Explainer::new(p.clone()).extract_axp(&[0, 1, 2, 3, 4, 5], Engine::Sat).unwrap();
    let e = Explainer::new(p)
        .extract_lmpaxp(&exact_opts(1.0, OrderPolicy::Lexicographic, SeedSet::Axp))
        .unwrap();
    assert_eq!(e.features, axp.features);
    assert!(e.trace.iter().all(|t| !t.removed));
}

#[test]
fn axp_enumeration() {
    let a = dt1().enumerate_axps(10, Engine::Sat).unwrap();
    assert_eq!(a, AxpSet { axps: vec![set(&[0])], complete: true });
    let mut d = Explainer::new(problem(fixtures::disjunction(), &[1, 1]));
    let a = d.enumerate_axps(10, Engine::Sat).unwrap();
    assert_eq!(a.axps, vec![set(&[0]), set(&[1])]);
    let a = d.enumerate_axps(1, Engine::Sat).unwrap();
    assert!(!a.complete && a.axps.len() == 1);
    let mut c = Explainer::new(problem(fixtures::constant(2, POS), &[0, 0]));
    assert_eq!(c.enumerate_axps(10, Engine::BruteForce).unwrap().axps, vec![set(&[])]);
    assert!(dt1().enumerate_axps(0, Engine::Sat).is_err());
}

#[test]
fn ffa_reports() {
    let one = AxpSet { axps: vec![set(&[0])], complete: true };
    let r = ffa(3, &one).unwrap();
    assert_eq!(r.values(), vec![1.0, 0.0, 0.0]);
    let two = AxpSet { axps: vec![set(&[0]), set(&[1])], complete: true };
    let r = ffa(2, &two).unwrap();
    assert_eq!(r.values(), vec![0.5, 0.5]);
    assert_eq!(ffaxp_set(&r), (set(&[0, 1]), true));
    assert!(matches!(ffa(2, &AxpSet { axps: vec![], complete: true }), Err(Error::EmptyAxpSet)));

    let r = dt1().ffa_report(100, Engine::Sat).unwrap();
    assert_eq!(r.values(), vec![1.0, 0.0]);
    assert_eq!(ffaxp_set(&r).0, set(&[0]));
    let mut c = Explainer::new(problem(fixtures::constant(2, POS), &[0, 1]));
    let r = c.ffa_report(100, Engine::Sat).unwrap();
    assert!(ffaxp_set(&r).0.is_empty());
}

#[test]
fn lmpffaxp_examples() {
    let mut e = dt1();
    let r = e.ffa_report(100, Engine::Sat).unwrap();
    let opts = exact_opts(0.95, OrderPolicy::Ffa, SeedSet::All);
    let x = e.extract_lmpffaxp(&opts, &r).unwrap();
    assert_eq!(x.features, set(&[0]));
    assert_eq!(x.kind, ExplanationKind::LmPffAxp);
    let x = e.extract_lmpffaxp(&LmpaxpOptions { tau: 0.7, ..opts.clone() }, &r).unwrap();
    assert!(x.is_empty());

    let mut d = Explainer::new(problem(fixtures::disjunction(), &[1, 1]));
    let r = d.ffa_report(100, Engine::Sat).unwrap();
    let x = d.extract_lmpffaxp(&LmpaxpOptions { tau: 1.0, ..opts }, &r).unwrap();
    // Equal scores: x1 is visited first and dropped.
    assert_eq!(x.features, set(&[1]));
}

#[test]
fn brute_force_oracles() {
    let p = problem(fixtures::dt1(), &[1, 0]);
    assert_eq!(min_paxp_bruteforce(&p, 0.95, 1 << 20).unwrap().features, set(&[0]));
    assert!(min_paxp_bruteforce(&p, 0.7, 1 << 20).unwrap().is_empty());
    assert!(is_paxp_bruteforce(&p, &set(&[0]), 0.95, 1 << 20).unwrap());
    assert!(!is_paxp_bruteforce(&p, &set(&[0, 1]), 0.95, 1 << 20).unwrap());
    assert!(!is_paxp_bruteforce(&p, &set(&[1]), 0.95, 1 << 20).unwrap());
    let ev = exact_precision_bruteforce(&p, &set(&[]), 1 << 20).unwrap();
    assert_eq!(ev.rational(), q(3, 4));
    assert!(matches!(
        exact_precision_bruteforce(&p, &set(&[]), 2),
        Err(Error::CeilingExceeded { .. })
    ));
}

#[test]
fn min_paxp_at_tau_one_is_a_minimum_axp() {
    for s in 0..8 {
        let m = fixtures::random_forest_model(FeatureSpace::boolean(7), 5, 3, 2, &mut seed::rng(s));
        let v: Vec<i64> = (0..7).map(|i| (s as i64 + i) % 2).collect();
        let p = problem(m, &v);
        let axps = Explainer::new(p.clone()).enumerate_axps(1000, Engine::Sat).unwrap();
        let smallest = axps.axps.iter().map(|a| a.len()).min().unwrap();
        assert_eq!(min_paxp_bruteforce(&p, 1.0, 1 << 20).unwrap().len(), smallest);
    }
}

fn random_problems(count: u64) -> Vec<ExplanationProblem> {
    let mut out = Vec::new();
    for s in 0..count {
        let mut rng = seed::rng(1000 + s);
        let space = FeatureSpace::ranges(&[2, 3, 2, 2, 3, 2]).unwrap();
        let m = match s % 3 {
            0 => fixtures::random_tree_model(space.clone(), 4, 2, &mut rng),
            1 => fixtures::random_forest_model(space.clone(), 5, 3, 3, &mut rng),
            _ => fixtures::random_forest_model(FeatureSpace::boolean(8), 7, 3, 2, &mut rng),
        };
        let v: Vec<i64> = m.space.domains().iter().map(|d| d[rng.random_range(0..d.len())]).collect();
        out.push(problem(m, &v));
    }
    out
}

#[test]
fn weak_axp_is_monotone() {
    let mut rng = seed::rng(77);
    for p in random_problems(9) {
        let m = p.space().num_features();
        let mut e = Explainer::new(p);
        for _ in 0..30 {
            let small: FeatureSet = (0..m).filter(|_| rng.random_bool(0.4)).collect();
            let mut big = small.clone();
            big.extend((0..m).filter(|_| rng.random_bool(0.5)));
            if e.is_weak_axp(&small, Engine::Sat).unwrap() {
                assert!(e.is_weak_axp(&big, Engine::Sat).unwrap());
            }
        }
    }
}

#[test]
fn axps_are_subset_minimal() {
    for p in random_problems(9) {
        let m = p.space().num_features();
        let order: Vec<usize> = (0..m).rev().collect();
        let mut e = Explainer::new(p.clone());
        let x = e.extract_axp(&order, Engine::Sat).unwrap().features;
        assert!(e.is_weak_axp(&x, Engine::BruteForce).unwrap());
        for &j in &x {
            let mut y = x.clone();
            y.remove(&j);
            assert!(!e.is_weak_axp(&y, Engine::BruteForce).unwrap());
        }
        assert!(is_paxp_bruteforce(&p, &x, 1.0, 1 << 20).unwrap());
    }
}

#[test]
fn lmpaxp_contract_and_size_ordering() {
    for p in random_problems(9) {
        let table = PrecisionTable::build(&p, 1 << 20).unwrap();
        for tau in [0.6, 0.8, 0.9, 0.95] {
            let t = threshold_rational(tau);
            let min = min_paxp_bruteforce(&p, tau, 1 << 20).unwrap();
            let mut e = Explainer::new(p.clone());
            let axp = e.extract_axp(&(0..p.space().num_features()).collect::<Vec<_>>(), Engine::Sat).unwrap();
            let x = e
                .extract_lmpaxp(&exact_opts(tau, OrderPolicy::Lexicographic, SeedSet::Axp))
                .unwrap();
            let mask = PrecisionTable::mask(p.space(), &x.features);
            assert!(table.passes(mask, &t));
            for u in p.space().units_of(&x.features) {
                assert!(!table.passes(mask & !(1 << u), &t));
            }
            assert!(min.len() <= x.len() && x.len() <= axp.len());
        }
    }
}

#[test]
fn weak_paxp_is_not_monotone() {
    // Search for X ⊆ Y with precision(X) >= τ > precision(Y).
    let found = random_problems(12).iter().any(|p| {
        let table = PrecisionTable::build(p, 1 << 20).unwrap();
        let n = table.units();
        let t = threshold_rational(0.6);
        (0u32..1 << n).any(|x| {
            table.passes(x, &t) && (0..n).any(|u| x >> u & 1 == 0 && !table.passes(x | 1 << u, &t))
        })
    });
    assert!(found);
}

#[test]
fn estimator_consistency() {
    let p = random_problems(3).remove(1);
    let opts = |estimator, seed| LmpaxpOptions {
        tau: 0.9,
        estimator,
        seed,
        order: OrderPolicy::Lexicographic,
        ..Default::default()
    };
    let a = Explainer::new(p.clone()).extract_lmpaxp(&opts(Estimator::Exact, 1)).unwrap();
    let b = Explainer::new(p.clone()).extract_lmpaxp(&opts(Estimator::Exact, 2)).unwrap();
    assert_eq!(a, b);
    let mc = Estimator::MonteCarlo { epsilon: 0.05, delta: 0.05 };
    let a = Explainer::new(p.clone()).extract_lmpaxp(&opts(mc, 3)).unwrap();
    let b = Explainer::new(p.clone()).extract_lmpaxp(&opts(mc, 3)).unwrap();
    assert_eq!(a, b);
    let amc = Estimator::ApproxCount { epsilon: 0.8, delta: 0.2 };
    let a = Explainer::new(p.clone()).extract_lmpaxp(&opts(amc, 4)).unwrap();
    let b = Explainer::new(p).extract_lmpaxp(&opts(amc, 4)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn expired_deadline_returns_incomplete_seed() {
    let p = random_problems(1).remove(0);
    let mut e = Explainer::new(p.clone());
    e.deadline = Some(Instant::now());
    let x = e.extract_lmpaxp(&exact_opts(0.9, OrderPolicy::Lexicographic, SeedSet::All)).unwrap();
    assert!(!x.complete);
    assert_eq!(x.features, p.space().all_features());
}

#[test]
fn order_dependence_exists() {
    // Exhaustive search over small trees for two deletion orders giving
    // explanations of sizes 2 and 1.
    let mut witness = None;
    'search: for s in 0..400 {
        let m = fixtures::random_tree_model(FeatureSpace::boolean(3), 3, 2, &mut seed::rng(s));
        for bits in 0..8 {
            let v: Vec<i64> = (0..3).map(|i| bits >> i & 1).collect();
            let p = problem(m.clone(), &v);
            let table = PrecisionTable::build(&p, 1 << 20).unwrap();
            for tau in [0.55, 0.6, 0.7, 0.75, 0.8] {
                let t = threshold_rational(tau);
                let sizes: Vec<(Vec<usize>, u32)> = permutations(3)
                    .into_iter()
                    .map(|o| {
                        let r = simulate_deletion(&table, 0b111, &o, &t);
                        (o, r.count_ones())
                    })
                    .collect();
                let two = sizes.iter().find(|(_, c)| *c == 2);
                let one = sizes.iter().find(|(_, c)| *c == 1);
                if let (Some(a), Some(b)) = (two, one) {
                    witness = Some((p, tau, a.0.clone(), b.0.clone()));
                    break 'search;
                }
            }
        }
    }
    let (p, tau, a, b) = witness.expect("an order-dependent fixture exists");
    let run = |order: Vec<usize>| {
        Explainer::new(p.clone())
            .extract_lmpaxp(&exact_opts(tau, OrderPolicy::Explicit(order), SeedSet::All))
            .unwrap()
    };
    assert_eq!(run(a).len(), 2);
    assert_eq!(run(b).len(), 1);
}
