mod common;

use common::*;
use probex::fixtures;
use probex::sampling::*;
use probex::seed;
use probex::space::{FeatureSet, FeatureSpace};
use proptest::prelude::*;

#[test]
fn hoeffding_sizes() {
    // ln(40) / (2 · 0.05²) = 737.78; ln(40) / (2 · 0.1²) = 184.44
    assert_eq!(hoeffding_sample_size(0.05, 0.05).unwrap(), 738);
    assert_eq!(hoeffding_sample_size(0.1, 0.05).unwrap(), 185);
    assert_eq!(hoeffding_sample_size(0.5, 0.5).unwrap(), 3);
    assert!(hoeffding_sample_size(-0.1, 0.05).is_err());
}

#[test]
fn uniform_over_free_cells() {
    // Domains (4,5,4) with the middle feature fixed: 16 equally likely cells.
    let space = FeatureSpace::ranges(&[4, 5, 4]).unwrap();
    let v = [2, 3, 1];
    let mut rng = seed::rng(2024);
    let mut cells = [0f64; 16];
    let n = 10_000;
    for _ in 0..n {
        let x = sample_free_with(&space, &v, &set(&[1]), &mut rng);
        assert_eq!(x[1], 3);
        cells[((x[0] - 1) * 4 + (x[2] - 1)) as usize] += 1.0;
    }
    let expected = n as f64 / 16.0;
    let chi2: f64 = cells.iter().map(|c| (c - expected).powi(2) / expected).sum();
    // Upper 1% point of chi-square with 15 degrees of freedom.
    assert!(chi2 < 30.578, "chi2 = {chi2}");
}

#[test]
fn monte_carlo_on_dt1() {
    let p = problem(fixtures::dt1(), &[1, 0]);
    for s in 0..20 {
        let e = mc_estimate_precision(&p, &set(&[0]), 0.05, 0.05, s).unwrap();
        assert_eq!(e.mean, 1.0);
        let e = mc_estimate_precision(&p, &set(&[0, 1]), 0.05, 0.05, s).unwrap();
        assert_eq!(e.mean, 1.0);
    }
    let covered = (0..200)
        .filter(|&s| {
            let e = mc_estimate_precision(&p, &set(&[1]), 0.05, 0.05, s).unwrap();
            assert_eq!(e.n, 738);
            assert_eq!(e.mean, e.hits as f64 / e.n as f64);
            (e.mean - 0.5).abs() <= 0.05
        })
        .count();
    assert!(covered >= 190, "{covered}/200");
}

#[test]
fn heuristic_scores_on_dt1() {
    let p = problem(fixtures::dt1(), &[1, 0]);
    let scores = heuristic_scores(&p, &set(&[0, 1]), 2000, 5).unwrap();
    assert_eq!(scores.len(), 2);
    let (f0, drop_x1) = scores[0];
    let (f1, drop_x2) = scores[1];
    assert_eq!((f0, f1), (0, 1));
    // Dropping x2 keeps {x1} (precision 1); dropping x1 keeps {x2} (0.5).
    assert_eq!(drop_x2, 1.0);
    assert!((drop_x1 - 0.5).abs() < 0.05);
    assert_eq!(scores, heuristic_scores(&p, &set(&[0, 1]), 2000, 5).unwrap());
    let single = heuristic_scores(&p, &set(&[1]), 4000, 1).unwrap();
    assert_eq!(single.len(), 1);
    assert!((single[0].1 - 0.75).abs() < 0.05);
    assert!(heuristic_scores(&p, &set(&[1]), 0, 1).is_err());
}

#[test]
fn estimates_are_reproducible() {
    let m = fixtures::random_forest_model(FeatureSpace::boolean(8), 5, 3, 2, &mut seed::rng(1));
    let p = problem(m, &[0, 1, 0, 1, 1, 0, 0, 1]);
    let a = mc_estimate_precision(&p, &set(&[0, 3]), 0.1, 0.05, 9).unwrap();
    let b = mc_estimate_precision(&p, &set(&[0, 3]), 0.1, 0.05, 9).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #[test]
    fn samples_stay_in_space_and_keep_fixed_values(
        s in 0u64..1000,
        fixed_mask in 0u32..64,
    ) {
        let names = (0..6).map(|i| format!("f{i}")).collect();
        let domains = vec![vec![1, 2, 3], vec![0, 1], vec![0, 1], vec![0, 1], vec![5, 7], vec![0, 1, 2, 3]];
        let space = FeatureSpace::with_groups(names, domains, vec![vec![1, 2, 3]]).unwrap();
        let v = vec![2, 0, 1, 0, 7, 3];
        let fixed = space.close(&(0..6).filter(|i| fixed_mask >> i & 1 == 1).collect::<FeatureSet>()).unwrap();
        let x = sample_free(&space, &v, &fixed, s);
        prop_assert!(space.contains(&x).is_ok());
        for &i in &fixed {
            prop_assert_eq!(x[i], v[i]);
        }
    }

    #[test]
    fn sample_size_is_antitone(e1 in 0.01f64..0.5, e2 in 0.01f64..0.5, d1 in 0.01f64..0.99, d2 in 0.01f64..0.99) {
        let (elo, ehi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let (dlo, dhi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        prop_assert!(hoeffding_sample_size(elo, d1).unwrap() >= hoeffding_sample_size(ehi, d1).unwrap());
        prop_assert!(hoeffding_sample_size(e1, dlo).unwrap() >= hoeffding_sample_size(e1, dhi).unwrap());
    }
}
