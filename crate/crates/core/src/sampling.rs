//! Monte-Carlo precision estimates with Hoeffding guarantees, and the
//! drop-one probes used to order features.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ExplanationProblem;
use crate::scalar::Scalar;
use crate::seed;
use crate::space::{FeatureSet, FeatureSpace};

/// Default number of samples per feature for [`heuristic_scores`].
pub const DEFAULT_PROBE_BUDGET: usize = 64;

/// Sample mean of a 0/1 success variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub n: usize,
    pub hits: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
}

fn check_tolerances(epsilon: f64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// `⌈ln(2/δ) / (2ε²)⌉`.
pub fn hoeffding_sample_size(epsilon: f64, delta: f64) -> Result<usize> {
    check_tolerances(epsilon, delta)?;
    let n = (2.0 / delta).ln() / (2.0 * epsilon * epsilon);
    if n > usize::MAX as f64 / 2.0 {
        return Err(Error::Parameter(format!("sample size for epsilon {epsilon} is too large")));
    }
    Ok(n.ceil() as usize)
}

/// Point agreeing with `values` on `fixed`, every other unit drawn
/// uniformly (a categorical group picks one hot member).
pub fn sample_free_with<R: Rng + ?Sized>(
    space: &FeatureSpace,
    values: &[i64],
    fixed: &FeatureSet,
    rng: &mut R,
) -> Vec<i64> {
    let fixed_units = space.units_of(fixed);
    let mut point = values.to_vec();
    for u in 0..space.units().len() {
        if !fixed_units.contains(&u) {
            let choice = rng.random_range(0..space.unit_size(u));
            space.set_unit(&mut point, u, choice);
        }
    }
    point
}

pub fn sample_free(space: &FeatureSpace, values: &[i64], fixed: &FeatureSet, seed: u64) -> Vec<i64> {
    sample_free_with(space, values, fixed, &mut seed::rng(seed))
}

fn hits<T: Scalar>(problem: &ExplanationProblem<T>, fixed: &FeatureSet, n: usize, seed: u64) -> usize {
    let mut rng = seed::rng(seed);
    let space = problem.space();
    let model = &problem.model;
    (0..n)
        .filter(|_| {
            let x = sample_free_with(space, &problem.instance.values, fixed, &mut rng);
            model.predict_unchecked(&x) == problem.label()
        })
        .count()
}

/// Hoeffding-sized Monte-Carlo estimate of the precision of `fixed`.
pub fn mc_estimate_precision<T: Scalar>(
    problem: &ExplanationProblem<T>,
    fixed: &FeatureSet,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<Estimate> {
    let n = hoeffding_sample_size(epsilon, delta)?;
    let fixed = problem.space().close(fixed)?;
    let hits = hits(problem, &fixed, n, seed);
    Ok(Estimate {
        mean: hits as f64 / n as f64,
        n,
        hits,
        epsilon,
        delta,
        seed,
    })
}

/// Drop-one probes: for each `i` in `candidates`, the estimated precision of
/// `candidates ∖ unit(i)` from `budget` samples. Higher is safer to drop.
pub fn heuristic_scores<T: Scalar>(
    problem: &ExplanationProblem<T>,
    candidates: &FeatureSet,
    budget: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    if budget == 0 {
        return Err(Error::Parameter("probe budget must be at least one sample".into()));
    }
    let space = problem.space();
    let candidates = space.close(candidates)?;
    Ok(candidates
        .iter()
        .map(|&i| {
            let unit = space.unit_of(i);
            let rest: FeatureSet = candidates
                .iter()
                .copied()
                .filter(|&j| space.unit_of(j) != unit)
                .collect();
            let h = hits(problem, &rest, budget, seed::derive_seed(seed, &[i as u64]));
            (i, h as f64 / budget as f64)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_sizes() {
        assert_eq!(hoeffding_sample_size(0.05, 0.05).unwrap(), 738);
        assert_eq!(hoeffding_sample_size(0.1, 0.05).unwrap(), 185);
        assert_eq!(hoeffding_sample_size(0.5, 0.5).unwrap(), 3);
        assert!(hoeffding_sample_size(0.0, 0.5).is_err());
        assert!(hoeffding_sample_size(0.1, 1.0).is_err());
        assert!(hoeffding_sample_size(0.1, 0.0).is_err());
    }

    #[test]
    fn fully_fixed_sample_is_the_instance() {
        let space = FeatureSpace::ranges(&[4, 5, 4]).unwrap();
        let v = vec![2, 3, 4];
        for s in 0..20 {
            assert_eq!(sample_free(&space, &v, &space.all_features(), s), v);
        }
    }

    #[test]
    fn boolean_marginals_are_fair() {
        let space = FeatureSpace::boolean(3);
        let mut rng = seed::rng(11);
        let mut ones = [0usize; 3];
        for _ in 0..10_000 {
            let x = sample_free_with(&space, &[0, 0, 0], &FeatureSet::new(), &mut rng);
            for (c, v) in ones.iter_mut().zip(x) {
                *c += v as usize;
            }
        }
        for c in ones {
            assert!((c as f64 / 10_000.0 - 0.5).abs() <= 0.05);
        }
    }
}
