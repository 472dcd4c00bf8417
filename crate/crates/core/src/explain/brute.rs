//! Ground-truth oracles that evaluate the classifier point by point.

use num_bigint::BigUint;
use num_rational::BigRational;

use super::axp::{combinations, mask_units};
use super::{Evidence, Explanation, ExplanationKind};
use crate::error::{Error, Result};
use crate::model::ExplanationProblem;
use crate::scalar::{threshold_rational, Scalar};
use crate::space::{FeatureSet, FeatureSpace};

/// Largest number of units for subset-exhaustive oracles.
pub const BRUTE_FORCE_UNITS: usize = 20;

fn guard(space: &FeatureSpace, fixed: &FeatureSet, ceiling: u64) -> Result<()> {
    let free = space.free_space_size(fixed);
    if free > BigUint::from(ceiling) {
        return Err(Error::CeilingExceeded {
            size: free.to_string(),
            ceiling,
        });
    }
    Ok(())
}

/// Exact precision of `fixed` by sweeping its free space.
pub fn exact_precision_bruteforce<T: Scalar>(
    problem: &ExplanationProblem<T>,
    fixed: &FeatureSet,
    ceiling: u64,
) -> Result<Evidence> {
    let space = problem.space();
    let fixed = space.close(fixed)?;
    guard(space, &fixed, ceiling)?;
    let label = problem.label();
    let mut hits = 0u64;
    let mut total = 0u64;
    for x in space.free_points(&problem.instance.values, &fixed) {
        total += 1;
        if problem.model.predict_unchecked(&x) == label {
            hits += 1;
        }
    }
    Ok(Evidence::Exact {
        hits: hits.into(),
        total: total.into(),
    })
}

pub(crate) fn sweep_entails<T: Scalar>(problem: &ExplanationProblem<T>, fixed: &FeatureSet, ceiling: u64) -> Result<bool> {
    let space = problem.space();
    let fixed = space.close(fixed)?;
    guard(space, &fixed, ceiling)?;
    let label = problem.label();
    Ok(space
        .free_points(&problem.instance.values, &fixed)
        .all(|x| problem.model.predict_unchecked(&x) == label))
}

/// Exact precision of every unit subset, from one pass over the space.
///
/// A point agrees with the instance on `X` iff `X` is contained in the set
/// of units where it agrees; summing the per-agreement-set histogram over
/// supersets yields the hit count of every `X` at once.
#[derive(Clone, Debug)]
pub struct PrecisionTable {
    units: usize,
    hits: Vec<u64>,
    sizes: Vec<u64>,
}

impl PrecisionTable {
    pub fn build<T: Scalar>(problem: &ExplanationProblem<T>, ceiling: u64) -> Result<Self> {
        let space = problem.space();
        let n = space.units().len();
        if n > BRUTE_FORCE_UNITS {
            return Err(Error::SizeLimit {
                what: "number of features",
                limit: BRUTE_FORCE_UNITS,
            });
        }
        guard(space, &FeatureSet::new(), ceiling)?;
        let v = &problem.instance.values;
        let label = problem.label();
        let mut hits = vec![0u64; 1 << n];
        for x in space.free_points(v, &FeatureSet::new()) {
            if problem.model.predict_unchecked(&x) != label {
                continue;
            }
            let agree = space
                .units()
                .iter()
                .enumerate()
                .filter(|(_, members)| members.iter().all(|&f| x[f] == v[f]))
                .fold(0usize, |m, (u, _)| m | 1 << u);
            hits[agree] += 1;
        }
        for b in 0..n {
            for mask in 0..hits.len() {
                if mask >> b & 1 == 0 {
                    hits[mask] += hits[mask | 1 << b];
                }
            }
        }
        let sizes = (0..n).map(|u| space.unit_size(u) as u64).collect();
        Ok(Self { units: n, hits, sizes })
    }

    pub fn units(&self) -> usize {
        self.units
    }

    pub fn mask(space: &FeatureSpace, x: &FeatureSet) -> u32 {
        space.units_of(x).iter().fold(0, |m, &u| m | 1 << u)
    }

    /// `(hits, total)` for the unit subset `mask`.
    pub fn counts(&self, mask: u32) -> (u64, u64) {
        let total = (0..self.units)
            .filter(|u| mask >> u & 1 == 0)
            .map(|u| self.sizes[u])
            .product();
        (self.hits[mask as usize], total)
    }

    pub fn evidence(&self, mask: u32) -> Evidence {
        let (hits, total) = self.counts(mask);
        Evidence::Exact {
            hits: hits.into(),
            total: total.into(),
        }
    }

    pub fn passes(&self, mask: u32, tau: &BigRational) -> bool {
        let (h, t) = self.counts(mask);
        &BigRational::new(h.into(), t.into()) >= tau
    }

    pub(crate) fn entails(&self, space: &FeatureSpace, x: &FeatureSet) -> bool {
        let (h, t) = self.counts(Self::mask(space, x));
        h == t
    }
}

/// Smallest weak PAXp by exhaustive search in order of size, ties broken
/// lexicographically.
pub fn min_paxp_bruteforce<T: Scalar>(problem: &ExplanationProblem<T>, tau: f64, ceiling: u64) -> Result<Explanation> {
    let table = PrecisionTable::build(problem, ceiling)?;
    min_paxp_from_table(problem.space(), &table, tau)
}

pub(crate) fn min_paxp_from_table(space: &FeatureSpace, table: &PrecisionTable, tau: f64) -> Result<Explanation> {
    let t = threshold_rational(tau);
    let n = table.units();
    let best = (0..=n)
        .flat_map(|k| combinations(n, k))
        .find(|&m| table.passes(m, &t))
        .expect("the full feature set has precision 1");
    Ok(Explanation {
        features: space.features_of_units(&mask_units(best)),
        kind: ExplanationKind::MinPaxp,
        tau: Some(tau),
        precision: Some(table.evidence(best)),
        trace: Vec::new(),
        complete: true,
    })
}

/// Whether `x` is a weak PAXp none of whose proper subsets is one.
pub fn is_paxp_bruteforce<T: Scalar>(
    problem: &ExplanationProblem<T>,
    x: &FeatureSet,
    tau: f64,
    ceiling: u64,
) -> Result<bool> {
    let space = problem.space();
    let x = space.close(x)?;
    let units: Vec<usize> = space.units_of(&x).into_iter().collect();
    if units.len() > BRUTE_FORCE_UNITS {
        return Err(Error::SizeLimit {
            what: "explanation size",
            limit: BRUTE_FORCE_UNITS,
        });
    }
    let t = threshold_rational(tau);
    let passes = |sub: &FeatureSet| -> Result<bool> {
        Ok(exact_precision_bruteforce(problem, sub, ceiling)?.rational() >= t)
    };
    if !passes(&x)? {
        return Ok(false);
    }
    for mask in 0..(1u32 << units.len()) - 1 {
        let picked: Vec<usize> = mask_units(mask).into_iter().map(|i| units[i]).collect();
        if passes(&space.features_of_units(&picked))? {
            return Ok(false);
        }
    }
    Ok(true)
}
