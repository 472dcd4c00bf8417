use std::collections::BTreeSet;

use rand::seq::SliceRandom;

use super::brute::{sweep_entails, PrecisionTable, BRUTE_FORCE_UNITS};
use super::{Engine, Explainer, Explanation, ExplanationKind, TraceStep};
use crate::counting::{CdclOracle, SatOracle};
use crate::encoding::{assume_fixed, encode_target};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed;
use crate::space::FeatureSet;

/// Collection of AXps; `complete` is false when enumeration stopped early
/// or was not exhaustive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxpSet {
    pub axps: Vec<FeatureSet>,
    pub complete: bool,
}

impl<T: Scalar> Explainer<T> {
    fn competitors(&mut self) -> Result<&mut Vec<(crate::encoding::Formula, CdclOracle)>> {
        if self.competitors.is_none() {
            let model = &self.problem.model;
            let label = self.problem.label();
            let mut v = Vec::new();
            for j in (0..model.num_classes()).filter(|&j| j != label) {
                let f = encode_target(model, j)?;
                let o = CdclOracle::load(&f, self.config.call_budget);
                v.push((f, o));
            }
            self.competitors = Some(v);
        }
        Ok(self.competitors.as_mut().expect("just built"))
    }

    pub(crate) fn table(&mut self) -> Result<&PrecisionTable> {
        if self.table.is_none() {
            self.table = Some(PrecisionTable::build(&self.problem, self.config.ceiling)?);
        }
        Ok(self.table.as_ref().expect("just built"))
    }

    /// Whether fixing `x` to the instance values entails the predicted class.
    pub fn is_weak_axp(&mut self, x: &FeatureSet, engine: Engine) -> Result<bool> {
        match engine {
            Engine::Sat => {
                let values = self.problem.instance.values.clone();
                for (f, o) in self.competitors()? {
                    let a = assume_fixed(f, &values, x)?;
                    if o.solve(&a.lits)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Engine::BruteForce => {
                let space = self.problem.space();
                let tabulable = space.units().len() <= BRUTE_FORCE_UNITS
                    && space.size() <= num_bigint::BigUint::from(self.config.ceiling);
                if !tabulable {
                    return sweep_entails(&self.problem, x, self.config.ceiling);
                }
                let x = space.close(x)?;
                let space = space.clone();
                Ok(self.table()?.entails(&space, &x))
            }
        }
    }

    /// Units in the order their first member appears in `features`, then any
    /// remaining units ascending.
    pub fn unit_order(&self, features: &[usize]) -> Result<Vec<usize>> {
        let space = self.problem.space();
        let mut seen = BTreeSet::new();
        let mut order = Vec::new();
        for &f in features {
            if f >= space.num_features() {
                return Err(Error::UnknownFeature(f));
            }
            let u = space.unit_of(f);
            if seen.insert(u) {
                order.push(u);
            }
        }
        order.extend((0..space.units().len()).filter(|u| !seen.contains(u)));
        Ok(order)
    }

    /// Deletion-based AXp: starting from every feature, drop each unit in
    /// `order` whose removal keeps the set a weak AXp.
    pub fn extract_axp(&mut self, order: &[usize], engine: Engine) -> Result<Explanation> {
        let units = self.unit_order(order)?;
        let space = self.problem.space().clone();
        let mut s = space.all_features();
        let mut trace = Vec::new();
        for u in units {
            if self.expired() {
                return Err(Error::BudgetExhausted(self.config.total_budget.unwrap_or_default()));
            }
            let members = &space.units()[u];
            let cand: FeatureSet = s.iter().copied().filter(|f| !members.contains(f)).collect();
            let removed = self.is_weak_axp(&cand, engine)?;
            trace.push(TraceStep {
                features: members.clone(),
                removed,
                evidence: None,
            });
            if removed {
                s = cand;
            }
        }
        Ok(Explanation {
            features: s,
            kind: ExplanationKind::Axp,
            tau: None,
            precision: None,
            trace,
            complete: true,
        })
    }

    /// Distinct AXps, at most `limit`. Exhaustive by increasing size when the
    /// space has at most 20 units; otherwise deletion runs under shuffled
    /// orders, reported incomplete.
    pub fn enumerate_axps(&mut self, limit: usize, engine: Engine) -> Result<AxpSet> {
        if limit == 0 {
            return Err(Error::Parameter("AXp enumeration limit must be at least 1".into()));
        }
        let space = self.problem.space().clone();
        let n = space.units().len();
        if n > BRUTE_FORCE_UNITS {
            return self.enumerate_by_orders(limit, engine);
        }
        let mut found: Vec<u32> = Vec::new();
        let mut complete = true;
        'sizes: for k in 0..=n {
            for mask in combinations(n, k) {
                if found.iter().any(|&a| a & mask == a) {
                    continue;
                }
                if self.expired() {
                    return Err(Error::BudgetExhausted(self.config.total_budget.unwrap_or_default()));
                }
                let x = space.features_of_units(&mask_units(mask));
                if self.is_weak_axp(&x, engine)? {
                    if found.len() == limit {
                        complete = false;
                        break 'sizes;
                    }
                    found.push(mask);
                }
            }
        }
        Ok(AxpSet {
            axps: found
                .into_iter()
                .map(|m| space.features_of_units(&mask_units(m)))
                .collect(),
            complete,
        })
    }

    fn enumerate_by_orders(&mut self, limit: usize, engine: Engine) -> Result<AxpSet> {
        let m = self.problem.space().num_features();
        let mut order: Vec<usize> = (0..m).collect();
        let mut rng = seed::rng(seed::derive_seed(0, &[seed::tag("axp-orders")]));
        let mut axps: Vec<FeatureSet> = Vec::new();
        for attempt in 0..limit.saturating_mul(4) {
            match attempt {
                0 => {}
                1 => order.reverse(),
                _ => order.shuffle(&mut rng),
            }
            let x = self.extract_axp(&order, engine)?.features;
            if !axps.contains(&x) {
                axps.push(x);
                if axps.len() == limit {
                    break;
                }
            }
        }
        axps.sort();
        Ok(AxpSet { axps, complete: false })
    }
}

/// `k`-subsets of `0..n` as bit masks, in lexicographic order of their
/// sorted element lists.
pub(crate) fn combinations(n: usize, k: usize) -> impl Iterator<Item = u32> {
    let mut idx: Vec<usize> = (0..k).collect();
    let mut done = k > n;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let mask = idx.iter().fold(0u32, |m, &i| m | (1 << i));
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                done = true;
                break;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(mask)
    })
}

pub(crate) fn mask_units(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask >> b & 1 == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_are_lexicographic() {
        let c: Vec<Vec<usize>> = combinations(4, 2).map(mask_units).collect();
        assert_eq!(
            c,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(combinations(3, 0).collect::<Vec<_>>(), vec![0]);
        assert_eq!(combinations(2, 3).count(), 0);
    }
}
