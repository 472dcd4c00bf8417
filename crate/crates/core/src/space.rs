//! Finite feature spaces, instances and feature sets.
//!
//! Features are indexed from 0. A categorical group is a set of boolean
//! features holding a one-hot encoding of one original attribute: valid
//! points set exactly one member to 1. Explanations keep or drop a group as a
//! single unit, so every feature set handed to the space is first closed
//! under group membership.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::model::Violation;

pub type FeatureSet = BTreeSet<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureSpace {
    names: Vec<String>,
    domains: Vec<Vec<i64>>,
    groups: Vec<Vec<usize>>,
    units: Vec<Vec<usize>>,
    grouped: Vec<bool>,
    unit_of: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub values: Vec<i64>,
    pub label: usize,
}

impl Instance {
    pub fn new(values: Vec<i64>, label: usize) -> Self {
        Self { values, label }
    }
}

impl FeatureSpace {
    /// Space with default names `x1..xm` and no groups.
    pub fn new(domains: Vec<Vec<i64>>) -> Result<Self> {
        let names = (1..=domains.len()).map(|i| format!("x{i}")).collect();
        Self::with_groups(names, domains, Vec::new())
    }

    pub fn boolean(m: usize) -> Self {
        Self::new(vec![vec![0, 1]; m]).expect("boolean domains are valid")
    }

    /// `{1..=d}` for each size `d`.
    pub fn ranges(sizes: &[usize]) -> Result<Self> {
        Self::new(sizes.iter().map(|&d| (1..=d as i64).collect()).collect())
    }

    pub fn with_groups(
        names: Vec<String>,
        domains: Vec<Vec<i64>>,
        groups: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let m = domains.len();
        let mut group_of = vec![None; m];
        for (g, members) in groups.iter().enumerate() {
            for &f in members {
                if f < m && group_of[f].is_none() {
                    group_of[f] = Some(g);
                }
            }
        }
        let mut unit_of = vec![usize::MAX; m];
        let mut units: Vec<Vec<usize>> = Vec::new();
        let mut grouped = Vec::new();
        for i in 0..m {
            if unit_of[i] != usize::MAX {
                continue;
            }
            let members = match group_of[i] {
                Some(g) => {
                    let mut g: Vec<usize> = groups[g].iter().copied().filter(|&f| f < m).collect();
                    g.sort_unstable();
                    g.dedup();
                    g
                }
                None => vec![i],
            };
            for &f in &members {
                unit_of[f] = units.len();
            }
            grouped.push(group_of[i].is_some());
            units.push(members);
        }
        let space = Self {
            names,
            domains,
            groups,
            units,
            grouped,
            unit_of,
        };
        space.check().map_err(Error::Invalid)?;
        Ok(space)
    }

    /// Structural invariants: non-empty duplicate-free domains, disjoint
    /// boolean groups, one name per feature.
    pub fn check(&self) -> std::result::Result<(), Violation> {
        if self.names.len() != self.domains.len() {
            return Err(Violation::new(
                "feature_space.names",
                format!(
                    "{} names for {} features",
                    self.names.len(),
                    self.domains.len()
                ),
            ));
        }
        for (i, d) in self.domains.iter().enumerate() {
            if d.is_empty() {
                return Err(Violation::new(
                    format!("feature_space.domains[{i}]"),
                    "empty domain",
                ));
            }
            let set: BTreeSet<_> = d.iter().collect();
            if set.len() != d.len() {
                return Err(Violation::new(
                    format!("feature_space.domains[{i}]"),
                    "duplicate domain value",
                ));
            }
        }
        let mut seen = BTreeSet::new();
        for (g, members) in self.groups.iter().enumerate() {
            if members.is_empty() {
                return Err(Violation::new(
                    format!("feature_space.groups[{g}]"),
                    "empty group",
                ));
            }
            for &f in members {
                if f >= self.domains.len() {
                    return Err(Violation::new(
                        format!("feature_space.groups[{g}]"),
                        format!("feature {f} out of range"),
                    ));
                }
                if !seen.insert(f) {
                    return Err(Violation::new(
                        format!("feature_space.groups[{g}]"),
                        format!("feature {f} belongs to two groups"),
                    ));
                }
                if self.domains[f] != [0, 1] {
                    return Err(Violation::new(
                        format!("feature_space.groups[{g}]"),
                        format!("member {f} is not a {{0,1}} feature"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn num_features(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[Vec<i64>] {
        &self.domains
    }

    pub fn domain(&self, feature: usize) -> &[i64] {
        &self.domains[feature]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, feature: usize) -> &str {
        &self.names[feature]
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Explanation units: singleton features and whole groups, ordered by
    /// smallest member.
    pub fn units(&self) -> &[Vec<usize>] {
        &self.units
    }

    pub fn unit_of(&self, feature: usize) -> usize {
        self.unit_of[feature]
    }

    pub fn is_grouped(&self, unit: usize) -> bool {
        self.grouped[unit]
    }

    /// Number of values a unit can take inside the space.
    pub fn unit_size(&self, unit: usize) -> usize {
        if self.is_grouped(unit) {
            self.units[unit].len()
        } else {
            self.domains[self.units[unit][0]].len()
        }
    }

    pub fn all_features(&self) -> FeatureSet {
        (0..self.num_features()).collect()
    }

    pub fn value_index(&self, feature: usize, value: i64) -> Option<usize> {
        self.domains.get(feature)?.iter().position(|&v| v == value)
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Smallest group-closed superset of `set`.
    pub fn close(&self, set: &FeatureSet) -> Result<FeatureSet> {
        let mut out = FeatureSet::new();
        for &f in set {
            if f >= self.num_features() {
                return Err(Error::UnknownFeature(f));
            }
            out.extend(self.units[self.unit_of[f]].iter().copied());
        }
        Ok(out)
    }

    /// Error if `set` contains only part of a group.
    pub fn check_closed(&self, set: &FeatureSet) -> Result<()> {
        for &f in set {
            if f >= self.num_features() {
                return Err(Error::UnknownFeature(f));
            }
            let unit = self.unit_of[f];
            if !self.units[unit].iter().all(|g| set.contains(g)) {
                return Err(Error::SplitGroup { group: unit });
            }
        }
        Ok(())
    }

    pub fn units_of(&self, set: &FeatureSet) -> BTreeSet<usize> {
        set.iter().map(|&f| self.unit_of[f]).collect()
    }

    pub fn features_of_units<'a>(&self, units: impl IntoIterator<Item = &'a usize>) -> FeatureSet {
        units
            .into_iter()
            .flat_map(|&u| self.units[u].iter().copied())
            .collect()
    }

    /// `|F|`: product of unit sizes.
    pub fn size(&self) -> BigUint {
        self.free_space_size(&FeatureSet::new())
    }

    /// Number of points agreeing with any fixed assignment on `fixed`
    /// (group-closed implicitly).
    pub fn free_space_size(&self, fixed: &FeatureSet) -> BigUint {
        let fixed_units = self.units_of(fixed);
        (0..self.units.len())
            .filter(|u| !fixed_units.contains(u))
            .fold(BigUint::one(), |acc, u| acc * BigUint::from(self.unit_size(u)))
    }

    /// Same as [`free_space_size`](Self::free_space_size) when it fits in `u64`.
    pub fn free_space_size_u64(&self, fixed: &FeatureSet) -> Option<u64> {
        u64::try_from(self.free_space_size(fixed)).ok()
    }

    /// Membership test for a point.
    pub fn contains(&self, point: &[i64]) -> Result<()> {
        if point.len() != self.num_features() {
            return Err(Error::DimensionMismatch {
                expected: self.num_features(),
                got: point.len(),
            });
        }
        for (i, &v) in point.iter().enumerate() {
            if !self.domains[i].contains(&v) {
                return Err(Error::OutOfDomain { feature: i, value: v });
            }
        }
        for (u, members) in self.units.iter().enumerate() {
            if self.is_grouped(u) && members.iter().filter(|&&f| point[f] == 1).count() != 1 {
                return Err(Error::GroupNotOneHot { group: u });
            }
        }
        Ok(())
    }

    /// Write choice `choice` of unit `unit` into `point`.
    pub fn set_unit(&self, point: &mut [i64], unit: usize, choice: usize) {
        let members = &self.units[unit];
        if self.is_grouped(unit) {
            for (k, &f) in members.iter().enumerate() {
                point[f] = i64::from(k == choice);
            }
        } else {
            point[members[0]] = self.domains[members[0]][choice];
        }
    }

    /// Iterator over every point that agrees with `base` on `fixed`.
    pub fn free_points<'a>(&'a self, base: &[i64], fixed: &FeatureSet) -> FreePoints<'a> {
        let fixed_units = self.units_of(fixed);
        let free: Vec<usize> = (0..self.units.len())
            .filter(|u| !fixed_units.contains(u))
            .collect();
        let mut point = base.to_vec();
        for &u in &free {
            self.set_unit(&mut point, u, 0);
        }
        FreePoints {
            space: self,
            counters: vec![0; free.len()],
            free,
            point,
            done: false,
        }
    }
}

pub struct FreePoints<'a> {
    space: &'a FeatureSpace,
    free: Vec<usize>,
    counters: Vec<usize>,
    point: Vec<i64>,
    done: bool,
}

impl Iterator for FreePoints<'_> {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        if self.done {
            return None;
        }
        let out = self.point.clone();
        // Odometer step, last free unit fastest.
        let mut k = self.free.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            let u = self.free[k];
            self.counters[k] += 1;
            if self.counters[k] < self.space.unit_size(u) {
                self.space.set_unit(&mut self.point, u, self.counters[k]);
                break;
            }
            self.counters[k] = 0;
            self.space.set_unit(&mut self.point, u, 0);
        }
        Some(out)
    }
}
