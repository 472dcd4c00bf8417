//! Exact and (ε, δ)-approximate projected model counting, and conversion of
//! counts to explanation precision.

mod approx;
mod exact;
mod sat;

use std::time::Duration;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::encoding::{Assumptions, Formula, Var};
use crate::scalar::Scalar;
use crate::space::{FeatureSet, FeatureSpace};

pub use approx::{approx_count, pivot, rounds};
pub use exact::exact_count;
pub use sat::{add_xor, enumerate_bounded, CdclOracle, SatOracle};

/// Default largest free space that exact counting accepts.
pub const DEFAULT_CEILING: u64 = 1 << 20;

/// Free spaces at most this large are counted by a point sweep; larger ones
/// by blocking-clause enumeration.
pub const SWEEP_LIMIT: u64 = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct CounterConfig {
    pub ceiling: u64,
    /// Wall-clock limit for one SAT call.
    pub call_budget: Option<Duration>,
    /// Wall-clock limit for one counting invocation.
    pub total_budget: Option<Duration>,
    /// Cell-size bound; `None` derives it from ε.
    pub pivot: Option<u64>,
    /// Number of hashing rounds; `None` derives it from δ.
    pub rounds: Option<usize>,
}

impl Default for CounterConfig {
    fn default() -> Self {
        Self {
            ceiling: DEFAULT_CEILING,
            call_budget: None,
            total_budget: None,
            pivot: None,
            rounds: None,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum CountKind {
    Exact,
    Approximate { epsilon: f64, delta: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountResult {
    pub count: BigUint,
    pub kind: CountKind,
    pub oracle_calls: u64,
    pub elapsed: Duration,
    pub seed: Option<u64>,
}

/// Machine-readable form of a [`CountResult`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub count: String,
    pub kind: String,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
    pub oracle_calls: u64,
    pub elapsed_ms: u64,
}

impl CountResult {
    pub fn record(&self) -> CountRecord {
        let (kind, epsilon, delta) = match self.kind {
            CountKind::Exact => ("exact", None, None),
            CountKind::Approximate { epsilon, delta } => ("approximate", Some(epsilon), Some(delta)),
        };
        CountRecord {
            count: self.count.to_string(),
            kind: kind.into(),
            epsilon,
            delta,
            seed: self.seed,
            oracle_calls: self.oracle_calls,
            elapsed_ms: u64::try_from(self.elapsed.as_millis()).unwrap_or(u64::MAX),
        }
    }
}

/// `η / |free space|`, clamped to `[0, 1]`.
pub fn precision_from_count<T: Scalar>(count: &BigUint, space: &FeatureSpace, fixed: &FeatureSet) -> T {
    let den = space.free_space_size(fixed);
    if count >= &den {
        return T::one();
    }
    T::ratio(count, &den)
}

/// Variables that determine a projected model once the assumptions hold:
/// for each free unit, all but one of its selector variables. Formulas
/// without feature structure use their projection set.
pub(crate) fn free_support(formula: &Formula, assumptions: &Assumptions) -> Vec<Var> {
    let Some(space) = formula.space() else {
        return formula.projection().to_vec();
    };
    let fixed_units = space.units_of(&assumptions.fixed);
    let inputs = formula.inputs();
    let mut support = Vec::new();
    for (u, members) in space.units().iter().enumerate() {
        if fixed_units.contains(&u) {
            continue;
        }
        if space.is_grouped(u) {
            let ones = members.iter().map(|&f| {
                let idx = space.value_index(f, 1).expect("group members are boolean");
                inputs[f][idx]
            });
            support.extend(ones.take(members.len() - 1));
        } else {
            let vars = &inputs[members[0]];
            support.extend_from_slice(&vars[..vars.len() - 1]);
        }
    }
    support
}
