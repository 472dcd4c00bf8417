//! Abductive and probabilistic explanations.
//!
//! [`Explainer`] owns the per-problem state (target formulas, incremental
//! solvers for the competing classes) and implements the extraction
//! procedures. The brute-force oracles in [`brute`] work from the classifier
//! alone and serve as ground truth.

pub mod brute;
mod axp;
mod ffa;
mod paxp;

use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::counting::{CdclOracle, CounterConfig};
use crate::encoding::Formula;
use crate::model::ExplanationProblem;
use crate::sampling::Estimate;
use crate::scalar::{clamp_unit, threshold_rational, Scalar};
use crate::space::FeatureSet;

pub use axp::AxpSet;
pub use brute::{exact_precision_bruteforce, is_paxp_bruteforce, min_paxp_bruteforce, PrecisionTable};
pub use ffa::{ffa, ffaxp_set, FfaReport};
pub use paxp::{LmpaxpOptions, OrderPolicy, SeedSet};

/// How weak-AXp queries are decided.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Unsatisfiability of the competing-class formulas under the fixed
    /// features.
    #[default]
    Sat,
    /// Sweep of the free space through the classifier.
    BruteForce,
}

/// How precision is computed for weak-PAXp queries.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Estimator {
    /// Exact projected count of the target formula.
    Exact,
    /// (ε, δ)-approximate projected count.
    ApproxCount { epsilon: f64, delta: f64 },
    /// Hoeffding-sized Monte-Carlo estimate.
    MonteCarlo { epsilon: f64, delta: f64 },
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Exact => "exact",
            Estimator::ApproxCount { .. } => "amc",
            Estimator::MonteCarlo { .. } => "mc",
        }
    }
}

/// Measured precision of a feature set.
#[derive(Clone, Debug, PartialEq)]
pub enum Evidence {
    Exact {
        hits: BigUint,
        total: BigUint,
    },
    Counted {
        count: BigUint,
        total: BigUint,
        epsilon: f64,
        delta: f64,
        seed: u64,
        oracle_calls: u64,
    },
    Sampled(Estimate),
}

impl Evidence {
    /// Precision as an exact fraction, clamped to `[0, 1]`.
    pub fn rational(&self) -> BigRational {
        let (n, d) = match self {
            Evidence::Exact { hits, total } => (hits.clone(), total.clone()),
            Evidence::Counted { count, total, .. } => (count.clone(), total.clone()),
            Evidence::Sampled(e) => (BigUint::from(e.hits), BigUint::from(e.n)),
        };
        clamp_unit(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn value<T: Scalar>(&self) -> T {
        T::from_rational(&self.rational())
    }

    pub fn passes(&self, tau: f64) -> bool {
        self.rational() >= threshold_rational(tau)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Evidence::Exact { .. })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExplanationKind {
    #[serde(rename = "AXp")]
    Axp,
    #[serde(rename = "WeakAXp")]
    WeakAxp,
    #[serde(rename = "LmPAXp")]
    LmPaxp,
    #[serde(rename = "FFAXp")]
    FfAxp,
    #[serde(rename = "LmPFFAXp")]
    LmPffAxp,
    #[serde(rename = "MinPAXp")]
    MinPaxp,
}

/// One deletion probe: the unit tried, whether it was dropped, and the
/// precision measured for the reduced set.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub features: Vec<usize>,
    pub removed: bool,
    pub evidence: Option<Evidence>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Explanation {
    pub features: FeatureSet,
    pub kind: ExplanationKind,
    pub tau: Option<f64>,
    pub precision: Option<Evidence>,
    pub trace: Vec<TraceStep>,
    /// False when a budget cut the extraction short; `features` is then the
    /// best set reached so far.
    pub complete: bool,
}

impl Explanation {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

/// Per-problem extraction context.
pub struct Explainer<T: Scalar = f64> {
    problem: ExplanationProblem<T>,
    pub config: CounterConfig,
    /// Wall-clock limit for the whole extraction.
    pub deadline: Option<Instant>,
    target: Option<Formula>,
    competitors: Option<Vec<(Formula, CdclOracle)>>,
    table: Option<PrecisionTable>,
}

impl<T: Scalar> Explainer<T> {
    pub fn new(problem: ExplanationProblem<T>) -> Self {
        Self::with_config(problem, CounterConfig::default())
    }

    pub fn with_config(problem: ExplanationProblem<T>, config: CounterConfig) -> Self {
        Self {
            problem,
            config,
            deadline: None,
            target: None,
            competitors: None,
            table: None,
        }
    }

    pub fn problem(&self) -> &ExplanationProblem<T> {
        &self.problem
    }

    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}
