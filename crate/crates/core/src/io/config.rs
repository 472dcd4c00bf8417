//! Run configuration.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::counting::{CounterConfig, DEFAULT_CEILING};
use crate::error::{Error, Result};
use crate::explain::{Engine, Estimator, LmpaxpOptions, OrderPolicy, SeedSet};
use crate::model::Classifier;
use crate::sampling::DEFAULT_PROBE_BUDGET;
use crate::scalar::Scalar;

/// Default precision threshold for tree ensembles.
pub const DEFAULT_TAU: f64 = 0.95;
/// Default precision threshold for binarized networks.
pub const DEFAULT_BNN_TAU: f64 = 0.99;

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Exact,
    Amc,
    #[default]
    Mc,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    #[default]
    Heuristic,
    Ffa,
    Lex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Precision threshold; `None` picks the family preset.
    pub tau: Option<f64>,
    pub estimator: EstimatorKind,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    /// Seconds per oracle call.
    pub call_budget: f64,
    /// Seconds per instance.
    pub total_budget: f64,
    pub ceiling: u64,
    pub order: OrderKind,
    pub seed_set: SeedSet,
    pub probe_budget: usize,
    pub rescore: bool,
    pub revisit: bool,
    pub engine: Engine,
    pub axp_limit: usize,
    /// Include deletion traces in reports.
    pub trace: bool,
    /// Include wall-clock times in reports.
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tau: None,
            estimator: EstimatorKind::Mc,
            epsilon: 0.05,
            delta: 0.05,
            seed: 0,
            call_budget: 120.0,
            total_budget: 600.0,
            ceiling: DEFAULT_CEILING,
            order: OrderKind::Heuristic,
            seed_set: SeedSet::Axp,
            probe_budget: DEFAULT_PROBE_BUDGET,
            rescore: false,
            revisit: true,
            engine: Engine::Sat,
            axp_limit: 1000,
            trace: true,
            timings: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if let Some(t) = self.tau {
            if !(t > 0.0 && t <= 1.0) {
                return bad(format!("tau must lie in (0, 1], got {t}"));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        for (name, b) in [("call budget", self.call_budget), ("total budget", self.total_budget)] {
            if !(b > 0.0 && b.is_finite()) {
                return bad(format!("{name} must be positive, got {b}"));
            }
        }
        if self.probe_budget == 0 || self.axp_limit == 0 || self.ceiling == 0 {
            return bad("probe budget, AXp limit and ceiling must be positive".into());
        }
        Ok(())
    }

    pub fn tau_for<T: Scalar>(&self, classifier: &Classifier<T>) -> f64 {
        self.tau.unwrap_or(match classifier {
            Classifier::Bnn(_) => DEFAULT_BNN_TAU,
            _ => DEFAULT_TAU,
        })
    }

    pub fn estimator(&self) -> Estimator {
        match self.estimator {
            EstimatorKind::Exact => Estimator::Exact,
            EstimatorKind::Amc => Estimator::ApproxCount {
                epsilon: self.epsilon,
                delta: self.delta,
            },
            EstimatorKind::Mc => Estimator::MonteCarlo {
                epsilon: self.epsilon,
                delta: self.delta,
            },
        }
    }

    pub fn counter(&self) -> CounterConfig {
        CounterConfig {
            ceiling: self.ceiling,
            call_budget: Some(Duration::from_secs_f64(self.call_budget)),
            total_budget: Some(Duration::from_secs_f64(self.total_budget)),
            ..CounterConfig::default()
        }
    }

    pub fn total(&self) -> Duration {
        Duration::from_secs_f64(self.total_budget)
    }

    pub fn lmpaxp_options<T: Scalar>(&self, classifier: &Classifier<T>, seed: u64) -> LmpaxpOptions {
        LmpaxpOptions {
            tau: self.tau_for(classifier),
            estimator: self.estimator(),
            seed_set: self.seed_set,
            order: match self.order {
                OrderKind::Heuristic => OrderPolicy::Heuristic,
                OrderKind::Ffa => OrderPolicy::Ffa,
                OrderKind::Lex => OrderPolicy::Lexicographic,
            },
            seed,
            probe_budget: self.probe_budget,
            rescore: self.rescore,
            revisit: self.revisit,
            engine: self.engine,
            axp_limit: self.axp_limit,
        }
    }
}
