use num_rational::BigRational;

use super::paxp::{LmpaxpOptions, OrderPolicy};
use super::{AxpSet, Engine, Explainer, Explanation, ExplanationKind};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::FeatureSet;

/// Per-feature share of AXps containing the feature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FfaReport {
    /// Number of AXps containing each feature.
    pub occurrences: Vec<usize>,
    pub axp_count: usize,
    pub complete: bool,
}

impl FfaReport {
    pub fn ratio(&self, feature: usize) -> BigRational {
        BigRational::new(self.occurrences[feature].into(), self.axp_count.into())
    }

    pub fn value(&self, feature: usize) -> f64 {
        self.occurrences[feature] as f64 / self.axp_count as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.occurrences.len()).map(|i| self.value(i)).collect()
    }
}

pub fn ffa(num_features: usize, axps: &AxpSet) -> Result<FfaReport> {
    if axps.axps.is_empty() {
        return Err(Error::EmptyAxpSet);
    }
    let mut occurrences = vec![0; num_features];
    for x in &axps.axps {
        for &f in x {
            *occurrences.get_mut(f).ok_or(Error::UnknownFeature(f))? += 1;
        }
    }
    Ok(FfaReport {
        occurrences,
        axp_count: axps.axps.len(),
        complete: axps.complete,
    })
}

/// `{i : ffa(i) > 0}` and whether the report was complete.
pub fn ffaxp_set(report: &FfaReport) -> (FeatureSet, bool) {
    let set = (0..report.occurrences.len())
        .filter(|&i| report.occurrences[i] > 0)
        .collect();
    (set, report.complete)
}

impl<T: Scalar> Explainer<T> {
    pub fn ffa_report(&mut self, limit: usize, engine: Engine) -> Result<FfaReport> {
        let axps = self.enumerate_axps(limit, engine)?;
        ffa(self.problem.space().num_features(), &axps)
    }

    /// The FFAXp as an explanation; `complete` mirrors the report.
    pub fn ffaxp(&mut self, report: &FfaReport) -> Explanation {
        let (features, complete) = ffaxp_set(report);
        Explanation {
            features,
            kind: ExplanationKind::FfAxp,
            tau: None,
            precision: None,
            trace: Vec::new(),
            complete,
        }
    }

    /// Deletion pass seeded with the FFAXp, least attributed features first.
    pub fn extract_lmpffaxp(&mut self, opts: &LmpaxpOptions, report: &FfaReport) -> Result<Explanation> {
        let (start, _) = ffaxp_set(report);
        let opts = LmpaxpOptions {
            order: OrderPolicy::Ffa,
            ..opts.clone()
        };
        let mut e = self.deletion_pass(start, &opts, Some(report))?;
        e.kind = ExplanationKind::LmPffAxp;
        e.complete &= report.complete;
        Ok(e)
    }
}
