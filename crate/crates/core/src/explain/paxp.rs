use serde::{Deserialize, Serialize};

use super::{Engine, Estimator, Evidence, Explainer, Explanation, ExplanationKind, FfaReport, TraceStep};
use crate::counting::{approx_count, exact_count, CountKind};
use crate::encoding::{assume_fixed, encode_target};
use crate::error::{Error, Result};
use crate::sampling::{heuristic_scores, mc_estimate_precision, DEFAULT_PROBE_BUDGET};
use crate::scalar::Scalar;
use crate::seed;
use crate::space::FeatureSet;

/// Starting set of the deletion pass.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedSet {
    All,
    #[default]
    Axp,
}

/// Order in which the deletion pass visits features.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderPolicy {
    /// Descending drop-one probe score, so the least contributing feature
    /// goes first.
    #[default]
    Heuristic,
    /// Ascending feature-attribution score.
    Ffa,
    /// Ascending feature index.
    Lexicographic,
    /// The given features first, then the rest ascending.
    Explicit(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmpaxpOptions {
    pub tau: f64,
    pub estimator: Estimator,
    pub seed_set: SeedSet,
    pub order: OrderPolicy,
    /// Master seed for probes, heuristic scores and the confirmation
    /// estimate.
    pub seed: u64,
    /// Samples per feature for heuristic scores.
    pub probe_budget: usize,
    /// Recompute heuristic scores after every deletion instead of once.
    pub rescore: bool,
    /// Re-probe kept features whose verdict predates a later deletion, so
    /// that no single deletion from the final set meets the threshold.
    pub revisit: bool,
    /// Engine for the AXp seed and FFA enumeration.
    pub engine: Engine,
    /// AXp enumeration limit for the FFA order.
    pub axp_limit: usize,
}

impl Default for LmpaxpOptions {
    fn default() -> Self {
        Self {
            tau: 0.95,
            estimator: Estimator::Exact,
            seed_set: SeedSet::Axp,
            order: OrderPolicy::Heuristic,
            seed: 0,
            probe_budget: DEFAULT_PROBE_BUDGET,
            rescore: false,
            revisit: true,
            engine: Engine::Sat,
            axp_limit: 1000,
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("tau must lie in (0, 1], got {tau}")))
    }
}

impl<T: Scalar> Explainer<T> {
    fn target_formula(&mut self) -> Result<&crate::encoding::Formula> {
        if self.target.is_none() {
            self.target = Some(encode_target(&self.problem.model, self.problem.label())?);
        }
        Ok(self.target.as_ref().expect("just built"))
    }

    /// Precision of `x` under `estimator`; `seed` keys the random stream of
    /// probabilistic estimators.
    pub fn precision(&mut self, x: &FeatureSet, estimator: &Estimator, seed: u64) -> Result<Evidence> {
        let space = self.problem.space().clone();
        let x = space.close(x)?;
        let values = self.problem.instance.values.clone();
        let config = self.config.clone();
        match *estimator {
            Estimator::Exact => {
                let f = self.target_formula()?;
                let a = assume_fixed(f, &values, &x)?;
                let r = exact_count(f, &a, &config)?;
                Ok(Evidence::Exact {
                    hits: r.count,
                    total: space.free_space_size(&x),
                })
            }
            Estimator::ApproxCount { epsilon, delta } => {
                let f = self.target_formula()?;
                let a = assume_fixed(f, &values, &x)?;
                let r = approx_count(f, &a, epsilon, delta, seed, &config)?;
                let total = space.free_space_size(&x);
                Ok(match r.kind {
                    CountKind::Exact => Evidence::Exact { hits: r.count, total },
                    CountKind::Approximate { .. } => Evidence::Counted {
                        count: r.count,
                        total,
                        epsilon,
                        delta,
                        seed,
                        oracle_calls: r.oracle_calls,
                    },
                })
            }
            Estimator::MonteCarlo { epsilon, delta } => Ok(Evidence::Sampled(mc_estimate_precision(
                &self.problem,
                &x,
                epsilon,
                delta,
                seed,
            )?)),
        }
    }

    /// Whether `x` meets precision `tau`, with the evidence.
    pub fn is_weak_paxp(
        &mut self,
        x: &FeatureSet,
        tau: f64,
        estimator: &Estimator,
        seed: u64,
    ) -> Result<(bool, Evidence)> {
        check_tau(tau)?;
        let ev = self.precision(x, estimator, seed)?;
        Ok((ev.passes(tau), ev))
    }

    /// Order of the units of `s` under `policy`.
    fn visit_order(&mut self, s: &FeatureSet, policy: &OrderPolicy, opts: &LmpaxpOptions, ffa: Option<&FfaReport>) -> Result<Vec<usize>> {
        let space = self.problem.space().clone();
        let units: Vec<usize> = space.units_of(s).into_iter().collect();
        let key_member = |u: usize| space.units()[u][0];
        Ok(match policy {
            OrderPolicy::Lexicographic => units,
            OrderPolicy::Explicit(list) => self
                .unit_order(list)?
                .into_iter()
                .filter(|u| units.contains(u))
                .collect(),
            OrderPolicy::Ffa => {
                let report = ffa.ok_or_else(|| Error::Parameter("FFA order needs an FFA report".into()))?;
                let mut us = units;
                us.sort_by_key(|&u| (report.occurrences[key_member(u)], u));
                us
            }
            OrderPolicy::Heuristic => {
                let scores = heuristic_scores(
                    &self.problem,
                    s,
                    opts.probe_budget,
                    seed::derive_seed(opts.seed, &[seed::tag("heuristic")]),
                )?;
                let score_of = |u: usize| {
                    scores
                        .iter()
                        .find(|(f, _)| *f == key_member(u))
                        .map_or(0.0, |(_, sc)| *sc)
                };
                let mut us = units;
                us.sort_by(|&a, &b| score_of(b).total_cmp(&score_of(a)).then(a.cmp(&b)));
                us
            }
        })
    }

    /// Locally-minimal probabilistic AXp by one deletion pass.
    pub fn extract_lmpaxp(&mut self, opts: &LmpaxpOptions) -> Result<Explanation> {
        check_tau(opts.tau)?;
        let ffa = match opts.order {
            OrderPolicy::Ffa => Some(self.ffa_report(opts.axp_limit, opts.engine)?),
            _ => None,
        };
        let start = match opts.seed_set {
            SeedSet::All => self.problem.space().all_features(),
            SeedSet::Axp => {
                let order = self.axp_seed_order(opts)?;
                self.extract_axp(&order, opts.engine)?.features
            }
        };
        let mut e = self.deletion_pass(start, opts, ffa.as_ref())?;
        e.kind = ExplanationKind::LmPaxp;
        Ok(e)
    }

    /// Deletion pass from a caller-supplied starting set, which should be a
    /// weak PAXp (an AXp or the full feature set).
    pub fn extract_lmpaxp_from(&mut self, start: &FeatureSet, opts: &LmpaxpOptions) -> Result<Explanation> {
        check_tau(opts.tau)?;
        let start = self.problem.space().close(start)?;
        let ffa = match opts.order {
            OrderPolicy::Ffa => Some(self.ffa_report(opts.axp_limit, opts.engine)?),
            _ => None,
        };
        let mut e = self.deletion_pass(start, opts, ffa.as_ref())?;
        e.kind = ExplanationKind::LmPaxp;
        Ok(e)
    }

    /// Feature order used to extract the seeding AXp: lexicographic, or the
    /// explicit list when one is given.
    fn axp_seed_order(&self, opts: &LmpaxpOptions) -> Result<Vec<usize>> {
        Ok(match &opts.order {
            OrderPolicy::Explicit(list) => list.clone(),
            _ => (0..self.problem.space().num_features()).collect(),
        })
    }

    fn probe_seed(master: u64, x: &FeatureSet, purpose: &str) -> u64 {
        let mut tags = vec![seed::tag(purpose)];
        tags.extend(x.iter().map(|&f| f as u64));
        seed::derive_seed(master, &tags)
    }

    pub(crate) fn deletion_pass(
        &mut self,
        start: FeatureSet,
        opts: &LmpaxpOptions,
        ffa: Option<&FfaReport>,
    ) -> Result<Explanation> {
        let space = self.problem.space().clone();
        let mut s = start;
        let mut trace = Vec::new();
        let mut complete = true;
        let mut pending = self.visit_order(&s, &opts.order, opts, ffa)?;
        // Kept units with the trace position of their verdict.
        let mut kept: Vec<(usize, usize)> = Vec::new();
        let mut last_removal = None;
        'passes: loop {
            while !pending.is_empty() {
                let u = pending.remove(0);
                if self.expired() {
                    complete = false;
                    break 'passes;
                }
                let members = &space.units()[u];
                let cand: FeatureSet = s.iter().copied().filter(|f| !members.contains(f)).collect();
                let seed = Self::probe_seed(opts.seed, &cand, "probe");
                match self.is_weak_paxp(&cand, opts.tau, &opts.estimator, seed) {
                    Ok((removed, ev)) => {
                        trace.push(TraceStep {
                            features: members.clone(),
                            removed,
                            evidence: Some(ev),
                        });
                        if removed {
                            s = cand;
                            last_removal = Some(trace.len() - 1);
                            if opts.rescore && opts.order == OrderPolicy::Heuristic && !pending.is_empty() {
                                let rest = space.features_of_units(&pending);
                                let mut fresh = self.visit_order(&s, &opts.order, opts, ffa)?;
                                fresh.retain(|v| space.units()[*v].iter().all(|f| rest.contains(f)));
                                pending = fresh;
                            }
                        } else {
                            kept.push((u, trace.len() - 1));
                        }
                    }
                    Err(e) if e.is_timeout() => {
                        complete = false;
                        break 'passes;
                    }
                    Err(e) => return Err(e),
                }
            }
            if !opts.revisit {
                break;
            }
            let Some(lr) = last_removal else { break };
            let (stale, fresh): (Vec<_>, Vec<_>) = kept.into_iter().partition(|&(_, at)| at < lr);
            kept = fresh;
            if stale.is_empty() {
                break;
            }
            pending = stale.into_iter().map(|(u, _)| u).collect();
        }
        let precision = if complete {
            let seed = Self::probe_seed(opts.seed, &s, "confirm");
            match self.precision(&s, &opts.estimator, seed) {
                Ok(ev) => Some(ev),
                Err(e) if e.is_timeout() => {
                    complete = false;
                    None
                }
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        Ok(Explanation {
            features: s,
            kind: ExplanationKind::LmPaxp,
            tau: Some(opts.tau),
            precision,
            trace,
            complete,
        })
    }
}
