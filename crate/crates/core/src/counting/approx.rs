use std::collections::HashMap;
use std::time::Instant;

use num_bigint::BigUint;
use rand::Rng;

use super::exact::exact_count;
use super::sat::{add_xor, enumerate_bounded, CdclOracle, SatOracle};
use super::{free_support, CountKind, CountResult, CounterConfig};
use crate::encoding::{Assumptions, Formula, Lit, Var};
use crate::error::{Error, Result};
use crate::seed;

/// Cell-size bound `1 + 9.84 (1 + ε/(1+ε)) (1 + 1/ε)²`, truncated.
pub fn pivot(epsilon: f64) -> u64 {
    let inv = 1.0 + 1.0 / epsilon;
    (1.0 + 9.84 * (1.0 + epsilon / (1.0 + epsilon)) * inv * inv) as u64
}

/// Number of hashing rounds `⌈17 log₂(3/δ)⌉`.
pub fn rounds(delta: f64) -> usize {
    (17.0 * (3.0 / delta).log2()).ceil() as usize
}

/// (ε, δ)-approximate projected model count.
///
/// Each round conjoins nested random parity constraints over the free
/// support, searches for the smallest number of constraints that leaves at
/// most `pivot` models in the cell, and scales the cell count by the number
/// of cells. The result is the median over rounds. Small instances are
/// counted exactly.
pub fn approx_count(
    formula: &Formula,
    assumptions: &Assumptions,
    epsilon: f64,
    delta: f64,
    seed: u64,
    config: &CounterConfig,
) -> Result<CountResult> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    let start = Instant::now();
    let deadline = config.total_budget.map(|b| start + b);
    let pivot = config.pivot.unwrap_or_else(|| pivot(epsilon));
    let t = config.rounds.unwrap_or_else(|| rounds(delta)).max(1);

    if let Some(space) = formula.space() {
        let free = space.free_space_size(&assumptions.fixed);
        if free <= BigUint::from(pivot) {
            return exact_count(formula, assumptions, config)
                .map_err(|e| if e.is_timeout() { partial(&[]) } else { e });
        }
    }

    let support = free_support(formula, assumptions);
    let mut calls = 0;
    let mut oracle = CdclOracle::load(formula, config.call_budget);
    let small = enumerate_bounded(&mut oracle, &support, &assumptions.lits, pivot + 1)
        .map_err(|e| if e.is_timeout() { partial(&[]) } else { e })?;
    calls += oracle.calls();
    if small <= pivot {
        return Ok(CountResult {
            count: BigUint::from(small),
            kind: CountKind::Exact,
            oracle_calls: calls,
            elapsed: start.elapsed(),
            seed: None,
        });
    }

    let mut estimates: Vec<BigUint> = Vec::with_capacity(t);
    let mut previous = None;
    for r in 0..t {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(partial(&estimates));
        }
        let mut round = Round::new(formula, assumptions, &support, pivot, seed::derive_seed(seed, &[r as u64]), config);
        let outcome = round.run(previous, deadline);
        calls += round.oracle.calls();
        match outcome {
            Ok(Some((m, cell))) => {
                previous = Some(m);
                estimates.push(BigUint::from(cell) << m);
            }
            Ok(None) => {}
            Err(e) if e.is_timeout() => return Err(partial(&estimates)),
            Err(e) => return Err(e),
        }
    }
    if estimates.is_empty() {
        return Err(Error::Parameter("no hashing round isolated a small cell".into()));
    }
    estimates.sort();
    let count = estimates[estimates.len() / 2].clone();
    Ok(CountResult {
        count,
        kind: CountKind::Approximate { epsilon, delta },
        oracle_calls: calls,
        elapsed: start.elapsed(),
        seed: Some(seed),
    })
}

fn partial(estimates: &[BigUint]) -> Error {
    Error::PartialCount {
        rounds_completed: estimates.len(),
        estimates: estimates.iter().map(ToString::to_string).collect(),
    }
}

/// One hashing round with its private oracle.
struct Round<'a> {
    oracle: CdclOracle,
    assumptions: &'a [Lit],
    support: &'a [Var],
    pivot: u64,
    /// Parity rows `(variables, rhs)`, drawn up front from the round seed.
    rows: Vec<(Vec<Lit>, bool)>,
    activations: Vec<Lit>,
    memo: HashMap<usize, u64>,
}

impl<'a> Round<'a> {
    fn new(
        formula: &Formula,
        assumptions: &'a Assumptions,
        support: &'a [Var],
        pivot: u64,
        seed: u64,
        config: &CounterConfig,
    ) -> Self {
        let mut rng = seed::rng(seed);
        let rows = (0..support.len())
            .map(|_| {
                let vars = support
                    .iter()
                    .filter(|_| rng.random_bool(0.5))
                    .map(|v| v.pos())
                    .collect();
                (vars, rng.random_bool(0.5))
            })
            .collect();
        Self {
            oracle: CdclOracle::load(formula, config.call_budget),
            assumptions: &assumptions.lits,
            support,
            pivot,
            rows,
            activations: Vec::new(),
            memo: HashMap::new(),
        }
    }

    /// Models in the cell cut out by the first `m` parity rows, capped at
    /// `pivot + 1`.
    fn count(&mut self, m: usize) -> Result<u64> {
        if let Some(&c) = self.memo.get(&m) {
            return Ok(c);
        }
        while self.activations.len() < m {
            let a = self.oracle.new_var().pos();
            let (vars, rhs) = &self.rows[self.activations.len()];
            add_xor(&mut self.oracle, vars, *rhs, Some(a));
            self.activations.push(a);
        }
        let mut assumps = self.assumptions.to_vec();
        assumps.extend_from_slice(&self.activations[..m]);
        let c = enumerate_bounded(&mut self.oracle, self.support, &assumps, self.pivot + 1)?;
        self.memo.insert(m, c);
        Ok(c)
    }

    fn small(&mut self, m: usize) -> Result<bool> {
        Ok(self.count(m)? <= self.pivot)
    }

    /// Smallest `m` whose cell holds at most `pivot` models, found by
    /// galloping from the previous round's answer then bisecting. Cells are
    /// nested, so the cell count is non-increasing in `m`.
    fn run(&mut self, previous: Option<usize>, deadline: Option<Instant>) -> Result<Option<(usize, u64)>> {
        let n = self.rows.len();
        if n == 0 {
            return Ok(None);
        }
        let check = || -> Result<()> {
            match deadline {
                Some(d) if Instant::now() >= d => Err(Error::BudgetExhausted(d.elapsed())),
                _ => Ok(()),
            }
        };
        // Invariant: cell(lo) is large, cell(hi) is small.
        let (mut lo, mut hi);
        let start = previous.unwrap_or(1).clamp(1, n);
        check()?;
        if self.small(start)? {
            hi = start;
            lo = 0;
            let mut step = 1;
            while hi > lo + 1 {
                check()?;
                let probe = hi.saturating_sub(step).max(lo + 1);
                if self.small(probe)? {
                    hi = probe;
                    step *= 2;
                } else {
                    lo = probe;
                    break;
                }
            }
        } else {
            lo = start;
            let mut step = 1;
            loop {
                check()?;
                if lo == n {
                    return Ok(None);
                }
                let probe = (lo + step).min(n);
                if self.small(probe)? {
                    hi = probe;
                    break;
                }
                lo = probe;
                step *= 2;
            }
        }
        while hi > lo + 1 {
            check()?;
            let mid = lo + (hi - lo) / 2;
            if self.small(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let cell = self.count(hi)?;
        Ok(Some((hi, cell)))
    }
}
