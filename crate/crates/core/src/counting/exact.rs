use std::time::Instant;

use num_bigint::BigUint;

use super::sat::{enumerate_bounded, CdclOracle, SatOracle};
use super::{free_support, CountKind, CountResult, CounterConfig, SWEEP_LIMIT};
use crate::encoding::{Assumptions, Formula, VarRole};
use crate::error::{Error, Result};

/// Number of projected models of `formula` under `assumptions`.
///
/// Refuses with [`Error::CeilingExceeded`] when the free space is larger
/// than `config.ceiling` (for formulas without feature structure, when the
/// enumeration passes the ceiling).
pub fn exact_count(formula: &Formula, assumptions: &Assumptions, config: &CounterConfig) -> Result<CountResult> {
    let start = Instant::now();
    let mut oracle = CdclOracle::load(formula, config.call_budget);
    let count = match formula.space() {
        Some(space) => {
            let free = space.free_space_size(&assumptions.fixed);
            let size = u64::try_from(&free).ok().filter(|&s| s <= config.ceiling);
            match size {
                None => {
                    return Err(Error::CeilingExceeded {
                        size: free.to_string(),
                        ceiling: config.ceiling,
                    })
                }
                Some(s) if s <= SWEEP_LIMIT => sweep(formula, assumptions, &mut oracle)?,
                Some(s) => {
                    let support = free_support(formula, assumptions);
                    enumerate_bounded(&mut oracle, &support, &assumptions.lits, s)?
                }
            }
        }
        None => {
            let n = enumerate_bounded(
                &mut oracle,
                formula.projection(),
                &assumptions.lits,
                config.ceiling.saturating_add(1),
            )?;
            if n > config.ceiling {
                return Err(Error::CeilingExceeded {
                    size: format!(">{}", config.ceiling),
                    ceiling: config.ceiling,
                });
            }
            n
        }
    };
    Ok(CountResult {
        count: BigUint::from(count),
        kind: CountKind::Exact,
        oracle_calls: oracle.calls(),
        elapsed: start.elapsed(),
        seed: None,
    })
}

/// One satisfiability check per free point.
fn sweep(formula: &Formula, assumptions: &Assumptions, oracle: &mut CdclOracle) -> Result<u64> {
    let space = formula.space().expect("sweep needs feature structure");
    let mut base: Vec<i64> = space.domains().iter().map(|d| d[0]).collect();
    for l in &assumptions.lits {
        if let VarRole::Input { feature, value } = *formula.role(l.var()) {
            if l.is_positive() {
                base[feature] = value;
            }
        }
    }
    let free: Vec<usize> = space
        .all_features()
        .difference(&space.close(&assumptions.fixed)?)
        .copied()
        .collect();
    let mut count = 0;
    for point in space.free_points(&base, &assumptions.fixed) {
        let mut lits = assumptions.lits.clone();
        lits.extend(free.iter().map(|&f| {
            formula
                .input_lit(f, point[f])
                .expect("free points stay in the domain")
        }));
        if oracle.solve(&lits)? {
            count += 1;
        }
    }
    Ok(count)
}
