//! SAT oracle interface and its CDCL backend.

use std::cell::Cell;
use std::time::{Duration, Instant};

use batsat::{lbool, Callbacks, Solver, SolverInterface, SolverOpts};

use crate::encoding::{Formula, Lit, Var};
use crate::error::{Error, Result};

pub trait SatOracle {
    fn new_var(&mut self) -> Var;

    fn add_clause(&mut self, clause: &[Lit]);

    /// `Ok(true)` when satisfiable under `assumptions`.
    fn solve(&mut self, assumptions: &[Lit]) -> Result<bool>;

    /// Value of `v` in the model of the last satisfiable call.
    fn value(&self, v: Var) -> bool;

    fn calls(&self) -> u64;
}

#[derive(Default)]
struct Deadline {
    at: Cell<Option<Instant>>,
}

impl Callbacks for Deadline {
    fn stop(&self) -> bool {
        self.at.get().is_some_and(|t| Instant::now() >= t)
    }
}

/// Incremental CDCL solver with an optional wall-clock budget per call.
pub struct CdclOracle {
    solver: Solver<Deadline>,
    budget: Option<Duration>,
    calls: u64,
}

impl CdclOracle {
    pub fn new(budget: Option<Duration>) -> Self {
        Self {
            solver: Solver::new(SolverOpts::default(), Deadline::default()),
            budget,
            calls: 0,
        }
    }

    /// Oracle holding every clause of `formula` (structural and PB
    /// translations).
    pub fn load(formula: &Formula, budget: Option<Duration>) -> Self {
        let mut o = Self::new(budget);
        while (o.solver.num_vars() as usize) < formula.num_vars() {
            o.solver.new_var_default();
        }
        for c in formula.all_clauses() {
            o.add_clause(c);
        }
        o
    }

    fn lit(&mut self, l: Lit) -> batsat::Lit {
        while self.solver.num_vars() <= l.var().0 {
            self.solver.new_var_default();
        }
        batsat::Lit::new(batsat::Var::unsafe_from_idx(l.var().0), l.is_positive())
    }
}

impl SatOracle for CdclOracle {
    fn new_var(&mut self) -> Var {
        Var(self.solver.new_var_default().idx())
    }

    fn add_clause(&mut self, clause: &[Lit]) {
        let mut c: Vec<batsat::Lit> = clause.iter().map(|&l| self.lit(l)).collect();
        self.solver.add_clause_reuse(&mut c);
    }

    fn solve(&mut self, assumptions: &[Lit]) -> Result<bool> {
        let assumps: Vec<batsat::Lit> = assumptions.iter().map(|&l| self.lit(l)).collect();
        self.calls += 1;
        self.solver
            .cb_mut()
            .at
            .set(self.budget.map(|b| Instant::now() + b));
        let r = self.solver.solve_limited(&assumps);
        if r == lbool::TRUE {
            Ok(true)
        } else if r == lbool::FALSE {
            Ok(false)
        } else {
            Err(Error::OracleTimeout(self.budget.unwrap_or_default()))
        }
    }

    fn value(&self, v: Var) -> bool {
        self.solver.value_lit(batsat::Lit::new(batsat::Var::unsafe_from_idx(v.0), true)) == lbool::TRUE
    }

    fn calls(&self) -> u64 {
        self.calls
    }
}

/// Adds `⊕ lits = rhs` through a chain of Tseitin XOR gates. With an
/// activation literal `a` the parity only holds under assumption `a`;
/// adding the unit `¬a` later retires it.
pub fn add_xor<O: SatOracle>(oracle: &mut O, lits: &[Lit], rhs: bool, activation: Option<Lit>) {
    let guard = |c: &mut Vec<Lit>| {
        if let Some(a) = activation {
            c.push(!a);
        }
    };
    let Some((&first, rest)) = lits.split_first() else {
        if rhs {
            let mut c = Vec::new();
            guard(&mut c);
            oracle.add_clause(&c);
        }
        return;
    };
    let mut acc = first;
    for &x in rest {
        let t = oracle.new_var().pos();
        // t ↔ acc ⊕ x
        oracle.add_clause(&[!acc, !x, !t]);
        oracle.add_clause(&[acc, x, !t]);
        oracle.add_clause(&[!acc, x, t]);
        oracle.add_clause(&[acc, !x, t]);
        acc = t;
    }
    let mut c = vec![if rhs { acc } else { !acc }];
    guard(&mut c);
    oracle.add_clause(&c);
}

/// Enumerates up to `cap` distinct models projected on `projection`,
/// blocking each one under a fresh activation literal that is retired
/// before returning. Returns the number found (at most `cap`).
pub fn enumerate_bounded<O: SatOracle>(
    oracle: &mut O,
    projection: &[Var],
    assumptions: &[Lit],
    cap: u64,
) -> Result<u64> {
    let act = oracle.new_var().pos();
    let mut assumps = assumptions.to_vec();
    assumps.push(act);
    let mut found = 0;
    while found < cap {
        if !oracle.solve(&assumps)? {
            break;
        }
        found += 1;
        let mut block: Vec<Lit> = projection
            .iter()
            .map(|&v| if oracle.value(v) { v.neg() } else { v.pos() })
            .collect();
        block.push(!act);
        oracle.add_clause(&block);
    }
    oracle.add_clause(&[!act]);
    Ok(found)
}
