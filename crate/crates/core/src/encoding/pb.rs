//! Pseudo-Boolean to CNF translation.
//!
//! Constraints are normalized to `Σ a_i·l_i >= k` with positive saturated
//! coefficients. Cardinality constraints (all `a_i` equal) go through a
//! sequential counter; general ones through a memoized monotone BDD. In both
//! every auxiliary variable is defined by a full equivalence over the
//! constraint's literals.

use std::collections::{BTreeMap, HashMap};

use super::formula::{Cmp, Formula, Lit, Node, PbConstraint, Var};

/// `Σ coeff·lit >= bound` with every coefficient in `1..=bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedPb {
    pub terms: Vec<(i64, Lit)>,
    pub bound: i64,
}

impl NormalizedPb {
    pub fn is_trivially_true(&self) -> bool {
        self.bound <= 0
    }

    pub fn is_unsatisfiable(&self) -> bool {
        self.bound > 0 && self.terms.iter().map(|(a, _)| a).sum::<i64>() < self.bound
    }

    pub fn is_cardinality(&self) -> bool {
        self.terms.windows(2).all(|w| w[0].0 == w[1].0)
    }
}

pub fn normalize(c: &PbConstraint) -> NormalizedPb {
    let sign = match c.cmp {
        Cmp::Ge => 1,
        Cmp::Le => -1,
    };
    // Collect per-variable coefficients on the positive literal.
    let mut per_var: BTreeMap<Var, i64> = BTreeMap::new();
    let mut bound = sign * c.bound;
    for &(a, l) in &c.terms {
        let a = sign * a;
        if l.is_positive() {
            *per_var.entry(l.var()).or_default() += a;
        } else {
            // a·¬v = a - a·v
            bound -= a;
            *per_var.entry(l.var()).or_default() -= a;
        }
    }
    let mut terms = Vec::new();
    for (v, a) in per_var {
        match a.cmp(&0) {
            std::cmp::Ordering::Greater => terms.push((a, v.pos())),
            std::cmp::Ordering::Less => {
                // a·v = a + |a|·¬v
                bound -= a;
                terms.push((-a, v.neg()));
            }
            std::cmp::Ordering::Equal => {}
        }
    }
    if bound > 0 {
        for t in &mut terms {
            t.0 = t.0.min(bound);
        }
    }
    // Largest coefficients first keeps the BDD narrow.
    terms.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    NormalizedPb { terms, bound }
}

/// Clauses enforcing `c`, allocating auxiliary variables in `formula`.
/// The clauses are returned, not added.
pub fn pb_to_cnf(formula: &mut Formula, c: &PbConstraint) -> Vec<Vec<Lit>> {
    let n = normalize(c);
    let mut clauses = Vec::new();
    if n.is_trivially_true() {
        return clauses;
    }
    if n.is_unsatisfiable() {
        clauses.push(Vec::new());
        return clauses;
    }
    let root = if n.is_cardinality() {
        let a = n.terms[0].0;
        let k = (n.bound + a - 1) / a;
        let lits: Vec<Lit> = n.terms.iter().map(|&(_, l)| l).collect();
        sequential_counter(formula, &lits, k as usize, &mut clauses)
    } else {
        bdd(formula, &n, &mut clauses)
    };
    match root {
        Node::Const(true) => {}
        Node::Const(false) => clauses.push(Vec::new()),
        Node::Lit(l) => clauses.push(vec![l]),
    }
    clauses
}

/// Output node equivalent to "at least `k` of `lits` are true".
pub fn sequential_counter(formula: &mut Formula, lits: &[Lit], k: usize, sink: &mut Vec<Vec<Lit>>) -> Node {
    if k == 0 {
        return Node::Const(true);
    }
    let n = lits.len();
    if k > n {
        return Node::Const(false);
    }
    // reg[j] == "at least j of the literals seen so far"; reg[0] is true.
    let mut reg = vec![Node::Const(false); k + 1];
    reg[0] = Node::Const(true);
    for (i, &l) in lits.iter().enumerate() {
        let seen = i + 1;
        let remaining = n - seen;
        let lo = k.saturating_sub(remaining).max(1);
        let hi = seen.min(k);
        let mut next = reg.clone();
        for j in lo..=hi {
            next[j] = formula.or_and_gate(reg[j], l, reg[j - 1], sink);
        }
        reg = next;
    }
    reg[k]
}

fn bdd(formula: &mut Formula, n: &NormalizedPb, sink: &mut Vec<Vec<Lit>>) -> Node {
    let mut suffix = vec![0i64; n.terms.len() + 1];
    for i in (0..n.terms.len()).rev() {
        suffix[i] = suffix[i + 1] + n.terms[i].0;
    }
    let mut memo = HashMap::new();
    bdd_node(formula, n, &suffix, 0, n.bound, &mut memo, sink)
}

fn bdd_node(
    formula: &mut Formula,
    n: &NormalizedPb,
    suffix: &[i64],
    i: usize,
    need: i64,
    memo: &mut HashMap<(usize, i64), Node>,
    sink: &mut Vec<Vec<Lit>>,
) -> Node {
    if need <= 0 {
        return Node::Const(true);
    }
    if suffix[i] < need {
        return Node::Const(false);
    }
    if let Some(&node) = memo.get(&(i, need)) {
        return node;
    }
    let (a, l) = n.terms[i];
    let lo = bdd_node(formula, n, suffix, i + 1, need, memo, sink);
    let hi = bdd_node(formula, n, suffix, i + 1, need - a, memo, sink);
    let node = formula.or_and_gate(lo, l, hi, sink);
    memo.insert((i, need), node);
    node
}
