use std::collections::HashMap;
use std::fmt;
use std::ops::Not;

use crate::error::{Error, Result};
use crate::space::{FeatureSet, FeatureSpace};

/// Boolean variable, numbered from 0 (`Var(0)` is DIMACS variable 1).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn pos(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn neg(self) -> Lit {
        Lit::new(self, false)
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Self {
        Lit(var.0 * 2 + u32::from(!positive))
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().0) + 1;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn from_dimacs(x: i64) -> Self {
        assert!(x != 0, "0 is not a DIMACS literal");
        Lit::new(Var((x.unsigned_abs() - 1) as u32), x > 0)
    }

    /// Truth value under an assignment indexed by variable.
    pub fn eval(self, assignment: &[bool]) -> bool {
        assignment[self.var().index()] == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// What a variable stands for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarRole {
    /// `x_feature = value`.
    Input { feature: usize, value: i64 },
    /// Path of a tree reaching `leaf`.
    Path { tree: usize, leaf: usize },
    /// Tree `tree` votes for `class` (`p_ij`).
    Vote { tree: usize, class: usize },
    /// Hidden neuron output `y`.
    Neuron { layer: usize, index: usize },
    /// Output-layer competitor `y_k`: class `class` beats the target.
    Competitor { class: usize },
    /// Class selector `s_j`.
    Selector { class: usize },
    Aux,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Cmp {
    Ge,
    Le,
}

/// `Σ coeff·lit ⋈ bound` over 0/1 literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PbConstraint {
    pub terms: Vec<(i64, Lit)>,
    pub cmp: Cmp,
    pub bound: i64,
}

impl PbConstraint {
    pub fn ge(terms: Vec<(i64, Lit)>, bound: i64) -> Self {
        Self {
            terms,
            cmp: Cmp::Ge,
            bound,
        }
    }

    pub fn le(terms: Vec<(i64, Lit)>, bound: i64) -> Self {
        Self {
            terms,
            cmp: Cmp::Le,
            bound,
        }
    }

    pub fn lhs(&self, assignment: &[bool]) -> i64 {
        self.terms
            .iter()
            .filter(|(_, l)| l.eval(assignment))
            .map(|(c, _)| c)
            .sum()
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        let lhs = self.lhs(assignment);
        match self.cmp {
            Cmp::Ge => lhs >= self.bound,
            Cmp::Le => lhs <= self.bound,
        }
    }
}

/// Either a known constant or a literal; used while building circuits so
/// constants fold away instead of becoming variables.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Const(bool),
    Lit(Lit),
}

impl Not for Node {
    type Output = Node;

    fn not(self) -> Node {
        match self {
            Node::Const(b) => Node::Const(!b),
            Node::Lit(l) => Node::Lit(!l),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum GateKind {
    And,
}

/// CNF clauses plus native pseudo-Boolean constraints over named variables.
///
/// `clauses` hold the structural part of the encoding; `pb_clauses` hold the
/// CNF translation of every constraint in `pb`. Every auxiliary variable is
/// defined by a full equivalence, so it is a function of the projection
/// variables.
#[derive(Clone, Debug, Default)]
pub struct Formula {
    roles: Vec<VarRole>,
    clauses: Vec<Vec<Lit>>,
    pb: Vec<PbConstraint>,
    pb_clauses: Vec<Vec<Lit>>,
    projection: Vec<Var>,
    inputs: Vec<Vec<Var>>,
    space: Option<FeatureSpace>,
    gates: HashMap<(GateKind, Vec<Lit>), Lit>,
}

impl Formula {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.roles.len()
    }

    pub fn role(&self, v: Var) -> &VarRole {
        &self.roles[v.index()]
    }

    pub fn vars_with<'a>(&'a self, pred: impl Fn(&VarRole) -> bool + 'a) -> impl Iterator<Item = Var> + 'a {
        self.roles
            .iter()
            .enumerate()
            .filter(move |(_, r)| pred(r))
            .map(|(i, _)| Var(i as u32))
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn pb_clauses(&self) -> &[Vec<Lit>] {
        &self.pb_clauses
    }

    /// Structural clauses followed by the PB translations.
    pub fn all_clauses(&self) -> impl Iterator<Item = &Vec<Lit>> {
        self.clauses.iter().chain(self.pb_clauses.iter())
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len() + self.pb_clauses.len()
    }

    pub fn pb_constraints(&self) -> &[PbConstraint] {
        &self.pb
    }

    pub fn projection(&self) -> &[Var] {
        &self.projection
    }

    /// Value variables per feature (empty for formulas read from DIMACS).
    pub fn inputs(&self) -> &[Vec<Var>] {
        &self.inputs
    }

    pub fn space(&self) -> Option<&FeatureSpace> {
        self.space.as_ref()
    }

    pub fn new_var(&mut self, role: VarRole) -> Var {
        let v = Var(self.roles.len() as u32);
        self.roles.push(role);
        v
    }

    pub fn add_clause(&mut self, clause: Vec<Lit>) {
        self.clauses.push(clause);
    }

    /// Assert a node: nothing for `true`, the empty clause for `false`.
    pub fn assert_node(&mut self, n: Node) {
        match n {
            Node::Const(true) => {}
            Node::Const(false) => self.clauses.push(Vec::new()),
            Node::Lit(l) => self.clauses.push(vec![l]),
        }
    }

    /// Native constraint plus its CNF translation.
    pub fn add_pb(&mut self, c: PbConstraint) {
        let clauses = super::pb::pb_to_cnf(self, &c);
        self.pb_clauses.extend(clauses);
        self.pb.push(c);
    }

    pub(crate) fn set_projection(&mut self, projection: Vec<Var>) {
        self.projection = projection;
    }

    pub(crate) fn set_inputs(&mut self, inputs: Vec<Vec<Var>>, space: FeatureSpace) {
        self.projection = inputs.iter().flatten().copied().collect();
        self.inputs = inputs;
        self.space = Some(space);
    }

    pub fn input_lit(&self, feature: usize, value: i64) -> Option<Lit> {
        let space = self.space.as_ref()?;
        let idx = space.value_index(feature, value)?;
        Some(self.inputs.get(feature)?.get(idx)?.pos())
    }

    /// `y ↔ ⋀ inputs` with constant folding; structurally equal gates are
    /// shared.
    pub fn and_gate(&mut self, inputs: &[Node]) -> Node {
        self.and_impl(inputs, None)
    }

    /// `y ↔ ⋁ inputs` with constant folding.
    pub fn or_gate(&mut self, inputs: &[Node]) -> Node {
        let negated: Vec<Node> = inputs.iter().map(|&n| !n).collect();
        !self.and_impl(&negated, None)
    }

    /// Like [`and_gate`](Self::and_gate), but a fresh variable with `role`
    /// is allocated whenever one is needed.
    pub fn define_and(&mut self, inputs: &[Node], role: VarRole) -> Node {
        self.and_impl(inputs, Some(role))
    }

    pub fn define_or(&mut self, inputs: &[Node], role: VarRole) -> Node {
        let mut lits = Vec::new();
        for n in inputs {
            match *n {
                Node::Const(true) => return Node::Const(true),
                Node::Const(false) => {}
                Node::Lit(l) => lits.push(l),
            }
        }
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == !w[1]) {
            return Node::Const(true);
        }
        if lits.is_empty() {
            return Node::Const(false);
        }
        let y = self.new_var(role).pos();
        for &l in &lits {
            self.clauses.push(vec![y, !l]);
        }
        let mut big = lits;
        big.push(!y);
        self.clauses.push(big);
        Node::Lit(y)
    }

    fn and_impl(&mut self, inputs: &[Node], role: Option<VarRole>) -> Node {
        let mut lits = Vec::new();
        for n in inputs {
            match *n {
                Node::Const(false) => return Node::Const(false),
                Node::Const(true) => {}
                Node::Lit(l) => lits.push(l),
            }
        }
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == !w[1]) {
            return Node::Const(false);
        }
        if lits.len() == 1 && role.is_none() {
            return Node::Lit(lits[0]);
        }
        if lits.is_empty() {
            return Node::Const(true);
        }
        let emit = |f: &mut Self, y: Lit| {
            for &l in &lits {
                f.clauses.push(vec![!y, l]);
            }
            let mut big: Vec<Lit> = lits.iter().map(|&l| !l).collect();
            big.push(y);
            f.clauses.push(big);
        };
        match role {
            Some(role) => {
                let y = self.new_var(role).pos();
                emit(self, y);
                Node::Lit(y)
            }
            None => {
                let key = (GateKind::And, lits.clone());
                if let Some(&y) = self.gates.get(&key) {
                    return Node::Lit(y);
                }
                let y = self.new_var(VarRole::Aux).pos();
                emit(self, y);
                self.gates.insert(key, y);
                Node::Lit(y)
            }
        }
    }

    /// `y ↔ a ∨ (l ∧ b)`: one step of a sequential counter or a monotone
    /// BDD node. Clauses go to `sink`; the caller must add them.
    pub(crate) fn or_and_gate(&mut self, a: Node, l: Lit, b: Node, sink: &mut Vec<Vec<Lit>>) -> Node {
        let (a, b) = match (a, b) {
            (Node::Const(true), _) => return Node::Const(true),
            (_, Node::Const(false)) => return a,
            (a, Node::Const(true)) => {
                return match a {
                    Node::Const(false) => Node::Lit(l),
                    Node::Lit(a) => self.or2(a, l, sink),
                    Node::Const(true) => unreachable!(),
                }
            }
            (Node::Const(false), Node::Lit(b)) => return self.and2(l, b, sink),
            (Node::Lit(a), Node::Lit(b)) => (a, b),
        };
        let y = self.new_var(VarRole::Aux).pos();
        sink.push(vec![!a, y]);
        sink.push(vec![!l, !b, y]);
        sink.push(vec![!y, a, l]);
        sink.push(vec![!y, a, b]);
        Node::Lit(y)
    }

    fn and2(&mut self, p: Lit, q: Lit, sink: &mut Vec<Vec<Lit>>) -> Node {
        if p == q {
            return Node::Lit(p);
        }
        if p == !q {
            return Node::Const(false);
        }
        let y = self.new_var(VarRole::Aux).pos();
        sink.push(vec![!y, p]);
        sink.push(vec![!y, q]);
        sink.push(vec![!p, !q, y]);
        Node::Lit(y)
    }

    fn or2(&mut self, p: Lit, q: Lit, sink: &mut Vec<Vec<Lit>>) -> Node {
        !self.and2(!p, !q, sink)
    }
}

/// Unit literals fixing `x_i = v_i` for each feature of a set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assumptions {
    pub lits: Vec<Lit>,
    pub fixed: FeatureSet,
}

/// Assumptions selecting the instance values on `features`, closed under
/// categorical groups.
pub fn assume_fixed(formula: &Formula, values: &[i64], features: &FeatureSet) -> Result<Assumptions> {
    let space = formula
        .space()
        .ok_or_else(|| Error::Parameter("formula has no feature structure".into()))?;
    let fixed = space.close(features)?;
    let mut lits = Vec::with_capacity(fixed.len());
    for &f in &fixed {
        let value = *values.get(f).ok_or(Error::UnknownFeature(f))?;
        let lit = formula
            .input_lit(f, value)
            .ok_or(Error::OutOfDomain { feature: f, value })?;
        lits.push(lit);
    }
    Ok(Assumptions { lits, fixed })
}
