use std::collections::BTreeMap;

use super::formula::{Formula, Node, PbConstraint, VarRole};
use crate::model::{DecisionTree, Model, Path, RandomForest};
use crate::scalar::Scalar;

/// Path and vote nodes of one encoded tree.
#[derive(Clone, Debug)]
pub struct TreeEncoding {
    pub paths: Vec<(Path, Node)>,
    /// Per class: true iff the tree predicts that class.
    pub votes: Vec<Node>,
}

/// Defines, for tree `index`, one node per path (the conjunction of its
/// edge literals) and one vote node per class (the disjunction of the
/// paths ending in that class). Requires input variables in `f`.
pub fn encode_tree(f: &mut Formula, tree: &DecisionTree, index: usize, num_classes: usize) -> TreeEncoding {
    let space = f.space().expect("domains encoded first").clone();
    let mut paths = Vec::new();
    for path in tree.paths() {
        let mut conj = Vec::with_capacity(path.literals.len());
        for (&feature, values) in &path.literals {
            conj.push(edge_node(f, &space, feature, values));
        }
        let node = f.define_and(&conj, VarRole::Path { tree: index, leaf: path.leaf });
        paths.push((path, node));
    }
    let path_lits: Vec<_> = paths
        .iter()
        .filter_map(|(_, n)| match n {
            Node::Lit(l) => Some(*l),
            Node::Const(_) => None,
        })
        .collect();
    if path_lits.len() == paths.len() && !path_lits.is_empty() {
        // Implied by the domain constraints; helps propagation.
        f.add_clause(path_lits);
    }
    let mut votes = Vec::with_capacity(num_classes);
    for class in 0..num_classes {
        let disj: Vec<Node> = paths
            .iter()
            .filter(|(p, _)| p.class == class)
            .map(|(_, n)| *n)
            .collect();
        let node = f.define_or(&disj, VarRole::Vote { tree: index, class });
        votes.push(node);
    }
    TreeEncoding { paths, votes }
}

fn edge_node(f: &mut Formula, space: &crate::space::FeatureSpace, feature: usize, values: &[i64]) -> Node {
    if values.len() == space.domain(feature).len() {
        return Node::Const(true);
    }
    let lits: Vec<Node> = values
        .iter()
        .filter_map(|&v| f.input_lit(feature, v))
        .map(Node::Lit)
        .collect();
    f.or_gate(&lits)
}

/// Majority-vote constraints making `target` the forest's prediction. For
/// each competitor `k`:
/// `Σ_i p_i,target + Σ_i ¬p_i,k + b_k >= M + 1`, where `b_k = 1` iff the
/// target wins ties against `k`.
pub fn add_rf_target(f: &mut Formula, rf: &RandomForest, num_classes: usize, target: usize) -> Vec<TreeEncoding> {
    let encs: Vec<TreeEncoding> = rf
        .trees
        .iter()
        .enumerate()
        .map(|(i, t)| encode_tree(f, t, i, num_classes))
        .collect();
    let m = rf.trees.len() as i64;
    for k in 0..num_classes {
        if k == target {
            continue;
        }
        let tie = i64::from(rf.rank(target) < rf.rank(k));
        let mut terms = Vec::new();
        let mut bound = m + 1 - tie;
        for enc in &encs {
            for node in [enc.votes[target], !enc.votes[k]] {
                match node {
                    Node::Const(true) => bound -= 1,
                    Node::Const(false) => {}
                    Node::Lit(l) => terms.push((1, l)),
                }
            }
        }
        f.add_pb(PbConstraint::ge(merge_terms(terms), bound));
    }
    encs
}

fn merge_terms(terms: Vec<(i64, super::formula::Lit)>) -> Vec<(i64, super::formula::Lit)> {
    let mut acc: BTreeMap<super::formula::Lit, i64> = BTreeMap::new();
    for (a, l) in terms {
        *acc.entry(l).or_default() += a;
    }
    acc.into_iter().map(|(l, a)| (a, l)).collect()
}

/// Decision-tree target: assert the vote node of `target`.
pub fn add_tree_target(f: &mut Formula, tree: &DecisionTree, num_classes: usize, target: usize) -> TreeEncoding {
    let enc = encode_tree(f, tree, 0, num_classes);
    f.assert_node(enc.votes[target]);
    enc
}

/// Formula asserting `κ(x) = target` for a forest model.
pub fn encode_rf_target<T: Scalar>(model: &Model<T>, rf: &RandomForest, target: usize) -> Formula {
    let mut f = Formula::new();
    super::domains::add_domains(&mut f, &model.space);
    add_rf_target(&mut f, rf, model.num_classes(), target);
    f
}
