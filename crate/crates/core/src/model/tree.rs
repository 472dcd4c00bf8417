use std::collections::{BTreeMap, BTreeSet};

use super::Violation;
use crate::space::FeatureSpace;

/// Outgoing edge: taken when the tested feature's value is in `values`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub values: Vec<i64>,
    pub child: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Internal { feature: usize, edges: Vec<Edge> },
    Leaf { class: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub root: usize,
}

/// A root-to-leaf path: for each tested feature, the values consistent with
/// every test on the path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub leaf: usize,
    pub class: usize,
    pub literals: BTreeMap<usize, Vec<i64>>,
}

impl DecisionTree {
    pub fn leaf(class: usize) -> Self {
        Self {
            nodes: vec![Node::Leaf { class }],
            root: 0,
        }
    }

    pub fn predict(&self, point: &[i64]) -> usize {
        let mut id = self.root;
        loop {
            match &self.nodes[id] {
                Node::Leaf { class } => return *class,
                Node::Internal { feature, edges } => {
                    let v = point[*feature];
                    id = edges
                        .iter()
                        .find(|e| e.values.contains(&v))
                        .map(|e| e.child)
                        .expect("validated tree edges cover the domain");
                }
            }
        }
    }

    /// All root-to-leaf paths in depth-first order. Paths whose tests are
    /// contradictory are kept, with an empty value set on the clashing
    /// feature.
    pub fn paths(&self) -> Vec<Path> {
        let mut out = Vec::new();
        let mut stack = vec![(self.root, BTreeMap::<usize, Vec<i64>>::new())];
        while let Some((id, lits)) = stack.pop() {
            match &self.nodes[id] {
                Node::Leaf { class } => out.push(Path {
                    leaf: id,
                    class: *class,
                    literals: lits,
                }),
                Node::Internal { feature, edges } => {
                    for e in edges.iter().rev() {
                        let mut l = lits.clone();
                        let vals = match l.get(feature) {
                            Some(prev) => prev.iter().copied().filter(|v| e.values.contains(v)).collect(),
                            None => e.values.clone(),
                        };
                        l.insert(*feature, vals);
                        stack.push((e.child, l));
                    }
                }
            }
        }
        out
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, id: usize) -> usize {
            match &t.nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Internal { edges, .. } => 1 + edges.iter().map(|e| go(t, e.child)).max().unwrap_or(0),
            }
        }
        go(self, self.root)
    }

    pub(crate) fn check(&self, space: &FeatureSpace, classes: usize, at: &str) -> Result<(), Violation> {
        if self.root >= self.nodes.len() {
            return Err(Violation::new(format!("{at}.root"), "root out of range"));
        }
        let mut parent_count = vec![0usize; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            let loc = format!("{at}.nodes[{id}]");
            match node {
                Node::Leaf { class } => {
                    if *class >= classes {
                        return Err(Violation::new(loc, format!("unknown class {class}")));
                    }
                }
                Node::Internal { feature, edges } => {
                    if *feature >= space.num_features() {
                        return Err(Violation::new(loc, format!("feature {feature} out of range")));
                    }
                    let domain: BTreeSet<i64> = space.domain(*feature).iter().copied().collect();
                    let mut covered = BTreeSet::new();
                    for e in edges {
                        if e.child >= self.nodes.len() {
                            return Err(Violation::new(loc, "edge to missing node"));
                        }
                        parent_count[e.child] += 1;
                        if e.values.is_empty() {
                            return Err(Violation::new(loc, "non-partitioning edges: empty edge"));
                        }
                        for v in &e.values {
                            if !domain.contains(v) || !covered.insert(*v) {
                                return Err(Violation::new(
                                    loc,
                                    format!("non-partitioning edges: value {v}"),
                                ));
                            }
                        }
                    }
                    if covered != domain {
                        return Err(Violation::new(loc, "non-partitioning edges: domain not covered"));
                    }
                }
            }
        }
        if parent_count[self.root] != 0 {
            return Err(Violation::new(format!("{at}.root"), "root has a parent"));
        }
        // Single parent everywhere plus reachability from the root rules out
        // cycles and shared subtrees.
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if seen[id] {
                return Err(Violation::new(format!("{at}.nodes[{id}]"), "node reached twice"));
            }
            seen[id] = true;
            if let Node::Internal { edges, .. } = &self.nodes[id] {
                stack.extend(edges.iter().map(|e| e.child));
            }
        }
        if let Some(id) = seen.iter().position(|s| !s) {
            return Err(Violation::new(format!("{at}.nodes[{id}]"), "unreachable node"));
        }
        if let Some(id) = parent_count.iter().position(|&c| c > 1) {
            return Err(Violation::new(format!("{at}.nodes[{id}]"), "node has several parents"));
        }
        Ok(())
    }
}
