//! Small hand-checkable classifiers and seeded random model generators,
//! used by the tests, the benchmark harness and the examples.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::model::{
    BinarizedNN, Classifier, DecisionTree, Edge, HiddenLayer, Model, Neuron, Node, OutputLayer,
    RandomForest,
};
use crate::scalar::Scalar;
use crate::space::FeatureSpace;

/// Class index of `⊖` in the two-class fixtures.
pub const NEG: usize = 0;
/// Class index of `⊕` in the two-class fixtures.
pub const POS: usize = 1;

fn binary_classes() -> Vec<String> {
    vec!["neg".into(), "pos".into()]
}

/// Class names `c0, c1, ...`.
pub fn class_names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("c{i}")).collect()
}

fn split(feature: usize, low: usize, high: usize) -> Node {
    Node::Internal {
        feature,
        edges: vec![
            Edge { values: vec![0], child: low },
            Edge { values: vec![1], child: high },
        ],
    }
}

fn stump(feature: usize) -> DecisionTree {
    DecisionTree {
        nodes: vec![split(feature, 1, 2), Node::Leaf { class: NEG }, Node::Leaf { class: POS }],
        root: 0,
    }
}

/// Two boolean features: `x1 = 1 → ⊕`, else `x2 = 1 → ⊕`, else `⊖`.
pub fn dt1() -> Model {
    let tree = DecisionTree {
        nodes: vec![
            split(0, 1, 4),
            split(1, 2, 3),
            Node::Leaf { class: NEG },
            Node::Leaf { class: POS },
            Node::Leaf { class: POS },
        ],
        root: 0,
    };
    Model::new(FeatureSpace::boolean(2), binary_classes(), Classifier::Tree(tree)).expect("valid fixture")
}

/// Three stumps on `x1, x2, x1` over two boolean features; the majority
/// equals `x1`.
pub fn rf1() -> Model {
    let forest = RandomForest::new(vec![stump(0), stump(1), stump(0)], 2);
    Model::new(FeatureSpace::boolean(2), binary_classes(), Classifier::Forest(forest)).expect("valid fixture")
}

/// `x1 ∨ x2` as a single-level tree on `x2` under each `x1` branch.
pub fn disjunction() -> Model {
    let tree = DecisionTree {
        nodes: vec![
            split(0, 1, 2),
            split(1, 3, 4),
            split(1, 5, 6),
            Node::Leaf { class: NEG },
            Node::Leaf { class: POS },
            Node::Leaf { class: POS },
            Node::Leaf { class: POS },
        ],
        root: 0,
    };
    Model::new(FeatureSpace::boolean(2), binary_classes(), Classifier::Tree(tree)).expect("valid fixture")
}

/// Tree that predicts `class` everywhere, over `m` boolean features.
pub fn constant(m: usize, class: usize) -> Model {
    Model::new(
        FeatureSpace::boolean(m),
        binary_classes(),
        Classifier::Tree(DecisionTree::leaf(class)),
    )
    .expect("valid fixture")
}

/// Random partition of a domain into two non-empty parts, or the singleton
/// split for boolean domains.
fn random_edges<R: Rng + ?Sized>(domain: &[i64], rng: &mut R) -> Vec<Vec<i64>> {
    if domain.len() == 2 {
        return vec![vec![domain[0]], vec![domain[1]]];
    }
    let mut vals = domain.to_vec();
    vals.shuffle(rng);
    let cut = rng.random_range(1..vals.len());
    let mut parts = vec![vals[..cut].to_vec(), vals[cut..].to_vec()];
    for p in &mut parts {
        p.sort_unstable();
    }
    parts.sort();
    parts
}

/// Random tree of depth at most `depth`; a feature is tested at most once
/// per path.
pub fn random_tree<R: Rng + ?Sized>(space: &FeatureSpace, depth: usize, classes: usize, rng: &mut R) -> DecisionTree {
    fn grow<R: Rng + ?Sized>(
        space: &FeatureSpace,
        depth: usize,
        classes: usize,
        used: &mut Vec<usize>,
        nodes: &mut Vec<Node>,
        rng: &mut R,
    ) -> usize {
        let free: Vec<usize> = (0..space.num_features()).filter(|f| !used.contains(f)).collect();
        let id = nodes.len();
        if depth == 0 || free.is_empty() || (!used.is_empty() && rng.random_bool(0.15)) {
            nodes.push(Node::Leaf {
                class: rng.random_range(0..classes),
            });
            return id;
        }
        let feature = *free.choose(rng).expect("non-empty");
        nodes.push(Node::Leaf { class: 0 });
        used.push(feature);
        let edges = random_edges(space.domain(feature), rng)
            .into_iter()
            .map(|values| Edge {
                values,
                child: grow(space, depth - 1, classes, used, nodes, rng),
            })
            .collect();
        used.pop();
        nodes[id] = Node::Internal { feature, edges };
        id
    }
    let mut nodes = Vec::new();
    let root = grow(space, depth, classes, &mut Vec::new(), &mut nodes, rng);
    DecisionTree { nodes, root }
}

pub fn random_tree_model<R: Rng + ?Sized>(space: FeatureSpace, depth: usize, classes: usize, rng: &mut R) -> Model {
    let tree = random_tree(&space, depth, classes, rng);
    Model::new(space, class_names(classes), Classifier::Tree(tree)).expect("generated tree is valid")
}

/// Forest of `trees` random trees with a random class order.
pub fn random_forest_model<R: Rng + ?Sized>(
    space: FeatureSpace,
    trees: usize,
    depth: usize,
    classes: usize,
    rng: &mut R,
) -> Model {
    let ts = (0..trees).map(|_| random_tree(&space, depth, classes, rng)).collect();
    let mut forest = RandomForest::new(ts, classes);
    forest.class_order.shuffle(rng);
    Model::new(space, class_names(classes), Classifier::Forest(forest)).expect("generated forest is valid")
}

fn dyadic<T: Scalar, R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64) -> T {
    T::from_f64(rng.random_range(lo..=hi) as f64 / 2.0).expect("small dyadic value")
}

fn ternary_row<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<i64> {
    loop {
        let row: Vec<i64> = (0..n).map(|_| rng.random_range(-1..=1)).collect();
        if row.iter().any(|&w| w != 0) {
            return row;
        }
    }
}

/// Random binarized network over `inputs` boolean features with hidden
/// layers of the given widths. Parameters are small dyadic rationals, so
/// they are exact in every scalar type.
pub fn random_bnn<T: Scalar, R: Rng + ?Sized>(inputs: usize, widths: &[usize], classes: usize, rng: &mut R) -> Model<T> {
    let mut prev = inputs;
    let mut hidden = Vec::new();
    for &w in widths {
        let neurons = (0..w)
            .map(|_| {
                let sign = if rng.random_bool(0.8) { 1.0 } else { -1.0 };
                let sigma = T::from_f64(sign * [0.5, 1.0, 2.0][rng.random_range(0..3)]).expect("finite");
                Neuron {
                    weights: ternary_row(prev, rng),
                    bias: dyadic(rng, -4, 4),
                    alpha: dyadic::<T, R>(rng, 1, 4) * if rng.random_bool(0.8) { T::one() } else { -T::one() },
                    mu: dyadic(rng, -4, 4),
                    sigma,
                }
            })
            .collect();
        hidden.push(HiddenLayer { neurons });
        prev = w;
    }
    let output = OutputLayer {
        weights: (0..classes).map(|_| ternary_row(prev, rng)).collect(),
        bias: (0..classes).map(|_| dyadic(rng, -3, 3)).collect(),
    };
    let bnn = BinarizedNN { inputs, hidden, output };
    Model::new(FeatureSpace::boolean(inputs), class_names(classes), Classifier::Bnn(bnn)).expect("generated network is valid")
}
