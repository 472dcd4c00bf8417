mod common;

use common::*;
use probex::counting::{exact_count, CounterConfig};
use probex::encoding::*;
use probex::fixtures::{self, NEG, POS};
use probex::model::{
    Classifier, DecisionTree, HiddenLayer, Model, Neuron, OutputLayer, RandomForest, BinarizedNN,
};
use probex::space::{FeatureSet, FeatureSpace};
use probex::seed;
use proptest::prelude::*;

fn count(f: &Formula) -> u64 {
    let c = exact_count(f, &Assumptions::default(), &CounterConfig::default()).unwrap();
    u64::try_from(c.count).unwrap()
}

#[test]
fn boolean_domain_is_two_clauses() {
    let f = encode_domains(&FeatureSpace::boolean(1));
    assert_eq!(f.num_vars(), 2);
    let mut clauses: Vec<Vec<i64>> = f
        .clauses()
        .iter()
        .map(|c| c.iter().map(|l| l.to_dimacs()).collect())
        .collect();
    clauses.sort();
    assert_eq!(clauses, vec![vec![-1, -2], vec![1, 2]]);
}

#[test]
fn size_four_domain_clause_counts() {
    let f = encode_domains(&FeatureSpace::ranges(&[4]).unwrap());
    assert_eq!(f.num_vars(), 4);
    let alo = f.clauses().iter().filter(|c| c.len() == 4).count();
    let amo = f.clauses().iter().filter(|c| c.len() == 2).count();
    assert_eq!((alo, amo, f.clauses().len()), (1, 6, 7));
}

#[test]
fn domain_fragment_counts_its_values() {
    for d in 1..=12 {
        let f = encode_domains(&FeatureSpace::ranges(&[d]).unwrap());
        assert_eq!(projected_models(&f, &f.inputs()[0]).len(), d, "domain size {d}");
        assert_eq!(count(&f), d as u64);
    }
}

#[test]
fn dt1_paths() {
    let model = fixtures::dt1();
    let Classifier::Tree(tree) = &model.classifier else { unreachable!() };
    let mut f = encode_domains(&model.space);
    let enc = encode_tree(&mut f, tree, 0, 2);
    assert_eq!(enc.paths.len(), 3);
    let consistent: Vec<usize> = enc
        .paths
        .iter()
        .filter_map(|(path, node)| {
            let Node::Lit(l) = node else { return None };
            let mut g = f.clone();
            g.add_clause(vec![*l]);
            satisfiable_at(&g, &[1, 0]).then_some(path.leaf)
        })
        .collect();
    assert_eq!(consistent.len(), 1);
    let path = enc.paths.iter().find(|(p, _)| p.leaf == consistent[0]).unwrap();
    assert_eq!(path.0.class, POS);
    assert_eq!(path.0.literals.keys().copied().collect::<Vec<_>>(), vec![0]);
}

#[test]
fn one_leaf_tree_paths_are_constant() {
    let mut f = encode_domains(&FeatureSpace::boolean(2));
    let enc = encode_tree(&mut f, &DecisionTree::leaf(1), 0, 2);
    assert_eq!(enc.paths[0].1, Node::Const(true));
    assert_eq!(enc.votes, vec![Node::Const(false), Node::Const(true)]);
}

#[test]
fn tree_fragment_keeps_the_full_space() {
    for s in 0..10 {
        let space = FeatureSpace::ranges(&[3, 2, 4, 2]).unwrap();
        let m = fixtures::random_tree_model(space.clone(), 3, 3, &mut seed::rng(s));
        let Classifier::Tree(tree) = &m.classifier else { unreachable!() };
        let mut f = encode_domains(&space);
        encode_tree(&mut f, tree, 0, 3);
        assert_eq!(count(&f), 48);
    }
}

#[test]
fn rf1_target_counts() {
    let m = fixtures::rf1();
    let Classifier::Forest(rf) = &m.classifier else { unreachable!() };
    assert_eq!(count(&encode_rf_target(&m, rf, POS)), 2);
    assert_eq!(count(&encode_rf_target(&m, rf, NEG)), 2);
}

#[test]
fn single_tree_forest_counts_leaves() {
    for s in 0..10 {
        let space = FeatureSpace::ranges(&[2, 3, 2, 3]).unwrap();
        let tm = fixtures::random_tree_model(space.clone(), 3, 3, &mut seed::rng(s));
        let Classifier::Tree(tree) = tm.classifier.clone() else { unreachable!() };
        let rf = RandomForest::new(vec![tree], 3);
        let m = Model::<f64>::new(space, tm.classes.clone(), Classifier::Forest(rf.clone())).unwrap();
        let expected = class_counts(&tm);
        for j in 0..3 {
            assert_eq!(count(&encode_rf_target(&m, &rf, j)), expected[j]);
        }
    }
}

fn neuron(weights: Vec<i64>, alpha: f64, mu: f64, sigma: f64, bias: f64) -> Neuron {
    Neuron { weights, bias, alpha, mu, sigma }
}

#[test]
fn batchnorm_folding() {
    let t = fold_batchnorm(&neuron(vec![1, 1], 1.0, 0.0, 1.0, 0.0)).unwrap();
    assert_eq!(
        t,
        NeuronTest::Threshold { weights: vec![1, 1], direction: Direction::AtLeast, threshold: 0 }
    );
    let t = fold_batchnorm(&neuron(vec![1, 1], -1.0, 0.0, 1.0, 0.0)).unwrap();
    assert_eq!(
        t,
        NeuronTest::Threshold { weights: vec![1, 1], direction: Direction::AtMost, threshold: 0 }
    );
    let n = neuron(vec![1, 1], 1.0, 0.5, 2.0, 0.0);
    let t = fold_batchnorm(&n).unwrap();
    assert_eq!(
        t,
        NeuronTest::Threshold { weights: vec![1, 1], direction: Direction::AtLeast, threshold: 2 }
    );
    for x in [[-1, -1], [-1, 1], [1, -1], [1, 1]] {
        assert_eq!(t.holds(&x), n.fires(&x));
    }
    assert!(fold_batchnorm(&neuron(vec![1], 1.0, 0.0, 0.0, 0.0)).is_err());
    assert_eq!(fold_batchnorm(&neuron(vec![1], 0.0, 3.0, 1.0, 0.0)).unwrap(), NeuronTest::Constant(true));
}

proptest! {
    #[test]
    fn folded_test_matches_the_neuron(
        weights in prop::collection::vec(-1i64..=1, 1..7),
        a in -4i64..=4, m in -8i64..=8, s in prop::sample::select(vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]), b in -8i64..=8,
    ) {
        let n = neuron(weights.clone(), a as f64 / 2.0, m as f64 / 4.0, s, b as f64 / 4.0);
        let t = fold_batchnorm(&n).unwrap();
        let k = weights.len();
        for bits in 0..1u32 << k {
            let x: Vec<i64> = (0..k).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect();
            prop_assert_eq!(t.holds(&x), n.fires(&x));
        }
    }
}

fn fresh_lits(f: &mut Formula, n: usize) -> Vec<Lit> {
    (0..n).map(|_| f.new_var(VarRole::Aux).pos()).collect()
}

/// Every assignment of the literals and `y` satisfies both constraints iff
/// `y` equals the comparison.
fn check_reification(weights: &[i64], bound: i64) {
    let mut f = Formula::new();
    let ls = fresh_lits(&mut f, weights.len());
    let y = f.new_var(VarRole::Aux).pos();
    let terms: Vec<(i64, Lit)> = weights.iter().copied().zip(ls.iter().copied()).collect();
    let (lo, up) = encode_bnn_neuron(&mut f, &terms, bound, y);
    let n = weights.len();
    for bits in 0..1u32 << (n + 1) {
        let a: Vec<bool> = (0..=n).map(|i| bits >> i & 1 == 1).collect();
        let sum: i64 = weights.iter().zip(&a).filter(|(_, &on)| on).map(|(w, _)| w).sum();
        let both = lo.eval(&a) && up.eval(&a);
        assert_eq!(both, a[n] == (sum >= bound), "weights {weights:?} bound {bound} bits {bits:b}");
    }
}

#[test]
fn neuron_pair_example() {
    let mut f = Formula::new();
    let ls = fresh_lits(&mut f, 3);
    let y = f.new_var(VarRole::Aux).pos();
    let terms = vec![(1, ls[0]), (-1, ls[1]), (1, ls[2])];
    let (lo, up) = encode_bnn_neuron(&mut f, &terms, 0, y);
    assert_eq!(lo.terms.last(), Some(&(3, !y)));
    assert_eq!(lo.bound, 0);
    assert_eq!(up.terms.last(), Some(&(-4, y)));
    assert_eq!(up.bound, -1);
    check_reification(&[1, -1, 1], 0);
}

#[test]
fn zero_weight_neuron_is_forced_on() {
    for b in -3..=0 {
        let mut f = Formula::new();
        let y = f.new_var(VarRole::Aux).pos();
        encode_bnn_neuron(&mut f, &[], b, y);
        assert_eq!(projected_models(&f, &[y.var()]), vec![1]);
    }
}

#[test]
fn reification_is_exact_up_to_twelve_inputs() {
    let mut rng = seed::rng(5);
    use rand::Rng;
    for n in [3usize, 6, 9, 12] {
        for _ in 0..3 {
            let w: Vec<i64> = (0..n).map(|_| rng.random_range(-1..=1)).collect();
            let big_n: i64 = w.iter().map(|x| x.abs()).sum();
            let b = rng.random_range(-big_n - 1..=big_n + 1);
            check_reification(&w, b);
        }
    }
}

proptest! {
    #[test]
    fn reification_random(w in prop::collection::vec(-2i64..=2, 0..7), b in -8i64..=8) {
        check_reification(&w, b);
    }
}

fn toy_bnn(output: OutputLayer) -> Model {
    let bnn = BinarizedNN {
        inputs: 3,
        hidden: vec![HiddenLayer {
            neurons: vec![
                neuron(vec![1, 1, 0], 1.0, 0.0, 1.0, 0.0),
                neuron(vec![0, 1, -1], 1.0, 0.0, 1.0, 0.0),
            ],
        }],
        output,
    };
    let k = bnn.output.weights.len();
    Model::new(FeatureSpace::boolean(3), fixtures::class_names(k), Classifier::Bnn(bnn)).unwrap()
}

#[test]
fn bnn_selector_counts_the_class() {
    let m = toy_bnn(OutputLayer { weights: vec![vec![1, -1], vec![-1, 1]], bias: vec![0.5, 0.0] });
    let counts = class_counts(&m);
    for j in 0..2 {
        assert_eq!(count(&encode_target(&m, j).unwrap()), counts[j]);
    }
}

#[test]
fn single_class_selector_is_true() {
    let mut f = encode_domains(&FeatureSpace::boolean(2));
    let signals = vec![f.input_lit(0, 1).unwrap(), f.input_lit(1, 1).unwrap()];
    let out: OutputLayer<f64> = OutputLayer { weights: vec![vec![1, 1]], bias: vec![0.0] };
    let (comp, sel) = encode_bnn_output(&mut f, &out, &signals, 0).unwrap();
    assert_eq!(comp, vec![None]);
    assert_eq!(sel, Node::Const(true));
}

#[test]
fn bnn_argmax_ties_go_to_the_lower_class() {
    // Identical rows: every point ties and belongs to class 0.
    let m = toy_bnn(OutputLayer { weights: vec![vec![1, 0], vec![1, 0]], bias: vec![0.0, 0.0] });
    assert_eq!(class_counts(&m), vec![8, 0]);
    assert_eq!(count(&encode_target(&m, 0).unwrap()), 8);
    assert_eq!(count(&encode_target(&m, 1).unwrap()), 0);
    // A 3-class layer with partial ties.
    let m = toy_bnn(OutputLayer {
        weights: vec![vec![1, 0], vec![0, 1], vec![1, 0]],
        bias: vec![0.0, 0.0, 0.0],
    });
    let counts = class_counts(&m);
    for j in 0..3 {
        assert_eq!(count(&encode_target(&m, j).unwrap()), counts[j]);
    }
}

#[test]
fn pb_translation_examples() {
    let mut f = Formula::new();
    let l = fresh_lits(&mut f, 3);
    let clauses = pb_to_cnf(&mut f, &PbConstraint::ge(vec![(1, l[0]), (1, l[1]), (1, l[2])], 2));
    for c in clauses {
        f.add_clause(c);
    }
    let vars: Vec<Var> = l.iter().map(|x| x.var()).collect();
    assert_eq!(projected_models(&f, &vars).len(), 4);

    let mut f = Formula::new();
    let l = fresh_lits(&mut f, 3);
    let c = PbConstraint::ge(l.iter().map(|&x| (1, x)).collect(), 0);
    assert!(pb_to_cnf(&mut f, &c).is_empty());

    let mut f = Formula::new();
    let l = fresh_lits(&mut f, 2);
    for c in pb_to_cnf(&mut f, &PbConstraint::ge(vec![(2, l[0]), (1, l[1])], 2)) {
        f.add_clause(c);
    }
    let vars: Vec<Var> = l.iter().map(|x| x.var()).collect();
    assert_eq!(projected_models(&f, &vars), vec![0b01, 0b11]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn pb_translation_preserves_projected_models(
        terms in prop::collection::vec((-4i64..=4, 0usize..10, any::<bool>()), 0..=10),
        bound in -10i64..=10,
        ge in any::<bool>(),
    ) {
        let mut f = Formula::new();
        let vars: Vec<Var> = (0..10).map(|_| f.new_var(VarRole::Aux)).collect();
        let terms: Vec<(i64, Lit)> = terms.iter().map(|&(a, v, pos)| (a, Lit::new(vars[v], pos))).collect();
        let c = if ge { PbConstraint::ge(terms, bound) } else { PbConstraint::le(terms, bound) };
        for cl in pb_to_cnf(&mut f, &c) {
            f.add_clause(cl);
        }
        let got = projected_models(&f, &vars);
        let want: Vec<u64> = (0..1u64 << 10)
            .filter(|&bits| {
                let a: Vec<bool> = (0..10).map(|i| bits >> i & 1 == 1).collect();
                c.eval(&a)
            })
            .collect();
        prop_assert_eq!(got, want);
    }
}

#[test]
fn fixing_features() {
    let m = fixtures::dt1();
    let f = encode_target(&m, POS).unwrap();
    let a = assume_fixed(&f, &[1, 0], &FeatureSet::new()).unwrap();
    assert!(a.lits.is_empty());
    let a = assume_fixed(&f, &[1, 0], &set(&[0, 1])).unwrap();
    assert_eq!(a.lits, vec![f.input_lit(0, 1).unwrap(), f.input_lit(1, 0).unwrap()]);
}

#[test]
fn fixing_a_group_fixes_every_bit() {
    let names = ["a", "b", "c", "d"].map(String::from).to_vec();
    let space = FeatureSpace::with_groups(names, vec![vec![0, 1]; 4], vec![vec![0, 1, 2]]).unwrap();
    let f = encode_domains(&space);
    let a = assume_fixed(&f, &[0, 1, 0, 1], &set(&[1])).unwrap();
    assert_eq!(a.lits.len(), 3);
    assert_eq!(a.fixed, set(&[0, 1, 2]));
    // One-hot groups contribute their size, not 2^size.
    assert_eq!(count(&f), 6);
}

fn assert_sound<T: probex::scalar::Scalar>(m: &Model<T>) {
    for j in 0..m.num_classes() {
        let f = encode_target(m, j).unwrap();
        for x in all_points(&m.space) {
            assert_eq!(satisfiable_at(&f, &x), m.predict(&x).unwrap() == j, "class {j} at {x:?}");
        }
    }
}

#[test]
fn encodings_agree_with_predict() {
    for s in 0..4 {
        let space = FeatureSpace::ranges(&[3, 2, 4, 2, 3]).unwrap();
        assert_sound(&fixtures::random_tree_model(space.clone(), 4, 3, &mut seed::rng(s)));
        assert_sound(&fixtures::random_forest_model(space, 5, 3, 3, &mut seed::rng(s)));
        assert_sound::<f64>(&fixtures::random_bnn(7, &[4, 3], 3, &mut seed::rng(s)));
    }
    assert_sound(&fixtures::dt1());
    assert_sound(&fixtures::rf1());
}

#[test]
fn dimacs_export_is_deterministic_and_round_trips() {
    let m = fixtures::random_forest_model(FeatureSpace::boolean(6), 5, 3, 2, &mut seed::rng(9));
    let a = write_dimacs(&encode_target(&m, 1).unwrap());
    let b = write_dimacs(&encode_target(&m, 1).unwrap());
    assert_eq!(a, b);
    let first = a.lines().next().unwrap();
    assert!(first.starts_with("c p show ") && first.ends_with(" 0"));
    let parsed = parse_dimacs(&a).unwrap();
    assert_eq!(parsed.projection().len(), 12);
    assert_eq!(count(&parsed), class_counts(&m)[1]);
}

#[test]
fn opb_lines() {
    let m = fixtures::random_bnn::<f64, _>(4, &[3], 2, &mut seed::rng(2));
    let f = encode_target(&m, 0).unwrap();
    let opb = write_opb(&f);
    assert!(opb.starts_with("* #variable= "));
    let pb_lines: Vec<&str> = opb.lines().skip(1 + f.clauses().len()).collect();
    assert_eq!(pb_lines.len(), f.pb_constraints().len());
    for line in pb_lines {
        assert!(line.ends_with(" ;"));
        assert!(line.contains(" >= "));
        assert!(line.starts_with('+') || line.starts_with('-'));
    }
}
