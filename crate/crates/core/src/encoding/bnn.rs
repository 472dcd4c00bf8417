//! Binarized network encodings.
//!
//! Signals in `{-1,+1}` are replaced by 0/1 literals through `x = 2l - 1`;
//! every neuron becomes a reified linear constraint `y ↔ Σ c_i·l_i >= B`
//! stated as two PB constraints.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::formula::{Formula, Lit, Node, PbConstraint, VarRole};
use crate::error::{Error, Result};
use crate::model::{BinarizedNN, Neuron, OutputLayer};
use crate::scalar::{ceil_int, floor_int, Scalar};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Direction {
    AtLeast,
    AtMost,
}

/// Integer test on the `{-1,+1}` pre-activation `s = w·x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NeuronTest {
    Constant(bool),
    Threshold {
        weights: Vec<i64>,
        direction: Direction,
        threshold: i64,
    },
}

impl NeuronTest {
    pub fn holds(&self, signals: &[i64]) -> bool {
        match self {
            NeuronTest::Constant(b) => *b,
            NeuronTest::Threshold {
                weights,
                direction,
                threshold,
            } => {
                let s: i64 = weights.iter().zip(signals).map(|(w, x)| w * x).sum();
                match direction {
                    Direction::AtLeast => s >= *threshold,
                    Direction::AtMost => s <= *threshold,
                }
            }
        }
    }

    /// Equivalent `Σ c_i·l_i >= B` over 0/1 literals `l_i = (x_i + 1) / 2`.
    pub fn literal_form(&self) -> Option<(Vec<i64>, i64)> {
        match self {
            NeuronTest::Constant(_) => None,
            NeuronTest::Threshold {
                weights,
                direction,
                threshold,
            } => {
                // s = 2·Σ w·l - Σ w, and threshold ≡ Σ w (mod 2).
                let sum_w: i64 = weights.iter().sum();
                let half = (threshold + sum_w) / 2;
                Some(match direction {
                    Direction::AtLeast => (weights.clone(), half),
                    Direction::AtMost => (weights.iter().map(|w| -w).collect(), -half),
                })
            }
        }
    }
}

/// Folds batch normalization into an integer threshold on `w·x`.
///
/// `alpha·((s + b - mu)/sigma) >= 0` is `s >= mu - b` when `alpha/sigma > 0`
/// and `s <= mu - b` when it is negative; `alpha = 0` makes the neuron
/// constantly on. Since `s` ranges over `-N, -N+2, …, N` with
/// `N = Σ|w_i|`, the threshold is tightened to that lattice.
pub fn fold_batchnorm<T: Scalar>(n: &Neuron<T>) -> Result<NeuronTest> {
    let exact = |x: &T| {
        x.to_rational()
            .ok_or_else(|| Error::Parameter("non-finite neuron parameter".into()))
    };
    let sigma = exact(&n.sigma)?;
    if sigma.is_zero() {
        return Err(Error::Parameter("zero variance neuron".into()));
    }
    let alpha = exact(&n.alpha)?;
    if alpha.is_zero() {
        return Ok(NeuronTest::Constant(true));
    }
    let t: BigRational = exact(&n.mu)? - exact(&n.bias)?;
    let big_n: i64 = n.weights.iter().map(|w| w.abs()).sum();
    let lattice = |x: &BigInt, up: bool| -> BigInt {
        let odd = (x - BigInt::from(big_n)) % 2 != BigInt::zero();
        match (odd, up) {
            (false, _) => x.clone(),
            (true, true) => x + 1,
            (true, false) => x - 1,
        }
    };
    let n_big = BigInt::from(big_n);
    let direction = if alpha.is_positive() == sigma.is_positive() {
        Direction::AtLeast
    } else {
        Direction::AtMost
    };
    let threshold = match direction {
        Direction::AtLeast => {
            let th = lattice(&ceil_int(&t), true);
            if th > n_big {
                return Ok(NeuronTest::Constant(false));
            }
            if th <= -n_big.clone() {
                return Ok(NeuronTest::Constant(true));
            }
            th
        }
        Direction::AtMost => {
            let th = lattice(&floor_int(&t), false);
            if th < -n_big.clone() {
                return Ok(NeuronTest::Constant(false));
            }
            if th >= n_big {
                return Ok(NeuronTest::Constant(true));
            }
            th
        }
    };
    Ok(NeuronTest::Threshold {
        weights: n.weights.clone(),
        direction,
        threshold: threshold.to_i64().expect("threshold lies within [-N, N]"),
    })
}

/// Emits `y ↔ Σ w_i·l_i >= b` as
/// `Σ w_i·l_i + (b + N)·¬y >= b` and `Σ w_i·l_i + (b - 1 - N)·y <= b - 1`
/// with `N = Σ|w_i|`. The second constraint uses `b - 1` so that `¬y`
/// forces the strict `Σ < b`.
pub fn encode_bnn_neuron(f: &mut Formula, terms: &[(i64, Lit)], bound: i64, y: Lit) -> (PbConstraint, PbConstraint) {
    let big_n: i64 = terms.iter().map(|(w, _)| w.abs()).sum();
    let mut lower = terms.to_vec();
    lower.push((bound + big_n, !y));
    let mut upper = terms.to_vec();
    upper.push((bound - 1 - big_n, y));
    let lower = PbConstraint::ge(lower, bound);
    let upper = PbConstraint::le(upper, bound - 1);
    f.add_pb(lower.clone());
    f.add_pb(upper.clone());
    (lower, upper)
}

/// Variables created for a network.
#[derive(Clone, Debug)]
pub struct BnnEncoding {
    pub layers: Vec<Vec<Lit>>,
    pub competitors: Vec<Option<Lit>>,
    pub selector: Node,
}

pub fn add_bnn_target<T: Scalar>(
    f: &mut Formula,
    bnn: &BinarizedNN<T>,
    target: usize,
) -> Result<BnnEncoding> {
    let mut signals: Vec<Lit> = (0..bnn.inputs)
        .map(|i| f.input_lit(i, 1).expect("{0,1} input feature"))
        .collect();
    let mut layers = Vec::with_capacity(bnn.hidden.len());
    for (li, layer) in bnn.hidden.iter().enumerate() {
        let mut out = Vec::with_capacity(layer.neurons.len());
        for (ni, neuron) in layer.neurons.iter().enumerate() {
            let y = f.new_var(VarRole::Neuron { layer: li, index: ni }).pos();
            let test = fold_batchnorm(neuron)?;
            match test.literal_form() {
                None => f.add_clause(vec![if test.holds(&[]) { y } else { !y }]),
                Some((coeffs, bound)) => {
                    let terms: Vec<(i64, Lit)> = coeffs
                        .iter()
                        .zip(&signals)
                        .filter(|(c, _)| **c != 0)
                        .map(|(&c, &l)| (c, l))
                        .collect();
                    encode_bnn_neuron(f, &terms, bound, y);
                }
            }
            out.push(y);
        }
        layers.push(out.clone());
        signals = out;
    }
    let (competitors, selector) = encode_bnn_output(f, &bnn.output, &signals, target)?;
    Ok(BnnEncoding {
        layers,
        competitors,
        selector,
    })
}

/// Competitor variables `y_k` (class `k` beats `target`, lower index winning
/// ties) and the selector `s_target ↔ ⋀ ¬y_k`, which is asserted.
pub fn encode_bnn_output<T: Scalar>(
    f: &mut Formula,
    output: &OutputLayer<T>,
    signals: &[Lit],
    target: usize,
) -> Result<(Vec<Option<Lit>>, Node)> {
    let k_classes = output.weights.len();
    if target >= k_classes {
        return Err(Error::UnknownClass(target.to_string()));
    }
    let bias = |k: usize| {
        output.bias[k]
            .to_rational()
            .ok_or_else(|| Error::Parameter("non-finite output bias".into()))
    };
    let bj = bias(target)?;
    let mut competitors = vec![None; k_classes];
    let mut beaten = Vec::new();
    for k in 0..k_classes {
        if k == target {
            continue;
        }
        let d: Vec<i64> = output.weights[k]
            .iter()
            .zip(&output.weights[target])
            .map(|(a, b)| a - b)
            .collect();
        let sum_d: i64 = d.iter().sum();
        let big_n: i64 = d.iter().map(|x| x.abs()).sum();
        // score_k - score_j = 2·d·l - Σd + (b_k - b_j)
        let q = (BigRational::from_integer(sum_d.into()) - (bias(k)? - bj.clone()))
            / BigRational::from_integer(2.into());
        let bound = if k < target { ceil_int(&q) } else { floor_int(&q) + 1 };
        let bound = bound
            .max(BigInt::from(-big_n))
            .min(BigInt::from(big_n + 1))
            .to_i64()
            .expect("clamped");
        let y = f.new_var(VarRole::Competitor { class: k }).pos();
        let terms: Vec<(i64, Lit)> = d
            .iter()
            .zip(signals)
            .filter(|(c, _)| **c != 0)
            .map(|(&c, &l)| (c, l))
            .collect();
        encode_bnn_neuron(f, &terms, bound, y);
        competitors[k] = Some(y);
        beaten.push(Node::Lit(!y));
    }
    let selector = f.define_and(&beaten, VarRole::Selector { class: target });
    f.assert_node(selector);
    Ok((competitors, selector))
}
