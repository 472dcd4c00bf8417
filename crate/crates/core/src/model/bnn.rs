use num_rational::BigRational;
use num_traits::Zero;

use super::Violation;
use crate::scalar::Scalar;
use crate::space::FeatureSpace;

/// Hidden neuron `Bin(BatchNorm(Lin(x)))`: outputs +1 iff
/// `alpha * ((w·x + bias - mu) / sigma) >= 0`, else -1.
#[derive(Clone, Debug, PartialEq)]
pub struct Neuron<T: Scalar = f64> {
    pub weights: Vec<i64>,
    pub bias: T,
    pub alpha: T,
    pub mu: T,
    pub sigma: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HiddenLayer<T: Scalar = f64> {
    pub neurons: Vec<Neuron<T>>,
}

/// Class scores `W_k · h + b_k`; one weight row and bias per class.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputLayer<T: Scalar = f64> {
    pub weights: Vec<Vec<i64>>,
    pub bias: Vec<T>,
}

/// Dense binarized network over `{0,1}` features; feature value `u` enters
/// the first layer as the signal `2u - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinarizedNN<T: Scalar = f64> {
    pub inputs: usize,
    pub hidden: Vec<HiddenLayer<T>>,
    pub output: OutputLayer<T>,
}

fn exact<T: Scalar>(x: &T) -> BigRational {
    x.to_rational().expect("validated parameters are finite")
}

impl<T: Scalar> Neuron<T> {
    pub fn preactivation(&self, signals: &[i64]) -> i64 {
        self.weights.iter().zip(signals).map(|(w, x)| w * x).sum()
    }

    /// Exact sign decision for signals in `{-1,+1}`.
    pub fn fires(&self, signals: &[i64]) -> bool {
        let s = BigRational::from_integer(self.preactivation(signals).into());
        let z = s + exact(&self.bias) - exact(&self.mu);
        let v = exact(&self.alpha) * (z / exact(&self.sigma));
        v >= BigRational::zero()
    }
}

impl<T: Scalar> BinarizedNN<T> {
    /// Hidden-layer signals (each `-1` or `+1`) for a `{0,1}` input point.
    pub fn activations(&self, point: &[i64]) -> Vec<Vec<i64>> {
        let mut signals: Vec<i64> = point.iter().map(|&u| 2 * u - 1).collect();
        let mut out = Vec::with_capacity(self.hidden.len());
        for layer in &self.hidden {
            signals = layer
                .neurons
                .iter()
                .map(|n| if n.fires(&signals) { 1 } else { -1 })
                .collect();
            out.push(signals.clone());
        }
        out
    }

    pub fn scores(&self, point: &[i64]) -> Vec<BigRational> {
        let last = self
            .activations(point)
            .pop()
            .unwrap_or_else(|| point.iter().map(|&u| 2 * u - 1).collect());
        self.output
            .weights
            .iter()
            .zip(&self.output.bias)
            .map(|(row, b)| {
                let s: i64 = row.iter().zip(&last).map(|(w, h)| w * h).sum();
                BigRational::from_integer(s.into()) + exact(b)
            })
            .collect()
    }

    /// Argmax of the class scores; ties go to the lowest class index.
    pub fn predict(&self, point: &[i64]) -> usize {
        let scores = self.scores(point);
        let mut best = 0;
        for k in 1..scores.len() {
            if scores[k] > scores[best] {
                best = k;
            }
        }
        best
    }

    pub fn width(&self, layer: usize) -> usize {
        if layer == 0 {
            self.inputs
        } else {
            self.hidden[layer - 1].neurons.len()
        }
    }

    pub(crate) fn check(&self, space: &FeatureSpace, classes: usize) -> Result<(), Violation> {
        if self.inputs != space.num_features() {
            return Err(Violation::new(
                "bnn.inputs",
                format!("{} inputs for {} features", self.inputs, space.num_features()),
            ));
        }
        for i in 0..space.num_features() {
            if space.domain(i) != [0, 1] {
                return Err(Violation::new(
                    format!("feature_space.domains[{i}]"),
                    "binarized networks need {0,1} features",
                ));
            }
        }
        let finite = |x: &T| x.to_rational().is_some();
        for (l, layer) in self.hidden.iter().enumerate() {
            if layer.neurons.is_empty() {
                return Err(Violation::new(format!("bnn.hidden[{l}]"), "empty layer"));
            }
            let width = self.width(l);
            for (j, n) in layer.neurons.iter().enumerate() {
                let loc = format!("bnn.hidden[{l}].neurons[{j}]");
                if n.weights.len() != width {
                    return Err(Violation::new(
                        loc,
                        format!("{} weights, layer input width is {width}", n.weights.len()),
                    ));
                }
                if n.weights.iter().any(|w| !(-1..=1).contains(w)) {
                    return Err(Violation::new(loc, "weights must be in {-1,0,1}"));
                }
                if ![&n.bias, &n.alpha, &n.mu, &n.sigma].into_iter().all(finite) {
                    return Err(Violation::new(loc, "non-finite parameter"));
                }
                if n.sigma.is_zero() {
                    return Err(Violation::new(loc, "zero variance neuron"));
                }
            }
        }
        let width = self.width(self.hidden.len());
        if self.output.weights.len() != classes || self.output.bias.len() != classes {
            return Err(Violation::new(
                "bnn.output",
                format!("output layer must have one row and bias per class ({classes})"),
            ));
        }
        for (k, row) in self.output.weights.iter().enumerate() {
            if row.len() != width {
                return Err(Violation::new(
                    format!("bnn.output.weights[{k}]"),
                    format!("{} weights, last layer width is {width}", row.len()),
                ));
            }
            if row.iter().any(|w| !(-1..=1).contains(w)) {
                return Err(Violation::new(
                    format!("bnn.output.weights[{k}]"),
                    "weights must be in {-1,0,1}",
                ));
            }
        }
        if !self.output.bias.iter().all(finite) {
            return Err(Violation::new("bnn.output.bias", "non-finite parameter"));
        }
        Ok(())
    }
}
