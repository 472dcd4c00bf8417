//! Classifiers over finite feature spaces and explanation problems.

mod bnn;
mod forest;
mod tree;

use std::fmt;
use std::sync::Arc;

pub use bnn::{BinarizedNN, HiddenLayer, Neuron, OutputLayer};
pub use forest::RandomForest;
pub use tree::{DecisionTree, Edge, Node, Path};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::{FeatureSpace, Instance};

/// First invariant violation found while validating a model or problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl Violation {
    pub fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classifier<T: Scalar = f64> {
    Tree(DecisionTree),
    Forest(RandomForest),
    Bnn(BinarizedNN<T>),
}

impl<T: Scalar> Classifier<T> {
    pub fn family(&self) -> &'static str {
        match self {
            Classifier::Tree(_) => "dt",
            Classifier::Forest(_) => "rf",
            Classifier::Bnn(_) => "bnn",
        }
    }
}

/// A classifier together with its feature space and class names.
#[derive(Clone, Debug, PartialEq)]
pub struct Model<T: Scalar = f64> {
    pub space: FeatureSpace,
    pub classes: Vec<String>,
    pub classifier: Classifier<T>,
}

impl<T: Scalar> Model<T> {
    /// Builds and validates a model.
    pub fn new(space: FeatureSpace, classes: Vec<String>, classifier: Classifier<T>) -> Result<Self> {
        let model = Self {
            space,
            classes,
            classifier,
        };
        model.validate().map_err(Error::Invalid)?;
        Ok(model)
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_index(&self, name: &str) -> Result<usize> {
        self.classes
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownClass(name.to_string()))
    }

    /// Position of a class in the tie-breaking order; lower wins ties.
    pub fn class_rank(&self, class: usize) -> usize {
        match &self.classifier {
            Classifier::Forest(rf) => rf.rank(class),
            _ => class,
        }
    }

    /// `κ(point)`.
    pub fn predict(&self, point: &[i64]) -> Result<usize> {
        self.space.contains(point)?;
        Ok(self.predict_unchecked(point))
    }

    /// Prediction for a point already known to lie in the space.
    pub fn predict_unchecked(&self, point: &[i64]) -> usize {
        match &self.classifier {
            Classifier::Tree(t) => t.predict(point),
            Classifier::Forest(rf) => rf.predict(point, self.num_classes()),
            Classifier::Bnn(n) => n.predict(point),
        }
    }

    pub fn validate(&self) -> std::result::Result<(), Violation> {
        self.space.check()?;
        if self.classes.is_empty() {
            return Err(Violation::new("classes", "no classes"));
        }
        let k = self.num_classes();
        match &self.classifier {
            Classifier::Tree(t) => t.check(&self.space, k, "tree"),
            Classifier::Forest(rf) => rf.check(&self.space, k),
            Classifier::Bnn(n) => n.check(&self.space, k),
        }
    }
}

/// Classifier plus an instance `(v, c)` with `c = κ(v)`.
#[derive(Clone, Debug)]
pub struct ExplanationProblem<T: Scalar = f64> {
    pub model: Arc<Model<T>>,
    pub instance: Instance,
}

impl<T: Scalar> ExplanationProblem<T> {
    /// Validated problem; fails on any violation.
    pub fn new(model: Arc<Model<T>>, instance: Instance) -> Result<Self> {
        let p = Self { model, instance };
        validate_problem(&p).map_err(Error::Invalid)?;
        Ok(p)
    }

    /// Problem whose label is filled in by the classifier.
    pub fn for_point(model: Arc<Model<T>>, values: Vec<i64>) -> Result<Self> {
        let label = model.predict(&values)?;
        Self::new(model, Instance::new(values, label))
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.model.space
    }

    pub fn label(&self) -> usize {
        self.instance.label
    }
}

/// Checks every model invariant and the label `c = κ(v)`.
pub fn validate_problem<T: Scalar>(problem: &ExplanationProblem<T>) -> std::result::Result<(), Violation> {
    let model = &problem.model;
    model.validate()?;
    let inst = &problem.instance;
    if let Err(e) = model.space.contains(&inst.values) {
        return Err(Violation::new("instance.values", e.to_string()));
    }
    if inst.label >= model.num_classes() {
        return Err(Violation::new("instance.label", "unknown class"));
    }
    let predicted = model.predict_unchecked(&inst.values);
    if predicted != inst.label {
        return Err(Violation::new(
            "instance.label",
            format!(
                "label mismatch: instance says `{}`, classifier predicts `{}`",
                model.classes[inst.label], model.classes[predicted]
            ),
        ));
    }
    Ok(())
}
