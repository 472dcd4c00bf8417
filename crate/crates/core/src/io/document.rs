//! Canonical JSON model documents.
//!
//! One schema covers all three families. Serialization is canonical (fixed
//! key order, two-space indentation, trailing newline), so loading and
//! saving a canonical file reproduces it byte for byte.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    BinarizedNN, Classifier, DecisionTree, Edge, HiddenLayer, Model, Neuron, Node, OutputLayer,
    RandomForest,
};
use crate::scalar::Scalar;
use crate::space::FeatureSpace;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format_version: u32,
    pub family: Family,
    pub features: Vec<FeatureDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<Vec<usize>>,
    pub classes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forest: Option<ForestDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bnn: Option<BnnDoc>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Dt,
    Rf,
    Bnn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureDoc {
    pub name: String,
    pub domain: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDoc {
    pub root: usize,
    pub nodes: Vec<NodeDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeDoc {
    Internal { feature: usize, edges: Vec<EdgeDoc> },
    Leaf { class: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub values: Vec<i64>,
    pub child: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestDoc {
    pub class_order: Vec<usize>,
    pub trees: Vec<TreeDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuronDoc {
    pub weights: Vec<i64>,
    pub bias: f64,
    pub alpha: f64,
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerDoc {
    pub neurons: Vec<NeuronDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDoc {
    pub weights: Vec<Vec<i64>>,
    pub bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BnnDoc {
    pub hidden: Vec<LayerDoc>,
    pub output: OutputDoc,
}

impl TreeDoc {
    fn from_tree(t: &DecisionTree) -> Self {
        TreeDoc {
            root: t.root,
            nodes: t
                .nodes
                .iter()
                .map(|n| match n {
                    Node::Leaf { class } => NodeDoc::Leaf { class: *class },
                    Node::Internal { feature, edges } => NodeDoc::Internal {
                        feature: *feature,
                        edges: edges
                            .iter()
                            .map(|e| EdgeDoc {
                                values: e.values.clone(),
                                child: e.child,
                            })
                            .collect(),
                    },
                })
                .collect(),
        }
    }

    fn to_tree(&self) -> DecisionTree {
        DecisionTree {
            root: self.root,
            nodes: self
                .nodes
                .iter()
                .map(|n| match n {
                    NodeDoc::Leaf { class } => Node::Leaf { class: *class },
                    NodeDoc::Internal { feature, edges } => Node::Internal {
                        feature: *feature,
                        edges: edges
                            .iter()
                            .map(|e| Edge {
                                values: e.values.clone(),
                                child: e.child,
                            })
                            .collect(),
                    },
                })
                .collect(),
        }
    }
}

fn missing(what: &str) -> Error {
    Error::Parse {
        offset: 0,
        line: 0,
        column: 0,
        message: format!("missing `{what}` payload"),
    }
}

fn param<T: Scalar>(x: f64, location: &str) -> Result<T> {
    T::from_f64(x).filter(|_| x.is_finite()).ok_or_else(|| {
        Error::Invalid(crate::model::Violation::new(location, "non-finite parameter"))
    })
}

impl ModelDocument {
    pub fn from_model<T: Scalar>(model: &Model<T>) -> Self {
        let space = &model.space;
        let features = (0..space.num_features())
            .map(|i| FeatureDoc {
                name: space.name(i).to_string(),
                domain: space.domain(i).to_vec(),
            })
            .collect();
        let mut doc = ModelDocument {
            format_version: FORMAT_VERSION,
            family: Family::Dt,
            features,
            groups: space.groups().to_vec(),
            classes: model.classes.clone(),
            tree: None,
            forest: None,
            bnn: None,
        };
        match &model.classifier {
            Classifier::Tree(t) => doc.tree = Some(TreeDoc::from_tree(t)),
            Classifier::Forest(rf) => {
                doc.family = Family::Rf;
                doc.forest = Some(ForestDoc {
                    class_order: rf.class_order.clone(),
                    trees: rf.trees.iter().map(TreeDoc::from_tree).collect(),
                });
            }
            Classifier::Bnn(n) => {
                doc.family = Family::Bnn;
                doc.bnn = Some(BnnDoc {
                    hidden: n
                        .hidden
                        .iter()
                        .map(|l| LayerDoc {
                            neurons: l
                                .neurons
                                .iter()
                                .map(|u| NeuronDoc {
                                    weights: u.weights.clone(),
                                    bias: u.bias.to_f64_lossy(),
                                    alpha: u.alpha.to_f64_lossy(),
                                    mu: u.mu.to_f64_lossy(),
                                    sigma: u.sigma.to_f64_lossy(),
                                })
                                .collect(),
                        })
                        .collect(),
                    output: OutputDoc {
                        weights: n.output.weights.clone(),
                        bias: n.output.bias.iter().map(Scalar::to_f64_lossy).collect(),
                    },
                });
            }
        }
        doc
    }

    /// Validated classifier.
    pub fn to_model<T: Scalar>(&self) -> Result<Model<T>> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Invalid(crate::model::Violation::new(
                "format_version",
                format!("unsupported version {}", self.format_version),
            )));
        }
        let names = self.features.iter().map(|f| f.name.clone()).collect();
        let domains = self.features.iter().map(|f| f.domain.clone()).collect();
        let space = FeatureSpace::with_groups(names, domains, self.groups.clone())?;
        let classifier = match self.family {
            Family::Dt => Classifier::Tree(self.tree.as_ref().ok_or_else(|| missing("tree"))?.to_tree()),
            Family::Rf => {
                let f = self.forest.as_ref().ok_or_else(|| missing("forest"))?;
                Classifier::Forest(RandomForest {
                    trees: f.trees.iter().map(TreeDoc::to_tree).collect(),
                    class_order: f.class_order.clone(),
                })
            }
            Family::Bnn => {
                let b = self.bnn.as_ref().ok_or_else(|| missing("bnn"))?;
                let mut hidden = Vec::with_capacity(b.hidden.len());
                for (li, l) in b.hidden.iter().enumerate() {
                    let mut neurons = Vec::with_capacity(l.neurons.len());
                    for (ni, u) in l.neurons.iter().enumerate() {
                        let loc = format!("bnn.hidden[{li}].neurons[{ni}]");
                        neurons.push(Neuron {
                            weights: u.weights.clone(),
                            bias: param(u.bias, &loc)?,
                            alpha: param(u.alpha, &loc)?,
                            mu: param(u.mu, &loc)?,
                            sigma: param(u.sigma, &loc)?,
                        });
                    }
                    hidden.push(HiddenLayer { neurons });
                }
                let bias = b
                    .output
                    .bias
                    .iter()
                    .map(|&x| param(x, "bnn.output.bias"))
                    .collect::<Result<_>>()?;
                Classifier::Bnn(BinarizedNN {
                    inputs: self.features.len(),
                    hidden,
                    output: OutputLayer {
                        weights: b.output.weights.clone(),
                        bias,
                    },
                })
            }
        };
        Model::new(space, self.classes.clone(), classifier)
    }

    /// Canonical text.
    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| parse_error(text, &e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_canonical_string())?;
        Ok(())
    }
}

/// Parse error with the byte offset of the offending character, or the
/// input length when the text ends early.
pub(crate) fn parse_error(text: &str, e: &serde_json::Error) -> Error {
    let (line, column) = (e.line(), e.column());
    let offset = if e.is_eof() {
        text.len()
    } else {
        let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
        let within: usize = text[start..]
            .chars()
            .take(column.saturating_sub(1))
            .map(char::len_utf8)
            .sum();
        start + within
    };
    Error::Parse {
        offset: offset.min(text.len()),
        line,
        column,
        message: e.to_string(),
    }
}

/// Loads and validates a model file.
pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<Model<T>> {
    ModelDocument::load(path)?.to_model()
}
