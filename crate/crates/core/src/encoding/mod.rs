//! Logical encodings of classifiers.
//!
//! [`encode_target`] builds a formula whose models, projected onto the input
//! value variables, are exactly the points classified as the target class.

mod bnn;
mod dimacs;
mod domains;
mod formula;
mod pb;
mod trees;

pub use bnn::{
    add_bnn_target, encode_bnn_neuron, encode_bnn_output, fold_batchnorm, BnnEncoding, Direction,
    NeuronTest,
};
pub use dimacs::{parse_dimacs, write_dimacs, write_opb};
pub use domains::{encode_domains, PAIRWISE_AMO_LIMIT};
pub use formula::{assume_fixed, Assumptions, Cmp, Formula, Lit, Node, PbConstraint, Var, VarRole};
pub use pb::{normalize, pb_to_cnf, sequential_counter, NormalizedPb};
pub use trees::{add_rf_target, add_tree_target, encode_rf_target, encode_tree, TreeEncoding};

use crate::error::{Error, Result};
use crate::model::{Classifier, Model};
use crate::scalar::Scalar;

/// Formula for `κ(x) = target` over the model's feature space.
pub fn encode_target<T: Scalar>(model: &Model<T>, target: usize) -> Result<Formula> {
    if target >= model.num_classes() {
        return Err(Error::UnknownClass(target.to_string()));
    }
    let mut f = Formula::new();
    domains::add_domains(&mut f, &model.space);
    match &model.classifier {
        Classifier::Tree(t) => {
            add_tree_target(&mut f, t, model.num_classes(), target);
        }
        Classifier::Forest(rf) => {
            add_rf_target(&mut f, rf, model.num_classes(), target);
        }
        Classifier::Bnn(n) => {
            add_bnn_target(&mut f, n, target)?;
        }
    }
    Ok(f)
}
