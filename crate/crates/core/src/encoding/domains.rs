use super::formula::{Formula, Lit, VarRole};
use crate::space::FeatureSpace;

/// Largest domain that still gets pairwise at-most-one clauses.
pub const PAIRWISE_AMO_LIMIT: usize = 6;

/// Fragment with one variable per (feature, value) and exactly-one
/// constraints per feature and per categorical group.
pub fn encode_domains(space: &FeatureSpace) -> Formula {
    let mut f = Formula::new();
    add_domains(&mut f, space);
    f
}

pub(crate) fn add_domains(f: &mut Formula, space: &FeatureSpace) {
    let mut inputs = Vec::with_capacity(space.num_features());
    for feature in 0..space.num_features() {
        let vars: Vec<_> = space
            .domain(feature)
            .iter()
            .map(|&value| f.new_var(VarRole::Input { feature, value }))
            .collect();
        inputs.push(vars);
    }
    for vars in &inputs {
        let lits: Vec<Lit> = vars.iter().map(|v| v.pos()).collect();
        exactly_one(f, &lits);
    }
    for (u, members) in space.units().iter().enumerate() {
        if space.is_grouped(u) {
            // Member value 1 is domain index 1 of a {0,1} feature.
            let lits: Vec<Lit> = members.iter().map(|&m| inputs[m][1].pos()).collect();
            exactly_one(f, &lits);
        }
    }
    f.set_inputs(inputs, space.clone());
}

pub(crate) fn exactly_one(f: &mut Formula, lits: &[Lit]) {
    f.add_clause(lits.to_vec());
    if lits.len() <= PAIRWISE_AMO_LIMIT {
        for i in 0..lits.len() {
            for j in i + 1..lits.len() {
                f.add_clause(vec![!lits[i], !lits[j]]);
            }
        }
    } else {
        sequential_amo(f, lits);
    }
}

/// At-most-one with prefix variables `s_i ↔ l_1 ∨ … ∨ l_i`.
fn sequential_amo(f: &mut Formula, lits: &[Lit]) {
    let n = lits.len();
    let mut prev = lits[0];
    for &l in &lits[1..n] {
        f.add_clause(vec![!l, !prev]);
        let s = f.new_var(VarRole::Aux).pos();
        f.add_clause(vec![!prev, s]);
        f.add_clause(vec![!l, s]);
        f.add_clause(vec![!s, prev, l]);
        prev = s;
    }
}
