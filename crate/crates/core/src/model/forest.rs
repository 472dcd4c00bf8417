use super::{DecisionTree, Violation};
use crate::space::FeatureSpace;

/// Majority-vote ensemble. `class_order[0]` wins every tie it takes part in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    pub class_order: Vec<usize>,
}

impl RandomForest {
    /// Forest with ties broken by ascending class index.
    pub fn new(trees: Vec<DecisionTree>, num_classes: usize) -> Self {
        Self {
            trees,
            class_order: (0..num_classes).collect(),
        }
    }

    pub fn rank(&self, class: usize) -> usize {
        self.class_order
            .iter()
            .position(|&c| c == class)
            .unwrap_or(usize::MAX)
    }

    pub fn votes(&self, point: &[i64], num_classes: usize) -> Vec<usize> {
        let mut votes = vec![0; num_classes];
        for t in &self.trees {
            votes[t.predict(point)] += 1;
        }
        votes
    }

    pub fn predict(&self, point: &[i64], num_classes: usize) -> usize {
        let votes = self.votes(point, num_classes);
        let best = *votes.iter().max().expect("at least one class");
        *self
            .class_order
            .iter()
            .find(|&&c| votes[c] == best)
            .expect("class order is a permutation")
    }

    pub(crate) fn check(&self, space: &FeatureSpace, classes: usize) -> Result<(), Violation> {
        if self.trees.is_empty() {
            return Err(Violation::new("forest.trees", "forest has no trees"));
        }
        let mut sorted = self.class_order.clone();
        sorted.sort_unstable();
        if sorted != (0..classes).collect::<Vec<_>>() {
            return Err(Violation::new(
                "forest.class_order",
                "class order is not a permutation of the classes",
            ));
        }
        for (i, t) in self.trees.iter().enumerate() {
            t.check(space, classes, &format!("forest.trees[{i}]"))?;
        }
        Ok(())
    }
}
