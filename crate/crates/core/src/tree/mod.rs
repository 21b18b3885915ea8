//! C4.5-style decision trees.
//!
//! Splits are chosen by gain ratio among tests whose information gain is at
//! least the average positive gain. Continuous attributes get binary
//! `<= threshold` tests at midpoints between adjacent distinct values, with
//! the usual `log2(distinct - 1) / weight` charge on their gain. Categorical
//! attributes split multiway, one branch per declared category. Grown trees
//! are pruned bottom-up with the pessimistic (upper confidence limit) error
//! estimate.
//!
//! Missing cells are sent to the branch that received the most training
//! weight, both while growing and when classifying.

mod build;
mod prune;
mod split;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::dataset::{Dataset, Row, Schema, Value};
use crate::{Error, Result};

pub use build::{build_tree, build_tree_with, SplitSelector};
pub use prune::{pessimistic_errors, prune};
pub use split::{attribute_tests, best_split, entropy, gain_ratio, rank_tests, RankedTest};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitForm {
    /// One branch per declared category, in category order.
    Multiway,
    /// Branch 0 takes `value <= threshold`, branch 1 the rest.
    Threshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitTest {
    pub attribute: usize,
    pub form: SplitForm,
}

impl SplitTest {
    pub fn threshold(attribute: usize, threshold: f64) -> Self {
        SplitTest {
            attribute,
            form: SplitForm::Threshold(threshold),
        }
    }

    pub fn multiway(attribute: usize) -> Self {
        SplitTest {
            attribute,
            form: SplitForm::Multiway,
        }
    }

    /// Branch taken by a value; `None` for missing or unseen values.
    pub fn branch(&self, value: Value) -> Option<usize> {
        match (self.form, value) {
            (SplitForm::Threshold(t), Value::Num(x)) => Some(if x <= t { 0 } else { 1 }),
            (SplitForm::Multiway, Value::Cat(k)) => Some(k as usize),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        class: u32,
        /// Training weight per class that reached this leaf.
        counts: Vec<f64>,
    },
    Split {
        test: SplitTest,
        counts: Vec<f64>,
        children: Vec<Node>,
        majority_branch: usize,
    },
}

impl Node {
    pub fn counts(&self) -> &[f64] {
        match self {
            Node::Leaf { counts, .. } | Node::Split { counts, .. } => counts,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { children, .. } => 1 + children.iter().map(Node::size).sum::<usize>(),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { children, .. } => children.iter().map(Node::leaves).sum(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { children, .. } => {
                1 + children.iter().map(Node::depth).max().unwrap_or(0)
            }
        }
    }

    fn collect_attributes(&self, out: &mut BTreeSet<usize>) {
        if let Node::Split { test, children, .. } = self {
            out.insert(test.attribute);
            for c in children {
                c.collect_attributes(out);
            }
        }
    }

    /// Leaf reached by a row.
    pub fn route<R: Row + ?Sized>(&self, row: &R) -> &Node {
        let mut node = self;
        while let Node::Split {
            test,
            children,
            majority_branch,
            ..
        } = node
        {
            let b = test
                .branch(row.value(test.attribute))
                .filter(|&b| b < children.len())
                .unwrap_or(*majority_branch);
            node = &children[b];
        }
        node
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeParams {
    /// Minimum training weight on at least two branches of any split.
    pub min_leaf_instances: usize,
    /// Pessimistic pruning confidence; `1.0` disables pruning.
    pub pruning_confidence: f64,
    /// Per-row training weights; uniform when `None`.
    pub instance_weights: Option<Vec<f64>>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            min_leaf_instances: 2,
            pruning_confidence: 0.25,
            instance_weights: None,
        }
    }
}

impl TreeParams {
    /// Fully grown trees: `min_leaf_instances = 1`, no pruning.
    pub fn unpruned() -> Self {
        TreeParams {
            min_leaf_instances: 1,
            pruning_confidence: 1.0,
            instance_weights: None,
        }
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.instance_weights = Some(weights);
        self
    }

    pub fn validate(&self, n_rows: usize) -> Result<()> {
        if self.min_leaf_instances < 1 {
            return Err(Error::InvalidParameter("min_leaf_instances must be >= 1".into()));
        }
        if !(self.pruning_confidence > 0.0 && self.pruning_confidence <= 1.0) {
            return Err(Error::InvalidParameter(
                "pruning_confidence must lie in (0, 1]".into(),
            ));
        }
        if let Some(w) = &self.instance_weights {
            if w.len() != n_rows {
                return Err(Error::InvalidParameter(alloc::format!(
                    "{} instance weights for {} rows",
                    w.len(),
                    n_rows
                )));
            }
            if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::InvalidParameter(
                    "instance weights must be finite and nonnegative".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn prunes(&self) -> bool {
        self.pruning_confidence < 1.0
    }
}

/// A grown (and possibly pruned) tree over a fixed schema.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    schema: Arc<Schema>,
    root: Node,
}

impl DecisionTree {
    pub fn from_parts(schema: Arc<Schema>, root: Node) -> Self {
        DecisionTree { schema, root }
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Total node count; 1 for a single leaf.
    pub fn size(&self) -> usize {
        self.root.size()
    }

    pub fn used_attribute_indices(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.root.collect_attributes(&mut out);
        out
    }

    /// Names of every attribute tested somewhere in the tree.
    pub fn used_attributes(&self) -> BTreeSet<String> {
        self.used_attribute_indices()
            .into_iter()
            .map(|a| self.schema.attribute(a).name.clone())
            .collect()
    }

    /// Predicted class and the class counts of the leaf that was reached.
    pub fn classify<R: Row + ?Sized>(&self, row: &R) -> Result<(u32, &[f64])> {
        if row.width() != self.schema.len() {
            return Err(Error::RowLength {
                expected: self.schema.len(),
                found: row.width(),
            });
        }
        match self.root.route(row) {
            Node::Leaf { class, counts } => Ok((*class, counts)),
            Node::Split { .. } => unreachable!("route always ends at a leaf"),
        }
    }

    /// Classify every row of a dataset already expressed in this tree's schema.
    pub fn predict_all(&self, data: &Dataset) -> Result<Vec<u32>> {
        (0..data.n_rows())
            .map(|r| self.classify(&data.row(r)).map(|(c, _)| c))
            .collect()
    }
}

#[cfg(test)]
mod tests;
