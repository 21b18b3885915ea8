//! Diversified multiple trees: `k` C4.5 trees with pairwise disjoint
//! attribute sets, built by knocking out every attribute an earlier tree used.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::dataset::{Dataset, Row};
use crate::tree::{build_tree, DecisionTree, TreeParams};
use crate::vote::{ClassOrder, VoteBreakdown};
use crate::{Error, Result};

/// Preset ensemble sizes used by the benchmark tables.
pub const K_PRESETS: [usize; 4] = [3, 7, 13, 21];
/// Alternative presets used by the voting-scheme study.
pub const K_PRESETS_CV: [usize; 4] = [3, 5, 11, 21];

/// How per-tree predictions are weighted in the vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VotingScheme {
    /// One vote per tree.
    Simple,
    /// Laplace accuracy of the reached leaf.
    Laplace,
    /// Fraction of the training rows that reached the leaf.
    Support,
    /// Misclassified training weight at the leaf over `n`. Kept for
    /// comparison only; it rewards impure leaves.
    SupportFp,
}

impl VotingScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            VotingScheme::Simple => "simple",
            VotingScheme::Laplace => "laplace",
            VotingScheme::Support => "support",
            VotingScheme::SupportFp => "support-fp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "simple" => VotingScheme::Simple,
            "laplace" => VotingScheme::Laplace,
            "support" => VotingScheme::Support,
            "support-fp" => VotingScheme::SupportFp,
            _ => return None,
        })
    }
}

fn split_leaf(counts: &[f64], class: u32) -> (f64, f64) {
    let tp = counts.get(class as usize).copied().unwrap_or(0.0);
    let total: f64 = counts.iter().sum();
    (tp, (total - tp).max(0.0))
}

/// `(tp + 1) / (tp + fp + c)` for the leaf's predicted class.
pub fn laplace_weight(counts: &[f64], class: u32, n_classes: usize) -> f64 {
    let (tp, fp) = split_leaf(counts, class);
    (tp + 1.0) / (tp + fp + n_classes as f64)
}

/// Leaf coverage: training weight at the leaf over the training size.
pub fn support_weight(counts: &[f64], n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    counts.iter().sum::<f64>() / n
}

/// Misclassified training weight at the leaf over the training size.
pub fn support_fp_weight(counts: &[f64], class: u32, n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    split_leaf(counts, class).1 / n
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmtModel {
    pub trees: Vec<DecisionTree>,
    pub scheme: VotingScheme,
    /// Training class proportions, indexed like the schema's classes.
    pub class_priors: Vec<f64>,
    pub training_size: usize,
}

/// Build `k` trees in sequence; tree `i` may only test attributes that none
/// of trees `1..i` used. Once a tree uses no attribute the remaining trees
/// are identical majority leaves.
pub fn build_dmt(d: &Dataset, k: usize, params: &TreeParams) -> Result<DmtModel> {
    build_dmt_with_scheme(d, k, params, VotingScheme::Simple)
}

pub fn build_dmt_with_scheme(
    d: &Dataset,
    k: usize,
    params: &TreeParams,
    scheme: VotingScheme,
) -> Result<DmtModel> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut candidates: Vec<usize> = (0..d.n_attributes()).collect();
    let mut trees = Vec::with_capacity(k);
    for _ in 0..k {
        let tree = build_tree(d, params, &candidates)?;
        let used = tree.used_attribute_indices();
        candidates.retain(|a| !used.contains(a));
        trees.push(tree);
    }
    Ok(DmtModel {
        trees,
        scheme,
        class_priors: d.class_priors(),
        training_size: d.n_rows(),
    })
}

impl DmtModel {
    pub fn k(&self) -> usize {
        self.trees.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_priors.len()
    }

    pub fn with_scheme(mut self, scheme: VotingScheme) -> Self {
        self.scheme = scheme;
        self
    }

    /// Node count of every tree, in construction order.
    pub fn tree_sizes(&self) -> Vec<usize> {
        self.trees.iter().map(DecisionTree::size).collect()
    }

    pub fn used_attributes(&self) -> Vec<BTreeSet<usize>> {
        self.trees.iter().map(DecisionTree::used_attribute_indices).collect()
    }

    /// Vote weight a tree gives its prediction at a leaf with `counts`.
    pub fn leaf_weight(&self, counts: &[f64], class: u32) -> f64 {
        let n = self.training_size as f64;
        match self.scheme {
            VotingScheme::Simple => 1.0,
            VotingScheme::Laplace => laplace_weight(counts, class, self.n_classes()),
            VotingScheme::Support => support_weight(counts, n),
            VotingScheme::SupportFp => support_fp_weight(counts, class, n),
        }
    }

    pub fn classify<R: Row + ?Sized>(&self, row: &R) -> Result<VoteBreakdown> {
        let mut members = Vec::with_capacity(self.trees.len());
        for t in &self.trees {
            let (class, counts) = t.classify(row)?;
            members.push((class, self.leaf_weight(counts, class)));
        }
        let order = ClassOrder::from_priors(&self.class_priors);
        Ok(VoteBreakdown::tally(self.n_classes(), members, &order))
    }
}

pub fn classify_dmt<R: Row + ?Sized>(m: &DmtModel, row: &R) -> Result<VoteBreakdown> {
    m.classify(row)
}

pub fn tree_sizes(m: &DmtModel) -> Vec<usize> {
    m.tree_sizes()
}
