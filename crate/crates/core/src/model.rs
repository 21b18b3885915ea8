//! One handle over every learner: a method description that can be fitted,
//! and the fitted model it produces.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{Dataset, Row, Schema};
use crate::dmt::{build_dmt_with_scheme, DmtModel, VotingScheme};
use crate::ensemble::{
    build_adaboost, build_bagging, build_random_forest, build_random_tree_ensemble, EnsembleKind,
    EnsembleModel, RandomSplitParams,
};
use crate::stats;
use crate::tree::{build_tree, DecisionTree, TreeParams};
use crate::vote::{ClassOrder, VoteBreakdown};
use crate::{Error, Result};

/// Default member count for bagging, forests and random trees, and round
/// count for boosting.
pub const DEFAULT_MEMBERS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// A single C4.5 tree.
    C45 { params: TreeParams },
    /// A constant classifier predicting the training majority.
    Majority,
    Dmt {
        k: usize,
        scheme: VotingScheme,
        params: TreeParams,
    },
    Bagging { members: usize, params: TreeParams },
    AdaBoost { rounds: usize, params: TreeParams },
    RandomForest {
        members: usize,
        split: RandomSplitParams,
        params: TreeParams,
    },
    RandomTree {
        members: usize,
        split: RandomSplitParams,
        params: TreeParams,
    },
}

impl Method {
    pub fn c45() -> Self {
        Method::C45 {
            params: TreeParams::default(),
        }
    }

    pub fn dmt(k: usize, scheme: VotingScheme) -> Self {
        Method::Dmt {
            k,
            scheme,
            params: TreeParams::default(),
        }
    }

    pub fn bagging(members: usize) -> Self {
        Method::Bagging {
            members,
            params: TreeParams::default(),
        }
    }

    pub fn adaboost(rounds: usize) -> Self {
        Method::AdaBoost {
            rounds,
            params: TreeParams::default(),
        }
    }

    /// Unpruned trees grown down to single rows.
    pub fn random_forest(members: usize) -> Self {
        Method::RandomForest {
            members,
            split: RandomSplitParams::default(),
            params: TreeParams::unpruned(),
        }
    }

    pub fn random_tree(members: usize) -> Self {
        Method::RandomTree {
            members,
            split: RandomSplitParams::default(),
            params: TreeParams::default(),
        }
    }

    /// Build a method from its name and the optional size and scheme knobs.
    pub fn from_name(name: &str, k: Option<usize>, scheme: Option<VotingScheme>, members: Option<usize>) -> Result<Self> {
        let members = members.unwrap_or(DEFAULT_MEMBERS);
        let m = match name {
            "c45" => Method::c45(),
            "majority" => Method::Majority,
            "dmt" => Method::dmt(k.unwrap_or(7), scheme.unwrap_or(VotingScheme::Simple)),
            "bagging" => Method::bagging(members),
            "adaboost" => Method::adaboost(members),
            "random_forest" => Method::random_forest(members),
            "random_tree" => Method::random_tree(members),
            other => return Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let (count, what) = match self {
            Method::Dmt { k, .. } => (*k, "k"),
            Method::Bagging { members, .. }
            | Method::RandomForest { members, .. }
            | Method::RandomTree { members, .. } => (*members, "members"),
            Method::AdaBoost { rounds, .. } => (*rounds, "rounds"),
            Method::C45 { .. } | Method::Majority => (1, ""),
        };
        if count < 1 {
            return Err(Error::InvalidParameter(format!("{what} must be >= 1")));
        }
        if let Method::RandomTree { split, .. } = self {
            if split.top_k_pool < 1 {
                return Err(Error::InvalidParameter("top_k_pool must be >= 1".into()));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::C45 { .. } => "c45",
            Method::Majority => "majority",
            Method::Dmt { .. } => "dmt",
            Method::Bagging { .. } => "bagging",
            Method::AdaBoost { .. } => "adaboost",
            Method::RandomForest { .. } => "random_forest",
            Method::RandomTree { .. } => "random_tree",
        }
    }

    /// Short column label, e.g. `C4.5` or `7-DMT`.
    pub fn label(&self) -> String {
        match self {
            Method::C45 { .. } => "C4.5".into(),
            Method::Majority => "Majority".into(),
            Method::Dmt { k, scheme, .. } => match scheme {
                VotingScheme::Simple => format!("{k}-DMT"),
                s => format!("{k}-DMT/{}", s.as_str()),
            },
            Method::Bagging { .. } => "Bagging".into(),
            Method::AdaBoost { .. } => "AdaBoost".into(),
            Method::RandomForest { .. } => "RandomForest".into(),
            Method::RandomTree { .. } => "RandomTrees".into(),
        }
    }

    /// Every parameter, spelled out.
    pub fn descriptor(&self) -> String {
        let tp = |p: &TreeParams| {
            format!(
                "min_leaf={},confidence={}",
                p.min_leaf_instances, p.pruning_confidence
            )
        };
        let subset = |s: &RandomSplitParams| match s.forest_subset_size {
            Some(n) => format!("{n}"),
            None => "auto".into(),
        };
        match self {
            Method::C45 { params } => format!("c45({})", tp(params)),
            Method::Majority => "majority()".into(),
            Method::Dmt { k, scheme, params } => format!("dmt(k={k},scheme={},{})", scheme.as_str(), tp(params)),
            Method::Bagging { members, params } => format!("bagging(members={members},{})", tp(params)),
            Method::AdaBoost { rounds, params } => format!("adaboost(rounds={rounds},{})", tp(params)),
            Method::RandomForest { members, split, params } => {
                format!("random_forest(members={members},subset={},{})", subset(split), tp(params))
            }
            Method::RandomTree { members, split, params } => {
                format!("random_tree(members={members},pool={},{})", split.top_k_pool, tp(params))
            }
        }
    }

    pub fn fit(&self, d: &Dataset, seed: u64) -> Result<Model> {
        self.validate()?;
        if d.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let nonempty = d.class_counts().iter().filter(|&&c| c > 0).count();
        if nonempty < 2 && !matches!(self, Method::Majority) {
            return Err(Error::TooFewClasses(nonempty));
        }
        let all: Vec<usize> = (0..d.n_attributes()).collect();
        Ok(match self {
            Method::C45 { params } => Model::Tree {
                tree: build_tree(d, params, &all)?,
                class_priors: d.class_priors(),
            },
            Method::Majority => Model::Tree {
                tree: build_tree(d, &TreeParams::default(), &[])?,
                class_priors: d.class_priors(),
            },
            Method::Dmt { k, scheme, params } => Model::Dmt(build_dmt_with_scheme(d, *k, params, *scheme)?),
            Method::Bagging { members, params } => Model::Ensemble(build_bagging(d, *members, params, seed)?),
            Method::AdaBoost { rounds, params } => Model::Ensemble(build_adaboost(d, *rounds, params, seed)?),
            Method::RandomForest { members, split, params } => {
                Model::Ensemble(build_random_forest(d, *members, split, params, seed)?)
            }
            Method::RandomTree { members, split, params } => {
                Model::Ensemble(build_random_tree_ensemble(d, *members, split, params, seed)?)
            }
        })
    }

    pub fn ensemble_kind(&self) -> Option<EnsembleKind> {
        match self {
            Method::Bagging { .. } => Some(EnsembleKind::Bagging),
            Method::AdaBoost { .. } => Some(EnsembleKind::AdaBoost),
            Method::RandomForest { .. } => Some(EnsembleKind::RandomForest),
            Method::RandomTree { .. } => Some(EnsembleKind::RandomTree),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Tree {
        tree: DecisionTree,
        class_priors: Vec<f64>,
    },
    Dmt(DmtModel),
    Ensemble(EnsembleModel),
}

impl Model {
    pub fn schema(&self) -> &Arc<Schema> {
        match self {
            Model::Tree { tree, .. } => tree.schema(),
            Model::Dmt(m) => m.trees[0].schema(),
            Model::Ensemble(e) => e.members[0].schema(),
        }
    }

    pub fn trees(&self) -> Vec<&DecisionTree> {
        match self {
            Model::Tree { tree, .. } => vec![tree],
            Model::Dmt(m) => m.trees.iter().collect(),
            Model::Ensemble(e) => e.members.iter().collect(),
        }
    }

    pub fn tree_sizes(&self) -> Vec<usize> {
        self.trees().iter().map(|t| t.size()).collect()
    }

    pub fn class_priors(&self) -> &[f64] {
        match self {
            Model::Tree { class_priors, .. } => class_priors,
            Model::Dmt(m) => &m.class_priors,
            Model::Ensemble(e) => &e.class_priors,
        }
    }

    pub fn classify<R: Row + ?Sized>(&self, row: &R) -> Result<VoteBreakdown> {
        match self {
            Model::Tree { tree, class_priors } => {
                let (class, _) = tree.classify(row)?;
                let order = ClassOrder::from_priors(class_priors);
                Ok(VoteBreakdown::tally(class_priors.len(), vec![(class, 1.0)], &order))
            }
            Model::Dmt(m) => m.classify(row),
            Model::Ensemble(e) => e.classify(row),
        }
    }

    /// Winning class of every row; `d` must already use the model's schema.
    pub fn predict_all(&self, d: &Dataset) -> Result<Vec<u32>> {
        (0..d.n_rows()).map(|r| self.classify(&d.row(r)).map(|v| v.winner)).collect()
    }

    pub fn accuracy(&self, test: &Dataset) -> Result<f64> {
        if test.is_empty() {
            return Err(Error::EmptyDataset);
        }
        stats::accuracy(&self.predict_all(test)?, test.labels())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn every_method_fits_separable_data() {
        let d = synth::separable(40, 3, 3, 6);
        for name in ["c45", "dmt", "bagging", "adaboost", "random_forest", "random_tree"] {
            let m = Method::from_name(name, Some(3), None, Some(5)).unwrap();
            let model = m.fit(&d, 1).unwrap();
            assert_eq!(model.accuracy(&d).unwrap(), 1.0, "{name}");
        }
    }

    #[test]
    fn majority_on_skewed_classes() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| alloc::vec![i as f64]).collect();
        let labels: Vec<&str> = (0..10).map(|i| if i < 8 { "a" } else { "b" }).collect();
        let d = Dataset::from_continuous(&["x"], &rows, &labels).unwrap();
        let m = Method::Majority.fit(&d, 0).unwrap();
        assert_eq!(m.tree_sizes(), alloc::vec![1]);
        assert!((m.accuracy(&d).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(Method::from_name("dmt", Some(0), None, None).is_err());
        assert!(Method::from_name("bagging", None, None, Some(0)).is_err());
        assert!(Method::from_name("svm", None, None, None).is_err());
        let one = synth::separable(10, 1, 0, 0);
        let single = one.subset(&(0..10).filter(|&r| one.label(r) == 0).collect::<Vec<_>>());
        assert_eq!(Method::c45().fit(&single, 0), Err(Error::TooFewClasses(1)));
    }

    #[test]
    fn labels_and_descriptors() {
        assert_eq!(Method::dmt(7, VotingScheme::Simple).label(), "7-DMT");
        assert_eq!(Method::dmt(7, VotingScheme::Laplace).label(), "7-DMT/laplace");
        assert_eq!(
            Method::random_forest(100).descriptor(),
            "random_forest(members=100,subset=auto,min_leaf=1,confidence=1)"
        );
    }
}
