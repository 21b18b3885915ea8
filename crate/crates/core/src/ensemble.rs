//! Comparison ensembles over the same tree learner: bagging, AdaBoost.M1,
//! random forests and randomized C4.5 ("random trees").
//!
//! Member `i` of a bagging, forest or random-tree ensemble draws all of its
//! randomness from stream `(seed, KIND_TAG, i)`, so members can be built in
//! any order or in parallel. AdaBoost rounds are sequential and use no
//! randomness.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::dataset::{Dataset, Row};
use crate::math;
use crate::rng::{self, tag};
use crate::tree::{build_tree, build_tree_with, DecisionTree, SplitSelector, TreeParams};
use crate::vote::{ClassOrder, VoteBreakdown};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnsembleKind {
    Bagging,
    AdaBoost,
    RandomForest,
    RandomTree,
}

impl EnsembleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EnsembleKind::Bagging => "bagging",
            EnsembleKind::AdaBoost => "adaboost",
            EnsembleKind::RandomForest => "random_forest",
            EnsembleKind::RandomTree => "random_tree",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "bagging" => EnsembleKind::Bagging,
            "adaboost" => EnsembleKind::AdaBoost,
            "random_forest" => EnsembleKind::RandomForest,
            "random_tree" => EnsembleKind::RandomTree,
            _ => return None,
        })
    }

    pub fn aggregation(self) -> Aggregation {
        match self {
            EnsembleKind::AdaBoost => Aggregation::Weighted,
            _ => Aggregation::Majority,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Majority,
    Weighted,
}

impl Aggregation {
    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::Majority => "majority",
            Aggregation::Weighted => "weighted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomSplitParams {
    /// Attributes drawn per node by random forests; `floor(log2 m) + 1` when unset.
    pub forest_subset_size: Option<usize>,
    /// Size of the best-test pool random trees pick from.
    pub top_k_pool: usize,
}

impl Default for RandomSplitParams {
    fn default() -> Self {
        RandomSplitParams {
            forest_subset_size: None,
            top_k_pool: 20,
        }
    }
}

impl RandomSplitParams {
    pub fn subset_size(&self, m: usize) -> Result<usize> {
        match self.forest_subset_size {
            Some(s) if s >= 1 && s <= m => Ok(s),
            Some(s) => Err(Error::InvalidParameter(alloc::format!(
                "forest subset size {s} outside 1..={m}"
            ))),
            None => Ok((math::floor(math::log2(m.max(1) as f64)) as usize + 1).min(m.max(1))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub kind: EnsembleKind,
    pub members: Vec<DecisionTree>,
    pub member_weights: Vec<f64>,
    pub aggregation: Aggregation,
    pub rng_seed: u64,
    pub class_priors: Vec<f64>,
}

impl EnsembleModel {
    /// Assemble a model from already built members.
    pub fn from_members(
        kind: EnsembleKind,
        members: Vec<DecisionTree>,
        member_weights: Vec<f64>,
        rng_seed: u64,
        class_priors: Vec<f64>,
    ) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidParameter("an ensemble needs at least one member".into()));
        }
        if member_weights.len() != members.len() {
            return Err(Error::InvalidParameter("one weight per member required".into()));
        }
        Ok(EnsembleModel {
            kind,
            members,
            member_weights,
            aggregation: kind.aggregation(),
            rng_seed,
            class_priors,
        })
    }

    pub fn tree_sizes(&self) -> Vec<usize> {
        self.members.iter().map(DecisionTree::size).collect()
    }

    pub fn classify<R: Row + ?Sized>(&self, row: &R) -> Result<VoteBreakdown> {
        let mut votes = Vec::with_capacity(self.members.len());
        for (t, &w) in self.members.iter().zip(&self.member_weights) {
            let (class, _) = t.classify(row)?;
            let w = match self.aggregation {
                Aggregation::Majority => 1.0,
                Aggregation::Weighted => w,
            };
            votes.push((class, w));
        }
        let order = ClassOrder::from_priors(&self.class_priors);
        Ok(VoteBreakdown::tally(self.class_priors.len(), votes, &order))
    }
}

pub fn classify_ensemble<R: Row + ?Sized>(e: &EnsembleModel, row: &R) -> Result<VoteBreakdown> {
    e.classify(row)
}

/// Draw counts of an `n`-row bootstrap sample.
pub fn bootstrap_counts<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut counts = vec![0.0; n];
    for _ in 0..n {
        counts[rng.random_range(0..n)] += 1.0;
    }
    counts
}

fn check(d: &Dataset, members: usize) -> Result<()> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if members < 1 {
        return Err(Error::InvalidParameter("members must be >= 1".into()));
    }
    Ok(())
}

fn all_attributes(d: &Dataset) -> Vec<usize> {
    (0..d.n_attributes()).collect()
}

/// Member `index` of a bagging ensemble: a tree on a bootstrap sample.
pub fn bagging_member(d: &Dataset, params: &TreeParams, seed: u64, index: usize) -> Result<DecisionTree> {
    let mut rng = rng::stream(seed, &[tag::BAGGING, index as u64]);
    let counts = bootstrap_counts(d.n_rows(), &mut rng);
    build_tree(d, &params.clone().with_weights(counts), &all_attributes(d))
}

/// Member `index` of a random forest: a bootstrap sample and a fresh random
/// attribute subset at every node.
pub fn forest_member(
    d: &Dataset,
    rsp: &RandomSplitParams,
    params: &TreeParams,
    seed: u64,
    index: usize,
) -> Result<DecisionTree> {
    let size = rsp.subset_size(d.n_attributes())?;
    let mut rng = rng::stream(seed, &[tag::FOREST, index as u64]);
    let counts = bootstrap_counts(d.n_rows(), &mut rng);
    build_tree_with(
        d,
        &params.clone().with_weights(counts),
        &all_attributes(d),
        SplitSelector::RandomSubset { size },
        &mut rng,
    )
}

/// Member `index` of a random-tree ensemble: the full data, with each node
/// picking uniformly among the best `top_k_pool` tests.
pub fn random_tree_member(
    d: &Dataset,
    rsp: &RandomSplitParams,
    params: &TreeParams,
    seed: u64,
    index: usize,
) -> Result<DecisionTree> {
    if rsp.top_k_pool < 1 {
        return Err(Error::InvalidParameter("top_k_pool must be >= 1".into()));
    }
    let mut rng = rng::stream(seed, &[tag::RANDOM_TREE, index as u64]);
    build_tree_with(
        d,
        params,
        &all_attributes(d),
        SplitSelector::TopPool { size: rsp.top_k_pool },
        &mut rng,
    )
}

fn uniform_ensemble(
    d: &Dataset,
    kind: EnsembleKind,
    members: usize,
    seed: u64,
    mut member: impl FnMut(usize) -> Result<DecisionTree>,
) -> Result<EnsembleModel> {
    check(d, members)?;
    let trees = (0..members).map(&mut member).collect::<Result<Vec<_>>>()?;
    EnsembleModel::from_members(kind, trees, vec![1.0; members], seed, d.class_priors())
}

pub fn build_bagging(d: &Dataset, members: usize, params: &TreeParams, seed: u64) -> Result<EnsembleModel> {
    uniform_ensemble(d, EnsembleKind::Bagging, members, seed, |i| bagging_member(d, params, seed, i))
}

pub fn build_random_forest(
    d: &Dataset,
    members: usize,
    rsp: &RandomSplitParams,
    params: &TreeParams,
    seed: u64,
) -> Result<EnsembleModel> {
    rsp.subset_size(d.n_attributes())?;
    uniform_ensemble(d, EnsembleKind::RandomForest, members, seed, |i| {
        forest_member(d, rsp, params, seed, i)
    })
}

pub fn build_random_tree_ensemble(
    d: &Dataset,
    members: usize,
    rsp: &RandomSplitParams,
    params: &TreeParams,
    seed: u64,
) -> Result<EnsembleModel> {
    uniform_ensemble(d, EnsembleKind::RandomTree, members, seed, |i| {
        random_tree_member(d, rsp, params, seed, i)
    })
}

/// Smallest error used when a round is error free, capping the member weight
/// at `ln((1 - 1e-10) / 1e-10)`, about 23.
pub const MIN_BOOST_ERROR: f64 = 1e-10;

/// Per-round bookkeeping of a boosting run.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostRound {
    pub error: f64,
    /// Member weight, or `None` if the round's tree was discarded.
    pub member_weight: Option<f64>,
    /// Total row weight after the round's update and renormalization.
    pub weight_sum: f64,
}

/// AdaBoost.M1 by reweighting. Rounds stop early when a tree's weighted
/// error reaches 0.5 (the tree is discarded unless it is the first) or 0.
pub fn build_adaboost(d: &Dataset, rounds: usize, params: &TreeParams, seed: u64) -> Result<EnsembleModel> {
    build_adaboost_traced(d, rounds, params, seed).map(|(m, _)| m)
}

pub fn build_adaboost_traced(
    d: &Dataset,
    rounds: usize,
    params: &TreeParams,
    seed: u64,
) -> Result<(EnsembleModel, Vec<BoostRound>)> {
    check(d, rounds)?;
    let n = d.n_rows();
    let all = all_attributes(d);
    let mut w = vec![1.0 / n as f64; n];
    let mut members = Vec::new();
    let mut weights = Vec::new();
    let mut trace = Vec::new();
    for round in 0..rounds {
        // the learner sees weights in row units
        let scaled: Vec<f64> = w.iter().map(|x| x * n as f64).collect();
        let tree = build_tree(d, &params.clone().with_weights(scaled), &all)?;
        let predicted = tree.predict_all(d)?;
        let wrong: Vec<bool> = predicted.iter().zip(d.labels()).map(|(p, y)| p != y).collect();
        let error: f64 = w.iter().zip(&wrong).filter(|(_, &bad)| bad).map(|(x, _)| x).sum();
        if error >= 0.5 {
            let keep = round == 0;
            if keep {
                members.push(tree);
                weights.push(1.0);
            }
            trace.push(BoostRound {
                error,
                member_weight: keep.then_some(1.0),
                weight_sum: w.iter().sum(),
            });
            break;
        }
        if error <= 0.0 {
            let alpha = math::ln((1.0 - MIN_BOOST_ERROR) / MIN_BOOST_ERROR);
            members.push(tree);
            weights.push(alpha);
            trace.push(BoostRound {
                error,
                member_weight: Some(alpha),
                weight_sum: w.iter().sum(),
            });
            break;
        }
        let beta = error / (1.0 - error);
        let alpha = -math::ln(beta);
        for (x, &bad) in w.iter_mut().zip(&wrong) {
            if !bad {
                *x *= beta;
            }
        }
        let total: f64 = w.iter().sum();
        for x in w.iter_mut() {
            *x /= total;
        }
        members.push(tree);
        weights.push(alpha);
        trace.push(BoostRound {
            error,
            member_weight: Some(alpha),
            weight_sum: w.iter().sum(),
        });
    }
    let model = EnsembleModel::from_members(EnsembleKind::AdaBoost, members, weights, seed, d.class_priors())?;
    Ok((model, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use crate::tree::{rank_tests, Node};
    use crate::Value;

    #[test]
    fn adaboost_formula() {
        let e: f64 = 0.25;
        assert!((math::ln((1.0 - e) / e) - 1.0986122887).abs() < 1e-9);
        assert!((e / (1.0 - e) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn adaboost_stops_on_perfect_tree() {
        let d = synth::separable(40, 1, 3, 2);
        let (m, trace) = build_adaboost_traced(&d, 100, &TreeParams::default(), 0).unwrap();
        assert_eq!(m.members.len(), 1);
        assert_eq!(trace.len(), 1);
        assert!(m.member_weights[0] > 20.0 && m.member_weights[0].is_finite());
    }

    #[test]
    fn adaboost_weights_renormalize() {
        let d = synth::random_mixed(120, 8, 17);
        let (m, trace) = build_adaboost_traced(&d, 30, &TreeParams::default(), 0).unwrap();
        assert!(m.members.len() <= 30);
        for r in &trace {
            assert!((r.weight_sum - 1.0).abs() < 1e-9);
            if r.error > 0.0 && r.error < 0.5 {
                let a = r.member_weight.unwrap();
                assert!(a.is_finite() && a > 0.0);
            }
        }
    }

    #[test]
    fn bagging_determinism_and_separable_fit() {
        let d = synth::separable(60, 1, 5, 3);
        let a = build_bagging(&d, 1, &TreeParams::default(), 42).unwrap();
        let b = build_bagging(&d, 1, &TreeParams::default(), 42).unwrap();
        assert_eq!(a, b);
        let m = build_bagging(&d, 15, &TreeParams::default(), 42).unwrap();
        assert_eq!(m.members.len(), 15);
        for r in 0..d.n_rows() {
            assert_eq!(m.classify(&d.row(r)).unwrap().winner, d.label(r));
        }
    }

    #[test]
    fn bootstrap_distinct_fraction() {
        let n = 1000;
        let expected = 1.0 - libm::pow(1.0 - 1.0 / n as f64, n as f64);
        let mut total = 0.0;
        for s in 0..200 {
            let mut rng = rng::stream(s, &[tag::BAGGING, 0]);
            let c = bootstrap_counts(n, &mut rng);
            assert_eq!(c.iter().sum::<f64>(), n as f64);
            total += c.iter().filter(|&&x| x > 0.0).count() as f64 / n as f64;
        }
        assert!((total / 200.0 - expected).abs() < 0.02);
    }

    #[test]
    fn forest_subset_default() {
        let rsp = RandomSplitParams::default();
        assert_eq!(rsp.subset_size(500).unwrap(), 9);
        assert_eq!(rsp.subset_size(1).unwrap(), 1);
        let bad = RandomSplitParams {
            forest_subset_size: Some(0),
            ..rsp
        };
        assert!(bad.subset_size(4).is_err());
    }

    #[test]
    fn forest_full_subset_matches_bagged_unpruned_trees() {
        let d = synth::random_mixed(50, 6, 8);
        let rsp = RandomSplitParams {
            forest_subset_size: Some(6),
            ..Default::default()
        };
        let params = TreeParams::unpruned();
        let f = forest_member(&d, &rsp, &params, 5, 0).unwrap();
        let mut rng = rng::stream(5, &[tag::FOREST, 0]);
        let counts = bootstrap_counts(d.n_rows(), &mut rng);
        let t = build_tree(&d, &params.with_weights(counts), &all_attributes(&d)).unwrap();
        assert_eq!(f, t);
    }

    #[test]
    fn random_tree_single_positive_test() {
        let d = synth::separable(30, 1, 0, 4);
        let rsp = RandomSplitParams::default();
        for s in 0..5 {
            let t = random_tree_member(&d, &rsp, &TreeParams::default(), s, 0).unwrap();
            assert_eq!(t.size(), 3);
        }
    }

    #[test]
    fn random_tree_roots_vary_with_seed() {
        let d = synth::separable(40, 25, 0, 1);
        let rsp = RandomSplitParams::default();
        let root = |s| match random_tree_member(&d, &rsp, &TreeParams::default(), s, 0).unwrap().root() {
            Node::Split { test, .. } => test.attribute,
            Node::Leaf { .. } => usize::MAX,
        };
        let roots: alloc::collections::BTreeSet<usize> = (0..8).map(root).collect();
        assert!(roots.len() > 1);
    }

    fn assert_in_pool(root: &Node, node: &Node, d: &Dataset, pool: usize) {
        if let Node::Split { test, children, .. } = node {
            let rows: Vec<usize> = (0..d.n_rows())
                .filter(|&r| {
                    let mut n = root;
                    while !core::ptr::eq(n, node) {
                        match n {
                            Node::Split {
                                test,
                                children,
                                majority_branch,
                                ..
                            } => {
                                let b = test.branch(d.value(r, test.attribute)).unwrap_or(*majority_branch);
                                n = &children[b];
                            }
                            Node::Leaf { .. } => return false,
                        }
                    }
                    true
                })
                .collect();
            let local = d.subset(&rows);
            let all: Vec<usize> = (0..d.n_attributes())
                .filter(|&a| d.schema().attribute(a).categories.is_empty() || !path_uses(root, node, a))
                .collect();
            let ranked = rank_tests(&local, None, &all, &TreeParams::unpruned());
            let cutoff = ranked[pool.min(ranked.len()) - 1].ratio;
            let mine = ranked.iter().find(|t| t.test == *test).expect("chosen test ranked");
            assert!(mine.ratio >= cutoff);
            for c in children {
                assert_in_pool(root, c, d, pool);
            }
        }
    }

    fn path_uses(root: &Node, target: &Node, a: usize) -> bool {
        fn walk(n: &Node, target: &Node, a: usize, used: bool) -> Option<bool> {
            if core::ptr::eq(n, target) {
                return Some(used);
            }
            match n {
                Node::Leaf { .. } => None,
                Node::Split { test, children, .. } => {
                    let here = used || test.attribute == a;
                    children.iter().find_map(|c| walk(c, target, a, here))
                }
            }
        }
        walk(root, target, a, false).unwrap_or(false)
    }

    #[test]
    fn random_tree_tests_come_from_pool() {
        for s in 0..4 {
            let d = synth::random_mixed(80, 12, 30 + s);
            let t = random_tree_member(&d, &RandomSplitParams::default(), &TreeParams::unpruned(), s, 0).unwrap();
            assert_in_pool(t.root(), t.root(), &d, 20);
        }
    }

    #[test]
    fn weighted_vote() {
        let d = synth::separable(4, 1, 0, 0);
        let leaf = |c| DecisionTree::from_parts(d.shared_schema().clone(), Node::Leaf { class: c, counts: vec![1.0, 1.0] });
        let row = [Value::Num(0.0)];
        let m = EnsembleModel::from_members(
            EnsembleKind::AdaBoost,
            vec![leaf(0), leaf(1), leaf(1)],
            vec![2.0, 0.9, 0.9],
            0,
            vec![0.5, 0.5],
        )
        .unwrap();
        assert_eq!(m.classify(&row[..]).unwrap().winner, 0);
        let m = EnsembleModel::from_members(EnsembleKind::Bagging, vec![leaf(1), leaf(0), leaf(1)], vec![1.0; 3], 0, vec![0.5, 0.5]).unwrap();
        assert_eq!(m.classify(&row[..]).unwrap().winner, 1);
        let single = EnsembleModel::from_members(EnsembleKind::Bagging, vec![leaf(0)], vec![1.0], 0, vec![0.1, 0.9]).unwrap();
        assert_eq!(single.classify(&row[..]).unwrap().winner, 0);
    }

    #[test]
    fn builders_are_seed_deterministic() {
        let d = synth::random_mixed(60, 10, 2);
        let rsp = RandomSplitParams::default();
        let p = TreeParams::default();
        assert_eq!(build_random_forest(&d, 3, &rsp, &TreeParams::unpruned(), 9), build_random_forest(&d, 3, &rsp, &TreeParams::unpruned(), 9));
        assert_eq!(build_random_tree_ensemble(&d, 3, &rsp, &p, 9), build_random_tree_ensemble(&d, 3, &rsp, &p, 9));
        assert_eq!(build_adaboost(&d, 5, &p, 9), build_adaboost(&d, 5, &p, 9));
        assert!(build_bagging(&d, 0, &p, 0).is_err());
    }
}
