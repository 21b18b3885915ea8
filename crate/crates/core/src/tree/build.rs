//! Recursive tree growing over presorted attribute lists.
//!
//! Each node owns, for every continuous candidate attribute, the list of its
//! rows with a known value in ascending value order. Splitting a node
//! stable-partitions those lists into the children, so no node ever sorts.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use super::prune::prune;
use super::split::{all_tests, choose_c45, per_attribute_best, NodeView, RankedTest};
use super::{DecisionTree, Node, SplitForm, TreeParams};
use crate::dataset::{AttributeKind, Dataset};
use crate::vote::ClassOrder;
use crate::{Error, Result};

/// How a node picks its test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitSelector {
    /// Highest gain ratio among above-average-gain tests.
    C45,
    /// Evaluate `size` randomly drawn candidate attributes with the C4.5 rule;
    /// keep drawing one more at a time while none of them has positive gain.
    RandomSubset { size: usize },
    /// Rank every candidate test by gain ratio and pick uniformly among the
    /// best `size`.
    TopPool { size: usize },
}

pub(crate) struct RootState {
    rows: Vec<u32>,
    sorted: Vec<Option<Vec<u32>>>,
    class_weights: Vec<f64>,
    total: f64,
}

fn sorted_known(d: &Dataset, attribute: usize, rows: &[u32]) -> Vec<u32> {
    let values = d.continuous(attribute).expect("continuous attribute");
    let mut out: Vec<u32> = rows
        .iter()
        .copied()
        .filter(|&r| !values[r as usize].is_nan())
        .collect();
    out.sort_by(|&a, &b| values[a as usize].total_cmp(&values[b as usize]).then(a.cmp(&b)));
    out
}

impl RootState {
    pub(crate) fn new(d: &Dataset, weights: &[f64], candidates: &[usize]) -> Self {
        let rows: Vec<u32> = (0..d.n_rows() as u32)
            .filter(|&r| weights[r as usize] > 0.0)
            .collect();
        let mut sorted = vec![None; d.n_attributes()];
        for &a in candidates {
            if d.schema().attribute(a).kind == AttributeKind::Continuous {
                sorted[a] = Some(sorted_known(d, a, &rows));
            }
        }
        let mut class_weights = vec![0.0; d.n_classes()];
        for &r in &rows {
            class_weights[d.label(r as usize) as usize] += weights[r as usize];
        }
        let total = class_weights.iter().sum();
        RootState {
            rows,
            sorted,
            class_weights,
            total,
        }
    }

    pub(crate) fn sorted(&self, attribute: usize) -> Option<&[u32]> {
        self.sorted[attribute].as_deref()
    }

    pub(crate) fn view<'a>(&'a self, d: &'a Dataset, weights: &'a [f64], min_leaf: f64) -> NodeView<'a> {
        NodeView {
            data: d,
            weights,
            rows: &self.rows,
            class_weights: &self.class_weights,
            total: self.total,
            min_leaf,
        }
    }
}

struct NodeState {
    rows: Vec<u32>,
    sorted: Vec<Option<Vec<u32>>>,
    candidates: Vec<usize>,
}

struct Builder<'a, R> {
    data: &'a Dataset,
    weights: &'a [f64],
    min_leaf: f64,
    order: ClassOrder,
    selector: SplitSelector,
    rng: &'a mut R,
    branch_of: Vec<u32>,
}

impl<R: RngCore> Builder<'_, R> {
    fn class_weights(&self, rows: &[u32]) -> Vec<f64> {
        let mut cw = vec![0.0; self.data.n_classes()];
        for &r in rows {
            cw[self.data.label(r as usize) as usize] += self.weights[r as usize];
        }
        cw
    }

    fn choose(&mut self, view: &NodeView<'_>, state: &NodeState) -> Option<RankedTest> {
        let sorted_of = |a: usize| state.sorted[a].as_deref();
        match self.selector {
            SplitSelector::C45 => choose_c45(&per_attribute_best(view, &state.candidates, &sorted_of)),
            SplitSelector::RandomSubset { size } => {
                let mut order = state.candidates.clone();
                order.shuffle(self.rng);
                let mut found = Vec::new();
                for (i, &a) in order.iter().enumerate() {
                    found.extend(per_attribute_best(view, &[a], &sorted_of));
                    if i + 1 >= size && !found.is_empty() {
                        break;
                    }
                }
                found.sort_by_key(|t| t.test.attribute);
                choose_c45(&found)
            }
            SplitSelector::TopPool { size } => {
                let tests = all_tests(view, &state.candidates, &sorted_of);
                if tests.is_empty() {
                    return None;
                }
                let k = size.min(tests.len());
                Some(tests[self.rng.random_range(0..k)])
            }
        }
    }

    fn grow(&mut self, state: NodeState) -> Node {
        let counts = self.class_weights(&state.rows);
        let total: f64 = counts.iter().sum();
        let class = self.order.argmax(&counts);
        let nonzero = counts.iter().filter(|&&w| w > 0.0).count();
        if nonzero <= 1 || total < 2.0 * self.min_leaf || state.candidates.is_empty() {
            return Node::Leaf { class, counts };
        }
        let chosen = {
            let view = NodeView {
                data: self.data,
                weights: self.weights,
                rows: &state.rows,
                class_weights: &counts,
                total,
                min_leaf: self.min_leaf,
            };
            self.choose(&view, &state)
        };
        let Some(chosen) = chosen else {
            return Node::Leaf { class, counts };
        };
        let test = chosen.test;
        let n_branches = match test.form {
            SplitForm::Threshold(_) => 2,
            SplitForm::Multiway => self.data.schema().attribute(test.attribute).categories.len(),
        };

        const UNASSIGNED: u32 = u32::MAX;
        let mut branch_weight = vec![0.0; n_branches];
        for &r in &state.rows {
            let b = test
                .branch(self.data.value(r as usize, test.attribute))
                .filter(|&b| b < n_branches);
            self.branch_of[r as usize] = match b {
                Some(b) => {
                    branch_weight[b] += self.weights[r as usize];
                    b as u32
                }
                None => UNASSIGNED,
            };
        }
        let mut majority = 0;
        for b in 1..n_branches {
            if branch_weight[b] > branch_weight[majority] {
                majority = b;
            }
        }
        let mut child_rows: Vec<Vec<u32>> = vec![Vec::new(); n_branches];
        for &r in &state.rows {
            let slot = &mut self.branch_of[r as usize];
            if *slot == UNASSIGNED {
                *slot = majority as u32;
            }
            child_rows[*slot as usize].push(r);
        }

        let mut child_candidates = state.candidates.clone();
        if test.form == SplitForm::Multiway {
            child_candidates.retain(|&a| a != test.attribute);
        }
        let mut child_sorted: Vec<Vec<Option<Vec<u32>>>> =
            vec![vec![None; self.data.n_attributes()]; n_branches];
        for (a, list) in state.sorted.iter().enumerate() {
            let Some(list) = list else { continue };
            if a == test.attribute && test.form == SplitForm::Multiway {
                continue;
            }
            let mut parts: Vec<Vec<u32>> = child_rows
                .iter()
                .map(|rows| Vec::with_capacity(rows.len()))
                .collect();
            for &r in list {
                parts[self.branch_of[r as usize] as usize].push(r);
            }
            for (b, part) in parts.into_iter().enumerate() {
                child_sorted[b][a] = Some(part);
            }
        }
        drop(state);

        let mut children = Vec::with_capacity(n_branches);
        for (rows, sorted) in child_rows.into_iter().zip(child_sorted) {
            if rows.is_empty() {
                children.push(Node::Leaf {
                    class,
                    counts: vec![0.0; counts.len()],
                });
            } else {
                children.push(self.grow(NodeState {
                    rows,
                    sorted,
                    candidates: child_candidates.clone(),
                }));
            }
        }
        Node::Split {
            test,
            counts,
            children,
            majority_branch: majority,
        }
    }
}

/// Grow and prune a C4.5 tree that may only test `candidates`.
pub fn build_tree(d: &Dataset, params: &TreeParams, candidates: &[usize]) -> Result<DecisionTree> {
    let mut rng = crate::rng::stream(0, &[]);
    build_tree_with(d, params, candidates, SplitSelector::C45, &mut rng)
}

/// Grow a tree with an explicit test selector. `rng` is only drawn from by
/// the randomized selectors.
pub fn build_tree_with<R: RngCore>(
    d: &Dataset,
    params: &TreeParams,
    candidates: &[usize],
    selector: SplitSelector,
    rng: &mut R,
) -> Result<DecisionTree> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    params.validate(d.n_rows())?;
    if let Some(&bad) = candidates.iter().find(|&&a| a >= d.n_attributes()) {
        return Err(Error::InvalidParameter(alloc::format!(
            "candidate attribute {bad} outside the schema"
        )));
    }
    match selector {
        SplitSelector::RandomSubset { size } | SplitSelector::TopPool { size } if size == 0 => {
            return Err(Error::InvalidParameter("selector size must be >= 1".into()))
        }
        _ => {}
    }
    let mut cands = candidates.to_vec();
    cands.sort_unstable();
    cands.dedup();

    let uniform;
    let weights: &[f64] = match &params.instance_weights {
        Some(w) => w,
        None => {
            uniform = vec![1.0; d.n_rows()];
            &uniform
        }
    };
    let order = ClassOrder::from_priors(&d.class_priors());
    let root = RootState::new(d, weights, &cands);
    let state = NodeState {
        rows: root.rows,
        sorted: root.sorted,
        candidates: cands,
    };
    let mut builder = Builder {
        data: d,
        weights,
        min_leaf: params.min_leaf_instances as f64,
        order: order.clone(),
        selector,
        rng,
        branch_of: vec![0; d.n_rows()],
    };
    let mut node = builder.grow(state);
    if params.prunes() {
        node = prune(node, params.pruning_confidence, &order);
    }
    Ok(DecisionTree::from_parts(d.shared_schema().clone(), node))
}
