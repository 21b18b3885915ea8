//! Split evaluation: entropy, gain, split information and candidate ranking.

use alloc::vec;
use alloc::vec::Vec;

use super::build::RootState;
use super::{SplitForm, SplitTest, TreeParams};
use crate::dataset::{Dataset, MISSING_CATEGORY};
use crate::math;
use crate::{Error, Result};

/// Shannon entropy in bits of a class weight vector.
pub fn entropy(class_weights: &[f64]) -> Result<f64> {
    if !class_weights.iter().any(|&w| w > 0.0) {
        return Err(Error::ZeroWeight);
    }
    Ok(entropy_bits(class_weights))
}

/// Entropy of the proportions in `weights`; zero when the total is zero.
pub(crate) fn entropy_bits(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().filter(|&&w| w > 0.0).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &w in weights {
        if w > 0.0 {
            let p = w / total;
            h -= p * math::log2(p);
        }
    }
    h.max(0.0)
}

/// Weighted entropy sum `sum_i W_i * H(branch_i)`, i.e. the unnormalized
/// conditional entropy.
fn weighted_entropy(branch_weight: f64, class_weights: &[f64]) -> f64 {
    if branch_weight <= 0.0 {
        0.0
    } else {
        branch_weight * entropy_bits(class_weights)
    }
}

/// Per-node quantities shared by every candidate evaluation.
pub(crate) struct NodeView<'a> {
    pub data: &'a Dataset,
    pub weights: &'a [f64],
    pub rows: &'a [u32],
    pub class_weights: &'a [f64],
    pub total: f64,
    pub min_leaf: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ThresholdCandidate {
    pub threshold: f64,
    pub raw_gain: f64,
    pub split_info: f64,
}

pub(crate) struct ThresholdScan {
    pub distinct: usize,
    pub candidates: Vec<ThresholdCandidate>,
}

impl ThresholdScan {
    /// Gain charge for having searched `distinct - 1` cut points.
    pub fn penalty(&self, total: f64) -> f64 {
        if self.distinct < 2 || total <= 0.0 {
            0.0
        } else {
            math::log2((self.distinct - 1) as f64) / total
        }
    }

    pub fn best_by_gain(&self) -> Option<ThresholdCandidate> {
        let mut best: Option<ThresholdCandidate> = None;
        for c in &self.candidates {
            if best.is_none_or(|b| c.raw_gain > b.raw_gain) {
                best = Some(*c);
            }
        }
        best
    }
}

/// Scan all boundary thresholds of a continuous attribute. `sorted` holds the
/// node's rows with a known value, in ascending value order.
///
/// A cut between two adjacent value groups is skipped when both groups are
/// pure and of the same class; such a cut can never be the best one.
pub(crate) fn scan_threshold(view: &NodeView<'_>, attribute: usize, sorted: &[u32]) -> ThresholdScan {
    let values = view.data.continuous(attribute).expect("continuous attribute");
    let labels = view.data.labels();
    let n_classes = view.class_weights.len();

    // group boundaries, purity and known class totals
    let mut known = vec![0.0; n_classes];
    let mut groups: Vec<(usize, i64)> = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let v = values[sorted[i] as usize];
        let first = labels[sorted[i] as usize];
        let mut pure = true;
        let mut j = i;
        while j < sorted.len() && values[sorted[j] as usize] == v {
            let r = sorted[j] as usize;
            known[labels[r] as usize] += view.weights[r];
            pure &= labels[r] == first;
            j += 1;
        }
        groups.push((j, if pure { first as i64 } else { -1 }));
        i = j;
    }
    let distinct = groups.len();
    let known_total: f64 = known.iter().sum();
    let mut candidates = Vec::new();
    if distinct < 2 || known_total <= 0.0 {
        return ThresholdScan {
            distinct,
            candidates,
        };
    }
    let missing = (view.total - known_total).max(0.0);
    let known_info = entropy_bits(&known);
    let known_fraction = known_total / view.total;

    let mut left = vec![0.0; n_classes];
    let mut right = vec![0.0; n_classes];
    let mut start = 0;
    let mut left_total = 0.0;
    for g in 0..distinct - 1 {
        let (end, purity) = groups[g];
        for &r in &sorted[start..end] {
            let r = r as usize;
            left[labels[r] as usize] += view.weights[r];
            left_total += view.weights[r];
        }
        start = end;
        let next_purity = groups[g + 1].1;
        if purity >= 0 && purity == next_purity {
            continue;
        }
        let right_total = known_total - left_total;
        if left_total < view.min_leaf || right_total < view.min_leaf {
            continue;
        }
        for c in 0..n_classes {
            right[c] = (known[c] - left[c]).max(0.0);
        }
        let conditional =
            (weighted_entropy(left_total, &left) + weighted_entropy(right_total, &right)) / known_total;
        let raw_gain = known_fraction * (known_info - conditional);
        let split_info = entropy_bits(&[left_total, right_total, missing]);
        let lo = values[sorted[end - 1] as usize];
        let hi = values[sorted[end] as usize];
        let mut threshold = lo + (hi - lo) / 2.0;
        if threshold >= hi {
            threshold = lo;
        }
        candidates.push(ThresholdCandidate {
            threshold,
            raw_gain,
            split_info,
        });
    }
    ThresholdScan {
        distinct,
        candidates,
    }
}

/// Gain and split information of a multiway split on a categorical
/// attribute; `None` unless two branches carry at least `min_leaf` weight.
pub(crate) fn eval_categorical(view: &NodeView<'_>, attribute: usize) -> Option<(f64, f64)> {
    let cats = view.data.categorical(attribute).expect("categorical attribute");
    let n_cat = view.data.schema().attribute(attribute).categories.len();
    let n_classes = view.class_weights.len();
    let labels = view.data.labels();
    let mut branch = vec![0.0; n_cat * n_classes];
    let mut branch_total = vec![0.0; n_cat];
    for &r in view.rows {
        let r = r as usize;
        let k = cats[r];
        if k == MISSING_CATEGORY {
            continue;
        }
        let w = view.weights[r];
        branch[k as usize * n_classes + labels[r] as usize] += w;
        branch_total[k as usize] += w;
    }
    let known_total: f64 = branch_total.iter().sum();
    if known_total <= 0.0 {
        return None;
    }
    let big = branch_total.iter().filter(|&&w| w >= view.min_leaf).count();
    if big < 2 {
        return None;
    }
    let mut known = vec![0.0; n_classes];
    for k in 0..n_cat {
        for c in 0..n_classes {
            known[c] += branch[k * n_classes + c];
        }
    }
    let conditional: f64 = (0..n_cat)
        .map(|k| weighted_entropy(branch_total[k], &branch[k * n_classes..(k + 1) * n_classes]))
        .sum::<f64>()
        / known_total;
    let gain = known_total / view.total * (entropy_bits(&known) - conditional);
    let mut parts = branch_total;
    parts.push((view.total - known_total).max(0.0));
    Some((gain, entropy_bits(&parts)))
}

/// A candidate test with its (penalized) information gain and gain ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedTest {
    pub test: SplitTest,
    pub gain: f64,
    pub ratio: f64,
}

const MIN_SPLIT_INFO: f64 = 1e-12;

/// Best test per attribute among `attributes`, keeping only positive gains.
pub(crate) fn per_attribute_best<'s>(
    view: &NodeView<'_>,
    attributes: &[usize],
    sorted_of: &dyn Fn(usize) -> Option<&'s [u32]>,
) -> Vec<RankedTest> {
    let mut out = Vec::new();
    for &a in attributes {
        match sorted_of(a) {
            Some(sorted) => {
                let scan = scan_threshold(view, a, sorted);
                if let Some(best) = scan.best_by_gain() {
                    let gain = best.raw_gain - scan.penalty(view.total);
                    if gain > 0.0 && best.split_info > MIN_SPLIT_INFO {
                        out.push(RankedTest {
                            test: SplitTest::threshold(a, best.threshold),
                            gain,
                            ratio: gain / best.split_info,
                        });
                    }
                }
            }
            None => {
                if let Some((gain, info)) = eval_categorical(view, a) {
                    if gain > 0.0 && info > MIN_SPLIT_INFO {
                        out.push(RankedTest {
                            test: SplitTest::multiway(a),
                            gain,
                            ratio: gain / info,
                        });
                    }
                }
            }
        }
    }
    out
}

/// C4.5 choice: highest gain ratio among tests whose gain reaches the
/// average gain of all positive-gain tests. Earlier attributes win ties.
pub(crate) fn choose_c45(candidates: &[RankedTest]) -> Option<RankedTest> {
    if candidates.is_empty() {
        return None;
    }
    let avg = candidates.iter().map(|c| c.gain).sum::<f64>() / candidates.len() as f64;
    let floor = avg - 1e-12 * avg.abs().max(1.0);
    let mut best: Option<RankedTest> = None;
    for c in candidates.iter().filter(|c| c.gain >= floor) {
        if best.is_none_or(|b| c.ratio > b.ratio) {
            best = Some(*c);
        }
    }
    best
}

/// Every candidate test (every boundary threshold, every categorical
/// attribute) with positive gain, sorted by descending gain ratio.
pub(crate) fn all_tests<'s>(
    view: &NodeView<'_>,
    attributes: &[usize],
    sorted_of: &dyn Fn(usize) -> Option<&'s [u32]>,
) -> Vec<RankedTest> {
    let mut out = Vec::new();
    for &a in attributes {
        match sorted_of(a) {
            Some(sorted) => {
                let scan = scan_threshold(view, a, sorted);
                let penalty = scan.penalty(view.total);
                for c in &scan.candidates {
                    let gain = c.raw_gain - penalty;
                    if gain > 0.0 && c.split_info > MIN_SPLIT_INFO {
                        out.push(RankedTest {
                            test: SplitTest::threshold(a, c.threshold),
                            gain,
                            ratio: gain / c.split_info,
                        });
                    }
                }
            }
            None => {
                if let Some((gain, info)) = eval_categorical(view, a) {
                    if gain > 0.0 && info > MIN_SPLIT_INFO {
                        out.push(RankedTest {
                            test: SplitTest::multiway(a),
                            gain,
                            ratio: gain / info,
                        });
                    }
                }
            }
        }
    }
    out.sort_by(|x, y| {
        y.ratio
            .total_cmp(&x.ratio)
            .then(x.test.attribute.cmp(&y.test.attribute))
            .then_with(|| match (x.test.form, y.test.form) {
                (SplitForm::Threshold(a), SplitForm::Threshold(b)) => a.total_cmp(&b),
                _ => core::cmp::Ordering::Equal,
            })
    });
    out
}

fn resolve_weights(d: &Dataset, weights: Option<&[f64]>) -> Vec<f64> {
    match weights {
        Some(w) => w.to_vec(),
        None => vec![1.0; d.n_rows()],
    }
}

/// Gain ratio of one test over the whole dataset, or `None` when the test
/// leaves fewer than two non-empty parts. Threshold tests carry the
/// `log2(distinct - 1) / weight` gain charge.
pub fn gain_ratio(d: &Dataset, weights: Option<&[f64]>, test: &SplitTest) -> Option<f64> {
    let w = resolve_weights(d, weights);
    let labels = d.labels();
    let n_classes = d.n_classes();
    let rows: Vec<usize> = (0..d.n_rows()).filter(|&r| w[r] > 0.0).collect();
    let total: f64 = rows.iter().map(|&r| w[r]).sum();
    let n_branches = match test.form {
        SplitForm::Threshold(_) => 2,
        SplitForm::Multiway => d.schema().attribute(test.attribute).categories.len(),
    };
    let mut branch = vec![vec![0.0; n_classes]; n_branches];
    let mut branch_total = vec![0.0; n_branches];
    let mut distinct: Vec<f64> = Vec::new();
    for &r in &rows {
        let v = d.value(r, test.attribute);
        if let crate::Value::Num(x) = v {
            distinct.push(x);
        }
        if let Some(b) = test.branch(v).filter(|&b| b < n_branches) {
            branch[b][labels[r] as usize] += w[r];
            branch_total[b] += w[r];
        }
    }
    if branch_total.iter().filter(|&&t| t > 0.0).count() < 2 {
        return None;
    }
    let known_total: f64 = branch_total.iter().sum();
    let mut known = vec![0.0; n_classes];
    for b in &branch {
        for (k, x) in known.iter_mut().zip(b) {
            *k += x;
        }
    }
    let conditional: f64 = branch
        .iter()
        .zip(&branch_total)
        .map(|(b, &t)| weighted_entropy(t, b))
        .sum::<f64>()
        / known_total;
    let mut gain = known_total / total * (entropy_bits(&known) - conditional);
    if let SplitForm::Threshold(_) = test.form {
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() >= 2 {
            gain -= math::log2((distinct.len() - 1) as f64) / total;
        }
    }
    let mut parts = branch_total;
    parts.push((total - known_total).max(0.0));
    let info = entropy_bits(&parts);
    Some(gain / info)
}

/// The test C4.5 would place at the root of `d` restricted to `candidates`.
pub fn best_split(
    d: &Dataset,
    weights: Option<&[f64]>,
    candidates: &[usize],
    params: &TreeParams,
) -> Option<SplitTest> {
    let w = resolve_weights(d, weights);
    let root = RootState::new(d, &w, candidates);
    let view = root.view(d, &w, params.min_leaf_instances as f64);
    let tests = per_attribute_best(&view, candidates, &|a| root.sorted(a));
    choose_c45(&tests).map(|t| t.test)
}

/// All positive-gain tests at the root of `d`, best gain ratio first.
pub fn rank_tests(
    d: &Dataset,
    weights: Option<&[f64]>,
    candidates: &[usize],
    params: &TreeParams,
) -> Vec<RankedTest> {
    let w = resolve_weights(d, weights);
    let root = RootState::new(d, &w, candidates);
    let view = root.view(d, &w, params.min_leaf_instances as f64);
    all_tests(&view, candidates, &|a| root.sorted(a))
}

/// The best test of every candidate attribute with positive gain, in
/// attribute order: the set C4.5 chooses from at the root of `d`.
pub fn attribute_tests(
    d: &Dataset,
    weights: Option<&[f64]>,
    candidates: &[usize],
    params: &TreeParams,
) -> Vec<RankedTest> {
    let w = resolve_weights(d, weights);
    let root = RootState::new(d, &w, candidates);
    let view = root.view(d, &w, params.min_leaf_instances as f64);
    per_attribute_best(&view, candidates, &|a| root.sorted(a))
}
