//! Wilcoxon signed-rank test and accuracy.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Largest effective sample size handled by the exact null distribution.
pub const EXACT_LIMIT: usize = 25;
/// Differences with magnitude at most this are treated as zero.
pub const ZERO_TOLERANCE: f64 = 1e-12;
/// Relative tolerance under which two magnitudes share a rank.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PairedAccuracies {
    /// Names of method A and method B.
    pub labels: [String; 2],
    /// `(accuracy_a, accuracy_b)` per shared condition.
    pub pairs: Vec<(f64, f64)>,
}

impl PairedAccuracies {
    pub fn new(a: impl Into<String>, b: impl Into<String>, pairs: Vec<(f64, f64)>) -> Self {
        PairedAccuracies {
            labels: [a.into(), b.into()],
            pairs,
        }
    }

    pub fn differences(&self) -> Vec<f64> {
        self.pairs.iter().map(|(a, b)| a - b).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WilcoxonMethod {
    Exact,
    NormalApproximation,
}

impl WilcoxonMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            WilcoxonMethod::Exact => "exact",
            WilcoxonMethod::NormalApproximation => "normal-approximation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WilcoxonResult {
    pub n_effective: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// `P(W- <= w_minus)` under the null; small values favour method A.
    pub p_one_sided: f64,
    pub method: WilcoxonMethod,
}

/// Average ranks (1-based) of `magnitudes`, which must be sorted ascending,
/// plus the tie-group sizes.
fn average_ranks(magnitudes: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let n = magnitudes.len();
    let mut ranks = vec![0.0; n];
    let mut groups = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && magnitudes[j] - magnitudes[i] <= TIE_TOLERANCE * magnitudes[j].abs() {
            j += 1;
        }
        let rank = (i + 1 + j) as f64 / 2.0;
        for r in &mut ranks[i..j] {
            *r = rank;
        }
        groups.push(j - i);
        i = j;
    }
    (ranks, groups)
}

/// Signed-rank test of "A is more accurate than B" on paired accuracies.
pub fn wilcoxon_signed_rank(p: &PairedAccuracies) -> Result<WilcoxonResult> {
    wilcoxon_differences(&p.differences())
}

/// The same test on raw differences `a - b`.
pub fn wilcoxon_differences(differences: &[f64]) -> Result<WilcoxonResult> {
    if differences.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidParameter("differences must be finite".into()));
    }
    let mut nz: Vec<f64> = differences
        .iter()
        .copied()
        .filter(|d| d.abs() > ZERO_TOLERANCE)
        .collect();
    if nz.is_empty() {
        return Err(Error::AllZeroDifferences);
    }
    nz.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let magnitudes: Vec<f64> = nz.iter().map(|d| d.abs()).collect();
    let (ranks, groups) = average_ranks(&magnitudes);
    let n = nz.len();
    let w_minus: f64 = nz.iter().zip(&ranks).filter(|(d, _)| **d < 0.0).map(|(_, r)| r).sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_plus = total - w_minus;
    let (p, method) = if n <= EXACT_LIMIT {
        (exact_lower_tail(&ranks, w_minus), WilcoxonMethod::Exact)
    } else {
        (normal_lower_tail(n, &groups, w_minus), WilcoxonMethod::NormalApproximation)
    };
    Ok(WilcoxonResult {
        n_effective: n,
        w_plus,
        w_minus,
        p_one_sided: p.clamp(0.0, 1.0),
        method,
    })
}

/// `P(sum of a uniformly random subset of ranks <= w)`. Average ranks are
/// multiples of 1/2, so doubled ranks are integers and the subset-sum counts
/// come from a table over doubled sums; this counts exactly the same sign
/// patterns as enumerating all `2^n` of them.
fn exact_lower_tail(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| math::round(2.0 * r) as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut count = vec![0u64; max + 1];
    count[0] = 1;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if count[s] > 0 {
                count[s + r] += count[s];
            }
        }
        reach += r;
    }
    let limit = math::round(2.0 * w) as usize;
    let hits: u64 = count[..=limit.min(max)].iter().sum();
    hits as f64 / libm::ldexp(1.0, ranks.len() as i32)
}

fn normal_lower_tail(n: usize, groups: &[usize], w: f64) -> f64 {
    let n = n as f64;
    let mean = n * (n + 1.0) / 4.0;
    let ties: f64 = groups.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - ties;
    math::normal_cdf((w + 0.5 - mean) / math::sqrt(var))
}

/// Fraction of positions where `predicted` equals `truth`.
pub fn accuracy(predicted: &[u32], truth: &[u32]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if predicted.len() != truth.len() {
        return Err(Error::RowLength {
            expected: truth.len(),
            found: predicted.len(),
        });
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}
