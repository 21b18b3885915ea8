//! Vote accumulation shared by every ensemble.

use alloc::vec;
use alloc::vec::Vec;

/// Deterministic class preference: larger training prior first, then the
/// lexicographically smaller label (classes are stored in label order, so
/// that is the smaller index).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassOrder {
    rank: Vec<usize>,
}

impl ClassOrder {
    pub fn from_priors(priors: &[f64]) -> Self {
        let mut idx: Vec<usize> = (0..priors.len()).collect();
        idx.sort_by(|&a, &b| priors[b].total_cmp(&priors[a]).then(a.cmp(&b)));
        let mut rank = vec![0; priors.len()];
        for (r, &c) in idx.iter().enumerate() {
            rank[c] = r;
        }
        ClassOrder { rank }
    }

    /// Index of the largest weight; exact ties go to the preferred class.
    pub fn argmax(&self, weights: &[f64]) -> u32 {
        let mut best = 0usize;
        for c in 1..weights.len() {
            let (w, bw) = (weights[c], weights[best]);
            if w > bw || (w == bw && self.rank[c] < self.rank[best]) {
                best = c;
            }
        }
        best as u32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoteBreakdown {
    /// Accumulated vote weight per class index.
    pub weights: Vec<f64>,
    pub winner: u32,
    /// Predicted class and vote weight of each member, in member order.
    pub members: Vec<(u32, f64)>,
}

impl VoteBreakdown {
    pub fn tally(n_classes: usize, members: Vec<(u32, f64)>, order: &ClassOrder) -> Self {
        let mut weights = vec![0.0; n_classes];
        for &(c, w) in &members {
            weights[c as usize] += w;
        }
        let winner = order.argmax(&weights);
        VoteBreakdown {
            weights,
            winner,
            members,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_majority() {
        let order = ClassOrder::from_priors(&[0.5, 0.5]);
        let v = VoteBreakdown::tally(2, vec![(1, 1.0), (1, 1.0), (0, 1.0)], &order);
        assert_eq!(v.winner, 1);
        assert_eq!(v.weights, vec![1.0, 2.0]);
    }

    #[test]
    fn ties_follow_prior_then_label() {
        // classes: 0 = "n" (prior 0.11), 1 = "y" (prior 0.89)
        let order = ClassOrder::from_priors(&[0.11, 0.89]);
        let v = VoteBreakdown::tally(2, vec![(1, 1.0), (0, 1.0)], &order);
        assert_eq!(v.winner, 1);
        let even = ClassOrder::from_priors(&[0.5, 0.5]);
        assert_eq!(even.argmax(&[3.0, 3.0]), 0);
    }

    #[test]
    fn weighted_votes() {
        let order = ClassOrder::from_priors(&[0.5, 0.5]);
        let v = VoteBreakdown::tally(2, vec![(0, 2.0), (1, 0.9), (1, 0.9)], &order);
        assert_eq!(v.winner, 0);
    }
}
