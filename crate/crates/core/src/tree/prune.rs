//! Pessimistic error pruning.

use alloc::vec::Vec;

use super::Node;
use crate::math;
use crate::vote::ClassOrder;

// Confidence level -> normal deviate, interpolated linearly between entries.
const CONFIDENCE: [f64; 9] = [0.0, 0.001, 0.005, 0.01, 0.05, 0.10, 0.20, 0.40, 1.00];
const DEVIATE: [f64; 9] = [4.0, 3.09, 2.58, 2.33, 1.65, 1.28, 0.84, 0.25, 0.00];

fn deviate(cf: f64) -> f64 {
    let mut i = 0;
    while cf > CONFIDENCE[i] {
        i += 1;
    }
    if i == 0 {
        return DEVIATE[0];
    }
    DEVIATE[i - 1]
        + (DEVIATE[i] - DEVIATE[i - 1]) * (cf - CONFIDENCE[i - 1]) / (CONFIDENCE[i] - CONFIDENCE[i - 1])
}

/// Extra errors to add to `errors` observed errors among `n` cases so that
/// the total is the upper limit of the binomial error rate at confidence
/// `cf`.
pub fn pessimistic_errors(n: f64, errors: f64, cf: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    if errors < 1e-6 {
        return n * (1.0 - math::exp(math::ln(cf) / n));
    }
    if errors < 0.9999 {
        let v = n * (1.0 - math::exp(math::ln(cf) / n));
        return v + errors * (pessimistic_errors(n, 1.0, cf) - v);
    }
    if errors + 0.5 >= n {
        return 0.67 * (n - errors);
    }
    let z = deviate(cf);
    let coeff = z * z;
    let e = errors + 0.5;
    let pr = (e + coeff / 2.0 + math::sqrt(coeff * (e * (1.0 - e / n) + coeff / 4.0))) / (n + coeff);
    n * pr - errors
}

fn leaf_errors(counts: &[f64], class: u32) -> (f64, f64) {
    let n: f64 = counts.iter().sum();
    (n, (n - counts[class as usize]).max(0.0))
}

fn estimate(n: f64, errors: f64, cf: f64) -> f64 {
    errors + pessimistic_errors(n, errors, cf)
}

fn prune_rec(node: Node, cf: f64, order: &ClassOrder) -> (Node, f64) {
    match node {
        Node::Leaf { class, counts } => {
            let (n, e) = leaf_errors(&counts, class);
            (Node::Leaf { class, counts }, estimate(n, e, cf))
        }
        Node::Split {
            test,
            counts,
            children,
            majority_branch,
        } => {
            let mut pruned = Vec::with_capacity(children.len());
            let mut subtree = 0.0;
            for c in children {
                let (c, e) = prune_rec(c, cf, order);
                subtree += e;
                pruned.push(c);
            }
            let class = order.argmax(&counts);
            let (n, e) = leaf_errors(&counts, class);
            let as_leaf = estimate(n, e, cf);
            if as_leaf <= subtree {
                (Node::Leaf { class, counts }, as_leaf)
            } else {
                (
                    Node::Split {
                        test,
                        counts,
                        children: pruned,
                        majority_branch,
                    },
                    subtree,
                )
            }
        }
    }
}

/// Replace, bottom-up, every subtree whose estimated error is not below the
/// estimated error of a single leaf in its place.
pub fn prune(node: Node, cf: f64, order: &ClassOrder) -> Node {
    prune_rec(node, cf, order).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deviate_table() {
        assert!((deviate(0.25) - 0.6925).abs() < 1e-12);
        assert_eq!(deviate(0.0), 4.0);
        assert_eq!(deviate(1.0), 0.0);
    }

    #[test]
    fn zero_error_bound() {
        // n * (1 - cf^(1/n)); for n = 1 that is 1 - cf.
        assert!((pessimistic_errors(1.0, 0.0, 0.25) - 0.75).abs() < 1e-12);
        assert!(pessimistic_errors(6.0, 0.0, 0.25) > 0.0);
    }

    #[test]
    fn bound_grows_with_errors() {
        let a = pessimistic_errors(20.0, 1.0, 0.25) + 1.0;
        let b = pessimistic_errors(20.0, 3.0, 0.25) + 3.0;
        assert!(b > a);
        // the estimate always exceeds the observed count
        assert!(pessimistic_errors(100.0, 30.0, 0.25) > 0.0);
    }
}
