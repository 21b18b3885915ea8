use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::dataset::{AttributeSchema, Value};
use crate::synth;

// Frozen from scripts/entropy_oracle.py.
const H_9_5: f64 = 0.9402859587;
const OUTLOOK_RATIO: f64 = 0.1564275624;

fn cont(cols: &[&str], rows: &[Vec<f64>], labels: &[&str]) -> Dataset {
    Dataset::from_continuous(cols, rows, labels).unwrap()
}

#[test]
fn entropy_examples() {
    assert_eq!(entropy(&[2.0, 2.0]).unwrap(), 1.0);
    assert_eq!(entropy(&[4.0, 0.0]).unwrap(), 0.0);
    assert!((entropy(&[9.0, 5.0]).unwrap() - H_9_5).abs() < 1e-4);
    assert_eq!(entropy(&[0.0, 0.0]), Err(Error::ZeroWeight));
}

#[test]
fn gain_ratio_examples() {
    let d = cont(
        &["b"],
        &[vec![0.0], vec![0.0], vec![1.0], vec![1.0]],
        &["n", "n", "y", "y"],
    );
    // penalty log2(1)/4 = 0
    assert!((gain_ratio(&d, None, &SplitTest::threshold(0, 0.5)).unwrap() - 1.0).abs() < 1e-12);

    let flat = cont(&["c"], &[vec![3.0], vec![3.0], vec![3.0]], &["n", "y", "y"]);
    assert_eq!(gain_ratio(&flat, None, &SplitTest::threshold(0, 3.0)), None);

    let w = synth::weather();
    let outlook = w.schema().index_of("outlook").unwrap();
    let r = gain_ratio(&w, None, &SplitTest::multiway(outlook)).unwrap();
    assert!((r - OUTLOOK_RATIO).abs() < 5e-3, "{r}");
    assert!((r - OUTLOOK_RATIO).abs() < 1e-9);
}

#[test]
fn best_split_examples() {
    let d = synth::separable(40, 1, 4, 11);
    let t = best_split(&d, None, &[0, 1, 2, 3, 4], &TreeParams::default()).unwrap();
    assert_eq!(t.attribute, 0);

    let x = synth::xor(5, 2);
    let all: Vec<usize> = (0..x.n_attributes()).collect();
    assert_eq!(best_split(&x, None, &all, &TreeParams::default()), None);
    assert_eq!(best_split(&x, None, &all, &TreeParams::unpruned()), None);

    let d = cont(
        &["v"],
        &[vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
        &["A", "A", "B", "B"],
    );
    let t = best_split(&d, None, &[0], &TreeParams::unpruned()).unwrap();
    assert_eq!(t, SplitTest::threshold(0, 2.5));
}

#[test]
fn xor_gains_are_zero() {
    let x = synth::xor(3, 1);
    for a in 0..2 {
        let r = gain_ratio(&x, None, &SplitTest::threshold(a, 0.5)).unwrap();
        assert!(r.abs() < 1e-12);
    }
    assert!(rank_tests(&x, None, &[0, 1, 2], &TreeParams::unpruned()).is_empty());
}

#[test]
fn build_tree_examples() {
    let one = cont(&["a"], &[vec![1.0], vec![2.0]], &["y", "y"]);
    assert_eq!(build_tree(&one, &TreeParams::default(), &[0]).unwrap().size(), 1);

    let d = synth::separable(40, 1, 0, 1);
    assert_eq!(build_tree(&d, &TreeParams::default(), &[0]).unwrap().size(), 3);

    let x = synth::xor(5, 0);
    let t = build_tree(&x, &TreeParams::default(), &[0, 1]).unwrap();
    assert_eq!(t.size(), 1);
    // balanced priors: the lexicographically first label wins
    assert_eq!(x.class_name(t.classify(&[Value::Num(1.0), Value::Num(0.0)][..]).unwrap().0), "one");
}

#[test]
fn build_tree_rejects_empty() {
    let d = cont(&["a"], &[vec![1.0]], &["y"]).subset(&[]);
    assert_eq!(build_tree(&d, &TreeParams::default(), &[0]), Err(Error::EmptyDataset));
}

#[test]
fn classify_routes_missing_to_majority_branch() {
    // 6 rows go left (<= 2.5), 2 go right
    let rows: Vec<Vec<f64>> = [1.0, 1.0, 2.0, 2.0, 2.0, 1.0, 3.0, 3.0]
        .iter()
        .map(|&v| vec![v])
        .collect();
    let d = cont(&["a"], &rows, &["L", "L", "L", "L", "L", "L", "R", "R"]);
    let t = build_tree(&d, &TreeParams::unpruned(), &[0]).unwrap();
    assert_eq!(t.size(), 3);
    let (c, counts) = t.classify(&[Value::Missing][..]).unwrap();
    assert_eq!(d.class_name(c), "L");
    assert_eq!(counts, &[6.0, 0.0]);
    assert!(matches!(t.classify(&[][..]), Err(Error::RowLength { .. })));
}

#[test]
fn leaf_tree_ignores_row() {
    let leaf = Node::Leaf {
        class: 1,
        counts: vec![1.0, 3.0],
    };
    let schema = synth::weather().shared_schema().clone();
    let t = DecisionTree::from_parts(schema, leaf);
    let row = [Value::Missing; 4];
    assert_eq!(t.classify(&row[..]).unwrap().0, 1);
    assert!(t.used_attributes().is_empty());
}

#[test]
fn used_attributes_examples() {
    let d = synth::separable(10, 0, 6, 0);
    let leaf = |c| Node::Leaf {
        class: c,
        counts: vec![1.0, 1.0],
    };
    let split = |a, t, l, r| Node::Split {
        test: SplitTest::threshold(a, t),
        counts: vec![1.0, 1.0],
        children: vec![l, r],
        majority_branch: 0,
    };
    let schema = d.shared_schema().clone();
    let single = DecisionTree::from_parts(schema.clone(), split(3, 0.5, leaf(0), leaf(1)));
    let names: Vec<String> = single.used_attributes().into_iter().collect();
    assert_eq!(names, vec![d.schema().attribute(3).name.clone()]);

    let deeper = DecisionTree::from_parts(
        schema,
        split(1, 0.5, split(1, 0.2, leaf(0), split(5, 0.1, leaf(0), leaf(1))), leaf(1)),
    );
    assert_eq!(deeper.used_attribute_indices(), BTreeSet::from([1, 5]));
    assert_eq!(deeper.size(), 7);
}

#[test]
fn weather_tree_uses_outlook_at_root() {
    let w = synth::weather();
    let t = build_tree(&w, &TreeParams::unpruned(), &[0, 1, 2, 3]).unwrap();
    match t.root() {
        Node::Split { test, .. } => assert_eq!(test.attribute, 0),
        Node::Leaf { .. } => panic!("expected a split"),
    }
    assert_eq!(t.predict_all(&w).unwrap(), w.labels());
}

#[test]
fn weighted_rows_act_like_duplicates() {
    let d = synth::random_mixed(40, 6, 3);
    let weights: Vec<f64> = (0..d.n_rows()).map(|r| (r % 3) as f64).collect();
    let mut dup = Vec::new();
    for (r, &w) in weights.iter().enumerate() {
        for _ in 0..w as usize {
            dup.push(r);
        }
    }
    let all: Vec<usize> = (0..d.n_attributes()).collect();
    let a = build_tree(&d, &TreeParams::default().with_weights(weights), &all).unwrap();
    let b = build_tree(&d.subset(&dup), &TreeParams::default(), &all).unwrap();
    assert_eq!(a.size(), b.size());
    assert_eq!(a.used_attributes(), b.used_attributes());
}

fn assert_categorical_once(node: &Node, seen: &mut Vec<usize>) {
    if let Node::Split { test, children, .. } = node {
        let categorical = test.form == SplitForm::Multiway;
        if categorical {
            assert!(!seen.contains(&test.attribute), "categorical attribute tested twice");
            seen.push(test.attribute);
        }
        for c in children {
            assert_categorical_once(c, seen);
        }
        if categorical {
            seen.pop();
        }
    }
}

fn assert_leaf_argmax(node: &Node, order: &crate::vote::ClassOrder) {
    match node {
        Node::Leaf { class, counts } => {
            if counts.iter().any(|&w| w > 0.0) {
                assert_eq!(*class, order.argmax(counts));
            }
        }
        Node::Split { children, .. } => children.iter().for_each(|c| assert_leaf_argmax(c, order)),
    }
}

fn rows_reaching(node: &Node, d: &Dataset, target: *const Node) -> Vec<usize> {
    (0..d.n_rows())
        .filter(|&r| {
            let mut n = node;
            loop {
                if core::ptr::eq(n, target) {
                    return true;
                }
                match n {
                    Node::Leaf { .. } => return false,
                    Node::Split {
                        test,
                        children,
                        majority_branch,
                        ..
                    } => {
                        let b = test
                            .branch(d.value(r, test.attribute))
                            .filter(|&b| b < children.len())
                            .unwrap_or(*majority_branch);
                        n = &children[b];
                    }
                }
            }
        })
        .collect()
}

/// Re-evaluate every internal node's test against all other tests on the
/// rows that reach it.
fn assert_locally_best(root: &Node, node: &Node, d: &Dataset, params: &TreeParams, candidates: &[usize]) {
    if let Node::Split {
        test,
        children,
        ..
    } = node
    {
        let rows = rows_reaching(root, d, node);
        let local = d.subset(&rows);
        let cands: Vec<usize> = candidates.to_vec();
        assert_eq!(best_split(&local, None, &cands, params), Some(*test));
        let ranked = attribute_tests(&local, None, &cands, params);
        let chosen = ranked.iter().find(|t| t.test == *test).expect("chosen test is ranked");
        let mean = ranked.iter().map(|t| t.gain).sum::<f64>() / ranked.len() as f64;
        for other in ranked.iter().filter(|t| t.gain >= mean) {
            assert!(chosen.ratio >= other.ratio - 1e-12);
        }
        let next: Vec<usize> = if test.form == SplitForm::Multiway {
            cands.iter().copied().filter(|&a| a != test.attribute).collect()
        } else {
            cands
        };
        for c in children {
            assert_locally_best(root, c, d, params, &next);
        }
    }
}

#[test]
fn chosen_tests_are_locally_best() {
    for seed in 0..6 {
        let d = synth::random_mixed(60, 8, seed);
        let all: Vec<usize> = (0..d.n_attributes()).collect();
        let params = TreeParams::unpruned();
        let t = build_tree(&d, &params, &all).unwrap();
        assert_locally_best(t.root(), t.root(), &d, &params, &all);
    }
}

fn arb_mixed() -> impl Strategy<Value = Dataset> {
    (5usize..60, 1usize..12, any::<u64>()).prop_map(|(n, m, s)| synth::random_mixed(n, m, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn determinism(d in arb_mixed()) {
        let all: Vec<usize> = (0..d.n_attributes()).collect();
        let a = build_tree(&d, &TreeParams::default(), &all).unwrap();
        let b = build_tree(&d, &TreeParams::default(), &all).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn structure_invariants(d in arb_mixed()) {
        let all: Vec<usize> = (0..d.n_attributes()).collect();
        let t = build_tree(&d, &TreeParams::default(), &all).unwrap();
        let order = crate::vote::ClassOrder::from_priors(&d.class_priors());
        assert_leaf_argmax(t.root(), &order);
        assert_categorical_once(t.root(), &mut Vec::new());
        prop_assert_eq!(t.size(), t.root().size());
        for r in 0..d.n_rows() {
            prop_assert!(t.classify(&d.row(r)).is_ok());
        }
    }

    #[test]
    fn pruning_never_grows(d in arb_mixed()) {
        let all: Vec<usize> = (0..d.n_attributes()).collect();
        let grown = TreeParams { pruning_confidence: 1.0, ..TreeParams::default() };
        let a = build_tree(&d, &grown, &all).unwrap();
        let b = build_tree(&d, &TreeParams::default(), &all).unwrap();
        prop_assert!(b.size() <= a.size());
    }

    #[test]
    fn only_candidates_are_tested(d in arb_mixed(), mask in any::<u16>()) {
        let cands: Vec<usize> = (0..d.n_attributes()).filter(|a| mask >> (a % 16) & 1 == 1).collect();
        let t = build_tree(&d, &TreeParams::unpruned(), &cands).unwrap();
        prop_assert!(t.used_attribute_indices().iter().all(|a| cands.contains(a)));
    }

    #[test]
    fn entropy_bounds(w in prop::collection::vec(0.0f64..50.0, 1..6)) {
        prop_assume!(w.iter().any(|&x| x > 0.0));
        let h = entropy(&w).unwrap();
        let k = w.iter().filter(|&&x| x > 0.0).count();
        prop_assert!(h >= 0.0);
        prop_assert!(h <= crate::math::log2(k as f64) + 1e-12);
        prop_assert_eq!(h == 0.0, k == 1);
    }

    /// With one attribute that cleanly separates the classes among random
    /// ones, and no conflicting duplicates, a fully grown tree fits the
    /// training set exactly.
    #[test]
    fn consistent_on_training_data(n in 4usize..80, noise in 0usize..8, seed in any::<u64>()) {
        let d = synth::separable(n, 1, noise, seed);
        let all: Vec<usize> = (0..d.n_attributes()).collect();
        let t = build_tree(&d, &TreeParams::unpruned(), &all).unwrap();
        prop_assert_eq!(t.predict_all(&d).unwrap(), d.labels().to_vec());
    }
}

#[test]
fn categorical_split_needs_two_populated_branches() {
    let attrs = vec![AttributeSchema::categorical(
        "c",
        vec!["p".into(), "q".into(), "r".into()],
    )];
    let rows: Vec<Vec<Value>> = [0, 0, 0, 0, 0, 1]
        .iter()
        .map(|&k| vec![Value::Cat(k)])
        .collect();
    let d = Dataset::from_rows(attrs, &rows, &["a", "a", "a", "a", "a", "b"]).unwrap();
    assert_eq!(best_split(&d, None, &[0], &TreeParams::default()), None);
    assert_eq!(
        best_split(&d, None, &[0], &TreeParams::unpruned()),
        Some(SplitTest::multiway(0))
    );
}
