//! Deterministic synthetic datasets for tests and benchmarks.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dataset::{AttributeSchema, Dataset, Value};
use crate::math;
use crate::noise::standard_normal;
use crate::rng::{self, tag, StreamRng};

fn gen(seed: u64, kind: u64) -> StreamRng {
    rng::stream(seed, &[tag::SYNTH, kind])
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len().max(1);
    (0..n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

/// Balanced binary labels `neg`/`pos` in shuffled order.
fn balanced_labels(n: usize, rng: &mut StreamRng) -> Vec<bool> {
    let mut y: Vec<bool> = (0..n).map(|i| i % 2 == 1).collect();
    y.shuffle(rng);
    y
}

/// `positives` labels `pos` and the rest `neg`, shuffled.
fn labels_with(n: usize, positives: usize, rng: &mut StreamRng) -> Vec<bool> {
    let mut y: Vec<bool> = (0..n).map(|i| i < positives).collect();
    y.shuffle(rng);
    y
}

fn label_names(y: &[bool]) -> Vec<&'static str> {
    y.iter().map(|&p| if p { "pos" } else { "neg" }).collect()
}

/// The 14-row play-tennis table with four categorical attributes.
pub fn weather() -> Dataset {
    const ROWS: [[&str; 5]; 14] = [
        ["sunny", "hot", "high", "false", "no"],
        ["sunny", "hot", "high", "true", "no"],
        ["overcast", "hot", "high", "false", "yes"],
        ["rainy", "mild", "high", "false", "yes"],
        ["rainy", "cool", "normal", "false", "yes"],
        ["rainy", "cool", "normal", "true", "no"],
        ["overcast", "cool", "normal", "true", "yes"],
        ["sunny", "mild", "high", "false", "no"],
        ["sunny", "cool", "normal", "false", "yes"],
        ["rainy", "mild", "normal", "false", "yes"],
        ["sunny", "mild", "normal", "true", "yes"],
        ["overcast", "mild", "high", "true", "yes"],
        ["overcast", "hot", "normal", "false", "yes"],
        ["rainy", "mild", "high", "true", "no"],
    ];
    let domains: [(&str, &[&str]); 4] = [
        ("outlook", &["overcast", "rainy", "sunny"]),
        ("temperature", &["cool", "hot", "mild"]),
        ("humidity", &["high", "normal"]),
        ("windy", &["false", "true"]),
    ];
    let attrs: Vec<AttributeSchema> = domains
        .iter()
        .map(|(n, cats)| AttributeSchema::categorical(*n, cats.iter().map(|c| c.to_string()).collect()))
        .collect();
    let rows: Vec<Vec<Value>> = ROWS
        .iter()
        .map(|r| {
            (0..4)
                .map(|a| Value::Cat(attrs[a].category_index(r[a]).expect("declared category")))
                .collect()
        })
        .collect();
    let labels: Vec<&str> = ROWS.iter().map(|r| r[4]).collect();
    Dataset::from_rows(attrs, &rows, &labels).expect("valid table")
}

/// Two continuous 0/1 attributes `a`, `b` with label `a xor b`, each of the
/// four combinations repeated `copies` times, plus `constant` attributes
/// that never vary.
pub fn xor(copies: usize, constant: usize) -> Dataset {
    let mut header: Vec<String> = vec!["a".into(), "b".into()];
    header.extend(names("c", constant));
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..copies {
        for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
            let mut row = vec![a, b];
            row.extend(core::iter::repeat_n(1.0, constant));
            rows.push(row);
            labels.push(if (a == 1.0) != (b == 1.0) { "one" } else { "zero" });
        }
    }
    Dataset::from_continuous(&header, &rows, &labels).expect("valid xor")
}

/// `n` rows with `copies` continuous attributes that each equal the label
/// (0 or 1) and `noise` uniform attributes unrelated to it.
pub fn separable(n: usize, copies: usize, noise: usize, seed: u64) -> Dataset {
    let mut rng = gen(seed, 1);
    let y = balanced_labels(n, &mut rng);
    let mut header = names("s", copies);
    header.extend(names("u", noise));
    let rows: Vec<Vec<f64>> = y
        .iter()
        .map(|&p| {
            let mut row = vec![if p { 1.0 } else { 0.0 }; copies];
            row.extend((0..noise).map(|_| rng::uniform(&mut rng)));
            row
        })
        .collect();
    Dataset::from_continuous(&header, &rows, &label_names(&y)).expect("valid separable")
}

/// Settings for [`marker_groups`].
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerSpec {
    pub groups: usize,
    pub per_group: usize,
    /// Standard deviation of the tight `neg` profile around 0.
    pub baseline_sd: f64,
    /// Lower edge of the elevated `pos` profile.
    pub onset: f64,
    /// Mean of the exponential tail added above `onset` for `pos` rows.
    pub tail_mean: f64,
}

impl Default for MarkerSpec {
    fn default() -> Self {
        MarkerSpec {
            groups: 10,
            per_group: 2,
            baseline_sd: 0.3,
            onset: 1.2,
            tail_mean: 2.5,
        }
    }
}

/// Expression-marker style data: `groups` independent groups of
/// `per_group` attributes. Each attribute is drawn independently given the
/// label: `neg` rows sit tightly around 0, `pos` rows are elevated with a
/// long right tail (`onset + Exp(tail_mean)`). Any single attribute, and so
/// any group, predicts the label almost perfectly on clean data, while its
/// large spread makes additive noise at its own scale very damaging.
///
/// Returns a training set of `n_train` rows and a test set of `n_test` rows
/// drawn from the same distribution.
pub fn marker_groups(spec: &MarkerSpec, n_train: usize, n_test: usize, seed: u64) -> (Dataset, Dataset) {
    let header: Vec<String> = (0..spec.groups)
        .flat_map(|g| (0..spec.per_group).map(move |j| format!("g{g:02}_{j}")))
        .collect();
    let m = header.len();
    let draw = |n: usize, stream: u64| {
        let mut rng = gen(seed, stream);
        let y = balanced_labels(n, &mut rng);
        let rows: Vec<Vec<f64>> = y
            .iter()
            .map(|&p| {
                (0..m)
                    .map(|_| {
                        if p {
                            let u = 1.0 - rng::uniform(&mut rng);
                            spec.onset - spec.tail_mean * math::ln(u)
                        } else {
                            spec.baseline_sd * standard_normal(&mut rng)
                        }
                    })
                    .collect()
            })
            .collect();
        Dataset::from_continuous(&header, &rows, &label_names(&y)).expect("valid marker data")
    };
    (draw(n_train, 2), draw(n_test, 3))
}

/// Settings for [`gaussian_groups`].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    pub groups: usize,
    pub per_group: usize,
    /// Distance between the class means of each attribute, in within-class
    /// standard deviations.
    pub separation: f64,
    /// Standard deviation of the per-attribute deviation around the group's
    /// shared latent value.
    pub jitter: f64,
    pub irrelevant: usize,
    /// Share of `pos` rows, rounded to whole rows.
    pub positive_fraction: f64,
}

impl Default for GaussianSpec {
    fn default() -> Self {
        GaussianSpec {
            groups: 10,
            per_group: 3,
            separation: 1.5,
            jitter: 0.5,
            irrelevant: 0,
            positive_fraction: 0.5,
        }
    }
}

/// Groups of redundant Gaussian attributes. Each group has one latent value
/// `z ~ N(+-separation/2, 1)` per row; its attributes are `z + jitter * e`.
/// `irrelevant` pure-noise attributes are appended.
pub fn gaussian_groups(spec: &GaussianSpec, n_train: usize, n_test: usize, seed: u64) -> (Dataset, Dataset) {
    let mut header: Vec<String> = (0..spec.groups)
        .flat_map(|g| (0..spec.per_group).map(move |j| format!("g{g:02}_{j}")))
        .collect();
    header.extend(names("noise", spec.irrelevant));
    let draw = |n: usize, stream: u64| {
        let mut rng = gen(seed, stream);
        let positives = math::round(spec.positive_fraction * n as f64) as usize;
        let y = labels_with(n, positives.min(n), &mut rng);
        let rows: Vec<Vec<f64>> = y
            .iter()
            .map(|&p| {
                let centre = if p { spec.separation / 2.0 } else { -spec.separation / 2.0 };
                let mut row = Vec::with_capacity(header.len());
                for _ in 0..spec.groups {
                    let z = centre + standard_normal(&mut rng);
                    for _ in 0..spec.per_group {
                        row.push(z + spec.jitter * standard_normal(&mut rng));
                    }
                }
                row.extend((0..spec.irrelevant).map(|_| standard_normal(&mut rng)));
                row
            })
            .collect();
        Dataset::from_continuous(&header, &rows, &label_names(&y)).expect("valid gaussian data")
    };
    (draw(n_train, 4), draw(n_test, 5))
}

/// Random data of mixed attribute kinds for structural property tests.
/// About a third of the attributes are categorical; the label depends on a
/// handful of attributes plus label noise, so trees have real structure.
pub fn random_mixed(rows: usize, attributes: usize, seed: u64) -> Dataset {
    let mut rng = gen(seed, 6);
    let n_classes = rng.random_range(2..=3usize);
    let mut attrs = Vec::with_capacity(attributes);
    for (a, name) in names("x", attributes).into_iter().enumerate() {
        if a % 3 == 2 {
            let k = rng.random_range(2..=4usize);
            attrs.push(AttributeSchema::categorical(name, (0..k).map(|c| format!("v{c}")).collect()));
        } else {
            attrs.push(AttributeSchema::continuous(name));
        }
    }
    let data: Vec<Vec<Value>> = (0..rows)
        .map(|_| {
            attrs
                .iter()
                .map(|at| {
                    if at.categories.is_empty() {
                        Value::Num(math::round(standard_normal(&mut rng) * 100.0) / 100.0)
                    } else {
                        Value::Cat(rng.random_range(0..at.categories.len() as u32))
                    }
                })
                .collect()
        })
        .collect();
    let informative: Vec<usize> = (0..attributes.min(6)).map(|_| rng.random_range(0..attributes)).collect();
    let classes: Vec<String> = (0..n_classes).map(|c| format!("k{c}")).collect();
    let labels: Vec<&str> = data
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let score: f64 = informative
                .iter()
                .map(|&a| match row[a] {
                    Value::Num(x) => x,
                    Value::Cat(c) => c as f64 - 1.0,
                    Value::Missing => 0.0,
                })
                .sum();
            let c = if rng::uniform(&mut rng) < 0.15 {
                rng.random_range(0..n_classes)
            } else if i < n_classes {
                // every class appears at least once
                i
            } else {
                let t = math::floor((score / 2.0 + 0.5) * n_classes as f64);
                (t.max(0.0) as usize).min(n_classes - 1)
            };
            classes[c].as_str()
        })
        .collect();
    Dataset::from_rows(attrs, &data, &labels).expect("valid mixed data")
}

/// Hypercube-cluster data in the style of the NIPS 2003 feature selection
/// challenge set: 32 Gaussian clusters on the vertices of a 5-dimensional
/// hypercube (16 per class), 5 informative features, 15 random linear
/// combinations of them, and 480 pure-noise probes, all shifted, scaled,
/// quantized to integers and shuffled into a random column order. 1% of the
/// labels are flipped.
pub fn madelon_like(n_train: usize, n_test: usize, seed: u64) -> (Dataset, Dataset) {
    const INFORMATIVE: usize = 5;
    const REDUNDANT: usize = 15;
    const PROBES: usize = 480;
    const M: usize = INFORMATIVE + REDUNDANT + PROBES;
    const CLUSTERS: usize = 1 << INFORMATIVE;
    let mut rng = gen(seed, 7);

    let mut vertex_class: Vec<bool> = (0..CLUSTERS).map(|i| i % 2 == 1).collect();
    vertex_class.shuffle(&mut rng);
    let covariance: Vec<[[f64; INFORMATIVE]; INFORMATIVE]> = (0..CLUSTERS)
        .map(|_| {
            let mut a = [[0.0; INFORMATIVE]; INFORMATIVE];
            for row in a.iter_mut() {
                for x in row.iter_mut() {
                    *x = 2.0 * rng::uniform(&mut rng) - 1.0;
                }
            }
            a
        })
        .collect();
    let mixing: Vec<[f64; INFORMATIVE]> = (0..REDUNDANT)
        .map(|_| core::array::from_fn(|_| 2.0 * rng::uniform(&mut rng) - 1.0))
        .collect();
    let shift: Vec<f64> = (0..M).map(|_| 2.0 * rng::uniform(&mut rng) - 1.0).collect();
    let scale: Vec<f64> = (0..M).map(|_| 1.0 + 99.0 * rng::uniform(&mut rng)).collect();
    let mut column_order: Vec<usize> = (0..M).collect();
    column_order.shuffle(&mut rng);

    let mut draw = |n: usize| {
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let cluster = i % CLUSTERS;
            let centre: [f64; INFORMATIVE] =
                core::array::from_fn(|d| if cluster >> d & 1 == 1 { 1.0 } else { -1.0 });
            let g: [f64; INFORMATIVE] = core::array::from_fn(|_| standard_normal(&mut rng));
            let a = &covariance[cluster];
            let x: [f64; INFORMATIVE] =
                core::array::from_fn(|j| centre[j] + (0..INFORMATIVE).map(|k| g[k] * a[k][j]).sum::<f64>());
            let mut raw = Vec::with_capacity(M);
            raw.extend_from_slice(&x);
            raw.extend(mixing.iter().map(|b| (0..INFORMATIVE).map(|k| x[k] * b[k]).sum::<f64>()));
            raw.extend((0..PROBES).map(|_| standard_normal(&mut rng)));
            let row: Vec<f64> = column_order
                .iter()
                .map(|&c| math::round(500.0 + (raw[c] + shift[c]) * scale[c]))
                .collect();
            let mut y = vertex_class[cluster];
            if rng::uniform(&mut rng) < 0.01 {
                y = !y;
            }
            rows.push(row);
            labels.push(y);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let rows: Vec<Vec<f64>> = order.iter().map(|&i| rows[i].clone()).collect();
        let labels: Vec<bool> = order.iter().map(|&i| labels[i]).collect();
        (rows, labels)
    };
    let header = names("f", M);
    let (tr, ytr) = draw(n_train);
    let (te, yte) = draw(n_test);
    (
        Dataset::from_continuous(&header, &tr, &label_names(&ytr)).expect("valid madelon train"),
        Dataset::from_continuous(&header, &te, &label_names(&yte)).expect("valid madelon test"),
    )
}

/// Five microarray-shaped two-class sets (few rows, thousands of
/// attributes, uneven classes) built from [`gaussian_groups`]: 20 groups of
/// 10 redundant informative attributes each, the rest pure noise.
pub fn microarray_suite(seed: u64) -> Vec<(String, Dataset)> {
    const SHAPES: [(&str, usize, usize, usize); 5] = [
        ("colon-like", 2000, 62, 22),
        ("dlbcl-like", 4000, 47, 23),
        ("allaml-like", 2000, 72, 25),
        ("tamoxifen-like", 3000, 120, 60),
        ("liver-like", 2500, 180, 75),
    ];
    SHAPES
        .iter()
        .enumerate()
        .map(|(i, &(name, m, n, pos))| {
            let spec = GaussianSpec {
                groups: 20,
                per_group: 10,
                separation: 1.5,
                jitter: 0.7,
                irrelevant: m - 200,
                positive_fraction: pos as f64 / n as f64,
            };
            let (d, _) = gaussian_groups(&spec, n, 0, rng::mix64(seed ^ i as u64));
            (name.to_string(), d)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weather_shape() {
        let d = weather();
        assert_eq!((d.n_rows(), d.n_attributes(), d.n_classes()), (14, 4, 2));
        assert_eq!(d.class_counts(), vec![5, 9]);
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(random_mixed(30, 12, 5), random_mixed(30, 12, 5));
        assert_ne!(random_mixed(30, 12, 5), random_mixed(30, 12, 6));
        let spec = MarkerSpec::default();
        assert_eq!(marker_groups(&spec, 20, 10, 1), marker_groups(&spec, 20, 10, 1));
    }

    #[test]
    fn marker_attributes_separate_clean_data() {
        let (train, _) = marker_groups(&MarkerSpec::default(), 400, 0, 3);
        assert_eq!(train.n_attributes(), 20);
        for a in 0..train.n_attributes() {
            let x = train.continuous(a).unwrap();
            let hits = (0..train.n_rows())
                .filter(|&r| (x[r] > 1.0) == (train.class_name(train.label(r)) == "pos"))
                .count();
            assert!(hits as f64 / train.n_rows() as f64 >= 0.95);
        }
    }

    #[test]
    fn madelon_shape() {
        let (tr, te) = madelon_like(64, 32, 9);
        assert_eq!(tr.n_attributes(), 500);
        assert_eq!((tr.n_rows(), te.n_rows()), (64, 32));
        assert!(tr.continuous(0).unwrap().iter().all(|x| x.fract() == 0.0));
    }
}
