//! Column-oriented labelled data, cross-dataset alignment and z-scores.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Category index used for a missing categorical cell.
pub const MISSING_CATEGORY: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttributeKind {
    Continuous,
    Categorical,
}

impl AttributeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttributeKind::Continuous => "continuous",
            AttributeKind::Categorical => "categorical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSchema {
    pub name: String,
    pub kind: AttributeKind,
    /// Declared categories in index order; empty for continuous attributes.
    pub categories: Vec<String>,
}

impl AttributeSchema {
    pub fn continuous(name: impl Into<String>) -> Self {
        AttributeSchema {
            name: name.into(),
            kind: AttributeKind::Continuous,
            categories: Vec::new(),
        }
    }

    pub fn categorical(name: impl Into<String>, categories: Vec<String>) -> Self {
        AttributeSchema {
            name: name.into(),
            kind: AttributeKind::Categorical,
            categories,
        }
    }

    pub fn category_index(&self, token: &str) -> Option<u32> {
        self.categories
            .iter()
            .position(|c| c == token)
            .map(|i| i as u32)
    }
}

/// Attribute list plus the ordered class label set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    attributes: Vec<AttributeSchema>,
    classes: Vec<String>,
}

impl Schema {
    pub fn new(attributes: Vec<AttributeSchema>, classes: Vec<String>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for a in &attributes {
            if a.name.is_empty() {
                return Err(Error::InvalidDataset("empty attribute name".into()));
            }
            if !seen.insert(a.name.as_str()) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate attribute name `{}`",
                    a.name
                )));
            }
            match a.kind {
                AttributeKind::Categorical if a.categories.is_empty() => {
                    return Err(Error::InvalidDataset(format!(
                        "categorical attribute `{}` has no categories",
                        a.name
                    )))
                }
                AttributeKind::Continuous if !a.categories.is_empty() => {
                    return Err(Error::InvalidDataset(format!(
                        "continuous attribute `{}` declares categories",
                        a.name
                    )))
                }
                _ => {}
            }
        }
        let unique: BTreeSet<&str> = classes.iter().map(String::as_str).collect();
        if unique.len() != classes.len() {
            return Err(Error::InvalidDataset("duplicate class label".into()));
        }
        Ok(Schema {
            attributes,
            classes,
        })
    }

    pub fn attributes(&self) -> &[AttributeSchema] {
        &self.attributes
    }

    pub fn attribute(&self, index: usize) -> &AttributeSchema {
        &self.attributes[index]
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_index(&self, label: &str) -> Option<u32> {
        self.classes
            .iter()
            .position(|c| c == label)
            .map(|i| i as u32)
    }
}

/// A single cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Num(f64),
    /// Index into the attribute's category list.
    Cat(u32),
    Missing,
}

/// Read access to one record, by attribute index.
pub trait Row {
    fn value(&self, attribute: usize) -> Value;
    fn width(&self) -> usize;
}

impl Row for [Value] {
    fn value(&self, attribute: usize) -> Value {
        self[attribute]
    }

    fn width(&self) -> usize {
        self.len()
    }
}

impl Row for Vec<Value> {
    fn value(&self, attribute: usize) -> Value {
        self[attribute]
    }

    fn width(&self) -> usize {
        self.len()
    }
}

#[derive(Clone, Copy)]
pub struct RowRef<'a> {
    data: &'a Dataset,
    row: usize,
}

impl Row for RowRef<'_> {
    fn value(&self, attribute: usize) -> Value {
        self.data.value(self.row, attribute)
    }

    fn width(&self) -> usize {
        self.data.n_attributes()
    }
}

#[derive(Debug, Clone)]
pub enum Column {
    /// `NaN` marks a missing cell.
    Continuous(Vec<f64>),
    /// [`MISSING_CATEGORY`] marks a missing cell.
    Categorical(Vec<u32>),
}

impl Column {
    fn len(&self) -> usize {
        match self {
            Column::Continuous(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    fn select(&self, rows: &[usize]) -> Column {
        match self {
            Column::Continuous(v) => Column::Continuous(rows.iter().map(|&r| v[r]).collect()),
            Column::Categorical(v) => Column::Categorical(rows.iter().map(|&r| v[r]).collect()),
        }
    }
}

impl PartialEq for Column {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Column::Continuous(a), Column::Continuous(b)) => {
                a.len() == b.len()
                    && a.iter()
                        .zip(b)
                        .all(|(x, y)| (x.is_nan() && y.is_nan()) || x.to_bits() == y.to_bits())
            }
            (Column::Categorical(a), Column::Categorical(b)) => a == b,
            _ => false,
        }
    }
}

/// Labelled records over a fixed schema. Immutable once built; the schema is
/// shared between a dataset and everything derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Arc<Schema>,
    columns: Vec<Column>,
    labels: Vec<u32>,
}

impl Dataset {
    pub fn new(schema: Arc<Schema>, columns: Vec<Column>, labels: Vec<u32>) -> Result<Self> {
        if columns.len() != schema.len() {
            return Err(Error::InvalidDataset(format!(
                "{} columns for {} attributes",
                columns.len(),
                schema.len()
            )));
        }
        let n = labels.len();
        for (attr, col) in schema.attributes().iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::InvalidDataset(format!(
                    "column `{}` has {} cells, expected {}",
                    attr.name,
                    col.len(),
                    n
                )));
            }
            match (attr.kind, col) {
                (AttributeKind::Continuous, Column::Continuous(v)) => {
                    if v.iter().any(|x| x.is_infinite()) {
                        return Err(Error::InvalidDataset(format!(
                            "non-finite value in `{}`",
                            attr.name
                        )));
                    }
                }
                (AttributeKind::Categorical, Column::Categorical(v)) => {
                    let k = attr.categories.len() as u32;
                    if v.iter().any(|&c| c != MISSING_CATEGORY && c >= k) {
                        return Err(Error::InvalidDataset(format!(
                            "undeclared category in `{}`",
                            attr.name
                        )));
                    }
                }
                _ => {
                    return Err(Error::InvalidDataset(format!(
                        "column kind does not match attribute `{}`",
                        attr.name
                    )))
                }
            }
        }
        let c = schema.n_classes() as u32;
        if labels.iter().any(|&l| l >= c) {
            return Err(Error::InvalidDataset("label outside the class set".into()));
        }
        Ok(Dataset {
            schema,
            columns,
            labels,
        })
    }

    /// Build from row-major values. Class labels are given as strings; the
    /// class set is their sorted distinct values.
    pub fn from_rows<S: AsRef<str>>(
        attributes: Vec<AttributeSchema>,
        rows: &[Vec<Value>],
        labels: &[S],
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let classes: Vec<String> = labels
            .iter()
            .map(|l| l.as_ref().to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let schema = Schema::new(attributes, classes)?;
        let mut columns: Vec<Column> = schema
            .attributes()
            .iter()
            .map(|a| match a.kind {
                AttributeKind::Continuous => Column::Continuous(Vec::with_capacity(rows.len())),
                AttributeKind::Categorical => Column::Categorical(Vec::with_capacity(rows.len())),
            })
            .collect();
        for row in rows {
            if row.len() != schema.len() {
                return Err(Error::RowLength {
                    expected: schema.len(),
                    found: row.len(),
                });
            }
            for (a, (col, v)) in columns.iter_mut().zip(row).enumerate() {
                match (col, *v) {
                    (Column::Continuous(c), Value::Num(x)) => c.push(x),
                    (Column::Continuous(c), Value::Missing) => c.push(f64::NAN),
                    (Column::Categorical(c), Value::Cat(k)) => c.push(k),
                    (Column::Categorical(c), Value::Missing) => c.push(MISSING_CATEGORY),
                    _ => {
                        return Err(Error::InvalidDataset(format!(
                            "value kind does not match attribute `{}`",
                            schema.attribute(a).name
                        )))
                    }
                }
            }
        }
        let label_idx = labels
            .iter()
            .map(|l| schema.class_index(l.as_ref()).unwrap())
            .collect();
        Dataset::new(Arc::new(schema), columns, label_idx)
    }

    /// All-continuous convenience constructor.
    pub fn from_continuous<S: AsRef<str>, L: AsRef<str>>(
        names: &[S],
        rows: &[Vec<f64>],
        labels: &[L],
    ) -> Result<Self> {
        let attrs = names
            .iter()
            .map(|n| AttributeSchema::continuous(n.as_ref()))
            .collect();
        let values: Vec<Vec<Value>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&x| if x.is_nan() { Value::Missing } else { Value::Num(x) })
                    .collect()
            })
            .collect();
        Dataset::from_rows(attrs, &values, labels)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn shared_schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.columns.len()
    }

    pub fn n_classes(&self) -> usize {
        self.schema.n_classes()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, row: usize) -> u32 {
        self.labels[row]
    }

    pub fn class_name(&self, class: u32) -> &str {
        &self.schema.classes()[class as usize]
    }

    pub fn column(&self, attribute: usize) -> &Column {
        &self.columns[attribute]
    }

    pub fn continuous(&self, attribute: usize) -> Option<&[f64]> {
        match &self.columns[attribute] {
            Column::Continuous(v) => Some(v),
            Column::Categorical(_) => None,
        }
    }

    pub fn categorical(&self, attribute: usize) -> Option<&[u32]> {
        match &self.columns[attribute] {
            Column::Categorical(v) => Some(v),
            Column::Continuous(_) => None,
        }
    }

    pub fn value(&self, row: usize, attribute: usize) -> Value {
        match &self.columns[attribute] {
            Column::Continuous(v) => {
                let x = v[row];
                if x.is_nan() {
                    Value::Missing
                } else {
                    Value::Num(x)
                }
            }
            Column::Categorical(v) => match v[row] {
                MISSING_CATEGORY => Value::Missing,
                k => Value::Cat(k),
            },
        }
    }

    pub fn row(&self, row: usize) -> RowRef<'_> {
        RowRef { data: self, row }
    }

    pub fn row_values(&self, row: usize) -> Vec<Value> {
        (0..self.n_attributes()).map(|a| self.value(row, a)).collect()
    }

    pub fn continuous_attributes(&self) -> Vec<usize> {
        self.schema
            .attributes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.kind == AttributeKind::Continuous)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0usize; self.n_classes()];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// Class proportions in class-index order.
    pub fn class_priors(&self) -> Vec<f64> {
        let n = self.n_rows().max(1) as f64;
        self.class_counts().iter().map(|&c| c as f64 / n).collect()
    }

    /// Rows in the given order (indices may repeat).
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
        }
    }

    /// Keep only the listed attributes, in the listed order.
    pub fn select_attributes(&self, attributes: &[usize]) -> Dataset {
        let attrs = attributes
            .iter()
            .map(|&a| self.schema.attribute(a).clone())
            .collect();
        let schema = Schema {
            attributes: attrs,
            classes: self.schema.classes.clone(),
        };
        Dataset {
            schema: Arc::new(schema),
            columns: attributes.iter().map(|&a| self.columns[a].clone()).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Replace one continuous column. Used by noise injection.
    pub fn with_continuous_column(mut self, attribute: usize, values: Vec<f64>) -> Result<Self> {
        match &mut self.columns[attribute] {
            Column::Continuous(v) if v.len() == values.len() => {
                *v = values;
                Ok(self)
            }
            _ => Err(Error::InvalidParameter(format!(
                "attribute {attribute} is not a continuous column of matching length"
            ))),
        }
    }

    /// Re-express this dataset in another schema: attributes are looked up by
    /// name and reordered, category tokens and class labels are re-indexed.
    /// Categories unknown to `target` become missing cells (both route to the
    /// majority branch at classification time). Extra attributes are dropped.
    pub fn conform_to(&self, target: &Arc<Schema>) -> Result<Dataset> {
        let mut columns = Vec::with_capacity(target.len());
        for attr in target.attributes() {
            let src = self
                .schema
                .index_of(&attr.name)
                .ok_or_else(|| Error::MissingAttribute(attr.name.clone()))?;
            let src_attr = self.schema.attribute(src);
            if src_attr.kind != attr.kind {
                return Err(Error::KindConflict {
                    name: attr.name.clone(),
                    left: attr.kind.as_str(),
                    right: src_attr.kind.as_str(),
                });
            }
            columns.push(match &self.columns[src] {
                Column::Continuous(v) => Column::Continuous(v.clone()),
                Column::Categorical(v) => {
                    let map: Vec<u32> = src_attr
                        .categories
                        .iter()
                        .map(|c| attr.category_index(c).unwrap_or(MISSING_CATEGORY))
                        .collect();
                    Column::Categorical(
                        v.iter()
                            .map(|&k| {
                                if k == MISSING_CATEGORY {
                                    k
                                } else {
                                    map[k as usize]
                                }
                            })
                            .collect(),
                    )
                }
            });
        }
        let mut class_map = Vec::with_capacity(self.n_classes());
        for c in self.schema.classes() {
            class_map.push(
                target
                    .class_index(c)
                    .ok_or_else(|| Error::UnknownClass(c.clone())),
            );
        }
        let mut labels = Vec::with_capacity(self.n_rows());
        for &l in &self.labels {
            labels.push(class_map[l as usize].clone()?);
        }
        Ok(Dataset {
            schema: target.clone(),
            columns,
            labels,
        })
    }

    /// Per-attribute sample standard deviation of non-missing cells, for
    /// continuous attributes (`None` for categorical ones).
    pub fn continuous_stddevs(&self) -> Vec<Option<f64>> {
        self.columns
            .iter()
            .map(|c| match c {
                Column::Continuous(v) => Some(column_moments(v).1),
                Column::Categorical(_) => None,
            })
            .collect()
    }
}

fn column_moments(values: &[f64]) -> (f64, f64) {
    let known: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    (math::mean(&known), math::sample_stddev(&known))
}

/// Restrict both datasets to their shared attribute names, in lexicographic
/// order. Rows and labels are untouched.
pub fn align_datasets(a: &Dataset, b: &Dataset) -> Result<(Dataset, Dataset)> {
    let a_classes: BTreeSet<&String> = a.schema.classes().iter().collect();
    let b_classes: BTreeSet<&String> = b.schema.classes().iter().collect();
    if a_classes != b_classes {
        return Err(Error::ClassMismatch);
    }
    let a_names: BTreeMap<&str, usize> = a
        .schema
        .attributes()
        .iter()
        .enumerate()
        .map(|(i, at)| (at.name.as_str(), i))
        .collect();
    let mut ia = Vec::new();
    let mut ib = Vec::new();
    let b_names: BTreeMap<&str, usize> = b
        .schema
        .attributes()
        .iter()
        .enumerate()
        .map(|(i, at)| (at.name.as_str(), i))
        .collect();
    for (name, &i) in &a_names {
        if let Some(&j) = b_names.get(name) {
            let (ka, kb) = (a.schema.attribute(i).kind, b.schema.attribute(j).kind);
            if ka != kb {
                return Err(Error::KindConflict {
                    name: (*name).to_string(),
                    left: ka.as_str(),
                    right: kb.as_str(),
                });
            }
            ia.push(i);
            ib.push(j);
        }
    }
    if ia.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    Ok((a.select_attributes(&ia), b.select_attributes(&ib)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttributeStats {
    pub mean: f64,
    pub stddev: f64,
}

/// Per-attribute mean and sample standard deviation, keyed by attribute name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NormalizationStats {
    entries: BTreeMap<String, AttributeStats>,
}

impl NormalizationStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, mean: f64, stddev: f64) {
        self.entries.insert(name.into(), AttributeStats { mean, stddev });
    }

    pub fn get(&self, name: &str) -> Option<AttributeStats> {
        self.entries.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in attribute-name order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, AttributeStats)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// z-score every continuous attribute with its own mean and sample
/// standard deviation; constant attributes become all zeros.
pub fn znormalize(d: &Dataset) -> Result<(Dataset, NormalizationStats)> {
    if d.n_rows() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            found: d.n_rows(),
        });
    }
    let mut stats = NormalizationStats::new();
    for (attr, col) in d.schema.attributes().iter().zip(&d.columns) {
        if let Column::Continuous(v) = col {
            let (mean, stddev) = column_moments(v);
            stats.insert(attr.name.clone(), mean, stddev);
        }
    }
    let out = apply_normalization(d, &stats)?;
    Ok((out, stats))
}

/// Transform continuous cells with externally fitted statistics.
pub fn apply_normalization(d: &Dataset, stats: &NormalizationStats) -> Result<Dataset> {
    let mut columns = Vec::with_capacity(d.columns.len());
    for (attr, col) in d.schema.attributes().iter().zip(&d.columns) {
        columns.push(match col {
            Column::Continuous(v) => {
                let s = stats
                    .get(&attr.name)
                    .ok_or_else(|| Error::MissingStats(attr.name.clone()))?;
                Column::Continuous(
                    v.iter()
                        .map(|&x| {
                            if x.is_nan() {
                                x
                            } else if s.stddev > 0.0 {
                                (x - s.mean) / s.stddev
                            } else {
                                0.0
                            }
                        })
                        .collect(),
                )
            }
            c => c.clone(),
        });
    }
    Ok(Dataset {
        schema: d.schema.clone(),
        columns,
        labels: d.labels.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn one_col(values: &[f64]) -> Dataset {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        let labels: Vec<&str> = values
            .iter()
            .enumerate()
            .map(|(i, _)| if i % 2 == 0 { "a" } else { "b" })
            .collect();
        Dataset::from_continuous(&["x"], &rows, &labels).unwrap()
    }

    #[test]
    fn znormalize_examples() {
        let (z, stats) = znormalize(&one_col(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(z.continuous(0).unwrap(), &[-1.0, 0.0, 1.0]);
        assert_eq!(stats.get("x").unwrap().stddev, 1.0);

        let (z, _) = znormalize(&one_col(&[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(z.continuous(0).unwrap(), &[0.0, 0.0, 0.0]);

        let (z, _) = znormalize(&one_col(&[2.0, 4.0])).unwrap();
        let expect = 1.0 / 2f64.sqrt();
        let got = z.continuous(0).unwrap();
        assert!((got[0] + expect).abs() < 1e-9);
        assert!((got[1] - expect).abs() < 1e-9);
    }

    #[test]
    fn znormalize_needs_two_rows() {
        assert!(matches!(
            znormalize(&one_col(&[1.0])),
            Err(Error::TooFewRows { .. })
        ));
    }

    #[test]
    fn normalization_leaves_missing_and_categorical_alone() {
        let attrs = vec![
            AttributeSchema::continuous("x"),
            AttributeSchema::categorical("c", vec!["p".into(), "q".into()]),
        ];
        let rows = vec![
            vec![Value::Num(1.0), Value::Cat(1)],
            vec![Value::Missing, Value::Missing],
            vec![Value::Num(3.0), Value::Cat(0)],
        ];
        let d = Dataset::from_rows(attrs, &rows, &["a", "b", "a"]).unwrap();
        let (z, s) = znormalize(&d).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(z.value(1, 0), Value::Missing);
        assert_eq!(z.value(0, 1), Value::Cat(1));
        assert_eq!(z.value(1, 1), Value::Missing);
        let sd = 2f64.sqrt();
        assert_eq!(z.value(0, 0), Value::Num(-1.0 / sd));
    }

    #[test]
    fn apply_normalization_matches_fit() {
        let d = one_col(&[0.5, 1.5, 9.0, -2.0]);
        let (z, s) = znormalize(&d).unwrap();
        assert_eq!(apply_normalization(&d, &s).unwrap(), z);

        let mean_row = one_col(&[s.get("x").unwrap().mean]);
        let out = apply_normalization(&mean_row, &s).unwrap();
        assert_eq!(out.continuous(0).unwrap(), &[0.0]);
    }

    #[test]
    fn apply_normalization_missing_stats() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        let d = Dataset::from_continuous(&["g1", "g7"], &rows, &["a", "b"]).unwrap();
        let mut s = NormalizationStats::new();
        s.insert("g1", 0.0, 1.0);
        assert_eq!(
            apply_normalization(&d, &s),
            Err(Error::MissingStats("g7".into()))
        );
    }

    fn named(names: &[&str]) -> Dataset {
        let row: Vec<f64> = (0..names.len()).map(|i| i as f64).collect();
        Dataset::from_continuous(names, &[row.clone(), row], &["y", "n"]).unwrap()
    }

    #[test]
    fn align_intersects_and_sorts() {
        let a = named(&["g3", "g1", "g2"]);
        let b = named(&["g4", "g2", "g3"]);
        let (x, y) = align_datasets(&a, &b).unwrap();
        let names = |d: &Dataset| -> Vec<String> {
            d.schema().attributes().iter().map(|a| a.name.clone()).collect()
        };
        assert_eq!(names(&x), vec!["g2", "g3"]);
        assert_eq!(names(&y), vec!["g2", "g3"]);
        // g2 was column 2 in `a`.
        assert_eq!(x.value(0, 0), Value::Num(2.0));
        assert_eq!(y.value(0, 0), Value::Num(1.0));
    }

    #[test]
    fn align_identity_and_errors() {
        let a = named(&["b", "a"]);
        let (x, y) = align_datasets(&a, &a).unwrap();
        assert_eq!(x, y);

        let c = named(&["z"]);
        assert_eq!(align_datasets(&a, &c), Err(Error::EmptyIntersection));

        let attrs = vec![AttributeSchema::categorical("a", vec!["t".into()])];
        let rows = vec![vec![Value::Cat(0)], vec![Value::Cat(0)]];
        let cat = Dataset::from_rows(attrs, &rows, &["y", "n"]).unwrap();
        assert!(matches!(
            align_datasets(&a, &cat),
            Err(Error::KindConflict { ref name, .. }) if name == "a"
        ));
    }

    #[test]
    fn conform_reindexes_categories_and_classes() {
        let attrs = vec![
            AttributeSchema::continuous("x"),
            AttributeSchema::categorical("c", vec!["p".into(), "q".into()]),
        ];
        let train = Dataset::from_rows(
            attrs,
            &[
                vec![Value::Num(0.0), Value::Cat(0)],
                vec![Value::Num(1.0), Value::Cat(1)],
            ],
            &["a", "b"],
        )
        .unwrap();
        let test_attrs = vec![
            AttributeSchema::categorical("c", vec!["q".into(), "r".into()]),
            AttributeSchema::continuous("x"),
        ];
        let test = Dataset::from_rows(
            test_attrs,
            &[vec![Value::Cat(0), Value::Num(5.0)], vec![Value::Cat(1), Value::Num(6.0)]],
            &["b", "b"],
        )
        .unwrap();
        let c = test.conform_to(train.shared_schema()).unwrap();
        assert_eq!(c.value(0, 0), Value::Num(5.0));
        assert_eq!(c.value(0, 1), Value::Cat(1));
        assert_eq!(c.value(1, 1), Value::Missing);
        assert_eq!(c.labels(), &[1, 1]);

        let other = named(&["x"]);
        assert_eq!(
            other.conform_to(train.shared_schema()),
            Err(Error::MissingAttribute("c".into()))
        );
    }

    #[test]
    fn schema_invariants() {
        assert!(Schema::new(vec![AttributeSchema::continuous("")], vec![]).is_err());
        assert!(Schema::new(
            vec![AttributeSchema::continuous("a"), AttributeSchema::continuous("a")],
            vec![]
        )
        .is_err());
        assert!(Schema::new(vec![AttributeSchema::categorical("a", vec![])], vec![]).is_err());
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn znormalized_columns_are_standard(values in proptest::collection::vec(-1e3f64..1e3, 3..40)) {
            let d = one_col(&values);
            let (z, _) = znormalize(&d).unwrap();
            let col = z.continuous(0).unwrap();
            let sd = math::sample_stddev(&values);
            prop_assume!(sd > 1e-6);
            prop_assert!(math::mean(col).abs() < 1e-9);
            prop_assert!((math::sample_stddev(col) - 1.0).abs() < 1e-9);
        }

        #[test]
        fn align_is_symmetric(a in proptest::collection::btree_set(0u8..12, 1..8),
                              b in proptest::collection::btree_set(0u8..12, 1..8)) {
            let na: Vec<String> = a.iter().map(|i| format!("g{i}")).collect();
            let nb: Vec<String> = b.iter().rev().map(|i| format!("g{i}")).collect();
            let da = named(&na.iter().map(String::as_str).collect::<Vec<_>>());
            let db = named(&nb.iter().map(String::as_str).collect::<Vec<_>>());
            match align_datasets(&da, &db) {
                Ok((x, y)) => {
                    prop_assert_eq!(x.schema().attributes(), y.schema().attributes());
                    let (y2, x2) = align_datasets(&db, &da).unwrap();
                    prop_assert_eq!(x2.schema().attributes(), x.schema().attributes());
                    prop_assert_eq!(y2.schema().attributes(), y.schema().attributes());
                }
                Err(e) => prop_assert_eq!(e, Error::EmptyIntersection),
            }
        }
    }
}
