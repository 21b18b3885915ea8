//! Delimited-text datasets, normalization sidecars and atomic writes.
//!
//! Files carry a header row. Cells holding a single `?` are missing. A column
//! is continuous when every non-missing cell parses as a finite number,
//! categorical otherwise; its categories are the distinct tokens in sorted
//! order.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use dmt_core::dataset::{AttributeStats, Column, MISSING_CATEGORY};
use dmt_core::{AttributeKind, AttributeSchema, Dataset, NormalizationStats, Schema, Value};

use crate::error::{DmtError, Result};

pub const MISSING_TOKEN: &str = "?";

/// A dataset plus the name it is reported under (the file stem).
#[derive(Debug, Clone, PartialEq)]
pub struct NamedDataset {
    pub name: String,
    pub data: Dataset,
}

impl NamedDataset {
    pub fn new(name: impl Into<String>, data: Dataset) -> Self {
        NamedDataset {
            name: name.into(),
            data,
        }
    }
}

/// Header and trimmed cells of a delimited file.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub path: PathBuf,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn read(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| DmtError::io(path, e))?;
        Self::from_reader(path, file)
    }

    pub fn from_reader<R: std::io::Read>(path: &Path, reader: R) -> Result<Self> {
        let csv_err = |source| DmtError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(csv_err)?;
            if record.len() != header.len() {
                return Err(DmtError::MalformedRow {
                    path: path.to_path_buf(),
                    line: record.position().map_or(0, |p| p.line()),
                    expected: header.len(),
                    found: record.len(),
                });
            }
            rows.push(record.iter().map(str::to_string).collect());
        }
        Ok(RawTable {
            path: path.to_path_buf(),
            header,
            rows,
        })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

fn parse_number(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Infer the kind of one column from its cells.
fn infer_attribute(name: &str, cells: &[&str]) -> AttributeSchema {
    let present: Vec<&str> = cells.iter().copied().filter(|c| *c != MISSING_TOKEN).collect();
    if present.iter().all(|c| parse_number(c).is_some()) {
        AttributeSchema::continuous(name)
    } else {
        let categories: BTreeSet<&str> = present.into_iter().collect();
        AttributeSchema::categorical(name, categories.into_iter().map(str::to_string).collect())
    }
}

fn cell_value(attr: &AttributeSchema, token: &str) -> Option<Value> {
    if token == MISSING_TOKEN {
        return Some(Value::Missing);
    }
    match attr.kind {
        AttributeKind::Continuous => parse_number(token).map(Value::Num),
        AttributeKind::Categorical => Some(attr.category_index(token).map_or(Value::Missing, Value::Cat)),
    }
}

/// Load a labelled dataset, inferring attribute kinds.
pub fn load_dataset(path: &Path, class_col: &str) -> Result<Dataset> {
    table_to_dataset(&RawTable::read(path)?, class_col)
}

pub fn load_named(path: &Path, class_col: &str) -> Result<NamedDataset> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(NamedDataset::new(name, load_dataset(path, class_col)?))
}

pub fn table_to_dataset(t: &RawTable, class_col: &str) -> Result<Dataset> {
    let class_at = t.column_index(class_col).ok_or_else(|| DmtError::MissingClassColumn {
        path: t.path.clone(),
        column: class_col.to_string(),
    })?;
    if t.rows.len() < 2 {
        return Err(DmtError::TooFewRows {
            path: t.path.clone(),
            found: t.rows.len(),
        });
    }
    let attr_cols: Vec<usize> = (0..t.header.len()).filter(|&c| c != class_at).collect();
    let attributes: Vec<AttributeSchema> = attr_cols
        .iter()
        .map(|&c| {
            let cells: Vec<&str> = t.rows.iter().map(|r| r[c].as_str()).collect();
            infer_attribute(&t.header[c], &cells)
        })
        .collect();
    let values: Vec<Vec<Value>> = t
        .rows
        .iter()
        .map(|r| {
            attr_cols
                .iter()
                .zip(&attributes)
                .map(|(&c, a)| cell_value(a, &r[c]).expect("kind inferred from these cells"))
                .collect()
        })
        .collect();
    let labels: Vec<&str> = t.rows.iter().map(|r| r[class_at].as_str()).collect();
    Ok(Dataset::from_rows(attributes, &values, &labels)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaRows {
    pub rows: Vec<Vec<Value>>,
    /// Class labels, when the class column is present.
    pub labels: Option<Vec<String>>,
}

/// Rows of `t` expressed in `schema`, looked up by attribute name. Unknown
/// categories become missing. Class labels are returned when the class column
/// is present.
pub fn table_rows_for_schema(
    t: &RawTable,
    schema: &Schema,
    class_col: &str,
) -> Result<SchemaRows> {
    let mut sources = Vec::with_capacity(schema.len());
    for attr in schema.attributes() {
        let c = t.column_index(&attr.name).ok_or_else(|| DmtError::SchemaMismatch {
            path: t.path.clone(),
            attribute: attr.name.clone(),
            detail: "column not present".into(),
        })?;
        sources.push(c);
    }
    let mut rows = Vec::with_capacity(t.rows.len());
    for (i, r) in t.rows.iter().enumerate() {
        let mut values = Vec::with_capacity(schema.len());
        for (attr, &c) in schema.attributes().iter().zip(&sources) {
            let v = cell_value(attr, &r[c]).ok_or_else(|| DmtError::SchemaMismatch {
                path: t.path.clone(),
                attribute: attr.name.clone(),
                detail: format!("row {}: `{}` is not a number", i + 1, r[c]),
            })?;
            values.push(v);
        }
        rows.push(values);
    }
    let labels = t
        .column_index(class_col)
        .map(|c| t.rows.iter().map(|r| r[c].clone()).collect());
    Ok(SchemaRows { rows, labels })
}

/// Shortest text that parses back to exactly `x`.
pub fn format_number(x: f64) -> String {
    format!("{x}")
}

/// Serialize a dataset so that [`load_dataset`] reads it back unchanged.
pub fn dataset_to_csv(d: &Dataset, class_col: &str) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |source| DmtError::Csv {
        path: PathBuf::from("<memory>"),
        source,
    };
    let mut header: Vec<&str> = d.schema().attributes().iter().map(|a| a.name.as_str()).collect();
    header.push(class_col);
    w.write_record(&header).map_err(csv_err)?;
    for r in 0..d.n_rows() {
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        for a in 0..d.n_attributes() {
            record.push(match (d.column(a), d.value(r, a)) {
                (_, Value::Missing) => MISSING_TOKEN.to_string(),
                (_, Value::Num(x)) => format_number(x),
                (Column::Categorical(_), Value::Cat(k)) if k != MISSING_CATEGORY => {
                    d.schema().attribute(a).categories[k as usize].clone()
                }
                _ => MISSING_TOKEN.to_string(),
            });
        }
        record.push(d.class_name(d.label(r)).to_string());
        w.write_record(&record).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| DmtError::io("<memory>", e.into_error()))
}

pub fn save_dataset(path: &Path, d: &Dataset, class_col: &str) -> Result<()> {
    write_atomic(path, &dataset_to_csv(d, class_col)?)
}

/// Write `bytes` to a temporary file in the destination directory, then
/// rename it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| DmtError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| DmtError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| DmtError::io(path, e))?;
    tmp.persist(path).map_err(|e| DmtError::io(path, e.error))?;
    Ok(())
}

/// `attribute,mean,stddev` rows.
pub fn normalization_to_csv(stats: &NormalizationStats) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["attribute", "mean", "stddev"]).expect("in-memory write");
    for (name, s) in stats.iter() {
        w.write_record([name, &format_number(s.mean), &format_number(s.stddev)])
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

pub fn load_normalization(path: &Path) -> Result<NormalizationStats> {
    let t = RawTable::read(path)?;
    if t.header != ["attribute", "mean", "stddev"] {
        return Err(DmtError::SchemaMismatch {
            path: path.to_path_buf(),
            attribute: t.header.join(","),
            detail: "expected header `attribute,mean,stddev`".into(),
        });
    }
    let mut stats = NormalizationStats::new();
    for (i, r) in t.rows.iter().enumerate() {
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| DmtError::SchemaMismatch {
                path: path.to_path_buf(),
                attribute: r[0].clone(),
                detail: format!("row {}: `{s}` is not a number", i + 1),
            })
        };
        let AttributeStats { mean, stddev } = AttributeStats {
            mean: parse(&r[1])?,
            stddev: parse(&r[2])?,
        };
        stats.insert(r[0].clone(), mean, stddev);
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dmt_core::synth;

    fn table(text: &str) -> Result<RawTable> {
        RawTable::from_reader(Path::new("t.csv"), text.as_bytes())
    }

    #[test]
    fn infers_kinds_and_missing() {
        let t = table("a,b,class\n1.5,x,p\n?,y,n\n2,?,p\n").unwrap();
        let d = table_to_dataset(&t, "class").unwrap();
        assert_eq!(d.schema().attribute(0).kind, AttributeKind::Continuous);
        assert_eq!(d.schema().attribute(1).categories, vec!["x", "y"]);
        assert_eq!(d.value(1, 0), Value::Missing);
        assert_eq!(d.value(2, 1), Value::Missing);
        assert_eq!(d.schema().classes(), ["n", "p"]);
    }

    #[test]
    fn malformed_row_reports_line() {
        let e = table("a,b,class\n1,2,p\n1,2\n").unwrap_err();
        match e {
            DmtError::MalformedRow { line, expected, found, .. } => assert_eq!((line, expected, found), (3, 3, 2)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn class_column_and_row_count_checked() {
        let t = table("a,b\n1,2\n3,4\n").unwrap();
        assert!(matches!(table_to_dataset(&t, "class"), Err(DmtError::MissingClassColumn { .. })));
        let t = table("a,class\n1,p\n").unwrap();
        assert!(matches!(table_to_dataset(&t, "class"), Err(DmtError::TooFewRows { found: 1, .. })));
    }

    #[test]
    fn csv_round_trip() {
        for d in [synth::weather(), synth::random_mixed(30, 7, 4), synth::separable(10, 2, 3, 1)] {
            let bytes = dataset_to_csv(&d, "class").unwrap();
            let t = RawTable::from_reader(Path::new("m.csv"), bytes.as_slice()).unwrap();
            assert_eq!(table_to_dataset(&t, "class").unwrap(), d);
        }
    }

    #[test]
    fn rows_for_schema_by_name() {
        let d = synth::weather();
        let t = table("humidity,windy,temperature,outlook\n70,TRUE,70,fog\n").unwrap();
        let SchemaRows { rows, labels } = table_rows_for_schema(&t, d.schema(), "play").unwrap();
        assert!(labels.is_none());
        let outlook = d.schema().index_of("outlook").unwrap();
        assert_eq!(rows[0][outlook], Value::Missing);
        let t = table("humidity,windy,temperature\n70,TRUE,70\n").unwrap();
        match table_rows_for_schema(&t, d.schema(), "play").unwrap_err() {
            DmtError::SchemaMismatch { attribute, .. } => assert_eq!(attribute, "outlook"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn normalization_sidecar_round_trip() {
        let (_, stats) = dmt_core::dataset::znormalize(&synth::separable(12, 2, 2, 3)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("n.csv");
        write_atomic(&p, &normalization_to_csv(&stats)).unwrap();
        assert_eq!(load_normalization(&p).unwrap(), stats);
    }
}
