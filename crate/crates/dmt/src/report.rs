//! Rendering of experiment reports and Wilcoxon tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use dmt_core::stats::{wilcoxon_signed_rank, PairedAccuracies, WilcoxonResult};

use crate::error::{DmtError, Result};
use crate::harness::{ExperimentReport, Protocol};
use crate::io::{format_number, RawTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    /// Human-readable table.
    #[default]
    Table,
    /// Comma-separated rows for plotting and further analysis.
    Delimited,
    Json,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Table => "table",
            OutputFormat::Delimited => "delimited",
            OutputFormat::Json => "json",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "table" => Some(OutputFormat::Table),
            "delimited" | "csv" => Some(OutputFormat::Delimited),
            "json" => Some(OutputFormat::Json),
            _ => None,
        }
    }
}

/// Key/value lines describing how a result was produced.
pub type Provenance = Vec<(String, String)>;

fn provenance_lines(reports: &[ExperimentReport], extra: &Provenance) -> Provenance {
    let mut lines: Provenance = vec![("tool".into(), format!("dmt {}", env!("CARGO_PKG_VERSION")))];
    lines.extend(extra.iter().cloned());
    if let Some(r) = reports.first() {
        lines.push(("protocol".into(), r.protocol.as_str().into()));
        lines.push(("seed".into(), r.seed.to_string()));
    }
    let mut seen = Vec::new();
    for r in reports {
        let norm = format!("{} -> {}: {}", r.train, r.test, r.normalization);
        if !seen.contains(&norm) {
            lines.push(("normalization".into(), norm.clone()));
            seen.push(norm);
        }
    }
    for (label, descriptor) in method_columns(reports) {
        lines.push(("method".into(), format!("{label} = {descriptor}")));
    }
    lines
}

fn method_columns(reports: &[ExperimentReport]) -> Vec<(String, String)> {
    let mut cols: Vec<(String, String)> = Vec::new();
    for r in reports {
        if !cols.iter().any(|(l, _)| *l == r.method) {
            cols.push((r.method.clone(), r.descriptor.clone()));
        }
    }
    cols
}

fn percent(fraction: f64) -> String {
    format!("{}%", format_number((fraction * 1000.0).round() / 10.0))
}

fn row_key(r: &ExperimentReport) -> String {
    match r.protocol {
        Protocol::Cv => format!("{} ({} folds)", r.train, r.folds.unwrap_or(0)),
        _ => match &r.noise {
            Some(n) => format!("{} -> {}  noise {}", r.train, r.test, percent(n.fraction)),
            None => format!("{} -> {}", r.train, r.test),
        },
    }
}

fn check_reports(reports: &[ExperimentReport]) -> Result<()> {
    let first = reports
        .first()
        .ok_or_else(|| DmtError::Render("no results to report".into()))?;
    if reports.iter().any(|r| r.protocol != first.protocol) {
        return Err(DmtError::Render("reports mix different protocols".into()));
    }
    Ok(())
}

pub fn render_report(reports: &[ExperimentReport], format: OutputFormat, extra: &Provenance) -> Result<String> {
    check_reports(reports)?;
    let provenance = provenance_lines(reports, extra);
    match format {
        OutputFormat::Table => Ok(render_table(reports, &provenance)),
        OutputFormat::Delimited => render_delimited(reports, &provenance),
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                provenance: BTreeMap<String, Vec<&'a str>>,
                reports: &'a [ExperimentReport],
            }
            let mut map: BTreeMap<String, Vec<&str>> = BTreeMap::new();
            for (k, v) in &provenance {
                map.entry(k.clone()).or_default().push(v);
            }
            let mut s = serde_json::to_string_pretty(&Doc {
                provenance: map,
                reports,
            })
            .map_err(|e| DmtError::Render(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}

fn write_provenance(out: &mut String, provenance: &Provenance) {
    for (k, v) in provenance {
        writeln!(out, "# {k}: {v}").unwrap();
    }
}

fn render_table(reports: &[ExperimentReport], provenance: &Provenance) -> String {
    let mut out = String::new();
    write_provenance(&mut out, provenance);
    let methods: Vec<String> = method_columns(reports).into_iter().map(|(l, _)| l).collect();
    let mut rows: Vec<(String, Vec<Option<f64>>)> = Vec::new();
    for r in reports {
        let key = row_key(r);
        let at = match rows.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                rows.push((key, vec![None; methods.len()]));
                rows.len() - 1
            }
        };
        let col = methods.iter().position(|m| *m == r.method).unwrap();
        rows[at].1[col] = Some(r.mean_accuracy);
    }
    let mut cells: Vec<Vec<String>> = vec![std::iter::once("condition".to_string()).chain(methods.iter().cloned()).collect()];
    for (key, values) in &rows {
        let best = values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut line = vec![key.clone()];
        for v in values {
            line.push(match v {
                Some(x) => {
                    let mark = if (best - x).abs() <= 1e-12 { "*" } else { " " };
                    format!("{:.1}{mark}", x * 100.0)
                }
                None => "- ".into(),
            });
        }
        cells.push(line);
    }
    out.push_str("\nmean accuracy (%), * marks the best in each row\n\n");
    let widths: Vec<usize> = (0..cells[0].len())
        .map(|c| cells.iter().map(|l| l[c].chars().count()).max().unwrap_or(0))
        .collect();
    for line in &cells {
        let mut text = String::new();
        for (c, cell) in line.iter().enumerate() {
            if c == 0 {
                write!(text, "{cell:<w$}", w = widths[0]).unwrap();
            } else {
                write!(text, "  {cell:>w$}", w = widths[c]).unwrap();
            }
        }
        out.push_str(text.trim_end());
        out.push('\n');
    }
    let small: Vec<&ExperimentReport> = reports
        .iter()
        .filter(|r| r.tree_sizes.iter().all(|s| s.len() <= 25))
        .collect();
    let mut listed = Vec::new();
    for r in small {
        let line = format!("{} -> {} {}: {:?}", r.train, r.test, r.method, r.tree_sizes[0]);
        if r.protocol != Protocol::Cv && !listed.contains(&line) {
            listed.push(line);
        }
    }
    if !listed.is_empty() {
        out.push_str("\ntree sizes (nodes)\n");
        for l in listed {
            writeln!(out, "  {l}").unwrap();
        }
    }
    let mut warnings: Vec<&String> = reports.iter().flat_map(|r| &r.warnings).collect();
    warnings.dedup();
    for w in warnings {
        writeln!(out, "\nwarning: {w}").unwrap();
    }
    out
}

fn render_delimited(reports: &[ExperimentReport], provenance: &Provenance) -> Result<String> {
    let mut out = String::new();
    write_provenance(&mut out, provenance);
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "protocol", "train", "test", "method", "fraction", "trials", "folds", "mean", "stderr", "clean",
    ];
    let err = |e: csv::Error| DmtError::Render(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in reports {
        w.write_record([
            r.protocol.as_str().to_string(),
            r.train.clone(),
            r.test.clone(),
            r.method.clone(),
            r.noise.as_ref().map_or(String::new(), |n| format_number(n.fraction)),
            r.trials.len().to_string(),
            r.folds.map_or(String::new(), |f| f.to_string()),
            format_number(r.mean_accuracy),
            format_number(r.stderr),
            format_number(r.clean_accuracy),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| DmtError::Render(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}

/// One accuracy column per method, aligned on shared conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyColumns {
    pub conditions: Vec<String>,
    pub methods: Vec<(String, Vec<Option<f64>>)>,
}

impl AccuracyColumns {
    /// Paired values on the conditions where both methods have a result.
    pub fn pair(&self, a: usize, b: usize) -> PairedAccuracies {
        let (la, va) = &self.methods[a];
        let (lb, vb) = &self.methods[b];
        let pairs = va
            .iter()
            .zip(vb)
            .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
            .collect();
        PairedAccuracies::new(la.clone(), lb.clone(), pairs)
    }
}

/// Read accuracies for significance testing. A delimited report (with
/// `method` and `mean` columns) is pivoted so each condition is one row;
/// otherwise every column whose cells are all numbers is a method.
pub fn load_accuracy_columns(path: &Path) -> Result<AccuracyColumns> {
    let t = RawTable::read(path)?;
    accuracy_columns(&t)
}

pub fn accuracy_columns(t: &RawTable) -> Result<AccuracyColumns> {
    let bad = |detail: String| DmtError::SchemaMismatch {
        path: t.path.clone(),
        attribute: String::new(),
        detail,
    };
    if let (Some(mc), Some(vc)) = (t.column_index("method"), t.column_index("mean")) {
        let keys: Vec<usize> = ["protocol", "train", "test", "fraction", "folds"]
            .iter()
            .filter_map(|k| t.column_index(k))
            .collect();
        let mut conditions: Vec<String> = Vec::new();
        let mut methods: Vec<(String, Vec<Option<f64>>)> = Vec::new();
        for (i, r) in t.rows.iter().enumerate() {
            let cond = keys.iter().map(|&k| r[k].as_str()).collect::<Vec<_>>().join("|");
            let ci = conditions.iter().position(|c| *c == cond).unwrap_or_else(|| {
                conditions.push(cond);
                conditions.len() - 1
            });
            let mi = methods.iter().position(|(m, _)| *m == r[mc]).unwrap_or_else(|| {
                methods.push((r[mc].clone(), Vec::new()));
                methods.len() - 1
            });
            let v: f64 = r[vc]
                .parse()
                .map_err(|_| bad(format!("row {}: mean `{}` is not a number", i + 1, r[vc])))?;
            let col = &mut methods[mi].1;
            col.resize(conditions.len().max(col.len()), None);
            col[ci] = Some(v);
        }
        for (_, col) in &mut methods {
            col.resize(conditions.len(), None);
        }
        return Ok(AccuracyColumns { conditions, methods });
    }
    let mut methods = Vec::new();
    for (c, name) in t.header.iter().enumerate() {
        let parsed: Option<Vec<f64>> = t.rows.iter().map(|r| r[c].parse().ok()).collect();
        if let Some(values) = parsed {
            methods.push((name.clone(), values.into_iter().map(Some).collect()));
        }
    }
    let label = t.header.iter().position(|h| !methods.iter().any(|(m, _)| m == h));
    let conditions = (0..t.rows.len())
        .map(|i| label.map_or_else(|| (i + 1).to_string(), |c| t.rows[i][c].clone()))
        .collect();
    Ok(AccuracyColumns { conditions, methods })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilcoxonCell {
    /// Method claimed to be more accurate.
    pub a: String,
    pub b: String,
    pub pairs: usize,
    pub n_effective: Option<usize>,
    pub w_plus: Option<f64>,
    pub w_minus: Option<f64>,
    pub p_one_sided: Option<f64>,
    pub method: Option<String>,
    pub note: Option<String>,
}

/// Test every ordered pair of methods (`a` more accurate than `b`).
pub fn wilcoxon_matrix(cols: &AccuracyColumns) -> Vec<WilcoxonCell> {
    let n = cols.methods.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let paired = cols.pair(a, b);
            let base = WilcoxonCell {
                a: paired.labels[0].clone(),
                b: paired.labels[1].clone(),
                pairs: paired.pairs.len(),
                n_effective: None,
                w_plus: None,
                w_minus: None,
                p_one_sided: None,
                method: None,
                note: None,
            };
            out.push(match wilcoxon_signed_rank(&paired) {
                Ok(WilcoxonResult {
                    n_effective,
                    w_plus,
                    w_minus,
                    p_one_sided,
                    method,
                }) => WilcoxonCell {
                    n_effective: Some(n_effective),
                    w_plus: Some(w_plus),
                    w_minus: Some(w_minus),
                    p_one_sided: Some(p_one_sided),
                    method: Some(method.as_str().into()),
                    ..base
                },
                Err(e) => WilcoxonCell {
                    note: Some(e.to_string()),
                    ..base
                },
            });
        }
    }
    out
}

/// p-values of "row method is more accurate than column method".
pub fn render_wilcoxon(cols: &AccuracyColumns, format: OutputFormat, extra: &Provenance) -> Result<String> {
    if cols.methods.len() < 2 {
        return Err(DmtError::Render("need at least two accuracy columns".into()));
    }
    let cells = wilcoxon_matrix(cols);
    let mut provenance: Provenance = vec![("tool".into(), format!("dmt {}", env!("CARGO_PKG_VERSION")))];
    provenance.extend(extra.iter().cloned());
    provenance.push(("test".into(), "one-sided Wilcoxon signed-rank, row more accurate than column".into()));
    provenance.push(("conditions".into(), cols.conditions.len().to_string()));
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&serde_json::json!({
                "provenance": provenance.iter().map(|(k, v)| format!("{k}: {v}")).collect::<Vec<_>>(),
                "pairs": cells,
            }))
            .map_err(|e| DmtError::Render(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        OutputFormat::Delimited => {
            let mut out = String::new();
            write_provenance(&mut out, &provenance);
            out.push_str("a,b,pairs,n_effective,w_plus,w_minus,p_one_sided,method\n");
            let opt = |x: Option<f64>| x.map_or(String::new(), format_number);
            for c in &cells {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record([
                    c.a.clone(),
                    c.b.clone(),
                    c.pairs.to_string(),
                    c.n_effective.map_or(String::new(), |n| n.to_string()),
                    opt(c.w_plus),
                    opt(c.w_minus),
                    opt(c.p_one_sided),
                    c.method.clone().unwrap_or_default(),
                ])
                .map_err(|e| DmtError::Render(e.to_string()))?;
                out.push_str(std::str::from_utf8(&w.into_inner().expect("in-memory write")).expect("utf-8"));
            }
            Ok(out)
        }
        OutputFormat::Table => {
            let mut out = String::new();
            write_provenance(&mut out, &provenance);
            let names: Vec<&str> = cols.methods.iter().map(|(m, _)| m.as_str()).collect();
            let width = names.iter().map(|n| n.len()).max().unwrap_or(0).max(5);
            write!(out, "\n{:<width$}", "").unwrap();
            for n in &names {
                write!(out, "  {n:>width$}").unwrap();
            }
            out.push('\n');
            for a in &names {
                write!(out, "{a:<width$}").unwrap();
                for b in &names {
                    let cell = if a == b {
                        "-".to_string()
                    } else {
                        let c = cells.iter().find(|c| c.a == *a && c.b == *b).unwrap();
                        c.p_one_sided.map_or("n/a".into(), |p| format!("{p:.3}"))
                    };
                    write!(out, "  {cell:>width$}").unwrap();
                }
                out.push('\n');
            }
            Ok(out)
        }
    }
}
