//! Plain-text model files.
//!
//! ```text
//! dmt-model 1
//! kind dmt
//! method "dmt(k=3,scheme=simple,min_leaf=2,confidence=0.25)"
//! scheme simple
//! training_size 14
//! class "no" 0.35714285714285715
//! class "yes" 0.6428571428571429
//! attribute categorical "outlook" "overcast" "rainy" "sunny"
//! attribute continuous "humidity"
//! tree 0 weight 1
//!   split 0 multiway majority 2 counts 5 9
//!     leaf 1 counts 0 4
//!     ...
//! end
//! ```
//!
//! Names are JSON string literals; numbers use the shortest form that reads
//! back to the same `f64`, so saving a loaded model reproduces the file.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use dmt_core::dmt::DmtModel;
use dmt_core::ensemble::{EnsembleKind, EnsembleModel};
use dmt_core::tree::SplitForm;
use dmt_core::{AttributeKind, AttributeSchema, DecisionTree, Model, Node, Schema, SplitTest, VotingScheme};

use crate::error::{DmtError, Result};
use crate::io::{format_number, write_atomic};

const MAGIC: &str = "dmt-model 1";

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn join_numbers(xs: &[f64]) -> String {
    xs.iter().map(|&x| format_number(x)).collect::<Vec<_>>().join(" ")
}

/// Render a model. `method` is a free-form descriptor kept for reference.
pub fn model_to_string(model: &Model, method: &str) -> String {
    let mut out = String::new();
    let schema = model.schema();
    writeln!(out, "{MAGIC}").unwrap();
    let kind = match model {
        Model::Tree { .. } => "c45",
        Model::Dmt(_) => "dmt",
        Model::Ensemble(e) => e.kind.as_str(),
    };
    writeln!(out, "kind {kind}").unwrap();
    writeln!(out, "method {}", quote(method)).unwrap();
    match model {
        Model::Tree { .. } => {}
        Model::Dmt(m) => {
            writeln!(out, "scheme {}", m.scheme.as_str()).unwrap();
            writeln!(out, "training_size {}", m.training_size).unwrap();
        }
        Model::Ensemble(e) => writeln!(out, "seed {}", e.rng_seed).unwrap(),
    }
    for (c, p) in schema.classes().iter().zip(model.class_priors()) {
        writeln!(out, "class {} {}", quote(c), format_number(*p)).unwrap();
    }
    for a in schema.attributes() {
        write!(out, "attribute {} {}", a.kind.as_str(), quote(&a.name)).unwrap();
        for c in &a.categories {
            write!(out, " {}", quote(c)).unwrap();
        }
        out.push('\n');
    }
    let weights: Vec<f64> = match model {
        Model::Ensemble(e) => e.member_weights.clone(),
        _ => vec![1.0; model.trees().len()],
    };
    for (i, (tree, w)) in model.trees().into_iter().zip(weights).enumerate() {
        writeln!(out, "tree {i} weight {}", format_number(w)).unwrap();
        write_node(&mut out, tree.root(), 1);
    }
    out.push_str("end\n");
    out
}

fn write_node(out: &mut String, node: &Node, depth: usize) {
    let pad = "  ".repeat(depth);
    match node {
        Node::Leaf { class, counts } => {
            writeln!(out, "{pad}leaf {class} counts {}", join_numbers(counts)).unwrap();
        }
        Node::Split {
            test,
            counts,
            children,
            majority_branch,
        } => {
            let form = match test.form {
                SplitForm::Threshold(t) => format!("le {}", format_number(t)),
                SplitForm::Multiway => "multiway".to_string(),
            };
            writeln!(
                out,
                "{pad}split {} {form} majority {majority_branch} counts {}",
                test.attribute,
                join_numbers(counts)
            )
            .unwrap();
            for c in children {
                write_node(out, c, depth + 1);
            }
        }
    }
}

pub fn save_model(path: &Path, model: &Model, method: &str) -> Result<()> {
    write_atomic(path, model_to_string(model, method).as_bytes())
}

pub fn load_model(path: &Path) -> Result<(Model, String)> {
    let text = std::fs::read_to_string(path).map_err(|e| DmtError::io(path, e))?;
    parse_model(&text)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Word(String),
    Text(String),
}

fn tokenize(line: &str, no: usize) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut rest = line.trim_start();
    while !rest.is_empty() {
        if rest.starts_with('"') {
            let mut stream = serde_json::Deserializer::from_str(rest).into_iter::<String>();
            let s = match stream.next() {
                Some(Ok(s)) => s,
                _ => return Err(bad(no, "unterminated or invalid string")),
            };
            let used = stream.byte_offset();
            tokens.push(Token::Text(s));
            rest = rest[used..].trim_start();
        } else {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            tokens.push(Token::Word(rest[..end].to_string()));
            rest = rest[end..].trim_start();
        }
    }
    Ok(tokens)
}

fn bad(line: usize, message: impl Into<String>) -> DmtError {
    DmtError::ModelFormat {
        line,
        message: message.into(),
    }
}

struct Cursor<'a> {
    lines: Vec<(usize, &'a str)>,
    at: usize,
}

impl<'a> Cursor<'a> {
    fn next(&mut self) -> Result<(usize, Vec<Token>)> {
        let last = self.lines.last().map_or(0, |l| l.0);
        let (no, line) = *self.lines.get(self.at).ok_or_else(|| bad(last, "unexpected end of file"))?;
        self.at += 1;
        Ok((no, tokenize(line, no)?))
    }

    fn peek_keyword(&self) -> Option<&'a str> {
        self.lines
            .get(self.at)
            .and_then(|(_, l)| l.split_whitespace().next())
    }
}

fn word(tokens: &[Token], i: usize, no: usize) -> Result<&str> {
    match tokens.get(i) {
        Some(Token::Word(w)) => Ok(w),
        _ => Err(bad(no, format!("expected a word at position {}", i + 1))),
    }
}

fn text(tokens: &[Token], i: usize, no: usize) -> Result<&str> {
    match tokens.get(i) {
        Some(Token::Text(s)) => Ok(s),
        _ => Err(bad(no, format!("expected a quoted string at position {}", i + 1))),
    }
}

fn number<T: std::str::FromStr>(tokens: &[Token], i: usize, no: usize) -> Result<T> {
    word(tokens, i, no)?
        .parse()
        .map_err(|_| bad(no, format!("expected a number at position {}", i + 1)))
}

fn expect_key<'t>(tokens: &'t [Token], key: &str, no: usize) -> Result<&'t [Token]> {
    if word(tokens, 0, no)? != key {
        return Err(bad(no, format!("expected `{key}`")));
    }
    Ok(tokens)
}

fn numbers_after(tokens: &[Token], from: usize, no: usize) -> Result<Vec<f64>> {
    (from..tokens.len()).map(|i| number(tokens, i, no)).collect()
}

/// Parse a model file; also returns its method descriptor.
pub fn parse_model(text_in: &str) -> Result<(Model, String)> {
    let lines: Vec<(usize, &str)> = text_in
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let mut cur = Cursor { lines, at: 0 };
    let (no, first) = cur.next()?;
    if first != [Token::Word("dmt-model".into()), Token::Word("1".into())] {
        return Err(bad(no, format!("expected `{MAGIC}` header")));
    }
    let (no, t) = cur.next()?;
    let kind = word(expect_key(&t, "kind", no)?, 1, no)?.to_string();
    let mut method = String::new();
    let mut scheme = None;
    let mut training_size = None;
    let mut seed = None;
    let mut classes = Vec::new();
    let mut priors = Vec::new();
    let mut attributes = Vec::new();
    while let Some(key) = cur.peek_keyword() {
        if key == "tree" || key == "end" {
            break;
        }
        let (no, t) = cur.next()?;
        match key {
            "method" => method = text(&t, 1, no)?.to_string(),
            "scheme" => {
                let s = word(&t, 1, no)?;
                scheme = Some(VotingScheme::parse(s).ok_or_else(|| bad(no, format!("unknown scheme `{s}`")))?);
            }
            "training_size" => training_size = Some(number::<usize>(&t, 1, no)?),
            "seed" => seed = Some(number::<u64>(&t, 1, no)?),
            "class" => {
                classes.push(text(&t, 1, no)?.to_string());
                priors.push(number::<f64>(&t, 2, no)?);
            }
            "attribute" => {
                let name = text(&t, 2, no)?.to_string();
                attributes.push(match word(&t, 1, no)? {
                    "continuous" if t.len() == 3 => AttributeSchema::continuous(name),
                    "categorical" => {
                        let cats = (3..t.len()).map(|i| text(&t, i, no).map(str::to_string)).collect::<Result<_>>()?;
                        AttributeSchema::categorical(name, cats)
                    }
                    _ => return Err(bad(no, "malformed attribute line")),
                });
            }
            other => return Err(bad(no, format!("unknown header key `{other}`"))),
        }
    }
    let schema = Arc::new(Schema::new(attributes, classes).map_err(|e| bad(no, e.to_string()))?);
    let mut trees = Vec::new();
    let mut weights = Vec::new();
    loop {
        let (no, t) = cur.next()?;
        match word(&t, 0, no)? {
            "end" => break,
            "tree" => {
                if number::<usize>(&t, 1, no)? != trees.len() || word(&t, 2, no)? != "weight" {
                    return Err(bad(no, "malformed tree line"));
                }
                weights.push(number::<f64>(&t, 3, no)?);
                let root = parse_node(&mut cur, &schema)?;
                trees.push(DecisionTree::from_parts(schema.clone(), root));
            }
            other => return Err(bad(no, format!("expected `tree` or `end`, found `{other}`"))),
        }
    }
    if trees.is_empty() {
        return Err(bad(no, "model has no trees"));
    }
    let missing = |what: &str| bad(no, format!("{kind} model lacks `{what}`"));
    let model = match kind.as_str() {
        "c45" => {
            if trees.len() != 1 {
                return Err(bad(no, "a c45 model holds exactly one tree"));
            }
            Model::Tree {
                tree: trees.pop().unwrap(),
                class_priors: priors,
            }
        }
        "dmt" => Model::Dmt(DmtModel {
            trees,
            scheme: scheme.ok_or_else(|| missing("scheme"))?,
            class_priors: priors,
            training_size: training_size.ok_or_else(|| missing("training_size"))?,
        }),
        other => {
            let kind = EnsembleKind::parse(other).ok_or_else(|| bad(no, format!("unknown model kind `{other}`")))?;
            Model::Ensemble(EnsembleModel::from_members(
                kind,
                trees,
                weights,
                seed.ok_or_else(|| missing("seed"))?,
                priors,
            )?)
        }
    };
    Ok((model, method))
}

fn parse_node(cur: &mut Cursor<'_>, schema: &Schema) -> Result<Node> {
    let (no, t) = cur.next()?;
    let n_classes = schema.n_classes();
    let check_counts = |counts: &[f64]| {
        if counts.len() == n_classes {
            Ok(())
        } else {
            Err(bad(no, format!("expected {n_classes} class counts, found {}", counts.len())))
        }
    };
    match word(&t, 0, no)? {
        "leaf" => {
            let class = number::<u32>(&t, 1, no)?;
            if word(&t, 2, no)? != "counts" || class as usize >= n_classes {
                return Err(bad(no, "malformed leaf"));
            }
            let counts = numbers_after(&t, 3, no)?;
            check_counts(&counts)?;
            Ok(Node::Leaf { class, counts })
        }
        "split" => {
            let attribute = number::<usize>(&t, 1, no)?;
            if attribute >= schema.len() {
                return Err(bad(no, format!("attribute index {attribute} out of range")));
            }
            let (test, branches, next) = match word(&t, 2, no)? {
                "le" if schema.attribute(attribute).kind == AttributeKind::Continuous => {
                    (SplitTest::threshold(attribute, number(&t, 3, no)?), 2, 4)
                }
                "multiway" if schema.attribute(attribute).kind == AttributeKind::Categorical => (
                    SplitTest::multiway(attribute),
                    schema.attribute(attribute).categories.len(),
                    3,
                ),
                _ => return Err(bad(no, "split form does not match attribute kind")),
            };
            if word(&t, next, no)? != "majority" || word(&t, next + 2, no)? != "counts" {
                return Err(bad(no, "malformed split"));
            }
            let majority_branch = number::<usize>(&t, next + 1, no)?;
            if majority_branch >= branches {
                return Err(bad(no, "majority branch out of range"));
            }
            let counts = numbers_after(&t, next + 3, no)?;
            check_counts(&counts)?;
            let children = (0..branches).map(|_| parse_node(cur, schema)).collect::<Result<_>>()?;
            Ok(Node::Split {
                test,
                counts,
                children,
                majority_branch,
            })
        }
        other => Err(bad(no, format!("expected `leaf` or `split`, found `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dmt_core::{synth, Method};

    fn round_trip(model: &Model) {
        let text = model_to_string(model, "m(x=1)");
        let (back, method) = parse_model(&text).unwrap();
        assert_eq!(&back, model);
        assert_eq!(method, "m(x=1)");
        assert_eq!(model_to_string(&back, &method), text);
    }

    #[test]
    fn every_model_kind_round_trips() {
        let d = synth::random_mixed(60, 6, 2);
        for m in [
            Method::c45(),
            Method::Majority,
            Method::dmt(3, VotingScheme::Laplace),
            Method::bagging(3),
            Method::adaboost(3),
            Method::random_forest(3),
            Method::random_tree(3),
        ] {
            if let Ok(model) = m.fit(&d, 9) {
                round_trip(&model);
            }
        }
        round_trip(&Method::c45().fit(&synth::weather(), 0).unwrap());
    }

    #[test]
    fn odd_names_survive() {
        use dmt_core::{Dataset, Value};
        let attrs = vec![
            AttributeSchema::continuous("gene \"7\" a b"),
            AttributeSchema::categorical("c", vec!["x y".into(), "\u{e9}".into()]),
        ];
        let rows: Vec<Vec<Value>> = (0..8)
            .map(|i| vec![Value::Num(i as f64 / 3.0), Value::Cat((i % 2) as u32)])
            .collect();
        let labels: Vec<&str> = (0..8).map(|i| if i < 4 { "neg class" } else { "pos" }).collect();
        let d = Dataset::from_rows(attrs, &rows, &labels).unwrap();
        round_trip(&Method::c45().fit(&d, 0).unwrap());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let d = synth::weather();
        let text = model_to_string(&Method::c45().fit(&d, 0).unwrap(), "c45");
        let broken = text.replacen("leaf 1 counts", "leaf 7 counts", 1);
        match parse_model(&broken).unwrap_err() {
            DmtError::ModelFormat { line, .. } => assert!(line > 5),
            other => panic!("{other}"),
        }
        assert!(parse_model("hello\n").is_err());
        assert!(parse_model(&text.replace("end\n", "")).is_err());
    }
}
