//! Boolean row filters.
//!
//! ```text
//! expr   := term ("or" term)*
//! term   := factor ("and" factor)*
//! factor := "(" expr ")" | ident op literal
//! op     := "==" | "!=" | "<" | "<=" | ">" | ">="
//! ```
//!
//! Keywords are case-insensitive. Identifiers that are not plain
//! `[A-Za-z_][A-Za-z0-9_]*` words (or collide with a keyword) are written in
//! backticks. String literals use double quotes and only support `==`/`!=`.
//!
//! A predicate over a missing cell is false, so `Or` is a union and `And`
//! an intersection of the row sets of its children.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::dataset::{Cell, ColumnKind, Dataset, RowId};
use super::lexer::{is_bare_ident, quote_ident, tokenize, Tok, Token};
use crate::error::{Error, Result, SyntaxError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [
        CmpOp::Eq,
        CmpOp::Ne,
        CmpOp::Lt,
        CmpOp::Le,
        CmpOp::Gt,
        CmpOp::Ge,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    fn from_symbol(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|op| op.symbol() == s)
    }

    pub fn is_ordering(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }

    pub fn eval_number(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub column: String,
    pub op: CmpOp,
    pub value: Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterExpr {
    And(Vec<FilterExpr>),
    Or(Vec<FilterExpr>),
    Pred(Predicate),
}

impl FilterExpr {
    pub fn pred(column: &str, op: CmpOp, value: Literal) -> Self {
        FilterExpr::Pred(Predicate {
            column: column.to_string(),
            op,
            value,
        })
    }

    /// Checks structural and schema invariants of a hand-built tree.
    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        match self {
            FilterExpr::And(children) | FilterExpr::Or(children) => {
                if children.len() < 2 {
                    return Err(Error::invalid("and/or nodes need at least two children"));
                }
                children.iter().try_for_each(|c| c.validate(dataset))
            }
            FilterExpr::Pred(p) => check_predicate(p, dataset).map(|_| ()),
        }
    }
}

fn check_predicate(p: &Predicate, dataset: &Dataset) -> Result<usize> {
    let col = dataset
        .column_index(&p.column)
        .ok_or_else(|| Error::UnknownColumn(p.column.clone()))?;
    match (dataset.column(col).kind(), &p.value) {
        (ColumnKind::Numeric, Literal::Number(v)) if v.is_finite() => Ok(col),
        (ColumnKind::Numeric, Literal::Number(_)) => Err(Error::invalid(format!(
            "non-finite literal for column '{}'",
            p.column
        ))),
        (ColumnKind::Numeric, Literal::Text(_)) => Err(Error::invalid(format!(
            "column '{}' is numeric but compared with a string",
            p.column
        ))),
        (ColumnKind::Categorical, _) if p.op.is_ordering() => Err(Error::invalid(format!(
            "ordering operator '{}' on categorical column '{}'",
            p.op.symbol(),
            p.column
        ))),
        (ColumnKind::Categorical, Literal::Text(_)) => Ok(col),
        (ColumnKind::Categorical, Literal::Number(_)) => Err(Error::invalid(format!(
            "column '{}' is categorical; quote the literal",
            p.column
        ))),
    }
}

pub fn parse_filter(text: &str, dataset: &Dataset) -> Result<FilterExpr> {
    parse_with(text, Some(dataset))
}

/// Parses without checking columns against a schema.
pub fn parse_filter_syntax(text: &str) -> Result<FilterExpr> {
    parse_with(text, None)
}

fn parse_with(text: &str, dataset: Option<&Dataset>) -> Result<FilterExpr> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        dataset,
    };
    let expr = p.expr()?;
    let t = p.peek();
    if t.tok != Tok::End {
        return Err(SyntaxError::new(t.offset, "unexpected trailing input").into());
    }
    Ok(expr)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    dataset: Option<&'a Dataset>,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident { name, quoted: false } if name.eq_ignore_ascii_case(kw))
    }

    fn expr(&mut self) -> Result<FilterExpr> {
        let mut terms = vec![self.term()?];
        while self.at_keyword("or") {
            self.next();
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            FilterExpr::Or(terms)
        })
    }

    fn term(&mut self) -> Result<FilterExpr> {
        let mut factors = vec![self.factor()?];
        while self.at_keyword("and") {
            self.next();
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            FilterExpr::And(factors)
        })
    }

    fn factor(&mut self) -> Result<FilterExpr> {
        let t = self.next();
        match t.tok {
            Tok::LParen => {
                let e = self.expr()?;
                let close = self.next();
                if close.tok != Tok::RParen {
                    return Err(SyntaxError::new(close.offset, "expected ')'").into());
                }
                Ok(e)
            }
            Tok::Ident { name, quoted } => {
                if !quoted && (name.eq_ignore_ascii_case("and") || name.eq_ignore_ascii_case("or"))
                {
                    return Err(
                        SyntaxError::new(t.offset, format!("unexpected keyword '{name}'")).into(),
                    );
                }
                let op_tok = self.next();
                let op = match op_tok.tok {
                    Tok::Op(s) => CmpOp::from_symbol(s).expect("lexer emits known operators"),
                    _ => {
                        return Err(
                            SyntaxError::new(op_tok.offset, "expected comparison operator").into(),
                        )
                    }
                };
                let value = self.literal()?;
                let pred = Predicate {
                    column: name,
                    op,
                    value,
                };
                if let Some(ds) = self.dataset {
                    check_predicate(&pred, ds)?;
                }
                Ok(FilterExpr::Pred(pred))
            }
            _ => Err(SyntaxError::new(t.offset, "expected column name or '('").into()),
        }
    }

    fn literal(&mut self) -> Result<Literal> {
        let t = self.next();
        match t.tok {
            Tok::Number(v) => Ok(Literal::Number(v)),
            Tok::Minus => match self.next() {
                Token {
                    tok: Tok::Number(v),
                    ..
                } => Ok(Literal::Number(-v)),
                other => Err(SyntaxError::new(other.offset, "expected number after '-'").into()),
            },
            Tok::Str(s) => Ok(Literal::Text(s)),
            _ => Err(SyntaxError::new(t.offset, "expected literal").into()),
        }
    }
}

fn write_ident(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    let keyword = name.eq_ignore_ascii_case("and") || name.eq_ignore_ascii_case("or");
    if is_bare_ident(name) && !keyword {
        f.write_str(name)
    } else {
        f.write_str(&quote_ident(name))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Number(v) => write!(f, "{v}"),
            Literal::Text(s) => {
                f.write_str("\"")?;
                for ch in s.chars() {
                    match ch {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

/// Canonical printing: compound children are always parenthesized.
impl fmt::Display for FilterExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterExpr::Pred(p) => {
                write_ident(f, &p.column)?;
                write!(f, " {} {}", p.op.symbol(), p.value)
            }
            FilterExpr::And(children) | FilterExpr::Or(children) => {
                let sep = if matches!(self, FilterExpr::And(_)) {
                    " and "
                } else {
                    " or "
                };
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    match c {
                        FilterExpr::Pred(_) => write!(f, "{c}")?,
                        _ => write!(f, "({c})")?,
                    }
                }
                Ok(())
            }
        }
    }
}

pub fn print_filter(expr: &FilterExpr) -> String {
    expr.to_string()
}

enum Compiled<'a> {
    And(Vec<Compiled<'a>>),
    Or(Vec<Compiled<'a>>),
    Pred {
        col: usize,
        op: CmpOp,
        value: &'a Literal,
    },
}

impl<'a> Compiled<'a> {
    fn new(expr: &'a FilterExpr, dataset: &Dataset) -> Result<Self> {
        Ok(match expr {
            FilterExpr::And(c) => Compiled::And(
                c.iter()
                    .map(|e| Compiled::new(e, dataset))
                    .collect::<Result<_>>()?,
            ),
            FilterExpr::Or(c) => Compiled::Or(
                c.iter()
                    .map(|e| Compiled::new(e, dataset))
                    .collect::<Result<_>>()?,
            ),
            FilterExpr::Pred(p) => Compiled::Pred {
                col: check_predicate(p, dataset)?,
                op: p.op,
                value: &p.value,
            },
        })
    }

    fn eval(&self, dataset: &Dataset, row: RowId) -> bool {
        match self {
            Compiled::And(c) => c.iter().all(|e| e.eval(dataset, row)),
            Compiled::Or(c) => c.iter().any(|e| e.eval(dataset, row)),
            Compiled::Pred { col, op, value } => match (dataset.cell(row, *col), value) {
                (Cell::Missing, _) => false,
                (Cell::Number(x), Literal::Number(v)) => op.eval_number(x, *v),
                (Cell::Text(s), Literal::Text(v)) => match op {
                    CmpOp::Eq => s == v,
                    CmpOp::Ne => s != v,
                    _ => false,
                },
                _ => false,
            },
        }
    }
}

/// Rows of `rows` satisfying `expr`.
pub fn apply_filter(
    dataset: &Dataset,
    rows: &BTreeSet<RowId>,
    expr: &FilterExpr,
) -> Result<BTreeSet<RowId>> {
    expr.validate(dataset)?;
    if let Some(&r) = rows.iter().next_back() {
        if r >= dataset.n_rows() {
            return Err(Error::invalid(format!("row id {r} out of range")));
        }
    }
    let compiled = Compiled::new(expr, dataset)?;
    Ok(rows
        .iter()
        .copied()
        .filter(|&r| compiled.eval(dataset, r))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::dataset::CsvOptions;

    fn people() -> Dataset {
        Dataset::from_csv_bytes(
            "p",
            b"age,gender,steps\n25,F,500\n43,M,2000\n30,F,NA\n",
            &CsvOptions::default(),
        )
        .unwrap()
    }

    fn all(ds: &Dataset) -> BTreeSet<RowId> {
        (0..ds.n_rows()).collect()
    }

    #[test]
    fn single_predicate() {
        let ds = people();
        let e = parse_filter("age >= 30", &ds).unwrap();
        assert_eq!(e, FilterExpr::pred("age", CmpOp::Ge, Literal::Number(30.0)));
        let rows = apply_filter(&ds, &all(&ds), &e).unwrap();
        assert_eq!(rows.into_iter().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn and_binds_tighter_than_or() {
        let ds = people();
        let e = parse_filter("age >= 30 and gender == \"F\" or steps < 1000", &ds).unwrap();
        let expected = FilterExpr::Or(vec![
            FilterExpr::And(vec![
                FilterExpr::pred("age", CmpOp::Ge, Literal::Number(30.0)),
                FilterExpr::pred("gender", CmpOp::Eq, Literal::Text("F".into())),
            ]),
            FilterExpr::pred("steps", CmpOp::Lt, Literal::Number(1000.0)),
        ]);
        assert_eq!(e, expected);
        let rows = apply_filter(&ds, &all(&ds), &e).unwrap();
        assert_eq!(rows.into_iter().collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn keywords_are_case_insensitive() {
        let ds = people();
        let a = parse_filter("age > 1 AND age < 40 Or age == 43", &ds).unwrap();
        let b = parse_filter("age > 1 and age < 40 or age == 43", &ds).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn malformed_input_reports_offset() {
        let ds = people();
        match parse_filter("age >>", &ds) {
            Err(Error::Syntax(e)) => assert_eq!(e.offset, 4),
            other => panic!("unexpected {other:?}"),
        }
        match parse_filter("age >", &ds) {
            Err(Error::Syntax(e)) => assert_eq!(e.offset, 5),
            other => panic!("unexpected {other:?}"),
        }
        match parse_filter("(age > 1", &ds) {
            Err(Error::Syntax(e)) => assert_eq!(e.offset, 8),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_errors() {
        let ds = people();
        assert!(
            matches!(parse_filter("height > 3", &ds), Err(Error::UnknownColumn(c)) if c == "height")
        );
        assert!(matches!(
            parse_filter("gender < \"F\"", &ds),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            parse_filter("age == \"x\"", &ds),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn missing_cells_never_match() {
        let ds = people();
        let e = parse_filter("steps != 7", &ds).unwrap();
        let rows = apply_filter(&ds, &all(&ds), &e).unwrap();
        assert_eq!(rows.into_iter().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn conjunction_with_itself_is_idempotent() {
        let ds = people();
        let e = parse_filter("age < 40 or gender == \"M\"", &ds).unwrap();
        let twice = FilterExpr::And(vec![e.clone(), e.clone()]);
        assert_eq!(
            apply_filter(&ds, &all(&ds), &e).unwrap(),
            apply_filter(&ds, &all(&ds), &twice).unwrap()
        );
    }

    #[test]
    fn printer_parenthesizes_nested_nodes() {
        let ds = people();
        let e = parse_filter("(age > 1 or age < 0) and gender != \"a \\\"b\\\"\"", &ds).unwrap();
        assert_eq!(
            e.to_string(),
            "(age > 1 or age < 0) and gender != \"a \\\"b\\\"\""
        );
        assert_eq!(parse_filter(&e.to_string(), &ds).unwrap(), e);
    }

    #[test]
    fn quoted_identifiers() {
        let ds =
            Dataset::from_csv_bytes("q", b"heart rate,or\n60,1\n", &CsvOptions::default()).unwrap();
        let e = parse_filter("`heart rate` > 50 and `or` == -1", &ds).unwrap();
        assert_eq!(e.to_string(), "`heart rate` > 50 and `or` == -1");
        assert_eq!(parse_filter(&e.to_string(), &ds).unwrap(), e);
    }
}
