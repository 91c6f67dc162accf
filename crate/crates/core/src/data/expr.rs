//! Arithmetic expressions over numeric columns, used to engineer features.

use std::fmt;

use super::dataset::{Column, ColumnKind, ColumnMeta, ColumnValues, Dataset, RowId};
use super::lexer::{is_bare_ident, quote_ident, tokenize, Tok, Token};
use crate::error::{Error, Result, SyntaxError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    fn symbol(self) -> char {
        match self {
            ArithOp::Add => '+',
            ArithOp::Sub => '-',
            ArithOp::Mul => '*',
            ArithOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArithExpr {
    Number(f64),
    Column(String),
    Neg(Box<ArithExpr>),
    Binary(ArithOp, Box<ArithExpr>, Box<ArithExpr>),
}

impl fmt::Display for ArithExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithExpr::Number(v) if *v < 0.0 => write!(f, "({v})"),
            ArithExpr::Number(v) => write!(f, "{v}"),
            ArithExpr::Column(c) if is_bare_ident(c) => f.write_str(c),
            ArithExpr::Column(c) => f.write_str(&quote_ident(c)),
            ArithExpr::Neg(e) => write!(f, "-({e})"),
            ArithExpr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
        }
    }
}

/// Accepts `+ - * /` and the typographic `× ÷ −`.
pub fn parse_arith(text: &str) -> Result<ArithExpr, SyntaxError> {
    let normalized = text.replace('×', "*").replace('÷', "/").replace('−', "-");
    // each replacement shrinks a multi-byte char to one byte; map offsets back
    let offsets: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let remap = |e: SyntaxError| {
        let mut e = e;
        let char_idx = normalized[..e.offset.min(normalized.len())].chars().count();
        e.offset = offsets[char_idx.min(offsets.len() - 1)];
        e
    };
    let tokens = tokenize(&normalized).map_err(remap)?;
    let mut p = ArithParser {
        tokens: &tokens,
        pos: 0,
    };
    let expr = p.sum().map_err(remap)?;
    let t = &tokens[p.pos];
    if t.tok != Tok::End {
        return Err(remap(SyntaxError::new(
            t.offset,
            "unexpected trailing input",
        )));
    }
    Ok(expr)
}

struct ArithParser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl ArithParser<'_> {
    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn sum(&mut self) -> Result<ArithExpr, SyntaxError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.tokens[self.pos].tok {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.product()?;
            lhs = ArithExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<ArithExpr, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tokens[self.pos].tok {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.unary()?;
            lhs = ArithExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<ArithExpr, SyntaxError> {
        if self.tokens[self.pos].tok == Tok::Minus {
            self.next();
            return Ok(ArithExpr::Neg(Box::new(self.unary()?)));
        }
        let t = self.next();
        match t.tok {
            Tok::Number(v) => Ok(ArithExpr::Number(v)),
            Tok::Ident { name, .. } => Ok(ArithExpr::Column(name)),
            Tok::LParen => {
                let e = self.sum()?;
                let close = self.next();
                if close.tok != Tok::RParen {
                    return Err(SyntaxError::new(close.offset, "expected ')'"));
                }
                Ok(e)
            }
            _ => Err(SyntaxError::new(t.offset, "expected number, column or '('")),
        }
    }
}

enum Bound<'a> {
    Number(f64),
    Column {
        values: &'a [f64],
        missing: &'a [bool],
    },
    Neg(Box<Bound<'a>>),
    Binary(ArithOp, Box<Bound<'a>>, Box<Bound<'a>>),
}

#[derive(Default)]
struct EvalCounters {
    div_by_zero: usize,
}

impl Bound<'_> {
    /// `Err(())` marks a division by zero, `Ok(None)` a missing input.
    fn eval(&self, row: RowId) -> Result<Option<f64>, ()> {
        Ok(match self {
            Bound::Number(v) => Some(*v),
            Bound::Column { values, missing } => (!missing[row]).then(|| values[row]),
            Bound::Neg(e) => e.eval(row)?.map(|v| -v),
            Bound::Binary(op, l, r) => {
                let (Some(a), Some(b)) = (l.eval(row)?, r.eval(row)?) else {
                    return Ok(None);
                };
                Some(match op {
                    ArithOp::Add => a + b,
                    ArithOp::Sub => a - b,
                    ArithOp::Mul => a * b,
                    ArithOp::Div if b == 0.0 => return Err(()),
                    ArithOp::Div => a / b,
                })
            }
        })
    }
}

fn bind<'a>(expr: &ArithExpr, dataset: &'a Dataset) -> Result<Bound<'a>> {
    Ok(match expr {
        ArithExpr::Number(v) => Bound::Number(*v),
        ArithExpr::Column(name) => {
            let idx = dataset
                .column_index(name)
                .ok_or_else(|| Error::UnknownColumn(name.clone()))?;
            let col = dataset.column(idx);
            if col.meta.derived.is_some() {
                return Err(Error::DerivedReference(name.clone()));
            }
            let values = col
                .numeric()
                .ok_or_else(|| Error::NotNumeric(name.clone()))?;
            Bound::Column {
                values,
                missing: &col.missing,
            }
        }
        ArithExpr::Neg(e) => Bound::Neg(Box::new(bind(e, dataset)?)),
        ArithExpr::Binary(op, l, r) => Bound::Binary(
            *op,
            Box::new(bind(l, dataset)?),
            Box::new(bind(r, dataset)?),
        ),
    })
}

/// Outcome of [`engineer_feature`].
#[derive(Debug, Clone)]
pub struct Engineered {
    pub dataset: Dataset,
    /// Cells set missing because of a division by zero or a non-finite result.
    pub warnings: usize,
}

/// Appends a numeric column computed row-wise from `expression`.
///
/// A cell is missing iff a referenced cell is missing, the expression divides
/// by zero, or the result overflows; the latter two are counted as warnings.
pub fn engineer_feature(dataset: &Dataset, name: &str, expression: &str) -> Result<Engineered> {
    let name = name.trim();
    if name.is_empty() {
        return Err(Error::EmptyColumnName(dataset.n_cols()));
    }
    if dataset.column_index(name).is_some() {
        return Err(Error::DuplicateColumn(name.to_string()));
    }
    let expr = parse_arith(expression)?;
    let bound = bind(&expr, dataset)?;
    let mut counters = EvalCounters::default();
    let n = dataset.n_rows();
    let mut values = Vec::with_capacity(n);
    let mut missing = Vec::with_capacity(n);
    for row in 0..n {
        match bound.eval(row) {
            Ok(Some(v)) if v.is_finite() => {
                values.push(v);
                missing.push(false);
            }
            Ok(Some(_)) | Err(()) => {
                counters.div_by_zero += 1;
                values.push(f64::NAN);
                missing.push(true);
            }
            Ok(None) => {
                values.push(f64::NAN);
                missing.push(true);
            }
        }
    }
    let column = Column {
        meta: ColumnMeta {
            name: name.to_string(),
            kind: ColumnKind::Numeric,
            derived: Some(expr.to_string()),
        },
        values: ColumnValues::Numeric(values),
        missing,
    };
    Ok(Engineered {
        dataset: dataset.with_appended(column)?,
        warnings: counters.div_by_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::dataset::{Cell, CsvOptions};

    fn ds(text: &str) -> Dataset {
        Dataset::from_csv_bytes("t", text.as_bytes(), &CsvOptions::default()).unwrap()
    }

    fn numbers(d: &Dataset, col: usize) -> Vec<Option<f64>> {
        (0..d.n_rows())
            .map(|r| match d.cell(r, col) {
                Cell::Number(v) => Some(v),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn sum_of_columns() {
        let d = ds("colA,colB\n1,2\n3,4\n");
        let out = engineer_feature(&d, "new", "colA + colB").unwrap();
        assert_eq!(numbers(&out.dataset, 2), vec![Some(3.0), Some(7.0)]);
        assert_eq!(out.warnings, 0);
        assert_eq!(
            out.dataset.column(2).meta.derived.as_deref(),
            Some("(colA + colB)")
        );
    }

    #[test]
    fn division_by_zero_is_missing_with_warning() {
        let d = ds("colA,colB\n1,2\n3,0\n");
        let out = engineer_feature(&d, "ratio", "colA / colB").unwrap();
        assert_eq!(numbers(&out.dataset, 2), vec![Some(0.5), None]);
        assert_eq!(out.warnings, 1);
    }

    #[test]
    fn missing_propagates_without_warning() {
        let d = ds("a,b\n1,NA\n2,3\n");
        let out = engineer_feature(&d, "c", "a * b - 1").unwrap();
        assert_eq!(numbers(&out.dataset, 2), vec![None, Some(5.0)]);
        assert_eq!(out.warnings, 0);
    }

    #[test]
    fn precedence_and_unicode_operators() {
        let d = ds("a,b\n2,3\n");
        let out = engineer_feature(&d, "c", "2 × a − b ÷ 3 + -(a)").unwrap();
        assert_eq!(numbers(&out.dataset, 2), vec![Some(4.0 - 1.0 - 2.0)]);
    }

    #[test]
    fn rejects_bad_references() {
        let d = ds("a,g\n1,x\n");
        assert!(matches!(
            engineer_feature(&d, "a", "a"),
            Err(Error::DuplicateColumn(_))
        ));
        assert!(matches!(
            engineer_feature(&d, "c", "g + 1"),
            Err(Error::NotNumeric(_))
        ));
        assert!(matches!(
            engineer_feature(&d, "c", "zz + 1"),
            Err(Error::UnknownColumn(_))
        ));
        let d2 = engineer_feature(&d, "c", "a + 1").unwrap().dataset;
        assert!(matches!(
            engineer_feature(&d2, "e", "c * 2"),
            Err(Error::DerivedReference(_))
        ));
        assert!(matches!(
            engineer_feature(&d, "c", "a +"),
            Err(Error::Syntax(_))
        ));
    }

    #[test]
    fn canonical_text_reparses_to_same_tree() {
        let e = parse_arith("-(a) * (b - -2) / 3").unwrap();
        assert_eq!(parse_arith(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn syntax_offsets_refer_to_original_text() {
        let err = parse_arith("a × ×").unwrap_err();
        assert_eq!(err.offset, "a × ".len());
    }
}
