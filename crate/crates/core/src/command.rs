//! Text command language.
//!
//! ```text
//! command    = show | load | extend | apply | try | filter ;
//! show       = "show" kind "view" screens ;
//! load       = "load" kind "view" screens ;
//! extend     = "extend" kind [ "view" ] "to" count ( "screen" | "screens" ) ;
//! apply      = "apply" word ( clustering | projection ) "to" "solution" int ;
//! clustering = "clustering" "with" count ( "cluster" | "clusters" ) ;
//! projection = "projection" "with" count ( "dimension" | "dimensions" )
//!              [ "using" word "metric" ] ;
//! try        = "try" ( "increasing" | "decreasing" ) "the" feature "value"
//!              "of" "this" ( "data" "point" | "point" | "row" ) "by" number ;
//! filter     = "filter" "solution" int "where" filter-expression ;
//! screens    = "on" ( "screen" [ "number" ] count
//!                   | "screens" [ "number" | "numbers" ] count { "," count } [ [ "," ] "and" count ] ) ;
//! kind       = word { word } ;                  (* "feature selection" etc. *)
//! feature    = quoted-ident | word { word } ;   (* every word up to "value" *)
//! count      = int | "one" | "two" | ... | "ten" ;
//! ```
//!
//! Keywords are case-insensitive and a single trailing period is ignored.
//! Feature and column names keep their case.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::ClusterAlgorithm;
use crate::data::lexer::quote_ident;
use crate::data::{parse_filter, parse_filter_syntax, Dataset, FilterExpr};
use crate::error::Error;
use crate::metric::Metric;
use crate::reduce::ProjectionAlgorithm;
use crate::session::{SolutionId, ViewKind};

/// Largest edit distance for a "did you mean" suggestion.
pub const SUGGESTION_DISTANCE: usize = 2;

const NUMBER_WORDS: [&str; 10] = [
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    ShowView {
        kind: ViewKind,
        slots: Vec<usize>,
    },
    LoadViewOnScreens {
        kind: ViewKind,
        slots: Vec<usize>,
    },
    ExtendView {
        kind: ViewKind,
        screens: usize,
    },
    ApplyClustering {
        algorithm: ClusterAlgorithm,
        k: usize,
        solution: SolutionId,
    },
    ApplyProjection {
        algorithm: ProjectionAlgorithm,
        dims: usize,
        metric: Option<Metric>,
        solution: SolutionId,
    },
    /// Positive deltas increase the feature.
    ForwardPerturb {
        feature: String,
        delta: f64,
    },
    FilterWhere {
        solution: SolutionId,
        filter: FilterExpr,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum CommandError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown {what} '{name}' at offset {offset}{}", suggestion_text(.suggestions))]
    Unknown {
        what: String,
        name: String,
        offset: usize,
        suggestions: Vec<String>,
    },

    #[error("deictic reference unsupported; name a screen number")]
    Deictic { offset: usize },
}

impl CommandError {
    pub fn offset(&self) -> usize {
        match self {
            CommandError::Syntax { offset, .. }
            | CommandError::Unknown { offset, .. }
            | CommandError::Deictic { offset } => *offset,
        }
    }

    fn syntax(offset: usize, message: impl Into<String>) -> Self {
        CommandError::Syntax {
            offset,
            message: message.into(),
        }
    }
}

fn suggestion_text(suggestions: &[String]) -> String {
    if suggestions.is_empty() {
        String::new()
    } else {
        format!("; did you mean {}?", suggestions.join(" or "))
    }
}

/// Candidates within [`SUGGESTION_DISTANCE`] edits of `name`, closest first.
pub fn suggest<'a>(name: &str, candidates: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let needle = name.to_lowercase();
    let mut hits: Vec<(usize, String)> = candidates
        .into_iter()
        .map(|c| {
            (
                strsim::levenshtein(&needle, &c.to_lowercase()),
                c.to_string(),
            )
        })
        .filter(|(d, _)| *d <= SUGGESTION_DISTANCE)
        .collect();
    hits.sort();
    hits.dedup_by(|a, b| a.1 == b.1);
    hits.into_iter().map(|(_, c)| c).collect()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Word(&'a str),
    Quoted(String),
    Comma,
}

#[derive(Debug, Clone)]
struct Token<'a> {
    tok: Tok<'a>,
    offset: usize,
    end: usize,
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    dataset: Option<&'a Dataset>,
}

type PResult<T> = Result<T, CommandError>;

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn scan(&self) -> PResult<Option<Token<'a>>> {
        let rest = &self.text[self.pos..];
        let trimmed = rest.trim_start();
        let start = self.pos + rest.len() - trimmed.len();
        let Some(first) = trimmed.chars().next() else {
            return Ok(None);
        };
        match first {
            ',' => Ok(Some(Token {
                tok: Tok::Comma,
                offset: start,
                end: start + 1,
            })),
            '`' => {
                let bytes = self.text.as_bytes();
                let mut i = start + 1;
                let mut name = String::new();
                loop {
                    let Some(ch) = self.text[i..].chars().next() else {
                        return Err(CommandError::syntax(start, "unterminated quoted name"));
                    };
                    i += ch.len_utf8();
                    if ch == '`' {
                        if bytes.get(i) == Some(&b'`') {
                            name.push('`');
                            i += 1;
                        } else {
                            break;
                        }
                    } else {
                        name.push(ch);
                    }
                }
                if name.is_empty() {
                    return Err(CommandError::syntax(start, "empty quoted name"));
                }
                Ok(Some(Token {
                    tok: Tok::Quoted(name),
                    offset: start,
                    end: i,
                }))
            }
            _ => {
                let len = trimmed
                    .find(|c: char| is_word_break(c))
                    .unwrap_or(trimmed.len());
                Ok(Some(Token {
                    tok: Tok::Word(&trimmed[..len]),
                    offset: start,
                    end: start + len,
                }))
            }
        }
    }

    fn peek(&self) -> PResult<Option<Token<'a>>> {
        self.scan()
    }

    fn next(&mut self, expected: &str) -> PResult<Token<'a>> {
        match self.scan()? {
            Some(t) => {
                self.pos = t.end;
                Ok(t)
            }
            None => Err(CommandError::syntax(
                self.text.len(),
                format!("expected {expected}, found end of input"),
            )),
        }
    }

    fn word(&mut self, expected: &str) -> PResult<(&'a str, usize)> {
        let t = self.next(expected)?;
        match t.tok {
            Tok::Word(w) => Ok((w, t.offset)),
            _ => Err(CommandError::syntax(
                t.offset,
                format!("expected {expected}"),
            )),
        }
    }

    fn peek_is(&self, keywords: &[&str]) -> PResult<bool> {
        Ok(
            matches!(self.peek()?, Some(Token { tok: Tok::Word(w), .. }) if keywords.iter().any(|k| w.eq_ignore_ascii_case(k))),
        )
    }

    /// Consumes one of `keywords`, returning its index.
    fn keyword(&mut self, keywords: &[&str]) -> PResult<usize> {
        let expected = keywords
            .iter()
            .map(|k| format!("'{k}'"))
            .collect::<Vec<_>>()
            .join(" or ");
        let (w, offset) = self.word(&expected)?;
        keywords
            .iter()
            .position(|k| w.eq_ignore_ascii_case(k))
            .ok_or_else(|| {
                CommandError::syntax(offset, format!("expected {expected}, found '{w}'"))
            })
    }

    fn optional(&mut self, keywords: &[&str]) -> PResult<bool> {
        if self.peek_is(keywords)? {
            self.next("keyword")?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn end(&mut self) -> PResult<()> {
        match self.peek()? {
            None => Ok(()),
            Some(t) => Err(CommandError::syntax(t.offset, "unexpected trailing input")),
        }
    }

    fn int(&mut self, what: &str) -> PResult<usize> {
        let (w, offset) = self.word(what)?;
        if let Some(i) = NUMBER_WORDS.iter().position(|n| w.eq_ignore_ascii_case(n)) {
            return Ok(i + 1);
        }
        if !w.bytes().all(|b| b.is_ascii_digit()) {
            return Err(CommandError::syntax(
                offset,
                format!("expected {what}, found '{w}'"),
            ));
        }
        w.parse()
            .map_err(|_| CommandError::syntax(offset, format!("{what} '{w}' is out of range")))
    }

    fn count(&mut self, what: &str) -> PResult<usize> {
        let offset = self.peek()?.map_or(self.text.len(), |t| t.offset);
        match self.int(what)? {
            0 => Err(CommandError::syntax(
                offset,
                format!("{what} must be positive"),
            )),
            n => Ok(n),
        }
    }

    fn number(&mut self) -> PResult<f64> {
        let (w, offset) = self.word("a number")?;
        if let Some(i) = NUMBER_WORDS.iter().position(|n| w.eq_ignore_ascii_case(n)) {
            return Ok((i + 1) as f64);
        }
        let (int, frac) = w.split_once('.').unwrap_or((w, ""));
        let digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
        let well_formed = digits(int)
            && digits(frac)
            && !(int.is_empty() && frac.is_empty())
            && (!w.contains('.') || !frac.is_empty());
        let value: f64 = if well_formed {
            w.parse().unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        if !value.is_finite() {
            return Err(CommandError::syntax(
                offset,
                format!("expected a number, found '{w}'"),
            ));
        }
        Ok(value)
    }

    /// Words up to (not including) one of `stops`.
    fn phrase(&mut self, what: &str, stops: &[&str]) -> PResult<(String, usize)> {
        let mut words = Vec::new();
        let mut start = None;
        while !self.peek_is(stops)? {
            let (w, offset) = self.word(what)?;
            start.get_or_insert(offset);
            words.push(w);
        }
        match start {
            Some(s) => Ok((words.join(" "), s)),
            None => {
                let offset = self.peek()?.map_or(self.text.len(), |t| t.offset);
                Err(CommandError::syntax(offset, format!("expected {what}")))
            }
        }
    }

    fn kind(&mut self, stops: &[&str]) -> PResult<ViewKind> {
        let (name, offset) = self.phrase("a view kind", stops)?;
        name.parse().map_err(|_| {
            let names: Vec<String> = ViewKind::ALL.iter().map(|k| kind_words(*k)).collect();
            CommandError::Unknown {
                what: "view kind".into(),
                suggestions: suggest(
                    &name.replace(['_', '-'], " "),
                    names.iter().map(String::as_str),
                ),
                name,
                offset,
            }
        })
    }

    fn screens(&mut self) -> PResult<Vec<usize>> {
        self.keyword(&["on"])?;
        if self.peek_is(&["that", "this"])? {
            let t = self.next("screen")?;
            return Err(CommandError::Deictic { offset: t.offset });
        }
        match self.keyword(&["screen", "screens"])? {
            0 => {
                self.optional(&["number"])?;
                Ok(vec![self.count("a screen number")?])
            }
            _ => {
                self.optional(&["number", "numbers"])?;
                let mut slots = vec![self.count("a screen number")?];
                loop {
                    let mut comma = false;
                    if matches!(
                        self.peek()?,
                        Some(Token {
                            tok: Tok::Comma,
                            ..
                        })
                    ) {
                        self.next(",")?;
                        comma = true;
                    }
                    if self.optional(&["and"])? {
                        slots.push(self.count("a screen number")?);
                        break;
                    }
                    if !comma {
                        break;
                    }
                    slots.push(self.count("a screen number")?);
                }
                Ok(slots)
            }
        }
    }

    fn command(&mut self) -> PResult<Command> {
        let verb = self.keyword(&["show", "load", "extend", "apply", "try", "filter"])?;
        let cmd = match verb {
            0 | 1 => {
                let kind = self.kind(&["view"])?;
                self.keyword(&["view"])?;
                let slots = self.screens()?;
                if verb == 0 {
                    Command::ShowView { kind, slots }
                } else {
                    Command::LoadViewOnScreens { kind, slots }
                }
            }
            2 => {
                let kind = self.kind(&["view", "to"])?;
                self.optional(&["view"])?;
                self.keyword(&["to"])?;
                let screens = self.count("a screen count")?;
                self.keyword(&["screen", "screens"])?;
                Command::ExtendView { kind, screens }
            }
            3 => self.apply()?,
            4 => self.perturb()?,
            _ => return self.filter(),
        };
        self.end()?;
        Ok(cmd)
    }

    fn apply(&mut self) -> PResult<Command> {
        let (name, name_offset) =
            self.phrase("an algorithm name", &["clustering", "projection"])?;
        let unknown = |what: &str, candidates: &[&str]| CommandError::Unknown {
            what: what.into(),
            name: name.clone(),
            offset: name_offset,
            suggestions: suggest(&name, candidates.iter().copied()),
        };
        if self.keyword(&["clustering", "projection"])? == 0 {
            let algorithm: ClusterAlgorithm = name.parse().map_err(|_| {
                unknown(
                    "clustering algorithm",
                    &["kmeans", "k-means", "agglomerative", "hierarchical"],
                )
            })?;
            self.keyword(&["with"])?;
            let k = self.count("a cluster count")?;
            self.keyword(&["clusters", "cluster"])?;
            let solution = self.solution_ref()?;
            Ok(Command::ApplyClustering {
                algorithm,
                k,
                solution,
            })
        } else {
            let algorithm: ProjectionAlgorithm = name
                .parse()
                .map_err(|_| unknown("projection algorithm", &["pca", "cmds", "mds"]))?;
            self.keyword(&["with"])?;
            let dims = self.count("a dimension count")?;
            self.keyword(&["dimensions", "dimension"])?;
            let metric = if self.optional(&["using"])? {
                let (m, offset) = self.word("a metric name")?;
                let metric = m.parse::<Metric>().map_err(|_| CommandError::Unknown {
                    what: "metric".into(),
                    name: m.into(),
                    offset,
                    suggestions: suggest(m, Metric::ALL.iter().map(|m| m.name())),
                })?;
                self.keyword(&["metric"])?;
                Some(metric)
            } else {
                None
            };
            let solution = self.solution_ref()?;
            Ok(Command::ApplyProjection {
                algorithm,
                dims,
                metric,
                solution,
            })
        }
    }

    fn solution_ref(&mut self) -> PResult<SolutionId> {
        self.keyword(&["to"])?;
        self.keyword(&["solution"])?;
        Ok(self.int("a solution number")? as SolutionId)
    }

    fn perturb(&mut self) -> PResult<Command> {
        let sign = if self.keyword(&["increasing", "decreasing"])? == 0 {
            1.0
        } else {
            -1.0
        };
        self.keyword(&["the"])?;
        let (feature, offset) = match self.peek()? {
            Some(Token {
                tok: Tok::Quoted(name),
                offset,
                end,
            }) => {
                self.pos = end;
                (name, offset)
            }
            _ => self.phrase("a feature name", &["value"])?,
        };
        self.keyword(&["value"])?;
        self.keyword(&["of"])?;
        self.keyword(&["this"])?;
        if self.keyword(&["data", "point", "row"])? == 0 {
            self.keyword(&["point"])?;
        }
        self.keyword(&["by"])?;
        let delta = sign * self.number()?;
        let feature = self.resolve_feature(feature, offset)?;
        Ok(Command::ForwardPerturb { feature, delta })
    }

    fn resolve_feature(&self, name: String, offset: usize) -> PResult<String> {
        let Some(ds) = self.dataset else {
            return Ok(name);
        };
        if ds.column_index(&name).is_some() {
            return Ok(name);
        }
        let mut folded = ds
            .columns()
            .iter()
            .filter(|c| c.name().eq_ignore_ascii_case(&name));
        match (folded.next(), folded.next()) {
            (Some(c), None) => Ok(c.name().to_string()),
            _ => Err(CommandError::Unknown {
                what: "feature".into(),
                suggestions: suggest(&name, ds.columns().iter().map(|c| c.name())),
                name,
                offset,
            }),
        }
    }

    fn filter(&mut self) -> PResult<Command> {
        self.keyword(&["solution"])?;
        let solution = self.int("a solution number")? as SolutionId;
        self.keyword(&["where"])?;
        self.skip_ws();
        let base = self.pos;
        let tail = &self.text[base..];
        if tail.is_empty() {
            return Err(CommandError::syntax(base, "expected a filter expression"));
        }
        let parsed = match self.dataset {
            Some(ds) => parse_filter(tail, ds),
            None => parse_filter_syntax(tail),
        };
        let filter = parsed.map_err(|e| match e {
            Error::Syntax(s) => CommandError::syntax(base + s.offset, s.message),
            Error::UnknownColumn(name) => CommandError::Unknown {
                suggestions: self
                    .dataset
                    .map(|ds| suggest(&name, ds.columns().iter().map(|c| c.name())))
                    .unwrap_or_default(),
                what: "column".into(),
                offset: base + tail.find(&name).unwrap_or(0),
                name,
            },
            other => CommandError::syntax(base, other.to_string()),
        })?;
        Ok(Command::FilterWhere { solution, filter })
    }
}

fn is_word_break(c: char) -> bool {
    c.is_whitespace() || c == ',' || c == '`'
}

fn kind_words(kind: ViewKind) -> String {
    kind.name().replace('_', " ")
}

/// Parses one command. Column and feature names are checked against
/// `dataset` when one is given.
pub fn parse_command(text: &str, dataset: Option<&Dataset>) -> Result<Command, CommandError> {
    let trimmed = text.trim_end();
    let body = trimmed.strip_suffix('.').unwrap_or(trimmed);
    if body.trim().is_empty() {
        return Err(CommandError::syntax(0, "empty command"));
    }
    let mut p = Parser {
        text: body,
        pos: 0,
        dataset,
    };
    p.command()
}

/// As [`parse_command`], for untrusted bytes.
pub fn parse_command_bytes(
    bytes: &[u8],
    dataset: Option<&Dataset>,
) -> Result<Command, CommandError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_command(text, dataset),
        Err(e) => Err(CommandError::syntax(
            e.valid_up_to(),
            "input is not valid UTF-8",
        )),
    }
}

fn feature_is_bare(name: &str) -> bool {
    !name.is_empty()
        && name.split(' ').all(|w| {
            !w.is_empty() && !w.eq_ignore_ascii_case("value") && !w.contains(is_word_break)
        })
        && !name.ends_with('.')
}

fn write_slots(f: &mut fmt::Formatter<'_>, slots: &[usize]) -> fmt::Result {
    match slots {
        [one] => write!(f, "on screen number {one}"),
        [init @ .., last] => {
            let init: Vec<String> = init.iter().map(|s| s.to_string()).collect();
            write!(f, "on screens {} and {last}", init.join(", "))
        }
        [] => f.write_str("on screens"),
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::ShowView { kind, slots } => {
                write!(f, "show {} view ", kind_words(*kind))?;
                write_slots(f, slots)
            }
            Command::LoadViewOnScreens { kind, slots } => {
                write!(f, "load {} view ", kind_words(*kind))?;
                write_slots(f, slots)
            }
            Command::ExtendView { kind, screens } => {
                let unit = if *screens == 1 { "screen" } else { "screens" };
                write!(f, "extend {} view to {screens} {unit}", kind_words(*kind))
            }
            Command::ApplyClustering {
                algorithm,
                k,
                solution,
            } => {
                write!(
                    f,
                    "apply {algorithm} clustering with {k} clusters to solution {solution}"
                )
            }
            Command::ApplyProjection {
                algorithm,
                dims,
                metric,
                solution,
            } => {
                write!(f, "apply {algorithm} projection with {dims} dimensions ")?;
                if let Some(m) = metric {
                    write!(f, "using {m} metric ")?;
                }
                write!(f, "to solution {solution}")
            }
            Command::ForwardPerturb { feature, delta } => {
                let direction = if delta.is_sign_negative() {
                    "decreasing"
                } else {
                    "increasing"
                };
                let feature = if feature_is_bare(feature) {
                    feature.clone()
                } else {
                    quote_ident(feature)
                };
                write!(
                    f,
                    "try {direction} the {feature} value of this data point by {}",
                    delta.abs()
                )
            }
            Command::FilterWhere { solution, filter } => {
                write!(f, "filter solution {solution} where {filter}")
            }
        }
    }
}

/// Canonical text that parses back to `cmd`.
pub fn print_command(cmd: &Command) -> String {
    cmd.to_string()
}
