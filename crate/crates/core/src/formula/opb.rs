//! Reader and writer for the linear subset of the PB-competition OPB format.

use std::fmt::Write as _;

use super::{normalize, FormulaError, Objective, PboInstance, RawConstraint, RelOp, Term};
use crate::assignment::{Lit, Var};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("line {line}, column {col}: variable x{index} out of range 1..={declared}")]
    VarOutOfRange {
        line: usize,
        col: usize,
        index: usize,
        declared: usize,
    },
    #[error("line {line}, column {col}: integer overflow")]
    Overflow { line: usize, col: usize },
    #[error("line {line}, column {col}: maximization objectives are not supported")]
    Maximize { line: usize, col: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(i64),
    Lit { index: usize, positive: bool },
    Op(RelOp),
    Semi,
    Min,
    Max,
}

fn syntax(pos: Pos, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line: pos.line,
        col: pos.col,
        msg: msg.into(),
    }
}

fn declared_vars(comment: &str) -> Option<usize> {
    let rest = &comment[comment.find("#variable=")? + "#variable=".len()..];
    let rest = rest.trim_start();
    let end = rest
        .find(|c: char| !c.is_ascii_digit())
        .unwrap_or(rest.len());
    rest[..end].parse().ok()
}

/// Tokens with positions, plus the declared variable count if any.
type Tokens = (Vec<(Tok, Pos)>, Option<usize>);

fn tokenize(text: &str) -> Result<Tokens, ParseError> {
    let mut toks = Vec::new();
    let mut header = None;
    for (line_no, line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        if line.trim_start().starts_with('*') {
            if header.is_none() {
                header = declared_vars(line);
            }
            continue;
        }
        let bytes = line.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let pos = Pos {
                line: line_no,
                col: i + 1,
            };
            let b = bytes[i];
            match b {
                b' ' | b'\t' | b'\r' => i += 1,
                b';' => {
                    toks.push((Tok::Semi, pos));
                    i += 1;
                }
                b'>' | b'<' => {
                    let eq = bytes.get(i + 1) == Some(&b'=');
                    let op = match (b, eq) {
                        (b'>', true) => RelOp::Ge,
                        (b'>', false) => RelOp::Gt,
                        (_, true) => RelOp::Le,
                        (_, false) => RelOp::Lt,
                    };
                    toks.push((Tok::Op(op), pos));
                    i += if eq { 2 } else { 1 };
                }
                b'=' => {
                    toks.push((Tok::Op(RelOp::Eq), pos));
                    i += 1;
                }
                b'+' | b'-' | b'0'..=b'9' => {
                    let start = i;
                    if !b.is_ascii_digit() {
                        i += 1;
                    }
                    let digits = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i == digits {
                        return Err(syntax(pos, "sign must be followed by digits"));
                    }
                    let value: i64 =
                        line[start..i]
                            .trim_start_matches('+')
                            .parse()
                            .map_err(|_| ParseError::Overflow {
                                line: pos.line,
                                col: pos.col,
                            })?;
                    toks.push((Tok::Int(value), pos));
                }
                b'~' | b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let start = i;
                    i += 1;
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                    {
                        i += 1;
                    }
                    let word = &line[start..i];
                    if bytes.get(i) == Some(&b':') && (word == "min" || word == "max") {
                        i += 1;
                        toks.push((if word == "min" { Tok::Min } else { Tok::Max }, pos));
                        continue;
                    }
                    let (positive, name) = match word.strip_prefix('~') {
                        Some(rest) => (false, rest),
                        None => (true, word),
                    };
                    let index = name
                        .strip_prefix('x')
                        .filter(|d| !d.is_empty() && d.bytes().all(|c| c.is_ascii_digit()))
                        .ok_or_else(|| syntax(pos, format!("unsupported identifier `{word}`")))?
                        .parse::<usize>()
                        .map_err(|_| ParseError::Overflow {
                            line: pos.line,
                            col: pos.col,
                        })?;
                    toks.push((Tok::Lit { index, positive }, pos));
                }
                _ => {
                    return Err(syntax(
                        pos,
                        format!(
                            "unexpected character `{}`",
                            line[i..].chars().next().unwrap()
                        ),
                    ))
                }
            }
        }
    }
    Ok((toks, header))
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    declared: Option<usize>,
    max_index: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|&(_, p)| p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<(Tok, Pos)> {
        let t = self.toks.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn literal(&mut self, index: usize, positive: bool, pos: Pos) -> Result<Lit, ParseError> {
        let out_of_range = index == 0 || self.declared.is_some_and(|n| index > n);
        if out_of_range {
            return Err(ParseError::VarOutOfRange {
                line: pos.line,
                col: pos.col,
                index,
                declared: self.declared.unwrap_or(0),
            });
        }
        self.max_index = self.max_index.max(index);
        Ok(Lit::new(Var::from_opb(index), positive))
    }

    /// `(<int> <literal>)*`
    fn terms(&mut self) -> Result<Vec<(i64, Lit)>, ParseError> {
        let mut terms = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Int(_)) => {
                    let (Tok::Int(coef), coef_pos) = self.bump().unwrap() else {
                        unreachable!()
                    };
                    let lit = match self.bump() {
                        Some((Tok::Lit { index, positive }, p)) => {
                            self.literal(index, positive, p)?
                        }
                        _ => {
                            return Err(syntax(
                                coef_pos,
                                "coefficient must be followed by a variable",
                            ))
                        }
                    };
                    if let Some(Tok::Lit { .. }) = self.peek() {
                        return Err(syntax(
                            self.pos(),
                            "nonlinear product terms are not supported",
                        ));
                    }
                    terms.push((coef, lit));
                }
                Some(Tok::Lit { .. }) => {
                    return Err(syntax(self.pos(), "variable without coefficient"))
                }
                _ => return Ok(terms),
            }
        }
    }

    fn expect_semi(&mut self) -> Result<(), ParseError> {
        match self.bump() {
            Some((Tok::Semi, _)) => Ok(()),
            _ => Err(syntax(self.pos_before(), "expected `;`")),
        }
    }

    fn pos_before(&self) -> Pos {
        self.toks
            .get(self.at.saturating_sub(1))
            .map(|&(_, p)| p)
            .unwrap_or(self.end)
    }
}

/// Parse OPB text into a normalized instance.
///
/// Accepts an optional `* #variable= n` header, an optional `min:` objective
/// and linear constraints with `>=`, `<=`, `=`, `>` or `<`. Variables are
/// `x<index>`, optionally negated as `~x<index>`.
pub fn parse_opb(text: &str) -> Result<PboInstance, ParseError> {
    let (toks, declared) = tokenize(text)?;
    let end = Pos {
        line: text.lines().count().max(1),
        col: text.lines().last().map_or(1, |l| l.len() + 1),
    };
    let mut p = Parser {
        toks,
        at: 0,
        declared,
        max_index: 0,
        end,
    };
    let mut objective: Option<Vec<(i64, Lit)>> = None;
    let mut constraints = Vec::new();
    while let Some(tok) = p.peek().cloned() {
        let start = p.pos();
        match tok {
            Tok::Max => {
                return Err(ParseError::Maximize {
                    line: start.line,
                    col: start.col,
                })
            }
            Tok::Min => {
                p.bump();
                if objective.is_some() {
                    return Err(syntax(start, "duplicate objective"));
                }
                objective = Some(p.terms()?);
                p.expect_semi()?;
            }
            _ => {
                let terms = p.terms()?;
                let op = match p.bump() {
                    Some((Tok::Op(op), _)) => op,
                    _ => return Err(syntax(p.pos_before(), "expected a relational operator")),
                };
                let rhs = match p.bump() {
                    Some((Tok::Int(v), _)) => v,
                    _ => {
                        return Err(syntax(
                            p.pos_before(),
                            "expected an integer right-hand side",
                        ))
                    }
                };
                p.expect_semi()?;
                let raw = RawConstraint { terms, op, rhs };
                let normalized = normalize(&raw).map_err(|e| at(start, e))?;
                constraints.extend(normalized.into_iter().filter(|c| !c.is_trivial()));
            }
        }
    }
    let objective = Objective::new(
        objective
            .unwrap_or_default()
            .into_iter()
            .map(|(c, l)| Term::new(c, l)),
    )
    .map_err(|e| at(end, e))?;
    let num_vars = declared.unwrap_or(p.max_index);
    PboInstance::new(num_vars, constraints, objective).map_err(|e| at(end, e))
}

fn at(pos: Pos, e: FormulaError) -> ParseError {
    match e {
        FormulaError::Overflow => ParseError::Overflow {
            line: pos.line,
            col: pos.col,
        },
        other => syntax(pos, other.to_string()),
    }
}

fn write_terms(out: &mut String, terms: &[Term]) {
    for t in terms {
        let _ = write!(out, "{:+} {} ", t.coef, t.lit);
    }
}

/// Emit an instance in OPB with `>=` constraints only. Variables are written
/// as `x1..xn`; display names that differ are listed in comments.
pub fn write_opb(inst: &PboInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "* #variable= {} #constraint= {}",
        inst.num_vars(),
        inst.constraints().len()
    );
    for i in 0..inst.num_vars() {
        let v = Var::new(i);
        if inst.name(v) != v.to_string() {
            let _ = writeln!(out, "* {v} = {}", inst.name(v));
        }
    }
    if !inst.objective().is_zero() {
        out.push_str("min: ");
        write_terms(&mut out, inst.objective().terms());
        out.push_str(";\n");
    }
    for c in inst.constraints() {
        write_terms(&mut out, c.terms());
        let _ = writeln!(out, ">= {} ;", c.degree());
    }
    out
}
