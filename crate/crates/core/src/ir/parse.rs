//! Text front end for `.cq` query files and `.db` database files.
//!
//! The grammar is documented in `docs/grammar.md`.

use super::database::Database;
use super::query::{Aggregate, Query};
use super::term::{is_identifier, Atom, CmpOp, Comparison, Term, Var};
use crate::error::{Error, Result};
use crate::eval::semiring::{Natural, Semiring};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Turnstile,
    At,
    Op(RawOp),
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum RawOp {
    Lt,
    Le,
    Eq,
    Gt,
    Ge,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax { line, column, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Spanned { tok, line: start_line, column: start_col });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '@' => push(Tok::At, 1, &mut i, &mut col),
            '=' => push(Tok::Op(RawOp::Eq), 1, &mut i, &mut col),
            '≤' => push(Tok::Op(RawOp::Le), 1, &mut i, &mut col),
            '≥' => push(Tok::Op(RawOp::Ge), 1, &mut i, &mut col),
            '<' if chars.get(i + 1) == Some(&'=') => push(Tok::Op(RawOp::Le), 2, &mut i, &mut col),
            '>' if chars.get(i + 1) == Some(&'=') => push(Tok::Op(RawOp::Ge), 2, &mut i, &mut col),
            '<' => push(Tok::Op(RawOp::Lt), 1, &mut i, &mut col),
            '>' => push(Tok::Op(RawOp::Gt), 1, &mut i, &mut col),
            ':' if chars.get(i + 1) == Some(&'-') => push(Tok::Turnstile, 2, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            c if c.is_ascii_digit() || c == '-' || c == '+' => {
                let mut j = i + 1;
                let mut seen_sep = false;
                while j < chars.len() {
                    let d = chars[j];
                    if d.is_ascii_digit() {
                        j += 1;
                    } else if (d == '/' || d == '.')
                        && !seen_sep
                        && chars.get(j + 1).is_some_and(|n| n.is_ascii_digit() || *n == '-')
                    {
                        seen_sep = true;
                        j += 1;
                        if chars.get(j) == Some(&'-') {
                            j += 1;
                        }
                    } else {
                        break;
                    }
                }
                let s: String = chars[i..j].iter().collect();
                let len = j - i;
                push(Tok::Number(s), len, &mut i, &mut col);
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                if !is_identifier(&s) {
                    return Err(syntax(line, col, format!("invalid identifier `{s}`")));
                }
                let len = j - i;
                push(Tok::Ident(s), len, &mut i, &mut col);
            }
            other => return Err(syntax(line, col, format!("unexpected character `{other}`"))),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let s = &self.toks[self.pos];
        (s.line, s.column)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        let (l, c) = self.here();
        syntax(l, c, message)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {what}, found {}", describe(self.peek()))))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.err(format!("expected {what}, found {}", describe(&other)))),
        }
    }

    fn term<T: Scalar>(&mut self) -> Result<Term<T>> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(Term::Var(Var::new(&s)))
            }
            Tok::Number(s) => {
                let t = T::parse_literal(&s)
                    .ok_or_else(|| self.err(format!("invalid rational constant `{s}`")))?;
                self.bump();
                Ok(Term::Const(t))
            }
            other => Err(self.err(format!("expected a term, found {}", describe(&other)))),
        }
    }

    fn query<T: Scalar>(&mut self) -> Result<Query<T>> {
        let name = self.ident("query name")?;
        self.expect(Tok::LParen, "`(`")?;
        let mut head = Vec::new();
        let mut aggregate = Aggregate::None;
        if *self.peek() != Tok::RParen {
            loop {
                let (l, c) = self.here();
                let id = self.ident("head variable or aggregate")?;
                if *self.peek() == Tok::LParen {
                    if aggregate != Aggregate::None {
                        return Err(syntax(l, c, "only one aggregate is allowed in the head"));
                    }
                    self.bump();
                    let mut vars = vec![Var::new(&self.ident("aggregate variable")?)];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        vars.push(Var::new(&self.ident("aggregate variable")?));
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    aggregate = if id == "countd" {
                        if vars.len() != 1 {
                            return Err(syntax(l, c, "countd takes exactly one variable"));
                        }
                        Aggregate::CountDistinct(vars.pop().expect("one var"))
                    } else {
                        Aggregate::General { func: id, vars }
                    };
                } else {
                    if aggregate != Aggregate::None {
                        return Err(syntax(l, c, "the aggregate must be the last head item"));
                    }
                    head.push(Var::new(&id));
                }
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        let mut atoms = Vec::new();
        let mut comparisons = Vec::new();
        if *self.peek() == Tok::Turnstile {
            self.bump();
            loop {
                if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::LParen {
                    let rel = self.ident("relation name")?;
                    self.bump();
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        args.push(self.term()?);
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.term()?);
                        }
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    atoms.push(Atom::new(&rel, args));
                } else {
                    let lhs = self.term()?;
                    let op = match self.bump() {
                        Tok::Op(op) => op,
                        other => {
                            self.pos -= 1;
                            return Err(self.err(format!(
                                "expected a comparison operator, found {}",
                                describe(&other)
                            )));
                        }
                    };
                    let rhs = self.term()?;
                    comparisons.push(match op {
                        RawOp::Lt => Comparison::new(lhs, CmpOp::Lt, rhs),
                        RawOp::Le => Comparison::new(lhs, CmpOp::Le, rhs),
                        RawOp::Eq => Comparison::new(lhs, CmpOp::Eq, rhs),
                        RawOp::Gt => Comparison::new(rhs, CmpOp::Lt, lhs),
                        RawOp::Ge => Comparison::new(rhs, CmpOp::Le, lhs),
                    });
                }
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Dot, "`.`")?;
        Query::new(&name, head, aggregate, atoms, comparisons)
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(s) => format!("`{s}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Turnstile => "`:-`".into(),
        Tok::At => "`@`".into(),
        Tok::Op(_) => "a comparison operator".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses exactly one query.
pub fn parse_query<T: Scalar>(text: &str) -> Result<Query<T>> {
    let mut p = Parser::new(text)?;
    let q = p.query()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err("expected end of input after the query"));
    }
    Ok(q)
}

/// Parses a database whose annotations (if any) are natural numbers.
pub fn parse_database<T: Scalar>(text: &str) -> Result<Database<T, u64>> {
    parse_database_with(text, &Natural)
}

/// Parses a database with annotations drawn from the semiring `k`.
/// Facts without `@` get `k.one()`; duplicate facts are summed.
pub fn parse_database_with<T: Scalar, K: Semiring>(
    text: &str,
    k: &K,
) -> Result<Database<T, K::Elem>> {
    let mut p = Parser::new(text)?;
    let mut db = Database::new();
    while *p.peek() != Tok::Eof {
        let (line, column) = p.here();
        let rel = p.ident("relation name")?;
        p.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if *p.peek() != Tok::RParen {
            loop {
                match p.peek().clone() {
                    Tok::Number(s) => {
                        let v = T::parse_literal(&s)
                            .ok_or_else(|| p.err(format!("invalid rational constant `{s}`")))?;
                        args.push(v);
                        p.bump();
                    }
                    other => {
                        return Err(p.err(format!(
                            "expected a rational constant, found {}",
                            describe(&other)
                        )))
                    }
                }
                if *p.peek() == Tok::Comma {
                    p.bump();
                } else {
                    break;
                }
            }
        }
        p.expect(Tok::RParen, "`)`")?;
        let annotation = if *p.peek() == Tok::At {
            p.bump();
            let raw = match p.bump() {
                Tok::Number(s) | Tok::Ident(s) => s,
                other => {
                    p.pos -= 1;
                    return Err(p.err(format!("expected an annotation, found {}", describe(&other))));
                }
            };
            k.parse_elem(&raw).ok_or(Error::AnnotationMismatch {
                annotation: raw,
                semiring: k.name().to_string(),
            })?
        } else {
            k.one()
        };
        p.expect(Tok::Dot, "`.`")?;
        db.add_fact(k, &rel, args, annotation).map_err(|e| match e {
            Error::ArityConflict { .. } => syntax(line, column, e.to_string()),
            e => e,
        })?;
    }
    Ok(db)
}
