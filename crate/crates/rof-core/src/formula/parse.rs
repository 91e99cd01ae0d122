//! Text format for formulas.
//!
//! ```text
//! expr := var
//!       | "(not " var ")"            negated variable
//!       | "(not " expr ")"           general negation (pre-normalization)
//!       | "(and " expr+ ")"
//!       | "(or " expr+ ")"
//!       | "(tbl"ARITY " " TABLE " " expr{ARITY} ")"
//!       | "(mv"ARITY " " GATENAME " " expr{ARITY} ")"
//! var  := "x" NONNEG-INT
//! ```
//!
//! `TABLE` is `2^ARITY` output bits, tuple index with child 0 least
//! significant. `GATENAME` is `bal4` or `bal5` (both arity 2). `;` starts a
//! line comment. Whitespace separates tokens freely.

use super::{Expr, Formula, FormulaError, GateKind, MvGate, Sym, VertexId, MAX_NEST};

struct Lexer<'a> {
    text: &'a [u8],
    pos: usize,
}

#[derive(Debug, PartialEq)]
enum Token<'a> {
    LParen,
    RParen,
    Atom(&'a str),
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            text: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_trivia(&mut self) {
        while self.pos < self.text.len() {
            match self.text[self.pos] {
                b';' => {
                    while self.pos < self.text.len() && self.text[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn next(&mut self) -> Result<(usize, Token<'a>), FormulaError> {
        self.skip_trivia();
        let start = self.pos;
        if start >= self.text.len() {
            return Err(err(start, "unexpected end of input"));
        }
        match self.text[start] {
            b'(' => {
                self.pos += 1;
                Ok((start, Token::LParen))
            }
            b')' => {
                self.pos += 1;
                Ok((start, Token::RParen))
            }
            _ => {
                let mut end = start;
                while end < self.text.len()
                    && !self.text[end].is_ascii_whitespace()
                    && self.text[end] != b'('
                    && self.text[end] != b')'
                    && self.text[end] != b';'
                {
                    end += 1;
                }
                self.pos = end;
                let s = std::str::from_utf8(&self.text[start..end])
                    .map_err(|_| err(start, "token is not valid UTF-8"))?;
                Ok((start, Token::Atom(s)))
            }
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_trivia();
        self.pos >= self.text.len()
    }
}

fn err(pos: usize, msg: impl Into<String>) -> FormulaError {
    FormulaError::Syntax {
        pos,
        msg: msg.into(),
    }
}

fn expect_rparen(lex: &mut Lexer) -> Result<(), FormulaError> {
    let (pos, tok) = lex.next()?;
    if tok != Token::RParen {
        return Err(err(pos, "expected ')'"));
    }
    Ok(())
}

fn parse_var(pos: usize, atom: &str) -> Result<u32, FormulaError> {
    let digits = atom
        .strip_prefix('x')
        .ok_or_else(|| err(pos, format!("expected a variable, got {atom:?}")))?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(pos, format!("bad variable name {atom:?}")));
    }
    digits
        .parse()
        .map_err(|_| err(pos, format!("variable index in {atom:?} is too large")))
}

fn parse_expr(lex: &mut Lexer, depth: usize) -> Result<Expr, FormulaError> {
    if depth > MAX_NEST {
        return Err(FormulaError::TooDeep);
    }
    let (pos, tok) = lex.next()?;
    match tok {
        Token::Atom(a) => Ok(Expr::Var(parse_var(pos, a)?)),
        Token::RParen => Err(err(pos, "unexpected ')'")),
        Token::LParen => {
            let (hpos, head) = lex.next()?;
            let head = match head {
                Token::Atom(a) => a,
                _ => return Err(err(hpos, "expected a gate name after '('")),
            };
            match head {
                "not" => {
                    let inner = parse_expr(lex, depth + 1)?;
                    expect_rparen(lex)?;
                    // (not xN) is a negated leaf, anything else a Not gate
                    Ok(match inner {
                        Expr::Var(i) => Expr::NegVar(i),
                        other => Expr::Not(Box::new(other)),
                    })
                }
                "and" | "or" => {
                    let es = parse_children(lex, depth)?;
                    if es.is_empty() {
                        return Err(err(hpos, format!("({head} ...) needs at least one child")));
                    }
                    Ok(if head == "and" {
                        Expr::And(es)
                    } else {
                        Expr::Or(es)
                    })
                }
                _ if head.starts_with("tbl") => {
                    let arity = parse_arity(hpos, head, "tbl")?;
                    let (tpos, ttok) = lex.next()?;
                    let bits = match ttok {
                        Token::Atom(a) => a,
                        _ => return Err(err(tpos, "expected a table bit string")),
                    };
                    if bits.len() != 1usize << arity {
                        return Err(FormulaError::TableLength {
                            arity,
                            got: bits.len(),
                            expected: 1usize << arity,
                        });
                    }
                    let table = bits
                        .bytes()
                        .map(|b| match b {
                            b'0' => Ok(Sym(0)),
                            b'1' => Ok(Sym(1)),
                            _ => Err(err(tpos, "table entries must be 0 or 1")),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    let es = parse_fixed_children(lex, depth, arity, hpos, "tbl")?;
                    Ok(Expr::Table(table, es))
                }
                _ if head.starts_with("mv") => {
                    let arity = parse_arity(hpos, head, "mv")?;
                    let (gpos, gtok) = lex.next()?;
                    let gate = match gtok {
                        Token::Atom("bal4") => MvGate::Bal4,
                        Token::Atom("bal5") => MvGate::Bal5,
                        Token::Atom(other) => {
                            return Err(err(gpos, format!("unknown mv gate {other:?}")))
                        }
                        _ => return Err(err(gpos, "expected an mv gate name")),
                    };
                    if arity != 2 {
                        return Err(FormulaError::Arity {
                            gate: "mv",
                            got: arity,
                            expected: "exactly 2".into(),
                        });
                    }
                    let es = parse_fixed_children(lex, depth, arity, hpos, "mv")?;
                    Ok(Expr::Mv(gate, es))
                }
                other => Err(err(hpos, format!("unknown gate {other:?}"))),
            }
        }
    }
}

fn parse_arity(pos: usize, head: &str, prefix: &str) -> Result<usize, FormulaError> {
    let digits = &head[prefix.len()..];
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(pos, format!("bad gate head {head:?}")));
    }
    let arity: usize = digits
        .parse()
        .map_err(|_| err(pos, format!("arity in {head:?} is too large")))?;
    if arity == 0 || arity > 16 {
        return Err(err(pos, format!("arity {arity} out of range 1..=16")));
    }
    Ok(arity)
}

fn parse_children(lex: &mut Lexer, depth: usize) -> Result<Vec<Expr>, FormulaError> {
    let mut es = Vec::new();
    loop {
        let save = lex.pos;
        let (_, tok) = lex.next()?;
        if tok == Token::RParen {
            return Ok(es);
        }
        lex.pos = save;
        es.push(parse_expr(lex, depth + 1)?);
    }
}

fn parse_fixed_children(
    lex: &mut Lexer,
    depth: usize,
    arity: usize,
    hpos: usize,
    gate: &'static str,
) -> Result<Vec<Expr>, FormulaError> {
    let mut es = Vec::with_capacity(arity);
    for _ in 0..arity {
        es.push(parse_expr(lex, depth + 1)?);
    }
    let (pos, tok) = lex.next()?;
    if tok != Token::RParen {
        return Err(err(
            pos,
            format!("{gate} gate at byte {hpos} expects exactly {arity} children"),
        ));
    }
    Ok(es)
}

/// Parses the text format into a validated formula.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let mut lex = Lexer::new(text);
    let expr = parse_expr(&mut lex, 0)?;
    if !lex.at_end() {
        return Err(err(lex.pos, "trailing input after formula"));
    }
    Formula::from_expr(&expr)
}

impl Formula {
    /// Canonical single-line text form. Mdnf gates print as the equivalent
    /// `tbl` gate (the grammar has no mdnf production); constants have no
    /// text form and error.
    pub fn to_text(&self) -> Result<String, FormulaError> {
        let mut out = String::new();
        self.write_vertex(self.root(), &mut out, 0)?;
        Ok(out)
    }

    fn write_vertex(
        &self,
        v: VertexId,
        out: &mut String,
        depth: usize,
    ) -> Result<(), FormulaError> {
        use std::fmt::Write;
        if depth > MAX_NEST {
            return Err(FormulaError::TooDeep);
        }
        let kids = self.children(v);
        let write_kids = |out: &mut String| -> Result<(), FormulaError> {
            for &c in kids {
                out.push(' ');
                self.write_vertex(c, out, depth + 1)?;
            }
            out.push(')');
            Ok(())
        };
        match self.kind(v) {
            GateKind::Var(i) => {
                let _ = write!(out, "x{i}");
                Ok(())
            }
            GateKind::NegVar(i) => {
                let _ = write!(out, "(not x{i})");
                Ok(())
            }
            GateKind::Const(_) => Err(FormulaError::UnprintableConst),
            GateKind::Not => {
                out.push_str("(not");
                write_kids(out)
            }
            GateKind::And => {
                out.push_str("(and");
                write_kids(out)
            }
            GateKind::Or => {
                out.push_str("(or");
                write_kids(out)
            }
            GateKind::Table(t) => {
                let _ = write!(out, "(tbl{} ", kids.len());
                for s in t {
                    out.push(if s.0 == 0 { '0' } else { '1' });
                }
                write_kids(out)
            }
            GateKind::Mdnf(terms) => {
                let _ = write!(out, "(tbl{} ", kids.len());
                for s in super::mdnf_to_table(terms, kids.len()) {
                    out.push(if s.0 == 0 { '0' } else { '1' });
                }
                write_kids(out)
            }
            GateKind::Mv(g) => {
                let _ = write!(out, "(mv{} {}", kids.len(), g.name());
                write_kids(out)
            }
        }
    }
}
