//! Lexer and parser for `.nry` files.
//!
//! A declaration starts at column 1; its continuation lines are indented.
//! `--` starts a comment running to the end of the line.

use thiserror::Error;

use crate::surface::{Decl, Expect, Expr, SPattern};
use crate::syntax::{Icit, Name, Span};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("parse error at {line}:{col}: expected {expected}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub expected: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(Name),
    Num(u64),
    Sym(&'static str),
    /// `#expect` and friends.
    Pragma(String),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: Span,
    width: u32,
}

const SYMBOLS: [&str; 13] = ["->", "\\", ".", ":", "=", "(", ")", "{", "}", ",", "*", "_", "|"];

const KEYWORDS: [&str; 3] = ["let", "in", "postulate"];

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '\'' | '+' | '-')
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let span = Span { line: ln as u32 + 1, col: i as u32 + 1 };
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '-' && chars.get(i + 1) == Some(&'-') {
                break;
            }
            if c == '#' {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].is_alphanumeric() {
                    i += 1;
                }
                out.push(Token { tok: Tok::Pragma(chars[start..i].iter().collect()), span, width: (i - start) as u32 });
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let n = text.parse().map_err(|_| ParseError {
                    line: span.line,
                    col: span.col,
                    expected: "a numeral that fits in 64 bits".into(),
                })?;
                out.push(Token { tok: Tok::Num(n), span, width: (i - start) as u32 });
                continue;
            }
            if ident_start(c) {
                let start = i;
                i += 1;
                while i < chars.len() && ident_char(chars[i]) {
                    // `->` and `--` end an identifier.
                    if chars[i] == '-' && matches!(chars.get(i + 1), Some('>') | Some('-')) {
                        break;
                    }
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let tok = if text == "_" { Tok::Sym("_") } else { Tok::Ident(text.into()) };
                out.push(Token { tok, span, width: (i - start) as u32 });
                continue;
            }
            match SYMBOLS.iter().find(|s| line[char_offset(line, i)..].starts_with(**s)) {
                Some(s) => {
                    out.push(Token { tok: Tok::Sym(s), span, width: s.len() as u32 });
                    i += s.chars().count();
                }
                None => {
                    return Err(ParseError { line: span.line, col: span.col, expected: format!("a token, found `{c}`") })
                }
            }
        }
    }
    let end = Span { line: src.lines().count() as u32 + 1, col: 1 };
    out.push(Token { tok: Tok::Eof, span: end, width: 0 });
    Ok(out)
}

fn char_offset(s: &str, chars: usize) -> usize {
    s.char_indices().nth(chars).map_or(s.len(), |(b, _)| b)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// End of the current declaration (exclusive).
    end: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        if self.pos >= self.end {
            &Tok::Eof
        } else {
            &self.toks[self.pos].tok
        }
    }

    /// Position of the next token, or just past the last one.
    fn span(&self) -> Span {
        if self.pos < self.end || self.end == 0 {
            return self.toks[self.pos.min(self.end)].span;
        }
        let last = &self.toks[self.end - 1];
        Span { line: last.span.line, col: last.span.col + last.width }
    }

    fn err<T>(&self, expected: &str) -> PResult<T> {
        let s = self.span();
        Err(ParseError { line: s.line, col: s.col, expected: expected.into() })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> PResult<()> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(&format!("`{s}`"))
        }
    }

    fn is_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if &**x == k)
    }

    fn ident(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(x) if !KEYWORDS.contains(&&*x) => {
                self.pos += 1;
                Ok(x)
            }
            _ => self.err("an identifier"),
        }
    }

    fn binder_name(&mut self) -> PResult<Name> {
        if self.eat("_") {
            Ok("_".into())
        } else {
            self.ident()
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        if self.eat("\\") {
            let mut binders = Vec::new();
            loop {
                if self.eat("{") {
                    binders.push((self.binder_name()?, Icit::Impl));
                    self.expect("}")?;
                } else if matches!(self.peek(), Tok::Ident(_)) || self.is_sym("_") {
                    binders.push((self.binder_name()?, Icit::Expl));
                } else {
                    break;
                }
            }
            if binders.is_empty() {
                return self.err("a lambda binder");
            }
            self.expect(".")?;
            let body = self.expr()?;
            return Ok(binders.into_iter().rev().fold(body, |b, (x, i)| Expr::Lam(x, i, Box::new(b))));
        }
        if self.is_keyword("let") {
            self.pos += 1;
            let x = self.ident()?;
            let ann = if self.eat(":") { Some(Box::new(self.expr()?)) } else { None };
            self.expect("=")?;
            let d = self.expr()?;
            if !self.is_keyword("in") {
                return self.err("`in`");
            }
            self.pos += 1;
            let body = self.expr()?;
            return Ok(Expr::Let(x, ann, Box::new(d), Box::new(body)));
        }
        if let Some(groups) = self.try_telescope()? {
            let arrow = if self.eat("->") {
                true
            } else if self.eat("*") {
                false
            } else {
                return self.err("`->` or `*` after a binder group");
            };
            let body = if arrow { self.expr()? } else { self.sigma()? };
            let e = groups.into_iter().rev().fold(body, |b, (x, i, a)| {
                if arrow {
                    Expr::Pi(x, i, Box::new(a), Box::new(b))
                } else {
                    Expr::Sigma(x, Box::new(a), Box::new(b))
                }
            });
            if !arrow && self.eat("->") {
                let cod = self.expr()?;
                return Ok(Expr::Pi("_".into(), Icit::Expl, Box::new(e), Box::new(cod)));
            }
            return Ok(e);
        }
        let dom = self.sigma()?;
        if self.eat("->") {
            let cod = self.expr()?;
            return Ok(Expr::Pi("_".into(), Icit::Expl, Box::new(dom), Box::new(cod)));
        }
        Ok(dom)
    }

    /// Binder groups `(x y : A)` / `{x : A}` directly followed by `->` or `*`.
    fn try_telescope(&mut self) -> PResult<Option<Vec<(Name, Icit, Expr)>>> {
        let save = self.pos;
        let mut out = Vec::new();
        loop {
            let icit = if self.is_sym("(") {
                Icit::Expl
            } else if self.is_sym("{") {
                Icit::Impl
            } else {
                break;
            };
            let group_start = self.pos;
            self.pos += 1;
            let mut names = Vec::new();
            while matches!(self.peek(), Tok::Ident(_)) || self.is_sym("_") {
                match self.binder_name() {
                    Ok(x) => names.push(x),
                    Err(_) => break,
                }
            }
            if names.is_empty() || !self.eat(":") {
                self.pos = group_start;
                break;
            }
            let ty = self.expr()?;
            let close = if icit == Icit::Expl { ")" } else { "}" };
            if !self.eat(close) {
                // Not a binder group after all, for example `(x : A , b)`.
                self.pos = group_start;
                break;
            }
            for x in names {
                out.push((x, icit, ty.clone()));
            }
        }
        if !out.is_empty() && (self.is_sym("->") || self.is_sym("*")) {
            return Ok(Some(out));
        }
        self.pos = save;
        Ok(None)
    }

    fn sigma(&mut self) -> PResult<Expr> {
        let a = self.app()?;
        if self.eat("*") {
            let b = self.sigma()?;
            return Ok(Expr::Sigma("_".into(), Box::new(a), Box::new(b)));
        }
        Ok(a)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(x) => !KEYWORDS.contains(&&**x),
            Tok::Num(_) => true,
            Tok::Sym(s) => matches!(*s, "(" | "_"),
            _ => false,
        }
    }

    fn app(&mut self) -> PResult<Expr> {
        let mut f = self.atom()?;
        loop {
            if self.eat("{") {
                let a = self.expr()?;
                self.expect("}")?;
                f = Expr::app(f, a, Icit::Impl);
            } else if self.starts_atom() {
                let a = self.atom()?;
                f = Expr::app(f, a, Icit::Expl);
            } else {
                return Ok(f);
            }
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.pos += 1;
                Ok(Expr::Num(n, span))
            }
            Tok::Sym("_") => {
                self.pos += 1;
                Ok(Expr::Hole(span))
            }
            Tok::Ident(_) => Ok(Expr::Ident(self.ident()?, span)),
            Tok::Sym("(") => {
                self.pos += 1;
                let e = self.expr()?;
                if self.eat(":") {
                    let t = self.expr()?;
                    self.expect(")")?;
                    return Ok(Expr::Ann(Box::new(e), Box::new(t)));
                }
                let mut items = vec![e];
                while self.eat(",") {
                    items.push(self.expr()?);
                }
                self.expect(")")?;
                let last = items.pop().expect("nonempty");
                Ok(items.into_iter().rev().fold(last, |b, a| Expr::Pair(Box::new(a), Box::new(b))))
            }
            _ => self.err("an expression"),
        }
    }

    fn pattern(&mut self, nested: bool) -> PResult<SPattern> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.pos += 1;
                Ok(SPattern::Num(n, span))
            }
            Tok::Sym("_") => {
                self.pos += 1;
                Ok(SPattern::Var("_".into(), span))
            }
            Tok::Ident(x) if matches!(&*x, "zero" | "nil") => {
                self.pos += 1;
                Ok(SPattern::Ctor(x, Vec::new(), span))
            }
            Tok::Ident(x) if nested && matches!(&*x, "suc" | "cons") => {
                self.pos += 1;
                let arity = if &*x == "suc" { 1 } else { 2 };
                let mut ps = Vec::new();
                for _ in 0..arity {
                    ps.push(self.pattern(false)?);
                }
                Ok(SPattern::Ctor(x, ps, span))
            }
            Tok::Ident(_) => Ok(SPattern::Var(self.ident()?, span)),
            Tok::Sym("(") => {
                self.pos += 1;
                let p = self.pattern(true)?;
                self.expect(")")?;
                Ok(p)
            }
            _ => self.err("a pattern"),
        }
    }

    fn decl(&mut self) -> PResult<Decl> {
        let span = self.span();
        if let Tok::Pragma(p) = self.peek().clone() {
            if p != "#expect" {
                return self.err("`#expect`");
            }
            self.pos += 1;
            let tag = match self.peek() {
                Tok::Ident(x) if &**x == "ok" => Expect::Ok,
                Tok::Ident(x) if &**x == "unsolved" => Expect::Unsolved,
                Tok::Ident(x) if &**x == "typeerror" => Expect::TypeError,
                _ => return self.err("`ok`, `unsolved` or `typeerror`"),
            };
            self.pos += 1;
            return Ok(Decl::Expect { tag, span });
        }
        if self.is_keyword("postulate") {
            self.pos += 1;
            let name = self.ident()?;
            self.expect(":")?;
            let ty = self.expr()?;
            return Ok(Decl::Postulate { name, ty, span });
        }
        let name = self.binder_name()?;
        if self.eat(":") {
            let ty = self.expr()?;
            return Ok(Decl::Sig { name, ty, span });
        }
        let mut pats = Vec::new();
        while !self.is_sym("=") {
            if self.eat("{") {
                pats.push((self.pattern(true)?, Icit::Impl));
                self.expect("}")?;
            } else {
                pats.push((self.pattern(false)?, Icit::Expl));
            }
        }
        self.expect("=")?;
        let rhs = self.expr()?;
        Ok(Decl::Clause { name, pats, rhs, span })
    }
}

/// Parses a whole file.
pub fn parse_file(src: &str) -> Result<Vec<Decl>, ParseError> {
    let toks = lex(src)?;
    let starts: Vec<usize> = (0..toks.len()).filter(|&i| toks[i].span.col == 1 && toks[i].tok != Tok::Eof).collect();
    if let Some(first) = toks.first() {
        if first.tok != Tok::Eof && first.span.col != 1 {
            return Err(ParseError {
                line: first.span.line,
                col: first.span.col,
                expected: "a declaration starting in column 1".into(),
            });
        }
    }
    let mut decls = Vec::new();
    for (k, &start) in starts.iter().enumerate() {
        let end = starts.get(k + 1).copied().unwrap_or(toks.len() - 1);
        let mut p = Parser { toks: toks.clone(), pos: start, end };
        let d = p.decl()?;
        if p.pos != end {
            return p.err("the end of the declaration");
        }
        decls.push(d);
    }
    Ok(decls)
}

/// Parses a single expression, as used by tests and the command line.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let end = toks.len() - 1;
    let mut p = Parser { toks, pos: 0, end };
    let e = p.expr()?;
    if p.pos != end {
        return p.err("the end of the expression");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anonymous_test_pair() {
        let ds = parse_file("_ : Id Set (_ -> _) (Nat -> Nat)\n_ = refl\n").unwrap();
        assert_eq!(ds.len(), 2);
        assert!(matches!(&ds[0], Decl::Sig { name, .. } if &**name == "_"));
        assert!(matches!(&ds[1], Decl::Clause { name, pats, .. } if &**name == "_" && pats.is_empty()));
    }

    #[test]
    fn plus_clauses() {
        let src = "plus : Nat -> Nat -> Nat\nplus zero n = n\nplus (suc m) n = suc (plus m n)\n";
        let ds = parse_file(src).unwrap();
        assert_eq!(ds.len(), 3);
        match &ds[2] {
            Decl::Clause { pats, .. } => {
                assert_eq!(pats.len(), 2);
                assert!(matches!(&pats[0].0, SPattern::Ctor(c, ps, _) if &**c == "suc" && ps.len() == 1));
            }
            d => panic!("unexpected {d:?}"),
        }
    }

    #[test]
    fn unterminated_binder() {
        // Reported at the end of the input, just after the arrow.
        let e = parse_file("x : (x : Nat ->\n").unwrap_err();
        assert_eq!(e.line, 1);
        assert_eq!(e.col, 16);
    }

    #[test]
    fn identifiers_with_dashes_and_arrows() {
        let e = parse_expr("zw-aux n->m").unwrap();
        assert_eq!(e.to_string(), "zw-aux n -> m");
        assert_eq!(parse_expr("two+three").unwrap().to_string(), "two+three");
    }

    #[test]
    fn telescopes_and_pairs() {
        let e = parse_expr("(x y : Nat) {A : Set} -> (a , b , tt)").unwrap();
        assert_eq!(e.to_string(), "(x : Nat) -> (y : Nat) -> {A : Set} -> (a , b , tt)");
        let e = parse_expr("(x : A) * B x -> C").unwrap();
        assert_eq!(e.to_string(), "(x : A) * B x -> C");
        let e = parse_expr("(f x : A)").unwrap();
        assert!(matches!(e, Expr::Ann(..)));
    }

    #[test]
    fn comments_and_continuations() {
        let src = "-- heading\nf : Nat\n  -> Nat -- trailing\nf n = n\n";
        let ds = parse_file(src).unwrap();
        assert_eq!(ds.len(), 2);
    }
}
