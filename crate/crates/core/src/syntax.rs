//! Tokenizer and the parsing pieces shared by formulas, processes and
//! transducers: patterns, conditions and concrete actions.

use crate::error::{Error, Result};
use crate::symbolic::{name, Action, Cond, Dir, Domain, Name, OutLabel, Pattern, Slot, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LAngle,
    RAngle,
    LBrace,
    RBrace,
    Dot,
    Comma,
    Question,
    Bang,
    Eq,
    Neq,
    AndAnd,
    OrOr,
    Plus,
    Star,
    Arrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::LAngle => "<",
            Tok::RAngle => ">",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Dot => ".",
            Tok::Comma => ",",
            Tok::Question => "?",
            Tok::Bang => "!",
            Tok::Eq => "=",
            Tok::Neq => "!=",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Plus => "+",
            Tok::Star => "*",
            Tok::Arrow => "->",
            Tok::Ident(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Splits `src` into tokens. `line0` offsets reported line numbers, for text
/// embedded in a larger file.
pub(crate) fn lex(src: &str, line0: usize) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, line0, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let (tok, width) = match two.as_str() {
            "!=" => (Tok::Neq, 2),
            "==" => (Tok::Eq, 2),
            "&&" => (Tok::AndAnd, 2),
            "||" => (Tok::OrOr, 2),
            "->" => (Tok::Arrow, 2),
            _ => match c {
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '[' => (Tok::LBrack, 1),
                ']' => (Tok::RBrack, 1),
                '<' => (Tok::LAngle, 1),
                '>' => (Tok::RAngle, 1),
                '{' => (Tok::LBrace, 1),
                '}' => (Tok::RBrace, 1),
                '.' => (Tok::Dot, 1),
                ',' => (Tok::Comma, 1),
                '?' => (Tok::Question, 1),
                '!' => (Tok::Bang, 1),
                '=' => (Tok::Eq, 1),
                '+' => (Tok::Plus, 1),
                '*' | '•' => (Tok::Star, 1),
                c if is_ident_char(c) => {
                    let mut j = i;
                    while j < chars.len() && is_ident_char(chars[j]) {
                        j += 1;
                    }
                    let s: String = chars[i..j].iter().collect();
                    (Tok::Ident(s), j - i)
                }
                other => return Err(Error::parse(line, col, format!("unexpected character `{other}`"))),
            },
        };
        out.push(Spanned { tok, line, col: start_col });
        i += width;
        col += width;
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

pub(crate) const KEYWORDS: &[&str] = &["tt", "ff", "max", "min", "rec", "nil", "id", "when", "true", "false", "tau"];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Recursive-descent cursor with data-variable scope tracking.
pub(crate) struct Parser<'d> {
    toks: Vec<Spanned>,
    pos: usize,
    pub domain: Option<&'d Domain>,
    pub scope: Vec<Name>,
}

impl<'d> Parser<'d> {
    pub fn new(src: &str, line0: usize, domain: Option<&'d Domain>) -> Result<Self> {
        Ok(Parser { toks: lex(src, line0)?, pos: 0, domain, scope: Vec::new() })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn bump_back(&mut self) {
        self.pos = self.pos.saturating_sub(1);
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        let s = &self.toks[self.pos];
        Error::parse(s.line, s.col, msg)
    }

    pub fn unexpected(&self, wanted: &str) -> Error {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, t: &Tok) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{}`", t.text())))
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    /// A non-keyword identifier.
    pub fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    pub fn finish(&self) -> Result<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn value_or_var(&self, s: &str) -> Result<Term> {
        if self.scope.iter().rev().any(|v| v.as_ref() == s) {
            return Ok(Term::Var(name(s)));
        }
        match self.domain {
            Some(d) if !d.is_value(s) => Err(self.error(Error::UnboundDataVar(s.to_string()).to_string())),
            _ => Ok(Term::Val(name(s))),
        }
    }

    fn slot(&mut self, binders: &mut Vec<Name>) -> Result<Slot> {
        if self.eat(&Tok::LParen) {
            let x = self.ident("a binder name")?;
            if binders.iter().any(|b| b.as_ref() == x) {
                return Err(self.error(format!("binder `{x}` occurs twice in one pattern")));
            }
            self.expect(&Tok::RParen)?;
            let x = name(&x);
            binders.push(x.clone());
            return Ok(Slot::Bind(x));
        }
        let s = self.ident("a port, payload or variable")?;
        // The previous token position is used for errors on this slot.
        self.pos -= 1;
        let term = self.value_or_var(&s)?;
        self.pos += 1;
        Ok(match term {
            Term::Var(x) => Slot::Var(x),
            Term::Val(v) => Slot::Lit(v),
        })
    }

    /// `*`, or `slot (?|!) slot`. Returns the pattern and the names it binds.
    pub fn pattern(&mut self) -> Result<(Pattern, Vec<Name>)> {
        if self.eat(&Tok::Star) {
            return Ok((Pattern::Insert, vec![]));
        }
        let mut binders = Vec::new();
        let port = self.slot(&mut binders)?;
        let dir = match self.bump() {
            Tok::Question => Dir::Input,
            Tok::Bang => Dir::Output,
            _ => {
                self.pos -= 1;
                return Err(self.unexpected("`?` or `!`"));
            }
        };
        let payload = self.slot(&mut binders)?;
        Ok((Pattern::Act { port, dir, payload }, binders))
    }

    /// Parses a pattern, pushes its binders into scope, then an optional
    /// `when` condition. The caller pops the binders.
    pub fn sym_action(&mut self) -> Result<(Pattern, Cond, usize)> {
        let (pattern, binders) = self.pattern()?;
        let n = binders.len();
        self.scope.extend(binders);
        let cond = if self.eat_keyword("when") { self.cond()? } else { Cond::True };
        Ok((pattern, cond, n))
    }

    pub fn pop_scope(&mut self, n: usize) {
        let len = self.scope.len();
        self.scope.truncate(len - n);
    }

    pub fn cond(&mut self) -> Result<Cond> {
        let mut parts = vec![self.cond_and()?];
        while self.eat(&Tok::OrOr) {
            parts.push(self.cond_and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Cond::Or(parts) })
    }

    fn cond_and(&mut self) -> Result<Cond> {
        let mut parts = vec![self.cond_unary()?];
        while self.eat(&Tok::AndAnd) {
            parts.push(self.cond_unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Cond::And(parts) })
    }

    fn cond_unary(&mut self) -> Result<Cond> {
        if self.eat(&Tok::Bang) {
            return Ok(Cond::Not(Box::new(self.cond_unary()?)));
        }
        if self.eat_keyword("true") {
            return Ok(Cond::True);
        }
        if self.eat_keyword("false") {
            return Ok(Cond::False);
        }
        if self.eat(&Tok::LParen) {
            let c = self.cond()?;
            self.expect(&Tok::RParen)?;
            return Ok(c);
        }
        let lhs = self.term()?;
        let eq = match self.bump() {
            Tok::Eq => true,
            Tok::Neq => false,
            _ => {
                self.pos -= 1;
                return Err(self.unexpected("`=` or `!=`"));
            }
        };
        let rhs = self.term()?;
        Ok(if eq { Cond::Eq(lhs, rhs) } else { Cond::Neq(lhs, rhs) })
    }

    fn term(&mut self) -> Result<Term> {
        let s = self.ident("a variable or value")?;
        self.pos -= 1;
        let t = self.value_or_var(&s)?;
        self.pos += 1;
        Ok(t)
    }

    /// A concrete action `port?payload` / `port!payload`.
    pub fn action(&mut self) -> Result<Action> {
        let port = self.ident("a port")?;
        let dir = match self.bump() {
            Tok::Question => Dir::Input,
            Tok::Bang => Dir::Output,
            _ => {
                self.pos -= 1;
                return Err(self.unexpected("`?` or `!`"));
            }
        };
        let payload = self.ident("a payload")?;
        let a = Action::new(&port, dir, &payload);
        if let Some(d) = self.domain {
            if !d.contains(&a) {
                self.pos -= 3;
                let e = self.error(Error::OutsideDomain(a.to_string()).to_string());
                return Err(e);
            }
        }
        Ok(a)
    }

    /// `tau` or a concrete action.
    pub fn out_label(&mut self) -> Result<OutLabel> {
        if self.eat_keyword("tau") {
            Ok(OutLabel::Tau)
        } else {
            Ok(OutLabel::Act(self.action()?))
        }
    }
}

pub fn parse_action(text: &str, domain: Option<&Domain>) -> Result<Action> {
    let mut p = Parser::new(text, 1, domain)?;
    let a = p.action()?;
    p.finish()?;
    Ok(a)
}

pub fn parse_label(text: &str, domain: Option<&Domain>) -> Result<OutLabel> {
    let mut p = Parser::new(text, 1, domain)?;
    let a = p.out_label()?;
    p.finish()?;
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_operators() {
        let toks: Vec<Tok> = lex("[(x)?req when x!=j]X && <a!b>ff", 1).unwrap().into_iter().map(|s| s.tok).collect();
        assert!(toks.contains(&Tok::Neq));
        assert!(toks.contains(&Tok::AndAnd));
        assert!(toks.contains(&Tok::LAngle));
        assert_eq!(toks.last(), Some(&Tok::Eof));
    }

    #[test]
    fn rejects_repeated_binder() {
        let mut p = Parser::new("(x)?(x)", 1, None).unwrap();
        assert!(matches!(p.pattern(), Err(Error::Parse { .. })));
    }

    #[test]
    fn action_domain_check() {
        let d = Domain::new(["i"], ["req"]).unwrap();
        assert!(parse_action("i?req", Some(&d)).is_ok());
        assert!(parse_action("k?req", Some(&d)).is_err());
        assert_eq!(parse_label("tau", None).unwrap(), OutLabel::Tau);
    }

    #[test]
    fn error_position() {
        let err = lex("ok\n  $", 1).unwrap_err();
        assert_eq!(err, Error::parse(2, 3, "unexpected character `$`"));
    }
}
