//! Text syntax for systems (`.rplts`) and formulas (`.pml`), plus canonical
//! renderers.
//!
//! System syntax, one transition per declaration:
//!
//! ```text
//! # comment
//! t1 -a-> { 1/2: u, 0.5: nil }
//! idle;
//! ```
//!
//! A bare `name;` declares a state with no transitions, which is only needed
//! when no transition mentions it.
//!
//! Formula syntax: `true`, `!f`, `f & f`, `f | f`, `<a>p f` with the diamond
//! body optional (defaults to `true`).

use num_traits::{CheckedDiv, Zero};

use crate::error::{Error, Result, SourceSpan};
use crate::logic::Formula;
use crate::model::{Prob, RawTransition, Rational, Rplts};

/// State name reserved for the terminal state.
pub const NIL: &str = "nil";

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Minus,
    Arrow,
    LBrace,
    RBrace,
    Colon,
    Comma,
    Semicolon,
    Slash,
    Lt,
    Gt,
    Bang,
    Amp,
    Pipe,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Eof => "end of input".to_owned(),
            Tok::Minus => "`-`".to_owned(),
            Tok::Arrow => "`->`".to_owned(),
            Tok::LBrace => "`{`".to_owned(),
            Tok::RBrace => "`}`".to_owned(),
            Tok::Colon => "`:`".to_owned(),
            Tok::Comma => "`,`".to_owned(),
            Tok::Semicolon => "`;`".to_owned(),
            Tok::Slash => "`/`".to_owned(),
            Tok::Lt => "`<`".to_owned(),
            Tok::Gt => "`>`".to_owned(),
            Tok::Bang => "`!`".to_owned(),
            Tok::Amp => "`&`".to_owned(),
            Tok::Pipe => "`|`".to_owned(),
            Tok::LParen => "`(`".to_owned(),
            Tok::RParen => "`)`".to_owned(),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);
    let mut end = SourceSpan { line, column };
    while let Some(&c) = chars.peek() {
        let span = SourceSpan { line, column };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                bump(&mut chars);
            }
            continue;
        }
        let tok = if is_ident_start(c) {
            let mut s = String::new();
            while let Some(&c) = chars.peek().filter(|c| is_ident_char(**c)) {
                s.push(c);
                bump(&mut chars);
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek().filter(|c| c.is_ascii_digit() || **c == '.') {
                s.push(c);
                bump(&mut chars);
            }
            Tok::Number(s)
        } else {
            bump(&mut chars);
            match c {
                '-' if chars.peek() == Some(&'>') => {
                    bump(&mut chars);
                    Tok::Arrow
                }
                '-' => Tok::Minus,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ':' => Tok::Colon,
                ',' => Tok::Comma,
                ';' => Tok::Semicolon,
                '/' => Tok::Slash,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '!' => Tok::Bang,
                '&' => Tok::Amp,
                '|' => Tok::Pipe,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                other => return Err(Error::syntax(span, format!("unexpected character `{other}`"))),
            }
        };
        out.push((tok, span));
        end = SourceSpan { line, column };
    }
    out.push((Tok::Eof, end));
    Ok(out)
}

/// Exact value of an unsigned integer or decimal literal.
fn literal_value(text: &str, span: SourceSpan) -> Result<Rational> {
    let too_large = || Error::NumberTooLarge {
        literal: text.to_owned(),
        span: Some(span),
    };
    let (int, frac) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int.is_empty() || frac.contains('.') || (text.contains('.') && frac.is_empty()) {
        return Err(Error::syntax(span, format!("malformed number `{text}`")));
    }
    let mut num: i128 = 0;
    let mut den: i128 = 1;
    for d in int.chars().chain(frac.chars()) {
        let digit = i128::from(d.to_digit(10).expect("lexer admits digits only"));
        num = num
            .checked_mul(10)
            .and_then(|n| n.checked_add(digit))
            .ok_or_else(too_large)?;
    }
    for _ in frac.chars() {
        den = den.checked_mul(10).ok_or_else(too_large)?;
    }
    Ok(Rational::new(num, den))
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> Error {
        Error::syntax(
            self.span(),
            format!("expected {wanted}, found {}", self.peek().describe()),
        )
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<SourceSpan> {
        if *self.peek() == tok {
            Ok(self.next().1)
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn ident(&mut self, wanted: &str) -> Result<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.next().1;
                Ok((s, span))
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    /// `INT "/" INT | DECIMAL`, optionally negated (rejected later with a
    /// domain error rather than a syntax error).
    fn rational(&mut self) -> Result<(Rational, SourceSpan)> {
        let start = self.span();
        let negative = if *self.peek() == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        let Tok::Number(text) = self.peek().clone() else {
            return Err(self.unexpected("a probability"));
        };
        let span = self.next().1;
        let mut value = literal_value(&text, span)?;
        if *self.peek() == Tok::Slash {
            self.next();
            let Tok::Number(den_text) = self.peek().clone() else {
                return Err(self.unexpected("a denominator"));
            };
            let den_span = self.next().1;
            let den = literal_value(&den_text, den_span)?;
            if den.is_zero() {
                return Err(Error::syntax(den_span, "zero denominator"));
            }
            value = value.checked_div(&den).ok_or_else(|| Error::NumberTooLarge {
                literal: format!("{text}/{den_text}"),
                span: Some(span),
            })?;
        }
        Ok((if negative { -value } else { value }, start))
    }

    fn system(&mut self) -> Result<Rplts> {
        let mut raw = Vec::new();
        let mut spans = Vec::new();
        let mut isolated = Vec::new();
        while *self.peek() != Tok::Eof {
            let (source, span) = self.ident("a state name")?;
            if *self.peek() == Tok::Semicolon {
                self.next();
                isolated.push(source);
                continue;
            }
            if source == NIL {
                return Err(Error::ReservedState {
                    name: source,
                    span: Some(span),
                });
            }
            self.expect(Tok::Minus, "`-`")?;
            let (action, _) = self.ident("an action name")?;
            self.expect(Tok::Arrow, "`->`")?;
            self.expect(Tok::LBrace, "`{`")?;
            let mut targets = Vec::new();
            loop {
                let (p, _) = self.rational()?;
                self.expect(Tok::Colon, "`:`")?;
                let (target, _) = self.ident("a state name")?;
                targets.push((target, p));
                match self.peek() {
                    Tok::Comma => {
                        self.next();
                    }
                    Tok::RBrace => break,
                    _ => return Err(self.unexpected("`,` or `}`")),
                }
            }
            self.next();
            raw.push(RawTransition {
                source,
                action,
                targets,
            });
            spans.push(span);
        }
        let mut sys = Rplts::build_indexed(None, &raw).map_err(|(i, e)| e.located(spans[i]))?;
        for name in isolated {
            sys.ensure_state(&name);
        }
        Ok(sys)
    }

    fn formula(&mut self) -> Result<Formula> {
        let first = self.unary()?;
        let op = match self.peek() {
            Tok::Amp => Tok::Amp,
            Tok::Pipe => Tok::Pipe,
            _ => return Ok(first),
        };
        let mut acc = first;
        loop {
            match self.peek() {
                t if *t == op => {
                    self.next();
                    let rhs = self.unary()?;
                    acc = if op == Tok::Amp {
                        Formula::and(acc, rhs)
                    } else {
                        Formula::or(acc, rhs)
                    };
                }
                Tok::Amp | Tok::Pipe => {
                    return Err(Error::syntax(
                        self.span(),
                        "mixing `&` and `|` requires parentheses",
                    ))
                }
                _ => return Ok(acc),
            }
        }
    }

    fn starts_unary(&self) -> bool {
        match self.peek() {
            Tok::Bang | Tok::Lt | Tok::LParen => true,
            Tok::Ident(s) => s == "true",
            _ => false,
        }
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Bang => {
                self.next();
                Ok(Formula::neg(self.unary()?))
            }
            Tok::LParen => {
                self.next();
                let inner = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(s) if s == "true" => {
                self.next();
                Ok(Formula::Top)
            }
            Tok::Lt => {
                self.next();
                let (action, _) = self.ident("an action name")?;
                self.expect(Tok::Gt, "`>`")?;
                let (p, span) = self.rational()?;
                let bound = Prob::from_rational(p).map_err(|e| e.located(span))?;
                let body = if self.starts_unary() {
                    self.unary()?
                } else {
                    Formula::Top
                };
                Ok(Formula::diamond(action.as_str(), bound, body))
            }
            _ => Err(self.unexpected("a formula")),
        }
    }
}

pub fn parse_system(text: &str) -> Result<Rplts> {
    Parser::new(text)?.system()
}

pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of formula"));
    }
    Ok(f)
}

/// How probabilities are printed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum NumberStyle {
    /// `num/den`, the canonical form.
    #[default]
    Fraction,
    /// Exact decimals where possible, fractions otherwise.
    Decimal,
}

pub fn render_prob(p: Prob, style: NumberStyle) -> String {
    match style {
        NumberStyle::Fraction => p.to_string(),
        NumberStyle::Decimal => p.to_decimal().unwrap_or_else(|| p.to_string()),
    }
}

pub fn render_formula(f: &Formula) -> String {
    render_formula_with(f, NumberStyle::Fraction)
}

pub fn render_formula_with(f: &Formula, style: NumberStyle) -> String {
    let mut out = String::new();
    write_formula(f, style, &mut out);
    out
}

fn is_binary(f: &Formula) -> bool {
    matches!(f, Formula::And(..) | Formula::Or(..))
}

fn write_operand(f: &Formula, style: NumberStyle, out: &mut String, parens: bool) {
    if parens {
        out.push('(');
        write_formula(f, style, out);
        out.push(')');
    } else {
        write_formula(f, style, out);
    }
}

fn write_formula(f: &Formula, style: NumberStyle, out: &mut String) {
    match f {
        Formula::Top => out.push_str("true"),
        Formula::Neg(g) => {
            out.push('!');
            write_operand(g, style, out, is_binary(g));
        }
        Formula::And(l, r) => {
            write_operand(l, style, out, matches!(**l, Formula::Or(..)));
            out.push_str(" & ");
            write_operand(r, style, out, is_binary(r));
        }
        Formula::Or(l, r) => {
            write_operand(l, style, out, matches!(**l, Formula::And(..)));
            out.push_str(" | ");
            write_operand(r, style, out, is_binary(r));
        }
        Formula::Diamond(a, p, g) => {
            out.push('<');
            out.push_str(a.as_str());
            out.push('>');
            out.push_str(&render_prob(*p, style));
            if **g != Formula::Top {
                out.push(' ');
                write_operand(g, style, out, is_binary(g));
            }
        }
    }
}

/// One line per transition, in state then action order.
pub fn render_system(sys: &Rplts) -> String {
    render_system_with(sys, NumberStyle::Fraction)
}

pub fn render_system_with(sys: &Rplts, style: NumberStyle) -> String {
    let mut out = String::new();
    let mut targeted = vec![false; sys.num_states()];
    for s in sys.states() {
        for (_, d) in sys.transitions(s) {
            for (t, _) in d.entries() {
                targeted[t.index()] = true;
            }
        }
    }
    for s in sys.states() {
        if sys.transitions(s).is_empty() && !targeted[s.index()] {
            out.push_str(&format!("{};\n", sys.state_name(s)));
        }
        for (a, d) in sys.transitions(s) {
            let branches: Vec<String> = d
                .entries()
                .iter()
                .map(|(t, p)| format!("{}: {}", render_prob(*p, style), sys.state_name(*t)))
                .collect();
            out.push_str(&format!(
                "{} -{}-> {{ {} }}\n",
                sys.state_name(s),
                sys.action_name(*a),
                branches.join(", ")
            ));
        }
    }
    out
}
