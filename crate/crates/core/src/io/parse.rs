//! Line-oriented reader for nets and ODE descriptions.

use std::collections::HashMap;

use super::{Diagnostic, ParseErrors};
use crate::expr::{BinOp, Expr, FickleFn, UnOp};
use crate::model::{Net, PlaceId, StaticInterval, TransId, Transition, VarId};
use crate::qss::{Method, OdeSpec, RescaleMode, StateVar};
use crate::rational::Rational;

pub const HEADER: &str = "# dtpn-format 1";

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(Rational),
    Hash(String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

const SYMBOLS: [&str; 21] = [
    "->", ":=", "<=", ">=", "==", "!=", "<", ">", "(", ")", "[", "]", ",", "+", "-", "*", "/", ";",
    ":", "?", "=",
];

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '\''
}

fn lex(line: &str, ln: usize) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = vec![];
    let mut i = 0;
    let err = |col: usize, m: String| Diagnostic {
        line: ln,
        col: col + 1,
        message: m,
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let col = i + 1;
        if c == '#' {
            if chars.get(i + 1).copied().is_some_and(ident_start) {
                let s = i + 1;
                i += 1;
                while i < chars.len() && ident_char(chars[i]) {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Hash(chars[s..i].iter().collect()),
                    col,
                });
                continue;
            }
            break; // trailing comment
        }
        if ident_start(c) {
            let s = i;
            while i < chars.len() && ident_char(chars[i]) {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[s..i].iter().collect()),
                col,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let s = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len()
                && (chars[i] == '.' || chars[i] == '/')
                && chars[i + 1].is_ascii_digit()
            {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[s..i].iter().collect();
            let r = text
                .parse::<Rational>()
                .map_err(|e| err(s, format!("bad number `{text}`: {e}")))?;
            out.push(Token {
                tok: Tok::Num(r),
                col,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                out.push(Token {
                    tok: Tok::Sym(s),
                    col,
                });
                i += s.len();
            }
            None => return Err(err(i, format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

/// Name tables visible to expressions.
#[derive(Default)]
struct Scope {
    places: HashMap<String, PlaceId>,
    vars: HashMap<String, VarId>,
    transitions: HashMap<String, TransId>,
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
    scope: &'a Scope,
    theta: bool,
}

type PResult<T> = Result<T, Diagnostic>;

const KEYWORDS: [&str; 13] = [
    "theta", "true", "false", "inf", "and", "or", "not", "abs", "min", "max", "floor", "if", "old",
];

impl<'a> Cursor<'a> {
    fn new(toks: &'a [Token], line: usize, end_col: usize, scope: &'a Scope) -> Self {
        Cursor {
            toks,
            pos: 0,
            line,
            end_col,
            scope,
            theta: false,
        }
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn err<T>(&self, m: impl Into<String>) -> PResult<T> {
        Err(Diagnostic {
            line: self.line,
            col: self.col(),
            message: m.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.is_sym(s);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        let hit = self.is_kw(s);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn finish(&self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }

    fn rational(&mut self) -> PResult<Rational> {
        let neg = self.eat_sym("-");
        match self.bump() {
            Some(Tok::Num(r)) => Ok(if neg { -r } else { r }),
            _ => {
                self.pos -= 1;
                self.err("expected a number")
            }
        }
    }

    fn natural(&mut self) -> PResult<u32> {
        match self.peek() {
            Some(Tok::Num(r)) if r.is_integer() && !r.is_negative() => {
                let v = r
                    .as_small()
                    .map(|(n, _)| n)
                    .and_then(|n| u32::try_from(n).ok());
                match v {
                    Some(v) => {
                        self.pos += 1;
                        Ok(v)
                    }
                    None => self.err("integer out of range"),
                }
            }
            _ => self.err("expected a non-negative integer"),
        }
    }

    fn place(&mut self) -> PResult<PlaceId> {
        let col = self.col();
        let name = self.ident("a place name")?;
        self.scope.places.get(&name).copied().ok_or(Diagnostic {
            line: self.line,
            col,
            message: format!("unknown place `{name}`"),
        })
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut a = self.and_expr()?;
        while self.eat_kw("or") {
            a = a.or(self.and_expr()?);
        }
        Ok(a)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut a = self.not_expr()?;
        while self.eat_kw("and") {
            a = a.and(self.not_expr()?);
        }
        Ok(a)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.eat_kw("not") {
            return Ok(!self.not_expr()?);
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let a = self.add_expr()?;
        let op = match self.peek() {
            Some(Tok::Sym("<")) => BinOp::Lt,
            Some(Tok::Sym("<=")) => BinOp::Le,
            Some(Tok::Sym(">")) => BinOp::Gt,
            Some(Tok::Sym(">=")) => BinOp::Ge,
            Some(Tok::Sym("==")) => BinOp::Eq,
            Some(Tok::Sym("!=")) => BinOp::Ne,
            _ => return Ok(a),
        };
        self.pos += 1;
        let b = self.add_expr()?;
        if matches!(
            self.peek(),
            Some(Tok::Sym("<" | "<=" | ">" | ">=" | "==" | "!="))
        ) {
            return self.err("comparisons do not chain; add parentheses");
        }
        Ok(Expr::bin(op, a, b))
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut a = self.mul_expr()?;
        loop {
            if self.eat_sym("+") {
                a = a + self.mul_expr()?;
            } else if self.eat_sym("-") {
                a = a - self.mul_expr()?;
            } else {
                return Ok(a);
            }
        }
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut a = self.unary()?;
        loop {
            if self.eat_sym("*") {
                a = a * self.unary()?;
            } else if self.eat_sym("/") {
                a = a / self.unary()?;
            } else {
                return Ok(a);
            }
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            if let Some(Tok::Num(r)) = self.peek() {
                let r = -r.clone();
                self.pos += 1;
                return Ok(Expr::Num(r));
            }
            return Ok(Expr::un(UnOp::Neg, self.unary()?));
        }
        self.atom()
    }

    fn args(&mut self, n: usize) -> PResult<Vec<Expr>> {
        self.expect_sym("(")?;
        let mut v = vec![self.expr()?];
        while v.len() < n {
            self.expect_sym(",")?;
            v.push(self.expr()?);
        }
        self.expect_sym(")")?;
        Ok(v)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let col = self.col();
        let Some(tok) = self.bump() else {
            return self.err("expected an expression");
        };
        let unknown = |m: String| Diagnostic {
            line: self.line,
            col,
            message: m,
        };
        match tok {
            Tok::Num(r) => Ok(Expr::Num(r)),
            Tok::Hash(p) => self
                .scope
                .places
                .get(&p)
                .map(|&p| Expr::Tokens(p))
                .ok_or_else(|| unknown(format!("unknown place `{p}`"))),
            Tok::Sym("(") => {
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(s) => match s.as_str() {
                "theta" if self.theta => Ok(Expr::Theta),
                "theta" => Err(unknown(
                    "theta is only available in fickle functions".into(),
                )),
                "true" => Ok(Expr::Bool(true)),
                "false" => Ok(Expr::Bool(false)),
                "abs" => Ok(self.args(1)?.remove(0).abs()),
                "floor" => Ok(self.args(1)?.remove(0).floor()),
                "min" | "max" => {
                    let mut v = self.args(2)?;
                    let (b, a) = (v.pop().unwrap(), v.pop().unwrap());
                    Ok(if s == "min" { a.min(b) } else { a.max(b) })
                }
                "if" => {
                    let mut v = self.args(3)?;
                    let (c, a, b) = (v.remove(0), v.remove(0), v.remove(0));
                    Ok(Expr::ite(c, a, b))
                }
                "old" => {
                    self.expect_sym("(")?;
                    let col = self.col();
                    let e = match self.bump() {
                        Some(Tok::Hash(p)) => {
                            self.scope.places.get(&p).map(|&p| Expr::OldTokens(p))
                        }
                        Some(Tok::Ident(v)) => self.scope.vars.get(&v).map(|&v| Expr::OldVar(v)),
                        _ => None,
                    };
                    let e = e.ok_or(Diagnostic {
                        line: self.line,
                        col,
                        message: "old() takes a variable or #place".into(),
                    })?;
                    self.expect_sym(")")?;
                    Ok(e)
                }
                "inf" => Err(unknown("`inf` is only allowed as an upper bound".into())),
                _ if KEYWORDS.contains(&s.as_str()) => Err(unknown(format!("unexpected `{s}`"))),
                _ => self
                    .scope
                    .vars
                    .get(&s)
                    .map(|&v| Expr::Var(v))
                    .ok_or_else(|| unknown(format!("unknown variable `{s}`"))),
            },
            Tok::Sym(s) => Err(unknown(format!("unexpected `{s}`"))),
        }
    }

    /// `[LO, HI]` with `HI` possibly `inf`.
    fn interval(&mut self) -> PResult<(Expr, Option<Expr>)> {
        self.expect_sym("[")?;
        let lo = self.expr()?;
        self.expect_sym(",")?;
        let hi = if self.eat_kw("inf") {
            None
        } else {
            Some(self.expr()?)
        };
        self.expect_sym("]")?;
        Ok((lo, hi))
    }
}

struct Line {
    number: usize,
    toks: Vec<Token>,
    end_col: usize,
}

/// Line numbers (1-based) of each declared element.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Spans {
    pub places: Vec<usize>,
    pub variables: Vec<usize>,
    pub transitions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetDocument {
    pub net: Net,
    pub spans: Spans,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Document {
    Net(NetDocument),
    Ode(OdeSpec),
}

fn tokenize(text: &str, errors: &mut Vec<Diagnostic>) -> Vec<Line> {
    let mut lines = vec![];
    let mut first = true;
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if first && trimmed.starts_with("# dtpn-format") {
            first = false;
            if trimmed != HEADER {
                errors.push(Diagnostic {
                    line: number,
                    col: 1,
                    message: format!("unsupported format header `{trimmed}`"),
                });
            }
            continue;
        }
        first = false;
        if trimmed.starts_with('#') {
            continue;
        }
        match lex(raw, number) {
            Ok(toks) if toks.is_empty() => {}
            Ok(toks) => lines.push(Line {
                number,
                toks,
                end_col: raw.chars().count() + 1,
            }),
            Err(d) => errors.push(d),
        }
    }
    lines
}

fn keyword(line: &Line) -> Option<&str> {
    match &line.toks[0].tok {
        Tok::Ident(s) => Some(s),
        _ => None,
    }
}

fn declared_name(line: &Line) -> Option<&str> {
    match line.toks.get(1).map(|t| &t.tok) {
        Some(Tok::Ident(s)) => Some(s),
        _ => None,
    }
}

struct Builder {
    net: Net,
    spans: Spans,
    scope: Scope,
    errors: Vec<Diagnostic>,
    current: Option<TransId>,
    guard_set: Vec<bool>,
    default_set: Vec<bool>,
    // ODE only
    ode: Option<OdeParts>,
}

#[derive(Default)]
struct OdeParts {
    states: Vec<StateVar>,
    method: Option<Method>,
    scale: Option<Rational>,
    stop: Option<Expr>,
    mode: Option<RescaleMode>,
    startup: Option<bool>,
    grid: Option<Rational>,
}

impl Builder {
    fn declare(&mut self, lines: &[Line]) {
        let mut seen_net = false;
        for l in lines {
            let Some(kw) = keyword(l) else { continue };
            let name = declared_name(l).map(str::to_string);
            let dup = |what: &str, n: &str| Diagnostic {
                line: l.number,
                col: l.toks[1].col,
                message: format!("duplicate {what} `{n}`"),
            };
            match (kw, name) {
                ("net" | "ode", Some(n)) => {
                    if seen_net {
                        self.errors.push(Diagnostic {
                            line: l.number,
                            col: 1,
                            message: "more than one net header".into(),
                        });
                    }
                    seen_net = true;
                    self.net.name = n;
                    if kw == "ode" {
                        self.ode = Some(OdeParts::default());
                    }
                }
                ("pl", Some(n)) => {
                    if self.scope.places.contains_key(&n) {
                        self.errors.push(dup("place", &n));
                        continue;
                    }
                    self.scope
                        .places
                        .insert(n.clone(), self.net.add_place(n, 0));
                    self.spans.places.push(l.number);
                }
                ("var", Some(n)) => {
                    if self.scope.vars.contains_key(&n) {
                        self.errors.push(dup("variable", &n));
                        continue;
                    }
                    self.scope
                        .vars
                        .insert(n.clone(), self.net.add_variable(n, Rational::zero()));
                    self.spans.variables.push(l.number);
                }
                ("tr", Some(n)) => {
                    if self.scope.transitions.contains_key(&n) {
                        self.errors.push(dup("transition", &n));
                        continue;
                    }
                    self.scope.transitions.insert(
                        n.clone(),
                        self.net
                            .add_transition(Transition::new(n, Expr::int(0), None)),
                    );
                    self.spans.transitions.push(l.number);
                }
                _ => {}
            }
        }
        if !seen_net {
            self.errors.push(Diagnostic {
                line: 1,
                col: 1,
                message: "missing `net NAME` line".into(),
            });
        }
        self.guard_set = vec![false; self.net.transitions.len()];
        self.default_set = vec![false; self.net.transitions.len()];
    }

    fn line(&mut self, l: &Line, tr_index: &mut usize) -> PResult<()> {
        let mut c = Cursor::new(&l.toks, l.number, l.end_col, &self.scope);
        let kw = match keyword(l) {
            Some(k) => k.to_string(),
            None => return c.err("expected a directive"),
        };
        c.pos = 1;
        let cont = matches!(kw.as_str(), "on" | "do" | "fickle");
        if !cont && kw != "tr" {
            self.current = None;
        }
        match kw.as_str() {
            "net" | "ode" => {
                c.ident("a name")?;
                c.finish()
            }
            "pl" => {
                let p = c.place()?;
                let tokens = if c.eat_sym("(") {
                    let n = c.natural()?;
                    c.expect_sym(")")?;
                    n
                } else {
                    0
                };
                c.finish()?;
                self.net.places[p].initial = tokens;
                Ok(())
            }
            "var" => {
                let name = c.ident("a variable name")?;
                c.expect_sym("=")?;
                let r = c.rational()?;
                c.finish()?;
                self.net.variables[self.scope.vars[&name]].initial = r;
                Ok(())
            }
            "tr" => {
                let t = *tr_index;
                *tr_index += 1;
                self.current = None;
                c.ident("a transition name")?;
                let (lo, hi) = c.interval()?;
                let mut pre = vec![];
                let mut inh = vec![];
                while !c.is_sym("->") {
                    if c.at_end() {
                        return c.err("expected `->`");
                    }
                    let p = c.place()?;
                    if c.eat_sym("?") {
                        if c.natural()? != 0 {
                            return c.err("inhibitor arcs are written `PLACE?0`");
                        }
                        inh.push(p);
                    } else if c.eat_sym("*") {
                        pre.push((p, c.natural()?));
                    } else {
                        pre.push((p, 1));
                    }
                }
                c.expect_sym("->")?;
                let mut post = vec![];
                while !c.at_end() {
                    let p = c.place()?;
                    let w = if c.eat_sym("*") { c.natural()? } else { 1 };
                    post.push((p, w));
                }
                let tr = &mut self.net.transitions[t];
                tr.interval = StaticInterval { lo, hi };
                tr.pre = pre;
                tr.post = post;
                tr.inhibitors = inh;
                self.current = Some(t);
                Ok(())
            }
            "on" | "do" | "fickle" => {
                let Some(t) = self.current else {
                    return c.err(format!("`{kw}` must follow a `tr` line"));
                };
                match kw.as_str() {
                    "on" => {
                        let g = c.expr()?;
                        c.finish()?;
                        if std::mem::replace(&mut self.guard_set[t], true) {
                            return Err(Diagnostic {
                                line: l.number,
                                col: 1,
                                message: "duplicate guard".into(),
                            });
                        }
                        self.net.transitions[t].guard = Some(g);
                    }
                    "do" => loop {
                        let col = c.col();
                        let name = c.ident("a variable name")?;
                        let v = *self.scope.vars.get(&name).ok_or(Diagnostic {
                            line: l.number,
                            col,
                            message: format!("unknown variable `{name}`"),
                        })?;
                        c.expect_sym(":=")?;
                        let e = c.expr()?;
                        self.net.transitions[t].updates.push((v, e));
                        if c.at_end() {
                            break;
                        }
                        c.expect_sym(";")?;
                    },
                    _ => {
                        let trigger = if c.eat_kw("on") {
                            let col = c.col();
                            let name = c.ident("a transition name")?;
                            Some(*self.scope.transitions.get(&name).ok_or(Diagnostic {
                                line: l.number,
                                col,
                                message: format!("unknown transition `{name}`"),
                            })?)
                        } else {
                            None
                        };
                        c.expect_sym(":")?;
                        c.theta = true;
                        let (a, b) = c.interval()?;
                        let Some(b) = b else {
                            return c.err("fickle upper bound must be finite");
                        };
                        let mut f = FickleFn::new(a, b);
                        if c.eat_kw("monotone") {
                            let start = if c.eat_kw("from") {
                                c.rational()?
                            } else {
                                Rational::zero()
                            };
                            f = f.monotone_from(start);
                        }
                        c.finish()?;
                        let spec = &mut self.net.transitions[t].fickle;
                        match trigger {
                            None if std::mem::replace(&mut self.default_set[t], true) => {
                                return Err(Diagnostic {
                                    line: l.number,
                                    col: 1,
                                    message: "duplicate default fickle entry".into(),
                                });
                            }
                            None => spec.default = Some(f),
                            Some(k) if spec.by_trigger.iter().any(|(x, _)| *x == k) => {
                                return Err(Diagnostic {
                                    line: l.number,
                                    col: 1,
                                    message: "duplicate fickle entry for trigger".into(),
                                });
                            }
                            Some(k) => spec.by_trigger.push((k, f)),
                        }
                    }
                }
                Ok(())
            }
            _ if self.ode.is_some() => ode_line(self.ode.as_mut().expect("ode document"), &kw, c),
            _ => c.err(format!("unknown directive `{kw}`")),
        }
    }
}

fn ode_line(ode: &mut OdeParts, kw: &str, mut c: Cursor) -> PResult<()> {
    let line = c.line;
    let var = |c: &mut Cursor| -> PResult<VarId> {
        let col = c.col();
        let name = c.ident("a variable name")?;
        c.scope.vars.get(&name).copied().ok_or(Diagnostic {
            line,
            col,
            message: format!("unknown variable `{name}`"),
        })
    };
    match kw {
        "der" => {
            let v = var(&mut c)?;
            c.expect_sym("=")?;
            let rhs = c.expr()?;
            c.finish()?;
            if ode.states.iter().any(|s| s.var == v) {
                return Err(Diagnostic {
                    line,
                    col: 1,
                    message: "duplicate derivative".into(),
                });
            }
            ode.states.push(StateVar {
                var: v,
                rhs,
                bounds: None,
            });
        }
        "bound" => {
            let v = var(&mut c)?;
            c.expect_sym("[")?;
            let lo = c.rational()?;
            c.expect_sym(",")?;
            let hi = c.rational()?;
            c.expect_sym("]")?;
            c.finish()?;
            if lo > hi {
                return Err(Diagnostic {
                    line,
                    col: 1,
                    message: "empty bounds".into(),
                });
            }
            match ode.states.iter_mut().find(|s| s.var == v) {
                Some(s) => s.bounds = Some((lo, hi)),
                None => {
                    return Err(Diagnostic {
                        line,
                        col: 1,
                        message: "`bound` must follow the variable's `der` line".into(),
                    })
                }
            }
        }
        "method" => {
            let m = if c.eat_kw("qss") {
                Method::Qss {
                    quantum: c.rational()?,
                }
            } else if c.eat_kw("euler") {
                Method::Euler {
                    step: c.rational()?,
                    grid: None,
                }
            } else {
                return c.err("expected `qss` or `euler`");
            };
            c.finish()?;
            ode.method = Some(m);
        }
        "grid" => {
            ode.grid = Some(c.rational()?);
            c.finish()?;
        }
        "scale" => {
            ode.scale = Some(c.rational()?);
            c.finish()?;
        }
        "stop" => {
            ode.stop = Some(c.expr()?);
            c.finish()?;
        }
        "rescale" => {
            ode.mode = Some(if c.eat_kw("physical") {
                RescaleMode::Physical
            } else if c.eat_kw("paper") {
                RescaleMode::RateRatio
            } else {
                return c.err("expected `physical` or `paper`");
            });
            c.finish()?;
        }
        "startup" => {
            ode.startup = Some(if c.eat_kw("on") {
                true
            } else if c.eat_kw("off") {
                false
            } else {
                return c.err("expected `on` or `off`");
            });
            c.finish()?;
        }
        _ => return c.err(format!("unknown directive `{kw}`")),
    }
    Ok(())
}

pub fn parse_document(text: &str) -> Result<Document, ParseErrors> {
    let mut errors = vec![];
    let lines = tokenize(text, &mut errors);
    let mut b = Builder {
        net: Net::new(""),
        spans: Spans::default(),
        scope: Scope::default(),
        errors,
        current: None,
        guard_set: vec![],
        default_set: vec![],
        ode: None,
    };
    b.declare(&lines);
    let mut tr_index = 0;
    for l in &lines {
        if let Err(d) = b.line(l, &mut tr_index) {
            b.errors.push(d);
        }
    }
    if b.errors.is_empty() {
        if let Err(e) = b.net.validate() {
            b.errors.push(Diagnostic {
                line: 1,
                col: 1,
                message: e.to_string(),
            });
        }
    }
    if !b.errors.is_empty() {
        b.errors.sort_by_key(|d| (d.line, d.col));
        return Err(ParseErrors(b.errors));
    }
    match b.ode {
        None => Ok(Document::Net(NetDocument {
            net: b.net,
            spans: b.spans,
        })),
        Some(parts) => {
            let err = |m: &str| {
                ParseErrors(vec![Diagnostic {
                    line: 1,
                    col: 1,
                    message: m.into(),
                }])
            };
            let mut method = parts.method.ok_or_else(|| err("missing `method` line"))?;
            if let (Method::Euler { grid, .. }, Some(g)) = (&mut method, parts.grid) {
                *grid = Some(g);
            }
            if parts.states.is_empty() {
                return Err(err("missing `der` line"));
            }
            let mut spec = OdeSpec::new(b.net, parts.states, method);
            spec.scale = parts.scale.unwrap_or_else(Rational::one);
            spec.stop = parts.stop;
            spec.mode = parts.mode.unwrap_or(RescaleMode::Physical);
            spec.startup = parts.startup.unwrap_or(true);
            Ok(Document::Ode(spec))
        }
    }
}

/// Parses a net document; ODE documents are rejected.
pub fn parse(text: &str) -> Result<NetDocument, ParseErrors> {
    match parse_document(text)? {
        Document::Net(d) => Ok(d),
        Document::Ode(_) => Err(ParseErrors(vec![Diagnostic {
            line: 1,
            col: 1,
            message: "expected a net, found an ODE description".into(),
        }])),
    }
}

pub fn parse_ode(text: &str) -> Result<OdeSpec, ParseErrors> {
    match parse_document(text)? {
        Document::Ode(s) => Ok(s),
        Document::Net(_) => Err(ParseErrors(vec![Diagnostic {
            line: 1,
            col: 1,
            message: "expected an ODE description".into(),
        }])),
    }
}

/// Parses a standalone expression against the names of `net`.
pub fn parse_expr(text: &str, net: &Net, theta: bool) -> Result<Expr, ParseErrors> {
    let toks = lex(text, 1).map_err(|d| ParseErrors(vec![d]))?;
    let scope = Scope {
        places: net
            .places
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.clone(), i))
            .collect(),
        vars: net
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), i))
            .collect(),
        transitions: net
            .transitions
            .iter()
            .enumerate()
            .map(|(i, t)| (t.name.clone(), i))
            .collect(),
    };
    let mut c = Cursor::new(&toks, 1, text.chars().count() + 1, &scope);
    c.theta = theta;
    let e = c
        .expr()
        .and_then(|e| c.finish().map(|_| e))
        .map_err(|d| ParseErrors(vec![d]))?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::print_net;
    use crate::rational::q;

    const SAMPLE: &str = "# dtpn-format 1
net sample
pl p (1)
pl q
var x = 1/2
tr t1 [1,2] p -> q
tr t2 [#q, inf] q*2 p?0 -> p
  on x < 3 and not #p >= 1
  do x := old(x) + 1; x := -x
  fickle on t1 : [theta+1, theta + 1] monotone
  fickle : [max(0, theta - 2), theta] monotone from 1/4
";

    #[test]
    fn sample_parses() {
        let d = parse(SAMPLE).unwrap();
        let n = &d.net;
        assert_eq!(n.name, "sample");
        assert_eq!(n.places[0].initial, 1);
        assert_eq!(n.variables[0].initial, q(1, 2));
        let t2 = &n.transitions[1];
        assert_eq!(t2.pre, vec![(1, 2)]);
        assert_eq!(t2.inhibitors, vec![0]);
        assert_eq!(t2.interval.hi, None);
        assert_eq!(t2.updates.len(), 2);
        assert_eq!(t2.fickle.by_trigger[0].0, 0);
        assert_eq!(t2.fickle.default.as_ref().unwrap().monotone, Some(q(1, 4)));
        assert_eq!(d.spans.transitions, vec![6, 7]);
    }

    #[test]
    fn print_round_trip() {
        let n = parse(SAMPLE).unwrap().net;
        let text = print_net(&n);
        assert_eq!(parse(&text).unwrap().net, n);
        assert_eq!(print_net(&parse(&text).unwrap().net), text);
    }

    #[test]
    fn simple_transition() {
        let n = parse("net n\npl p (1)\npl q\ntr t1 [1,2] p -> q\n")
            .unwrap()
            .net;
        let iv = n.static_interval(0, &n.initial_config(), None).unwrap();
        assert_eq!(iv.to_string(), "[1, 2]");
    }

    #[test]
    fn literals() {
        let n = Net::new("n");
        assert_eq!(parse_expr("0.25", &n, false).unwrap(), Expr::Num(q(1, 4)));
        assert_eq!(parse_expr("-3/4", &n, false).unwrap(), Expr::Num(q(-3, 4)));
        assert_eq!(
            parse_expr("-(3)", &n, false).unwrap(),
            Expr::un(UnOp::Neg, Expr::int(3))
        );
        assert_eq!(
            parse_expr("6 / 2", &n, false).unwrap(),
            Expr::int(6) / Expr::int(2)
        );
    }

    fn first_error(text: &str) -> Diagnostic {
        parse(text).unwrap_err().0.remove(0)
    }

    #[test]
    fn diagnostics() {
        let d = first_error("net n\npl p\ntr t [0,1] r -> p\n");
        assert_eq!((d.line, d.col), (3, 12));
        assert!(d.message.contains("unknown place `r`"));
        let d = first_error("net n\npl p\ntr t [theta,1] p -> p\n");
        assert!(d.message.contains("theta"), "{}", d.message);
        assert_eq!(first_error("net n\non true\n").line, 2);
        assert!(first_error("# dtpn-format 2\nnet n\n")
            .message
            .contains("header"));
        assert!(first_error("net n\npl p\npl p\n")
            .message
            .contains("duplicate place"));
        assert!(
            first_error("net n\nvar x = 1\ntr t [0,1] -> \n  on x < 1 < 2\n")
                .message
                .contains("chain")
        );
        assert!(first_error("pl p\n").message.contains("net NAME"));
    }

    #[test]
    fn ode_document() {
        let text = "ode decay\nvar x = 4000\nder x = -x\nmethod qss 500\nscale 1\nstop x <= 1\n";
        let spec = parse_ode(text).unwrap();
        assert_eq!(spec.states.len(), 1);
        assert_eq!(
            spec.method,
            Method::Qss {
                quantum: 500.into()
            }
        );
        let back = parse_ode(&crate::io::print_ode(&spec)).unwrap();
        assert_eq!(back, spec);
        assert!(parse(text).is_err());
    }
}
