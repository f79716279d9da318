//! Parser and printer for the line-oriented family-definition format.
//!
//! ```text
//! [family]
//! name = "node"
//! flags = holomorphic, minimal
//! p = (0, 0, 0, 0)
//! s_schedule = 1e-3, 2.5e-4, 6.25e-5
//! eps_schedule = 0.2, 0.1, 0.05
//!
//! [chart "fiber"]
//! domain = annulus(1e-5, 0.9)
//! map_c = ( (z - s/z)/2 , (z + s/z)/2 )
//! multiplicity = 1
//! limit = exclude         # only s != 0; `only` marks limit-only charts
//!
//! [implicit "fiber"]
//! P = y^2 - x^3 - s
//! base = x
//! sheets = 2
//! base_domain = disc(0.7)
//! rho_cut = 0.004
//!
//! [branch]
//! branches = (N=1, s=1), (N=1, s=1)
//! ```
//!
//! Expression grammar: `expr := term (('+'|'-') term)*`,
//! `term := factor (('*'|'/') factor)*`, `factor := '-' factor | base ('^' uint)?`,
//! `base := var | number | '(' expr ')' | 're(' expr ')' | 'im(' expr ')'`.
//! Chart expressions use z, zb, s, i; implicit polynomials use x, y, s, i.
//! Division is only allowed by constants, or by powers of z in charts whose
//! domain excludes the origin.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::germ::chart::{ChartMap, Domain, ExplicitChart, ImplicitChart, LimitRole};
use crate::germ::expr::{Expr, Var};
use crate::germ::family::{BranchData, BranchSpec, Chart, Flags, SurfaceFamily};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Str(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Newline,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(v) => format!("number {v}"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Eq => "'='".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::Newline => "end of line".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Sp {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Sp>> {
    let mut out = Vec::new();
    for (li, raw_line) in text.lines().enumerate() {
        let line = li + 1;
        let bytes: Vec<char> = raw_line.chars().collect();
        let mut i = 0usize;
        while i < bytes.len() {
            let c = bytes[i];
            let col = i + 1;
            match c {
                ' ' | '\t' | '\r' => {
                    i += 1;
                }
                '#' => break,
                '[' => {
                    out.push(Sp { tok: Tok::LBracket, line, col });
                    i += 1;
                }
                ']' => {
                    out.push(Sp { tok: Tok::RBracket, line, col });
                    i += 1;
                }
                '(' => {
                    out.push(Sp { tok: Tok::LParen, line, col });
                    i += 1;
                }
                ')' => {
                    out.push(Sp { tok: Tok::RParen, line, col });
                    i += 1;
                }
                ',' => {
                    out.push(Sp { tok: Tok::Comma, line, col });
                    i += 1;
                }
                '=' => {
                    out.push(Sp { tok: Tok::Eq, line, col });
                    i += 1;
                }
                '+' => {
                    out.push(Sp { tok: Tok::Plus, line, col });
                    i += 1;
                }
                '-' => {
                    out.push(Sp { tok: Tok::Minus, line, col });
                    i += 1;
                }
                '*' => {
                    out.push(Sp { tok: Tok::Star, line, col });
                    i += 1;
                }
                '/' => {
                    out.push(Sp { tok: Tok::Slash, line, col });
                    i += 1;
                }
                '^' => {
                    out.push(Sp { tok: Tok::Caret, line, col });
                    i += 1;
                }
                '"' => {
                    let start = i + 1;
                    let mut j = start;
                    while j < bytes.len() && bytes[j] != '"' {
                        j += 1;
                    }
                    if j == bytes.len() {
                        return Err(Error::Syntax {
                            line,
                            col,
                            msg: "unterminated string".into(),
                        });
                    }
                    out.push(Sp {
                        tok: Tok::Str(bytes[start..j].iter().collect()),
                        line,
                        col,
                    });
                    i = j + 1;
                }
                c if c.is_ascii_digit() => {
                    let start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i < bytes.len() && bytes[i] == '.' {
                        i += 1;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                    if i < bytes.len() && (bytes[i] == 'e' || bytes[i] == 'E') {
                        let mut j = i + 1;
                        if j < bytes.len() && (bytes[j] == '+' || bytes[j] == '-') {
                            j += 1;
                        }
                        if j < bytes.len() && bytes[j].is_ascii_digit() {
                            i = j;
                            while i < bytes.len() && bytes[i].is_ascii_digit() {
                                i += 1;
                            }
                        }
                    }
                    let s: String = bytes[start..i].iter().collect();
                    let v: f64 = s.parse().map_err(|_| Error::Syntax {
                        line,
                        col,
                        msg: format!("bad number `{s}`"),
                    })?;
                    out.push(Sp { tok: Tok::Num(v), line, col });
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                        i += 1;
                    }
                    out.push(Sp {
                        tok: Tok::Ident(bytes[start..i].iter().collect()),
                        line,
                        col,
                    });
                }
                other => {
                    return Err(Error::Syntax {
                        line,
                        col,
                        msg: format!("unexpected character `{other}`"),
                    })
                }
            }
        }
        if out.last().map(|s| s.tok != Tok::Newline).unwrap_or(false) {
            out.push(Sp { tok: Tok::Newline, line, col: bytes.len() + 1 });
        }
    }
    out.push(Sp {
        tok: Tok::Newline,
        line: text.lines().count() + 1,
        col: 1,
    });
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
enum ExprCtx {
    Chart,
    Curve,
}

struct Parser {
    toks: Vec<Sp>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Sp {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn bump(&mut self) -> Sp {
        let s = self.toks[self.pos.min(self.toks.len() - 1)].clone();
        self.pos += 1;
        s
    }

    fn syntax<T>(&self, sp: &Sp, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { line: sp.line, col: sp.col, msg: msg.into() })
    }

    fn semantic<T>(&self, sp: &Sp, msg: impl Into<String>) -> Result<T> {
        Err(Error::Semantic { line: sp.line, col: sp.col, msg: msg.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Sp> {
        let sp = self.bump();
        if sp.tok == tok {
            Ok(sp)
        } else {
            self.syntax(&sp, format!("expected {what}, found {}", sp.tok.describe()))
        }
    }

    fn skip_newlines(&mut self) {
        while !self.at_end() && self.peek().tok == Tok::Newline {
            self.pos += 1;
        }
    }

    fn end_line(&mut self) -> Result<()> {
        let sp = self.bump();
        if sp.tok == Tok::Newline {
            Ok(())
        } else {
            self.syntax(&sp, format!("expected end of line, found {}", sp.tok.describe()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Sp)> {
        let sp = self.bump();
        if let Tok::Ident(s) = &sp.tok {
            Ok((s.clone(), sp.clone()))
        } else {
            self.syntax(&sp, format!("expected {what}, found {}", sp.tok.describe()))
        }
    }

    fn signed_number(&mut self) -> Result<f64> {
        let neg = if self.peek().tok == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let sp = self.bump();
        if let Tok::Num(v) = sp.tok {
            Ok(if neg { -v } else { v })
        } else {
            self.syntax(&sp, format!("expected number, found {}", sp.tok.describe()))
        }
    }

    fn number_list(&mut self) -> Result<Vec<f64>> {
        let mut out = vec![self.signed_number()?];
        while self.peek().tok == Tok::Comma {
            self.bump();
            out.push(self.signed_number()?);
        }
        Ok(out)
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self, ctx: ExprCtx) -> Result<Expr> {
        let mut acc = self.term(ctx)?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    acc = Expr::Add(acc.into(), self.term(ctx)?.into());
                }
                Tok::Minus => {
                    self.bump();
                    acc = Expr::Sub(acc.into(), self.term(ctx)?.into());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self, ctx: ExprCtx) -> Result<Expr> {
        let mut acc = self.factor(ctx)?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    acc = Expr::Mul(acc.into(), self.factor(ctx)?.into());
                }
                Tok::Slash => {
                    self.bump();
                    acc = Expr::Div(acc.into(), self.factor(ctx)?.into());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self, ctx: ExprCtx) -> Result<Expr> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            let inner = self.factor(ctx)?;
            return Ok(Expr::neg(inner));
        }
        let base = self.base(ctx)?;
        if self.peek().tok == Tok::Caret {
            let caret = self.bump();
            if self.peek().tok == Tok::Minus {
                return self.semantic(&caret, "negative exponent");
            }
            let sp = self.bump();
            if let Tok::Num(v) = sp.tok {
                if v.fract() != 0.0 || v < 0.0 || v > 64.0 {
                    return self.semantic(&sp, format!("exponent must be a small nonnegative integer, got {v}"));
                }
                return Ok(Expr::pow(base, v as u32));
            }
            return self.syntax(&sp, format!("expected integer exponent, found {}", sp.tok.describe()));
        }
        Ok(base)
    }

    fn base(&mut self, ctx: ExprCtx) -> Result<Expr> {
        let sp = self.bump();
        match &sp.tok {
            Tok::Num(v) => Ok(Expr::Num(*v)),
            Tok::LParen => {
                let e = self.expr(ctx)?;
                let close = self.bump();
                if close.tok != Tok::RParen {
                    return self.syntax(&close, format!("expected ')', found {}", close.tok.describe()));
                }
                Ok(e)
            }
            Tok::Ident(name) => match (name.as_str(), ctx) {
                ("i", _) => Ok(Expr::ImagUnit),
                ("s", _) => Ok(Expr::var(Var::S)),
                ("z", ExprCtx::Chart) => Ok(Expr::var(Var::Z)),
                ("zb", ExprCtx::Chart) => Ok(Expr::var(Var::Zb)),
                ("x", ExprCtx::Curve) => Ok(Expr::var(Var::X)),
                ("y", ExprCtx::Curve) => Ok(Expr::var(Var::Y)),
                ("re" | "im", ExprCtx::Chart) => {
                    let open = self.bump();
                    if open.tok != Tok::LParen {
                        return self.syntax(&open, format!("expected '(', found {}", open.tok.describe()));
                    }
                    let inner = self.expr(ctx)?;
                    let close = self.bump();
                    if close.tok != Tok::RParen {
                        return self.syntax(&close, format!("expected ')', found {}", close.tok.describe()));
                    }
                    Ok(if name == "re" { Expr::re(inner) } else { Expr::im(inner) })
                }
                ("re" | "im", ExprCtx::Curve) => {
                    self.semantic(&sp, "re/im are not allowed in implicit polynomials")
                }
                _ => self.semantic(&sp, format!("unknown variable `{name}`")),
            },
            other => self.syntax(&sp, format!("expected an expression, found {}", other.describe())),
        }
    }

    fn domain(&mut self) -> Result<Domain> {
        let (kind, sp) = self.ident("`annulus` or `disc`")?;
        self.expect(Tok::LParen, "'('")?;
        let d = match kind.as_str() {
            "annulus" => {
                let a = self.signed_number()?;
                self.expect(Tok::Comma, "','")?;
                let b = self.signed_number()?;
                Domain { r_in: a, r_out: b }
            }
            "disc" => Domain::disc(self.signed_number()?),
            _ => return self.semantic(&sp, format!("unknown domain kind `{kind}`")),
        };
        self.expect(Tok::RParen, "')'")?;
        if !(d.r_in >= 0.0 && d.r_out > d.r_in) {
            return self.semantic(&sp, "domain needs 0 <= r_in < r_out");
        }
        Ok(d)
    }
}

/// Division is only allowed by constants, or by a power of z in charts whose
/// domain excludes the origin.
fn validate_divisors(e: &Expr, laurent_ok: bool) -> std::result::Result<(), String> {
    match e {
        Expr::Num(_) | Expr::ImagUnit | Expr::Var(_) => Ok(()),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
            validate_divisors(a, laurent_ok)?;
            validate_divisors(b, laurent_ok)
        }
        Expr::Pow(a, _) | Expr::Re(a) | Expr::Im(a) => validate_divisors(a, laurent_ok),
        Expr::Div(a, b) => {
            validate_divisors(a, laurent_ok)?;
            validate_divisors(b, laurent_ok)?;
            let const_ok = b.as_const().map(|c| c.norm() > 0.0).unwrap_or(false);
            let laurent = match &**b {
                Expr::Var(Var::Z) => true,
                Expr::Pow(inner, _) => matches!(**inner, Expr::Var(Var::Z)),
                _ => false,
            };
            if const_ok || (laurent && laurent_ok) {
                Ok(())
            } else if laurent {
                Err("division by z requires a chart domain excluding the origin".into())
            } else {
                Err(format!("division only by constants or by z, found divisor `{b}`"))
            }
        }
    }
}

/// Parse a family document.
pub fn parse_family(text: &str) -> Result<SurfaceFamily> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };

    let mut name: Option<String> = None;
    let mut flags = Flags::default();
    let mut point: Option<[f64; 4]> = None;
    let mut s_schedule: Vec<f64> = Vec::new();
    let mut eps_schedule: Vec<f64> = Vec::new();
    let mut charts: Vec<Chart> = Vec::new();
    let mut branches: Vec<BranchSpec> = Vec::new();
    let mut seen_family = false;

    p.skip_newlines();
    while !p.at_end() {
        let open = p.expect(Tok::LBracket, "'[' starting a section")?;
        let (section, ssp) = p.ident("section name")?;
        let sect_name = if let Tok::Str(s) = &p.peek().tok {
            let s = s.clone();
            p.bump();
            Some(s)
        } else {
            None
        };
        p.expect(Tok::RBracket, "']'")?;
        p.end_line()?;
        p.skip_newlines();

        match section.as_str() {
            "family" => {
                seen_family = true;
                while !p.at_end() && p.peek().tok != Tok::LBracket {
                    let (key, ksp) = p.ident("key")?;
                    p.expect(Tok::Eq, "'='")?;
                    match key.as_str() {
                        "name" => {
                            let sp = p.bump();
                            if let Tok::Str(s) = &sp.tok {
                                name = Some(s.clone());
                            } else {
                                return p.syntax(&sp, "expected a quoted name");
                            }
                        }
                        "flags" => loop {
                            let (f, fsp) = p.ident("flag")?;
                            match f.as_str() {
                                "holomorphic" => flags.holomorphic = true,
                                "minimal" => flags.minimal = true,
                                "contained_in_r3" => flags.in_r3 = true,
                                "embedded" => flags.embedded = true,
                                _ => return p.semantic(&fsp, format!("unknown flag `{f}`")),
                            }
                            if p.peek().tok == Tok::Comma {
                                p.bump();
                            } else {
                                break;
                            }
                        },
                        "p" => {
                            p.expect(Tok::LParen, "'('")?;
                            let mut v = [0.0; 4];
                            for (k, slot) in v.iter_mut().enumerate() {
                                if k > 0 {
                                    p.expect(Tok::Comma, "','")?;
                                }
                                *slot = p.signed_number()?;
                            }
                            p.expect(Tok::RParen, "')'")?;
                            point = Some(v);
                        }
                        "s_schedule" => s_schedule = p.number_list()?,
                        "eps_schedule" => eps_schedule = p.number_list()?,
                        _ => return p.semantic(&ksp, format!("unknown key `{key}` in [family]")),
                    }
                    p.end_line()?;
                    p.skip_newlines();
                }
            }
            "chart" => {
                let cname = match sect_name {
                    Some(n) => n,
                    None => return p.semantic(&ssp, "chart section needs a name: [chart \"...\"]"),
                };
                let mut domain: Option<Domain> = None;
                let mut map: Option<ChartMap> = None;
                let mut multiplicity = 1u32;
                let mut limit = LimitRole::Both;
                let mut map_sp: Option<Sp> = None;
                while !p.at_end() && p.peek().tok != Tok::LBracket {
                    let (key, ksp) = p.ident("key")?;
                    p.expect(Tok::Eq, "'='")?;
                    match key.as_str() {
                        "domain" => domain = Some(p.domain()?),
                        "map_c" => {
                            map_sp = Some(ksp.clone());
                            p.expect(Tok::LParen, "'('")?;
                            let c1 = p.expr(ExprCtx::Chart)?;
                            p.expect(Tok::Comma, "','")?;
                            let c2 = p.expr(ExprCtx::Chart)?;
                            p.expect(Tok::RParen, "')'")?;
                            map = Some(ChartMap::TwoComplex([c1, c2]));
                        }
                        "map_r" => {
                            map_sp = Some(ksp.clone());
                            p.expect(Tok::LParen, "'('")?;
                            let mut es = Vec::with_capacity(4);
                            for k in 0..4 {
                                if k > 0 {
                                    p.expect(Tok::Comma, "','")?;
                                }
                                es.push(p.expr(ExprCtx::Chart)?);
                            }
                            p.expect(Tok::RParen, "')'")?;
                            let arr: [Expr; 4] = es.try_into().unwrap();
                            map = Some(ChartMap::FourReal(arr));
                        }
                        "multiplicity" => {
                            let v = p.signed_number()?;
                            if v < 1.0 || v.fract() != 0.0 {
                                return p.semantic(&ksp, "multiplicity must be a positive integer");
                            }
                            multiplicity = v as u32;
                        }
                        "limit" => {
                            let (v, vsp) = p.ident("one of only/exclude/both")?;
                            limit = match v.as_str() {
                                "only" => LimitRole::LimitOnly,
                                "exclude" => LimitRole::SmoothOnly,
                                "both" => LimitRole::Both,
                                _ => return p.semantic(&vsp, format!("unknown limit role `{v}`")),
                            };
                        }
                        _ => return p.semantic(&ksp, format!("unknown key `{key}` in [chart]")),
                    }
                    p.end_line()?;
                    p.skip_newlines();
                }
                let dsp = map_sp.unwrap_or(open.clone());
                let domain = match domain {
                    Some(d) => d,
                    None => return p.semantic(&dsp, format!("chart `{cname}` is missing `domain`")),
                };
                let map = match map {
                    Some(m) => m,
                    None => return p.semantic(&dsp, format!("chart `{cname}` is missing `map_c` or `map_r`")),
                };
                let laurent_ok = domain.r_in > 0.0;
                let exprs: Vec<&Expr> = match &map {
                    ChartMap::TwoComplex(cs) => cs.iter().collect(),
                    ChartMap::FourReal(rs) => rs.iter().collect(),
                };
                for e in exprs {
                    if let Err(msg) = validate_divisors(e, laurent_ok) {
                        return p.semantic(&dsp, msg);
                    }
                }
                charts.push(Chart::Explicit(ExplicitChart::new(
                    cname,
                    domain,
                    map,
                    multiplicity,
                    limit,
                )));
            }
            "implicit" => {
                let cname = match sect_name {
                    Some(n) => n,
                    None => return p.semantic(&ssp, "implicit section needs a name: [implicit \"...\"]"),
                };
                let mut poly: Option<Expr> = None;
                let mut base: Option<Var> = None;
                let mut sheets: Option<u32> = None;
                let mut base_domain: Option<Domain> = None;
                let mut rho_cut: Option<f64> = None;
                let mut multiplicity = 1u32;
                let mut limit = LimitRole::Both;
                while !p.at_end() && p.peek().tok != Tok::LBracket {
                    let (key, ksp) = p.ident("key")?;
                    p.expect(Tok::Eq, "'='")?;
                    match key.as_str() {
                        "P" => {
                            let e = p.expr(ExprCtx::Curve)?;
                            if let Err(msg) = validate_divisors(&e, false) {
                                return p.semantic(&ksp, msg);
                            }
                            poly = Some(e);
                        }
                        "base" => {
                            let (v, vsp) = p.ident("x or y")?;
                            base = Some(match v.as_str() {
                                "x" => Var::X,
                                "y" => Var::Y,
                                _ => return p.semantic(&vsp, "base must be x or y"),
                            });
                        }
                        "sheets" => {
                            let v = p.signed_number()?;
                            if v < 1.0 || v.fract() != 0.0 {
                                return p.semantic(&ksp, "sheets must be a positive integer");
                            }
                            sheets = Some(v as u32);
                        }
                        "base_domain" => base_domain = Some(p.domain()?),
                        "rho_cut" => {
                            let v = p.signed_number()?;
                            if v <= 0.0 {
                                return p.semantic(&ksp, "rho_cut must be positive");
                            }
                            rho_cut = Some(v);
                        }
                        "multiplicity" => {
                            let v = p.signed_number()?;
                            if v < 1.0 || v.fract() != 0.0 {
                                return p.semantic(&ksp, "multiplicity must be a positive integer");
                            }
                            multiplicity = v as u32;
                        }
                        "limit" => {
                            let (v, vsp) = p.ident("one of only/exclude/both")?;
                            limit = match v.as_str() {
                                "only" => LimitRole::LimitOnly,
                                "exclude" => LimitRole::SmoothOnly,
                                "both" => LimitRole::Both,
                                _ => return p.semantic(&vsp, format!("unknown limit role `{v}`")),
                            };
                        }
                        _ => return p.semantic(&ksp, format!("unknown key `{key}` in [implicit]")),
                    }
                    p.end_line()?;
                    p.skip_newlines();
                }
                let missing = |what: &str| {
                    Error::Semantic {
                        line: ssp.line,
                        col: ssp.col,
                        msg: format!("implicit chart `{cname}` is missing `{what}`"),
                    }
                };
                let chart = ImplicitChart::new(
                    cname.clone(),
                    poly.ok_or_else(|| missing("P"))?,
                    base.ok_or_else(|| missing("base"))?,
                    sheets.ok_or_else(|| missing("sheets"))?,
                    base_domain.ok_or_else(|| missing("base_domain"))?,
                    rho_cut,
                    multiplicity,
                    limit,
                )?;
                charts.push(Chart::Implicit(chart));
            }
            "branch" => {
                while !p.at_end() && p.peek().tok != Tok::LBracket {
                    let (key, ksp) = p.ident("key")?;
                    p.expect(Tok::Eq, "'='")?;
                    if key != "branches" {
                        return p.semantic(&ksp, format!("unknown key `{key}` in [branch]"));
                    }
                    loop {
                        p.expect(Tok::LParen, "'('")?;
                        let mut n: Option<u32> = None;
                        let mut mult: Option<u32> = None;
                        loop {
                            let (field, fsp) = p.ident("N or s")?;
                            p.expect(Tok::Eq, "'='")?;
                            let v = p.signed_number()?;
                            if v < 1.0 || v.fract() != 0.0 {
                                return p.semantic(&fsp, "branch fields must be positive integers");
                            }
                            match field.as_str() {
                                "N" => n = Some(v as u32),
                                "s" => mult = Some(v as u32),
                                _ => return p.semantic(&fsp, format!("unknown branch field `{field}`")),
                            }
                            if p.peek().tok == Tok::Comma {
                                p.bump();
                            } else {
                                break;
                            }
                        }
                        p.expect(Tok::RParen, "')'")?;
                        let nsp = p.peek().clone();
                        branches.push(BranchSpec {
                            winding: n.ok_or(Error::Semantic {
                                line: nsp.line,
                                col: nsp.col,
                                msg: "branch entry is missing N".into(),
                            })?,
                            multiplicity: mult.unwrap_or(1),
                        });
                        if p.peek().tok == Tok::Comma {
                            p.bump();
                        } else {
                            break;
                        }
                    }
                    p.end_line()?;
                    p.skip_newlines();
                }
            }
            _ => return p.semantic(&ssp, format!("unknown section `[{section}]`")),
        }
        p.skip_newlines();
    }

    if !seen_family {
        return Err(Error::Semantic {
            line: 1,
            col: 1,
            msg: "missing [family] section".into(),
        });
    }
    let fam = SurfaceFamily {
        name: name.ok_or(Error::Semantic {
            line: 1,
            col: 1,
            msg: "missing family name".into(),
        })?,
        flags,
        p: point.unwrap_or([0.0; 4]),
        s_schedule,
        eps_schedule,
        charts,
        branch: BranchData { branches },
    };
    fam.validate()?;
    Ok(fam)
}

/// Print a family back in the document format; `parse_family` of the output
/// reproduces the family structurally.
pub fn print_family(f: &SurfaceFamily) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[family]");
    let _ = writeln!(out, "name = \"{}\"", f.name);
    let flags = f.flags.names();
    if !flags.is_empty() {
        let _ = writeln!(out, "flags = {}", flags.join(", "));
    }
    let _ = writeln!(out, "p = ({}, {}, {}, {})", f.p[0], f.p[1], f.p[2], f.p[3]);
    let fmt_list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
    let _ = writeln!(out, "s_schedule = {}", fmt_list(&f.s_schedule));
    let _ = writeln!(out, "eps_schedule = {}", fmt_list(&f.eps_schedule));
    for chart in &f.charts {
        let _ = writeln!(out);
        match chart {
            Chart::Explicit(c) => {
                let _ = writeln!(out, "[chart \"{}\"]", c.name);
                let _ = writeln!(out, "domain = annulus({}, {})", c.domain.r_in, c.domain.r_out);
                match &c.map {
                    ChartMap::TwoComplex([a, b]) => {
                        let _ = writeln!(out, "map_c = ({a}, {b})");
                    }
                    ChartMap::FourReal([a, b, cc, d]) => {
                        let _ = writeln!(out, "map_r = ({a}, {b}, {cc}, {d})");
                    }
                }
                let _ = writeln!(out, "multiplicity = {}", c.multiplicity);
                let _ = writeln!(out, "limit = {}", limit_name(c.limit));
            }
            Chart::Implicit(c) => {
                let _ = writeln!(out, "[implicit \"{}\"]", c.name);
                let _ = writeln!(out, "P = {}", c.poly);
                let _ = writeln!(out, "base = {}", c.base.name());
                let _ = writeln!(out, "sheets = {}", c.sheets);
                let _ = writeln!(
                    out,
                    "base_domain = annulus({}, {})",
                    c.base_domain.r_in, c.base_domain.r_out
                );
                if let Some(r) = c.rho_cut {
                    let _ = writeln!(out, "rho_cut = {r}");
                }
                let _ = writeln!(out, "multiplicity = {}", c.multiplicity);
                let _ = writeln!(out, "limit = {}", limit_name(c.limit));
            }
        }
    }
    if !f.branch.branches.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "[branch]");
        let entries: Vec<String> = f
            .branch
            .branches
            .iter()
            .map(|b| format!("(N={}, s={})", b.winding, b.multiplicity))
            .collect();
        let _ = writeln!(out, "branches = {}", entries.join(", "));
    }
    out
}

fn limit_name(l: LimitRole) -> &'static str {
    match l {
        LimitRole::Both => "both",
        LimitRole::LimitOnly => "only",
        LimitRole::SmoothOnly => "exclude",
    }
}
