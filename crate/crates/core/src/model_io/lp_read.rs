//! Reader and evaluator for the CPLEX LP dialect written by the exporter.
//!
//! Supports linear objectives with a `[ ... ] / 2` quadratic bracket,
//! labelled linear rows, `Bounds`, `Binary`/`General` and `SOS` sections.
//! A `\ objective constant: c` comment is added to the objective.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::RowKind;

use super::lp_write::CONSTANT_TAG;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LBracket,
    RBracket,
    Colon,
    DoubleColon,
    Sense(RowKind),
}

fn lex(line: &str, lineno: usize) -> Result<Vec<Tok>> {
    let err = |message: String| Error::LpParse { line: lineno, message };
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '[' => {
                out.push(Tok::LBracket);
                i += 1;
            }
            ']' => {
                out.push(Tok::RBracket);
                i += 1;
            }
            ':' => {
                if chars.get(i + 1) == Some(&':') {
                    out.push(Tok::DoubleColon);
                    i += 2;
                } else {
                    out.push(Tok::Colon);
                    i += 1;
                }
            }
            '<' | '>' | '=' => {
                let next = chars.get(i + 1).copied();
                let (kind, width) = match (c, next) {
                    ('<', Some('=')) | ('=', Some('<')) => (RowKind::Le, 2),
                    ('>', Some('=')) | ('=', Some('>')) => (RowKind::Ge, 2),
                    ('<', _) => (RowKind::Le, 1),
                    ('>', _) => (RowKind::Ge, 1),
                    _ => (RowKind::Eq, 1),
                };
                out.push(Tok::Sense(kind));
                i += width;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() {
                    let d = chars[i];
                    let exp_sign = (d == '+' || d == '-') && matches!(chars[i - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v = s.parse::<f64>().map_err(|_| err(format!("bad number `{s}`")))?;
                out.push(Tok::Num(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || matches!(chars[i], '_' | '.')) {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearExpr {
    pub linear: Vec<(String, f64)>,
    /// Fully scaled quadratic terms, i.e. already divided by 2 for brackets.
    pub quadratic: Vec<(String, String, f64)>,
    pub constant: f64,
}

impl LinearExpr {
    pub fn eval(&self, values: &HashMap<String, f64>) -> Result<f64> {
        let get = |v: &str| {
            values
                .get(v)
                .copied()
                .ok_or_else(|| Error::InvalidLp(format!("no value for variable `{v}`")))
        };
        let mut total = self.constant;
        for (v, c) in &self.linear {
            total += c * get(v)?;
        }
        for (a, b, c) in &self.quadratic {
            total += c * get(a)? * get(b)?;
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpConstraint {
    pub name: String,
    pub expr: LinearExpr,
    pub kind: RowKind,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SosSet {
    pub name: String,
    pub order: u8,
    pub members: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub minimize: bool,
    pub objective: LinearExpr,
    pub constraints: Vec<LpConstraint>,
    /// Explicit bounds; unlisted variables default to `[0, inf)`.
    pub bounds: BTreeMap<String, (f64, f64)>,
    pub binaries: Vec<String>,
    pub generals: Vec<String>,
    pub sos: Vec<SosSet>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binary,
    General,
    Sos,
    End,
}

fn section_header(line: &str) -> Option<(Section, bool)> {
    match line.trim().to_ascii_lowercase().as_str() {
        "minimize" | "minimum" | "min" => Some((Section::Objective, true)),
        "maximize" | "maximum" | "max" => Some((Section::Objective, false)),
        "subject to" | "such that" | "st" | "s.t." => Some((Section::Constraints, true)),
        "bounds" | "bound" => Some((Section::Bounds, true)),
        "binary" | "binaries" | "bin" => Some((Section::Binary, true)),
        "general" | "generals" | "gen" => Some((Section::General, true)),
        "sos" => Some((Section::Sos, true)),
        "end" => Some((Section::End, true)),
        _ => None,
    }
}

struct Cursor {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(0, |(_, l)| *l)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::LpParse {
            line: self.line(),
            message: message.into(),
        }
    }

    fn label(&mut self) -> Option<String> {
        if let (Some(Tok::Ident(name)), Some(Tok::Colon)) = (self.peek(), self.peek2()) {
            let name = name.clone();
            self.pos += 2;
            Some(name)
        } else {
            None
        }
    }

    /// Terms up to a sense token, `]`, or the end of input.
    fn expr(&mut self, scale: f64, into: &mut LinearExpr) -> Result<()> {
        loop {
            let mut sign = 1.0;
            let mut saw_sign = false;
            while let Some(t @ (Tok::Plus | Tok::Minus)) = self.peek() {
                if *t == Tok::Minus {
                    sign = -sign;
                }
                saw_sign = true;
                self.pos += 1;
            }
            match self.peek() {
                None | Some(Tok::Sense(_)) | Some(Tok::RBracket) => {
                    if saw_sign {
                        return Err(self.err("dangling sign"));
                    }
                    return Ok(());
                }
                Some(Tok::LBracket) => {
                    self.pos += 1;
                    let mut inner = LinearExpr::default();
                    self.expr(1.0, &mut inner)?;
                    if self.next() != Some(Tok::RBracket) {
                        return Err(self.err("expected `]`"));
                    }
                    let divisor = if self.peek() == Some(&Tok::Slash) {
                        self.pos += 1;
                        match self.next() {
                            Some(Tok::Num(d)) if d != 0.0 => d,
                            _ => return Err(self.err("expected divisor after `/`")),
                        }
                    } else {
                        1.0
                    };
                    let f = scale * sign / divisor;
                    into.linear.extend(inner.linear.into_iter().map(|(v, c)| (v, c * f)));
                    into.quadratic.extend(inner.quadratic.into_iter().map(|(a, b, c)| (a, b, c * f)));
                    into.constant += inner.constant * f;
                    continue;
                }
                _ => {}
            }
            let mut coef = sign * scale;
            if let Some(Tok::Num(c)) = self.peek() {
                coef *= c;
                self.pos += 1;
            }
            match self.peek().cloned() {
                Some(Tok::Ident(v)) => {
                    self.pos += 1;
                    match self.peek() {
                        Some(Tok::Caret) => {
                            self.pos += 1;
                            match self.next() {
                                Some(Tok::Num(2.0)) => into.quadratic.push((v.clone(), v, coef)),
                                _ => return Err(self.err("only squares are supported")),
                            }
                        }
                        Some(Tok::Star) => {
                            self.pos += 1;
                            match self.next() {
                                Some(Tok::Ident(w)) => into.quadratic.push((v, w, coef)),
                                _ => return Err(self.err("expected variable after `*`")),
                            }
                        }
                        _ => into.linear.push((v, coef)),
                    }
                }
                _ => into.constant += coef,
            }
        }
    }

    fn signed_number(&mut self) -> Result<f64> {
        let mut sign = 1.0;
        while let Some(t @ (Tok::Plus | Tok::Minus)) = self.peek() {
            if *t == Tok::Minus {
                sign = -sign;
            }
            self.pos += 1;
        }
        match self.next() {
            Some(Tok::Num(v)) => Ok(sign * v),
            Some(Tok::Ident(s)) if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity") => {
                Ok(sign * f64::INFINITY)
            }
            _ => Err(self.err("expected a number")),
        }
    }
}

fn parse_bound(toks: Vec<(Tok, usize)>, bounds: &mut BTreeMap<String, (f64, f64)>) -> Result<()> {
    let mut c = Cursor { toks, pos: 0 };
    let entry = |bounds: &mut BTreeMap<String, (f64, f64)>, v: &str| *bounds.entry(v.to_string()).or_insert((0.0, f64::INFINITY));
    let is_var = |t: Option<&Tok>| matches!(t, Some(Tok::Ident(s)) if !matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity"));
    if is_var(c.peek()) {
        let Some(Tok::Ident(v)) = c.next() else { unreachable!() };
        match c.next() {
            Some(Tok::Ident(f)) if f.eq_ignore_ascii_case("free") => {
                bounds.insert(v, (f64::NEG_INFINITY, f64::INFINITY));
            }
            Some(Tok::Sense(kind)) => {
                let val = c.signed_number()?;
                let (lo, hi) = entry(bounds, &v);
                let b = match kind {
                    RowKind::Le => (lo, val),
                    RowKind::Ge => (val, hi),
                    RowKind::Eq => (val, val),
                };
                bounds.insert(v, b);
            }
            _ => return Err(c.err("malformed bound")),
        }
    } else {
        let first = c.signed_number()?;
        let Some(Tok::Sense(k1)) = c.next() else {
            return Err(c.err("malformed bound"));
        };
        let Some(Tok::Ident(v)) = c.next() else {
            return Err(c.err("expected a variable in bound"));
        };
        let (mut lo, mut hi) = entry(bounds, &v);
        match k1 {
            RowKind::Le => lo = first,
            RowKind::Ge => hi = first,
            RowKind::Eq => (lo, hi) = (first, first),
        }
        if let Some(Tok::Sense(k2)) = c.next() {
            let second = c.signed_number()?;
            match k2 {
                RowKind::Le => hi = second,
                RowKind::Ge => lo = second,
                RowKind::Eq => (lo, hi) = (second, second),
            }
        }
        bounds.insert(v, (lo, hi));
    }
    if c.peek().is_some() {
        return Err(c.err("trailing tokens in bound"));
    }
    Ok(())
}

impl LpModel {
    pub fn parse(text: &str) -> Result<Self> {
        let mut section = Section::Preamble;
        let mut minimize = true;
        let mut constant = 0.0;
        let mut obj_toks = Vec::new();
        let mut row_toks = Vec::new();
        let mut bounds = BTreeMap::new();
        let mut binaries = Vec::new();
        let mut generals = Vec::new();
        let mut sos = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let (body, comment) = match raw.find('\\') {
                Some(pos) => (&raw[..pos], Some(&raw[pos + 1..])),
                None => (raw, None),
            };
            if let Some(c) = comment {
                if let Some(rest) = c.trim().strip_prefix(CONSTANT_TAG) {
                    constant += rest.trim().parse::<f64>().map_err(|_| Error::LpParse {
                        line: lineno,
                        message: "bad objective constant".into(),
                    })?;
                }
            }
            if body.trim().is_empty() {
                continue;
            }
            if let Some((s, min)) = section_header(body) {
                if s == Section::Objective {
                    minimize = min;
                }
                section = s;
                continue;
            }
            let toks: Vec<(Tok, usize)> = lex(body, lineno)?.into_iter().map(|t| (t, lineno)).collect();
            match section {
                Section::Preamble => {
                    return Err(Error::LpParse {
                        line: lineno,
                        message: "content before the objective section".into(),
                    })
                }
                Section::Objective => obj_toks.extend(toks),
                Section::Constraints => row_toks.extend(toks),
                Section::Bounds => parse_bound(toks, &mut bounds)?,
                Section::Binary | Section::General => {
                    for (t, l) in toks {
                        match t {
                            Tok::Ident(v) if section == Section::Binary => binaries.push(v),
                            Tok::Ident(v) => generals.push(v),
                            _ => {
                                return Err(Error::LpParse {
                                    line: l,
                                    message: "expected variable names".into(),
                                })
                            }
                        }
                    }
                }
                Section::Sos => {
                    let mut c = Cursor { toks, pos: 0 };
                    let name = c.label().unwrap_or_default();
                    let order = match c.next() {
                        Some(Tok::Ident(s)) if s.eq_ignore_ascii_case("S1") => 1,
                        Some(Tok::Ident(s)) if s.eq_ignore_ascii_case("S2") => 2,
                        _ => return Err(c.err("expected S1 or S2")),
                    };
                    if c.next() != Some(Tok::DoubleColon) {
                        return Err(c.err("expected `::`"));
                    }
                    let mut members = Vec::new();
                    while let Some(Tok::Ident(v)) = c.next() {
                        if c.next() != Some(Tok::Colon) {
                            return Err(c.err("expected `:` after SOS member"));
                        }
                        members.push((v, c.signed_number()?));
                    }
                    sos.push(SosSet { name, order, members });
                }
                Section::End => {
                    return Err(Error::LpParse {
                        line: lineno,
                        message: "content after End".into(),
                    })
                }
            }
        }

        let mut c = Cursor { toks: obj_toks, pos: 0 };
        c.label();
        let mut objective = LinearExpr::default();
        c.expr(1.0, &mut objective)?;
        if c.peek().is_some() {
            return Err(c.err("unexpected token in objective"));
        }
        objective.constant += constant;

        let mut c = Cursor { toks: row_toks, pos: 0 };
        let mut constraints = Vec::new();
        while c.peek().is_some() {
            let name = c.label().unwrap_or_else(|| format!("r{}", constraints.len() + 1));
            let mut expr = LinearExpr::default();
            c.expr(1.0, &mut expr)?;
            let Some(Tok::Sense(kind)) = c.next() else {
                return Err(c.err("expected a row sense"));
            };
            let rhs = c.signed_number()?;
            constraints.push(LpConstraint { name, expr, kind, rhs });
        }

        Ok(Self {
            minimize,
            objective,
            constraints,
            bounds,
            binaries,
            generals,
            sos,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn objective_value(&self, values: &HashMap<String, f64>) -> Result<f64> {
        self.objective.eval(values)
    }

    pub fn bounds_of(&self, var: &str) -> (f64, f64) {
        if self.binaries.iter().any(|b| b == var) {
            let (lo, hi) = self.bounds.get(var).copied().unwrap_or((0.0, 1.0));
            return (lo.max(0.0), hi.min(1.0));
        }
        self.bounds.get(var).copied().unwrap_or((0.0, f64::INFINITY))
    }

    /// Largest violation of rows, bounds, integrality and SOS conditions.
    pub fn max_violation(&self, values: &HashMap<String, f64>) -> Result<f64> {
        let mut worst = 0.0f64;
        for row in &self.constraints {
            let lhs = row.expr.eval(values)?;
            let v = match row.kind {
                RowKind::Le => lhs - row.rhs,
                RowKind::Ge => row.rhs - lhs,
                RowKind::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (var, &val) in values {
            let (lo, hi) = self.bounds_of(var);
            worst = worst.max(lo - val).max(val - hi);
        }
        for var in self.binaries.iter().chain(&self.generals) {
            let val = values
                .get(var)
                .copied()
                .ok_or_else(|| Error::InvalidLp(format!("no value for variable `{var}`")))?;
            worst = worst.max((val - val.round()).abs());
        }
        for set in &self.sos {
            let nonzero: Vec<usize> = set
                .members
                .iter()
                .enumerate()
                .filter(|(_, (v, _))| values.get(v).is_some_and(|x| *x != 0.0))
                .map(|(i, _)| i)
                .collect();
            let ok = match set.order {
                1 => nonzero.len() <= 1,
                _ => nonzero.len() <= 2 && nonzero.windows(2).all(|w| w[1] == w[0] + 1),
            };
            if !ok {
                worst = worst.max(f64::INFINITY);
            }
        }
        Ok(worst)
    }

    pub fn constraint_count(&self, prefix: &str) -> usize {
        self.constraints.iter().filter(|c| c.name.starts_with(prefix)).count()
    }
}
