//! Abstract syntax, parser and printer of model documents.

use std::fmt::{self, Write};

use super::{DslError, Pos};
use crate::symexpr::{self, line_col, Expr};

const KEYWORDS: &[&str] =
    &["chart", "metric", "connection", "gauge", "section", "lagrangian", "model", "komar", "check"];
const RESERVED: &[&str] = &["on", "dim", "coords", "fiber", "bounds", "with"];

#[derive(Clone, Debug, PartialEq)]
pub struct Name {
    pub text: String,
    pub pos: Pos,
}

#[derive(Clone, Debug)]
pub struct Entry {
    pub expr: Expr,
    pub pos: Pos,
}

pub type Rows = Vec<Vec<Entry>>;

#[derive(Clone, Debug)]
pub struct MatrixLit {
    pub rows: Rows,
    pub pos: Pos,
}

/// Value of a `key value` line in a model or komar body.
#[derive(Clone, Debug)]
pub enum Value {
    Ident(Name),
    Expr(Entry),
    Matrix(MatrixLit),
}

#[derive(Clone, Debug)]
pub struct Field {
    pub key: Name,
    pub value: Value,
}

#[derive(Clone, Debug)]
pub enum Decl {
    Chart { name: Name, dim: usize, coords: Vec<Name>, bounds: Option<MatrixLit> },
    Metric { name: Name, chart: Name, matrix: MatrixLit },
    Connection { name: Name, chart: Name, fiber: Vec<Name>, blocks: Vec<MatrixLit> },
    Gauge { name: Name, group: Name, chart: Name, matrix: MatrixLit },
    Section { name: Name, chart: Name, comps: MatrixLit },
    Lagrangian { name: Name, chart: Name, fiber: Vec<Name>, metric: Option<Name>, density: Entry },
    Model { name: Name, kind: Name, fields: Vec<Field> },
    Komar { name: Name, fields: Vec<Field> },
    Check { id: Name, subject: Option<Name>, with: Option<Name> },
}

impl Decl {
    /// Declared name; checks have none.
    pub fn name(&self) -> Option<&Name> {
        match self {
            Decl::Chart { name, .. }
            | Decl::Metric { name, .. }
            | Decl::Connection { name, .. }
            | Decl::Gauge { name, .. }
            | Decl::Section { name, .. }
            | Decl::Lagrangian { name, .. }
            | Decl::Model { name, .. }
            | Decl::Komar { name, .. } => Some(name),
            Decl::Check { .. } => None,
        }
    }

    /// Every expression in the declaration, in source order.
    pub fn exprs(&self) -> Vec<&Expr> {
        fn of(m: &MatrixLit) -> Vec<&Expr> {
            m.rows.iter().flatten().map(|e| &e.expr).collect()
        }
        match self {
            Decl::Chart { bounds, .. } => bounds.as_ref().map(of).unwrap_or_default(),
            Decl::Metric { matrix, .. } | Decl::Gauge { matrix, .. } => of(matrix),
            Decl::Section { comps, .. } => of(comps),
            Decl::Connection { blocks, .. } => blocks.iter().flat_map(of).collect(),
            Decl::Lagrangian { density, .. } => vec![&density.expr],
            Decl::Model { fields, .. } | Decl::Komar { fields, .. } => fields
                .iter()
                .flat_map(|f| match &f.value {
                    Value::Ident(_) => Vec::new(),
                    Value::Expr(e) => vec![&e.expr],
                    Value::Matrix(m) => of(m),
                })
                .collect(),
            Decl::Check { .. } => Vec::new(),
        }
    }
}

pub fn parse_decls(text: &str) -> Result<Vec<Decl>, DslError> {
    let mut p = Parser { text, pos: 0 };
    let mut decls = Vec::new();
    loop {
        p.skip_ws(true);
        if p.at_end() {
            return Ok(decls);
        }
        decls.push(p.decl()?);
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl<'a> Parser<'a> {
    fn here(&self) -> Pos {
        self.pos_at(self.pos)
    }

    fn pos_at(&self, offset: usize) -> Pos {
        let (line, col) = line_col(self.text, offset);
        Pos { line, col }
    }

    fn err(&self, message: impl Into<String>) -> DslError {
        DslError::Syntax { pos: self.here(), message: message.into() }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn bump(&mut self) {
        if let Some(c) = self.peek() {
            self.pos += c.len_utf8();
        }
    }

    /// Skips blanks and `#` comments; newlines too when `newlines` is set.
    fn skip_ws(&mut self, newlines: bool) {
        while let Some(c) = self.peek() {
            if c == '#' {
                while self.peek().is_some_and(|c| c != '\n') {
                    self.bump();
                }
            } else if c == '\n' && !newlines {
                return;
            } else if c.is_whitespace() {
                self.bump();
            } else {
                return;
            }
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws(true);
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), DslError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`, found {}", self.describe())))
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some('\n') => "end of line".into(),
            Some(c) => format!("`{c}`"),
        }
    }

    /// Word made of identifier characters and `-`, without consuming it.
    fn peek_word(&mut self, newlines: bool) -> Option<&'a str> {
        self.skip_ws(newlines);
        let rest = &self.text[self.pos..];
        if !rest.starts_with(is_ident_start) {
            return None;
        }
        let end = rest.find(|c: char| !(is_ident_char(c) || c == '-')).unwrap_or(rest.len());
        Some(&rest[..end])
    }

    fn ident_raw(&mut self, newlines: bool) -> Option<Name> {
        self.skip_ws(newlines);
        let rest = &self.text[self.pos..];
        if !rest.starts_with(is_ident_start) {
            return None;
        }
        let end = rest.find(|c: char| !is_ident_char(c)).unwrap_or(rest.len());
        let name = Name { text: rest[..end].to_string(), pos: self.here() };
        self.pos += end;
        Some(name)
    }

    fn ident(&mut self, what: &str) -> Result<Name, DslError> {
        let start = self.pos;
        match self.ident_raw(true) {
            Some(n) if KEYWORDS.contains(&n.text.as_str()) || RESERVED.contains(&n.text.as_str()) => {
                self.pos = start;
                self.skip_ws(true);
                Err(self.err(format!("expected {what}, found keyword `{}`", n.text)))
            }
            Some(n) => Ok(n),
            None => Err(self.err(format!("expected {what}, found {}", self.describe()))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), DslError> {
        let start = self.pos;
        match self.ident_raw(true) {
            Some(n) if n.text == kw => Ok(()),
            _ => {
                self.pos = start;
                self.skip_ws(true);
                Err(self.err(format!("expected `{kw}`, found {}", self.describe())))
            }
        }
    }

    fn try_keyword(&mut self, kw: &str, newlines: bool) -> bool {
        let start = self.pos;
        match self.ident_raw(newlines) {
            Some(n) if n.text == kw => true,
            _ => {
                self.pos = start;
                false
            }
        }
    }

    fn uint(&mut self) -> Result<usize, DslError> {
        self.skip_ws(true);
        let rest = &self.text[self.pos..];
        let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        let n = rest[..end].parse::<usize>().map_err(|_| self.err(format!("expected a number, found {}", self.describe())))?;
        self.pos += end;
        Ok(n)
    }

    /// Identifiers up to the next keyword, brace or line end.
    fn ident_list(&mut self, what: &str) -> Result<Vec<Name>, DslError> {
        let mut out = Vec::new();
        loop {
            let start = self.pos;
            match self.ident_raw(false) {
                Some(n) if KEYWORDS.contains(&n.text.as_str()) || RESERVED.contains(&n.text.as_str()) || n.text == "metric" => {
                    self.pos = start;
                    break;
                }
                Some(n) => out.push(n),
                None => {
                    self.pos = start;
                    break;
                }
            }
        }
        if out.is_empty() {
            self.skip_ws(false);
            return Err(self.err(format!("expected {what}, found {}", self.describe())));
        }
        Ok(out)
    }

    /// Raw expression text up to a terminator at bracket depth 0, parsed by symexpr.
    fn expr_until(&mut self, stops: &[char], stop_at_newline: bool) -> Result<Entry, DslError> {
        self.skip_ws(!stop_at_newline);
        let start = self.pos;
        let mut depth = 0usize;
        while let Some(c) = self.peek() {
            if depth == 0 && (stops.contains(&c) || (stop_at_newline && c == '\n') || c == '#') {
                break;
            }
            match c {
                '(' => depth += 1,
                ')' if depth == 0 => return Err(self.err("unbalanced `)`")),
                ')' => depth -= 1,
                '{' | '}' | '[' | ']' => return Err(self.err(format!("unexpected `{c}` in expression"))),
                _ => {}
            }
            self.bump();
        }
        let raw = &self.text[start..self.pos];
        let lead = raw.len() - raw.trim_start().len();
        if raw.trim().is_empty() {
            return Err(self.err(format!("expected an expression, found {}", self.describe())));
        }
        match symexpr::parse(raw) {
            Ok(expr) => Ok(Entry { expr, pos: self.pos_at(start + lead) }),
            Err(e) => Err(DslError::Syntax { pos: self.pos_at(start + e.offset), message: e.message }),
        }
    }

    fn matrix(&mut self) -> Result<MatrixLit, DslError> {
        self.skip_ws(true);
        let pos = self.here();
        self.expect('[')?;
        let mut rows = vec![Vec::new()];
        loop {
            let e = self.expr_until(&[',', ';', ']'], false)?;
            rows.last_mut().expect("nonempty").push(e);
            self.skip_ws(true);
            match self.peek() {
                Some(',') => self.bump(),
                Some(';') => {
                    self.bump();
                    rows.push(Vec::new());
                }
                Some(']') => {
                    self.bump();
                    break;
                }
                _ => return Err(self.err(format!("expected `,`, `;` or `]`, found {}", self.describe()))),
            }
        }
        Ok(MatrixLit { rows, pos })
    }

    fn braced_matrix(&mut self) -> Result<MatrixLit, DslError> {
        self.expect('{')?;
        let m = self.matrix()?;
        self.expect('}')?;
        Ok(m)
    }

    fn fields(&mut self) -> Result<Vec<Field>, DslError> {
        self.expect('{')?;
        let mut out = Vec::new();
        loop {
            self.skip_ws(true);
            while self.peek() == Some(';') {
                self.bump();
                self.skip_ws(true);
            }
            if self.eat('}') {
                return Ok(out);
            }
            let Some(key) = self.ident_raw(true) else {
                return Err(self.err(format!("expected a field name, found {}", self.describe())));
            };
            self.skip_ws(false);
            let value = match self.peek() {
                Some('[') => Value::Matrix(self.matrix()?),
                _ => {
                    let e = self.expr_until(&[';', '}'], true)?;
                    match e.expr.as_var() {
                        Some(v) if self.text[..self.pos].trim_end().ends_with(v) => {
                            Value::Ident(Name { text: v.to_string(), pos: e.pos })
                        }
                        _ => Value::Expr(e),
                    }
                }
            };
            out.push(Field { key, value });
            self.skip_ws(false);
            match self.peek() {
                Some(';') | Some('\n') => self.bump(),
                Some('}') => {}
                None => return Err(self.err("expected `}`, found end of input")),
                _ => return Err(self.err(format!("expected end of line, found {}", self.describe()))),
            }
        }
    }

    fn decl(&mut self) -> Result<Decl, DslError> {
        self.skip_ws(true);
        let at = self.pos;
        let Some(kw) = self.ident_raw(true) else {
            return Err(self.err(format!("expected a declaration, found {}", self.describe())));
        };
        let decl = match kw.text.as_str() {
            "chart" => {
                let name = self.ident("a chart name")?;
                self.keyword("dim")?;
                let dim = self.uint()?;
                self.keyword("coords")?;
                let coords = self.ident_list("coordinate names")?;
                let bounds = if self.try_keyword("bounds", false) { Some(self.matrix()?) } else { None };
                Decl::Chart { name, dim, coords, bounds }
            }
            "metric" => {
                let name = self.ident("a metric name")?;
                self.keyword("on")?;
                let chart = self.ident("a chart name")?;
                Decl::Metric { name, chart, matrix: self.braced_matrix()? }
            }
            "connection" => {
                let name = self.ident("a connection name")?;
                self.keyword("on")?;
                let chart = self.ident("a chart name")?;
                self.keyword("fiber")?;
                let fiber = self.ident_list("fiber coordinate names")?;
                self.expect('{')?;
                let mut blocks = vec![self.matrix()?];
                while !self.eat('}') {
                    blocks.push(self.matrix()?);
                }
                Decl::Connection { name, chart, fiber, blocks }
            }
            "gauge" => {
                let name = self.ident("a gauge field name")?;
                let group = self.ident("a structure group")?;
                self.keyword("on")?;
                let chart = self.ident("a chart name")?;
                Decl::Gauge { name, group, chart, matrix: self.braced_matrix()? }
            }
            "section" => {
                let name = self.ident("a section name")?;
                self.keyword("on")?;
                let chart = self.ident("a chart name")?;
                Decl::Section { name, chart, comps: self.braced_matrix()? }
            }
            "lagrangian" => {
                let name = self.ident("a Lagrangian name")?;
                self.keyword("on")?;
                let chart = self.ident("a chart name")?;
                self.keyword("fiber")?;
                let fiber = self.ident_list("fiber coordinate names")?;
                let metric = if self.try_keyword("metric", true) { Some(self.ident("a metric name")?) } else { None };
                self.expect('{')?;
                let density = self.expr_until(&['}'], false)?;
                self.expect('}')?;
                Decl::Lagrangian { name, chart, fiber, metric, density }
            }
            "model" => {
                let name = self.ident("a model name")?;
                let kind = self.ident("a model kind")?;
                Decl::Model { name, kind, fields: self.fields()? }
            }
            "komar" => {
                let name = self.ident("a komar block name")?;
                Decl::Komar { name, fields: self.fields()? }
            }
            "check" => {
                self.skip_ws(true);
                let pos = self.here();
                let Some(word) = self.peek_word(true) else {
                    return Err(self.err(format!("expected a check id, found {}", self.describe())));
                };
                let id = Name { text: word.to_string(), pos };
                self.pos += word.len();
                let subject = if self.try_keyword("on", false) { Some(self.ident("an object name")?) } else { None };
                let with = if subject.is_some() && self.try_keyword("with", false) {
                    Some(self.ident("a section name")?)
                } else {
                    None
                };
                Decl::Check { id, subject, with }
            }
            _ => {
                self.pos = at;
                return Err(self.err(format!("unknown declaration `{}`", kw.text)));
            }
        };
        Ok(decl)
    }
}

fn write_matrix(out: &mut String, m: &MatrixLit) -> fmt::Result {
    out.push('[');
    for (r, row) in m.rows.iter().enumerate() {
        if r > 0 {
            out.push_str("; ");
        }
        for (c, e) in row.iter().enumerate() {
            if c > 0 {
                out.push_str(", ");
            }
            write!(out, "{}", e.expr)?;
        }
    }
    out.push(']');
    Ok(())
}

fn names(ns: &[Name]) -> String {
    ns.iter().map(|n| n.text.as_str()).collect::<Vec<_>>().join(" ")
}

fn write_fields(out: &mut String, fields: &[Field]) -> fmt::Result {
    out.push_str(" {\n");
    for f in fields {
        write!(out, "  {} ", f.key.text)?;
        match &f.value {
            Value::Ident(n) => out.push_str(&n.text),
            Value::Expr(e) => write!(out, "{}", e.expr)?,
            Value::Matrix(m) => write_matrix(out, m)?,
        }
        out.push('\n');
    }
    out.push('}');
    Ok(())
}

/// Canonical text of `decls`; parsing it yields numerically equal expressions.
pub fn print_decls(decls: &[Decl]) -> String {
    let mut out = String::new();
    for d in decls {
        write_decl(&mut out, d).expect("writing to a String");
        out.push('\n');
    }
    out
}

fn write_decl(out: &mut String, d: &Decl) -> fmt::Result {
    match d {
        Decl::Chart { name, dim, coords, bounds } => {
            write!(out, "chart {} dim {dim} coords {}", name.text, names(coords))?;
            if let Some(b) = bounds {
                out.push_str(" bounds ");
                write_matrix(out, b)?;
            }
        }
        Decl::Metric { name, chart, matrix } => {
            write!(out, "metric {} on {} {{ ", name.text, chart.text)?;
            write_matrix(out, matrix)?;
            out.push_str(" }");
        }
        Decl::Connection { name, chart, fiber, blocks } => {
            write!(out, "connection {} on {} fiber {} {{", name.text, chart.text, names(fiber))?;
            for b in blocks {
                out.push_str("\n  ");
                write_matrix(out, b)?;
            }
            out.push_str("\n}");
        }
        Decl::Gauge { name, group, chart, matrix } => {
            write!(out, "gauge {} {} on {} {{ ", name.text, group.text, chart.text)?;
            write_matrix(out, matrix)?;
            out.push_str(" }");
        }
        Decl::Section { name, chart, comps } => {
            write!(out, "section {} on {} {{ ", name.text, chart.text)?;
            write_matrix(out, comps)?;
            out.push_str(" }");
        }
        Decl::Lagrangian { name, chart, fiber, metric, density } => {
            write!(out, "lagrangian {} on {} fiber {}", name.text, chart.text, names(fiber))?;
            if let Some(g) = metric {
                write!(out, " metric {}", g.text)?;
            }
            write!(out, " {{ {} }}", density.expr)?;
        }
        Decl::Model { name, kind, fields } => {
            write!(out, "model {} {}", name.text, kind.text)?;
            write_fields(out, fields)?;
        }
        Decl::Komar { name, fields } => {
            write!(out, "komar {}", name.text)?;
            write_fields(out, fields)?;
        }
        Decl::Check { id, subject, with } => {
            write!(out, "check {}", id.text)?;
            if let Some(s) = subject {
                write!(out, " on {}", s.text)?;
            }
            if let Some(w) = with {
                write!(out, " with {}", w.text)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_on_one_line() {
        let d = parse_decls("chart M dim 2 coords x y  metric g on M { [1,0;0,1] }").unwrap();
        assert_eq!(d.len(), 2);
        assert!(matches!(&d[0], Decl::Chart { dim: 2, coords, .. } if coords.len() == 2));
        let Decl::Metric { matrix, .. } = &d[1] else { panic!() };
        assert_eq!(matrix.rows.len(), 2);
    }

    #[test]
    fn expression_errors_point_into_the_file() {
        let text = "chart M dim 1 coords x\nmetric g on M {\n  [1 + * x]\n}";
        let Err(DslError::Syntax { pos, .. }) = parse_decls(text) else { panic!() };
        assert_eq!(pos.line, 3);
        assert_eq!(pos.col, 8);
    }

    #[test]
    fn model_fields_distinguish_names_from_expressions() {
        let d = parse_decls("model S scalar {\n metric g; mass 3/2\n field phi\n}").unwrap();
        let Decl::Model { fields, .. } = &d[0] else { panic!() };
        assert!(matches!(&fields[0].value, Value::Ident(n) if n.text == "g"));
        assert!(matches!(&fields[1].value, Value::Expr(_)));
        assert!(matches!(&fields[2].value, Value::Ident(n) if n.text == "phi"));
    }

    #[test]
    fn keywords_are_not_names() {
        let Err(DslError::Syntax { message, .. }) = parse_decls("chart on dim 1 coords x") else { panic!() };
        assert!(message.contains("keyword"), "{message}");
    }

    #[test]
    fn check_ids_may_contain_dashes() {
        let d = parse_decls("check komar-offshell on K").unwrap();
        assert!(matches!(&d[0], Decl::Check { id, subject: Some(s), .. } if id.text == "komar-offshell" && s.text == "K"));
    }
}
