//! Reader and canonical writer for `.vopt` problem files.
//!
//! ```text
//! # E2: two objectives, one linear constraint
//! vars x, y
//! objective [x, y]
//! constraint [1 - x - y]
//! coneC orthant(2)
//! coneK orthant(1)
//! box [[-2, 2], [-2, 2]]
//! tol membership 1e-9
//! ```
//!
//! Statements end at a newline or `;` (newlines inside brackets are ignored).
//! The full grammar lives in `docs/vopt.ebnf`.

use crate::cone::PolyhedralCone;
use crate::error::{Error, Position, Result};
use crate::expr::{format_number, Expr};
use crate::problem::{Tolerances, VectorProblem};

const MAX_NESTING: usize = 200;
const FUNCTIONS: [&str; 6] = ["exp", "log", "sin", "cos", "abs", "norm"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64, bool),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Sep,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(v, _) => format!("number {v}"),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Sep => "end of statement".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: Position,
}

fn syntax(pos: Position, message: impl Into<String>) -> Error {
    Error::Syntax {
        position: pos,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut depth: Vec<(char, Position)> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Position { line, column: col };
        let mut advance = 1;
        match c {
            '\n' => {
                if depth.is_empty() {
                    out.push(Token { tok: Tok::Sep, pos });
                }
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            ' ' | '\t' | '\r' => {}
            '#' => {
                while i + advance < chars.len() && chars[i + advance] != '\n' {
                    advance += 1;
                }
            }
            ';' => out.push(Token { tok: Tok::Sep, pos }),
            ',' => out.push(Token { tok: Tok::Comma, pos }),
            '+' => out.push(Token { tok: Tok::Plus, pos }),
            '-' => out.push(Token { tok: Tok::Minus, pos }),
            '*' => out.push(Token { tok: Tok::Star, pos }),
            '/' => out.push(Token { tok: Tok::Slash, pos }),
            '^' => out.push(Token { tok: Tok::Caret, pos }),
            '[' | '(' => {
                depth.push((c, pos));
                let tok = if c == '[' { Tok::LBracket } else { Tok::LParen };
                out.push(Token { tok, pos });
            }
            ']' | ')' => {
                let want = if c == ']' { '[' } else { '(' };
                match depth.pop() {
                    Some((open, _)) if open == want => {}
                    Some((open, at)) => {
                        return Err(syntax(pos, format!("`{c}` does not match `{open}` opened at {at}")))
                    }
                    None => return Err(syntax(pos, format!("unmatched `{c}`"))),
                }
                let tok = if c == ']' { Tok::RBracket } else { Tok::RParen };
                out.push(Token { tok, pos });
            }
            c if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                let mut j = i;
                let mut integral = true;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '.' {
                    integral = false;
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        integral = false;
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let s: String = chars[start..j].iter().collect();
                let v: f64 = s.parse().map_err(|_| syntax(pos, format!("malformed number `{s}`")))?;
                if !v.is_finite() {
                    return Err(syntax(pos, format!("number `{s}` overflows")));
                }
                out.push(Token {
                    tok: Tok::Number(v, integral),
                    pos,
                });
                advance = j - i;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[i..j].iter().collect()),
                    pos,
                });
                advance = j - i;
            }
            other => return Err(syntax(pos, format!("unexpected character `{other}`"))),
        }
        i += advance;
        col += advance;
    }
    if let Some((open, at)) = depth.pop() {
        return Err(syntax(at, format!("unclosed `{open}`")));
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Position { line, column: col },
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConeLiteral {
    Orthant(usize),
    Generators(Vec<Vec<f64>>),
    Halfspaces(Vec<Vec<f64>>),
}

impl ConeLiteral {
    pub fn build(&self, dim: usize) -> Result<PolyhedralCone> {
        match self {
            ConeLiteral::Orthant(d) => {
                if *d != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: *d,
                        context: "orthant dimension",
                    });
                }
                PolyhedralCone::orthant(*d)
            }
            ConeLiteral::Generators(g) => PolyhedralCone::from_generators(dim, g),
            ConeLiteral::Halfspaces(h) => PolyhedralCone::from_halfspaces(dim, h),
        }
    }
}

/// Parsed sections of a `.vopt` file, before semantic checks.
#[derive(Debug, Clone)]
pub struct ProblemDocument {
    pub vars: Vec<String>,
    pub objective: Vec<Expr>,
    pub constraint: Vec<Expr>,
    pub cone_c: ConeLiteral,
    pub cone_k: ConeLiteral,
    pub domain_box: Option<Vec<(f64, f64)>>,
    pub tolerances: Tolerances,
}

impl ProblemDocument {
    pub fn into_problem(self) -> Result<VectorProblem> {
        let cone_c = self.cone_c.build(self.objective.len())?;
        let cone_k = self.cone_k.build(self.constraint.len())?;
        VectorProblem::new(
            self.vars,
            self.objective,
            self.constraint,
            cone_c,
            cone_k,
            self.domain_box,
            self.tolerances,
        )
    }
}

pub fn parse(text: &str) -> Result<VectorProblem> {
    parse_document(text)?.into_problem()
}

pub fn parse_document(text: &str) -> Result<ProblemDocument> {
    if text.trim().is_empty() {
        return Err(syntax(Position { line: 1, column: 1 }, "empty document"));
    }
    let tokens = lex(text)?;
    Parser {
        tokens,
        at: 0,
        vars: None,
        nesting: 0,
    }
    .document()
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    vars: Option<Vec<String>>,
    nesting: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Token> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(syntax(
                t.pos,
                format!("expected {}, found {}", want.describe(), t.tok.describe()),
            ))
        }
    }

    fn document(mut self) -> Result<ProblemDocument> {
        let mut objective = None;
        let mut constraint = None;
        let mut cone_c = None;
        let mut cone_k = None;
        let mut domain_box = None;
        let mut tolerances = Tolerances::default();
        loop {
            let t = self.next();
            let keyword = match &t.tok {
                Tok::Eof => break,
                Tok::Sep => continue,
                Tok::Ident(k) => k.clone(),
                other => {
                    return Err(syntax(
                        t.pos,
                        format!("expected a section keyword, found {}", other.describe()),
                    ))
                }
            };
            let duplicate = |pos| syntax(pos, format!("duplicate `{keyword}` section"));
            match keyword.as_str() {
                "vars" => {
                    if self.vars.is_some() {
                        return Err(duplicate(t.pos));
                    }
                    self.vars = Some(self.var_list()?);
                }
                "objective" | "constraint" => {
                    if self.vars.is_none() {
                        return Err(syntax(t.pos, "`vars` must be declared before expressions"));
                    }
                    let slot = if keyword == "objective" {
                        &mut objective
                    } else {
                        &mut constraint
                    };
                    if slot.is_some() {
                        return Err(duplicate(t.pos));
                    }
                    let list = self.expr_list()?;
                    if list.is_empty() {
                        return Err(syntax(t.pos, format!("`{keyword}` needs at least one component")));
                    }
                    *slot = Some(list);
                }
                "coneC" | "coneK" => {
                    let slot = if keyword == "coneC" { &mut cone_c } else { &mut cone_k };
                    if slot.is_some() {
                        return Err(duplicate(t.pos));
                    }
                    *slot = Some(self.cone()?);
                }
                "box" => {
                    if domain_box.is_some() {
                        return Err(duplicate(t.pos));
                    }
                    domain_box = Some(self.intervals()?);
                }
                "tol" => {
                    let name_tok = self.next();
                    let Tok::Ident(name) = name_tok.tok else {
                        return Err(syntax(name_tok.pos, "expected a tolerance name"));
                    };
                    let v = self.signed_number()?;
                    if !(v > 0.0) {
                        return Err(syntax(name_tok.pos, "tolerances must be positive"));
                    }
                    if !tolerances.set(&name, v) {
                        return Err(syntax(
                            name_tok.pos,
                            format!("unknown tolerance `{name}` (expected one of {:?})", Tolerances::NAMES),
                        ));
                    }
                }
                other => return Err(syntax(t.pos, format!("unknown section `{other}`"))),
            }
            let end = self.next();
            if !matches!(end.tok, Tok::Sep | Tok::Eof) {
                return Err(syntax(
                    end.pos,
                    format!("expected end of statement, found {}", end.tok.describe()),
                ));
            }
            if end.tok == Tok::Eof {
                break;
            }
        }
        let eof = self.peek().pos;
        let missing = |what: &str| syntax(eof, format!("missing `{what}` section"));
        let vars = self.vars.ok_or_else(|| missing("vars"))?;
        let domain_box = match domain_box {
            Some(b) if b.len() != vars.len() => {
                return Err(Error::DimensionMismatch {
                    expected: vars.len(),
                    actual: b.len(),
                    context: "box intervals vs vars",
                })
            }
            other => other,
        };
        Ok(ProblemDocument {
            vars,
            objective: objective.ok_or_else(|| missing("objective"))?,
            constraint: constraint.ok_or_else(|| missing("constraint"))?,
            cone_c: cone_c.ok_or_else(|| missing("coneC"))?,
            cone_k: cone_k.ok_or_else(|| missing("coneK"))?,
            domain_box,
            tolerances,
        })
    }

    fn var_list(&mut self) -> Result<Vec<String>> {
        let mut vars: Vec<String> = Vec::new();
        loop {
            let t = self.next();
            match t.tok {
                Tok::Ident(name) => {
                    if FUNCTIONS.contains(&name.as_str()) {
                        return Err(syntax(t.pos, format!("`{name}` is a reserved function name")));
                    }
                    if vars.contains(&name) {
                        return Err(syntax(t.pos, format!("variable `{name}` declared twice")));
                    }
                    vars.push(name);
                }
                other => {
                    return Err(syntax(
                        t.pos,
                        format!("expected a variable name, found {}", other.describe()),
                    ))
                }
            }
            if self.peek().tok == Tok::Comma {
                self.next();
            } else {
                return Ok(vars);
            }
        }
    }

    fn expr_list(&mut self) -> Result<Vec<Expr>> {
        self.expect(Tok::LBracket)?;
        let mut out = Vec::new();
        if self.peek().tok == Tok::RBracket {
            self.next();
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            let t = self.next();
            match t.tok {
                Tok::Comma => continue,
                Tok::RBracket => return Ok(out),
                other => {
                    return Err(syntax(
                        t.pos,
                        format!("expected `,` or `]`, found {}", other.describe()),
                    ))
                }
            }
        }
    }

    fn cone(&mut self) -> Result<ConeLiteral> {
        let t = self.next();
        let Tok::Ident(kind) = t.tok else {
            return Err(syntax(t.pos, "expected `orthant`, `generators` or `halfspaces`"));
        };
        match kind.as_str() {
            "orthant" => {
                self.expect(Tok::LParen)?;
                let n = self.next();
                let d = match n.tok {
                    Tok::Number(v, true) if (1.0..=64.0).contains(&v) => v as usize,
                    _ => return Err(syntax(n.pos, "orthant dimension must be a positive integer")),
                };
                self.expect(Tok::RParen)?;
                Ok(ConeLiteral::Orthant(d))
            }
            "generators" => Ok(ConeLiteral::Generators(self.matrix()?)),
            "halfspaces" => Ok(ConeLiteral::Halfspaces(self.matrix()?)),
            other => Err(syntax(t.pos, format!("unknown cone literal `{other}`"))),
        }
    }

    fn matrix(&mut self) -> Result<Vec<Vec<f64>>> {
        self.expect(Tok::LBracket)?;
        let mut rows = Vec::new();
        loop {
            rows.push(self.number_row()?);
            let t = self.next();
            match t.tok {
                Tok::Comma => continue,
                Tok::RBracket => return Ok(rows),
                other => {
                    return Err(syntax(
                        t.pos,
                        format!("expected `,` or `]`, found {}", other.describe()),
                    ))
                }
            }
        }
    }

    fn number_row(&mut self) -> Result<Vec<f64>> {
        self.expect(Tok::LBracket)?;
        let mut row = Vec::new();
        loop {
            row.push(self.signed_number()?);
            let t = self.next();
            match t.tok {
                Tok::Comma => continue,
                Tok::RBracket => return Ok(row),
                other => {
                    return Err(syntax(
                        t.pos,
                        format!("expected `,` or `]`, found {}", other.describe()),
                    ))
                }
            }
        }
    }

    fn intervals(&mut self) -> Result<Vec<(f64, f64)>> {
        let pos = self.peek().pos;
        let rows = self.matrix()?;
        rows.into_iter()
            .map(|r| match r.as_slice() {
                [lo, hi] if lo < hi => Ok((*lo, *hi)),
                _ => Err(syntax(pos, "box entries must be intervals [lo, hi] with lo < hi")),
            })
            .collect()
    }

    fn signed_number(&mut self) -> Result<f64> {
        let mut sign = 1.0;
        if self.peek().tok == Tok::Minus {
            self.next();
            sign = -1.0;
        }
        let t = self.next();
        match t.tok {
            Tok::Number(v, _) => Ok(sign * v),
            other => Err(syntax(t.pos, format!("expected a number, found {}", other.describe()))),
        }
    }

    fn enter(&mut self, pos: Position) -> Result<()> {
        self.nesting += 1;
        if self.nesting > MAX_NESTING {
            return Err(syntax(pos, "expression nested too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr> {
        let pos = self.peek().pos;
        self.enter(pos)?;
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.next();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        self.nesting -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.next();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.next();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek().tok == Tok::Minus {
            let pos = self.next().pos;
            self.enter(pos)?;
            let inner = self.unary()?;
            self.nesting -= 1;
            // Negative literals fold into constants so printing round-trips.
            return Ok(match inner {
                Expr::Const(c) => Expr::Const(-c),
                other => Expr::Neg(Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.next();
        let parenthesized = self.peek().tok == Tok::LParen;
        if parenthesized {
            self.next();
        }
        let mut sign = 1;
        if self.peek().tok == Tok::Minus {
            self.next();
            sign = -1;
        }
        let t = self.next();
        let k = match t.tok {
            Tok::Number(v, true) if v <= 1e6 => sign * (v as i32),
            _ => return Err(syntax(t.pos, "exponent must be an integer literal")),
        };
        if parenthesized {
            self.expect(Tok::RParen)?;
        }
        Ok(Expr::Pow(Box::new(base), k))
    }

    fn primary(&mut self) -> Result<Expr> {
        let t = self.next();
        match t.tok {
            Tok::Number(v, _) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if FUNCTIONS.contains(&name.as_str()) {
                    self.expect(Tok::LParen)?;
                    let mut args = vec![self.expr()?];
                    while self.peek().tok == Tok::Comma {
                        self.next();
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen)?;
                    if name == "norm" {
                        return Ok(Expr::Norm(args));
                    }
                    if args.len() != 1 {
                        return Err(syntax(t.pos, format!("`{name}` takes exactly one argument")));
                    }
                    let a = Box::new(args.pop().expect("one argument"));
                    return Ok(match name.as_str() {
                        "exp" => Expr::Exp(a),
                        "log" => Expr::Log(a),
                        "sin" => Expr::Sin(a),
                        "cos" => Expr::Cos(a),
                        _ => Expr::Abs(a),
                    });
                }
                let vars = self.vars.as_ref().expect("vars checked before expressions");
                match vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Expr::Var(i)),
                    None => Err(Error::UnknownIdentifier { name, position: t.pos }),
                }
            }
            other => Err(syntax(
                t.pos,
                format!("expected an expression, found {}", other.describe()),
            )),
        }
    }
}

/// Canonical text: fixed section order, unit-length rays, 17 significant digits.
pub fn serialize(problem: &VectorProblem) -> String {
    let names = problem.vars();
    let list = |exprs: &[Expr]| {
        exprs
            .iter()
            .map(|e| e.display(names).to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut out = String::new();
    out.push_str(&format!("vars {}\n", names.join(", ")));
    out.push_str(&format!("objective [{}]\n", list(problem.objective().exprs())));
    out.push_str(&format!("constraint [{}]\n", list(problem.constraint().exprs())));
    out.push_str(&format!("coneC {}\n", cone_literal(problem.cone_c())));
    out.push_str(&format!("coneK {}\n", cone_literal(problem.cone_k())));
    if let Some(b) = problem.domain_box() {
        let rows: Vec<String> = b
            .iter()
            .map(|(lo, hi)| format!("[{}, {}]", format_number(*lo), format_number(*hi)))
            .collect();
        out.push_str(&format!("box [{}]\n", rows.join(", ")));
    }
    let defaults = Tolerances::default();
    for name in Tolerances::NAMES {
        let v = problem.tolerances().get(name).expect("known name");
        if v != defaults.get(name).expect("known name") {
            out.push_str(&format!("tol {name} {}\n", format_number(v)));
        }
    }
    out
}

pub fn cone_literal(cone: &PolyhedralCone) -> String {
    if cone.is_orthant(1e-12) {
        return format!("orthant({})", cone.ambient_dim());
    }
    let rows: Vec<String> = cone
        .generators()
        .iter()
        .map(|r| {
            let entries: Vec<String> = r.iter().map(|v| format_number(*v)).collect();
            format!("[{}]", entries.join(", "))
        })
        .collect();
    format!("generators [{}]", rows.join(", "))
}

/// Parses a standalone cone literal such as `generators [[1,0],[1,1]]`.
pub fn parse_cone_literal(text: &str) -> Result<ConeLiteral> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        at: 0,
        vars: None,
        nesting: 0,
    };
    let lit = p.cone()?;
    let t = p.next();
    if !matches!(t.tok, Tok::Eof | Tok::Sep) {
        return Err(syntax(t.pos, format!("trailing {}", t.tok.describe())));
    }
    Ok(lit)
}

impl ConeLiteral {
    /// Ambient dimension implied by the literal.
    pub fn dim(&self) -> usize {
        match self {
            ConeLiteral::Orthant(d) => *d,
            ConeLiteral::Generators(r) | ConeLiteral::Halfspaces(r) => r.first().map_or(0, Vec::len),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const E1: &str = "vars x; objective [x]; constraint [-x]; coneC orthant(1); coneK orthant(1)";
    const E2: &str = "vars x,y; objective [x,y]; constraint [1-x-y]; coneC orthant(2); coneK orthant(1)";

    #[test]
    fn parses_e1() {
        let p = parse(E1).unwrap();
        assert_eq!(p.vars(), ["x"]);
        assert_eq!(p.objective().exprs(), [Expr::Var(0)]);
        assert_eq!(p.constraint().exprs(), [Expr::Neg(Box::new(Expr::Var(0)))]);
        assert!(p.is_feasible(&[1.0]).unwrap());
    }

    #[test]
    fn parses_e2() {
        let p = parse(E2).unwrap();
        assert_eq!(p.constraint().values(&[0.5, 0.5]).unwrap(), vec![0.0]);
    }

    #[test]
    fn unclosed_bracket_is_a_syntax_error() {
        match parse("vars x; objective [x") {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, Position { line: 1, column: 19 }),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_has_position() {
        match parse("vars x\nobjective [y]\nconstraint [x]\nconeC orthant(1)\nconeK orthant(1)") {
            Err(Error::UnknownIdentifier { name, position }) => {
                assert_eq!(name, "y");
                assert_eq!(position, Position { line: 2, column: 12 });
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dimension_and_cone_errors_surface() {
        let bad_dim = "vars x; objective [x, x]; constraint [x]; coneC orthant(1); coneK orthant(1)";
        assert!(matches!(parse(bad_dim), Err(Error::DimensionMismatch { .. })));
        let degenerate = "vars x,y; objective [x,y]; constraint [x]; coneC generators [[1,0]]; coneK orthant(1)";
        assert!(matches!(parse(degenerate), Err(Error::DegenerateCone(_))));
    }

    #[test]
    fn round_trip_e1_e2() {
        for text in [E1, E2] {
            let p = parse(text).unwrap();
            let q = parse(&serialize(&p)).unwrap();
            assert!(p.structurally_eq(&q));
        }
    }

    #[test]
    fn generator_cone_round_trips_up_to_normalization() {
        let text = "vars a, b\nobjective [a, a + b]\nconstraint [a^2 + b^2 - 4]\n\
                    coneC generators [[2, 0], [3, 3]]\nconeK orthant(1)\nbox [[-3, 3], [-3, 3]]\n\
                    tol strict 1e-7";
        let p = parse(text).unwrap();
        let s = serialize(&p);
        assert!(s.contains("generators [["));
        assert!(s.contains("tol strict"));
        assert!(parse(&s).unwrap().structurally_eq(&p));
    }

    #[test]
    fn expressions_with_functions_and_powers() {
        let text = "vars x\nobjective [exp(x) - x^(-2) * sin(x) / cos(x) + -3]\n\
                    constraint [norm(x, 1) + abs(x) - log(2)]\nconeC orthant(1)\nconeK orthant(1)";
        let p = parse(text).unwrap();
        let q = parse(&serialize(&p)).unwrap();
        assert!(p.structurally_eq(&q));
        let v = p.objective().values(&[1.0]).unwrap()[0];
        let expect = 1f64.exp() - 1.0 * 1f64.sin() / 1f64.cos() - 3.0;
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn comments_and_multiline_brackets() {
        let text = "# comment\nvars x, y  # trailing\nobjective [\n  x,\n  y\n]\n\
                    constraint [x + y - 1]\nconeC halfspaces [[1, 0], [0, 1]]\nconeK orthant(1)\n";
        let p = parse(text).unwrap();
        assert!(p.cone_c().is_orthant(1e-12));
    }

    #[test]
    fn missing_and_duplicate_sections() {
        assert!(parse("vars x; objective [x]; coneC orthant(1); coneK orthant(1)").is_err());
        assert!(parse("vars x; vars y").is_err());
        assert!(parse("objective [x]").is_err());
        assert!(parse("").is_err());
    }
}
