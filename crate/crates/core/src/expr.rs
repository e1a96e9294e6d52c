//! Expression trees over the decision variables.
//!
//! Derivatives are built symbolically with light constant folding. `abs` and
//! `norm` are the only nonsmooth primitives; their derivatives are valid only
//! where the argument is nonzero, which [`Expr::nonsmooth_active`] reports.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Abs(Box<Expr>),
    /// Euclidean norm of the argument list.
    Norm(Vec<Expr>),
    /// Derivative of `abs`; never produced by the parser.
    Sign(Box<Expr>),
}

/// Below this magnitude an `abs`/`norm` argument counts as sitting on its kink.
pub const KINK_TOL: f64 = 1e-12;

impl Expr {
    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        use Expr::*;
        match self {
            Const(c) => *c,
            Var(i) => x[*i],
            Neg(a) => -a.eval(x),
            Add(a, b) => a.eval(x) + b.eval(x),
            Sub(a, b) => a.eval(x) - b.eval(x),
            Mul(a, b) => a.eval(x) * b.eval(x),
            Div(a, b) => a.eval(x) / b.eval(x),
            Pow(a, k) => a.eval(x).powi(*k),
            Exp(a) => a.eval(x).exp(),
            Log(a) => a.eval(x).ln(),
            Sin(a) => a.eval(x).sin(),
            Cos(a) => a.eval(x).cos(),
            Abs(a) => a.eval(x).abs(),
            Norm(args) => args.iter().map(|a| a.eval(x).powi(2)).sum::<f64>().sqrt(),
            Sign(a) => {
                let v = a.eval(x);
                if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Largest variable index used, plus one.
    pub fn arity(&self) -> usize {
        let mut m = 0;
        self.visit(&mut |e| {
            if let Expr::Var(i) = e {
                m = m.max(i + 1);
            }
        });
        m
    }

    pub fn has_nonsmooth(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if matches!(e, Expr::Abs(_) | Expr::Norm(_) | Expr::Sign(_)) {
                found = true;
            }
        });
        found
    }

    /// Whether some `abs`/`norm` node sits on its kink at `x`.
    pub fn nonsmooth_active(&self, x: &[f64]) -> bool {
        let mut active = false;
        self.visit(&mut |e| match e {
            Expr::Abs(a) | Expr::Sign(a) => {
                if a.eval(x).abs() <= KINK_TOL {
                    active = true;
                }
            }
            Expr::Norm(args) => {
                let n: f64 = args.iter().map(|a| a.eval(x).powi(2)).sum::<f64>().sqrt();
                if n <= KINK_TOL {
                    active = true;
                }
            }
            _ => {}
        });
        active
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        use Expr::*;
        f(self);
        match self {
            Const(_) | Var(_) => {}
            Neg(a) | Pow(a, _) | Exp(a) | Log(a) | Sin(a) | Cos(a) | Abs(a) | Sign(a) => a.visit(f),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Norm(args) => args.iter().for_each(|a| a.visit(f)),
        }
    }

    /// Symbolic partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> Expr {
        use Expr::*;
        match self {
            Const(_) => Const(0.0),
            Var(i) => Const(if *i == var { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.derivative(var)),
            Add(a, b) => add(a.derivative(var), b.derivative(var)),
            Sub(a, b) => sub(a.derivative(var), b.derivative(var)),
            Mul(a, b) => add(
                mul(a.derivative(var), (**b).clone()),
                mul((**a).clone(), b.derivative(var)),
            ),
            Div(a, b) => {
                // (a'b − ab') / b²
                let num = sub(
                    mul(a.derivative(var), (**b).clone()),
                    mul((**a).clone(), b.derivative(var)),
                );
                div(num, pow((**b).clone(), 2))
            }
            Pow(a, k) => {
                let inner = a.derivative(var);
                match k {
                    0 => Const(0.0),
                    1 => inner,
                    _ => mul(mul(Const(*k as f64), pow((**a).clone(), k - 1)), inner),
                }
            }
            Exp(a) => mul(self.clone(), a.derivative(var)),
            Log(a) => div(a.derivative(var), (**a).clone()),
            Sin(a) => mul(Cos(a.clone()), a.derivative(var)),
            Cos(a) => neg(mul(Sin(a.clone()), a.derivative(var))),
            Abs(a) => mul(Sign(a.clone()), a.derivative(var)),
            Norm(args) => {
                // Σ aᵢ aᵢ' / ‖a‖
                let num = args
                    .iter()
                    .map(|a| mul(a.clone(), a.derivative(var)))
                    .fold(Const(0.0), add);
                div(num, self.clone())
            }
            Sign(_) => Const(0.0),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    /// Operator precedence used by the printer (higher binds tighter).
    fn precedence(&self) -> u8 {
        use Expr::*;
        match self {
            Add(..) | Sub(..) => 1,
            Mul(..) | Div(..) => 2,
            Neg(_) => 3,
            Const(c) if c.is_sign_negative() => 3,
            Pow(..) => 4,
            _ => 5,
        }
    }
}

pub fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        _ if a.is_zero() => b,
        _ if b.is_zero() => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        _ if b.is_zero() => a,
        _ if a.is_zero() => neg(b),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        _ if a.is_zero() || b.is_zero() => Expr::Const(0.0),
        (Expr::Const(x), _) if *x == 1.0 => b,
        (_, Expr::Const(y)) if *y == 1.0 => a,
        (Expr::Const(x), _) if *x == -1.0 => neg(b),
        (_, Expr::Const(y)) if *y == -1.0 => neg(a),
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        _ if a.is_zero() => Expr::Const(0.0),
        (_, Expr::Const(y)) if *y == 1.0 => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

pub fn pow(a: Expr, k: i32) -> Expr {
    match (&a, k) {
        (_, 0) => Expr::Const(1.0),
        (_, 1) => a,
        (Expr::Const(c), _) => Expr::Const(c.powi(k)),
        _ => Expr::Pow(Box::new(a), k),
    }
}

/// Formats `v` with 17 significant digits, trimming trailing zeros.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if v.fract() == 0.0 && v.abs() < 1e15 {
        return format!("{}", v as i64);
    }
    let exp10 = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exp10) {
        let decimals = (16 - exp10).max(0) as usize;
        let s = format!("{:.*}", decimals, v);
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        // Guard against the rare case where the fixed rendering loses a digit.
        if s.parse::<f64>().ok() == Some(v) {
            return s;
        }
    }
    let s = format!("{:.16e}", v);
    let (mantissa, exponent) = s.split_once('e').expect("scientific format");
    let mantissa = if mantissa.contains('.') {
        mantissa.trim_end_matches('0').trim_end_matches('.')
    } else {
        mantissa
    };
    format!("{mantissa}e{exponent}")
}

/// Printer that resolves variable indices to names.
pub struct Display<'a> {
    pub expr: &'a Expr,
    pub names: &'a [String],
}

impl Expr {
    pub fn display<'a>(&'a self, names: &'a [String]) -> Display<'a> {
        Display { expr: self, names }
    }
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.expr, self.names)
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, names: &[String], min_prec: u8) -> fmt::Result {
    if e.precedence() < min_prec {
        write!(f, "(")?;
        write_expr(f, e, names)?;
        write!(f, ")")
    } else {
        write_expr(f, e, names)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, names: &[String]) -> fmt::Result {
    use Expr::*;
    match e {
        Const(c) => write!(f, "{}", format_number(*c)),
        Var(i) => match names.get(*i) {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "x{}", i + 1),
        },
        Neg(a) => {
            write!(f, "-")?;
            write_child(f, a, names, 4)
        }
        Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
            let (op, p) = match e {
                Add(..) => ("+", 1),
                Sub(..) => ("-", 1),
                Mul(..) => ("*", 2),
                _ => ("/", 2),
            };
            write_child(f, a, names, p)?;
            write!(f, " {op} ")?;
            write_child(f, b, names, p + 1)
        }
        Pow(a, k) => {
            write_child(f, a, names, 5)?;
            if *k < 0 {
                write!(f, "^({k})")
            } else {
                write!(f, "^{k}")
            }
        }
        Exp(a) | Log(a) | Sin(a) | Cos(a) | Abs(a) | Sign(a) => {
            let name = match e {
                Exp(_) => "exp",
                Log(_) => "log",
                Sin(_) => "sin",
                Cos(_) => "cos",
                Abs(_) => "abs",
                _ => "sign",
            };
            write!(f, "{name}(")?;
            write_expr(f, a, names)?;
            write!(f, ")")
        }
        Norm(args) => {
            write!(f, "norm(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_expr(f, a, names)?;
            }
            write!(f, ")")
        }
    }
}
