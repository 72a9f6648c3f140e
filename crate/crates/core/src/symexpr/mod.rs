//! Exact symbolic scalar expressions.
//!
//! An [`Expr`] is an immutable, reference-counted DAG over named variables with
//! exact complex-rational constants. Construction applies only cheap local
//! rewrites (`0+e`, `1·e`, `0·e`, constant folding); there is no general
//! simplifier, and identities are tested numerically with [`equal_numeric`].
//!
//! Identical subtrees built by cloning share storage, and differentiation and
//! evaluation are memoized per node, so deeply nested derivative expressions
//! stay proportional to their DAG size rather than their tree size.

mod constant;
mod diff;
mod eval;
mod numeric;
mod parse;
mod print;

use std::collections::{BTreeSet, HashMap};
use std::ops;
use std::sync::Arc;

use rustc_hash::FxHashMap;

pub use constant::Const;
pub use diff::clear_caches;
pub use eval::{Assignment, EvalError, Evaluator};
pub use numeric::{
    compare_arrays, equal_numeric, sample_point, Domain, NumericError, NumericOptions, NumericReport,
};
pub use parse::{line_col, parse, ParseError};

pub use num::complex::Complex64;

/// Primitive functions of one argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug)]
pub enum Node {
    /// Exact value plus its cached double-precision image.
    Const(Const, Complex64),
    Var(Arc<str>),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Div(Expr, Expr),
    Pow(Expr, i32),
    Neg(Expr),
    Func(Func, Expr),
}

/// Immutable symbolic expression.
#[derive(Clone, Debug)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn from_node(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    /// Address used as a memoization key. Valid while `self` is alive.
    pub(crate) fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as *const u8 as usize
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn constant(c: Const) -> Expr {
        let v = c.to_c64();
        Expr::from_node(Node::Const(c, v))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(Const::int(n))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::constant(Const::rational(num, den))
    }

    /// The imaginary unit.
    pub fn i() -> Expr {
        Expr::constant(Const::imag_unit())
    }

    pub fn var(name: &str) -> Expr {
        Expr::from_node(Node::Var(Arc::from(name)))
    }

    pub fn as_const(&self) -> Option<&Const> {
        match self.node() {
            Node::Const(c, _) => Some(c),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self.node() {
            Node::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Const::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(Const::is_one)
    }

    /// Sum with flattening, constant folding and zero elimination.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut acc = Const::zero();
        let mut out: Vec<Expr> = Vec::new();
        for t in terms {
            match t.node() {
                Node::Const(c, _) => acc = acc.add(c),
                Node::Add(inner) => {
                    for u in inner {
                        match u.node() {
                            Node::Const(c, _) => acc = acc.add(c),
                            _ => out.push(u.clone()),
                        }
                    }
                }
                _ => out.push(t),
            }
        }
        if !acc.is_zero() {
            out.push(Expr::constant(acc));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::from_node(Node::Add(out)),
        }
    }

    /// Product with flattening, constant folding, `0·e → 0` and `1·e → e`.
    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut acc = Const::one();
        let mut out: Vec<Expr> = Vec::new();
        for f in factors {
            match f.node() {
                Node::Const(c, _) => acc = acc.mul(c),
                Node::Mul(inner) => {
                    for u in inner {
                        match u.node() {
                            Node::Const(c, _) => acc = acc.mul(c),
                            _ => out.push(u.clone()),
                        }
                    }
                }
                Node::Neg(inner) => {
                    acc = acc.neg();
                    match inner.node() {
                        Node::Mul(v) => {
                            for u in v {
                                match u.node() {
                                    Node::Const(c, _) => acc = acc.mul(c),
                                    _ => out.push(u.clone()),
                                }
                            }
                        }
                        _ => out.push(inner.clone()),
                    }
                }
                _ => out.push(f),
            }
            if acc.is_zero() {
                return Expr::zero();
            }
        }
        if out.is_empty() {
            return Expr::constant(acc);
        }
        if acc.is_one() {
            if out.len() == 1 {
                return out.pop().unwrap();
            }
        } else if out.len() == 1 && acc == Const::int(-1) {
            return Expr::from_node(Node::Neg(out.pop().unwrap()));
        } else {
            out.insert(0, Expr::constant(acc));
        }
        Expr::from_node(Node::Mul(out))
    }

    pub fn neg(&self) -> Expr {
        match self.node() {
            Node::Const(c, _) => Expr::constant(c.neg()),
            Node::Neg(e) => e.clone(),
            Node::Mul(fs) if fs[0].as_const().is_some() => {
                let mut v = fs.clone();
                v[0] = Expr::constant(v[0].as_const().unwrap().neg());
                Expr::product(v)
            }
            _ => Expr::from_node(Node::Neg(self.clone())),
        }
    }

    pub fn div(&self, den: &Expr) -> Expr {
        if den.is_one() {
            return self.clone();
        }
        if self.is_zero() {
            return Expr::zero();
        }
        if let (Some(a), Some(b)) = (self.as_const(), den.as_const()) {
            if let Some(q) = a.div(b) {
                return Expr::constant(q);
            }
        }
        if let Some(b) = den.as_const() {
            if let Some(inv) = Const::one().div(b) {
                return Expr::product([Expr::constant(inv), self.clone()]);
            }
        }
        Expr::from_node(Node::Div(self.clone(), den.clone()))
    }

    pub fn powi(&self, n: i32) -> Expr {
        if n == 0 {
            return Expr::one();
        }
        if n == 1 {
            return self.clone();
        }
        if let Some(c) = self.as_const() {
            if let Some(p) = c.powi(n) {
                return Expr::constant(p);
            }
        }
        if let Node::Pow(b, m) = self.node() {
            if let Some(k) = m.checked_mul(n) {
                return b.powi(k);
            }
        }
        Expr::from_node(Node::Pow(self.clone(), n))
    }

    pub fn apply(f: Func, arg: &Expr) -> Expr {
        if let Some(c) = arg.as_const() {
            let folded = match f {
                Func::Sin if c.is_zero() => Some(Expr::zero()),
                Func::Cos if c.is_zero() => Some(Expr::one()),
                Func::Exp if c.is_zero() => Some(Expr::one()),
                Func::Log if c.is_one() => Some(Expr::zero()),
                Func::Sqrt if c.is_zero() || c.is_one() => Some(arg.clone()),
                _ => None,
            };
            if let Some(e) = folded {
                return e;
            }
        }
        Expr::from_node(Node::Func(f, arg.clone()))
    }

    pub fn sin(&self) -> Expr {
        Expr::apply(Func::Sin, self)
    }
    pub fn cos(&self) -> Expr {
        Expr::apply(Func::Cos, self)
    }
    pub fn exp(&self) -> Expr {
        Expr::apply(Func::Exp, self)
    }
    pub fn log(&self) -> Expr {
        Expr::apply(Func::Log, self)
    }
    pub fn sqrt(&self) -> Expr {
        Expr::apply(Func::Sqrt, self)
    }

    /// Children in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Const(..) | Node::Var(_) => vec![],
            Node::Add(v) | Node::Mul(v) => v.iter().collect(),
            Node::Div(a, b) => vec![a, b],
            Node::Pow(a, _) | Node::Neg(a) | Node::Func(_, a) => vec![a],
        }
    }

    /// Free variable names.
    pub fn free_vars(&self) -> BTreeSet<String> {
        free_vars_of([self])
    }

    pub fn depends_on(&self, v: &str) -> bool {
        self.free_vars().contains(v)
    }

    /// Number of distinct nodes in the DAG.
    pub fn dag_size(&self) -> usize {
        let mut seen = rustc_hash::FxHashSet::default();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            if seen.insert(e.key()) {
                stack.extend(e.children());
            }
        }
        seen.len()
    }

    /// Capture-free substitution of `v` by `r`.
    pub fn subst(&self, v: &str, r: &Expr) -> Expr {
        let mut map = HashMap::new();
        map.insert(v.to_string(), r.clone());
        self.subst_many(&map)
    }

    /// Simultaneous substitution of every mapped variable.
    pub fn subst_many(&self, map: &HashMap<String, Expr>) -> Expr {
        let mut memo: FxHashMap<usize, Expr> = FxHashMap::default();
        subst_rec(self, map, &mut memo)
    }

    /// Rebuilds the node with new children, reapplying the local rewrites.
    pub fn rebuild(&self, kids: Vec<Expr>) -> Expr {
        match self.node() {
            Node::Const(..) | Node::Var(_) => self.clone(),
            Node::Add(_) => Expr::sum(kids),
            Node::Mul(_) => Expr::product(kids),
            Node::Div(..) => kids[0].div(&kids[1]),
            Node::Pow(_, n) => kids[0].powi(*n),
            Node::Neg(_) => kids[0].neg(),
            Node::Func(f, _) => Expr::apply(*f, &kids[0]),
        }
    }

    /// Structural equality (same tree shape, constants and names).
    pub fn same_as(&self, other: &Expr) -> bool {
        let mut memo = rustc_hash::FxHashSet::default();
        same_rec(self, other, &mut memo)
    }
}

/// Union of the free variables of several expressions, visiting shared nodes once.
pub fn free_vars_of<'a>(es: impl IntoIterator<Item = &'a Expr>) -> BTreeSet<String> {
    let mut seen = rustc_hash::FxHashSet::default();
    let mut out = BTreeSet::new();
    let mut stack: Vec<&Expr> = es.into_iter().collect();
    while let Some(e) = stack.pop() {
        if !seen.insert(e.key()) {
            continue;
        }
        if let Node::Var(v) = e.node() {
            out.insert(v.to_string());
        }
        stack.extend(e.children());
    }
    out
}

fn subst_rec(e: &Expr, map: &HashMap<String, Expr>, memo: &mut FxHashMap<usize, Expr>) -> Expr {
    if let Some(r) = memo.get(&e.key()) {
        return r.clone();
    }
    let out = match e.node() {
        Node::Const(..) => e.clone(),
        Node::Var(v) => map.get(&**v).cloned().unwrap_or_else(|| e.clone()),
        _ => {
            let kids: Vec<Expr> = e.children().into_iter().map(|c| subst_rec(c, map, memo)).collect();
            let unchanged = kids.iter().zip(e.children()).all(|(a, b)| a.ptr_eq(b));
            if unchanged {
                e.clone()
            } else {
                e.rebuild(kids)
            }
        }
    };
    memo.insert(e.key(), out.clone());
    out
}

fn same_rec(a: &Expr, b: &Expr, memo: &mut rustc_hash::FxHashSet<(usize, usize)>) -> bool {
    if a.ptr_eq(b) || memo.contains(&(a.key(), b.key())) {
        return true;
    }
    let eq = match (a.node(), b.node()) {
        (Node::Const(x, _), Node::Const(y, _)) => x == y,
        (Node::Var(x), Node::Var(y)) => x == y,
        (Node::Add(x), Node::Add(y)) | (Node::Mul(x), Node::Mul(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(p, q)| same_rec(p, q, memo))
        }
        (Node::Div(p1, q1), Node::Div(p2, q2)) => same_rec(p1, p2, memo) && same_rec(q1, q2, memo),
        (Node::Pow(p, n), Node::Pow(q, m)) => n == m && same_rec(p, q, memo),
        (Node::Neg(p), Node::Neg(q)) => same_rec(p, q, memo),
        (Node::Func(f, p), Node::Func(g, q)) => f == g && same_rec(p, q, memo),
        _ => false,
    };
    if eq {
        memo.insert((a.key(), b.key()));
    }
    eq
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        self.same_as(other)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<Const> for Expr {
    fn from(c: Const) -> Expr {
        Expr::constant(c)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&self, rhs)
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::sum([a.clone(), b.clone()]));
binop!(Sub, sub, |a, b| Expr::sum([a.clone(), b.neg()]));
binop!(Mul, mul, |a, b| Expr::product([a.clone(), b.clone()]));
binop!(Div, div, |a, b| a.div(b));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::sum(iter)
    }
}

impl std::iter::Product for Expr {
    fn product<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::product(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::var("x")
    }

    #[test]
    fn local_rewrites() {
        assert!((Expr::zero() + x()).same_as(&x()));
        assert!((Expr::one() * x()).same_as(&x()));
        assert!((Expr::zero() * x()).is_zero());
        assert_eq!((Expr::int(2) + Expr::rational(1, 2)).as_const(), Some(&Const::rational(5, 2)));
        assert!((-(-x())).same_as(&x()));
        assert!(x().powi(1).same_as(&x()));
        assert!(x().powi(0).is_one());
    }

    #[test]
    fn subst_examples() {
        let y = Expr::var("y");
        let e = y.powi(2).subst("y", &(x() + Expr::one()));
        assert_eq!(e.free_vars().into_iter().collect::<Vec<_>>(), vec!["x".to_string()]);
        assert!(x().subst("y", &Expr::int(5)).same_as(&x()));
    }

    #[test]
    fn free_vars_of_subst() {
        let e = Expr::var("a") * Expr::var("v") + Expr::var("v").sin();
        let r = Expr::var("b") + Expr::var("c");
        let s = e.subst("v", &r);
        let fv: Vec<String> = s.free_vars().into_iter().collect();
        assert_eq!(fv, vec!["a", "b", "c"]);
    }
}
