use std::collections::BTreeMap;

use num::complex::Complex64;
use num::Zero;
use rustc_hash::FxHashMap;
use thiserror::Error;

use super::{Expr, Func, Node};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("missing variable `{0}`")]
    MissingVariable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{func} undefined at {arg}")]
    Domain { func: &'static str, arg: Complex64 },
}

/// Symbol values used for evaluation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Assignment {
    values: BTreeMap<String, Complex64>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_reals(pairs: &[(&str, f64)]) -> Self {
        let mut a = Self::new();
        for (k, v) in pairs {
            a.set(k, Complex64::new(*v, 0.0));
        }
        a
    }

    pub fn set(&mut self, name: &str, v: Complex64) {
        self.values.insert(name.to_string(), v);
    }

    pub fn set_real(&mut self, name: &str, v: f64) {
        self.set(name, Complex64::new(v, 0.0));
    }

    pub fn get(&self, name: &str) -> Option<Complex64> {
        self.values.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Complex64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl std::fmt::Display for Assignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (k, v) in &self.values {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            if v.im == 0.0 {
                write!(f, "{k}={}", v.re)?;
            } else {
                write!(f, "{k}={}{:+}i", v.re, v.im)?;
            }
        }
        Ok(())
    }
}

/// Evaluates many expressions at one point, sharing results across common
/// subexpressions. Roots are retained so memo keys stay valid.
pub struct Evaluator<'a> {
    at: &'a Assignment,
    memo: FxHashMap<usize, Complex64>,
    roots: Vec<Expr>,
}

impl<'a> Evaluator<'a> {
    pub fn new(at: &'a Assignment) -> Self {
        Evaluator { at, memo: FxHashMap::default(), roots: Vec::new() }
    }

    pub fn eval(&mut self, e: &Expr) -> Result<Complex64, EvalError> {
        self.roots.push(e.clone());
        self.rec(e)
    }

    fn rec(&mut self, e: &Expr) -> Result<Complex64, EvalError> {
        match e.node() {
            Node::Const(_, v) => return Ok(*v),
            Node::Var(name) => {
                return self.at.get(name).ok_or_else(|| EvalError::MissingVariable(name.to_string()))
            }
            _ => {}
        }
        if let Some(v) = self.memo.get(&e.key()) {
            return Ok(*v);
        }
        let v = match e.node() {
            Node::Const(..) | Node::Var(_) => unreachable!(),
            Node::Add(ts) => {
                let mut acc = Complex64::zero();
                for t in ts {
                    acc += self.rec(t)?;
                }
                acc
            }
            Node::Mul(fs) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for f in fs {
                    acc *= self.rec(f)?;
                }
                acc
            }
            Node::Div(a, b) => {
                let num = self.rec(a)?;
                let den = self.rec(b)?;
                if den.is_zero() {
                    return Err(EvalError::DivisionByZero);
                }
                num / den
            }
            Node::Pow(a, n) => {
                let base = self.rec(a)?;
                if *n < 0 && base.is_zero() {
                    return Err(EvalError::DivisionByZero);
                }
                base.powi(*n)
            }
            Node::Neg(a) => -self.rec(a)?,
            Node::Func(f, a) => {
                let x = self.rec(a)?;
                apply(*f, x)?
            }
        };
        self.memo.insert(e.key(), v);
        Ok(v)
    }
}

fn apply(f: Func, x: Complex64) -> Result<Complex64, EvalError> {
    let real_nonpos = x.im == 0.0 && x.re <= 0.0;
    Ok(match f {
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Exp => x.exp(),
        Func::Log => {
            if real_nonpos {
                return Err(EvalError::Domain { func: "log", arg: x });
            }
            x.ln()
        }
        Func::Sqrt => {
            if real_nonpos && x.re < 0.0 {
                return Err(EvalError::Domain { func: "sqrt", arg: x });
            }
            x.sqrt()
        }
    })
}

impl Expr {
    /// Evaluates in double precision.
    pub fn eval(&self, at: &Assignment) -> Result<Complex64, EvalError> {
        Evaluator::new(at).eval(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_values() {
        let x = Expr::var("x");
        let at0 = Assignment::from_reals(&[("x", 0.0)]);
        assert_eq!(x.sin().eval(&at0).unwrap(), Complex64::zero());
        assert_eq!(Expr::one().div(&x).eval(&at0), Err(EvalError::DivisionByZero));
        let p = x.powi(2) + Expr::int(2) * &x + Expr::one();
        let at3 = Assignment::from_reals(&[("x", 3.0)]);
        assert_eq!(p.eval(&at3).unwrap(), Complex64::new(16.0, 0.0));
    }

    #[test]
    fn errors_name_the_problem() {
        let e = Expr::var("q") + Expr::var("x");
        let at = Assignment::from_reals(&[("x", 1.0)]);
        assert_eq!(e.eval(&at), Err(EvalError::MissingVariable("q".into())));
        let l = Expr::var("x").log();
        assert!(matches!(
            l.eval(&Assignment::from_reals(&[("x", -1.0)])),
            Err(EvalError::Domain { func: "log", .. })
        ));
        let s = Expr::var("x").sqrt();
        assert!(s.eval(&Assignment::from_reals(&[("x", -1.0)])).is_err());
        assert_eq!(s.eval(&Assignment::from_reals(&[("x", 0.0)])).unwrap(), Complex64::zero());
    }

    #[test]
    fn imaginary_unit() {
        let e = Expr::i() * Expr::i();
        assert_eq!(e.eval(&Assignment::new()).unwrap(), Complex64::new(-1.0, 0.0));
    }
}
