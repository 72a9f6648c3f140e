use std::fmt;

use num::{Signed, Zero};

use super::{Const, Expr, Node};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn const_prec(c: &Const) -> u8 {
    if c.im.is_zero() {
        let neg = c.re.is_negative();
        match (c.re.is_integer(), neg) {
            (true, false) => ATOM,
            (true, true) => UNARY,
            _ => PRODUCT,
        }
    } else if c.re.is_zero() {
        if c.im.is_integer() && c.im.abs() == num::BigRational::from_integer(1.into()) {
            if c.im.is_negative() {
                UNARY
            } else {
                ATOM
            }
        } else {
            PRODUCT
        }
    } else {
        SUM
    }
}

fn prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Const(c, _) => const_prec(c),
        Node::Var(_) | Node::Func(..) => ATOM,
        Node::Add(_) => SUM,
        Node::Mul(_) | Node::Div(..) => PRODUCT,
        Node::Neg(_) => UNARY,
        Node::Pow(..) => POWER,
    }
}

fn write_at(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(e) < min {
        write!(f, "(")?;
        write_expr(e, f)?;
        write!(f, ")")
    } else {
        write_expr(e, f)
    }
}

fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e.node() {
        Node::Const(c, _) => write!(f, "{c}"),
        Node::Var(v) => write!(f, "{v}"),
        Node::Add(ts) => {
            for (k, t) in ts.iter().enumerate() {
                if k == 0 {
                    write_at(t, SUM, f)?;
                    continue;
                }
                match t.node() {
                    Node::Neg(inner) => {
                        write!(f, " - ")?;
                        write_at(inner, PRODUCT, f)?;
                    }
                    _ => {
                        write!(f, " + ")?;
                        write_at(t, PRODUCT, f)?;
                    }
                }
            }
            Ok(())
        }
        Node::Mul(fs) => {
            for (k, t) in fs.iter().enumerate() {
                if k == 0 {
                    write_at(t, PRODUCT, f)?;
                } else {
                    write!(f, "*")?;
                    write_at(t, UNARY, f)?;
                }
            }
            Ok(())
        }
        Node::Div(a, b) => {
            write_at(a, PRODUCT, f)?;
            write!(f, "/")?;
            write_at(b, UNARY, f)
        }
        Node::Pow(a, n) => {
            write_at(a, ATOM, f)?;
            if *n < 0 {
                write!(f, "^({n})")
            } else {
                write!(f, "^{n}")
            }
        }
        Node::Neg(a) => {
            write!(f, "-")?;
            write_at(a, POWER, f)
        }
        Node::Func(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(a, f)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for Expr {
    /// Infix text that [`super::parse`] reads back to a numerically equal expression.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn readable_forms() {
        let x = Expr::var("x");
        let y = Expr::var("y");
        assert_eq!((x.powi(2) - &y).to_string(), "x^2 - y");
        assert_eq!((Expr::rational(3, 4) * &x).to_string(), "3/4*x");
        assert_eq!(x.powi(-2).to_string(), "x^(-2)");
        assert_eq!((&x + &y).powi(2).to_string(), "(x + y)^2");
        assert_eq!(x.div(&(&x * &y)).to_string(), "x/(x*y)");
        assert_eq!((Expr::i() * &x).sin().to_string(), "sin(i*x)");
    }

    use crate::symexpr::{parse, Assignment};
    use proptest::prelude::*;

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-9i64..=9, 1i64..=7).prop_map(|(p, q)| Expr::rational(p, q)),
            prop_oneof![Just("x"), Just("y"), Just("u_a0")].prop_map(Expr::var),
            Just(Expr::i()),
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
                (inner.clone(), -3i32..=3).prop_map(|(a, n)| (a + Expr::int(3)).powi(n)),
                inner.clone().prop_map(|a| a.sin()),
                inner.clone().prop_map(|a| a.exp()),
                inner.clone().prop_map(|a| -a),
            ]
        })
    }

    fn at() -> Assignment {
        Assignment::from_reals(&[("x", 0.3), ("y", -0.7), ("u_a0", 0.45)])
    }

    proptest! {
        #[test]
        fn printed_form_reparses_to_the_same_value(e in arb_expr()) {
            let back = parse(&e.to_string()).unwrap();
            let (v0, v1) = (e.eval(&at()), back.eval(&at()));
            match (v0, v1) {
                (Ok(a), Ok(b)) if a.norm().is_finite() => {
                    prop_assert!((a - b).norm() <= 1e-9 * (1.0 + a.norm()), "{e}: {a} vs {b}");
                }
                (Err(_), Err(_)) | (Ok(_), Ok(_)) => {}
                (a, b) => prop_assert!(false, "{e}: {a:?} vs {b:?}"),
            }
        }

        #[test]
        fn derivative_is_linear_and_matches_central_difference(a in arb_expr(), b in arb_expr()) {
            let lhs = (&a + &b).diff("x");
            let rhs = a.diff("x") + b.diff("x");
            let p = at();
            if let (Ok(l), Ok(r)) = (lhs.eval(&p), rhs.eval(&p)) {
                if l.norm().is_finite() && l.norm() < 1e6 {
                    prop_assert!((l - r).norm() <= 1e-9 * (1.0 + l.norm()));
                    let h = 1e-5;
                    let f = |x: f64| a.eval(&Assignment::from_reals(&[("x", x), ("y", -0.7), ("u_a0", 0.45)]));
                    if let (Ok(fp), Ok(fm)) = (f(0.3 + h), f(0.3 - h)) {
                        let fd = (fp - fm) / (2.0 * h);
                        let da = a.diff("x").eval(&p).unwrap();
                        prop_assert!((fd - da).norm() <= 1e-4 * (1.0 + da.norm()), "{a}: {fd} vs {da}");
                    }
                }
            }
        }
    }
}
