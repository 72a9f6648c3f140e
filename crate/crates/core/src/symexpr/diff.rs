use std::cell::RefCell;
use std::sync::Arc;

use rustc_hash::FxHashMap;

use super::{Expr, Func, Node};

// Memo of derivatives keyed by node address and variable. The key expression
// is retained so its address cannot be reused while the entry lives.
type DiffCache = FxHashMap<(usize, Arc<str>), (Expr, Expr)>;

thread_local! {
    static CACHE: RefCell<DiffCache> = RefCell::new(FxHashMap::default());
}

/// Drops the thread-local differentiation memo.
pub fn clear_caches() {
    CACHE.with(|c| c.borrow_mut().clear());
}

impl Expr {
    /// Exact partial derivative with respect to `v`.
    pub fn diff(&self, v: &str) -> Expr {
        let v: Arc<str> = Arc::from(v);
        diff_rec(self, &v)
    }
}

fn diff_rec(e: &Expr, v: &Arc<str>) -> Expr {
    match e.node() {
        Node::Const(..) => return Expr::zero(),
        Node::Var(name) => return if **name == **v { Expr::one() } else { Expr::zero() },
        _ => {}
    }
    let key = (e.key(), v.clone());
    if let Some(d) = CACHE.with(|c| c.borrow().get(&key).map(|(_, d)| d.clone())) {
        return d;
    }
    let d = match e.node() {
        Node::Const(..) | Node::Var(_) => unreachable!(),
        Node::Add(ts) => Expr::sum(ts.iter().map(|t| diff_rec(t, v))),
        Node::Mul(fs) => {
            let mut terms = Vec::new();
            for (k, f) in fs.iter().enumerate() {
                let df = diff_rec(f, v);
                if df.is_zero() {
                    continue;
                }
                let mut prod: Vec<Expr> = Vec::with_capacity(fs.len());
                for (j, g) in fs.iter().enumerate() {
                    prod.push(if j == k { df.clone() } else { g.clone() });
                }
                terms.push(Expr::product(prod));
            }
            Expr::sum(terms)
        }
        Node::Div(a, b) => {
            let da = diff_rec(a, v);
            let db = diff_rec(b, v);
            if db.is_zero() {
                da.div(b)
            } else {
                (da * b - a * db).div(&b.powi(2))
            }
        }
        Node::Pow(a, n) => {
            let da = diff_rec(a, v);
            if da.is_zero() {
                Expr::zero()
            } else {
                Expr::product([Expr::int(*n as i64), a.powi(n - 1), da])
            }
        }
        Node::Neg(a) => diff_rec(a, v).neg(),
        Node::Func(f, a) => {
            let da = diff_rec(a, v);
            if da.is_zero() {
                Expr::zero()
            } else {
                let outer = match f {
                    Func::Sin => a.cos(),
                    Func::Cos => a.sin().neg(),
                    Func::Exp => e.clone(),
                    Func::Log => Expr::one().div(a),
                    Func::Sqrt => Expr::rational(1, 2).div(e),
                };
                outer * da
            }
        }
    };
    CACHE.with(|c| c.borrow_mut().insert(key, (e.clone(), d.clone())));
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{Assignment, Complex64};

    #[test]
    fn power_and_product_rules() {
        let x = Expr::var("x");
        let y = Expr::var("y");
        let d = x.powi(2).diff("x");
        let a = Assignment::from_reals(&[("x", 3.0)]);
        assert_eq!(d.eval(&a).unwrap(), Complex64::new(6.0, 0.0));
        let d2 = (x.sin() * &y).diff("x");
        assert!(d2.same_as(&(x.cos() * &y)));
        assert!(Expr::int(7).diff("x").is_zero());
    }

    #[test]
    fn exp_square_matches_central_difference() {
        let x = Expr::var("x");
        let e = (&x * &x).exp();
        let d = e.diff("x");
        let at = |t: f64| e.eval(&Assignment::from_reals(&[("x", t)])).unwrap().re;
        let h = 1e-5;
        let fd = (at(0.7 + h) - at(0.7 - h)) / (2.0 * h);
        let exact = d.eval(&Assignment::from_reals(&[("x", 0.7)])).unwrap().re;
        assert!(((fd - exact) / exact).abs() < 1e-6);
    }

    #[test]
    fn derivative_free_vars_are_subset() {
        let x = Expr::var("x");
        let y = Expr::var("y");
        let e = (&x * &y).log() + y.sqrt();
        let fv = e.free_vars();
        assert!(e.diff("x").free_vars().is_subset(&fv));
        assert!(e.diff("y").free_vars().is_subset(&fv));
    }
}
