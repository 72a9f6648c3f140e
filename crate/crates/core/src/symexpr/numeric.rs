use std::collections::BTreeMap;

use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Assignment, EvalError, Evaluator, Expr};

#[derive(Clone, Copy, Debug, PartialEq)]
struct Interval {
    lo: f64,
    hi: f64,
    complex: bool,
}

/// Sampling box: one interval per variable. Complex variables draw real and
/// imaginary parts independently from the same interval.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Domain {
    vars: BTreeMap<String, Interval>,
}

impl Domain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.set(name, lo, hi);
        self
    }

    pub fn set(&mut self, name: &str, lo: f64, hi: f64) {
        self.vars.insert(name.to_string(), Interval { lo, hi, complex: false });
    }

    pub fn set_complex(&mut self, name: &str, lo: f64, hi: f64) {
        self.vars.insert(name.to_string(), Interval { lo, hi, complex: true });
    }

    pub fn contains(&self, name: &str) -> bool {
        self.vars.contains_key(name)
    }

    pub fn bounds(&self, name: &str) -> Option<(f64, f64)> {
        self.vars.get(name).map(|i| (i.lo, i.hi))
    }

    /// Adds every entry of `other`, overriding existing names.
    pub fn merge(&mut self, other: &Domain) {
        for (k, v) in &other.vars {
            self.vars.insert(k.clone(), *v);
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.keys().map(String::as_str)
    }
}

/// Draws one point, visiting variables in name order.
pub fn sample_point(domain: &Domain, rng: &mut ChaCha8Rng) -> Assignment {
    let mut a = Assignment::new();
    for (name, iv) in &domain.vars {
        let mut draw = || if iv.hi > iv.lo { rng.gen_range(iv.lo..iv.hi) } else { iv.lo };
        let re = draw();
        let im = if iv.complex { draw() } else { 0.0 };
        a.set(name, Complex64::new(re, im));
    }
    a
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericOptions {
    pub trials: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions { trials: 20, tol: 1e-8, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum NumericError {
    #[error("at least one trial is required")]
    NoTrials,
    #[error("variable `{0}` has no sampling interval")]
    Uncovered(String),
    #[error("array lengths differ: {0} vs {1}")]
    Shape(usize, usize),
    #[error("evaluation failed at [{point}]: {source}")]
    Eval { source: EvalError, point: Assignment },
}

/// Outcome of a randomized comparison. The worst point is kept even on pass.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericReport {
    pub pass: bool,
    pub trials: usize,
    /// Largest `|a−b| / (1 + max(|a|,|b|))` seen.
    pub worst_error: f64,
    pub worst_point: Option<Assignment>,
    /// Component index attaining the worst error.
    pub worst_index: usize,
    pub worst_values: (Complex64, Complex64),
}

/// Pointwise comparison of two expressions.
pub fn equal_numeric(
    e1: &Expr,
    e2: &Expr,
    domain: &Domain,
    opts: &NumericOptions,
) -> Result<NumericReport, NumericError> {
    compare_arrays(std::slice::from_ref(e1), std::slice::from_ref(e2), domain, opts)
}

/// Componentwise comparison of two equally long arrays; every sample point
/// evaluates all components with one shared memo.
pub fn compare_arrays(
    lhs: &[Expr],
    rhs: &[Expr],
    domain: &Domain,
    opts: &NumericOptions,
) -> Result<NumericReport, NumericError> {
    if opts.trials == 0 {
        return Err(NumericError::NoTrials);
    }
    if lhs.len() != rhs.len() {
        return Err(NumericError::Shape(lhs.len(), rhs.len()));
    }
    if let Some(v) = super::free_vars_of(lhs.iter().chain(rhs)).into_iter().find(|v| !domain.contains(v)) {
        return Err(NumericError::Uncovered(v));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = NumericReport {
        pass: true,
        trials: opts.trials,
        worst_error: 0.0,
        worst_point: None,
        worst_index: 0,
        worst_values: (Complex64::default(), Complex64::default()),
    };
    for _ in 0..opts.trials {
        let at = sample_point(domain, &mut rng);
        let mut ev = Evaluator::new(&at);
        for (k, (a, b)) in lhs.iter().zip(rhs).enumerate() {
            let wrap = |source| NumericError::Eval { source, point: at.clone() };
            let va = ev.eval(a).map_err(wrap)?;
            let vb = ev.eval(b).map_err(wrap)?;
            let err = (va - vb).norm() / (1.0 + va.norm().max(vb.norm()));
            // NaN compares false, so it is handled explicitly as the worst case.
            let bad = err.is_nan() || err > opts.tol;
            let worse = report.worst_point.is_none()
                || (err.is_nan() && !report.worst_error.is_nan())
                || err > report.worst_error;
            if worse {
                report.worst_error = err;
                report.worst_point = Some(at.clone());
                report.worst_index = k;
                report.worst_values = (va, vb);
            }
            if bad {
                report.pass = false;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::parse;

    fn opts() -> NumericOptions {
        NumericOptions::default()
    }

    #[test]
    fn binomial_square() {
        let d = Domain::new().with("x", -2.0, 2.0);
        let r = equal_numeric(&parse("(x+1)^2").unwrap(), &parse("x^2+2*x+1").unwrap(), &d, &opts()).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn offset_is_detected_with_witness() {
        let d = Domain::new().with("x", -2.0, 2.0);
        let r = equal_numeric(&parse("x").unwrap(), &parse("x+1e-3").unwrap(), &d, &opts()).unwrap();
        assert!(!r.pass);
        assert!(r.worst_point.unwrap().get("x").is_some());
    }

    #[test]
    fn pythagorean() {
        let d = Domain::new().with("x", -10.0, 10.0);
        let r = equal_numeric(&parse("sin(x)^2+cos(x)^2").unwrap(), &Expr::one(), &d, &opts()).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn preconditions_and_errors() {
        let d = Domain::new().with("x", -1.0, 1.0);
        let x = Expr::var("x");
        let zero_trials = NumericOptions { trials: 0, ..opts() };
        assert_eq!(equal_numeric(&x, &x, &d, &zero_trials), Err(NumericError::NoTrials));
        assert_eq!(
            equal_numeric(&Expr::var("y"), &x, &d, &opts()),
            Err(NumericError::Uncovered("y".into()))
        );
        let bad = Domain::new().with("x", -2.0, -1.0);
        assert!(matches!(
            equal_numeric(&x.log(), &x, &bad, &opts()),
            Err(NumericError::Eval { .. })
        ));
    }

    #[test]
    fn same_seed_same_report() {
        let d = Domain::new().with("x", -1.0, 1.0).with("y", 0.0, 3.0);
        let e = parse("x*y + sin(y)").unwrap();
        let f = parse("x*y").unwrap();
        let a = equal_numeric(&e, &f, &d, &opts()).unwrap();
        let b = equal_numeric(&e, &f, &d, &opts()).unwrap();
        assert_eq!(a, b);
    }
}
