//! Identity checks, numeric oracles and the frozen Euler–Lagrange residual templates.
//!
//! A check compares two arrays of expressions at random points of a sampling
//! box (or structurally, or as precomputed numbers). Each check draws from its
//! own stream, derived from the run seed and the check id, so results do not
//! depend on which other checks ran.

use std::time::Instant;

use num::complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::models::ModelError;
use crate::symexpr::{compare_arrays, sample_point, Domain, Evaluator, Expr, Node, NumericError, NumericOptions};

pub mod fd;
pub mod fixtures;
pub mod oracle;
pub mod suite;

pub use fd::{action_variation_oracle, finite_difference_oracle};
pub use oracle::{fit_oracle, load_oracle, OracleKind, OracleResult};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum VerifyError {
    #[error("step must be positive, got {0}")]
    Step(f64),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("oracle fixture `{0}` is corrupt: {1}")]
    Fixture(String, String),
    #[error("oracle `{id}` does not cancel: {detail}")]
    NonCancellation { id: String, detail: String },
    #[error("unknown check id `{0}`")]
    UnknownCheck(String),
    #[error("check `{0}` needs {1}")]
    Missing(String, String),
}

/// What a check compares.
#[derive(Clone, Debug)]
pub enum Body {
    /// Pointwise numeric equality on a sampling box.
    Numeric { lhs: Vec<Expr>, rhs: Vec<Expr>, domain: Domain },
    /// Structural equality of expressions.
    Exact { lhs: Vec<Expr>, rhs: Vec<Expr> },
    /// Values computed by an oracle outside the symbolic kernel.
    Values { lhs: Vec<Complex64>, rhs: Vec<Complex64> },
}

#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub id: String,
    /// One-line statement of the identity being checked.
    pub statement: String,
    pub body: Body,
    pub trials: usize,
    pub tol: f64,
}

impl IdentityCheck {
    pub fn numeric(id: &str, statement: &str, lhs: Vec<Expr>, rhs: Vec<Expr>, domain: Domain) -> Self {
        IdentityCheck {
            id: id.to_string(),
            statement: statement.to_string(),
            body: Body::Numeric { lhs, rhs, domain },
            trials: 20,
            tol: 1e-8,
        }
    }

    /// `defect = 0` form.
    pub fn defect(id: &str, statement: &str, defect: Vec<Expr>, domain: Domain) -> Self {
        let zeros = vec![Expr::zero(); defect.len()];
        Self::numeric(id, statement, defect, zeros, domain)
    }

    pub fn exact(id: &str, statement: &str, lhs: Vec<Expr>, rhs: Vec<Expr>) -> Self {
        IdentityCheck { id: id.to_string(), statement: statement.to_string(), body: Body::Exact { lhs, rhs }, trials: 1, tol: 0.0 }
    }

    pub fn values(id: &str, statement: &str, lhs: Vec<Complex64>, rhs: Vec<Complex64>, tol: f64) -> Self {
        IdentityCheck { id: id.to_string(), statement: statement.to_string(), body: Body::Values { lhs, rhs }, trials: 1, tol }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    /// `lhs − rhs`, componentwise.
    pub fn defect_exprs(&self) -> Option<Vec<Expr>> {
        match &self.body {
            Body::Numeric { lhs, rhs, .. } | Body::Exact { lhs, rhs } => {
                Some(lhs.iter().zip(rhs).map(|(a, b)| a - b).collect())
            }
            Body::Values { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorstPoint {
    pub name: String,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: String,
    /// Document object the check ran on, for document-driven checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    pub statement: String,
    pub pass: bool,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub worst_error: f64,
    pub worst_index: usize,
    pub worst_point: Vec<WorstPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let mut s = format!("{status} {}", self.id);
        if let Some(sub) = &self.subject {
            s.push_str(&format!(" [{sub}]"));
        }
        s.push_str(&format!(" (worst {:.3e}, tol {:.0e})", self.worst_error, self.tol));
        if let Some(e) = &self.error {
            s.push_str(&format!(": {e}"));
        }
        s
    }
}

/// Seed of the stream owned by check `id`.
pub fn stream_seed(seed: u64, id: &str) -> u64 {
    let h = Sha256::digest(id.as_bytes());
    let mut b = [0u8; 8];
    b.copy_from_slice(&h[..8]);
    seed ^ u64::from_le_bytes(b)
}

fn relative(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (1.0 + a.norm().max(b.norm()))
}

/// Runs one check. Evaluation failures are reported as a failed outcome carrying the message.
pub fn run_check(c: &IdentityCheck, seed: u64, timing: bool) -> CheckOutcome {
    let start = Instant::now();
    let mut out = CheckOutcome {
        id: c.id.clone(),
        subject: None,
        statement: c.statement.clone(),
        pass: false,
        trials: c.trials,
        seed,
        tol: c.tol,
        worst_error: 0.0,
        worst_index: 0,
        worst_point: Vec::new(),
        error: None,
        wall_ms: None,
    };
    match &c.body {
        Body::Numeric { lhs, rhs, domain } => {
            let opts = NumericOptions { trials: c.trials, tol: c.tol, seed: stream_seed(seed, &c.id) };
            match compare_arrays(lhs, rhs, domain, &opts) {
                Ok(r) => {
                    out.pass = r.pass;
                    out.worst_error = r.worst_error;
                    out.worst_index = r.worst_index;
                    out.worst_point = r
                        .worst_point
                        .map(|p| p.iter().map(|(k, v)| WorstPoint { name: k.to_string(), re: v.re, im: v.im }).collect())
                        .unwrap_or_default();
                }
                Err(e) => out.error = Some(e.to_string()),
            }
        }
        Body::Exact { lhs, rhs } => {
            out.pass = lhs.len() == rhs.len();
            for (k, (a, b)) in lhs.iter().zip(rhs).enumerate() {
                if !a.same_as(b) {
                    out.pass = false;
                    out.worst_error = 1.0;
                    out.worst_index = k;
                    break;
                }
            }
        }
        Body::Values { lhs, rhs } => {
            out.pass = lhs.len() == rhs.len();
            for (k, (a, b)) in lhs.iter().zip(rhs).enumerate() {
                let err = relative(*a, *b);
                if err.is_nan() || err > out.worst_error {
                    out.worst_error = err;
                    out.worst_index = k;
                }
                if err.is_nan() || err > c.tol {
                    out.pass = false;
                }
            }
        }
    }
    if timing {
        out.wall_ms = Some(start.elapsed().as_millis() as u64);
    }
    out
}

/// Single-sign-flip variants of `e`, largest terms first and outer sums before
/// inner ones, at most `limit` of them. Inner sums matter when the outer terms
/// cancel among themselves at `ev`'s point.
fn flips(e: &Expr, ev: &mut Evaluator, limit: usize) -> Vec<Expr> {
    let mut out = Vec::new();
    collect_flips(e, ev, limit, &mut out, &|m| m);
    out
}

fn collect_flips(e: &Expr, ev: &mut Evaluator, limit: usize, out: &mut Vec<Expr>, wrap: &dyn Fn(Expr) -> Expr) {
    if out.len() >= limit {
        return;
    }
    match e.node() {
        Node::Add(terms) => {
            let mut order: Vec<(usize, f64)> = terms
                .iter()
                .enumerate()
                .filter_map(|(k, t)| ev.eval(t).ok().map(|v| (k, v.norm())))
                .filter(|(_, v)| v.is_finite())
                .collect();
            order.sort_by(|x, y| y.1.total_cmp(&x.1));
            for &(k, v) in &order {
                if out.len() >= limit || v == 0.0 {
                    break;
                }
                let mut kids = terms.clone();
                kids[k] = -&kids[k];
                out.push(wrap(e.rebuild(kids)));
            }
            for &(k, _) in &order {
                let at_k = |m: Expr| {
                    let mut kids = terms.clone();
                    kids[k] = m;
                    wrap(e.rebuild(kids))
                };
                collect_flips(&terms[k], ev, limit, out, &at_k);
            }
        }
        Node::Mul(fs) => {
            for k in 0..fs.len() {
                let at_k = |m: Expr| {
                    let mut kids = fs.clone();
                    kids[k] = m;
                    wrap(e.rebuild(kids))
                };
                collect_flips(&fs[k], ev, limit, out, &at_k);
            }
        }
        Node::Neg(x) => collect_flips(x, ev, limit, out, &|m| wrap(-&m)),
        Node::Div(n, d) => collect_flips(n, ev, limit, out, &|m| wrap(m.div(d))),
        Node::Const(c, _) if !c.is_zero() => out.push(wrap(-e)),
        _ => {}
    }
}

/// The check with one sign flipped in one term, or `None` when no term carries weight.
pub fn mutate(c: &IdentityCheck, seed: u64) -> Option<IdentityCheck> {
    let body = match &c.body {
        Body::Numeric { lhs, rhs, domain } => {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, &c.id));
            let at = sample_point(domain, &mut rng);
            let mut ev = Evaluator::new(&at);
            let mut best: Option<(bool, usize, f64)> = None;
            for (side, arr) in [(false, lhs), (true, rhs)] {
                for (k, e) in arr.iter().enumerate() {
                    if let Ok(v) = ev.eval(e) {
                        if v.norm().is_finite() && best.is_none_or(|(_, _, b)| v.norm() > b) {
                            best = Some((side, k, v.norm()));
                        }
                    }
                }
            }
            let order: Vec<(bool, usize)> = {
                let mut all: Vec<(bool, usize)> =
                    (0..lhs.len()).map(|k| (false, k)).chain((0..rhs.len()).map(|k| (true, k))).collect();
                if let Some((s, k, _)) = best {
                    all.retain(|p| *p != (s, k));
                    all.insert(0, (s, k));
                }
                all
            };
            let mut found = None;
            for (side, k) in order {
                let src = if side { &rhs[k] } else { &lhs[k] };
                let Ok(v0) = ev.eval(src) else { continue };
                let hit = flips(src, &mut ev, 64)
                    .into_iter()
                    .find(|m| ev.eval(m).is_ok_and(|v1| relative(v0, v1) > 10.0 * c.tol.max(1e-12)));
                if let Some(m) = hit {
                    found = Some((side, k, m));
                    break;
                }
            }
            let (side, k, m) = found?;
            let (mut l, mut r) = (lhs.clone(), rhs.clone());
            if side {
                r[k] = m;
            } else {
                l[k] = m;
            }
            Body::Numeric { lhs: l, rhs: r, domain: domain.clone() }
        }
        Body::Exact { lhs, rhs } => {
            let k = lhs.iter().position(|e| !e.is_zero())?;
            let mut l = lhs.clone();
            l[k] = -&l[k];
            Body::Exact { lhs: l, rhs: rhs.clone() }
        }
        Body::Values { lhs, rhs } => {
            let k = (0..lhs.len()).max_by(|&a, &b| lhs[a].norm().total_cmp(&lhs[b].norm()))?;
            if lhs[k].norm() == 0.0 {
                return None;
            }
            let mut l = lhs.clone();
            l[k] = -l[k];
            Body::Values { lhs: l, rhs: rhs.clone() }
        }
    };
    Some(IdentityCheck { body, ..c.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::parse;

    fn dom() -> Domain {
        Domain::new().with("x", -1.0, 1.0).with("y", -1.0, 1.0)
    }

    #[test]
    fn zero_defect_passes_with_zero_error() {
        let c = IdentityCheck::defect("zero", "zero is zero", vec![Expr::zero()], dom());
        let out = run_check(&c, 0, false);
        assert!(out.pass);
        assert_eq!(out.worst_error, 0.0);
    }

    #[test]
    fn mutation_breaks_a_true_identity() {
        let lhs = parse("(x + y)^2").unwrap();
        let rhs = parse("x^2 + 2*x*y + y^2").unwrap();
        let c = IdentityCheck::numeric("square", "binomial square", vec![lhs], vec![rhs], dom());
        assert!(run_check(&c, 3, false).pass);
        let m = mutate(&c, 3).unwrap();
        let out = run_check(&m, 3, false);
        assert!(!out.pass);
        assert!(!out.worst_point.is_empty());
    }

    #[test]
    fn outcomes_are_seed_stable() {
        let c = IdentityCheck::numeric("off", "deliberately false", vec![parse("x").unwrap()], vec![parse("y").unwrap()], dom());
        assert_eq!(run_check(&c, 5, false), run_check(&c, 5, false));
        assert_ne!(run_check(&c, 5, false).worst_point, run_check(&c, 6, false).worst_point);
    }

    #[test]
    fn uncovered_variable_is_reported() {
        let c = IdentityCheck::defect("free", "free symbol", vec![parse("z").unwrap()], dom());
        let out = run_check(&c, 0, false);
        assert!(!out.pass);
        assert!(out.error.unwrap().contains('z'));
    }
}
