//! Model documents: a line-oriented text format declaring charts, metrics,
//! connections, gauge fields, sections, Lagrangians, models and checks, and
//! the commands that run on them.
//!
//! ```text
//! chart M dim 2 coords t x bounds [-1/2, 1/2; -1/2, 1/2]
//! metric g on M { [-1, 0; 0, 1 + t*x/4] }
//! section phi on M { [sin(t) + x] }
//! model S scalar { metric g; field phi; mass 1 }
//! check energy-scalar on S
//! ```
//!
//! Matrices are row-major `[a, b; c, d]`; entries use the expression syntax of
//! [`crate::symexpr::parse`].

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::verify::VerifyError;

mod resolve;
mod run;
mod syntax;

pub use resolve::{Env, Model, Object};
pub use run::{check_kinds, compute_objects, run, Command, Computed, Component, Report, RunOptions};
pub use syntax::{Decl, Entry, Field, MatrixLit, Name, Value};

/// 1-based line and column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DslError {
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: unresolved name `{name}`")]
    Unresolved { pos: Pos, name: String },
    #[error("{pos}: dimension mismatch: {message}")]
    Dimension { pos: Pos, message: String },
    #[error("{pos}: {message}")]
    Invalid { pos: Pos, message: String },
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

impl DslError {
    pub fn pos(&self) -> Option<Pos> {
        match self {
            DslError::Syntax { pos, .. }
            | DslError::Unresolved { pos, .. }
            | DslError::Dimension { pos, .. }
            | DslError::Invalid { pos, .. } => Some(*pos),
            _ => None,
        }
    }
}

/// A parsed and resolved document.
#[derive(Clone, Debug)]
pub struct Document {
    pub decls: Vec<Decl>,
    pub env: Env,
}

/// Parses and resolves `text`. Every failure carries a line and column.
pub fn parse(text: &str) -> Result<Document, DslError> {
    let decls = syntax::parse_decls(text)?;
    let env = Env::build(&decls)?;
    Ok(Document { decls, env })
}

impl Document {
    /// Canonical text; reparsing gives numerically equal expressions.
    pub fn print(&self) -> String {
        syntax::print_decls(&self.decls)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{Assignment, Expr};
    use proptest::prelude::*;

    const MODELS: [&str; 6] = [
        include_str!("../../fixtures/models/schwarzschild.jc"),
        include_str!("../../fixtures/models/random-metric.jc"),
        include_str!("../../fixtures/models/maxwell.jc"),
        include_str!("../../fixtures/models/su2.jc"),
        include_str!("../../fixtures/models/dirac.jc"),
        include_str!("../../fixtures/models/oscillator.jc"),
    ];

    /// Values of every expression of `doc` at a point shared by all charts.
    fn values(doc: &Document) -> Vec<Option<(f64, f64)>> {
        let mut at = Assignment::new();
        for (k, v) in doc.decls.iter().flat_map(|d| d.exprs()).flat_map(|e| e.free_vars()).enumerate() {
            at.set_real(&v, 0.37 + 0.013 * (k % 7) as f64);
        }
        doc.decls.iter().flat_map(|d| d.exprs()).map(|e| e.eval(&at).ok().map(|z| (z.re, z.im))).collect()
    }

    fn close(a: &[Option<(f64, f64)>], b: &[Option<(f64, f64)>]) -> bool {
        a.len() == b.len()
            && a.iter().zip(b).all(|(x, y)| match (x, y) {
                (Some(x), Some(y)) => (x.0 - y.0).abs() + (x.1 - y.1).abs() <= 1e-10 * (1.0 + x.0.abs() + x.1.abs()),
                (None, None) => true,
                _ => false,
            })
    }

    #[test]
    fn fixture_models_round_trip() {
        for text in MODELS {
            let doc = parse(text).unwrap();
            let printed = doc.print();
            let again = parse(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
            assert_eq!(again.print(), printed);
            assert!(close(&values(&doc), &values(&again)));
        }
    }

    fn arb_poly() -> impl Strategy<Value = String> {
        let mono = (-9i32..=9, 1i32..=5, 0u32..=2, 0u32..=2).prop_map(|(p, q, i, j)| format!("({p}/{q})*x^{i}*y^{j}"));
        proptest::collection::vec(mono, 1..4).prop_map(|v| v.join(" + "))
    }

    fn arb_expr() -> impl Strategy<Value = String> {
        arb_poly().prop_recursive(2, 8, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| format!("sin({e})")),
                inner.clone().prop_map(|e| format!("exp(-({e})^2)")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b}) - {b}")),
                inner.prop_map(|e| format!("-({e})/3")),
            ]
        })
    }

    fn perturb(text: &str, ops: &[(usize, u8, bool)]) -> String {
        let mut b = text.as_bytes().to_vec();
        for &(at, byte, delete) in ops {
            if b.is_empty() {
                break;
            }
            let k = at % b.len();
            if delete {
                b.remove(k);
            } else {
                b.insert(k, byte);
            }
        }
        String::from_utf8_lossy(&b).into_owned()
    }

    fn check_position(text: &str, e: &DslError) {
        if let Some(p) = e.pos() {
            let lines = text.split('\n').count();
            assert!(p.line >= 1 && p.line <= lines.max(1) + 1, "{e} outside {lines} lines");
            assert!(p.col >= 1, "{e}");
        }
    }

    proptest! {
        #[test]
        fn printed_documents_reparse_to_equal_values(
            a in arb_poly(), b in arb_poly(), s in proptest::collection::vec(arb_expr(), 1..4)
        ) {
            let text = format!(
                "chart M dim 2 coords x y\nmetric g on M {{ [4 + ({a})/64, ({b})/64; ({b})/64, -4 + ({a})/64] }}\nsection s on M {{ [{}] }}\n",
                s.join(", ")
            );
            let doc = parse(&text).unwrap();
            let printed = doc.print();
            let again = parse(&printed).unwrap();
            prop_assert_eq!(again.print(), printed);
            prop_assert!(close(&values(&doc), &values(&again)));
        }

        #[test]
        fn arbitrary_text_never_panics(text in "\\PC{0,200}") {
            if let Err(e) = parse(&text) {
                check_position(&text, &e);
            }
        }

        #[test]
        fn corrupted_models_give_positioned_errors(
            which in 0usize..MODELS.len(),
            ops in proptest::collection::vec((any::<usize>(), prop_oneof![Just(b'{'), Just(b']'), Just(b';'), Just(b'x'), Just(b' '), Just(b'\n'), Just(b'*')], any::<bool>()), 1..6)
        ) {
            let text = perturb(MODELS[which], &ops);
            match parse(&text) {
                Ok(doc) => prop_assert!(parse(&doc.print()).is_ok()),
                Err(e) => {
                    prop_assert!(e.pos().is_some(), "unpositioned: {}", e);
                    check_position(&text, &e);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(3))]

        #[test]
        fn checks_are_deterministic(seed in any::<u64>()) {
            let doc = parse(MODELS[1]).unwrap();
            let opts = RunOptions { seed, trials: Some(3), ..RunOptions::default() };
            let a = run(&doc, &Command::Check("all".into()), &opts).unwrap().to_json();
            let b = run(&doc, &Command::Check("all".into()), &opts).unwrap().to_json();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn expressions_keep_their_values() {
        let doc = parse("chart M dim 1 coords x\nsection s on M { [x^(-2) - 2*x + sin(x)/3] }").unwrap();
        let e: Vec<&Expr> = doc.decls.iter().flat_map(|d| d.exprs()).collect();
        let v = e[e.len() - 1].eval(&Assignment::from_reals(&[("x", 0.5)])).unwrap();
        assert!((v.re - (4.0 - 1.0 + 0.5f64.sin() / 3.0)).abs() < 1e-14);
    }
}
