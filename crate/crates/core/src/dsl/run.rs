//! Commands over a resolved document: `check`, `compute`, `report`,
//! `einstein-from-currents`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::resolve::{Model, Object};
use super::{Document, DslError};
use crate::connections::{gauge_curvature, FiberedChart, Section};
use crate::geometry::{base_curvature, einstein, hodge_star, levi_civita, ricci, scalar_curvature, Matrix};
use crate::models::{
    dirac_lagrangian, gravity_energy_tensor, komar_current, scalar_lagrangian, yang_mills_energy_tensor,
    yang_mills_lagrangian,
};
use crate::symexpr::{sample_point, Domain, Evaluator, Expr};
use crate::variational::{euler_lagrange, metric_stress_tensor, JetLagrangian};
use crate::verify::fixtures::Fixtures;
use crate::verify::oracle::{dirac_terms, scalar_terms};
use crate::verify::suite::{self as s};
use crate::verify::{run_check, stream_seed, Body, CheckOutcome, IdentityCheck, OracleKind, VerifyError};

/// Check kinds a document can request, with the identity each one states.
const KINDS: &[(&str, &str)] = &[
    ("bianchi", "∇_aG^a_b = 0"),
    ("vacuum", "G^a_b = 0"),
    ("komar-offshell", "∇_bJ^b = 0 for the Komar current"),
    ("komar-lift", "jΓ*(i_Y C_grav) equals the Komar current density"),
    ("komar-intermediate", "P·(R⌋X − Ric⊗X) = (2Ric⌋X − RX)√|g|"),
    ("energy-scalar", "g·𝒰 = −2T"),
    ("lift-current-scalar", "(𝒰∘jφ)⌋X = jφ*(i_Y C) for the horizontal lift of random X"),
    ("noether-offshell-scalar", "∇·𝒰 − √|g|·(on-shell value) equals the frozen residual"),
    ("einstein-from-currents", "total current conserved for random X"),
    ("energy-dirac", "½𝒰_{{ab}} = −2T_ab"),
    ("energy-dirac-symmetrized", "𝒰_ab + 𝒰_ba = −2T_ab + ℓg_ab"),
    ("noether-offshell-dirac", "∇·T − √|g|·(on-shell value) equals the frozen residual"),
    ("energy-yang-mills", "−½𝒰_ab = T_ab"),
    ("lift-current-yang-mills", "(𝒰∘jκ)⌋X = jκ*(i_Y C) for the horizontal lift of random X"),
    ("maxwell-limit", "abelian 𝒰 equals the Maxwell tensor"),
    ("hodge-square", "**F = sign(det g)·F"),
    ("energy-gravity", "𝒰_grav = −2G√|g|"),
    ("first-variation", "first-variation defect vanishes for a random lift"),
    ("action-variation", "finite-difference variation of the action equals ∫E·η"),
];

pub fn check_kinds() -> Vec<&'static str> {
    KINDS.iter().map(|(k, _)| *k).collect()
}

fn statement(kind: &str) -> &'static str {
    KINDS.iter().find(|(k, _)| *k == kind).map_or("", |(_, s)| s)
}

pub(crate) fn applies(kind: &str, obj: &Object) -> bool {
    use Model as M;
    match (kind, obj) {
        ("bianchi" | "vacuum", Object::Metric(_) | Object::Model(M::Gravity(_))) => true,
        ("komar-offshell" | "komar-lift" | "komar-intermediate", Object::Komar(_)) => true,
        ("energy-scalar" | "lift-current-scalar" | "noether-offshell-scalar" | "einstein-from-currents", Object::Model(M::Scalar { .. })) => true,
        ("energy-dirac" | "energy-dirac-symmetrized" | "noether-offshell-dirac", Object::Model(M::Dirac { .. })) => true,
        ("energy-yang-mills" | "lift-current-yang-mills", Object::Model(M::YangMills { .. })) => true,
        ("maxwell-limit", Object::Model(M::YangMills { field, .. })) => field.gs.dim() == 1,
        ("hodge-square", Object::Model(M::YangMills { model, .. })) => model.g.dim() == 4,
        ("energy-gravity", Object::Model(M::Gravity(_))) => true,
        ("first-variation", Object::Model(_) | Object::Lagrangian(_)) => true,
        ("action-variation", Object::Lagrangian(l)) => l.fc.m() == 1 && l.fc.n() == 1,
        _ => false,
    }
}

pub(crate) fn needs_section(kind: &str, obj: &Object) -> bool {
    matches!(obj, Object::Lagrangian(_)) && matches!(kind, "first-variation" | "action-variation")
}

/// Kinds run by `check all` when the document declares no checks. Left out and
/// run only by name: the literal Dirac relation, and `vacuum` and
/// `einstein-from-currents`, which test whether the data solve field equations
/// rather than an identity.
fn in_default_set(kind: &str) -> bool {
    !matches!(kind, "energy-dirac" | "vacuum" | "einstein-from-currents")
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    /// `all`, a check kind, or a check kind restricted to one object (`kind:object`).
    Check(String),
    /// Object kind and optional subject name.
    Compute(String, Option<String>),
    Report,
    EinsteinFromCurrents,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    /// Overrides every check's own trial count.
    pub trials: Option<usize>,
    /// Overrides every check's own tolerance.
    pub tol: Option<f64>,
    pub orientation: i32,
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: 0, trials: None, tol: None, orientation: 1, timing: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Component {
    pub index: Vec<usize>,
    /// Printed expression, omitted when long.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    /// Largest modulus over the sample points.
    pub max_abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Computed {
    pub object: String,
    pub subject: String,
    pub points: usize,
    pub components: Vec<Component>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub seed: u64,
    pub orientation: i32,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckOutcome>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub computed: Vec<Computed>,
}

const PRINT_LIMIT: usize = 160;

impl Report {
    pub fn new(command: String, opts: &RunOptions) -> Self {
        Report { schema: 1, command, seed: opts.seed, orientation: opts.orientation, pass: true, checks: Vec::new(), computed: Vec::new() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable form: one line per check, one line per component.
    pub fn human(&self, verbose: bool) -> String {
        let mut out = String::new();
        for c in &self.computed {
            out.push_str(&format!("{} of {} ({} points)\n", c.object, c.subject, c.points));
            for comp in &c.components {
                let idx = comp.index.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
                let expr = comp.expr.as_deref().unwrap_or("…");
                out.push_str(&format!("  [{idx}] max|·| {:.3e}  {expr}\n", comp.max_abs));
            }
        }
        for c in &self.checks {
            out.push_str(&c.line());
            out.push('\n');
            if verbose {
                out.push_str(&format!("    {}\n", c.statement));
                if !c.worst_point.is_empty() {
                    let pt: Vec<String> = c.worst_point.iter().map(|w| format!("{}={:.6}", w.name, w.re)).collect();
                    out.push_str(&format!("    worst at component {}: {}\n", c.worst_index, pt.join(" ")));
                }
                out.push_str(&format!("    trials {}, seed {}\n", c.trials, c.seed));
            }
        }
        if !self.checks.is_empty() {
            let passed = self.checks.iter().filter(|c| c.pass).count();
            out.push_str(&format!("{passed}/{} checks passed\n", self.checks.len()));
        }
        out
    }
}

pub fn run(doc: &Document, cmd: &Command, opts: &RunOptions) -> Result<Report, DslError> {
    match cmd {
        Command::Check(target) => {
            let mut r = Report::new(format!("check {target}"), opts);
            r.checks = run_checks(doc, &select(doc, target)?, opts)?;
            r.pass = r.checks.iter().all(|c| c.pass);
            Ok(r)
        }
        Command::Report => {
            let mut r = Report::new("report".into(), opts);
            r.checks = run_checks(doc, &select(doc, "all")?, opts)?;
            r.pass = r.checks.iter().all(|c| c.pass);
            Ok(r)
        }
        Command::EinsteinFromCurrents => {
            let mut r = Report::new("einstein-from-currents".into(), opts);
            r.checks = run_checks(doc, &select(doc, "einstein-from-currents")?, opts)?;
            r.pass = r.checks.iter().all(|c| c.pass);
            Ok(r)
        }
        Command::Compute(object, subject) => {
            let mut r = Report::new(format!("compute {object}"), opts);
            let names: Vec<String> = match subject {
                Some(n) => vec![n.clone()],
                None => doc.env.objects().filter(|(_, o)| computes(object, o)).map(|(n, _)| n.to_string()).collect(),
            };
            if names.is_empty() {
                return Err(DslError::UnknownObject(object.clone()));
            }
            for name in names {
                r.computed.push(compute(doc, object, &name, opts)?);
            }
            Ok(r)
        }
    }
}

/// A check to run: kind, subject, optional section.
type Planned = (String, String, Option<String>);

fn select(doc: &Document, target: &str) -> Result<Vec<Planned>, DslError> {
    let env = &doc.env;
    let declared: Vec<Planned> = env
        .checks
        .iter()
        .flat_map(|c| match &c.subject {
            Some(s) => vec![(c.id.clone(), s.clone(), c.with.clone())],
            None => env
                .objects()
                .filter(|(_, o)| applies(&c.id, o) && !needs_section(&c.id, o))
                .map(|(n, _)| (c.id.clone(), n.to_string(), None))
                .collect(),
        })
        .collect();
    let every = |kind_ok: &dyn Fn(&str) -> bool| -> Vec<Planned> {
        let mut v = Vec::new();
        for (n, o) in env.objects() {
            for kind in check_kinds() {
                if kind_ok(kind) && applies(kind, o) && !needs_section(kind, o) {
                    v.push((kind.to_string(), n.to_string(), None));
                }
            }
        }
        v.extend(declared.iter().filter(|p| p.2.is_some() && kind_ok(&p.0)).cloned());
        v
    };
    if target == "all" {
        return Ok(if declared.is_empty() { every(&in_default_set) } else { declared });
    }
    let (kind, subject) = match target.split_once(':') {
        Some((k, s)) => (k, Some(s)),
        None => (target, None),
    };
    if !check_kinds().contains(&kind) {
        return Err(DslError::UnknownCheck(target.into()));
    }
    let mut v: Vec<Planned> = every(&|k| k == kind);
    for d in declared.iter().filter(|p| p.0 == kind) {
        if !v.contains(d) {
            v.push(d.clone());
        }
    }
    if let Some(sub) = subject {
        v.retain(|p| p.1 == sub);
    }
    if v.is_empty() {
        return Err(DslError::UnknownCheck(format!("{target} (nothing in the document it applies to)")));
    }
    Ok(v)
}

fn run_checks(doc: &Document, plan: &[Planned], opts: &RunOptions) -> Result<Vec<CheckOutcome>, DslError> {
    let mut out = Vec::new();
    for (kind, subject, with) in plan {
        let mut c = match build(doc, kind, subject, with.as_deref(), opts) {
            Ok(c) => run_check(&c, opts.seed, opts.timing),
            Err(e) => failed(kind, e, opts),
        };
        c.subject = Some(subject.clone());
        out.push(c);
    }
    Ok(out)
}

fn failed(kind: &str, e: VerifyError, opts: &RunOptions) -> CheckOutcome {
    CheckOutcome {
        id: kind.into(),
        subject: None,
        statement: statement(kind).into(),
        pass: false,
        trials: 0,
        seed: opts.seed,
        tol: opts.tol.unwrap_or(1e-8),
        worst_error: f64::INFINITY,
        worst_index: 0,
        worst_point: Vec::new(),
        error: Some(e.to_string()),
        wall_ms: None,
    }
}

fn section_of(doc: &Document, lag: &JetLagrangian, name: &str) -> Result<Section, VerifyError> {
    match doc.env.get(name) {
        Some(Object::Section { comps, .. }) => {
            Section::new(lag.fc.clone(), comps.clone()).map_err(|e| VerifyError::Model(e.into()))
        }
        _ => Err(VerifyError::Missing(name.into(), "a section".into())),
    }
}

fn build(doc: &Document, kind: &str, subject: &str, with: Option<&str>, opts: &RunOptions) -> Result<IdentityCheck, VerifyError> {
    let obj = doc.env.get(subject).ok_or_else(|| VerifyError::Missing(subject.into(), "a declaration".into()))?;
    let mut fx = Fixtures::new(stream_seed(opts.seed, &format!("{kind}/{subject}")));
    let (mut tol, mut trials) = (1e-8, 20);
    let body = match (kind, obj) {
        ("bianchi", Object::Metric(g)) => s::bianchi(g),
        ("bianchi", Object::Model(Model::Gravity(m))) => s::bianchi(&m.g),
        ("vacuum", Object::Metric(g)) => s::vacuum_body(g),
        ("vacuum", Object::Model(Model::Gravity(m))) => s::vacuum_body(&m.g),
        ("komar-offshell", Object::Komar(k)) => {
            tol = 1e-7;
            s::komar_offshell_body(k)
        }
        ("komar-lift", Object::Komar(k)) => {
            tol = 1e-7;
            s::komar_lift_body(k)?
        }
        ("komar-intermediate", Object::Komar(k)) => s::komar_intermediate_body(k),
        (_, Object::Model(Model::Scalar { model, section })) => match kind {
            "energy-scalar" => s::energy_scalar_body(model, section)?,
            "lift-current-scalar" => s::lift_current_scalar_body(model, section, &fx.vector(&model.g.chart))?,
            "noether-offshell-scalar" => s::with_template(OracleKind::Scalar, scalar_terms(model, section)?)?,
            "einstein-from-currents" => {
                let xs = s::probes(&mut fx, &model.g.chart);
                s::einstein_defect_body(model, section, &xs)?
            }
            _ => s::defect_body(&mut fx, &scalar_lagrangian(model)?, section),
        },
        (_, Object::Model(Model::Dirac { model, section })) => match kind {
            "energy-dirac" => s::energy_dirac_literal_body(model, section)?,
            "energy-dirac-symmetrized" => s::energy_dirac_symmetrized_body(model, section)?,
            "noether-offshell-dirac" => s::with_template(OracleKind::Dirac, dirac_terms(model, section)?)?,
            _ => s::defect_body(&mut fx, &dirac_lagrangian(model)?, section),
        },
        (_, Object::Model(Model::YangMills { model, field })) => match kind {
            "energy-yang-mills" => s::energy_ym_body(model, field)?,
            "lift-current-yang-mills" => s::lift_current_ym_body(model, field, &fx.vector(&model.g.chart))?,
            "maxwell-limit" => s::maxwell_body(model, field)?,
            "hodge-square" => hodge_square(model.g.as_ref(), &gauge_curvature(field), opts.orientation)?,
            _ => s::defect_body(&mut fx, &yang_mills_lagrangian(model)?, &model.section(field)),
        },
        ("energy-gravity", Object::Model(Model::Gravity(m))) => s::energy_gravity_body(m)?,
        ("first-variation", Object::Model(Model::Gravity(m))) => {
            s::defect_body(&mut fx, &crate::models::gravity_lagrangian(m)?, &m.section())
        }
        ("first-variation", Object::Lagrangian(lag)) => {
            let sec = section_of(doc, lag, with.unwrap_or_default())?;
            s::defect_body(&mut fx, lag, &sec)
        }
        ("action-variation", Object::Lagrangian(lag)) => {
            let sec = section_of(doc, lag, with.unwrap_or_default())?;
            tol = 1e-4;
            trials = 1;
            s::action_fd_body(&mut fx, lag, &sec.comps[0])?
        }
        _ => return Err(VerifyError::UnknownCheck(format!("{kind} on {subject}"))),
    };
    if !matches!(body, Body::Numeric { .. }) {
        trials = 1;
    }
    Ok(IdentityCheck {
        id: kind.into(),
        statement: statement(kind).into(),
        body,
        trials: opts.trials.unwrap_or(trials),
        tol: opts.tol.unwrap_or(tol),
    })
}

/// `**F^I = sign(det g)·F^I` for each Lie-algebra component of a 4-D field strength.
fn hodge_square(g: &crate::geometry::MetricField, rho: &[Vec<Vec<Expr>>], orientation: i32) -> Result<Body, VerifyError> {
    let d = rho[0][0].len();
    let sign = Expr::int(g.det_sign() as i64);
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    for i in 0..d {
        let f: Matrix = (0..4).map(|a| (0..4).map(|b| rho[a][b][i].clone()).collect()).collect();
        let star = hodge_star(g, &f, orientation).map_err(|e| VerifyError::Model(e.into()))?;
        let twice = hodge_star(g, &star, orientation).map_err(|e| VerifyError::Model(e.into()))?;
        lhs.extend(twice.into_iter().flatten());
        rhs.extend(f.into_iter().flatten().map(|v| &sign * v));
    }
    Ok(Body::Numeric { lhs, rhs, domain: g.chart.domain() })
}

const COMPUTE_OBJECTS: &[&str] = &[
    "metric",
    "inverse",
    "christoffel",
    "ricci",
    "scalar-curvature",
    "einstein",
    "energy",
    "stress",
    "euler-lagrange",
    "curvature",
    "komar",
    "hodge",
];

pub fn compute_objects() -> &'static [&'static str] {
    COMPUTE_OBJECTS
}

fn metric_of(obj: &Object) -> Option<&std::sync::Arc<crate::geometry::MetricField>> {
    match obj {
        Object::Metric(g) => Some(g),
        Object::Model(Model::Gravity(m)) => Some(&m.g),
        Object::Komar(k) => Some(&k.g),
        _ => None,
    }
}

fn computes(object: &str, obj: &Object) -> bool {
    match object {
        "metric" | "inverse" | "christoffel" | "ricci" | "scalar-curvature" | "einstein" => matches!(obj, Object::Metric(_)),
        "energy" | "stress" => matches!(obj, Object::Model(_)),
        "euler-lagrange" => matches!(obj, Object::Model(_) | Object::Lagrangian(_)),
        "curvature" => matches!(obj, Object::Gauge(_) | Object::Connection(_)),
        "komar" => matches!(obj, Object::Komar(_)),
        "hodge" => matches!(obj, Object::Model(Model::YangMills { model, .. }) if model.g.dim() == 4),
        _ => false,
    }
}

type Indexed = Vec<(Vec<usize>, Expr)>;

/// `(index, expression)` pairs of an object and the box they are sampled on.
fn components(object: &str, obj: &Object, opts: &RunOptions) -> Result<(Indexed, Domain), VerifyError> {
    let bad = || VerifyError::UnknownCheck(format!("{object} of a {}", obj.kind()));
    let dom = obj.chart().domain();
    let mat = |m: &Matrix| -> Vec<(Vec<usize>, Expr)> {
        m.iter().enumerate().flat_map(|(a, r)| r.iter().enumerate().map(move |(b, e)| (vec![a, b], e.clone()))).collect()
    };
    let vec1 = |v: Vec<Expr>| -> Vec<(Vec<usize>, Expr)> { v.into_iter().enumerate().map(|(a, e)| (vec![a], e)).collect() };
    let out = match object {
        "metric" | "inverse" | "christoffel" | "ricci" | "scalar-curvature" | "einstein" => {
            let g = metric_of(obj).ok_or_else(bad)?;
            let lc = levi_civita(g);
            let m = g.dim();
            match object {
                "metric" => mat(g.matrix()),
                "inverse" => mat(g.inverse()),
                "christoffel" => (0..m)
                    .flat_map(|a| (0..m).flat_map(move |c| (0..m).map(move |b| (a, c, b))))
                    .map(|(a, c, b)| (vec![a, c, b], lc.at(a, c, b).clone()))
                    .collect(),
                "ricci" => {
                    let r = ricci(&base_curvature(&lc));
                    (0..m).flat_map(|a| (0..m).map(move |b| (a, b))).map(|(a, b)| (vec![a, b], r.get(&[a, b]).clone())).collect()
                }
                "scalar-curvature" => vec![(vec![], scalar_curvature(g, &ricci(&base_curvature(&lc))))],
                _ => {
                    let gt = einstein(g, &lc);
                    (0..m).flat_map(|a| (0..m).map(move |b| (a, b))).map(|(a, b)| (vec![a, b], gt.get(&[a, b]).clone())).collect()
                }
            }
        }
        "energy" => match obj {
            Object::Model(Model::Scalar { model, section }) => mat(&model.energy_tensor()?.pullback(section)),
            Object::Model(Model::Dirac { model, section }) => mat(&model.energy_tensor()?.pullback(section)),
            Object::Model(Model::YangMills { model, field }) => mat(&yang_mills_energy_tensor(model, field)?),
            Object::Model(Model::Gravity(m)) => mat(&gravity_energy_tensor(m)?),
            _ => return Err(bad()),
        },
        "stress" | "euler-lagrange" => {
            let (lag, sec) = match obj {
                Object::Model(Model::Scalar { model, section }) => (scalar_lagrangian(model)?, Some(section.clone())),
                Object::Model(Model::Dirac { model, section }) => (dirac_lagrangian(model)?, Some(section.clone())),
                Object::Model(Model::YangMills { model, field }) => (yang_mills_lagrangian(model)?, Some(model.section(field))),
                Object::Model(Model::Gravity(m)) => (crate::models::gravity_lagrangian(m)?, Some(m.section())),
                Object::Lagrangian(l) if object == "euler-lagrange" => (l.clone(), None),
                _ => return Err(bad()),
            };
            if object == "stress" {
                let t = metric_stress_tensor(&lag).map_err(|e| VerifyError::Model(e.into()))?;
                let sec = sec.ok_or_else(bad)?;
                mat(&t.iter().map(|r| r.iter().map(|e| sec.pullback(e, 1)).collect()).collect())
            } else {
                let el = euler_lagrange(&lag);
                match sec {
                    Some(sec) => vec1(el.iter().map(|e| sec.pullback(e, 2)).collect()),
                    None => return Ok((vec1(el), jet_domain(&lag.fc))),
                }
            }
        }
        "curvature" => match obj {
            Object::Gauge(k) => {
                let r = gauge_curvature(k);
                let (m, d) = (k.chart.dim(), k.gs.dim());
                (0..m)
                    .flat_map(|a| (0..m).flat_map(move |b| (0..d).map(move |i| (a, b, i))))
                    .map(|(a, b, i)| (vec![a, b, i], r[a][b][i].clone()))
                    .collect()
            }
            Object::Connection(k) => {
                let r = k.curvature();
                let (m, n) = (k.fc.m(), k.fc.n());
                let mut v = Vec::new();
                for a in 0..m {
                    for b in 0..m {
                        for i in 0..n {
                            for j in 0..n {
                                v.push((vec![a, b, i, j], r[a][b][i][j].clone()));
                            }
                        }
                    }
                }
                v
            }
            _ => return Err(bad()),
        },
        "komar" => match obj {
            Object::Komar(k) => vec1(komar_current(k).density),
            _ => return Err(bad()),
        },
        "hodge" => match obj {
            Object::Model(Model::YangMills { model, field }) => {
                let rho = gauge_curvature(field);
                let mut v = Vec::new();
                for i in 0..field.gs.dim() {
                    let f: Matrix = (0..4).map(|a| (0..4).map(|b| rho[a][b][i].clone()).collect()).collect();
                    let star = hodge_star(&model.g, &f, opts.orientation).map_err(|e| VerifyError::Model(e.into()))?;
                    for (a, row) in star.into_iter().enumerate() {
                        for (b, e) in row.into_iter().enumerate() {
                            v.push((vec![a, b, i], e));
                        }
                    }
                }
                v
            }
            _ => return Err(bad()),
        },
        _ => return Err(bad()),
    };
    Ok((out, dom))
}

fn jet_domain(fc: &FiberedChart) -> Domain {
    fc.domain_second()
}

fn compute(doc: &Document, object: &str, subject: &str, opts: &RunOptions) -> Result<Computed, DslError> {
    if !COMPUTE_OBJECTS.contains(&object) {
        return Err(DslError::UnknownObject(object.into()));
    }
    let obj = doc.env.get(subject).ok_or_else(|| DslError::UnknownObject(subject.into()))?;
    if !computes(object, obj) {
        return Err(DslError::UnknownObject(format!("{object} of the {} `{subject}`", obj.kind())));
    }
    let (comps, domain) = components(object, obj, opts)?;
    let points = opts.trials.unwrap_or(20);
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(opts.seed, &format!("compute/{object}/{subject}")));
    let mut max_abs = vec![0.0f64; comps.len()];
    for _ in 0..points {
        let at = sample_point(&domain, &mut rng);
        let mut ev = Evaluator::new(&at);
        for (k, (_, e)) in comps.iter().enumerate() {
            let v = ev.eval(e).map(|v| v.norm()).unwrap_or(f64::NAN);
            if v.is_nan() || v > max_abs[k] {
                max_abs[k] = v;
            }
        }
    }
    let components = comps
        .into_iter()
        .zip(max_abs)
        .map(|((index, e), max_abs)| {
            let text = e.to_string();
            Component { index, expr: (text.len() <= PRINT_LIMIT).then_some(text), max_abs }
        })
        .collect();
    Ok(Computed { object: object.into(), subject: subject.into(), points, components })
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    const DOC: &str = "chart M dim 2 coords t x
metric g on M { [-1, 0; 0, 1 + t*x/4] }
section phi on M { [sin(t) + x^2] }
section X on M { [1 + x, t*x] }
model S scalar { metric g; field phi; mass 3/2 }
komar K { metric g; vector X }
";

    #[test]
    fn every_applicable_check_passes() {
        let doc = parse(DOC).unwrap();
        let r = run(&doc, &Command::Check("all".into()), &RunOptions::default()).unwrap();
        assert!(r.pass, "{}", r.human(true));
        assert!(r.checks.iter().any(|c| c.id == "komar-offshell" && c.subject.as_deref() == Some("K")));
    }

    #[test]
    fn unknown_targets_are_errors() {
        let doc = parse(DOC).unwrap();
        assert!(matches!(run(&doc, &Command::Check("nope".into()), &RunOptions::default()), Err(DslError::UnknownCheck(_))));
        let c = Command::Compute("einstein".into(), Some("S".into()));
        assert!(matches!(run(&doc, &c, &RunOptions::default()), Err(DslError::UnknownObject(_))));
    }

    #[test]
    fn compute_metric_reports_components() {
        let doc = parse(DOC).unwrap();
        let r = run(&doc, &Command::Compute("metric".into(), None), &RunOptions::default()).unwrap();
        assert_eq!(r.computed[0].components.len(), 4);
        assert_eq!(r.computed[0].components[0].expr.as_deref(), Some("-1"));
        assert_eq!(r.computed[0].components[0].max_abs, 1.0);
    }
}
