//! The registered identity checks, one builder per stable id.
//!
//! Each builder draws its random data from a [`Fixtures`] stream seeded by the
//! run seed and the check id, so a check's data and its sample points depend on
//! nothing else.

use std::sync::Arc;

use super::fixtures::{schwarzschild, sphere_time, Fixtures};
use super::oracle::{dirac_terms, load_oracle, scalar_gauge_terms, scalar_terms, OracleKind};
use super::{action_variation_oracle, run_check, stream_seed, Body, CheckOutcome, IdentityCheck, VerifyError};
use crate::connections::{
    gauge_curvature, involution, overconnection_covariant_derivative, overconnection_gauge,
    overconnection_gauge_expanded, overconnection_linear, prolong, FiberedChart, GaugeField, GaugeStructure,
    LinearConnection, Section,
};
use crate::geometry::{einstein, energy_divergence, levi_civita, AffineConnectionField, Chart, Matrix, MetricField};
use crate::models::komar::{komar_intermediate, komar_lift_current};
use crate::models::{
    dirac_lagrangian, einstein_from_currents, gravity_energy_tensor, gravity_lagrangian, maxwell_tensor,
    scalar_lagrangian, scalar_onshell_divergence_rhs, total_conservation, yang_mills_energy_tensor,
    yang_mills_lagrangian, DiracModel, GravityModel, KomarData, ScalarGaugeModel, ScalarModel, YangMillsModel,
};
use crate::symexpr::{Domain, Expr};
use crate::variational::{
    current_pullback, metric_stress_tensor, symmetry_defect, EnergyTensor, JetLagrangian, LiftField,
};

type Builder = fn(&mut Fixtures) -> Result<Body, VerifyError>;

/// A registered check.
#[derive(Clone, Copy)]
pub struct Entry {
    pub id: &'static str,
    /// Acceptance criterion the check belongs to, if any.
    pub criterion: Option<u8>,
    pub statement: &'static str,
    pub tol: f64,
    pub trials: usize,
    build: Builder,
}

impl Entry {
    const fn new(id: &'static str, criterion: u8, statement: &'static str, build: Builder) -> Self {
        Entry { id, criterion: Some(criterion), statement, tol: 1e-8, trials: 20, build }
    }

    const fn extra(id: &'static str, statement: &'static str, build: Builder) -> Self {
        Entry { id, criterion: None, statement, tol: 1e-8, trials: 20, build }
    }

    const fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// The check instantiated for `seed`.
    pub fn check(&self, seed: u64) -> Result<IdentityCheck, VerifyError> {
        let mut fx = Fixtures::new(stream_seed(seed, self.id));
        let body = (self.build)(&mut fx)?;
        let trials = if matches!(body, Body::Numeric { .. }) { self.trials } else { 1 };
        Ok(IdentityCheck { id: self.id.into(), statement: self.statement.into(), body, trials, tol: self.tol })
    }
}

pub fn registry() -> Vec<Entry> {
    vec![
        Entry::new("projectability", 1, "first-level components of the prolonged connection equal those of κ", projectability),
        Entry::new("involution", 2, "s_Γ∘s_Γ is the identity of JJE", involution_squared),
        Entry::new("nabla-kappa-equals-minus-rho", 3, "∇κ = −ρ for linear and su(2) connections", nabla_kappa),
        Entry::new("gamma-independence", 3, "∇κ is the same for two unrelated symmetric Γ", gamma_independence),
        Entry::new("gauge-linear-consistency", 4, "frame-expanded gauge overconnection equals the restricted linear one", gauge_linear),
        Entry::new("lift-current-scalar", 5, "(𝒰∘jφ)⌋X = jφ*(i_Y C) for the horizontal lift, charged scalar", lift_current_scalar),
        Entry::new("lift-current-yang-mills", 5, "(𝒰∘jκ)⌋X = jκ*(i_Y C) for the horizontal lift, su(2) gauge field", lift_current_ym),
        Entry::new("first-variation-scalar", 6, "first-variation defect vanishes, charged scalar", fv_scalar),
        Entry::new("first-variation-dirac", 6, "first-variation defect vanishes, Dirac field", fv_dirac),
        Entry::new("first-variation-yang-mills", 6, "first-variation defect vanishes, su(2) gauge field", fv_ym),
        Entry::new("first-variation-gravity", 6, "first-variation defect vanishes, gravity on the bundle of connections", fv_gravity),
        Entry::new("first-variation-scalar-gauge", 6, "first-variation defect vanishes, scalar coupled to su(2)", fv_coupled),
        Entry::new("action-variation-fd", 6, "finite-difference variation of the action equals ∫E·η", action_fd).tol(1e-4),
        Entry::new("energy-scalar", 7, "g·𝒰 = −2T, charged scalar", energy_scalar),
        Entry::new("energy-dirac", 7, "½𝒰_{{ab}} = −2T_ab, Dirac field, as stated", energy_dirac_literal),
        Entry::new("energy-dirac-symmetrized", 7, "𝒰_ab + 𝒰_ba = −2T_ab + ℓg_ab, Dirac field", energy_dirac_symmetrized),
        Entry::new("energy-yang-mills", 7, "−½𝒰_ab = T_ab, su(2) gauge field", energy_ym),
        Entry::new("energy-gravity", 7, "𝒰_grav = −2G√|g|", energy_gravity),
        Entry::new("maxwell-limit", 8, "abelian 𝒰 equals the Maxwell tensor on an electrostatic field", maxwell_limit),
        Entry::new("bianchi-schwarzschild", 9, "∇_aG^a_b = 0, Schwarzschild", bianchi_schwarzschild),
        Entry::new("bianchi-sphere-time", 9, "∇_aG^a_b = 0, S² × ℝ", bianchi_sphere_time),
        Entry::new("bianchi-random", 9, "∇_aG^a_b = 0, random polynomial metric", bianchi_random),
        Entry::new("schwarzschild-vacuum", 9, "G = 0 for Schwarzschild", schwarzschild_vacuum),
        Entry::new("komar-offshell", 10, "∇_bJ^b = 0 for the Komar current, any metric and X", komar_offshell).tol(1e-7),
        Entry::new("komar-lift", 11, "jΓ*(i_Y C_grav) equals the Komar current density", komar_lift_check).tol(1e-7),
        Entry::new("komar-intermediate", 11, "P·(R⌋X − Ric⊗X) = (2Ric⌋X − RX)√|g|", komar_intermediate_check),
        Entry::new("total-conservation-flat", 12, "∇·(𝒰_matter + 𝒰_gauge) = 0 on exact flat solutions", total_flat),
        Entry::new("total-conservation-offshell", 12, "∇·(𝒰_matter + 𝒰_gauge) equals the frozen Euler–Lagrange residual", total_offshell),
        Entry::new("einstein-from-currents-vacuum", 13, "total current conserved for every X on a vacuum metric", einstein_vacuum),
        Entry::new("einstein-from-currents-residual", 13, "total current defect equals −2(G√|g| + T)^a_b∇_aX^b", einstein_residual),
        Entry::extra("noether-offshell-scalar", "∇·𝒰 − √|g|·(on-shell value) equals the frozen residual, charged scalar", noether_scalar),
        Entry::extra("noether-offshell-dirac", "∇·T − √|g|·(on-shell value) equals the frozen residual, Dirac field", noether_dirac),
    ]
}

pub fn lookup(id: &str) -> Option<Entry> {
    registry().into_iter().find(|e| e.id == id)
}

/// Entries selected by `target`: `all`, a criterion number, or a check id.
pub fn select(target: &str) -> Result<Vec<Entry>, VerifyError> {
    if target == "all" {
        return Ok(registry());
    }
    if let Ok(n) = target.parse::<u8>() {
        let v: Vec<Entry> = registry().into_iter().filter(|e| e.criterion == Some(n)).collect();
        if !v.is_empty() {
            return Ok(v);
        }
    }
    lookup(target).map(|e| vec![e]).ok_or_else(|| VerifyError::UnknownCheck(target.into()))
}

/// Runs `entries` in order. Build failures become failed outcomes carrying the message.
pub fn run_entries(entries: &[Entry], seed: u64, timing: bool) -> Vec<CheckOutcome> {
    entries
        .iter()
        .map(|e| match e.check(seed) {
            Ok(c) => run_check(&c, seed, timing),
            Err(err) => CheckOutcome {
                id: e.id.into(),
                subject: None,
                statement: e.statement.into(),
                pass: false,
                trials: 0,
                seed,
                tol: e.tol,
                worst_error: f64::INFINITY,
                worst_index: 0,
                worst_point: Vec::new(),
                error: Some(err.to_string()),
                wall_ms: None,
            },
        })
        .collect()
}

fn chart(dim: usize) -> Arc<Chart> {
    let names = ["t", "x", "y", "z"];
    Chart::new(&format!("B{dim}"), &names[..dim], &vec![(-0.5, 0.5); dim]).expect("distinct coordinates")
}

fn coords(ch: &Chart) -> Vec<Expr> {
    (0..ch.dim()).map(|a| ch.coord(a)).collect()
}

fn lorentz(dim: usize) -> Vec<i64> {
    (0..dim).map(|a| if a == 0 { -1 } else { 1 }).collect()
}

fn numeric(lhs: Vec<Expr>, rhs: Vec<Expr>, domain: Domain) -> Body {
    Body::Numeric { lhs, rhs, domain }
}

fn zero_body(defect: Vec<Expr>, domain: Domain) -> Body {
    let zeros = vec![Expr::zero(); defect.len()];
    numeric(defect, zeros, domain)
}

fn flat(m: &Matrix) -> Vec<Expr> {
    m.iter().flatten().cloned().collect()
}

fn model_err<E: Into<crate::models::ModelError>>(e: E) -> VerifyError {
    VerifyError::Model(e.into())
}

fn projectability(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    for _ in 0..5 {
        let ch = chart(2);
        let fc = FiberedChart::unit(ch.clone(), &["u", "v"]);
        let k = fx.general_connection(&fc);
        let p = prolong(&k, &fx.symmetric_connection(&ch)).map_err(model_err)?;
        lhs.extend(p.first.into_iter().flatten());
        rhs.extend(k.k.into_iter().flatten());
    }
    Ok(Body::Exact { lhs, rhs })
}

fn involution_squared(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    let mut domain = Domain::new();
    for dim in [2, 3, 4, 2, 3] {
        let ch = chart(dim);
        let fc = FiberedChart::unit(ch.clone(), &["u"]);
        let s = involution(&fc, &fx.symmetric_connection(&ch)).map_err(model_err)?;
        let mut names: Vec<&String> = s.keys().collect();
        names.sort();
        for name in names {
            lhs.push(s[name].subst_many(&s));
            rhs.push(Expr::var(name));
        }
        domain.merge(&fc.domain_double());
    }
    Ok(numeric(lhs, rhs, domain))
}

/// `∇κ` for a linear connection, indexed like `ρ` and flattened.
fn nabla_linear(k: &LinearConnection, gamma: &AffineConnectionField) -> Result<Vec<Expr>, VerifyError> {
    let over = overconnection_linear(k, gamma).map_err(model_err)?;
    let nk = overconnection_covariant_derivative(&k.as_bundle_section(), &over).map_err(model_err)?;
    let (m, n) = (k.fc.m(), k.fc.n());
    let mut out = Vec::new();
    for row in nk.iter().take(m) {
        for b in 0..m {
            for i in 0..n {
                for j in 0..n {
                    out.push(row[(b * n + i) * n + j].clone());
                }
            }
        }
    }
    Ok(out)
}

fn nabla_gauge(k: &GaugeField, gamma: &AffineConnectionField) -> Result<Vec<Expr>, VerifyError> {
    let over = overconnection_gauge(k, gamma).map_err(model_err)?;
    let nk = overconnection_covariant_derivative(&k.as_bundle_section(), &over).map_err(model_err)?;
    Ok(nk.into_iter().flatten().collect())
}

fn random_pair(fx: &mut Fixtures, dim: usize) -> (LinearConnection, GaugeField, Arc<Chart>) {
    let ch = chart(dim);
    let k = fx.linear_connection(&FiberedChart::unit(ch.clone(), &["u", "v"]));
    let gk = fx.gauge_field(&Arc::new(GaugeStructure::su2()), &ch, "A");
    (k, gk, ch)
}

fn nabla_kappa(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    for dim in [2, 3] {
        let (k, gk, ch) = random_pair(fx, dim);
        let gamma = fx.symmetric_connection(&ch);
        lhs.extend(nabla_linear(&k, &gamma)?);
        rhs.extend(k.curvature().into_iter().flatten().flatten().flatten().map(|e| -e));
        lhs.extend(nabla_gauge(&gk, &gamma)?);
        rhs.extend(gauge_curvature(&gk).into_iter().flatten().flatten().map(|e| -e));
    }
    Ok(numeric(lhs, rhs, chart(3).domain()))
}

fn gamma_independence(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (k, gk, ch) = random_pair(fx, 3);
    let (g1, g2) = (fx.symmetric_connection(&ch), fx.symmetric_connection(&ch));
    let mut lhs = nabla_linear(&k, &g1)?;
    let mut rhs = nabla_linear(&k, &g2)?;
    lhs.extend(nabla_gauge(&gk, &g1)?);
    rhs.extend(nabla_gauge(&gk, &g2)?);
    Ok(numeric(lhs, rhs, ch.domain()))
}

fn gauge_linear(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let ch = chart(2);
    let k = fx.gauge_field(&Arc::new(GaugeStructure::su2()), &ch, "A");
    let g = fx.symmetric_connection(&ch);
    let fc = FiberedChart::unit(ch.clone(), &["z1", "z2"]);
    let lin = overconnection_linear(&k.expand(fc.clone()).map_err(model_err)?, &g).map_err(model_err)?;
    let emb = k.bundle_embedding(&fc);
    let gexp = overconnection_gauge_expanded(&k, &g).map_err(model_err)?;
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    for a in 0..2 {
        for b in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    lhs.push(gexp[a][b][i][j].clone());
                    rhs.push(lin.at((b * 2 + i) * 2 + j, a).subst_many(&emb));
                }
            }
        }
    }
    Ok(numeric(lhs, rhs, k.bundle().domain()))
}

fn random_scalar(fx: &mut Fixtures, dim: usize) -> Result<(ScalarModel, Section), VerifyError> {
    let ch = chart(dim);
    let g = fx.metric(&ch, &lorentz(dim), 2);
    let k = fx.linear_connection(&FiberedChart::unit(ch.clone(), &["u", "v"]));
    let model = ScalarModel::new(g, k, Expr::rational(3, 2))?;
    let sec = model.section(fx.complex_fields(&ch, 2), fx.complex_fields(&ch, 2))?;
    Ok((model, sec))
}

fn random_ym(fx: &mut Fixtures, dim: usize) -> Result<(YangMillsModel, GaugeField), VerifyError> {
    let ch = chart(dim);
    let g = fx.metric(&ch, &lorentz(dim), 2);
    let model = YangMillsModel::new(g, Arc::new(GaugeStructure::su2()), "A")?;
    let raw = (0..dim).map(|_| fx.fields(&ch, 3)).collect();
    let k = model.field(raw)?;
    Ok((model, k))
}

fn random_dirac(fx: &mut Fixtures) -> Result<(DiracModel, Section), VerifyError> {
    let ch = chart(2);
    let xs = coords(&ch);
    let coframe: Matrix = (0..2)
        .map(|l| (0..2).map(|a| Expr::int(i64::from(l == a)) + Expr::rational(1, 16) * fx.poly(&xs, 2, 2)).collect())
        .collect();
    let model = DiracModel::new(ch.clone(), coframe, fx.fields(&ch, 2), Expr::rational(2, 3))?;
    let sec = model.section(fx.complex_fields(&ch, 2), fx.complex_fields(&ch, 2))?;
    Ok((model, sec))
}

fn random_coupled(fx: &mut Fixtures) -> Result<(ScalarGaugeModel, Vec<Expr>, Vec<Expr>, GaugeField), VerifyError> {
    let ch = chart(2);
    let g = fx.metric(&ch, &lorentz(2), 2);
    let model = ScalarGaugeModel::new(g, Arc::new(GaugeStructure::su2()), Expr::int(1))?;
    let raw = (0..2).map(|_| fx.fields(&ch, 3)).collect();
    let k = model.ym.field(raw)?;
    Ok((model, fx.complex_fields(&ch, 2), fx.complex_fields(&ch, 2), k))
}

fn lift_current_scalar(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (model, sec) = random_scalar(fx, 2)?;
    let x = fx.vector(&model.g.chart);
    lift_current_scalar_body(&model, &sec, &x)
}

pub(crate) fn lift_current_scalar_body(model: &ScalarModel, sec: &Section, x: &[Expr]) -> Result<Body, VerifyError> {
    let lag = scalar_lagrangian(model)?;
    let u = model.energy_tensor()?.pullback(sec);
    let rhs = current_pullback(&LiftField::horizontal(x, &model.connection()), &lag, sec);
    Ok(numeric(EnergyTensor::contract(&u, x), rhs, model.g.chart.domain()))
}

fn lift_current_ym(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (model, k) = random_ym(fx, 3)?;
    let x = fx.vector(&model.g.chart);
    lift_current_ym_body(&model, &k, &x)
}

pub(crate) fn lift_current_ym_body(model: &YangMillsModel, k: &GaugeField, x: &[Expr]) -> Result<Body, VerifyError> {
    let u = yang_mills_energy_tensor(model, k)?;
    let over = overconnection_gauge(k, &model.gamma).map_err(model_err)?;
    let lag = yang_mills_lagrangian(model)?;
    let rhs = current_pullback(&LiftField::horizontal(x, &over.conn), &lag, &model.section(k));
    Ok(numeric(EnergyTensor::contract(&u, x), rhs, model.g.chart.domain()))
}

/// Lift with components polynomial in the base coordinates, two fiber coordinates and one jet coordinate.
pub(crate) fn random_lift(fx: &mut Fixtures, fc: &Arc<FiberedChart>) -> LiftField {
    let mut vars = coords(&fc.base);
    vars.extend((0..fc.n().min(2)).map(|i| fc.y(i)));
    vars.push(fc.ya(0, 0));
    let mut comp = |_| fx.rational(2, 3) + fx.poly(&vars, 2, 2);
    let base = (0..fc.m()).map(&mut comp).collect();
    let fiber = (0..fc.n()).map(&mut comp).collect();
    LiftField { fc: fc.clone(), base, fiber }
}

pub(crate) fn defect_body(fx: &mut Fixtures, lag: &JetLagrangian, sec: &Section) -> Body {
    let y = random_lift(fx, &lag.fc);
    zero_body(vec![symmetry_defect(&y, lag, sec)], lag.fc.base.domain())
}

fn fv_scalar(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (model, sec) = random_scalar(fx, 2)?;
    Ok(defect_body(fx, &scalar_lagrangian(&model)?, &sec))
}

fn fv_dirac(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (model, sec) = random_dirac(fx)?;
    Ok(defect_body(fx, &dirac_lagrangian(&model)?, &sec))
}

fn fv_ym(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (model, k) = random_ym(fx, 2)?;
    Ok(defect_body(fx, &yang_mills_lagrangian(&model)?, &model.section(&k)))
}

fn fv_gravity(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let ch = chart(2);
    let model = GravityModel::levi_civita(fx.metric(&ch, &lorentz(2), 2))?;
    Ok(defect_body(fx, &gravity_lagrangian(&model)?, &model.section()))
}

fn fv_coupled(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (model, phi, phibar, k) = random_coupled(fx)?;
    let sec = model.section(phi, phibar, &k)?;
    Ok(defect_body(fx, &model.lagrangian()?, &sec))
}

fn action_fd(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let ch = Chart::new("L", &["x"], &[(-1.0, 1.0)]).map_err(model_err)?;
    let fc = FiberedChart::unit(ch.clone(), &["u"]);
    let lag = JetLagrangian::new(fc.clone(), crate::symexpr::parse("1/2*u_a0^2 - 2*u^2").expect("literal"))
        .map_err(model_err)?;
    let phi = fx.fields(&ch, 1).remove(0);
    action_fd_body(fx, &lag, &phi)
}

/// Finite-difference action variation along a random bump vanishing at the chart's ends.
pub(crate) fn action_fd_body(fx: &mut Fixtures, lag: &JetLagrangian, phi: &Expr) -> Result<Body, VerifyError> {
    let ch = &lag.fc.base;
    let (lo, hi) = ch.bounds[0];
    let x = ch.coord(0);
    let s = (&x - real((lo + hi) / 2.0)).div(&real((hi - lo) / 2.0));
    let bump = (Expr::one() - s.powi(2)).powi(4);
    let eta = bump * (fx.rational(2, 3) + fx.poly(&[x], 2, 2));
    let (fd, el) = action_variation_oracle(lag, phi, &eta, 1e-3)?;
    Ok(Body::Values { lhs: vec![fd], rhs: vec![el] })
}

fn real(v: f64) -> Expr {
    let r = num::BigRational::from_float(v).expect("finite chart bound");
    Expr::constant(crate::symexpr::Const::from_ratio(r))
}

fn pulled_stress(lag: &JetLagrangian, sec: &Section) -> Result<Matrix, VerifyError> {
    let t = metric_stress_tensor(lag).map_err(model_err)?;
    Ok(t.iter().map(|r| r.iter().map(|e| sec.pullback(e, 1)).collect()).collect())
}

fn energy_scalar(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (model, sec) = random_scalar(fx, 2)?;
    energy_scalar_body(&model, &sec)
}

pub(crate) fn energy_scalar_body(model: &ScalarModel, sec: &Section) -> Result<Body, VerifyError> {
    let u = EnergyTensor::lower(&model.energy_tensor()?.pullback(sec), &model.g);
    let t = pulled_stress(&scalar_lagrangian(model)?, sec)?;
    let rhs = flat(&t).into_iter().map(|v| Expr::int(-2) * v).collect();
    Ok(numeric(flat(&u), rhs, model.g.chart.domain()))
}

/// `(𝒰_ab + 𝒰_ba, T_ab, ℓ∘jψ, g)`.
fn dirac_parts(model: &DiracModel, sec: &Section) -> Result<(Matrix, Matrix, Expr, Arc<MetricField>), VerifyError> {
    let lag = dirac_lagrangian(model)?;
    let u = EnergyTensor::lower(&model.energy_tensor()?.pullback(sec), &model.g);
    let m = model.g.dim();
    let sym = (0..m).map(|a| (0..m).map(|b| &u[a][b] + &u[b][a]).collect()).collect();
    let t = pulled_stress(&lag, sec)?;
    let ell = sec.pullback(lag.ell(), 1);
    Ok((sym, t, ell, model.g.clone()))
}

fn energy_dirac_literal(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (model, sec) = random_dirac(fx)?;
    energy_dirac_literal_body(&model, &sec)
}

pub(crate) fn energy_dirac_literal_body(model: &DiracModel, sec: &Section) -> Result<Body, VerifyError> {
    let (sym, t, _, g) = dirac_parts(model, sec)?;
    let lhs = flat(&sym).into_iter().map(|v| Expr::rational(1, 2) * v).collect();
    let rhs = flat(&t).into_iter().map(|v| Expr::int(-2) * v).collect();
    Ok(numeric(lhs, rhs, g.chart.domain()))
}

fn energy_dirac_symmetrized(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (model, sec) = random_dirac(fx)?;
    energy_dirac_symmetrized_body(&model, &sec)
}

pub(crate) fn energy_dirac_symmetrized_body(model: &DiracModel, sec: &Section) -> Result<Body, VerifyError> {
    let (sym, t, ell, g) = dirac_parts(model, sec)?;
    let m = g.dim();
    let rhs = (0..m)
        .flat_map(|a| (0..m).map(move |b| (a, b)))
        .map(|(a, b)| Expr::int(-2) * &t[a][b] + &ell * g.lower(a, b))
        .collect();
    Ok(numeric(flat(&sym), rhs, g.chart.domain()))
}

fn energy_ym(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (model, k) = random_ym(fx, 3)?;
    energy_ym_body(&model, &k)
}

pub(crate) fn energy_ym_body(model: &YangMillsModel, k: &GaugeField) -> Result<Body, VerifyError> {
    let u = EnergyTensor::lower(&yang_mills_energy_tensor(model, k)?, &model.g);
    let t = pulled_stress(&yang_mills_lagrangian(model)?, &model.section(k))?;
    let lhs = flat(&u).into_iter().map(|v| Expr::rational(-1, 2) * v).collect();
    Ok(numeric(lhs, flat(&t), model.g.chart.domain()))
}

fn energy_gravity(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let ch = chart(3);
    let model = GravityModel::levi_civita(fx.metric(&ch, &lorentz(3), 2))?;
    energy_gravity_body(&model)
}

pub(crate) fn energy_gravity_body(model: &GravityModel) -> Result<Body, VerifyError> {
    let u = gravity_energy_tensor(model)?;
    let gt = einstein(&model.g, &model.gamma);
    let sg = model.g.sqrt_abs_det();
    let rhs = gt.data.iter().map(|v| Expr::int(-2) * v * sg).collect();
    Ok(numeric(flat(&u), rhs, model.g.chart.domain()))
}

fn maxwell_limit(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let g = super::fixtures::minkowski(&["t", "x", "y", "z"], 0.5);
    let ch = &g.chart;
    let space: Vec<Expr> = (1..4).map(|a| ch.coord(a)).collect();
    let phi = fx.poly(&space, 3, 4);
    let a_pot = [phi, Expr::zero(), Expr::zero(), Expr::zero()];
    let model = YangMillsModel::new(g, Arc::new(GaugeStructure::u1()), "A")?;
    let k = model.field(a_pot.iter().map(|v| vec![v.clone()]).collect())?;
    maxwell_body(&model, &k)
}

/// Abelian energy tensor against the Maxwell tensor of the same potential.
pub(crate) fn maxwell_body(model: &YangMillsModel, k: &GaugeField) -> Result<Body, VerifyError> {
    let a_pot: Vec<Expr> = k.k.iter().map(|r| r[0].clone()).collect();
    let u = yang_mills_energy_tensor(model, k)?;
    Ok(numeric(flat(&u), flat(&maxwell_tensor(&model.g, &a_pot)), model.g.chart.domain()))
}

pub(crate) fn bianchi(g: &Arc<MetricField>) -> Body {
    let gamma = levi_civita(g);
    let gt = einstein(g, &gamma);
    let m = g.dim();
    let sg = g.sqrt_abs_det();
    let dens: Matrix = (0..m).map(|a| (0..m).map(|b| sg * gt.get(&[a, b])).collect()).collect();
    zero_body(energy_divergence(&dens, &gamma), g.chart.domain())
}

fn bianchi_schwarzschild(_: &mut Fixtures) -> Result<Body, VerifyError> {
    Ok(bianchi(&schwarzschild()))
}

fn bianchi_sphere_time(_: &mut Fixtures) -> Result<Body, VerifyError> {
    Ok(bianchi(&sphere_time()))
}

fn bianchi_random(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    Ok(bianchi(&fx.metric(&chart(3), &lorentz(3), 3)))
}

fn schwarzschild_vacuum(_: &mut Fixtures) -> Result<Body, VerifyError> {
    Ok(vacuum_body(&schwarzschild()))
}

pub(crate) fn vacuum_body(g: &Arc<MetricField>) -> Body {
    let gt = einstein(g, &levi_civita(g));
    zero_body(gt.data.clone(), g.chart.domain())
}

fn random_komar(fx: &mut Fixtures) -> Result<KomarData, VerifyError> {
    let ch = chart(3);
    let g = fx.metric(&ch, &lorentz(3), 3);
    let x = fx.vector(&ch);
    Ok(KomarData::new(g, x)?)
}

fn komar_offshell(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    Ok(komar_offshell_body(&random_komar(fx)?))
}

fn komar_lift_check(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    komar_lift_body(&random_komar(fx)?)
}

fn komar_intermediate_check(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    Ok(komar_intermediate_body(&random_komar(fx)?))
}

pub(crate) fn komar_offshell_body(data: &KomarData) -> Body {
    zero_body(vec![data.divergence()], data.g.chart.domain())
}

pub(crate) fn komar_lift_body(data: &KomarData) -> Result<Body, VerifyError> {
    let (lhs, rhs) = komar_lift_current(data)?;
    Ok(numeric(lhs, rhs, data.g.chart.domain()))
}

pub(crate) fn komar_intermediate_body(data: &KomarData) -> Body {
    let (lhs, rhs) = komar_intermediate(data);
    numeric(lhs, rhs, data.g.chart.domain())
}

fn total_flat(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let e = |s: &str| crate::symexpr::parse(s).expect("literal");
    let mut div = Vec::new();
    // ω² = k² + m² with ω = 5/4, k = 3/4, m = 1, in signature (+−) where ℓ has the
    // usual sign; a real field carries no current.
    let ch2 = Chart::new("M", &["t", "x"], &[(-0.5, 0.5); 2]).map_err(model_err)?;
    let g2 = MetricField::new(ch2, vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), Expr::int(-1)]])
        .map_err(model_err)?;
    let abelian = ScalarGaugeModel::new(g2, Arc::new(GaugeStructure::u1()), Expr::one())?;
    let wave = e("cos(5/4*t - 3/4*x)");
    let k0 = abelian.ym.field(vec![vec![Expr::zero()]; 2])?;
    div.extend(total_conservation(&abelian, vec![wave.clone()], vec![wave], &k0)?.divergence);
    // Constant field strength along one su(2) direction, matter at rest at zero.
    let g3 = super::fixtures::minkowski(&["t", "x", "y"], 0.5);
    let ch = g3.chart.clone();
    let su2 = ScalarGaugeModel::new(g3, Arc::new(GaugeStructure::su2()), Expr::one())?;
    let xs = coords(&ch);
    let lin: Vec<Expr> = (0..3).map(|_| Expr::sum(xs.iter().map(|x| fx.rational(3, 2) * x))).collect();
    let raw = (0..3).map(|a| vec![lin[a].clone(), Expr::zero(), Expr::zero()]).collect();
    let k = su2.ym.field(raw)?;
    let zeros = vec![Expr::zero(); 2];
    div.extend(total_conservation(&su2, zeros.clone(), zeros, &k)?.divergence);
    Ok(zero_body(div, ch.domain()))
}

pub(crate) fn with_template(kind: OracleKind, terms: super::oracle::Terms) -> Result<Body, VerifyError> {
    let rhs = load_oracle(kind)?.combine(&terms)?;
    Ok(numeric(terms.target, rhs, terms.domain))
}

fn total_offshell(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (model, phi, phibar, k) = random_coupled(fx)?;
    with_template(OracleKind::ScalarGauge, scalar_gauge_terms(&model, phi, phibar, &k)?)
}

fn noether_scalar(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (model, sec) = random_scalar(fx, 2)?;
    with_template(OracleKind::Scalar, scalar_terms(&model, &sec)?)
}

fn noether_dirac(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (model, sec) = random_dirac(fx)?;
    with_template(OracleKind::Dirac, dirac_terms(&model, &sec)?)
}

/// `√|g|·(on-shell value) + frozen residual`: the full off-shell `∇_a𝒰^a_b` of the scalar.
pub fn scalar_offshell_divergence(model: &ScalarModel, sec: &Section) -> Vec<Expr> {
    let rhs = scalar_onshell_divergence_rhs(model, sec);
    let sg = model.g.sqrt_abs_det();
    let residual = scalar_terms(model, sec)
        .and_then(|t| load_oracle(OracleKind::Scalar)?.combine(&t))
        .expect("frozen scalar template matches its terms");
    rhs.iter().zip(residual).map(|(r, e)| sg * r + e).collect()
}

/// Probe fields for the Einstein-from-currents check.
pub(crate) fn probes(fx: &mut Fixtures, ch: &Chart) -> Vec<Vec<Expr>> {
    (0..2).map(|_| fx.vector(ch)).collect()
}

fn einstein_vacuum(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let g = schwarzschild();
    let k = LinearConnection::zero(FiberedChart::unit(g.chart.clone(), &["u"]));
    let model = ScalarModel::new(g.clone(), k, Expr::one())?;
    let sec = model.section(vec![Expr::zero()], vec![Expr::zero()])?;
    let xs = probes(fx, &g.chart);
    einstein_defect_body(&model, &sec, &xs)
}

/// Total-current defects for the probes `xs`, each required to vanish.
pub(crate) fn einstein_defect_body(model: &ScalarModel, sec: &Section, xs: &[Vec<Expr>]) -> Result<Body, VerifyError> {
    let rep = einstein_from_currents(model, sec, xs, &scalar_offshell_divergence)?;
    Ok(zero_body(rep.current_defects, model.g.chart.domain()))
}

/// Scalar matter on a random metric: the Einstein residual does not vanish.
pub fn nonvacuum_instance(fx: &mut Fixtures) -> Result<(ScalarModel, Section, Vec<Vec<Expr>>), VerifyError> {
    let ch = chart(3);
    let g = fx.metric(&ch, &lorentz(3), 2);
    let k = LinearConnection::zero(FiberedChart::unit(ch.clone(), &["u"]));
    let model = ScalarModel::new(g, k, Expr::one())?;
    let sec = model.section(fx.fields(&ch, 1), fx.fields(&ch, 1))?;
    let xs = probes(fx, &ch);
    Ok((model, sec, xs))
}

fn einstein_residual(fx: &mut Fixtures) -> Result<Body, VerifyError> {
    let (model, sec, xs) = nonvacuum_instance(fx)?;
    let rep = einstein_from_currents(&model, &sec, &xs, &scalar_offshell_divergence)?;
    let m = model.g.dim();
    let rhs = xs
        .iter()
        .map(|x| {
            let nx = KomarData::new(model.g.clone(), x.clone()).map(|d| d.nabla_x());
            let nx = nx.expect("vector matches the chart");
            Expr::int(-2)
                * Expr::sum((0..m).flat_map(|a| (0..m).map(move |b| (a, b))).map(|(a, b)| &rep.einstein_residual[a][b] * &nx[a][b]))
        })
        .collect();
    Ok(numeric(rep.current_defects, rhs, model.g.chart.domain()))
}

/// The defect-equals-zero form of the Einstein-from-currents check on non-vacuum data;
/// expected to fail.
pub fn einstein_nonvacuum_check(seed: u64) -> Result<IdentityCheck, VerifyError> {
    let id = "einstein-from-currents-nonvacuum";
    let mut fx = Fixtures::new(stream_seed(seed, id));
    let (model, sec, xs) = nonvacuum_instance(&mut fx)?;
    let rep = einstein_from_currents(&model, &sec, &xs, &scalar_offshell_divergence)?;
    Ok(IdentityCheck::defect(id, "total current conserved for every X on a non-vacuum metric", rep.current_defects, model.g.chart.domain()))
}
