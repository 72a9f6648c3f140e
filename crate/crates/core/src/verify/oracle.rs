//! Euler–Lagrange residual templates.
//!
//! The on-shell divergences of the matter energy tensors become off-shell identities
//! once a combination of Euler–Lagrange terms is added. The combination is found
//! once by fitting the target against candidate terms on a random instance,
//! rationalizing the coefficients and re-checking them symbolically on a fresh
//! instance. The result is frozen in `fixtures/oracles/*.txt`; normal builds only
//! read it.

use std::fmt::Write as _;
use std::sync::Arc;

use num::complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::fixtures::Fixtures;
use super::VerifyError;
use crate::connections::{gauge_curvature, FiberedChart, GaugeField, GaugeStructure, GeneralConnection, Section};
use crate::geometry::{energy_divergence, levi_civita, Chart, Matrix, MetricField};
use crate::models::{
    dirac_lagrangian, dirac_onshell_divergence_rhs, scalar_lagrangian, scalar_onshell_divergence_rhs,
    total_conservation, DiracModel, ScalarGaugeModel, ScalarModel,
};
use crate::symexpr::{compare_arrays, parse, sample_point, Const, Domain, Evaluator, Expr, NumericError, NumericOptions};
use crate::variational::{canonical_energy_tensor, euler_lagrange, gu, metric_stress_tensor, sqrtg, JetLagrangian};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OracleKind {
    FreeScalar,
    Scalar,
    Dirac,
    ScalarGauge,
}

impl OracleKind {
    pub const ALL: [OracleKind; 4] = [OracleKind::FreeScalar, OracleKind::Scalar, OracleKind::Dirac, OracleKind::ScalarGauge];

    pub fn id(self) -> &'static str {
        match self {
            OracleKind::FreeScalar => "free-scalar",
            OracleKind::Scalar => "scalar",
            OracleKind::Dirac => "dirac",
            OracleKind::ScalarGauge => "scalar-gauge",
        }
    }

    pub fn from_id(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.id() == s)
    }

    fn fixture(self) -> &'static str {
        match self {
            OracleKind::FreeScalar => include_str!("../../fixtures/oracles/free-scalar.txt"),
            OracleKind::Scalar => include_str!("../../fixtures/oracles/scalar.txt"),
            OracleKind::Dirac => include_str!("../../fixtures/oracles/dirac.txt"),
            OracleKind::ScalarGauge => include_str!("../../fixtures/oracles/scalar-gauge.txt"),
        }
    }
}

/// A frozen residual template: `target_b = Σ_k c_k term_k,b`.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub id: String,
    pub terms: Vec<(String, Const)>,
    pub provenance: String,
}

/// Target and candidate terms of one instance, each indexed by the free covector index `b`.
#[derive(Clone, Debug)]
pub struct Terms {
    pub target: Vec<Expr>,
    pub basis: Vec<(&'static str, Vec<Expr>)>,
    pub domain: Domain,
}

impl Terms {
    pub fn term(&self, name: &str) -> Option<&Vec<Expr>> {
        self.basis.iter().find(|(n, _)| *n == name).map(|(_, v)| v)
    }
}

impl OracleResult {
    /// `Σ_k c_k term_k` over `terms`.
    pub fn combine(&self, terms: &Terms) -> Result<Vec<Expr>, VerifyError> {
        let m = terms.target.len();
        let mut out = vec![Vec::new(); m];
        for (name, c) in &self.terms {
            let col = terms.term(name).ok_or_else(|| VerifyError::Missing(self.id.clone(), format!("term `{name}`")))?;
            for (b, e) in col.iter().enumerate() {
                out[b].push(Expr::constant(c.clone()) * e);
            }
        }
        Ok(out.into_iter().map(Expr::sum).collect())
    }

    fn body(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# Euler–Lagrange residual template, generated by `jetcartan oracle`").unwrap();
        writeln!(s, "oracle {}", self.id).unwrap();
        writeln!(s, "provenance {}", self.provenance).unwrap();
        for (name, c) in &self.terms {
            writeln!(s, "term {name} {c}").unwrap();
        }
        s
    }

    /// Fixture text including the trailing checksum line.
    pub fn to_text(&self) -> String {
        let body = self.body();
        format!("{body}checksum {}\n", checksum(&body))
    }

    pub fn from_text(text: &str) -> Result<Self, VerifyError> {
        let bad = |msg: String| VerifyError::Fixture(first_word_after(text, "oracle"), msg);
        let pos = text.rfind("checksum ").ok_or_else(|| bad("no checksum line".into()))?;
        let (body, tail) = text.split_at(pos);
        let sum = tail["checksum ".len()..].trim();
        if sum != checksum(body) {
            return Err(bad("checksum mismatch".into()));
        }
        let mut id = None;
        let mut provenance = String::new();
        let mut terms = Vec::new();
        for line in body.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')) {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "oracle" => id = Some(rest.trim().to_string()),
                "provenance" => provenance = rest.trim().to_string(),
                "term" => {
                    let (name, c) = rest.trim().split_once(' ').ok_or_else(|| bad(format!("malformed term `{line}`")))?;
                    let c = parse(c)
                        .ok()
                        .and_then(|e| e.as_const().cloned().or_else(|| e.is_zero().then(Const::zero)))
                        .ok_or_else(|| bad(format!("coefficient `{c}` is not a constant")))?;
                    terms.push((name.to_string(), c));
                }
                _ => return Err(bad(format!("unknown line `{line}`"))),
            }
        }
        let id = id.ok_or_else(|| bad("no oracle line".into()))?;
        Ok(OracleResult { id, terms, provenance })
    }
}

fn first_word_after(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(key).map(|r| r.trim().to_string()))
        .unwrap_or_else(|| "?".into())
}

fn checksum(body: &str) -> String {
    Sha256::digest(body.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// The frozen template for `kind`, checksum verified.
pub fn load_oracle(kind: OracleKind) -> Result<OracleResult, VerifyError> {
    let r = OracleResult::from_text(kind.fixture())?;
    if r.id != kind.id() {
        return Err(VerifyError::Fixture(kind.id().into(), format!("file declares `{}`", r.id)));
    }
    Ok(r)
}

fn pair(l: &[Expr], r: &[Expr]) -> Expr {
    Expr::sum(l.iter().zip(r).map(|(a, b)| a * b))
}

fn column(m: usize, f: impl Fn(usize) -> Expr) -> Vec<Expr> {
    (0..m).map(f).collect()
}

fn pulled_el(lag: &JetLagrangian, sec: &Section) -> Vec<Expr> {
    euler_lagrange(lag).iter().map(|e| sec.pullback(e, 2)).collect()
}

/// Real scalar `ℓ = ½(g^{ab}φ_aφ_b − m²φ²)√|g|`, zero connection; target `∇_a𝒰^a_b`.
pub fn free_scalar_terms(g: &Arc<MetricField>, mass: &Expr, phi: Expr) -> Result<Terms, VerifyError> {
    let ch = &g.chart;
    let m = ch.dim();
    let fc = FiberedChart::unit(ch.clone(), &["u"]);
    let kin = Expr::sum((0..m).flat_map(|a| (0..m).map(move |b| (a, b))).map(|(a, b)| gu(a, b) * fc.ya(0, a) * fc.ya(0, b)));
    let density = Expr::rational(1, 2) * (kin - mass.powi(2) * fc.y(0).powi(2)) * sqrtg();
    let lag = JetLagrangian::with_metric(fc.clone(), density, g.clone()).map_err(crate::models::ModelError::from)?;
    let sec = Section::new(fc.clone(), vec![phi]).map_err(crate::models::ModelError::from)?;
    let u = canonical_energy_tensor(&lag, &GeneralConnection::zero(fc)).map_err(crate::models::ModelError::from)?;
    let gamma = levi_civita(g);
    let target = energy_divergence(&u.pullback(&sec), &gamma);
    let e = &pulled_el(&lag, &sec)[0];
    let p = &sec.comps[0];
    let sg = g.sqrt_abs_det();
    Ok(Terms {
        target,
        basis: vec![
            ("E.d_phi", column(m, |b| e * sec.d(0, b))),
            ("sqrtg.phi.d_phi", column(m, |b| sg * p * sec.d(0, b))),
            ("d(E.phi)", column(m, |b| ch.partial(&(e * p), b))),
        ],
        domain: ch.domain(),
    })
}

/// Target `∇_a𝒰^a_b − √|g|·(on-shell right-hand side)` for the charged scalar.
pub fn scalar_terms(model: &ScalarModel, sec: &Section) -> Result<Terms, VerifyError> {
    let (n, m) = (model.n(), model.g.dim());
    let lag = scalar_lagrangian(model)?;
    let div = energy_divergence(&model.energy_tensor()?.pullback(sec), &model.gamma);
    let rhs = scalar_onshell_divergence_rhs(model, sec);
    let sg = model.g.sqrt_abs_det();
    let target = column(m, |b| &div[b] - sg * &rhs[b]);
    let el = pulled_el(&lag, sec);
    let nab = model.connection().covariant_derivative(sec);
    let d: Matrix = (0..m).map(|b| (0..2 * n).map(|i| sec.d(i, b)).collect()).collect();
    let (e, ebar) = el.split_at(n);
    Ok(Terms {
        target,
        basis: vec![
            ("E.nabla_phi", column(m, |b| pair(e, &nab[b][..n]))),
            ("nabla_phibar.Ebar", column(m, |b| pair(&nab[b][n..], ebar))),
            ("E.d_phi", column(m, |b| pair(e, &d[b][..n]))),
            ("d_phibar.Ebar", column(m, |b| pair(&d[b][n..], ebar))),
        ],
        domain: model.g.chart.domain(),
    })
}

/// `l·M·r` for a row `l`, matrix `M` and column `r`.
fn bilinear(l: &[Expr], mat: &Matrix, r: &[Expr]) -> Expr {
    let n = l.len();
    Expr::sum((0..n).flat_map(|p| (0..n).map(move |q| (p, q))).filter(|&(p, q)| !mat[p][q].is_zero()).map(|(p, q)| &l[p] * &mat[p][q] * &r[q]))
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| Expr::sum((0..n).map(|k| &a[i][k] * &b[k][j]))).collect()).collect()
}

/// Target `∇_aT^a_b − √|g|·(on-shell right-hand side)` for the Dirac field, with
/// `T^a_b = g^{ac}T_{cb}` the metric stress density.
pub fn dirac_terms(model: &DiracModel, sec: &Section) -> Result<Terms, VerifyError> {
    let (n, m) = (model.spinor_dim(), model.g.dim());
    let g = &model.g;
    let ch = &g.chart;
    let lag = dirac_lagrangian(model)?;
    let t = metric_stress_tensor(&lag).map_err(crate::models::ModelError::from)?;
    let t: Matrix = t.iter().map(|r| r.iter().map(|e| sec.pullback(e, 1)).collect()).collect();
    let mixed: Matrix = (0..m).map(|a| (0..m).map(|b| Expr::sum((0..m).map(|c| g.upper(a, c) * &t[c][b]))).collect()).collect();
    let div = energy_divergence(&mixed, &model.gamma);
    let rhs = dirac_onshell_divergence_rhs(model, sec);
    let sg = g.sqrt_abs_det();
    let target = column(m, |b| &div[b] - sg * &rhs[b]);

    let el = pulled_el(&lag, sec);
    let (e, ebar) = el.split_at(n);
    let (psi, bar) = sec.comps.split_at(n);
    let nab = model.connection().covariant_derivative(sec);
    let d: Matrix = (0..m).map(|b| (0..2 * n).map(|i| sec.d(i, b)).collect()).collect();
    let (up, down) = (model.gamma_up(), model.gamma_down());
    let spin = |l: &[Expr], first: bool, r: &[Expr]| -> Vec<Expr> {
        let dens: Matrix = (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| {
                        let prod = if first { mat_mul(&up[a], &down[b]) } else { mat_mul(&down[b], &up[a]) };
                        bilinear(l, &prod, r)
                    })
                    .collect()
            })
            .collect();
        energy_divergence(&dens, &model.gamma)
    };
    // Σ_a l·γγ·∇_a r with the pair order chosen by `first`, the derivative on the right or left.
    let contracted = |b: usize, first: bool, left_derivative: bool| -> Expr {
        Expr::sum((0..m).map(|a| {
            let prod = if first { mat_mul(&up[a], &down[b]) } else { mat_mul(&down[b], &up[a]) };
            if left_derivative {
                bilinear(&nab[a][n..], &prod, ebar)
            } else {
                bilinear(e, &prod, &nab[a][..n])
            }
        }))
    };
    Ok(Terms {
        target,
        basis: vec![
            ("E.nabla_psi", column(m, |b| pair(e, &nab[b][..n]))),
            ("nabla_psibar.Ebar", column(m, |b| pair(&nab[b][n..], ebar))),
            ("E.d_psi", column(m, |b| pair(e, &d[b][..n]))),
            ("d_psibar.Ebar", column(m, |b| pair(&d[b][n..], ebar))),
            ("d(E.psi)", column(m, |b| ch.partial(&pair(e, psi), b))),
            ("d(psibar.Ebar)", column(m, |b| ch.partial(&pair(bar, ebar), b))),
            ("div(E.gup.gdown.psi)", spin(e, true, psi)),
            ("div(E.gdown.gup.psi)", spin(e, false, psi)),
            ("div(psibar.gup.gdown.Ebar)", spin(bar, true, ebar)),
            ("div(psibar.gdown.gup.Ebar)", spin(bar, false, ebar)),
            ("E.gup.gdown.nabla_psi", column(m, |b| contracted(b, true, false))),
            ("E.gdown.gup.nabla_psi", column(m, |b| contracted(b, false, false))),
            ("nabla_psibar.gup.gdown.Ebar", column(m, |b| contracted(b, true, true))),
            ("nabla_psibar.gdown.gup.Ebar", column(m, |b| contracted(b, false, true))),
            ("E.gdown.psi", column(m, |b| bilinear(e, &down[b], psi))),
            ("psibar.gdown.Ebar", column(m, |b| bilinear(bar, &down[b], ebar))),
        ],
        domain: ch.domain(),
    })
}

/// Target `∇_a(𝒰_matter + 𝒰_gauge)^a_b` for scalar matter coupled to a gauge field.
pub fn scalar_gauge_terms(
    model: &ScalarGaugeModel,
    phi: Vec<Expr>,
    phibar: Vec<Expr>,
    k: &GaugeField,
) -> Result<Terms, VerifyError> {
    let (n, m, dg) = (model.n(), model.fc.m(), model.ym.gs.dim());
    let ch = &model.ym.g.chart;
    let tc = total_conservation(model, phi, phibar, k)?;
    let sec = &tc.section;
    let el = &tc.el;
    let (e, rest) = el.split_at(n);
    let (ebar, ea) = rest.split_at(n);
    let kb: Vec<Matrix> = (0..m).map(|b| model.ym.gs.expand(&k.k[b])).collect();
    let (p, pb) = (&sec.comps[..n], &sec.comps[n..2 * n]);
    let nab_phi = |b: usize| -> Vec<Expr> {
        (0..n).map(|i| sec.d(i, b) - Expr::sum((0..n).map(|j| &kb[b][i][j] * &p[j]))).collect()
    };
    let nab_bar = |b: usize| -> Vec<Expr> {
        (0..n).map(|i| sec.d(n + i, b) + Expr::sum((0..n).map(|j| &pb[j] * &kb[b][j][i]))).collect()
    };
    let rho = gauge_curvature(k);
    let ea_at = |c: usize, i: usize| &ea[model.ym.index(c, i)];
    let sum_ci = |f: &dyn Fn(usize, usize) -> Expr| Expr::sum((0..m).flat_map(|c| (0..dg).map(move |i| (c, i))).map(|(c, i)| f(c, i)));
    Ok(Terms {
        target: tc.divergence.clone(),
        basis: vec![
            ("E.nabla_phi", column(m, |b| pair(e, &nab_phi(b)))),
            ("nabla_phibar.Ebar", column(m, |b| pair(&nab_bar(b), ebar))),
            ("E.d_phi", column(m, |b| pair(e, &(0..n).map(|i| sec.d(i, b)).collect::<Vec<_>>()))),
            ("d_phibar.Ebar", column(m, |b| pair(&(0..n).map(|i| sec.d(n + i, b)).collect::<Vec<_>>(), ebar))),
            ("EA.rho", column(m, |b| sum_ci(&|c, i| ea_at(c, i) * &rho[b][c][i]))),
            ("EA.d_kappa", column(m, |b| sum_ci(&|c, i| ea_at(c, i) * ch.partial(&k.k[c][i], b)))),
            ("d(EA.kappa)", column(m, |b| Expr::sum((0..m).map(|c| ch.partial(&Expr::sum((0..dg).map(|i| ea_at(c, i) * &k.k[b][i])), c))))),
        ],
        domain: ch.domain(),
    })
}

fn lorentz_chart(name: &str) -> Arc<Chart> {
    Chart::new(name, &["t", "x"], &[(-0.5, 0.5); 2]).expect("distinct coordinates")
}

/// A random dimension-2 instance of `kind`.
pub fn random_terms(kind: OracleKind, seed: u64) -> Result<Terms, VerifyError> {
    let mut fx = Fixtures::new(seed);
    let ch = lorentz_chart("P");
    let g = fx.metric(&ch, &[-1, 1], 2);
    match kind {
        OracleKind::FreeScalar => {
            let phi = fx.fields(&ch, 1).remove(0);
            free_scalar_terms(&g, &Expr::int(2), phi)
        }
        OracleKind::Scalar => {
            let k = fx.linear_connection(&FiberedChart::unit(ch.clone(), &["u", "v"]));
            let model = ScalarModel::new(g, k, Expr::rational(3, 2))?;
            let sec = model.section(fx.fields(&ch, 2), fx.fields(&ch, 2))?;
            scalar_terms(&model, &sec)
        }
        OracleKind::Dirac => {
            let coframe: Matrix = (0..2)
                .map(|l| (0..2).map(|a| Expr::int(i64::from(l == a)) + Expr::rational(1, 8) * fx.poly(&[ch.coord(0), ch.coord(1)], 2, 2)).collect())
                .collect();
            let a_pot = fx.fields(&ch, 2);
            let model = DiracModel::new(ch.clone(), coframe, a_pot, Expr::rational(2, 3))?;
            let sec = model.section(fx.complex_fields(&ch, 2), fx.complex_fields(&ch, 2))?;
            dirac_terms(&model, &sec)
        }
        OracleKind::ScalarGauge => {
            let gs = Arc::new(GaugeStructure::su2());
            let model = ScalarGaugeModel::new(g, gs, Expr::int(1))?;
            let raw: Vec<Vec<Expr>> = (0..2).map(|_| fx.fields(&ch, 3)).collect();
            let k = model.ym.field(raw)?;
            scalar_gauge_terms(&model, fx.complex_fields(&ch, 2), fx.complex_fields(&ch, 2), &k)
        }
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Best rational `p/q` with `q ≤ max_den`, by continued fractions.
fn rationalize(x: f64, max_den: i64) -> Option<(i64, i64)> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut v = x;
    for _ in 0..40 {
        let a = v.floor();
        let ai = a as i64;
        let (h2, k2) = (ai.checked_mul(h1)?.checked_add(h0)?, ai.checked_mul(k1)?.checked_add(k0)?);
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() < 1e-9 * (1.0 + x.abs()) {
            break;
        }
        let f = v - a;
        if f.abs() < 1e-12 {
            break;
        }
        v = 1.0 / f;
    }
    ((x - h1 as f64 / k1 as f64).abs() < 1e-7 * (1.0 + x.abs())).then_some((h1, k1))
}

fn rational_const(z: Complex64) -> Option<Const> {
    let (p, q) = rationalize(z.re, 720)?;
    let (r, s) = rationalize(z.im, 720)?;
    Some(Const::rational(p, q).add(&Const::rational(r, s).mul(&Const::imag_unit())))
}

/// Fits `terms.target` against `terms.basis` at `points` random points.
/// Returns `(basis index, coefficient)` pairs and the relative residual.
pub fn fit_terms(terms: &Terms, seed: u64, points: usize) -> Result<(Vec<(usize, Complex64)>, f64), VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut target = Vec::new();
    let mut cols: Vec<Vec<Complex64>> = vec![Vec::new(); terms.basis.len()];
    for _ in 0..points {
        let at = sample_point(&terms.domain, &mut rng);
        let mut ev = Evaluator::new(&at);
        let wrap = |source| NumericError::Eval { source, point: at.clone() };
        for b in 0..terms.target.len() {
            target.push(ev.eval(&terms.target[b]).map_err(wrap)?);
            for (k, (_, col)) in terms.basis.iter().enumerate() {
                cols[k].push(ev.eval(&col[b]).map_err(wrap)?);
            }
        }
    }
    let t_norm = norm(&target).max(1e-300);
    let mut residual = target.clone();
    let mut selected: Vec<usize> = Vec::new();
    let mut q: Vec<Vec<Complex64>> = Vec::new();
    while norm(&residual) > 1e-10 * t_norm {
        let mut best: Option<(usize, Vec<Complex64>, f64)> = None;
        for (k, col) in cols.iter().enumerate() {
            if selected.contains(&k) {
                continue;
            }
            let mut v = col.clone();
            for qq in &q {
                let c = dot(qq, &v);
                v.iter_mut().zip(qq).for_each(|(x, y)| *x -= c * y);
            }
            let nv = norm(&v);
            if nv <= 1e-9 * norm(col).max(1e-300) {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= nv);
            let gain = dot(&v, &residual).norm();
            if best.as_ref().is_none_or(|(_, _, g)| gain > *g) {
                best = Some((k, v, gain));
            }
        }
        let Some((k, v, gain)) = best else { break };
        if gain <= 1e-12 * t_norm {
            break;
        }
        let c = dot(&v, &residual);
        residual.iter_mut().zip(&v).for_each(|(x, y)| *x -= c * y);
        selected.push(k);
        q.push(v);
    }
    let rel = norm(&residual) / t_norm;
    // Least squares on the selected columns via normal equations.
    let s = selected.len();
    let mut a = vec![vec![Complex64::new(0.0, 0.0); s + 1]; s];
    for i in 0..s {
        for j in 0..s {
            a[i][j] = dot(&cols[selected[i]], &cols[selected[j]]);
        }
        a[i][s] = dot(&cols[selected[i]], &target);
    }
    for p in 0..s {
        let piv = (p..s).max_by(|&x, &y| a[x][p].norm().total_cmp(&a[y][p].norm())).unwrap_or(p);
        a.swap(p, piv);
        let d = a[p][p];
        for r in 0..s {
            if r != p {
                let f = a[r][p] / d;
                for c in p..=s {
                    let v = a[p][c];
                    a[r][c] -= f * v;
                }
            }
        }
    }
    let coeffs = (0..s).map(|i| (selected[i], a[i][s] / a[i][i])).collect();
    Ok((coeffs, rel))
}

/// Maintenance entry point: fit on one random instance, verify on another.
pub fn fit_oracle(kind: OracleKind, seed: u64, date: &str) -> Result<OracleResult, VerifyError> {
    let fit_on = random_terms(kind, seed)?;
    let (coeffs, rel) = fit_terms(&fit_on, seed, 12)?;
    let mut terms = Vec::new();
    for (k, c) in coeffs {
        let name = fit_on.basis[k].0;
        let c = rational_const(c).ok_or_else(|| VerifyError::NonCancellation {
            id: kind.id().into(),
            detail: format!("coefficient {c} of `{name}` is not a small rational (fit residual {rel:.2e})"),
        })?;
        if !c.is_zero() {
            terms.push((name.to_string(), c));
        }
    }
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    let result = OracleResult {
        id: kind.id().into(),
        terms,
        provenance: format!("{date} fit seed {seed}, dimension 2, fit residual {rel:.1e}, verified on seed {}", seed + 1),
    };
    let check = random_terms(kind, seed + 1)?;
    let rhs = result.combine(&check)?;
    let opts = NumericOptions { seed: seed + 1, ..NumericOptions::default() };
    let report = compare_arrays(&check.target, &rhs, &check.domain, &opts)?;
    if !report.pass {
        let k = report.worst_index;
        let mut shown = (&check.target[k] - &rhs[k]).to_string();
        if shown.len() > 2000 {
            shown.truncate(2000);
            shown.push_str(" …");
        }
        return Err(VerifyError::NonCancellation {
            id: kind.id().into(),
            detail: format!("worst relative error {:.3e}, residual component {k}: {shown}", report.worst_error),
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continued_fractions_recover_small_rationals() {
        assert_eq!(rationalize(-0.5, 720), Some((-1, 2)));
        assert_eq!(rationalize(2.0 / 3.0 + 1e-12, 720), Some((2, 3)));
        assert_eq!(rationalize(0.0, 720), Some((0, 1)));
        assert_eq!(rationalize(std::f64::consts::SQRT_2, 720), None);
    }

    #[test]
    fn fixtures_round_trip_and_detect_tampering() {
        let r = OracleResult {
            id: "demo".into(),
            terms: vec![("a".into(), Const::rational(-1, 2)), ("b".into(), Const::imag_unit())],
            provenance: "test".into(),
        };
        let text = r.to_text();
        assert_eq!(OracleResult::from_text(&text).unwrap(), r);
        let tampered = text.replace("-1/2", "1/2");
        assert!(matches!(OracleResult::from_text(&tampered), Err(VerifyError::Fixture(..))));
    }

    #[test]
    fn frozen_fixtures_load() {
        for kind in OracleKind::ALL {
            let r = load_oracle(kind).unwrap();
            assert_eq!(r.id, kind.id());
        }
    }

    #[test]
    fn free_scalar_residual_is_e_times_gradient() {
        let r = load_oracle(OracleKind::FreeScalar).unwrap();
        assert_eq!(r.terms, vec![("E.d_phi".to_string(), Const::one())]);
    }

    #[test]
    fn fit_recovers_planted_coefficients() {
        let dom = Domain::new().with("x", -1.0, 1.0);
        let x = parse("x").unwrap();
        let terms = Terms {
            target: vec![parse("3/4*sin(x) - 2*x^2").unwrap()],
            basis: vec![("s", vec![x.sin()]), ("q", vec![x.powi(2)]), ("c", vec![x.cos()])],
            domain: dom,
        };
        let (c, rel) = fit_terms(&terms, 1, 8).unwrap();
        assert!(rel < 1e-10);
        let mut got: Vec<(usize, Const)> = c.into_iter().map(|(k, z)| (k, rational_const(z).unwrap())).collect();
        got.sort_by_key(|p| p.0);
        assert_eq!(got, vec![(0, Const::rational(3, 4)), (1, Const::int(-2))]);
    }
}
