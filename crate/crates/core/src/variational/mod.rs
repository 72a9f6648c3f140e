//! First-order Lagrangian machinery in jet coordinates.
//!
//! A Lagrangian density `ℓ(x, y, y_a)` may also depend on the metric through the
//! reserved symbols `gu_a{a}_b{b}` (for `g^{ab}`) and `sqrtg` (for `√|g|`).
//! These are bound to an actual metric before any jet computation; only
//! [`metric_stress_tensor`] differentiates with respect to them.
//!
//! The Poincaré–Cartan form is never built on `JE`. Everything factors through
//! the pulled-back contraction `jφ*(i_Y C) = (ℓY^a + P^a_i(Y^i − Y^bφ^i_{,b})) dx_a`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::connections::{FiberedChart, GeneralConnection, Section};
use crate::geometry::{Matrix, MetricField};
use crate::symexpr::{free_vars_of, Expr};

pub const SQRTG: &str = "sqrtg";

/// Symbol name standing for `g^{ab}`.
pub fn gu_name(a: usize, b: usize) -> String {
    format!("gu_a{a}_b{b}")
}

pub fn gu(a: usize, b: usize) -> Expr {
    Expr::var(&gu_name(a, b))
}

pub fn sqrtg() -> Expr {
    Expr::var(SQRTG)
}

/// Substitution binding the metric symbols to `g`.
pub fn metric_binding(g: &MetricField) -> HashMap<String, Expr> {
    let m = g.dim();
    let mut map = HashMap::new();
    for a in 0..m {
        for b in 0..m {
            map.insert(gu_name(a, b), g.upper(a, b).clone());
        }
    }
    map.insert(SQRTG.to_string(), g.sqrt_abs_det().clone());
    map
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum VariationalError {
    #[error("symbol `{0}` is not a jet coordinate of the chart")]
    ForeignSymbol(String),
    #[error("Lagrangian has no declared metric dependence")]
    NoMetric,
    #[error("metric lives on chart `{0}`, Lagrangian on `{1}`")]
    ChartMismatch(String, String),
    #[error("expected {expected} components, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// First-order Lagrangian density `ℓ` with `L = ℓ dᵐx`.
#[derive(Clone, Debug)]
pub struct JetLagrangian {
    pub fc: Arc<FiberedChart>,
    pub density: Expr,
    pub metric: Option<Arc<MetricField>>,
    bound: OnceLock<Expr>,
}

fn jet_symbols(fc: &FiberedChart) -> Vec<String> {
    let mut names = fc.base.coords.clone();
    for i in 0..fc.n() {
        names.push(fc.fiber[i].clone());
        for a in 0..fc.m() {
            names.push(fc.ya_name(i, a));
        }
    }
    names
}

impl JetLagrangian {
    pub fn new(fc: Arc<FiberedChart>, density: Expr) -> Result<Self, VariationalError> {
        let allowed = jet_symbols(&fc);
        if let Some(v) = free_vars_of([&density]).into_iter().find(|v| !allowed.contains(v)) {
            return Err(VariationalError::ForeignSymbol(v));
        }
        Ok(JetLagrangian { fc, density, metric: None, bound: OnceLock::new() })
    }

    /// Density that may contain the metric symbols, bound to `g`.
    pub fn with_metric(fc: Arc<FiberedChart>, density: Expr, g: Arc<MetricField>) -> Result<Self, VariationalError> {
        if g.chart.coords != fc.base.coords {
            return Err(VariationalError::ChartMismatch(g.chart.name.clone(), fc.base.name.clone()));
        }
        let mut allowed = jet_symbols(&fc);
        allowed.extend(metric_binding(&g).into_keys());
        if let Some(v) = free_vars_of([&density]).into_iter().find(|v| !allowed.contains(v)) {
            return Err(VariationalError::ForeignSymbol(v));
        }
        Ok(JetLagrangian { fc, density, metric: Some(g), bound: OnceLock::new() })
    }

    /// `ℓ` with the metric symbols replaced by the metric's components.
    pub fn ell(&self) -> &Expr {
        self.bound.get_or_init(|| match &self.metric {
            Some(g) => self.density.subst_many(&metric_binding(g)),
            None => self.density.clone(),
        })
    }

    /// Sum of two Lagrangians on the same chart.
    pub fn plus(&self, other: &JetLagrangian) -> Result<JetLagrangian, VariationalError> {
        let density = &self.density + &other.density;
        match self.metric.clone().or_else(|| other.metric.clone()) {
            Some(g) => JetLagrangian::with_metric(self.fc.clone(), density, g),
            None => JetLagrangian::new(self.fc.clone(), density),
        }
    }
}

/// `d_a f = ∂_af + y^i_a∂_if + y^i_{ab}∂^b_if`, in the symmetric second-jet symbols.
pub fn horizontal_differential(fc: &FiberedChart, f: &Expr) -> Vec<Expr> {
    let (n, m) = (fc.n(), fc.m());
    let dy: Vec<Expr> = (0..n).map(|i| fc.dy(f, i)).collect();
    let dya: Vec<Vec<Expr>> = (0..n).map(|i| (0..m).map(|b| fc.dya(f, i, b)).collect()).collect();
    (0..m)
        .map(|a| {
            let mut t = vec![fc.dx(f, a)];
            for i in 0..n {
                t.push(fc.ya(i, a) * &dy[i]);
                for b in 0..m {
                    t.push(fc.ysym(i, a, b) * &dya[i][b]);
                }
            }
            Expr::sum(t)
        })
        .collect()
}

/// `P^a_i = ∂^a_iℓ`, indexed `[a][i]`.
pub fn momentum(lag: &JetLagrangian) -> Matrix {
    let fc = &lag.fc;
    (0..fc.m()).map(|a| (0..fc.n()).map(|i| fc.dya(lag.ell(), i, a)).collect()).collect()
}

/// `E_i = ∂_iℓ − d_a∂^a_iℓ`.
pub fn euler_lagrange(lag: &JetLagrangian) -> Vec<Expr> {
    let fc = &lag.fc;
    let p = momentum(lag);
    (0..fc.n())
        .map(|i| {
            let mut t = vec![fc.dy(lag.ell(), i)];
            for (a, row) in p.iter().enumerate() {
                t.push(-horizontal_differential(fc, &row[i]).swap_remove(a));
            }
            Expr::sum(t)
        })
        .collect()
}

/// A morphism `Y: JE → TE` over `E`, components in jet coordinates.
#[derive(Clone, Debug)]
pub struct LiftField {
    pub fc: Arc<FiberedChart>,
    /// `Y^a`.
    pub base: Vec<Expr>,
    /// `Y^i`.
    pub fiber: Vec<Expr>,
}

impl LiftField {
    pub fn new(fc: Arc<FiberedChart>, base: Vec<Expr>, fiber: Vec<Expr>) -> Result<Self, VariationalError> {
        if base.len() != fc.m() {
            return Err(VariationalError::Dimension { expected: fc.m(), got: base.len() });
        }
        if fiber.len() != fc.n() {
            return Err(VariationalError::Dimension { expected: fc.n(), got: fiber.len() });
        }
        Ok(LiftField { fc, base, fiber })
    }

    /// `X⌋κ`: `Y^a = X^a`, `Y^i = X^aκ^i_a`.
    pub fn horizontal(x: &[Expr], k: &GeneralConnection) -> Self {
        let fc = k.fc.clone();
        let fiber =
            (0..fc.n()).map(|i| Expr::sum(x.iter().enumerate().map(|(a, xa)| xa * &k.k[i][a]))).collect();
        LiftField { fc, base: x.to_vec(), fiber }
    }
}

/// `Y = X⌋dl + W = X^a∂x_a + (X^ay^i_a + W^i)∂y_i`.
pub fn lift_from_current(fc: Arc<FiberedChart>, x: &[Expr], w: &[Expr]) -> Result<LiftField, VariationalError> {
    if x.len() != fc.m() {
        return Err(VariationalError::Dimension { expected: fc.m(), got: x.len() });
    }
    if w.len() != fc.n() {
        return Err(VariationalError::Dimension { expected: fc.n(), got: w.len() });
    }
    let fiber = (0..fc.n())
        .map(|i| {
            let mut t: Vec<Expr> = x.iter().enumerate().map(|(a, xa)| xa * fc.ya(i, a)).collect();
            t.push(w[i].clone());
            Expr::sum(t)
        })
        .collect();
    Ok(LiftField { fc, base: x.to_vec(), fiber })
}

/// `Y^i − Y^by^i_b` in jet coordinates.
fn vertical_part(y: &LiftField) -> Vec<Expr> {
    let fc = &y.fc;
    (0..fc.n())
        .map(|i| {
            let mut t = vec![y.fiber[i].clone()];
            for (b, yb) in y.base.iter().enumerate() {
                t.push(-(yb * fc.ya(i, b)));
            }
            Expr::sum(t)
        })
        .collect()
}

/// Components of `jφ*(i_Y C)` along `dx_a`: `ℓY^a + P^a_i(Y^i − Y^bφ^i_{,b})`.
pub fn current_pullback(y: &LiftField, lag: &JetLagrangian, phi: &Section) -> Vec<Expr> {
    let p = momentum(lag);
    let u = vertical_part(y);
    let map = phi.jet_map(1);
    (0..lag.fc.m())
        .map(|a| {
            let mut t = vec![lag.ell() * &y.base[a]];
            for (i, ui) in u.iter().enumerate() {
                t.push(&p[a][i] * ui);
            }
            Expr::sum(t).subst_many(&map)
        })
        .collect()
}

/// Mixed energy-tensor density `𝒰^a_b`, indexed `[a][b]`.
#[derive(Clone, Debug)]
pub struct EnergyTensor {
    pub fc: Arc<FiberedChart>,
    pub comps: Matrix,
}

impl EnergyTensor {
    pub fn pullback(&self, phi: &Section) -> Matrix {
        let map = phi.jet_map(1);
        self.comps.iter().map(|r| r.iter().map(|e| e.subst_many(&map)).collect()).collect()
    }

    /// `(𝒰⌋X)^a = 𝒰^a_bX^b` for an already pulled-back tensor.
    pub fn contract(u: &Matrix, x: &[Expr]) -> Vec<Expr> {
        u.iter().map(|row| Expr::sum(row.iter().zip(x).map(|(ub, xb)| ub * xb))).collect()
    }

    /// `𝒰_{ab} = g_{ac}𝒰^c_b`.
    pub fn lower(u: &Matrix, g: &MetricField) -> Matrix {
        let m = g.dim();
        (0..m).map(|a| (0..m).map(|b| Expr::sum((0..m).map(|c| g.lower(a, c) * &u[c][b]))).collect()).collect()
    }
}

/// `𝒰^a_b = ℓδ^a_b − (y^i_b − κ^i_b)∂^a_iℓ`.
pub fn canonical_energy_tensor(lag: &JetLagrangian, k: &GeneralConnection) -> Result<EnergyTensor, VariationalError> {
    let fc = &lag.fc;
    if k.fc.fiber != fc.fiber || k.fc.base.coords != fc.base.coords {
        return Err(VariationalError::ChartMismatch(k.fc.base.name.clone(), fc.base.name.clone()));
    }
    let (n, m) = (fc.n(), fc.m());
    let p = momentum(lag);
    // ∇_b y^i = y^i_b − κ^i_b
    let nabla: Matrix = (0..m).map(|b| (0..n).map(|i| fc.ya(i, b) - &k.k[i][b]).collect()).collect();
    let comps = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| {
                    let mut t = Vec::with_capacity(n + 1);
                    if a == b {
                        t.push(lag.ell().clone());
                    }
                    for i in 0..n {
                        t.push(-(&nabla[b][i] * &p[a][i]));
                    }
                    Expr::sum(t)
                })
                .collect()
        })
        .collect();
    Ok(EnergyTensor { fc: fc.clone(), comps })
}

/// `T_{ab} = ∂ℓ/∂g^{ab}` with `∂√|g|/∂g^{ab} = −½g_{ab}√|g|`, symmetrized and then bound to the metric.
pub fn metric_stress_tensor(lag: &JetLagrangian) -> Result<Matrix, VariationalError> {
    let g = lag.metric.as_ref().ok_or(VariationalError::NoMetric)?;
    let m = g.dim();
    let bind = metric_binding(g);
    let d_sqrt = lag.density.diff(SQRTG).subst_many(&bind);
    let half = Expr::rational(1, 2);
    let mut t = vec![vec![Expr::zero(); m]; m];
    for a in 0..m {
        for b in a..m {
            let direct = if a == b {
                lag.density.diff(&gu_name(a, a))
            } else {
                &half * (lag.density.diff(&gu_name(a, b)) + lag.density.diff(&gu_name(b, a)))
            };
            let e = direct.subst_many(&bind) - &half * g.lower(a, b) * g.sqrt_abs_det() * &d_sqrt;
            t[a][b] = e.clone();
            t[b][a] = e;
        }
    }
    Ok(t)
}

/// First-variation identity defect
/// `d[jφ*(i_YC)] + jφ*(i_Y dC) − jφ*(L_Z C)`, the coefficient of `dᵐx`.
///
/// `jφ*(i_Y dC) = E_i(Y^i − Y^aφ^i_{,a})` along `j₂φ`, and
/// `jφ*(L_Z C) = ∂_a(ℓY^a) + U^i∂_iℓ + P^a_i∂_aU^i` with `U = (Y^i − Y^aφ^i_{,a})∘jφ`,
/// the latter computed from derivatives of pulled-back quantities only.
pub fn symmetry_defect(y: &LiftField, lag: &JetLagrangian, phi: &Section) -> Expr {
    let fc = &lag.fc;
    let (n, m) = (fc.n(), fc.m());
    let j1 = phi.jet_map(1);
    let j2 = phi.jet_map(2);
    let ch = &fc.base;

    let current = current_pullback(y, lag, phi);
    let div = Expr::sum((0..m).map(|a| ch.partial(&current[a], a)));

    let u: Vec<Expr> = vertical_part(y).into_iter().map(|e| e.subst_many(&j1)).collect();
    let el = euler_lagrange(lag);
    let el_term = Expr::sum((0..n).map(|i| el[i].subst_many(&j2) * &u[i]));

    let ell = lag.ell().subst_many(&j1);
    let p = momentum(lag);
    let mut inv = Vec::new();
    for a in 0..m {
        inv.push(ch.partial(&(&ell * y.base[a].subst_many(&j1)), a));
    }
    for i in 0..n {
        inv.push(&u[i] * fc.dy(lag.ell(), i).subst_many(&j1));
        for a in 0..m {
            inv.push(p[a][i].subst_many(&j1) * ch.partial(&u[i], a));
        }
    }
    div + el_term - Expr::sum(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Chart;
    use crate::symexpr::{compare_arrays, parse, NumericOptions};

    fn free_scalar() -> JetLagrangian {
        let ch = Chart::unit("P", &["x", "t"]);
        let fc = FiberedChart::unit(ch, &["u"]);
        let l = parse("(u_a0^2 + u_a1^2)/2 - 9/8*u^2").unwrap();
        JetLagrangian::new(fc, l).unwrap()
    }

    #[test]
    fn horizontal_differential_commutes_with_pullback() {
        let lag = free_scalar();
        let fc = &lag.fc;
        let f = parse("u*u_a0 + x*u_a1^2").unwrap();
        let phi = Section::new(fc.clone(), vec![parse("sin(x*t) + x^2").unwrap()]).unwrap();
        let d = horizontal_differential(fc, &f);
        let lhs: Vec<Expr> = d.iter().map(|e| phi.pullback(e, 2)).collect();
        let pf = phi.pullback(&f, 1);
        let rhs: Vec<Expr> = (0..2).map(|a| fc.dx(&pf, a)).collect();
        assert!(compare_arrays(&lhs, &rhs, &fc.base.domain(), &NumericOptions::default()).unwrap().pass);
        assert!(horizontal_differential(fc, &fc.x(0))[0].is_one());
        assert!(horizontal_differential(fc, &fc.y(0))[1].same_as(&fc.ya(0, 1)));
    }

    #[test]
    fn free_scalar_euler_lagrange() {
        let lag = free_scalar();
        let fc = &lag.fc;
        let e = euler_lagrange(&lag);
        let want = parse("-9/4*u - u_a0_a0 - u_a1_a1").unwrap();
        assert!(compare_arrays(&e, &[want], &fc.domain_second(), &NumericOptions::default()).unwrap().pass);
        let p = momentum(&lag);
        assert!(p[1][0].same_as(&fc.ya(0, 1)));
    }

    #[test]
    fn null_lagrangian_has_no_field_equation() {
        let ch = Chart::unit("P", &["x", "t"]);
        let fc = FiberedChart::unit(ch, &["u", "v"]);
        let f = parse("x*u*v + sin(t*u) + v^3").unwrap();
        // d_0 f lives on J₁E because f does not depend on first jets.
        let l = horizontal_differential(&fc, &f).swap_remove(0);
        let lag = JetLagrangian::new(fc.clone(), l).unwrap();
        let e = euler_lagrange(&lag);
        let zeros = vec![Expr::zero(); 2];
        assert!(compare_arrays(&e, &zeros, &fc.domain_second(), &NumericOptions::default()).unwrap().pass);
    }

    #[test]
    fn horizontal_lift_current_is_energy_contraction() {
        let ch = Chart::unit("P", &["x", "t"]);
        let fc = FiberedChart::unit(ch.clone(), &["u", "v"]);
        let l = parse("u_a0*v_a1 - x*u_a1^2/2 + u*v*t - sin(u)").unwrap();
        let lag = JetLagrangian::new(fc.clone(), l).unwrap();
        let k = GeneralConnection::new(
            fc.clone(),
            vec![vec![parse("x*v").unwrap(), parse("u - t").unwrap()], vec![parse("u*v").unwrap(), parse("2").unwrap()]],
        )
        .unwrap();
        let phi = Section::new(fc.clone(), vec![parse("x*t").unwrap(), parse("cos(x) + t").unwrap()]).unwrap();
        let x = [parse("1 + t^2").unwrap(), parse("x*t").unwrap()];
        let u = canonical_energy_tensor(&lag, &k).unwrap().pullback(&phi);
        let lhs = EnergyTensor::contract(&u, &x);
        let rhs = current_pullback(&LiftField::horizontal(&x, &k), &lag, &phi);
        assert!(compare_arrays(&lhs, &rhs, &ch.domain(), &NumericOptions::default()).unwrap().pass);
    }

    #[test]
    fn lift_from_current_reproduces_contractions() {
        let lag = free_scalar();
        let fc = lag.fc.clone();
        let x = [parse("x").unwrap(), parse("t*x").unwrap()];
        let w = [parse("u*x").unwrap()];
        let y = lift_from_current(fc.clone(), &x, &w).unwrap();
        let phi = Section::new(fc.clone(), vec![parse("exp(x - t)").unwrap()]).unwrap();
        let lhs = current_pullback(&y, &lag, &phi);
        let p = momentum(&lag);
        let rhs: Vec<Expr> =
            (0..2).map(|a| phi.pullback(&(lag.ell() * &x[a] + &p[a][0] * &w[0]), 1)).collect();
        assert!(compare_arrays(&lhs, &rhs, &fc.base.domain(), &NumericOptions::default()).unwrap().pass);
    }

    #[test]
    fn defect_vanishes_for_arbitrary_lifts() {
        let ch = Chart::unit("P", &["x", "t"]);
        let fc = FiberedChart::unit(ch.clone(), &["u", "v"]);
        let l = parse("u_a0*v_a1 - x*u_a1^2/2 + u*v*t - sin(u) + v_a0^2*u").unwrap();
        let lag = JetLagrangian::new(fc.clone(), l).unwrap();
        let y = LiftField::new(
            fc.clone(),
            vec![parse("u*x + v_a1").unwrap(), parse("t - u_a0").unwrap()],
            vec![parse("x*v*u_a1").unwrap(), parse("sin(t) + v").unwrap()],
        )
        .unwrap();
        let phi = Section::new(fc.clone(), vec![parse("x*t^2").unwrap(), parse("cos(x) + t").unwrap()]).unwrap();
        let d = symmetry_defect(&y, &lag, &phi);
        assert!(compare_arrays(&[d], &[Expr::zero()], &ch.domain(), &NumericOptions::default()).unwrap().pass);
    }

    #[test]
    fn translations_are_conserved_on_a_plane_wave() {
        // (6/5)² + (9/10)² = 9/4, so the wave solves the field equation of ℓ = ½|∇u|² − (9/8)u².
        let lag = free_scalar();
        let fc = lag.fc.clone();
        let phi = Section::new(fc.clone(), vec![parse("cos(6/5*x + 9/10*t)").unwrap()]).unwrap();
        let k = GeneralConnection::zero(fc.clone());
        for x in [[Expr::one(), Expr::zero()], [Expr::zero(), Expr::one()]] {
            let j = current_pullback(&LiftField::horizontal(&x, &k), &lag, &phi);
            let div = Expr::sum((0..2).map(|a| fc.dx(&j[a], a)));
            assert!(compare_arrays(&[div], &[Expr::zero()], &fc.base.domain(), &NumericOptions::default())
                .unwrap()
                .pass);
        }
    }

    #[test]
    fn stress_tensor_of_volume_density() {
        let ch = Chart::unit("P", &["x", "y"]);
        let fc = FiberedChart::unit(ch.clone(), &["u"]);
        let g = MetricField::new(
            ch.clone(),
            vec![vec![parse("2 + x").unwrap(), parse("y/4").unwrap()], vec![parse("y/4").unwrap(), parse("3").unwrap()]],
        )
        .unwrap();
        let lag = JetLagrangian::with_metric(fc, sqrtg(), g.clone()).unwrap();
        let t = metric_stress_tensor(&lag).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let want = Expr::rational(-1, 2) * g.lower(a, b) * g.sqrt_abs_det();
                assert!(compare_arrays(&[t[a][b].clone()], &[want], &ch.domain(), &NumericOptions::default())
                    .unwrap()
                    .pass);
            }
        }
        let plain = free_scalar();
        assert_eq!(metric_stress_tensor(&plain).unwrap_err(), VariationalError::NoMetric);
    }
}
