//! Metric-affine gravity: `g` and a symmetric `Γ` as independent fields, with
//! `ℓ = g^{ac}R_{ab}{}^b{}_c√|g|` on the bundle of linear connections of `TM`.

use std::sync::Arc;

use super::{delta, ModelError};
use crate::connections::{overconnection_linear, FiberedChart, LinearConnection, Overconnection, Section};
use crate::geometry::{einstein, AffineConnectionField, Matrix, MetricField};
use crate::symexpr::Expr;
use crate::variational::{
    canonical_energy_tensor, current_pullback, gu, sqrtg, JetLagrangian, LiftField,
};

#[derive(Clone, Debug)]
pub struct GravityModel {
    pub g: Arc<MetricField>,
    pub gamma: AffineConnectionField,
    /// `Γ` as a linear connection of `TM`.
    pub linear: LinearConnection,
    /// Bundle of linear connections of `TM`, coordinates `y_b{}^c{}_d` at `(b·m + c)·m + d`.
    pub bundle: Arc<FiberedChart>,
}

impl GravityModel {
    pub fn new(g: Arc<MetricField>, gamma: AffineConnectionField) -> Result<Self, ModelError> {
        if !gamma.symmetric {
            return Err(ModelError::Unsupported("gravity", "a symmetric connection".into()));
        }
        if gamma.chart.coords != g.chart.coords {
            return Err(ModelError::Unsupported("gravity", "g and Γ on the same chart".into()));
        }
        let m = g.dim();
        let names: Vec<String> = (0..m).map(|c| format!("e{c}")).collect();
        let tm = FiberedChart::from_owned(g.chart.clone(), names, vec![(-1.0, 1.0); m])?;
        let linear = LinearConnection::new(tm, gamma.as_linear())?;
        let bundle = linear.bundle();
        Ok(GravityModel { g, gamma, linear, bundle })
    }

    /// Model with `Γ` the Levi-Civita connection of `g`.
    pub fn levi_civita(g: Arc<MetricField>) -> Result<Self, ModelError> {
        let gamma = crate::geometry::levi_civita(&g);
        Self::new(g, gamma)
    }

    pub fn index(&self, b: usize, c: usize, d: usize) -> usize {
        let m = self.g.dim();
        (b * m + c) * m + d
    }

    /// `Γ` as a section of the connection bundle.
    pub fn section(&self) -> Section {
        Section { fc: self.bundle.clone(), comps: self.linear.as_bundle_section() }
    }

    /// `Γ↑`, built from `Γ` itself.
    pub fn overconnection(&self) -> Overconnection {
        overconnection_linear(&self.linear, &self.gamma).expect("Γ is symmetric")
    }

    /// `R_{ab}{}^c{}_d` in jet symbols of the connection bundle.
    pub fn formal_curvature(&self) -> Vec<Vec<Matrix>> {
        let m = self.g.dim();
        let fc = &self.bundle;
        let y = |b, c, d| fc.y(self.index(b, c, d));
        let yd = |b, c, d, a| fc.ya(self.index(b, c, d), a);
        let mut r = vec![vec![vec![vec![Expr::zero(); m]; m]; m]; m];
        for a in 0..m {
            for b in 0..m {
                if a == b {
                    continue;
                }
                for c in 0..m {
                    for d in 0..m {
                        let mut t = vec![yd(a, c, d, b), -yd(b, c, d, a)];
                        for e in 0..m {
                            t.push(y(a, c, e) * y(b, e, d));
                            t.push(-(y(b, c, e) * y(a, e, d)));
                        }
                        r[a][b][c][d] = Expr::sum(t);
                    }
                }
            }
        }
        r
    }
}

/// `ℓ = g^{ac}R_{ab}{}^b{}_c√|g|` with `R` written in the jet symbols of `Γ`.
pub fn gravity_lagrangian(model: &GravityModel) -> Result<JetLagrangian, ModelError> {
    let m = model.g.dim();
    let r = model.formal_curvature();
    let mut t = Vec::new();
    for a in 0..m {
        for c in 0..m {
            let ric = Expr::sum((0..m).map(|b| r[a][b][b][c].clone()));
            t.push(gu(a, c) * ric);
        }
    }
    let density = Expr::sum(t) * sqrtg();
    Ok(JetLagrangian::with_metric(model.bundle.clone(), density, model.g.clone())?)
}

/// `P^{ab}{}_c{}^d = (−g^{ad}δ^b_c + g^{bd}δ^a_c)√|g|`, indexed `[a][b][c][d]`.
pub fn gravity_momentum(g: &MetricField) -> Vec<Vec<Matrix>> {
    let m = g.dim();
    let sg = g.sqrt_abs_det();
    (0..m)
        .map(|a| {
            (0..m)
                .map(|b| {
                    (0..m)
                        .map(|c| {
                            (0..m)
                                .map(|d| (g.upper(b, d) * delta(a, c) - g.upper(a, d) * delta(b, c)) * sg)
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `𝒰_grav` pulled back along `Γ`, built with `Γ↑`.
pub fn gravity_energy_tensor(model: &GravityModel) -> Result<Matrix, ModelError> {
    let lag = gravity_lagrangian(model)?;
    let over = model.overconnection();
    Ok(canonical_energy_tensor(&lag, &over.conn)?.pullback(&model.section()))
}

/// Both sides of `jΓ*d(i_{X⌋Γ↑}C_grav) = −2G^a_b∇_aX^b√|g|`, returned as `(lhs, rhs)`.
pub fn gravity_current_identity(model: &GravityModel, x: &[Expr]) -> Result<(Expr, Expr), ModelError> {
    let m = model.g.dim();
    let ch = &model.g.chart;
    let lag = gravity_lagrangian(model)?;
    let over = model.overconnection();
    let lift = LiftField::horizontal(x, &over.conn);
    let cur = current_pullback(&lift, &lag, &model.section());
    let lhs = Expr::sum((0..m).map(|a| ch.partial(&cur[a], a)));

    let gt = einstein(&model.g, &model.gamma);
    let mut t = Vec::new();
    for a in 0..m {
        for b in 0..m {
            let nx = ch.partial(&x[b], a) - Expr::sum((0..m).map(|c| model.gamma.at(a, b, c) * &x[c]));
            t.push(gt.get(&[a, b]) * nx);
        }
    }
    let rhs = Expr::int(-2) * Expr::sum(t) * model.g.sqrt_abs_det();
    Ok((lhs, rhs))
}
