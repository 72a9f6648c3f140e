//! Charged spin-zero field: a field `φ` and its conjugate `φ̄` as independent
//! sections of `E` and `E*`.

use std::sync::Arc;

use super::{delta, product_chart, stack_connections, ModelError};
use crate::connections::{dual_connection, FiberedChart, GeneralConnection, LinearConnection, Section};
use crate::geometry::{levi_civita, AffineConnectionField, Matrix, MetricField};
use crate::symexpr::Expr;
use crate::variational::{canonical_energy_tensor, gu, sqrtg, EnergyTensor, JetLagrangian};

#[derive(Clone, Debug)]
pub struct ScalarModel {
    pub g: Arc<MetricField>,
    pub gamma: AffineConnectionField,
    pub kappa: LinearConnection,
    pub dual: LinearConnection,
    pub mass: Expr,
    /// Doubled chart: the fiber of `E` followed by that of `E*`.
    pub fc: Arc<FiberedChart>,
}

impl ScalarModel {
    pub fn new(g: Arc<MetricField>, kappa: LinearConnection, mass: Expr) -> Result<Self, ModelError> {
        if kappa.fc.base.coords != g.chart.coords {
            return Err(ModelError::Unsupported("scalar", "κ and g on the same chart".into()));
        }
        let dual = dual_connection(&kappa);
        let fc = product_chart(&[&kappa.fc, &dual.fc])?;
        Ok(ScalarModel { gamma: levi_civita(&g), g, kappa, dual, mass, fc })
    }

    pub fn n(&self) -> usize {
        self.kappa.fc.n()
    }

    /// `κ ⊕ ǩ` on the doubled chart.
    pub fn connection(&self) -> GeneralConnection {
        stack_connections(self.fc.clone(), &[&self.kappa.as_general(), &self.dual.as_general()])
            .expect("doubled chart matches its parts")
    }

    pub fn section(&self, phi: Vec<Expr>, phibar: Vec<Expr>) -> Result<Section, ModelError> {
        let mut comps = phi;
        comps.extend(phibar);
        Ok(Section::new(self.fc.clone(), comps)?)
    }

    /// `(∇φ, ∇φ̄)` of a section, each indexed `[a][i]`.
    fn covariant(&self, sec: &Section) -> (Matrix, Matrix) {
        let n = self.n();
        let phi = Section { fc: self.kappa.fc.clone(), comps: sec.comps[..n].to_vec() };
        let bar = Section { fc: self.dual.fc.clone(), comps: sec.comps[n..].to_vec() };
        (self.kappa.covariant_derivative(&phi), self.dual.covariant_derivative(&bar))
    }

    pub fn energy_tensor(&self) -> Result<EnergyTensor, ModelError> {
        Ok(canonical_energy_tensor(&scalar_lagrangian(self)?, &self.connection())?)
    }

    /// `𝒰^a_b = ℓδ^a_b − ½g^{ac}(∇_cφ̄_i∇_bφ^i + ∇_bφ̄_i∇_cφ^i)√|g|`, written directly
    /// from the section.
    pub fn energy_display(&self, sec: &Section) -> Matrix {
        let (n, m) = (self.n(), self.g.dim());
        let (dp, db) = self.covariant(sec);
        let sg = self.g.sqrt_abs_det();
        let half = Expr::rational(1, 2);
        let kinetic = Expr::sum(
            (0..m).flat_map(|a| (0..m).map(move |b| (a, b))).flat_map(|(a, b)| {
                let (dp, db) = (&dp, &db);
                (0..n).map(move |i| self.g.upper(a, b) * &db[a][i] * &dp[b][i])
            }),
        );
        let pot = Expr::sum((0..n).map(|i| &sec.comps[n + i] * &sec.comps[i]));
        let ell = &half * (kinetic - self.mass.powi(2) * pot) * sg;
        (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| {
                        let mut t = vec![&ell * delta(a, b)];
                        for c in 0..m {
                            for i in 0..n {
                                let pair = &db[c][i] * &dp[b][i] + &db[b][i] * &dp[c][i];
                                t.push(-(&half * self.g.upper(a, c) * pair * sg));
                            }
                        }
                        Expr::sum(t)
                    })
                    .collect()
            })
            .collect()
    }
}

/// `ℓ = ½(g^{ab}∇_aφ̄_i∇_bφ^i − m²φ̄_iφ^i)√|g|` in jet symbols.
pub fn scalar_lagrangian(model: &ScalarModel) -> Result<JetLagrangian, ModelError> {
    let fc = &model.fc;
    let (n, m) = (model.n(), fc.m());
    let k = model.connection();
    let nabla = |i: usize, a: usize| fc.ya(i, a) - &k.k[i][a];
    let mut kin = Vec::new();
    for a in 0..m {
        for b in 0..m {
            for i in 0..n {
                kin.push(gu(a, b) * nabla(n + i, a) * nabla(i, b));
            }
        }
    }
    let pot = Expr::sum((0..n).map(|i| fc.y(n + i) * fc.y(i)));
    let density = Expr::rational(1, 2) * (Expr::sum(kin) - model.mass.powi(2) * pot) * sqrtg();
    Ok(JetLagrangian::with_metric(fc.clone(), density, model.g.clone())?)
}

/// `½g^{ac}ρ_{ab}{}^i{}_j(φ̄_i∇_cφ^j − ∇_cφ̄_iφ^j)`, the claimed value of `∇_a𝒰̆^a_b` on shell.
pub fn scalar_onshell_divergence_rhs(model: &ScalarModel, sec: &Section) -> Vec<Expr> {
    let (n, m) = (model.n(), model.g.dim());
    let (dp, db) = model.covariant(sec);
    let rho = model.kappa.curvature();
    let (phi, bar) = sec.comps.split_at(n);
    (0..m)
        .map(|b| {
            let mut t = Vec::new();
            for a in 0..m {
                for c in 0..m {
                    for i in 0..n {
                        for j in 0..n {
                            let r = &rho[a][b][i][j];
                            if r.is_zero() {
                                continue;
                            }
                            let cur = &bar[i] * &dp[c][j] - &db[c][i] * &phi[j];
                            t.push(model.g.upper(a, c) * r * cur);
                        }
                    }
                }
            }
            Expr::rational(1, 2) * Expr::sum(t)
        })
        .collect()
}
