//! Yang–Mills field `κ^I_a` with `ℓ = −¼g^{ac}g^{bd}ρ̄_{abI}ρ_{cd}{}^I√|g|`.
//! Indices of the Lie algebra are lowered with the frame norms `h_I`.

use std::sync::Arc;

use super::{delta, ModelError};
use crate::connections::{gauge_curvature, overconnection_gauge, FiberedChart, GaugeField, GaugeStructure, Section};
use crate::geometry::{levi_civita, AffineConnectionField, Matrix, MetricField};
use crate::symexpr::Expr;
use crate::variational::{canonical_energy_tensor, gu, sqrtg, JetLagrangian};

#[derive(Clone, Debug)]
pub struct YangMillsModel {
    pub g: Arc<MetricField>,
    pub gamma: AffineConnectionField,
    pub gs: Arc<GaugeStructure>,
    pub prefix: String,
    /// Gauge bundle, coordinate `y^I_a` at `a·d + I`.
    pub bundle: Arc<FiberedChart>,
}

impl YangMillsModel {
    pub fn new(g: Arc<MetricField>, gs: Arc<GaugeStructure>, prefix: &str) -> Result<Self, ModelError> {
        let zero = vec![vec![Expr::zero(); gs.dim()]; g.dim()];
        let probe = GaugeField::new(gs.clone(), g.chart.clone(), prefix, zero)?;
        Ok(YangMillsModel { gamma: levi_civita(&g), bundle: probe.bundle(), g, gs, prefix: prefix.to_string() })
    }

    pub fn index(&self, a: usize, i: usize) -> usize {
        a * self.gs.dim() + i
    }

    pub fn field(&self, k: Vec<Vec<Expr>>) -> Result<GaugeField, ModelError> {
        Ok(GaugeField::new(self.gs.clone(), self.g.chart.clone(), &self.prefix, k)?)
    }

    pub fn section(&self, k: &GaugeField) -> Section {
        Section { fc: self.bundle.clone(), comps: k.as_bundle_section() }
    }

    /// `ρ_{ab}{}^I = y^I_{a,b} − y^I_{b,a} + c^I_{JH}y^J_ay^H_b`, indexed `[a][b][I]`.
    pub fn formal_curvature(&self) -> Vec<Matrix> {
        let (m, d) = (self.g.dim(), self.gs.dim());
        let fc = &self.bundle;
        let mut rho = vec![vec![vec![Expr::zero(); d]; m]; m];
        for a in 0..m {
            for b in 0..m {
                if a == b {
                    continue;
                }
                for i in 0..d {
                    let mut t = vec![fc.ya(self.index(a, i), b), -fc.ya(self.index(b, i), a)];
                    for j in 0..d {
                        for h in 0..d {
                            let c = self.gs.c(i, j, h);
                            if !c.is_zero() {
                                t.push(Expr::constant(c.clone()) * fc.y(self.index(a, j)) * fc.y(self.index(b, h)));
                            }
                        }
                    }
                    rho[a][b][i] = Expr::sum(t);
                }
            }
        }
        rho
    }

    /// `(ρ̄^{ac}{}_Iρ_{bc}{}^I − ¼ρ̄^{cd}{}_Iρ_{cd}{}^Iδ^a_b)√|g|` from the field's curvature.
    pub fn energy_display(&self, k: &GaugeField) -> Matrix {
        let (m, d) = (self.g.dim(), self.gs.dim());
        let g = &self.g;
        let rho = gauge_curvature(k);
        let raised = |a: usize, c: usize, i: usize| {
            Expr::sum(
                (0..m).flat_map(|p| (0..m).map(move |q| (p, q))).map(|(p, q)| g.upper(a, p) * g.upper(c, q) * &rho[p][q][i]),
            )
        };
        let up: Vec<Matrix> = (0..m).map(|a| (0..m).map(|c| (0..d).map(|i| raised(a, c, i)).collect()).collect()).collect();
        let mut sq = Vec::new();
        for c in 0..m {
            for e in 0..m {
                for i in 0..d {
                    sq.push(self.gs.lower(i, &up[c][e][i]) * &rho[c][e][i]);
                }
            }
        }
        let sq = Expr::sum(sq);
        let sg = g.sqrt_abs_det();
        (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| {
                        let mut t = vec![Expr::rational(-1, 4) * &sq * delta(a, b)];
                        for c in 0..m {
                            for i in 0..d {
                                t.push(self.gs.lower(i, &up[a][c][i]) * &rho[b][c][i]);
                            }
                        }
                        Expr::sum(t) * sg
                    })
                    .collect()
            })
            .collect()
    }
}

/// `ℓ_gauge = −¼g^{ac}g^{bd}ρ̄_{abI}ρ_{cd}{}^I√|g|` in jet symbols.
pub fn yang_mills_lagrangian(model: &YangMillsModel) -> Result<JetLagrangian, ModelError> {
    let (m, d) = (model.g.dim(), model.gs.dim());
    let rho = model.formal_curvature();
    let mut t = Vec::new();
    for a in 0..m {
        for b in 0..m {
            if a == b {
                continue;
            }
            for c in 0..m {
                for e in 0..m {
                    if c == e {
                        continue;
                    }
                    for i in 0..d {
                        t.push(gu(a, c) * gu(b, e) * model.gs.lower(i, &rho[a][b][i]) * &rho[c][e][i]);
                    }
                }
            }
        }
    }
    let density = Expr::rational(-1, 4) * Expr::sum(t) * sqrtg();
    Ok(JetLagrangian::with_metric(model.bundle.clone(), density, model.g.clone())?)
}

/// `𝒰^a_b = ℓδ^a_b − P^a{}^c{}_I∇_bκ^I_c` along `κ`, with `∇` given by `κ↑` over the Levi-Civita connection.
pub fn yang_mills_energy_tensor(model: &YangMillsModel, k: &GaugeField) -> Result<Matrix, ModelError> {
    let lag = yang_mills_lagrangian(model)?;
    let over = overconnection_gauge(k, &model.gamma)?;
    Ok(canonical_energy_tensor(&lag, &over.conn)?.pullback(&model.section(k)))
}

/// Maxwell tensor `T^a_b = F^{ac}F_{bc} − ¼F_{cd}F^{cd}δ^a_b`, `F_{ab} = ∂_aA_b − ∂_bA_a`.
pub fn maxwell_tensor(g: &MetricField, a_pot: &[Expr]) -> Matrix {
    let m = g.dim();
    let ch = &g.chart;
    let f: Matrix = (0..m)
        .map(|a| (0..m).map(|b| ch.partial(&a_pot[b], a) - ch.partial(&a_pot[a], b)).collect())
        .collect();
    // F^a_b = g^{ac}F_{cb}
    let mixed: Matrix =
        (0..m).map(|a| (0..m).map(|b| Expr::sum((0..m).map(|c| g.upper(a, c) * &f[c][b]))).collect()).collect();
    // F^{ab} = F^a_c g^{cb}
    let up: Matrix =
        (0..m).map(|a| (0..m).map(|b| Expr::sum((0..m).map(|c| &mixed[a][c] * g.upper(c, b)))).collect()).collect();
    let sq = Expr::sum((0..m).flat_map(|c| (0..m).map(move |d| (c, d))).map(|(c, d)| &f[c][d] * &up[c][d]));
    (0..m)
        .map(|a| {
            (0..m)
                .map(|b| {
                    Expr::sum((0..m).map(|c| &up[a][c] * &f[b][c])) - Expr::rational(1, 4) * &sq * delta(a, b)
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Chart;
    use crate::symexpr::{compare_arrays, parse, NumericOptions};
    use crate::variational::{metric_stress_tensor, momentum, EnergyTensor};

    fn e(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn flat(m: &Matrix) -> Vec<Expr> {
        m.iter().flatten().cloned().collect()
    }

    fn su2_curved() -> (YangMillsModel, GaugeField) {
        let ch = Chart::new("P", &["t", "x", "y"], &[(-0.5, 0.5); 3]).unwrap();
        let g = MetricField::new(
            ch,
            vec![
                vec![e("-1 - x*y/3"), e("t/5"), e("0")],
                vec![e("t/5"), e("1 + x^2"), e("y/4")],
                vec![e("0"), e("y/4"), e("2 + t*x")],
            ],
        )
        .unwrap();
        let model = YangMillsModel::new(g, Arc::new(GaugeStructure::su2()), "A").unwrap();
        let k = model
            .field(vec![
                vec![e("x*y"), e("t - y^2"), e("1/2")],
                vec![e("sin(t)"), e("x*t*y"), e("y")],
                vec![e("t^2"), e("1 + x"), e("cos(x*y)")],
            ])
            .unwrap();
        (model, k)
    }

    fn minkowski4() -> Arc<MetricField> {
        let ch = Chart::new("M", &["t", "x", "y", "z"], &[(-1.0, 1.0); 4]).unwrap();
        let diag = [-1, 1, 1, 1];
        MetricField::new(ch, (0..4).map(|a| (0..4).map(|b| Expr::int(if a == b { diag[a] } else { 0 })).collect()).collect())
            .unwrap()
    }

    #[test]
    fn zero_field_has_zero_lagrangian() {
        let (model, _) = su2_curved();
        let k = model.field(vec![vec![Expr::zero(); 3]; 3]).unwrap();
        let lag = yang_mills_lagrangian(&model).unwrap();
        assert!(model.section(&k).pullback(lag.ell(), 1).is_zero());
    }

    #[test]
    fn momentum_is_raised_curvature() {
        let (model, k) = su2_curved();
        let lag = yang_mills_lagrangian(&model).unwrap();
        let p = momentum(&lag);
        let sec = model.section(&k);
        let rho = gauge_curvature(&k);
        let g = &model.g;
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        for a in 0..3 {
            for c in 0..3 {
                for i in 0..3 {
                    lhs.push(sec.pullback(&p[a][model.index(c, i)], 1));
                    let up = Expr::sum(
                        (0..3).flat_map(|q| (0..3).map(move |r| (q, r))).map(|(q, r)| g.upper(a, q) * g.upper(c, r) * &rho[q][r][i]),
                    );
                    rhs.push(model.gs.lower(i, &up) * g.sqrt_abs_det());
                }
            }
        }
        let r = compare_arrays(&lhs, &rhs, &g.chart.domain(), &NumericOptions::default()).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn energy_tensor_matches_display_and_stress() {
        let (model, k) = su2_curved();
        let u = yang_mills_energy_tensor(&model, &k).unwrap();
        let dom = model.g.chart.domain();
        let o = NumericOptions::default();
        let r = compare_arrays(&flat(&u), &flat(&model.energy_display(&k)), &dom, &o).unwrap();
        assert!(r.pass, "{r:?}");
        let low = EnergyTensor::lower(&u, &model.g);
        let t = metric_stress_tensor(&yang_mills_lagrangian(&model).unwrap()).unwrap();
        let sec = model.section(&k);
        let lhs: Vec<Expr> = flat(&low).iter().map(|v| Expr::rational(-1, 2) * v).collect();
        let rhs: Vec<Expr> = flat(&t).iter().map(|v| sec.pullback(v, 1)).collect();
        let r = compare_arrays(&lhs, &rhs, &dom, &o).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn trace_vanishes_in_four_dimensions() {
        let ch = Chart::new("M", &["t", "x", "y", "z"], &[(-0.5, 0.5); 4]).unwrap();
        let diag = ["-1 - x^2/4", "1 + t*y/3", "2 + z/5", "1 + x*y/2"];
        let g = MetricField::new(
            ch,
            (0..4).map(|a| (0..4).map(|b| if a == b { e(diag[a]) } else { Expr::zero() }).collect()).collect(),
        )
        .unwrap();
        let model = YangMillsModel::new(g, Arc::new(GaugeStructure::su2()), "A").unwrap();
        let k = model
            .field(vec![
                vec![e("x*y"), e("z"), e("0")],
                vec![e("0"), e("t*z"), e("y^2")],
                vec![e("t"), e("0"), e("x*z")],
                vec![e("y"), e("x^2"), e("0")],
            ])
            .unwrap();
        let u = yang_mills_energy_tensor(&model, &k).unwrap();
        let tr = Expr::sum((0..4).map(|a| u[a][a].clone()));
        let r = compare_arrays(&[tr], &[Expr::zero()], &model.g.chart.domain(), &NumericOptions::default()).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn electrostatic_field_matches_maxwell() {
        let g = minkowski4();
        let model = YangMillsModel::new(g.clone(), Arc::new(GaugeStructure::u1()), "A").unwrap();
        let phi = e("x^2*y + sin(z)");
        let a_pot = vec![phi.clone(), Expr::zero(), Expr::zero(), Expr::zero()];
        let k = model.field(a_pot.iter().map(|v| vec![v.clone()]).collect()).unwrap();
        let u = yang_mills_energy_tensor(&model, &k).unwrap();
        let t = maxwell_tensor(&g, &a_pot);
        let dom = g.chart.domain();
        let o = NumericOptions::default();
        assert!(compare_arrays(&flat(&u), &flat(&t), &dom, &o).unwrap().pass);
        // T^0_0 = −½|∇φ|² in signature (−+++)
        let grad2 = Expr::sum((1..4).map(|a| g.chart.partial(&phi, a).powi(2)));
        assert!(compare_arrays(&[u[0][0].clone()], &[Expr::rational(-1, 2) * grad2], &dom, &o).unwrap().pass);
    }
}
