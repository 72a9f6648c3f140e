//! Komar current and the lift of a vector field to the connection bundle that
//! produces it as a Noether current of `ℓ = R√|g|`.

use std::sync::Arc;

use super::gravity::{gravity_lagrangian, gravity_momentum, GravityModel};
use super::ModelError;
use crate::geometry::{base_curvature, levi_civita, ricci, ricci_raised, scalar_curvature, AffineConnectionField, Matrix, MetricField};
use crate::symexpr::Expr;
use crate::variational::{current_pullback, lift_from_current, LiftField};

#[derive(Clone, Debug)]
pub struct KomarData {
    pub g: Arc<MetricField>,
    pub gamma: AffineConnectionField,
    pub x: Vec<Expr>,
}

/// Komar current `J^b`, its density `𝒥^b = J^b√|g|` and the superpotential
/// `½(∇_aX_b − ∇_bX_a)√|g|`.
#[derive(Clone, Debug)]
pub struct KomarCurrent {
    pub j: Vec<Expr>,
    pub density: Vec<Expr>,
    pub superpotential: Matrix,
}

impl KomarData {
    pub fn new(g: Arc<MetricField>, x: Vec<Expr>) -> Result<Self, ModelError> {
        if x.len() != g.dim() {
            return Err(ModelError::Unsupported("komar", format!("a vector field with {} components", g.dim())));
        }
        Ok(KomarData { gamma: levi_civita(&g), g, x })
    }

    fn m(&self) -> usize {
        self.g.dim()
    }

    /// `∇_aX^b`, indexed `[a][b]`.
    pub fn nabla_x(&self) -> Matrix {
        nabla_vector(&self.gamma, &self.x)
    }

    /// `∇_bJ^b`, identically zero.
    pub fn divergence(&self) -> Expr {
        let j = komar_current(self).j;
        let ch = &self.g.chart;
        let m = self.m();
        let mut t = Vec::new();
        for b in 0..m {
            t.push(ch.partial(&j[b], b));
            for c in 0..m {
                t.push(-(self.gamma.at(b, b, c) * &j[c]));
            }
        }
        Expr::sum(t)
    }
}

fn nabla_vector(gamma: &AffineConnectionField, x: &[Expr]) -> Matrix {
    let m = gamma.dim();
    let ch = &gamma.chart;
    (0..m)
        .map(|a| {
            (0..m).map(|b| ch.partial(&x[b], a) - Expr::sum((0..m).map(|c| gamma.at(a, b, c) * &x[c]))).collect()
        })
        .collect()
}

/// `J^b = ∇_a(∇^aX^b − ∇^bX^a)`.
pub fn komar_current(data: &KomarData) -> KomarCurrent {
    let m = data.m();
    let g = &data.g;
    let gam = &data.gamma;
    let ch = &g.chart;
    let nx = data.nabla_x();
    let raised = |a: usize, b: usize| Expr::sum((0..m).map(|c| g.upper(a, c) * &nx[c][b]));
    let f: Matrix = (0..m).map(|a| (0..m).map(|b| raised(a, b) - raised(b, a)).collect()).collect();
    let j: Vec<Expr> = (0..m)
        .map(|b| {
            let mut t = Vec::new();
            for a in 0..m {
                t.push(ch.partial(&f[a][b], a));
                for c in 0..m {
                    t.push(-(gam.at(a, a, c) * &f[c][b]));
                    t.push(-(gam.at(a, b, c) * &f[a][c]));
                }
            }
            Expr::sum(t)
        })
        .collect();
    let sg = g.sqrt_abs_det();
    let density = j.iter().map(|jb| jb * sg).collect();
    let lowered = |a: usize, b: usize| Expr::sum((0..m).map(|c| g.lower(b, c) * &nx[a][c]));
    let half = Expr::rational(1, 2);
    let superpotential =
        (0..m).map(|a| (0..m).map(|b| &half * (lowered(a, b) - lowered(b, a)) * sg).collect()).collect();
    KomarCurrent { j, density, superpotential }
}

/// `L_XΓ_a{}^b{}_c = −∂_a∂_cX^b + ∂_aX^dΓ_d{}^b{}_c + Γ_a{}^b{}_d∂_cX^d − Γ_a{}^d{}_c∂_dX^b + X^d∂_dΓ_a{}^b{}_c`,
/// indexed `[a][b][c]`.
pub fn lie_derivative_connection(gamma: &AffineConnectionField, x: &[Expr]) -> Vec<Matrix> {
    let m = gamma.dim();
    let ch = &gamma.chart;
    let dx = |b: usize, a: usize| ch.partial(&x[b], a);
    (0..m)
        .map(|a| {
            (0..m)
                .map(|b| {
                    (0..m)
                        .map(|c| {
                            let mut t = vec![-ch.partial(&dx(b, c), a)];
                            for d in 0..m {
                                t.push(dx(d, a) * gamma.at(d, b, c));
                                t.push(gamma.at(a, b, d) * dx(d, c));
                                t.push(-(gamma.at(a, d, c) * dx(b, d)));
                                t.push(&x[d] * ch.partial(gamma.at(a, b, c), d));
                            }
                            Expr::sum(t)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `−∇_a∇_cX^b − X^dR_{da}{}^b{}_c`, the covariant form of [`lie_derivative_connection`].
pub fn lie_derivative_connection_covariant(gamma: &AffineConnectionField, x: &[Expr]) -> Vec<Matrix> {
    let m = gamma.dim();
    let ch = &gamma.chart;
    let nx = nabla_vector(gamma, x);
    let r = base_curvature(gamma);
    (0..m)
        .map(|a| {
            (0..m)
                .map(|b| {
                    (0..m)
                        .map(|c| {
                            // ∇_a(∇_cX^b)
                            let mut t = vec![ch.partial(&nx[c][b], a)];
                            for d in 0..m {
                                t.push(-(gamma.at(a, b, d) * &nx[c][d]));
                                t.push(gamma.at(a, d, c) * &nx[d][b]);
                            }
                            let nnx = Expr::sum(t);
                            let xr = Expr::sum((0..m).map(|d| &x[d] * r.get(&[d, a, b, c])));
                            -(nnx + xr)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `J^b` rebuilt from `L_XΓ`: `−g^{ac}L_XΓ_a{}^b{}_c + g^{ab}L_XΓ_a{}^c{}_c + 2R^b_aX^a`.
pub fn komar_current_from_lie(data: &KomarData) -> Vec<Expr> {
    let m = data.m();
    let g = &data.g;
    let l = lie_derivative_connection(&data.gamma, &data.x);
    let ric_up = ricci_raised(g, &ricci(&base_curvature(&data.gamma)));
    (0..m)
        .map(|b| {
            let mut t = Vec::new();
            for a in 0..m {
                for c in 0..m {
                    t.push(-(g.upper(a, c) * &l[a][b][c]));
                    t.push(g.upper(a, b) * &l[a][c][c]);
                }
                t.push(Expr::int(2) * ric_up.get(&[b, a]) * &data.x[a]);
            }
            Expr::sum(t)
        })
        .collect()
}

/// `W_b{}^c{}_d = −L_XΓ_b{}^c{}_d + R_{bd}{}^c{}_eX^e − R_{bd}X^c`, indexed `[b][c][d]`.
fn lift_correction(data: &KomarData) -> Vec<Matrix> {
    let m = data.m();
    let l = lie_derivative_connection(&data.gamma, &data.x);
    let r4 = base_curvature(&data.gamma);
    let ric = ricci(&r4);
    (0..m)
        .map(|b| {
            (0..m)
                .map(|c| {
                    (0..m)
                        .map(|d| {
                            let rx = Expr::sum((0..m).map(|e| r4.get(&[b, d, c, e]) * &data.x[e]));
                            rx - &l[b][c][d] - ric.get(&[b, d]) * &data.x[c]
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Lift `Y` with `Y^a = X^a` and `Y_b{}^c{}_d∘jΓ = X^e∂_eΓ_b{}^c{}_d − L_XΓ_b{}^c{}_d + R_{bd}{}^c{}_eX^e − R_{bd}X^c`.
pub fn komar_lift(data: &KomarData) -> Result<(GravityModel, LiftField), ModelError> {
    let model = GravityModel::new(data.g.clone(), data.gamma.clone())?;
    let w: Vec<Expr> = lift_correction(data).into_iter().flatten().flatten().collect();
    let lift = lift_from_current(model.bundle.clone(), &data.x, &w)?;
    Ok((model, lift))
}

/// `(jΓ*(i_Y C_grav), 𝒥)` componentwise along `dx_a`.
pub fn komar_lift_current(data: &KomarData) -> Result<(Vec<Expr>, Vec<Expr>), ModelError> {
    let (model, lift) = komar_lift(data)?;
    let lag = gravity_lagrangian(&model)?;
    let lhs = current_pullback(&lift, &lag, &model.section());
    Ok((lhs, komar_current(data).density))
}

/// `(P^{ab}{}_c{}^d(R_{bd}{}^c{}_eX^e − R_{bd}X^c), (2R^a_bX^b − RX^a)√|g|)`.
pub fn komar_intermediate(data: &KomarData) -> (Vec<Expr>, Vec<Expr>) {
    let m = data.m();
    let g = &data.g;
    let x = &data.x;
    let p = gravity_momentum(g);
    let r4 = base_curvature(&data.gamma);
    let ric = ricci(&r4);
    let ric_up = ricci_raised(g, &ric);
    let r = scalar_curvature(g, &ric);
    let sg = g.sqrt_abs_det();
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for a in 0..m {
        let mut t = Vec::new();
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    let rx = Expr::sum((0..m).map(|e| r4.get(&[b, d, c, e]) * &x[e]));
                    t.push(&p[a][b][c][d] * (rx - ric.get(&[b, d]) * &x[c]));
                }
            }
        }
        lhs.push(Expr::sum(t));
        let mixed = Expr::sum((0..m).map(|b| ric_up.get(&[a, b]) * &x[b]));
        rhs.push((Expr::int(2) * mixed - &r * &x[a]) * sg);
    }
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{tests::sphere, Chart};
    use crate::symexpr::{compare_arrays, parse, NumericOptions};

    fn e(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn opts() -> NumericOptions {
        NumericOptions { tol: 1e-7, ..NumericOptions::default() }
    }

    fn flat3(l: &[Matrix]) -> Vec<Expr> {
        l.iter().flatten().flatten().cloned().collect()
    }

    fn curved() -> KomarData {
        let ch = Chart::new("P", &["t", "x", "y"], &[(-0.4, 0.4); 3]).unwrap();
        let g = MetricField::new(
            ch,
            vec![
                vec![e("-1 - x^2*y/3"), e("t*y/5"), e("0")],
                vec![e("t*y/5"), e("1 + x*t/2"), e("y^2/7")],
                vec![e("0"), e("y^2/7"), e("2 + x^3*t/4")],
            ],
        )
        .unwrap();
        KomarData::new(g, vec![e("1 + x*y"), e("t^2 - y"), e("x*t*y + 2")]).unwrap()
    }

    #[test]
    fn komar_current_is_divergence_free() {
        let data = curved();
        let r = compare_arrays(&[data.divergence()], &[Expr::zero()], &data.g.chart.domain(), &opts()).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn rotation_on_minkowski_has_no_current() {
        let ch = Chart::unit("M", &["t", "x", "y"]);
        let g = MetricField::new(
            ch,
            vec![vec![e("-1"), e("0"), e("0")], vec![e("0"), e("1"), e("0")], vec![e("0"), e("0"), e("1")]],
        )
        .unwrap();
        let data = KomarData::new(g, vec![e("0"), e("-y"), e("x")]).unwrap();
        assert!(komar_current(&data).j.iter().all(Expr::is_zero));
    }

    #[test]
    fn both_lie_derivative_forms_agree() {
        let data = curved();
        let a = lie_derivative_connection(&data.gamma, &data.x);
        let b = lie_derivative_connection_covariant(&data.gamma, &data.x);
        let r = compare_arrays(&flat3(&a), &flat3(&b), &data.g.chart.domain(), &opts()).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn sphere_killing_field_preserves_connection() {
        let g = sphere();
        let data = KomarData::new(g, vec![e("sin(ph)"), e("cos(ph)*cos(th)/sin(th)")]).unwrap();
        let l = flat3(&lie_derivative_connection(&data.gamma, &data.x));
        let zeros = vec![Expr::zero(); l.len()];
        let r = compare_arrays(&l, &zeros, &data.g.chart.domain(), &opts()).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn current_rebuilt_from_lie_derivative() {
        let data = curved();
        let r = compare_arrays(&komar_current(&data).j, &komar_current_from_lie(&data), &data.g.chart.domain(), &opts())
            .unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn intermediate_contraction() {
        let data = curved();
        let (lhs, rhs) = komar_intermediate(&data);
        let r = compare_arrays(&lhs, &rhs, &data.g.chart.domain(), &opts()).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn lift_yields_komar_current() {
        let data = curved();
        let (lhs, rhs) = komar_lift_current(&data).unwrap();
        let r = compare_arrays(&lhs, &rhs, &data.g.chart.domain(), &opts()).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
