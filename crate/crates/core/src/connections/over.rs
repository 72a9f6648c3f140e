use std::collections::HashMap;
use std::sync::Arc;

use super::{bundle_coord_name, connection_bundle, ConnectionError, FiberedChart, GaugeField, GeneralConnection, LinearConnection};
use crate::geometry::{AffineConnectionField, Matrix};
use crate::symexpr::Expr;

/// Overconnection: a connection of the bundle of connections, stored as a
/// general connection on that bundle together with the section it was built from.
#[derive(Clone, Debug)]
pub struct Overconnection {
    pub conn: GeneralConnection,
    pub source: Vec<Expr>,
}

impl Overconnection {
    pub fn bundle(&self) -> &Arc<FiberedChart> {
        &self.conn.fc
    }

    /// Coefficient for bundle coordinate `k` along `∂x_a`.
    pub fn at(&self, k: usize, a: usize) -> &Expr {
        &self.conn.k[k][a]
    }
}

fn linear_coeffs(
    k: &LinearConnection,
    gamma: &AffineConnectionField,
    unit: &dyn Fn(usize, usize) -> Expr,
) -> Vec<Vec<Expr>> {
    let fc = &k.fc;
    let (n, m) = (fc.n(), fc.m());
    let y = |i: usize, b: usize, j: usize| Expr::var(&bundle_coord_name(fc, i, b, j));
    let kk = &k.k;
    let mut rows = Vec::with_capacity(m * n * n);
    for b in 0..m {
        for i in 0..n {
            for j in 0..n {
                let row = (0..m)
                    .map(|a| {
                        let mut t = Vec::new();
                        for h in 0..n {
                            t.push(fc.dx(&kk[a][i][h], b) * unit(h, j));
                            t.push(-(&kk[a][h][j] * y(i, b, h)));
                            t.push(y(h, b, j) * &kk[a][i][h]);
                        }
                        for c in 0..m {
                            let ky = Expr::sum((0..n).map(|h| &kk[c][i][h] * unit(h, j)));
                            t.push(gamma.at(a, c, b) * (ky - y(i, c, j)));
                        }
                        Expr::sum(t)
                    })
                    .collect();
                rows.push(row);
            }
        }
    }
    rows
}

/// `(κ↑_a)^i_{bj} = ∂_bκ_a{}^i{}_j − κ_a{}^h{}_j y^i_{bh} + y^h_{bj}κ_a{}^i{}_h + Γ_a{}^c{}_b(κ_c{}^i{}_j − y^i_{cj})`.
pub fn overconnection_linear(
    k: &LinearConnection,
    gamma: &AffineConnectionField,
) -> Result<Overconnection, ConnectionError> {
    if !gamma.symmetric {
        return Err(ConnectionError::NotSymmetric);
    }
    let delta = |h: usize, j: usize| if h == j { Expr::one() } else { Expr::zero() };
    let rows = linear_coeffs(k, gamma, &delta);
    Ok(Overconnection {
        conn: GeneralConnection { fc: connection_bundle(&k.fc), k: rows },
        source: k.as_bundle_section(),
    })
}

/// The connection `κ' ⊗ ǩ` of `JE ⊗ E*` restricted to `y^i_j = δ^i_j` by substitution.
/// Independent construction of [`overconnection_linear`].
pub fn overconnection_linear_tensor(
    k: &LinearConnection,
    gamma: &AffineConnectionField,
) -> Result<Overconnection, ConnectionError> {
    if !gamma.symmetric {
        return Err(ConnectionError::NotSymmetric);
    }
    let fc = &k.fc;
    let n = fc.n();
    let unit_name = |h: usize, j: usize| format!("{}_e_{}", fc.fiber[h], fc.fiber[j]);
    let unit = |h: usize, j: usize| Expr::var(&unit_name(h, j));
    let rows = linear_coeffs(k, gamma, &unit);
    let mut constraint = HashMap::new();
    for h in 0..n {
        for j in 0..n {
            constraint.insert(unit_name(h, j), if h == j { Expr::one() } else { Expr::zero() });
        }
    }
    let rows = rows.into_iter().map(|r| r.into_iter().map(|e| e.subst_many(&constraint)).collect()).collect();
    Ok(Overconnection {
        conn: GeneralConnection { fc: connection_bundle(fc), k: rows },
        source: k.as_bundle_section(),
    })
}

/// `(κ↑_a)^I_b = κ^I_{a,b} + c^I_{JH}κ^J_a y^H_b + Γ_a{}^c{}_b(κ^I_c − y^I_c)`.
pub fn overconnection_gauge(
    k: &GaugeField,
    gamma: &AffineConnectionField,
) -> Result<Overconnection, ConnectionError> {
    if !gamma.symmetric {
        return Err(ConnectionError::NotSymmetric);
    }
    let bundle = k.bundle();
    let (m, d) = (k.chart.dim(), k.gs.dim());
    let y = |i: usize, b: usize| bundle.y(b * d + i);
    let mut rows = Vec::with_capacity(m * d);
    for b in 0..m {
        for i in 0..d {
            let row = (0..m)
                .map(|a| {
                    let mut t = vec![k.chart.partial(&k.k[a][i], b)];
                    for j in 0..d {
                        for h in 0..d {
                            let c = k.gs.c(i, j, h);
                            if !c.is_zero() {
                                t.push(Expr::constant(c.clone()) * &k.k[a][j] * y(h, b));
                            }
                        }
                    }
                    for c in 0..m {
                        t.push(gamma.at(a, c, b) * (&k.k[c][i] - y(i, c)));
                    }
                    Expr::sum(t)
                })
                .collect();
            rows.push(row);
        }
    }
    Ok(Overconnection { conn: GeneralConnection { fc: bundle, k: rows }, source: k.as_bundle_section() })
}

/// Gauge overconnection expanded through the frame: `Σ_I (κ↑_a)^I_b (l_I)^i_j`,
/// indexed `[a][b][i][j]`.
pub fn overconnection_gauge_expanded(
    k: &GaugeField,
    gamma: &AffineConnectionField,
) -> Result<Vec<Vec<Matrix>>, ConnectionError> {
    let over = overconnection_gauge(k, gamma)?;
    let (m, d) = (k.chart.dim(), k.gs.dim());
    Ok((0..m)
        .map(|a| {
            (0..m)
                .map(|b| {
                    let comps: Vec<Expr> = (0..d).map(|i| over.at(b * d + i, a).clone()).collect();
                    k.gs.expand(&comps)
                })
                .collect()
        })
        .collect())
}

/// `∇_aσ^K = ∂_aσ^K − (κ↑_a)^K(σ)` for the section `σ` that `over` was built from,
/// indexed `[a][K]` in bundle-coordinate order.
pub fn overconnection_covariant_derivative(
    section: &[Expr],
    over: &Overconnection,
) -> Result<Vec<Vec<Expr>>, ConnectionError> {
    if section.len() != over.source.len() || section.iter().zip(&over.source).any(|(p, q)| !p.same_as(q)) {
        return Err(ConnectionError::Mismatch);
    }
    let sec = super::Section { fc: over.conn.fc.clone(), comps: section.to_vec() };
    Ok(over.conn.covariant_derivative(&sec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::{gauge_curvature, GaugeStructure};
    use crate::geometry::Chart;
    use crate::symexpr::{compare_arrays, parse, NumericOptions};

    fn gamma(ch: &Arc<crate::geometry::Chart>, seed: usize) -> AffineConnectionField {
        AffineConnectionField::from_fn(ch.clone(), true, |a, c, b| {
            parse(&format!("{}*x*t + {}*sin(x + {}) - t^2*{}", a + b + seed, c + 1, seed, (a + 1) * (b + 1)))
                .unwrap()
        })
        .unwrap()
    }

    fn linear(ch: &Arc<Chart>) -> LinearConnection {
        let fc = FiberedChart::unit(ch.clone(), &["u", "v"]);
        let e = |s: &str| parse(s).unwrap();
        LinearConnection::new(
            fc,
            vec![
                vec![vec![e("x*t"), e("sin(x)")], vec![e("1+t"), e("t^2")]],
                vec![vec![e("cos(t)"), e("x")], vec![e("x*x*t"), e("exp(x)")]],
            ],
        )
        .unwrap()
    }

    #[test]
    fn closed_and_tensor_product_forms_agree() {
        let ch = Chart::unit("P", &["x", "t"]);
        let k = linear(&ch);
        let g = gamma(&ch, 1);
        let a = overconnection_linear(&k, &g).unwrap();
        let b = overconnection_linear_tensor(&k, &g).unwrap();
        let lhs: Vec<Expr> = a.conn.k.iter().flatten().cloned().collect();
        let rhs: Vec<Expr> = b.conn.k.iter().flatten().cloned().collect();
        let d = a.bundle().domain();
        assert!(compare_arrays(&lhs, &rhs, &d, &NumericOptions::default()).unwrap().pass);
    }

    #[test]
    fn linear_nabla_kappa_is_minus_rho_for_any_gamma() {
        let ch = Chart::unit("P", &["x", "t"]);
        let k = linear(&ch);
        let rho = k.curvature();
        let sec = k.as_bundle_section();
        for seed in [1, 2] {
            let over = overconnection_linear(&k, &gamma(&ch, seed)).unwrap();
            let nk = overconnection_covariant_derivative(&sec, &over).unwrap();
            let mut lhs = Vec::new();
            let mut rhs = Vec::new();
            for a in 0..2 {
                for b in 0..2 {
                    for i in 0..2 {
                        for j in 0..2 {
                            lhs.push(nk[a][(b * 2 + i) * 2 + j].clone());
                            rhs.push(-&rho[a][b][i][j]);
                        }
                    }
                }
            }
            assert!(compare_arrays(&lhs, &rhs, &ch.domain(), &NumericOptions::default()).unwrap().pass);
        }
    }

    #[test]
    fn gauge_overconnection_matches_linear_after_expansion() {
        let ch = Chart::unit("P", &["x", "t"]);
        let gs = Arc::new(GaugeStructure::su2());
        let e = |s: &str| parse(s).unwrap();
        let k = GaugeField::new(
            gs.clone(),
            ch.clone(),
            "A",
            vec![vec![e("x*t"), e("sin(x)"), e("t^2")], vec![e("cos(t)*x"), e("x - t"), e("1/3")]],
        )
        .unwrap();
        let g = gamma(&ch, 3);
        let fc = FiberedChart::unit(ch.clone(), &["z1", "z2"]);
        let lin = overconnection_linear(&k.expand(fc.clone()).unwrap(), &g).unwrap();
        let emb = k.bundle_embedding(&fc);
        let gexp = overconnection_gauge_expanded(&k, &g).unwrap();
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
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
        let d = k.bundle().domain();
        assert!(compare_arrays(&lhs, &rhs, &d, &NumericOptions::default()).unwrap().pass);

        let over = overconnection_gauge(&k, &g).unwrap();
        let nk = overconnection_covariant_derivative(&k.as_bundle_section(), &over).unwrap();
        let rho = gauge_curvature(&k);
        let (mut l2, mut r2) = (Vec::new(), Vec::new());
        for a in 0..2 {
            for b in 0..2 {
                for i in 0..3 {
                    l2.push(nk[a][b * 3 + i].clone());
                    r2.push(-&rho[a][b][i]);
                }
            }
        }
        assert!(compare_arrays(&l2, &r2, &ch.domain(), &NumericOptions::default()).unwrap().pass);
    }

    #[test]
    fn mismatched_section_is_rejected() {
        let ch = Chart::unit("P", &["x", "t"]);
        let k = linear(&ch);
        let over = overconnection_linear(&k, &gamma(&ch, 1)).unwrap();
        let wrong = vec![Expr::zero(); over.source.len()];
        assert_eq!(overconnection_covariant_derivative(&wrong, &over).unwrap_err(), ConnectionError::Mismatch);
    }
}
