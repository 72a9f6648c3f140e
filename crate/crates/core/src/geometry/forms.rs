use super::{AffineConnectionField, GeometryError, Matrix, MetricField};
use crate::symexpr::Expr;

/// `τ_a = Γ_a{}^c{}_c − Γ_c{}^c{}_a`.
pub fn torsion_form(gamma: &AffineConnectionField) -> Vec<Expr> {
    let m = gamma.dim();
    (0..m)
        .map(|a| {
            if gamma.symmetric {
                return Expr::zero();
            }
            Expr::sum((0..m).map(|c| gamma.at(a, c, c) - gamma.at(c, c, a)))
        })
        .collect()
}

/// Sign of the permutation `idx` of `0..n`, or 0 when an index repeats.
pub fn levi_civita_symbol(idx: &[usize]) -> i32 {
    let mut sign = 1;
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            if idx[i] == idx[j] {
                return 0;
            }
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// `(*φ)_{cd} = ½√|g| ε_{abcd} g^{ae}g^{bf}φ_{ef}`, with `ε_{0123} = orientation`.
pub fn hodge_star(g: &MetricField, phi: &Matrix, orientation: i32) -> Result<Matrix, GeometryError> {
    if g.dim() != 4 {
        return Err(GeometryError::WrongDimension { expected: 4, got: g.dim() });
    }
    if phi.len() != 4 || phi.iter().any(|r| r.len() != 4) {
        return Err(GeometryError::Dimension { expected: 16, got: phi.iter().map(Vec::len).sum() });
    }
    let inv = g.inverse();
    // φ^{ab} = g^{ae}g^{bf}φ_{ef}
    let up: Matrix = (0..4)
        .map(|a| {
            (0..4)
                .map(|b| {
                    Expr::sum(
                        (0..4)
                            .flat_map(|e| (0..4).map(move |f| (e, f)))
                            .filter(|&(e, f)| !phi[e][f].is_zero())
                            .map(|(e, f)| &inv[a][e] * &inv[b][f] * &phi[e][f]),
                    )
                })
                .collect()
        })
        .collect();
    let scale = Expr::rational(orientation.signum() as i64, 2) * g.sqrt_abs_det();
    Ok((0..4)
        .map(|c| {
            (0..4)
                .map(|d| {
                    let mut t = Vec::new();
                    for a in 0..4 {
                        for b in 0..4 {
                            let s = levi_civita_symbol(&[a, b, c, d]);
                            if s != 0 {
                                t.push(Expr::int(s as i64) * &up[a][b]);
                            }
                        }
                    }
                    &scale * Expr::sum(t)
                })
                .collect()
        })
        .collect())
}

/// `∇_cξ^{ai} = ∂_cξ^{ai} − Γ_c{}^a{}_bξ^{bi} + Γ_c{}^b{}_bξ^{ai} − κ_c{}^i{}_jξ^{aj}` for a
/// density `ξ[a][i]` with `κ[c][i][j]`. Indexed `[c][a][i]`.
pub fn covariant_derivative_density(xi: &Matrix, gamma: &AffineConnectionField, kappa: &[Matrix]) -> Vec<Matrix> {
    let m = gamma.dim();
    let n = xi.first().map_or(0, Vec::len);
    let ch = &gamma.chart;
    (0..m)
        .map(|c| {
            let trace = Expr::sum((0..m).map(|b| gamma.at(c, b, b).clone()));
            (0..m)
                .map(|a| {
                    (0..n)
                        .map(|i| {
                            let mut t = vec![ch.partial(&xi[a][i], c), &trace * &xi[a][i]];
                            for b in 0..m {
                                t.push(-(gamma.at(c, a, b) * &xi[b][i]));
                            }
                            for j in 0..n {
                                t.push(-(&kappa[c][i][j] * &xi[a][j]));
                            }
                            Expr::sum(t)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `∇·ξ = ∂_aξ^{ai} − κ_a{}^i{}_jξ^{aj} + τ_aξ^{ai}`, indexed `[i]`.
pub fn covariant_divergence(
    xi: &Matrix,
    gamma: &AffineConnectionField,
    kappa: &[Matrix],
) -> Result<Vec<Expr>, GeometryError> {
    let m = gamma.dim();
    if xi.len() != m || kappa.len() != m {
        return Err(GeometryError::Dimension { expected: m, got: xi.len().min(kappa.len()) });
    }
    let n = xi[0].len();
    if xi.iter().any(|r| r.len() != n) || kappa.iter().any(|k| k.len() != n || k.iter().any(|r| r.len() != n)) {
        return Err(GeometryError::Dimension { expected: n, got: xi.iter().map(Vec::len).max().unwrap_or(0) });
    }
    let tau = torsion_form(gamma);
    let ch = &gamma.chart;
    Ok((0..n)
        .map(|i| {
            let mut t = Vec::new();
            for a in 0..m {
                t.push(ch.partial(&xi[a][i], a));
                t.push(&tau[a] * &xi[a][i]);
                for j in 0..n {
                    t.push(-(&kappa[a][i][j] * &xi[a][j]));
                }
            }
            Expr::sum(t)
        })
        .collect())
}

/// Divergence of a mixed energy density `𝒰^a_b`:
/// `∂_a𝒰^a_b + Γ_a{}^c{}_b𝒰^a_c + τ_a𝒰^a_b`, indexed `[b]`.
pub fn energy_divergence(u: &Matrix, gamma: &AffineConnectionField) -> Vec<Expr> {
    let m = gamma.dim();
    let tau = torsion_form(gamma);
    let ch = &gamma.chart;
    (0..m)
        .map(|b| {
            let mut t = Vec::new();
            for a in 0..m {
                t.push(ch.partial(&u[a][b], a));
                t.push(&tau[a] * &u[a][b]);
                for c in 0..m {
                    t.push(gamma.at(a, c, b) * &u[a][c]);
                }
            }
            Expr::sum(t)
        })
        .collect()
}

/// `ξ̆ = ξ/√|g|`.
pub fn breve(xi: &[Expr], g: &MetricField) -> Vec<Expr> {
    xi.iter().map(|x| x.div(g.sqrt_abs_det())).collect()
}

/// `√|g|·ξ`.
pub fn densitize(xi: &[Expr], g: &MetricField) -> Vec<Expr> {
    xi.iter().map(|x| g.sqrt_abs_det() * x).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{levi_civita, Chart};
    use crate::symexpr::{compare_arrays, parse, NumericOptions};
    use std::sync::Arc;

    fn minkowski() -> Arc<MetricField> {
        let ch = Chart::unit("M", &["t", "x", "y", "z"]);
        let eta = (0..4)
            .map(|a| {
                (0..4).map(|b| if a != b { Expr::zero() } else if a == 0 { Expr::one() } else { Expr::int(-1) }).collect()
            })
            .collect();
        MetricField::new(ch, eta).unwrap()
    }

    #[test]
    fn torsion_example() {
        let ch = Chart::unit("P", &["x", "y"]);
        let g = AffineConnectionField::from_fn(ch, false, |a, c, b| {
            if (a, c, b) == (0, 0, 1) { Expr::var("x") } else { Expr::zero() }
        })
        .unwrap();
        let tau = torsion_form(&g);
        assert!(tau[0].is_zero());
        assert_eq!(tau[1].to_string(), "-x");
    }

    #[test]
    fn hodge_of_time_space_plane() {
        let g = minkowski();
        let mut phi = vec![vec![Expr::zero(); 4]; 4];
        phi[0][1] = Expr::one();
        phi[1][0] = Expr::int(-1);
        let s = hodge_star(&g, &phi, 1).unwrap();
        for c in 0..4 {
            for d in 0..4 {
                let want = match (c, d) {
                    (2, 3) => -1,
                    (3, 2) => 1,
                    _ => 0,
                };
                assert!(s[c][d].same_as(&Expr::int(want)), "({c},{d}) = {}", s[c][d]);
            }
        }
    }

    #[test]
    fn double_hodge_is_minus_identity() {
        let ch = Chart::unit("M", &["t", "x", "y", "z"]);
        let e = |s: &str| parse(s).unwrap();
        // Conformally flat Lorentzian metric.
        let f = e("exp(t*x/3 + y/5)");
        let eta = (0..4)
            .map(|a| (0..4).map(|b| if a != b { Expr::zero() } else if a == 0 { f.clone() } else { -&f }).collect())
            .collect();
        let g = MetricField::new(ch.clone(), eta).unwrap();
        let names = ["t*x", "sin(y)", "z + 1", "x*y*z", "cos(t)", "2"];
        let mut phi = vec![vec![Expr::zero(); 4]; 4];
        let mut k = 0;
        for a in 0..4 {
            for b in a + 1..4 {
                phi[a][b] = e(names[k]);
                phi[b][a] = -&phi[a][b];
                k += 1;
            }
        }
        let twice = hodge_star(&g, &hodge_star(&g, &phi, 1).unwrap(), 1).unwrap();
        let lhs: Vec<Expr> = twice.into_iter().flatten().collect();
        let rhs: Vec<Expr> = phi.iter().flatten().map(|x| -x).collect();
        assert!(compare_arrays(&lhs, &rhs, &ch.domain(), &NumericOptions::default()).unwrap().pass);
        let g2 = MetricField::new(Chart::unit("P", &["x", "y"]), vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), Expr::one()]]).unwrap();
        assert!(matches!(hodge_star(&g2, &phi, 1), Err(GeometryError::WrongDimension { .. })));
    }

    #[test]
    fn divergence_is_trace_of_covariant_derivative() {
        let ch = Chart::unit("P", &["x", "y"]);
        let e = |s: &str| parse(s).unwrap();
        let gamma = AffineConnectionField::from_fn(ch.clone(), false, |a, c, b| {
            e(&format!("{}*x - y*{} + x*y*{}", a + 2 * c, b + 1, (a + b + c) % 3))
        })
        .unwrap();
        let xi = vec![vec![e("x*y"), e("sin(x)")], vec![e("exp(y)"), e("x - y^2")]];
        let kappa = vec![
            vec![vec![e("x"), e("1")], vec![e("y^2"), e("0")]],
            vec![vec![e("cos(y)"), e("x*y")], vec![e("2"), e("x")]],
        ];
        let d = covariant_derivative_density(&xi, &gamma, &kappa);
        let trace: Vec<Expr> = (0..2).map(|i| Expr::sum((0..2).map(|a| d[a][a][i].clone()))).collect();
        let div = covariant_divergence(&xi, &gamma, &kappa).unwrap();
        assert!(compare_arrays(&trace, &div, &ch.domain(), &NumericOptions::default()).unwrap().pass);
    }

    #[test]
    fn breve_inverts_densitize_and_divergence_factors() {
        let ch = Chart::unit("P", &["x", "y"]);
        let e = |s: &str| parse(s).unwrap();
        let g = MetricField::new(ch.clone(), vec![vec![e("2 + x"), e("y/3")], vec![e("y/3"), e("3 - x*y")]]).unwrap();
        let lc = levi_civita(&g);
        let xi = vec![e("x*y + 1"), e("sin(x*y)")];
        let back = breve(&densitize(&xi, &g), &g);
        let o = NumericOptions::default();
        assert!(compare_arrays(&back, &xi, &ch.domain(), &o).unwrap().pass);

        // ∇·ξ = √|g| ∇_a ξ̆^a for a scalar-valued density, with ∇_a ξ̆^a the Levi-Civita divergence.
        let col: Matrix = xi.iter().map(|x| vec![x.clone()]).collect();
        let div = covariant_divergence(&col, &lc, &[vec![vec![Expr::zero()]], vec![vec![Expr::zero()]]]).unwrap();
        let xb = breve(&xi, &g);
        let lc_div = Expr::sum((0..2).map(|a| {
            let mut t = vec![ch.partial(&xb[a], a)];
            for b in 0..2 {
                t.push(lc.christoffel(a, a, b) * &xb[b]);
            }
            Expr::sum(t)
        }));
        assert!(compare_arrays(&div, &densitize(&[lc_div], &g), &ch.domain(), &o).unwrap().pass);
    }
}
