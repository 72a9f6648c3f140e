use std::collections::HashMap;

use super::{ConnectionError, FiberedChart, GeneralConnection};
use crate::geometry::AffineConnectionField;
use crate::symexpr::Expr;

/// The involution `s_Γ` of `JJE` as a coordinate map: each coordinate name of
/// the double jet space is sent to its expression after composing with `s_Γ`.
///
/// `ȳ^i_a ↦ y^i_a`, `y^i_a ↦ ȳ^i_a`, `y^i_{ab} ↦ y^i_{ba} + Γ_b{}^c{}_a(ȳ^i_c − y^i_c)`.
pub fn involution(
    fc: &FiberedChart,
    gamma: &AffineConnectionField,
) -> Result<HashMap<String, Expr>, ConnectionError> {
    if !gamma.symmetric {
        return Err(ConnectionError::NotSymmetric);
    }
    let (n, m) = (fc.n(), fc.m());
    let mut map = HashMap::new();
    for i in 0..n {
        for a in 0..m {
            map.insert(fc.ybar_name(i, a), fc.ya(i, a));
            map.insert(fc.ya_name(i, a), fc.ybar(i, a));
            for b in 0..m {
                let mut t = vec![fc.yab(i, b, a)];
                for c in 0..m {
                    t.push(gamma.at(b, c, a) * (fc.ybar(i, c) - fc.ya(i, c)));
                }
                map.insert(fc.yab_name(i, a, b), Expr::sum(t));
            }
        }
    }
    Ok(map)
}

/// `Jκ : JE → JJE` as a coordinate map:
/// `ȳ^i_a ↦ κ^i_a`, `y^i_a ↦ y^i_a`, `y^i_{ab} ↦ κ^i_{a,b} + y^j_b ∂_jκ^i_a`.
pub fn jet_prolongation(k: &GeneralConnection) -> HashMap<String, Expr> {
    let fc = &k.fc;
    let (n, m) = (fc.n(), fc.m());
    let mut map = HashMap::new();
    for i in 0..n {
        for a in 0..m {
            map.insert(fc.ybar_name(i, a), k.k[i][a].clone());
            map.insert(fc.ya_name(i, a), fc.ya(i, a));
            for b in 0..m {
                let mut t = vec![fc.dx(&k.k[i][a], b)];
                for j in 0..n {
                    t.push(fc.ya(j, b) * fc.dy(&k.k[i][a], j));
                }
                map.insert(fc.yab_name(i, a, b), Expr::sum(t));
            }
        }
    }
    map
}

/// Components of the prolonged connection `κ'` of `JE → M`.
#[derive(Clone, Debug)]
pub struct Prolonged {
    pub fc: std::sync::Arc<FiberedChart>,
    /// `(κ'_a)^i`, indexed `[i][a]`.
    pub first: Vec<Vec<Expr>>,
    /// `(κ'_a)^i_b`, indexed `[i][b][a]`.
    pub second: Vec<Vec<Vec<Expr>>>,
}

impl Prolonged {
    /// `κ'` as a general connection on the jet chart, fiber order `(y^i, y^i_b)`.
    pub fn as_connection(&self) -> GeneralConnection {
        let mut k = self.first.clone();
        for rows in &self.second {
            k.extend(rows.iter().cloned());
        }
        GeneralConnection { fc: self.fc.jet_chart(), k }
    }
}

/// `κ' = s_Γ ∘ Jκ`, computed by composing the two coordinate maps.
pub fn prolong(k: &GeneralConnection, gamma: &AffineConnectionField) -> Result<Prolonged, ConnectionError> {
    let s = involution(&k.fc, gamma)?;
    let jk = jet_prolongation(k);
    let fc = &k.fc;
    let (n, m) = (fc.n(), fc.m());
    let compose = |name: &str| s[name].subst_many(&jk);
    let first = (0..n).map(|i| (0..m).map(|a| compose(&fc.ya_name(i, a))).collect()).collect();
    // (κ'_a)^i_b is the y^i_{ba} component: the derivative of y^i_b along ∂x_a.
    let second = (0..n)
        .map(|i| (0..m).map(|b| (0..m).map(|a| compose(&fc.yab_name(i, b, a))).collect()).collect())
        .collect();
    Ok(Prolonged { fc: fc.clone(), first, second })
}

/// `(κ'_a)^i_b = κ^i_{a,b} + y^j_b ∂_jκ^i_a + Γ_a{}^c{}_b(κ^i_c − y^i_c)`, indexed `[i][b][a]`.
pub fn prolong_manageable(
    k: &GeneralConnection,
    gamma: &AffineConnectionField,
) -> Result<Vec<Vec<Vec<Expr>>>, ConnectionError> {
    if !gamma.symmetric {
        return Err(ConnectionError::NotSymmetric);
    }
    let fc = &k.fc;
    let (n, m) = (fc.n(), fc.m());
    Ok((0..n)
        .map(|i| {
            (0..m)
                .map(|b| {
                    (0..m)
                        .map(|a| {
                            let mut t = vec![fc.dx(&k.k[i][a], b)];
                            for j in 0..n {
                                t.push(fc.ya(j, b) * fc.dy(&k.k[i][a], j));
                            }
                            for c in 0..m {
                                t.push(gamma.at(a, c, b) * (&k.k[i][c] - fc.ya(i, c)));
                            }
                            Expr::sum(t)
                        })
                        .collect()
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Chart;
    use crate::symexpr::{compare_arrays, parse, NumericOptions};

    fn setup() -> (std::sync::Arc<FiberedChart>, GeneralConnection, AffineConnectionField) {
        let ch = Chart::unit("P", &["x", "t"]);
        let fc = FiberedChart::unit(ch.clone(), &["u", "v"]);
        let e = |s: &str| parse(s).unwrap();
        let k = GeneralConnection::new(
            fc.clone(),
            vec![vec![e("u*v + x"), e("sin(u)*t")], vec![e("v^2*x"), e("exp(t*u) - v")]],
        )
        .unwrap();
        let g = AffineConnectionField::from_fn(ch, true, |a, c, b| {
            parse(&format!("{}*x + t*{} + x*t*{}", a + b + c, (a + 1) * (b + 1), c)).unwrap()
        })
        .unwrap();
        (fc, k, g)
    }

    #[test]
    fn prolongation_is_projectable() {
        let (_, k, g) = setup();
        let p = prolong(&k, &g).unwrap();
        for i in 0..2 {
            for a in 0..2 {
                assert!(p.first[i][a].same_as(&k.k[i][a]));
            }
        }
    }

    #[test]
    fn composition_matches_manageable_form() {
        let (fc, k, g) = setup();
        let p = prolong(&k, &g).unwrap();
        let q = prolong_manageable(&k, &g).unwrap();
        let lhs: Vec<Expr> = p.second.into_iter().flatten().flatten().collect();
        let rhs: Vec<Expr> = q.into_iter().flatten().flatten().collect();
        assert!(compare_arrays(&lhs, &rhs, &fc.domain_first(), &NumericOptions::default()).unwrap().pass);
    }

    #[test]
    fn involution_squares_to_identity() {
        let (fc, _, g) = setup();
        let s = involution(&fc, &g).unwrap();
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        let mut names: Vec<&String> = s.keys().collect();
        names.sort();
        for name in names {
            lhs.push(s[name].subst_many(&s));
            rhs.push(Expr::var(name));
        }
        assert!(compare_arrays(&lhs, &rhs, &fc.domain_double(), &NumericOptions::default()).unwrap().pass);
    }

    #[test]
    fn asymmetric_gamma_is_rejected() {
        let (fc, k, _) = setup();
        let g = AffineConnectionField::from_fn(fc.base.clone(), false, |a, _, _| Expr::int(a as i64)).unwrap();
        assert_eq!(involution(&fc, &g).unwrap_err(), ConnectionError::NotSymmetric);
        assert!(prolong(&k, &g).is_err());
    }
}
