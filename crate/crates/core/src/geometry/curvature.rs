use super::{AffineConnectionField, MetricField, Slot, TensorField};
use crate::connections::linear_curvature;
use crate::symexpr::Expr;

/// `R_{ab}{}^c{}_d`: the curvature of `Γ` as a linear connection of `TM`.
pub fn base_curvature(gamma: &AffineConnectionField) -> TensorField {
    let rho = linear_curvature(&gamma.chart, &gamma.as_linear());
    TensorField::from_fn(gamma.chart.clone(), vec![Slot::Down, Slot::Down, Slot::Up, Slot::Down], |ix| {
        rho[ix[0]][ix[1]][ix[2]][ix[3]].clone()
    })
}

/// `R_{ac} = R_{ab}{}^b{}_c`.
pub fn ricci(r4: &TensorField) -> TensorField {
    let m = r4.chart.dim();
    TensorField::from_fn(r4.chart.clone(), vec![Slot::Down, Slot::Down], |ix| {
        Expr::sum((0..m).map(|b| r4.get(&[ix[0], b, b, ix[1]]).clone()))
    })
}

/// `R = g^{ac}R_{ac}`.
pub fn scalar_curvature(g: &MetricField, ric: &TensorField) -> Expr {
    let m = g.dim();
    Expr::sum((0..m).flat_map(|a| (0..m).map(move |c| (a, c))).map(|(a, c)| g.upper(a, c) * ric.get(&[a, c])))
}

/// `R^a_b = g^{ac}R_{cb}`.
pub fn ricci_raised(g: &MetricField, ric: &TensorField) -> TensorField {
    let m = g.dim();
    TensorField::from_fn(g.chart.clone(), vec![Slot::Up, Slot::Down], |ix| {
        Expr::sum((0..m).map(|c| g.upper(ix[0], c) * ric.get(&[c, ix[1]])))
    })
}

/// `G^a_b = R^a_b − ½Rδ^a_b`.
pub fn einstein(g: &MetricField, gamma: &AffineConnectionField) -> TensorField {
    let ric = ricci(&base_curvature(gamma));
    let r = scalar_curvature(g, &ric);
    let mixed = ricci_raised(g, &ric);
    TensorField::from_fn(g.chart.clone(), vec![Slot::Up, Slot::Down], |ix| {
        let base = mixed.get(ix).clone();
        if ix[0] == ix[1] {
            base - Expr::rational(1, 2) * &r
        } else {
            base
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{energy_divergence, levi_civita, tests::sphere, Chart};
    use crate::symexpr::{compare_arrays, parse, NumericOptions};

    #[test]
    fn sphere_scalar_curvature_is_minus_two() {
        let g = sphere();
        let lc = levi_civita(&g);
        let ric = ricci(&base_curvature(&lc));
        let r = scalar_curvature(&g, &ric);
        let d = g.chart.domain();
        assert!(compare_arrays(&[r], &[Expr::int(-2)], &d, &NumericOptions::default()).unwrap().pass);
        let gt = einstein(&g, &lc);
        let zeros = vec![Expr::zero(); 4];
        assert!(compare_arrays(&gt.data, &zeros, &d, &NumericOptions::default()).unwrap().pass);
    }

    #[test]
    fn curvature_is_antisymmetric_and_bianchi_holds() {
        let ch = Chart::new("P", &["x", "y", "z"], &[(-0.5, 0.5); 3]).unwrap();
        let e = |s: &str| parse(s).unwrap();
        let g = MetricField::new(
            ch.clone(),
            vec![
                vec![e("2 + x*y"), e("z/3"), e("0")],
                vec![e("z/3"), e("3 + sin(x)"), e("x*z/5")],
                vec![e("0"), e("x*z/5"), e("2 + y^2")],
            ],
        )
        .unwrap();
        let lc = levi_civita(&g);
        let r4 = base_curvature(&lc);
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        let mut cyc = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        lhs.push(r4.get(&[a, b, c, d]).clone());
                        rhs.push(-r4.get(&[b, a, c, d]));
                        cyc.push(r4.get(&[a, b, c, d]) + r4.get(&[b, d, c, a]) + r4.get(&[d, a, c, b]));
                    }
                }
            }
        }
        let o = NumericOptions::default();
        let dom = ch.domain();
        assert!(compare_arrays(&lhs, &rhs, &dom, &o).unwrap().pass);
        let zeros = vec![Expr::zero(); cyc.len()];
        assert!(compare_arrays(&cyc, &zeros, &dom, &o).unwrap().pass);
        let gt = einstein(&g, &lc);
        let sg = g.sqrt_abs_det();
        let u: Vec<Vec<Expr>> = (0..3).map(|a| (0..3).map(|b| sg * gt.get(&[a, b])).collect()).collect();
        let div = energy_divergence(&u, &lc);
        assert!(compare_arrays(&div, &vec![Expr::zero(); 3], &dom, &o).unwrap().pass);
    }
}
