//! Charts, metrics, base connections and the tensors built from them.
//!
//! Connection coefficients follow the convention `∇_c v^a = ∂_c v^a − Γ_c{}^a{}_b v^b`,
//! so the stored `Γ` is the negative of the textbook Christoffel symbols.
//! Curvature is the curvature of `Γ` viewed as a linear connection of `TM`; with
//! this convention the unit 2-sphere has scalar curvature `−2`.

mod curvature;
mod forms;

use std::sync::{Arc, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::symexpr::{free_vars_of, sample_point, Assignment, Domain, Expr};

pub use curvature::{base_curvature, einstein, ricci, ricci_raised, scalar_curvature};
pub use forms::{
    breve, covariant_derivative_density, covariant_divergence, densitize, energy_divergence, hodge_star,
    levi_civita_symbol, torsion_form,
};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GeometryError {
    #[error("chart needs at least one coordinate")]
    EmptyChart,
    #[error("duplicate coordinate `{0}`")]
    DuplicateCoordinate(String),
    #[error("expected {expected} components, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("metric component ({0},{1}) differs from ({1},{0})")]
    AsymmetricMetric(usize, usize),
    #[error("metric is singular at [{0}]")]
    SingularMetric(Assignment),
    #[error("variable `{0}` is not a coordinate and has no value")]
    Uncovered(String),
    #[error("connection is not symmetric in slots ({0},{1}) for upper index {2}")]
    AsymmetricConnection(usize, usize, usize),
    #[error("operation requires dimension {expected}, chart has {got}")]
    WrongDimension { expected: usize, got: usize },
}

/// A coordinate chart with a default sampling box.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub name: String,
    pub coords: Vec<String>,
    pub bounds: Vec<(f64, f64)>,
}

impl Chart {
    pub fn new(name: &str, coords: &[&str], bounds: &[(f64, f64)]) -> Result<Arc<Chart>, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::EmptyChart);
        }
        if bounds.len() != coords.len() {
            return Err(GeometryError::Dimension { expected: coords.len(), got: bounds.len() });
        }
        for (k, c) in coords.iter().enumerate() {
            if coords[..k].contains(c) {
                return Err(GeometryError::DuplicateCoordinate(c.to_string()));
            }
        }
        Ok(Arc::new(Chart {
            name: name.to_string(),
            coords: coords.iter().map(|s| s.to_string()).collect(),
            bounds: bounds.to_vec(),
        }))
    }

    /// Chart on `[-1,1]^m`, mainly for tests.
    pub fn unit(name: &str, coords: &[&str]) -> Arc<Chart> {
        Chart::new(name, coords, &vec![(-1.0, 1.0); coords.len()]).expect("valid chart")
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, a: usize) -> Expr {
        Expr::var(&self.coords[a])
    }

    pub fn domain(&self) -> Domain {
        let mut d = Domain::new();
        for (c, (lo, hi)) in self.coords.iter().zip(&self.bounds) {
            d.set(c, *lo, *hi);
        }
        d
    }

    pub fn center(&self) -> Assignment {
        let mut a = Assignment::new();
        for (c, (lo, hi)) in self.coords.iter().zip(&self.bounds) {
            a.set_real(c, 0.5 * (lo + hi));
        }
        a
    }

    /// `∂_a f`.
    pub fn partial(&self, f: &Expr, a: usize) -> Expr {
        f.diff(&self.coords[a])
    }
}

/// Square matrix of expressions, row-major.
pub type Matrix = Vec<Vec<Expr>>;

/// Determinant by cofactor expansion along the first row.
pub fn determinant(m: &Matrix) -> Expr {
    let n = m.len();
    let cols: Vec<usize> = (0..n).collect();
    det_rec(m, 0, &cols)
}

fn det_rec(m: &Matrix, row: usize, cols: &[usize]) -> Expr {
    if cols.len() == 1 {
        return m[row][cols[0]].clone();
    }
    let mut terms = Vec::new();
    for (k, &c) in cols.iter().enumerate() {
        if m[row][c].is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = det_rec(m, row + 1, &rest);
        let t = &m[row][c] * minor;
        terms.push(if k % 2 == 0 { t } else { -t });
    }
    Expr::sum(terms)
}

/// Symbolic inverse via the adjugate.
pub fn inverse(m: &Matrix) -> Matrix {
    let n = m.len();
    let det = determinant(m);
    let mut inv = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
            let sub: Matrix = rows.iter().map(|&r| cols.iter().map(|&c| m[r][c].clone()).collect()).collect();
            let cof = if n == 1 { Expr::one() } else { determinant(&sub) };
            let cof = if (i + j) % 2 == 0 { cof } else { -cof };
            inv[i][j] = cof.div(&det);
        }
    }
    inv
}

/// Metric components `g_{ab}` on a chart.
#[derive(Debug)]
pub struct MetricField {
    pub chart: Arc<Chart>,
    g: Matrix,
    det_sign: f64,
    pub signature: Option<String>,
    inv: OnceLock<Matrix>,
    sqrt_det: OnceLock<Expr>,
}

impl MetricField {
    /// Validates symmetry (as expressions) and invertibility on the chart box.
    pub fn new(chart: Arc<Chart>, g: Matrix) -> Result<Arc<MetricField>, GeometryError> {
        let m = chart.dim();
        if g.len() != m || g.iter().any(|r| r.len() != m) {
            return Err(GeometryError::Dimension { expected: m * m, got: g.iter().map(Vec::len).sum() });
        }
        for a in 0..m {
            for b in 0..a {
                if !g[a][b].same_as(&g[b][a]) {
                    return Err(GeometryError::AsymmetricMetric(a, b));
                }
            }
        }
        let det = determinant(&g);
        let domain = chart.domain();
        if let Some(v) = free_vars_of([&det]).into_iter().find(|v| !domain.contains(v)) {
            return Err(GeometryError::Uncovered(v));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x6d65_7472_6963);
        let mut points = vec![chart.center()];
        points.extend((0..20).map(|_| sample_point(&domain, &mut rng)));
        let mut sign = 0.0;
        for p in points {
            let d = det.eval(&p).map_err(|_| GeometryError::SingularMetric(p.clone()))?;
            if d.norm() < 1e-12 || !d.re.is_finite() {
                return Err(GeometryError::SingularMetric(p));
            }
            let s = d.re.signum();
            if sign == 0.0 {
                sign = s;
            } else if s != sign {
                return Err(GeometryError::SingularMetric(p));
            }
        }
        Ok(Arc::new(MetricField {
            chart,
            g,
            det_sign: sign,
            signature: None,
            inv: OnceLock::new(),
            sqrt_det: OnceLock::new(),
        }))
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    /// `g_{ab}`.
    pub fn lower(&self, a: usize, b: usize) -> &Expr {
        &self.g[a][b]
    }

    pub fn matrix(&self) -> &Matrix {
        &self.g
    }

    /// `g^{ab}`.
    pub fn upper(&self, a: usize, b: usize) -> &Expr {
        &self.inverse()[a][b]
    }

    pub fn inverse(&self) -> &Matrix {
        self.inv.get_or_init(|| {
            let inv = inverse(&self.g);
            // Mirror the upper triangle so the inverse is symmetric as expressions.
            let m = inv.len();
            let mut out = inv.clone();
            for a in 0..m {
                for b in 0..a {
                    out[a][b] = inv[b][a].clone();
                }
            }
            out
        })
    }

    pub fn det(&self) -> Expr {
        determinant(&self.g)
    }

    /// Sign of `det g` on the chart box.
    pub fn det_sign(&self) -> f64 {
        self.det_sign
    }

    /// `√|g|`.
    pub fn sqrt_abs_det(&self) -> &Expr {
        self.sqrt_det.get_or_init(|| {
            let d = self.det();
            if self.det_sign < 0.0 { (-d).sqrt() } else { d.sqrt() }
        })
    }

    /// `v_a = g_{ab} v^b`.
    pub fn flat(&self, v: &[Expr]) -> Vec<Expr> {
        (0..self.dim()).map(|a| Expr::sum((0..self.dim()).map(|b| &self.g[a][b] * &v[b]))).collect()
    }

    /// `v^a = g^{ab} v_b`.
    pub fn sharp(&self, w: &[Expr]) -> Vec<Expr> {
        let inv = self.inverse();
        (0..self.dim()).map(|a| Expr::sum((0..self.dim()).map(|b| &inv[a][b] * &w[b]))).collect()
    }
}

/// Base connection coefficients. `gamma[c][a][b]` holds `Γ_a{}^c{}_b`
/// (derivative slot `a`, argument slot `b`).
#[derive(Clone, Debug)]
pub struct AffineConnectionField {
    pub chart: Arc<Chart>,
    gamma: Vec<Vec<Vec<Expr>>>,
    pub symmetric: bool,
}

impl AffineConnectionField {
    /// `gamma[c][a][b] = Γ_a{}^c{}_b`. With `symmetric`, slots must agree as expressions.
    pub fn new(chart: Arc<Chart>, gamma: Vec<Vec<Vec<Expr>>>, symmetric: bool) -> Result<Self, GeometryError> {
        let m = chart.dim();
        let count: usize = gamma.iter().flatten().map(Vec::len).sum();
        if gamma.len() != m || gamma.iter().any(|s| s.len() != m || s.iter().any(|r| r.len() != m)) {
            return Err(GeometryError::Dimension { expected: m * m * m, got: count });
        }
        if symmetric {
            for (c, slab) in gamma.iter().enumerate() {
                for a in 0..m {
                    for b in 0..a {
                        if !slab[a][b].same_as(&slab[b][a]) {
                            return Err(GeometryError::AsymmetricConnection(a, b, c));
                        }
                    }
                }
            }
        }
        Ok(AffineConnectionField { chart, gamma, symmetric })
    }

    /// Builds from a function returning `Γ_a{}^c{}_b` for `(a, c, b)`.
    pub fn from_fn(
        chart: Arc<Chart>,
        symmetric: bool,
        mut f: impl FnMut(usize, usize, usize) -> Expr,
    ) -> Result<Self, GeometryError> {
        let m = chart.dim();
        let gamma = (0..m).map(|c| (0..m).map(|a| (0..m).map(|b| f(a, c, b)).collect()).collect()).collect();
        Self::new(chart, gamma, symmetric)
    }

    pub fn zero(chart: Arc<Chart>) -> Self {
        Self::from_fn(chart, true, |_, _, _| Expr::zero()).expect("zero connection")
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// `Γ_a{}^c{}_b`, read in the index order of the formulas.
    pub fn at(&self, a: usize, c: usize, b: usize) -> &Expr {
        &self.gamma[c][a][b]
    }

    /// Storage view, `[c][a][b]`.
    pub fn raw(&self) -> &Vec<Vec<Vec<Expr>>> {
        &self.gamma
    }

    /// Textbook Christoffel symbols `Γ^c_{ab}`, the negatives of the stored coefficients.
    pub fn christoffel(&self, c: usize, a: usize, b: usize) -> Expr {
        -&self.gamma[c][a][b]
    }

    /// The coefficients as a linear connection of `TM`: `κ[a][c][b] = Γ_a{}^c{}_b`.
    pub fn as_linear(&self) -> Vec<Matrix> {
        let m = self.dim();
        (0..m).map(|a| (0..m).map(|c| (0..m).map(|b| self.gamma[c][a][b].clone()).collect()).collect()).collect()
    }
}

/// Levi-Civita connection, `Γ_a{}^c{}_b = −½ g^{cd}(∂_a g_{db} + ∂_b g_{da} − ∂_d g_{ab})`.
pub fn levi_civita(g: &MetricField) -> AffineConnectionField {
    let m = g.dim();
    let ch = &g.chart;
    let inv = g.inverse();
    // dg[d][a][b] = ∂_d g_{ab}
    let dg: Vec<Matrix> =
        (0..m).map(|d| (0..m).map(|a| (0..m).map(|b| ch.partial(g.lower(a, b), d)).collect()).collect()).collect();
    let mut gamma = vec![vec![vec![Expr::zero(); m]; m]; m];
    for c in 0..m {
        for a in 0..m {
            for b in a..m {
                let e = Expr::sum((0..m).map(|d| {
                    let bracket = Expr::sum([dg[a][d][b].clone(), dg[b][d][a].clone(), -&dg[d][a][b]]);
                    &inv[c][d] * bracket
                }));
                let e = Expr::rational(-1, 2) * e;
                gamma[c][a][b] = e.clone();
                gamma[c][b][a] = e;
            }
        }
    }
    AffineConnectionField::new(ch.clone(), gamma, true).expect("Levi-Civita coefficients are symmetric")
}

/// `∇_c g_{ab} = ∂_c g_{ab} + Γ_c{}^d{}_a g_{db} + Γ_c{}^d{}_b g_{ad}`, indexed `[c][a][b]`.
pub fn metric_covariant_derivative(g: &MetricField, gamma: &AffineConnectionField) -> Vec<Matrix> {
    let m = g.dim();
    (0..m)
        .map(|c| {
            (0..m)
                .map(|a| {
                    (0..m)
                        .map(|b| {
                            let mut t = vec![g.chart.partial(g.lower(a, b), c)];
                            for d in 0..m {
                                t.push(gamma.at(c, d, a) * g.lower(d, b));
                                t.push(gamma.at(c, d, b) * g.lower(a, d));
                            }
                            Expr::sum(t)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Up,
    Down,
}

/// Dense tensor of expressions, row-major over its slots.
#[derive(Clone, Debug)]
pub struct TensorField {
    pub chart: Arc<Chart>,
    pub slots: Vec<Slot>,
    pub data: Vec<Expr>,
}

impl TensorField {
    pub fn from_fn(chart: Arc<Chart>, slots: Vec<Slot>, mut f: impl FnMut(&[usize]) -> Expr) -> Self {
        let m = chart.dim();
        let n = slots.len();
        let total = m.pow(n as u32);
        let mut idx = vec![0usize; n];
        let mut data = Vec::with_capacity(total);
        for flat in 0..total {
            let mut r = flat;
            for k in (0..n).rev() {
                idx[k] = r % m;
                r /= m;
            }
            data.push(f(&idx));
        }
        TensorField { chart, slots, data }
    }

    pub fn zeros(chart: Arc<Chart>, slots: Vec<Slot>) -> Self {
        Self::from_fn(chart, slots, |_| Expr::zero())
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.slots.len(), "index count does not match tensor rank");
        let m = self.chart.dim();
        idx.iter().fold(0, |acc, &i| {
            assert!(i < m, "index out of range");
            acc * m + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        &self.data[self.offset(idx)]
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> TensorField {
        TensorField { chart: self.chart.clone(), slots: self.slots.clone(), data: self.data.iter().map(f).collect() }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::symexpr::{compare_arrays, parse, NumericOptions};

    pub(crate) fn sphere() -> Arc<MetricField> {
        let ch = Chart::new("S2", &["th", "ph"], &[(0.3, std::f64::consts::PI - 0.3), (0.0, 6.0)]).unwrap();
        let s = parse("sin(th)^2").unwrap();
        MetricField::new(ch, vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), s]]).unwrap()
    }

    #[test]
    fn sphere_christoffel() {
        let g = sphere();
        let lc = levi_civita(&g);
        let d = g.chart.domain();
        let o = NumericOptions::default();
        let want = [parse("-sin(th)*cos(th)").unwrap(), parse("cos(th)/sin(th)").unwrap()];
        let got = [lc.christoffel(0, 1, 1), lc.christoffel(1, 0, 1)];
        assert!(compare_arrays(&got, &want, &d, &o).unwrap().pass);
        assert!(lc.at(1, 0, 1).same_as(lc.at(1, 0, 1)));
    }

    #[test]
    fn minkowski_christoffel_vanishes() {
        let ch = Chart::unit("M", &["t", "x", "y", "z"]);
        let eta = (0..4)
            .map(|a| (0..4).map(|b| if a != b { Expr::zero() } else if a == 0 { Expr::one() } else { Expr::int(-1) }).collect())
            .collect();
        let g = MetricField::new(ch, eta).unwrap();
        assert_eq!(g.det_sign(), -1.0);
        let lc = levi_civita(&g);
        assert!(lc.raw().iter().flatten().flatten().all(Expr::is_zero));
    }

    #[test]
    fn conformally_flat_metricity() {
        let ch = Chart::unit("P", &["x", "y"]);
        let f = parse("exp(2*(x*y + sin(x)))").unwrap();
        let g = MetricField::new(ch, vec![vec![f.clone(), Expr::zero()], vec![Expr::zero(), f]]).unwrap();
        let lc = levi_civita(&g);
        let ng: Vec<Expr> = metric_covariant_derivative(&g, &lc).into_iter().flatten().flatten().collect();
        let zeros = vec![Expr::zero(); ng.len()];
        assert!(compare_arrays(&ng, &zeros, &g.chart.domain(), &NumericOptions::default()).unwrap().pass);
    }

    #[test]
    fn rejects_bad_metrics() {
        let ch = Chart::unit("P", &["x", "y"]);
        let x = Expr::var("x");
        let asym = vec![vec![Expr::one(), x.clone()], vec![Expr::zero(), Expr::one()]];
        assert_eq!(MetricField::new(ch.clone(), asym).unwrap_err(), GeometryError::AsymmetricMetric(1, 0));
        let singular = vec![vec![x.clone(), Expr::zero()], vec![Expr::zero(), Expr::one()]];
        assert!(matches!(MetricField::new(ch, singular), Err(GeometryError::SingularMetric(_))));
    }

    #[test]
    fn symbolic_inverse() {
        let ch = Chart::unit("P", &["x", "y", "z"]);
        let m: Matrix = (0..3)
            .map(|a| (0..3).map(|b| parse(&format!("{}+x*{}+y^2*{}", 6 * (a == b) as i32 + 1, a + b, a * b)).unwrap()).collect())
            .collect();
        let inv = inverse(&m);
        let mut prod = Vec::new();
        let mut id = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                prod.push(Expr::sum((0..3).map(|c| &m[a][c] * &inv[c][b])));
                id.push(if a == b { Expr::one() } else { Expr::zero() });
            }
        }
        let d = ch.domain();
        assert!(compare_arrays(&prod, &id, &d, &NumericOptions::default()).unwrap().pass);
    }

    use crate::verify::fixtures::Fixtures;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn levi_civita_is_symmetric_metric_and_inverts(seed in any::<u64>(), m in 2usize..=4) {
            let names = ["t", "x", "y", "z"];
            let ch = Chart::unit("P", &names[..m]);
            let sig: Vec<i64> = (0..m).map(|a| if a == 0 { 1 } else { -1 }).collect();
            let g = Fixtures::new(seed).metric(&ch, &sig, 2);
            let lc = levi_civita(&g);
            let opts = NumericOptions { trials: 4, seed, ..Default::default() };
            let (mut l, mut r) = (Vec::new(), Vec::new());
            for c in 0..m {
                for a in 0..m {
                    for b in 0..m {
                        l.push(lc.at(a, c, b).clone());
                        r.push(lc.at(b, c, a).clone());
                    }
                }
            }
            prop_assert!(compare_arrays(&l, &r, &ch.domain(), &opts).unwrap().pass);
            let nabla: Vec<Expr> = metric_covariant_derivative(&g, &lc).into_iter().flatten().flatten().collect();
            let zeros = vec![Expr::zero(); nabla.len()];
            prop_assert!(compare_arrays(&nabla, &zeros, &ch.domain(), &opts).unwrap().pass);
            let mut prod = Vec::new();
            let mut id = Vec::new();
            for a in 0..m {
                for b in 0..m {
                    prod.push(Expr::sum((0..m).map(|c| g.lower(a, c) * g.upper(c, b))));
                    id.push(if a == b { Expr::one() } else { Expr::zero() });
                }
            }
            prop_assert!(compare_arrays(&prod, &id, &ch.domain(), &opts).unwrap().pass);
        }
    }
}
