use std::collections::HashMap;
use std::sync::Arc;

use super::{bundle_coord_name, ConnectionError, FiberedChart, LinearConnection};
use crate::geometry::Chart;
use crate::symexpr::{Const, Expr};

/// Constant complex matrix with exact entries.
pub type CMatrix = Vec<Vec<Const>>;

fn mat_mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(Const::zero(), |acc, h| acc.add(&a[i][h].mul(&b[h][j]))))
                .collect()
        })
        .collect()
}

fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ab, ba) = (mat_mul(a, b), mat_mul(b, a));
    ab.iter().zip(&ba).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.sub(y)).collect()).collect()
}

/// `Tr(A†B)`.
fn hermitian_product(a: &CMatrix, b: &CMatrix) -> Const {
    let n = a.len();
    let mut acc = Const::zero();
    for i in 0..n {
        for j in 0..n {
            acc = acc.add(&a[j][i].conj().mul(&b[j][i]));
        }
    }
    acc
}

/// Structure constants `c^I_{JH}` of an orthogonal anti-Hermitian frame, indexed `[I][J][H]`.
pub fn structure_constants(frame: &[CMatrix]) -> Result<Vec<Vec<Vec<Const>>>, ConnectionError> {
    Ok(GaugeStructure::new(frame.to_vec())?.c)
}

/// A Lie-algebra frame `l_I` of anti-Hermitian endomorphisms of an `n`-dimensional fiber.
///
/// The frame only needs to be orthogonal for `⟨A,B⟩ = Tr(A†B)`; its diagonal
/// metric `h_I = ⟨l_I,l_I⟩` is used for index lowering.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeStructure {
    pub n: usize,
    pub frame: Vec<CMatrix>,
    /// `c^I_{JH}`, indexed `[I][J][H]`.
    pub c: Vec<Vec<Vec<Const>>>,
    pub h: Vec<Const>,
}

impl GaugeStructure {
    pub fn new(frame: Vec<CMatrix>) -> Result<Self, ConnectionError> {
        let n = frame.first().map_or(0, Vec::len);
        for l in &frame {
            if l.len() != n || l.iter().any(|r| r.len() != n) {
                return Err(ConnectionError::FrameShape(n));
            }
        }
        for (k, l) in frame.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    if l[i][j].conj().neg() != l[j][i] {
                        return Err(ConnectionError::NotAntiHermitian(k));
                    }
                }
            }
        }
        let dim = frame.len();
        let mut h = Vec::with_capacity(dim);
        for a in 0..dim {
            for b in 0..a {
                if !hermitian_product(&frame[a], &frame[b]).is_zero() {
                    return Err(ConnectionError::NotOrthogonal(b, a));
                }
            }
            let norm = hermitian_product(&frame[a], &frame[a]);
            if norm.is_zero() {
                return Err(ConnectionError::Degenerate(a));
            }
            h.push(norm);
        }
        let mut c = vec![vec![vec![Const::zero(); dim]; dim]; dim];
        for j in 0..dim {
            for k in 0..dim {
                let br = commutator(&frame[j], &frame[k]);
                let mut rest = br.clone();
                for i in 0..dim {
                    let coeff = hermitian_product(&frame[i], &br).div(&h[i]).expect("nonzero norm");
                    for (r, lr) in rest.iter_mut().zip(&frame[i]) {
                        for (x, y) in r.iter_mut().zip(lr) {
                            *x = x.sub(&coeff.mul(y));
                        }
                    }
                    c[i][j][k] = coeff;
                }
                if rest.iter().flatten().any(|x| !x.is_zero()) {
                    return Err(ConnectionError::NotClosed(j, k));
                }
            }
        }
        Ok(GaugeStructure { n, frame, c, h })
    }

    /// `u(1)` with frame `{i}`.
    pub fn u1() -> Self {
        GaugeStructure::new(vec![vec![vec![Const::imag_unit()]]]).expect("u(1) frame")
    }

    /// `su(2)` with frame `l_I = (i/2)σ_I`, so `h_I = 1/2` and `c^K_{IJ} = −ε_{IJK}`.
    pub fn su2() -> Self {
        let half_i = Const::imag_unit().mul(&Const::rational(1, 2));
        let half = Const::rational(1, 2);
        let z = Const::zero;
        let frame = vec![
            vec![vec![z(), half_i.clone()], vec![half_i.clone(), z()]],
            vec![vec![z(), half.clone()], vec![half.neg(), z()]],
            vec![vec![half_i.clone(), z()], vec![z(), half_i.neg()]],
        ];
        GaugeStructure::new(frame).expect("su(2) frame")
    }

    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    /// `c^I_{JH}`.
    pub fn c(&self, i: usize, j: usize, h: usize) -> &Const {
        &self.c[i][j][h]
    }

    /// Index lowering `v_I = h_I v^I`.
    pub fn lower(&self, i: usize, v: &Expr) -> Expr {
        Expr::constant(self.h[i].clone()) * v
    }

    /// Index raising `v^I = v_I / h_I`.
    pub fn raise(&self, i: usize, v: &Expr) -> Expr {
        v.div(&Expr::constant(self.h[i].clone()))
    }

    /// Cyclic sum `c^I_{JM}c^M_{HK} + c^I_{HM}c^M_{KJ} + c^I_{KM}c^M_{JH}`; zero for every index triple.
    pub fn jacobi_holds(&self) -> bool {
        let d = self.dim();
        let term = |i: usize, j: usize, h: usize, k: usize| {
            (0..d).fold(Const::zero(), |acc, m| acc.add(&self.c[i][j][m].mul(&self.c[m][h][k])))
        };
        (0..d).all(|i| {
            (0..d).all(|j| {
                (0..d).all(|h| {
                    (0..d).all(|k| term(i, j, h, k).add(&term(i, h, k, j)).add(&term(i, k, j, h)).is_zero())
                })
            })
        })
    }

    /// `Σ_I v^I (l_I)^i_j`.
    pub fn expand(&self, v: &[Expr]) -> Vec<Vec<Expr>> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| {
                        Expr::sum(
                            self.frame
                                .iter()
                                .zip(v)
                                .filter(|(l, _)| !l[i][j].is_zero())
                                .map(|(l, x)| Expr::constant(l[i][j].clone()) * x),
                        )
                    })
                    .collect()
            })
            .collect()
    }
}

/// Gauge field `κ^I_a(x)`, stored `[a][I]`.
#[derive(Clone, Debug)]
pub struct GaugeField {
    pub gs: Arc<GaugeStructure>,
    pub chart: Arc<Chart>,
    /// Prefix of the gauge-bundle coordinates `y^I_a`.
    pub prefix: String,
    pub k: Vec<Vec<Expr>>,
}

impl GaugeField {
    pub fn new(
        gs: Arc<GaugeStructure>,
        chart: Arc<Chart>,
        prefix: &str,
        k: Vec<Vec<Expr>>,
    ) -> Result<Self, ConnectionError> {
        let (m, d) = (chart.dim(), gs.dim());
        if k.len() != m || k.iter().any(|r| r.len() != d) {
            return Err(ConnectionError::Dimension { expected: m * d, got: k.iter().map(Vec::len).sum() });
        }
        for v in crate::symexpr::free_vars_of(k.iter().flatten()) {
            if !chart.coords.contains(&v) {
                return Err(ConnectionError::ForeignSymbol(v));
            }
        }
        Ok(GaugeField { gs, chart, prefix: prefix.to_string(), k })
    }

    /// `κ^I_a`.
    pub fn at(&self, a: usize, i: usize) -> &Expr {
        &self.k[a][i]
    }

    pub fn coord_name(&self, i: usize, a: usize) -> String {
        format!("{}{}_{}", self.prefix, i, a)
    }

    /// Fibered chart of the gauge bundle `C_G`, fiber coordinates `y^I_a` ordered by `(a, I)`.
    pub fn bundle(&self) -> Arc<FiberedChart> {
        let (m, d) = (self.chart.dim(), self.gs.dim());
        let names: Vec<String> = (0..m).flat_map(|a| (0..d).map(move |i| (a, i))).map(|(a, i)| self.coord_name(i, a)).collect();
        let bounds = vec![(-1.0, 1.0); names.len()];
        FiberedChart::from_owned(self.chart.clone(), names, bounds).expect("gauge coordinates are distinct")
    }

    /// `κ` as a section of `C_G`, in the order of [`Self::bundle`].
    pub fn as_bundle_section(&self) -> Vec<Expr> {
        self.k.iter().flatten().cloned().collect()
    }

    /// Endomorphism-level linear connection `κ_a{}^i{}_j = κ^I_a (l_I)^i_j` on `fc`.
    pub fn expand(&self, fc: Arc<FiberedChart>) -> Result<LinearConnection, ConnectionError> {
        if fc.n() != self.gs.n || fc.m() != self.chart.dim() {
            return Err(ConnectionError::Dimension { expected: self.gs.n, got: fc.n() });
        }
        let k = self.k.iter().map(|row| self.gs.expand(row)).collect();
        LinearConnection::new(fc, k)
    }

    /// Substitution `y^i_{bj} ↦ y^H_b (l_H)^i_j` from the linear bundle of `fc` to `C_G`.
    pub fn bundle_embedding(&self, fc: &FiberedChart) -> HashMap<String, Expr> {
        let gb = self.bundle();
        let d = self.gs.dim();
        let mut map = HashMap::new();
        for b in 0..fc.m() {
            let ys: Vec<Expr> = (0..d).map(|h| gb.y(b * d + h)).collect();
            let e = self.gs.expand(&ys);
            for i in 0..fc.n() {
                for j in 0..fc.n() {
                    map.insert(bundle_coord_name(fc, i, b, j), e[i][j].clone());
                }
            }
        }
        map
    }
}

/// `ρ^I_{ab} = κ^I_{a,b} − κ^I_{b,a} + c^I_{JH}κ^J_aκ^H_b`, indexed `[a][b][I]`.
pub fn gauge_curvature(k: &GaugeField) -> Vec<Vec<Vec<Expr>>> {
    let (m, d) = (k.chart.dim(), k.gs.dim());
    let mut rho = vec![vec![vec![Expr::zero(); d]; m]; m];
    for a in 0..m {
        for b in 0..m {
            if a == b {
                continue;
            }
            for i in 0..d {
                let mut t = vec![k.chart.partial(&k.k[a][i], b), -k.chart.partial(&k.k[b][i], a)];
                for j in 0..d {
                    for h in 0..d {
                        let c = k.gs.c(i, j, h);
                        if !c.is_zero() {
                            t.push(Expr::constant(c.clone()) * &k.k[a][j] * &k.k[b][h]);
                        }
                    }
                }
                rho[a][b][i] = Expr::sum(t);
            }
        }
    }
    rho
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::linear_curvature;
    use crate::symexpr::{compare_arrays, parse, NumericOptions};

    #[test]
    fn u1_is_abelian() {
        let g = GaugeStructure::u1();
        assert!(g.c[0][0][0].is_zero());
        assert_eq!(g.h, vec![Const::one()]);
    }

    #[test]
    fn su2_constants_are_minus_epsilon() {
        let g = GaugeStructure::su2();
        let eps = |i: usize, j: usize, k: usize| -> i64 {
            let p = [i, j, k];
            if p[0] == p[1] || p[1] == p[2] || p[0] == p[2] {
                0
            } else if [(0, 1, 2), (1, 2, 0), (2, 0, 1)].contains(&(i, j, k)) {
                1
            } else {
                -1
            }
        };
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_eq!(g.c[k][i][j], Const::int(-eps(i, j, k)));
                    assert_eq!(g.c[k][i][j], g.c[k][j][i].neg());
                }
            }
        }
        assert!(g.jacobi_holds());
        assert_eq!(g.h[0], Const::rational(1, 2));
    }

    #[test]
    fn invalid_frames_name_the_problem() {
        let i = Const::imag_unit();
        let z = Const::zero;
        let herm = vec![vec![vec![Const::one()]]];
        assert_eq!(GaugeStructure::new(herm).unwrap_err(), ConnectionError::NotAntiHermitian(0));
        let a = vec![vec![i.clone(), z()], vec![z(), z()]];
        let b = vec![vec![i.clone(), z()], vec![z(), i.clone()]];
        assert_eq!(GaugeStructure::new(vec![a, b]).unwrap_err(), ConnectionError::NotOrthogonal(0, 1));
    }

    #[test]
    fn rescaled_frame_lowers_by_four() {
        let mut frame = GaugeStructure::su2().frame;
        frame[0] = frame[0].iter().map(|r| r.iter().map(|x| x.mul(&Const::int(2))).collect()).collect();
        let g = GaugeStructure::new(frame).unwrap();
        assert_eq!(g.h[0], Const::int(2));
        assert_eq!(g.h[1], Const::rational(1, 2));
        let v = Expr::var("v");
        let r = g.lower(0, &v).eval(&crate::symexpr::Assignment::from_reals(&[("v", 3.0)])).unwrap();
        assert_eq!(r.re, 6.0);
    }

    #[test]
    fn curvature_expands_to_linear_curvature() {
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
        let fc = FiberedChart::unit(ch.clone(), &["z1", "z2"]);
        let lin = k.expand(fc).unwrap();
        let rl = linear_curvature(&ch, &lin.k);
        let rg = gauge_curvature(&k);
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                let ex = gs.expand(&rg[a][b]);
                for i in 0..2 {
                    for j in 0..2 {
                        lhs.push(ex[i][j].clone());
                        rhs.push(rl[a][b][i][j].clone());
                    }
                }
            }
        }
        assert!(compare_arrays(&lhs, &rhs, &ch.domain(), &NumericOptions::default()).unwrap().pass);
    }
}
