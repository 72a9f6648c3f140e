//! Connections on fibered charts and their prolongations.
//!
//! Jet coordinates are generated symbols owned by [`FiberedChart`]:
//! `y_a{a}` for `y^i_a`, `y_a{a}_a{b}` for the ordered second jet `y^i_{ab} = (y^i_a)_b`,
//! and `y_u{a}` for the underlined coordinate `ȳ^i_a` of the double jet space.
//! The symmetric second jet of `J₂E` reuses the ordered name with `a ≤ b`.

mod gauge;
mod over;
mod prolong;

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{Chart, Matrix};
use crate::symexpr::{free_vars_of, Domain, Expr};

pub use gauge::{gauge_curvature, structure_constants, CMatrix, GaugeField, GaugeStructure};
pub use over::{
    overconnection_covariant_derivative, overconnection_gauge, overconnection_gauge_expanded,
    overconnection_linear, overconnection_linear_tensor, Overconnection,
};
pub use prolong::{involution, jet_prolongation, prolong, prolong_manageable, Prolonged};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ConnectionError {
    #[error("generated symbol `{0}` collides with another coordinate")]
    SymbolClash(String),
    #[error("expected {expected} components, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("component depends on `{0}`, which is outside the allowed symbols")]
    ForeignSymbol(String),
    #[error("base connection must be symmetric")]
    NotSymmetric,
    #[error("frame element {0} is not anti-Hermitian")]
    NotAntiHermitian(usize),
    #[error("frame elements {0} and {1} are not orthogonal")]
    NotOrthogonal(usize, usize),
    #[error("frame element {0} has zero norm")]
    Degenerate(usize),
    #[error("commutator of frame elements {0} and {1} leaves the span of the frame")]
    NotClosed(usize, usize),
    #[error("frame matrices must be {0}x{0}")]
    FrameShape(usize),
    #[error("overconnection was built for a different connection")]
    Mismatch,
}

/// Fibered coordinates `(x^a, y^i)` and the jet symbol families derived from them.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberedChart {
    pub base: Arc<Chart>,
    pub fiber: Vec<String>,
    pub fiber_bounds: Vec<(f64, f64)>,
}

impl FiberedChart {
    pub fn new(base: Arc<Chart>, fiber: &[&str], bounds: &[(f64, f64)]) -> Result<Arc<Self>, ConnectionError> {
        Self::from_owned(base, fiber.iter().map(|s| s.to_string()).collect(), bounds.to_vec())
    }

    pub fn from_owned(
        base: Arc<Chart>,
        fiber: Vec<String>,
        fiber_bounds: Vec<(f64, f64)>,
    ) -> Result<Arc<Self>, ConnectionError> {
        if fiber.len() != fiber_bounds.len() {
            return Err(ConnectionError::Dimension { expected: fiber.len(), got: fiber_bounds.len() });
        }
        let fc = FiberedChart { base, fiber, fiber_bounds };
        let mut seen = std::collections::HashSet::new();
        let m = fc.m();
        let mut names: Vec<String> = fc.base.coords.clone();
        for i in 0..fc.n() {
            names.push(fc.fiber[i].clone());
            for a in 0..m {
                names.push(fc.ya_name(i, a));
                names.push(fc.ybar_name(i, a));
                for b in 0..m {
                    names.push(fc.yab_name(i, a, b));
                }
            }
        }
        for nm in names {
            if !seen.insert(nm.clone()) {
                return Err(ConnectionError::SymbolClash(nm));
            }
        }
        Ok(Arc::new(fc))
    }

    /// Fiber box `[-1,1]^n`, mainly for tests.
    pub fn unit(base: Arc<Chart>, fiber: &[&str]) -> Arc<Self> {
        Self::new(base, fiber, &vec![(-1.0, 1.0); fiber.len()]).expect("valid fibered chart")
    }

    pub fn m(&self) -> usize {
        self.base.dim()
    }

    pub fn n(&self) -> usize {
        self.fiber.len()
    }

    pub fn x(&self, a: usize) -> Expr {
        self.base.coord(a)
    }

    pub fn y(&self, i: usize) -> Expr {
        Expr::var(&self.fiber[i])
    }

    pub fn ya_name(&self, i: usize, a: usize) -> String {
        format!("{}_a{}", self.fiber[i], a)
    }

    pub fn yab_name(&self, i: usize, a: usize, b: usize) -> String {
        format!("{}_a{}_a{}", self.fiber[i], a, b)
    }

    pub fn ybar_name(&self, i: usize, a: usize) -> String {
        format!("{}_u{}", self.fiber[i], a)
    }

    /// `y^i_a`.
    pub fn ya(&self, i: usize, a: usize) -> Expr {
        Expr::var(&self.ya_name(i, a))
    }

    /// Ordered `y^i_{ab} = (y^i_a)_b` of the double jet space.
    pub fn yab(&self, i: usize, a: usize, b: usize) -> Expr {
        Expr::var(&self.yab_name(i, a, b))
    }

    /// Symmetric second-jet coordinate of `J₂E`.
    pub fn ysym(&self, i: usize, a: usize, b: usize) -> Expr {
        self.yab(i, a.min(b), a.max(b))
    }

    /// `ȳ^i_a`.
    pub fn ybar(&self, i: usize, a: usize) -> Expr {
        Expr::var(&self.ybar_name(i, a))
    }

    /// `∂_a f` with respect to a base coordinate.
    pub fn dx(&self, f: &Expr, a: usize) -> Expr {
        f.diff(&self.base.coords[a])
    }

    /// `∂_i f` with respect to a fiber coordinate.
    pub fn dy(&self, f: &Expr, i: usize) -> Expr {
        f.diff(&self.fiber[i])
    }

    /// `∂^a_i f` with respect to `y^i_a`.
    pub fn dya(&self, f: &Expr, i: usize, a: usize) -> Expr {
        f.diff(&self.ya_name(i, a))
    }

    /// Base and fiber box.
    pub fn domain(&self) -> Domain {
        let mut d = self.base.domain();
        for (y, (lo, hi)) in self.fiber.iter().zip(&self.fiber_bounds) {
            d.set(y, *lo, *hi);
        }
        d
    }

    /// Adds `y^i_a` on `[-1,1]`.
    pub fn domain_first(&self) -> Domain {
        let mut d = self.domain();
        for i in 0..self.n() {
            for a in 0..self.m() {
                d.set(&self.ya_name(i, a), -1.0, 1.0);
            }
        }
        d
    }

    /// Adds the symmetric second jets.
    pub fn domain_second(&self) -> Domain {
        let mut d = self.domain_first();
        for i in 0..self.n() {
            for a in 0..self.m() {
                for b in a..self.m() {
                    d.set(&self.yab_name(i, a, b), -1.0, 1.0);
                }
            }
        }
        d
    }

    /// Coordinates of the double jet space `JJE`.
    pub fn domain_double(&self) -> Domain {
        let mut d = self.domain_first();
        for i in 0..self.n() {
            for a in 0..self.m() {
                d.set(&self.ybar_name(i, a), -1.0, 1.0);
                for b in 0..self.m() {
                    d.set(&self.yab_name(i, a, b), -1.0, 1.0);
                }
            }
        }
        d
    }

    /// The fibered chart whose fiber coordinates are `y^i_a` (for `JE → M`).
    pub fn jet_chart(&self) -> Arc<FiberedChart> {
        let mut fiber = self.fiber.clone();
        let mut bounds = self.fiber_bounds.clone();
        for i in 0..self.n() {
            for a in 0..self.m() {
                fiber.push(self.ya_name(i, a));
                bounds.push((-1.0, 1.0));
            }
        }
        Arc::new(FiberedChart { base: self.base.clone(), fiber, fiber_bounds: bounds })
    }

    fn check_symbols(&self, es: &[&Expr], allow_fiber: bool) -> Result<(), ConnectionError> {
        for v in free_vars_of(es.iter().copied()) {
            let ok = self.base.coords.contains(&v) || (allow_fiber && self.fiber.contains(&v));
            if !ok {
                return Err(ConnectionError::ForeignSymbol(v));
            }
        }
        Ok(())
    }
}

/// Field components `φ^i(x)`.
#[derive(Clone, Debug)]
pub struct Section {
    pub fc: Arc<FiberedChart>,
    pub comps: Vec<Expr>,
}

impl Section {
    pub fn new(fc: Arc<FiberedChart>, comps: Vec<Expr>) -> Result<Self, ConnectionError> {
        if comps.len() != fc.n() {
            return Err(ConnectionError::Dimension { expected: fc.n(), got: comps.len() });
        }
        fc.check_symbols(&comps.iter().collect::<Vec<_>>(), false)?;
        Ok(Section { fc, comps })
    }

    /// `φ^i_{,a}`.
    pub fn d(&self, i: usize, a: usize) -> Expr {
        self.fc.dx(&self.comps[i], a)
    }

    /// Substitution map realizing the pullback along `jφ` (and `j₂φ`).
    pub fn jet_map(&self, order: usize) -> HashMap<String, Expr> {
        let fc = &self.fc;
        let mut map = HashMap::new();
        for i in 0..fc.n() {
            map.insert(fc.fiber[i].clone(), self.comps[i].clone());
            for a in 0..fc.m() {
                let da = self.d(i, a);
                if order >= 2 {
                    for b in a..fc.m() {
                        map.insert(fc.yab_name(i, a, b), fc.dx(&da, b));
                    }
                }
                map.insert(fc.ya_name(i, a), da);
            }
        }
        map
    }

    /// `f ∘ jφ` (or `f ∘ j₂φ` when `order = 2`).
    pub fn pullback(&self, f: &Expr, order: usize) -> Expr {
        f.subst_many(&self.jet_map(order))
    }
}

/// General connection `κ^i_a(x, y)`, stored `[i][a]`.
#[derive(Clone, Debug)]
pub struct GeneralConnection {
    pub fc: Arc<FiberedChart>,
    pub k: Vec<Vec<Expr>>,
}

impl GeneralConnection {
    pub fn new(fc: Arc<FiberedChart>, k: Vec<Vec<Expr>>) -> Result<Self, ConnectionError> {
        let (n, m) = (fc.n(), fc.m());
        if k.len() != n || k.iter().any(|r| r.len() != m) {
            return Err(ConnectionError::Dimension { expected: n * m, got: k.iter().map(Vec::len).sum() });
        }
        fc.check_symbols(&k.iter().flatten().collect::<Vec<_>>(), true)?;
        Ok(GeneralConnection { fc, k })
    }

    /// The flat connection `κ = 0`.
    pub fn zero(fc: Arc<FiberedChart>) -> Self {
        let k = vec![vec![Expr::zero(); fc.m()]; fc.n()];
        GeneralConnection { fc, k }
    }

    /// `κ^i_a`.
    pub fn at(&self, i: usize, a: usize) -> &Expr {
        &self.k[i][a]
    }

    /// `ρ_{ab}{}^i = κ^i_{a,b} − κ^i_{b,a} + ∂_jκ^i_a κ^j_b − ∂_jκ^i_b κ^j_a`, indexed `[a][b][i]`.
    pub fn curvature(&self) -> Vec<Vec<Vec<Expr>>> {
        let fc = &self.fc;
        let (n, m) = (fc.n(), fc.m());
        let mut rho = vec![vec![vec![Expr::zero(); n]; m]; m];
        for a in 0..m {
            for b in 0..m {
                if a == b {
                    continue;
                }
                for i in 0..n {
                    let mut t = vec![fc.dx(&self.k[i][a], b), -fc.dx(&self.k[i][b], a)];
                    for j in 0..n {
                        t.push(fc.dy(&self.k[i][a], j) * &self.k[j][b]);
                        t.push(-(fc.dy(&self.k[i][b], j) * &self.k[j][a]));
                    }
                    rho[a][b][i] = Expr::sum(t);
                }
            }
        }
        rho
    }

    /// `∇_aφ^i = ∂_aφ^i − κ^i_a(x, φ(x))`, indexed `[a][i]`.
    pub fn covariant_derivative(&self, phi: &Section) -> Vec<Vec<Expr>> {
        let fc = &self.fc;
        let map: HashMap<String, Expr> =
            (0..fc.n()).map(|i| (fc.fiber[i].clone(), phi.comps[i].clone())).collect();
        (0..fc.m())
            .map(|a| (0..fc.n()).map(|i| phi.d(i, a) - self.k[i][a].subst_many(&map)).collect())
            .collect()
    }
}

/// `ρ^i_{ab}` of a general connection, indexed `[a][b][i]`.
pub fn curvature(k: &GeneralConnection) -> Vec<Vec<Vec<Expr>>> {
    k.curvature()
}

/// `∇_aφ^i`, indexed `[a][i]`.
pub fn section_covariant_derivative(k: &GeneralConnection, phi: &Section) -> Vec<Vec<Expr>> {
    k.covariant_derivative(phi)
}

/// `ρ_{ab}{}^i{}_j = ∂_bκ_a − ∂_aκ_b + κ_aκ_b − κ_bκ_a` for coefficients `κ[a][i][j]`,
/// indexed `[a][b][i][j]`.
pub fn linear_curvature(chart: &Chart, k: &[Matrix]) -> Vec<Vec<Matrix>> {
    let m = chart.dim();
    let n = k.first().map_or(0, Vec::len);
    let zero_block = || vec![vec![Expr::zero(); n]; n];
    let mut rho = vec![vec![zero_block(); m]; m];
    for a in 0..m {
        for b in (a + 1)..m {
            for i in 0..n {
                for j in 0..n {
                    let mut t = vec![chart.partial(&k[a][i][j], b), -chart.partial(&k[b][i][j], a)];
                    for h in 0..n {
                        t.push(&k[a][i][h] * &k[b][h][j]);
                        t.push(-(&k[b][i][h] * &k[a][h][j]));
                    }
                    let e = Expr::sum(t);
                    rho[b][a][i][j] = -&e;
                    rho[a][b][i][j] = e;
                }
            }
        }
    }
    rho
}

/// Linear connection `κ_a{}^i{}_j(x)`, stored `[a][i][j]`.
#[derive(Clone, Debug)]
pub struct LinearConnection {
    pub fc: Arc<FiberedChart>,
    pub k: Vec<Matrix>,
}

impl LinearConnection {
    pub fn new(fc: Arc<FiberedChart>, k: Vec<Matrix>) -> Result<Self, ConnectionError> {
        let (n, m) = (fc.n(), fc.m());
        if k.len() != m || k.iter().any(|b| b.len() != n || b.iter().any(|r| r.len() != n)) {
            let got = k.iter().flatten().map(Vec::len).sum();
            return Err(ConnectionError::Dimension { expected: m * n * n, got });
        }
        fc.check_symbols(&k.iter().flatten().flatten().collect::<Vec<_>>(), false)?;
        Ok(LinearConnection { fc, k })
    }

    pub fn zero(fc: Arc<FiberedChart>) -> Self {
        let k = vec![vec![vec![Expr::zero(); fc.n()]; fc.n()]; fc.m()];
        LinearConnection { fc, k }
    }

    /// `κ_a{}^i{}_j`.
    pub fn at(&self, a: usize, i: usize, j: usize) -> &Expr {
        &self.k[a][i][j]
    }

    /// `κ^i_a = κ_a{}^i{}_j y^j`.
    pub fn as_general(&self) -> GeneralConnection {
        let fc = &self.fc;
        let k = (0..fc.n())
            .map(|i| (0..fc.m()).map(|a| Expr::sum((0..fc.n()).map(|j| &self.k[a][i][j] * fc.y(j)))).collect())
            .collect();
        GeneralConnection { fc: fc.clone(), k }
    }

    /// `ρ_{ab}{}^i{}_j`, indexed `[a][b][i][j]`.
    pub fn curvature(&self) -> Vec<Vec<Matrix>> {
        linear_curvature(&self.fc.base, &self.k)
    }

    /// `∇_aφ^i = ∂_aφ^i − κ_a{}^i{}_jφ^j`, indexed `[a][i]`.
    pub fn covariant_derivative(&self, phi: &Section) -> Vec<Vec<Expr>> {
        let fc = &self.fc;
        (0..fc.m())
            .map(|a| {
                (0..fc.n())
                    .map(|i| phi.d(i, a) - Expr::sum((0..fc.n()).map(|j| &self.k[a][i][j] * &phi.comps[j])))
                    .collect()
            })
            .collect()
    }

    /// Fibered chart of the bundle of linear connections `C`, fiber coordinates
    /// `y^i_{aj}` ordered by `(a, i, j)`.
    pub fn bundle(&self) -> Arc<FiberedChart> {
        connection_bundle(&self.fc)
    }

    /// `κ` as a section of `C`, in the order of [`Self::bundle`].
    pub fn as_bundle_section(&self) -> Vec<Expr> {
        self.k.iter().flatten().flatten().cloned().collect()
    }
}

/// Name of the `C` coordinate `y^i_{aj}`.
pub fn bundle_coord_name(fc: &FiberedChart, i: usize, a: usize, j: usize) -> String {
    format!("{}_w{}_{}", fc.fiber[i], a, fc.fiber[j])
}

/// Bundle of linear connections of `fc`, fiber coordinates `y^i_{aj}` ordered by `(a, i, j)`.
pub fn connection_bundle(fc: &FiberedChart) -> Arc<FiberedChart> {
    let (n, m) = (fc.n(), fc.m());
    let mut names = Vec::with_capacity(m * n * n);
    for a in 0..m {
        for i in 0..n {
            for j in 0..n {
                names.push(bundle_coord_name(fc, i, a, j));
            }
        }
    }
    let bounds = vec![(-1.0, 1.0); names.len()];
    FiberedChart::from_owned(fc.base.clone(), names, bounds).expect("bundle coordinates are distinct")
}

/// Dual fiber name: appends `bar`, or strips it if already present.
pub fn dual_name(y: &str) -> String {
    match y.strip_suffix("bar") {
        Some(s) if !s.is_empty() => s.to_string(),
        _ => format!("{y}bar"),
    }
}

/// Dual connection on `E*`: `ǩ_a{}^j{}_i = −κ_a{}^i{}_j` (minus transposition).
pub fn dual_connection(k: &LinearConnection) -> LinearConnection {
    let fc = &k.fc;
    let names: Vec<String> = fc.fiber.iter().map(|y| dual_name(y)).collect();
    let dual_fc = FiberedChart::from_owned(fc.base.clone(), names, fc.fiber_bounds.clone())
        .expect("dual fiber names are distinct");
    let n = fc.n();
    let kd = k
        .k
        .iter()
        .map(|block| (0..n).map(|j| (0..n).map(|i| -&block[i][j]).collect()).collect())
        .collect();
    LinearConnection { fc: dual_fc, k: kd }
}
