//! Total theories: scalar matter minimally coupled to a Yang–Mills field, and
//! matter plus gravity, where the field equations are read off from the
//! divergence of the total Noether current.

use std::sync::Arc;

use super::gravity::{gravity_lagrangian, GravityModel};
use super::scalar::{scalar_lagrangian, ScalarModel};
use super::yangmills::{yang_mills_lagrangian, YangMillsModel};
use super::ModelError;
use crate::connections::{overconnection_gauge, FiberedChart, GaugeField, GaugeStructure, GeneralConnection, Section};
use crate::geometry::{einstein, energy_divergence, Matrix, MetricField};
use crate::symexpr::Expr;
use crate::variational::{
    canonical_energy_tensor, current_pullback, euler_lagrange, gu, metric_stress_tensor, sqrtg, JetLagrangian,
    LiftField,
};

/// Charged scalar in the defining representation of a gauge group, plus the gauge field.
#[derive(Clone, Debug)]
pub struct ScalarGaugeModel {
    pub ym: YangMillsModel,
    pub mass: Expr,
    /// `φ^i`, then `φ̄_i`, then the gauge coordinates `y^I_a`.
    pub fc: Arc<FiberedChart>,
}

impl ScalarGaugeModel {
    pub fn new(g: Arc<MetricField>, gs: Arc<GaugeStructure>, mass: Expr) -> Result<Self, ModelError> {
        let ym = YangMillsModel::new(g, gs, "A")?;
        let n = ym.gs.n;
        let mut names: Vec<String> = (0..n).map(|i| format!("u{i}")).collect();
        names.extend((0..n).map(|i| format!("u{i}bar")));
        names.extend(ym.bundle.fiber.iter().cloned());
        let bounds = vec![(-1.0, 1.0); names.len()];
        let fc = FiberedChart::from_owned(ym.g.chart.clone(), names, bounds)?;
        Ok(ScalarGaugeModel { ym, mass, fc })
    }

    pub fn n(&self) -> usize {
        self.ym.gs.n
    }

    /// Offset of the gauge coordinates in [`Self::fc`].
    pub fn gauge_offset(&self) -> usize {
        2 * self.n()
    }

    /// `κ_a{}^i{}_j = y^I_a(l_I)^i{}_j` in the gauge fiber coordinates.
    fn gauge_matrix(&self, a: usize) -> Matrix {
        let d = self.ym.gs.dim();
        let ys: Vec<Expr> = (0..d).map(|i| self.fc.y(self.gauge_offset() + self.ym.index(a, i))).collect();
        self.ym.gs.expand(&ys)
    }

    /// `(∇_aφ^i, ∇_aφ̄_i)` in jet symbols, each `[a][i]`.
    fn matter_covariant(&self) -> (Matrix, Matrix) {
        let (n, m) = (self.n(), self.fc.m());
        let fc = &self.fc;
        let mut dp = Vec::new();
        let mut db = Vec::new();
        for a in 0..m {
            let k = self.gauge_matrix(a);
            dp.push((0..n).map(|i| fc.ya(i, a) - Expr::sum((0..n).map(|j| &k[i][j] * fc.y(j)))).collect());
            db.push((0..n).map(|i| fc.ya(n + i, a) + Expr::sum((0..n).map(|j| fc.y(n + j) * &k[j][i]))).collect());
        }
        (dp, db)
    }

    /// `ℓ_matter + ℓ_gauge`, the matter part with `κ` replaced by the gauge coordinates.
    pub fn lagrangian(&self) -> Result<JetLagrangian, ModelError> {
        let (n, m) = (self.n(), self.fc.m());
        let fc = &self.fc;
        let (dp, db) = self.matter_covariant();
        let mut kin = Vec::new();
        for a in 0..m {
            for b in 0..m {
                for i in 0..n {
                    kin.push(gu(a, b) * &db[a][i] * &dp[b][i]);
                }
            }
        }
        let pot = Expr::sum((0..n).map(|i| fc.y(n + i) * fc.y(i)));
        let matter = Expr::rational(1, 2) * (Expr::sum(kin) - self.mass.powi(2) * pot) * sqrtg();
        let gauge = yang_mills_lagrangian(&self.ym)?.density;
        Ok(JetLagrangian::with_metric(fc.clone(), matter + gauge, self.ym.g.clone())?)
    }

    /// Matter part `κ_a(y)φ`, `−φ̄κ_a(y)`, gauge part `κ↑` built from `k`.
    pub fn connection(&self, k: &GaugeField) -> Result<GeneralConnection, ModelError> {
        let (n, m) = (self.n(), self.fc.m());
        let fc = &self.fc;
        let mut rows = vec![vec![Expr::zero(); m]; 2 * n];
        for a in 0..m {
            let km = self.gauge_matrix(a);
            for i in 0..n {
                rows[i][a] = Expr::sum((0..n).map(|j| &km[i][j] * fc.y(j)));
                rows[n + i][a] = -Expr::sum((0..n).map(|j| fc.y(n + j) * &km[j][i]));
            }
        }
        let over = overconnection_gauge(k, &self.ym.gamma)?;
        rows.extend(over.conn.k);
        Ok(GeneralConnection::new(fc.clone(), rows)?)
    }

    pub fn section(&self, phi: Vec<Expr>, phibar: Vec<Expr>, k: &GaugeField) -> Result<Section, ModelError> {
        let mut comps = phi;
        comps.extend(phibar);
        comps.extend(k.as_bundle_section());
        Ok(Section::new(self.fc.clone(), comps)?)
    }
}

/// Ingredients of the total conservation law along one field configuration.
#[derive(Clone, Debug)]
pub struct TotalConservation {
    /// `∇_a(𝒰_matter + 𝒰_gauge)^a_b`, a covector density.
    pub divergence: Vec<Expr>,
    /// Total energy tensor `𝒰^a_b`.
    pub energy: Matrix,
    /// Euler–Lagrange expressions along the fields, in the order of the chart's fiber.
    pub el: Vec<Expr>,
    pub section: Section,
}

pub fn total_conservation(
    model: &ScalarGaugeModel,
    phi: Vec<Expr>,
    phibar: Vec<Expr>,
    k: &GaugeField,
) -> Result<TotalConservation, ModelError> {
    let lag = model.lagrangian()?;
    let conn = model.connection(k)?;
    let section = model.section(phi, phibar, k)?;
    let energy = canonical_energy_tensor(&lag, &conn)?.pullback(&section);
    let divergence = energy_divergence(&energy, &model.ym.gamma);
    let el = euler_lagrange(&lag).iter().map(|e| section.pullback(e, 2)).collect();
    Ok(TotalConservation { divergence, energy, el, section })
}

/// Outcome of reading the Einstein equations off the total current.
#[derive(Clone, Debug)]
pub struct EinsteinReport {
    /// `∂_a(J_grav + J_matter)^a[X] − X^b·(matter residual)_b`, one per probe field `X`.
    pub current_defects: Vec<Expr>,
    /// `(G^a_b + T^a_b/√|g|)√|g|` with `T^a_b = g^{ac}T_{cb}`.
    pub einstein_residual: Matrix,
}

/// Gravity plus scalar matter on the metric of `matter`. `residual` supplies the
/// Euler–Lagrange combination that completes `∇·𝒰_matter` off shell.
pub fn einstein_from_currents(
    matter: &ScalarModel,
    sec: &Section,
    probes: &[Vec<Expr>],
    residual: &dyn Fn(&ScalarModel, &Section) -> Vec<Expr>,
) -> Result<EinsteinReport, ModelError> {
    let g = &matter.g;
    let m = g.dim();
    let ch = &g.chart;
    let grav = GravityModel::levi_civita(g.clone())?;
    let lg = gravity_lagrangian(&grav)?;
    let over = grav.overconnection();
    let lm = scalar_lagrangian(matter)?;
    let km = matter.connection();
    let res = residual(matter, sec);
    let gsec = grav.section();
    let mut current_defects = Vec::new();
    for x in probes {
        let jg = current_pullback(&LiftField::horizontal(x, &over.conn), &lg, &gsec);
        let jm = current_pullback(&LiftField::horizontal(x, &km), &lm, sec);
        let div = Expr::sum((0..m).map(|a| ch.partial(&(&jg[a] + &jm[a]), a)));
        let corr = Expr::sum((0..m).map(|b| &x[b] * &res[b]));
        current_defects.push(div - corr);
    }
    let gt = einstein(g, &matter.gamma);
    let t = metric_stress_tensor(&lm)?;
    let sg = g.sqrt_abs_det();
    let einstein_residual = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| {
                    let tm = Expr::sum((0..m).map(|c| g.upper(a, c) * sec.pullback(&t[c][b], 1)));
                    gt.get(&[a, b]) * sg + tm
                })
                .collect()
        })
        .collect();
    Ok(EinsteinReport { current_defects, einstein_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::{FiberedChart, LinearConnection};
    use crate::geometry::Chart;
    use crate::symexpr::{compare_arrays, parse, NumericOptions};

    fn e(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn minkowski3() -> Arc<MetricField> {
        let ch = Chart::unit("M", &["t", "x", "y"]);
        MetricField::new(
            ch,
            vec![vec![e("-1"), e("0"), e("0")], vec![e("0"), e("1"), e("0")], vec![e("0"), e("0"), e("1")]],
        )
        .unwrap()
    }

    #[test]
    fn constant_maxwell_field_is_conserved() {
        let model = ScalarGaugeModel::new(minkowski3(), Arc::new(GaugeStructure::u1()), Expr::one()).unwrap();
        let k = model.ym.field(vec![vec![e("2*y")], vec![e("-t")], vec![e("x/3")]]).unwrap();
        let tc = total_conservation(&model, vec![Expr::zero()], vec![Expr::zero()], &k).unwrap();
        assert!(tc.divergence.iter().all(Expr::is_zero));
    }

    #[test]
    fn trivial_configuration_has_no_energy() {
        let model = ScalarGaugeModel::new(minkowski3(), Arc::new(GaugeStructure::su2()), Expr::zero()).unwrap();
        let k = model.ym.field(vec![vec![Expr::zero(); 3]; 3]).unwrap();
        let tc = total_conservation(&model, vec![e("1"), e("2")], vec![e("3"), e("-1")], &k).unwrap();
        assert!(tc.energy.iter().flatten().all(Expr::is_zero));
    }

    fn schwarzschild_scalar() -> (ScalarModel, Section) {
        let ch = Chart::new("S", &["t", "r", "th", "ph"], &[(0.0, 1.0), (3.0, 10.0), (0.5, 2.5), (0.0, 6.0)]).unwrap();
        let f = e("1 - 2/r");
        let mut g = vec![vec![Expr::zero(); 4]; 4];
        g[0][0] = -f.clone();
        g[1][1] = Expr::one().div(&f);
        g[2][2] = e("r^2");
        g[3][3] = e("r^2*sin(th)^2");
        let g = MetricField::new(ch.clone(), g).unwrap();
        let k = LinearConnection::zero(FiberedChart::unit(ch, &["u"]));
        let model = ScalarModel::new(g, k, Expr::one()).unwrap();
        let sec = model.section(vec![Expr::zero()], vec![Expr::zero()]).unwrap();
        (model, sec)
    }

    #[test]
    fn vacuum_satisfies_einstein_through_currents() {
        let (model, sec) = schwarzschild_scalar();
        let probes = vec![vec![e("r"), e("t*th"), e("1"), e("r*ph")], vec![e("sin(th)"), e("1"), e("r*t"), e("0")]];
        let none = |_: &ScalarModel, _: &Section| vec![Expr::zero(); 4];
        let rep = einstein_from_currents(&model, &sec, &probes, &none).unwrap();
        let zeros = vec![Expr::zero(); rep.current_defects.len()];
        let o = NumericOptions::default();
        let r = compare_arrays(&rep.current_defects, &zeros, &model.g.chart.domain(), &o).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
