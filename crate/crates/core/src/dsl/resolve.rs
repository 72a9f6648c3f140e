//! Name resolution: turns declarations into library objects.

use std::collections::HashMap;
use std::sync::Arc;

use super::syntax::{Decl, Entry, Field, MatrixLit, Name, Value};
use super::{run, DslError, Pos};
use crate::connections::{FiberedChart, GaugeField, GaugeStructure, LinearConnection, Section};
use crate::geometry::{Chart, Matrix, MetricField};
use crate::models::{DiracModel, GravityModel, KomarData, ScalarModel, YangMillsModel};
use crate::symexpr::{free_vars_of, Assignment, Evaluator, Expr};
use crate::variational::{JetLagrangian, VariationalError};

#[derive(Clone, Debug)]
pub enum Model {
    Scalar { model: ScalarModel, section: Section },
    Dirac { model: DiracModel, section: Section },
    YangMills { model: YangMillsModel, field: GaugeField },
    Gravity(GravityModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Scalar { .. } => "scalar",
            Model::Dirac { .. } => "dirac",
            Model::YangMills { .. } => "yangmills",
            Model::Gravity(_) => "gravity",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Object {
    Chart(Arc<Chart>),
    Metric(Arc<MetricField>),
    Connection(LinearConnection),
    Gauge(GaugeField),
    Section { chart: Arc<Chart>, comps: Vec<Expr> },
    Lagrangian(JetLagrangian),
    Model(Model),
    Komar(KomarData),
}

impl Object {
    pub fn kind(&self) -> &'static str {
        match self {
            Object::Chart(_) => "chart",
            Object::Metric(_) => "metric",
            Object::Connection(_) => "connection",
            Object::Gauge(_) => "gauge field",
            Object::Section { .. } => "section",
            Object::Lagrangian(_) => "Lagrangian",
            Object::Model(m) => m.kind(),
            Object::Komar(_) => "komar block",
        }
    }

    /// Chart the object lives on.
    pub fn chart(&self) -> &Arc<Chart> {
        match self {
            Object::Chart(c) | Object::Section { chart: c, .. } => c,
            Object::Metric(g) => &g.chart,
            Object::Connection(k) => &k.fc.base,
            Object::Gauge(k) => &k.chart,
            Object::Lagrangian(l) => &l.fc.base,
            Object::Model(Model::Scalar { model, .. }) => &model.g.chart,
            Object::Model(Model::Dirac { model, .. }) => &model.g.chart,
            Object::Model(Model::YangMills { model, .. }) => &model.g.chart,
            Object::Model(Model::Gravity(m)) => &m.g.chart,
            Object::Komar(k) => &k.g.chart,
        }
    }
}

/// A `check` declaration after resolution.
#[derive(Clone, Debug)]
pub struct CheckDecl {
    pub id: String,
    pub subject: Option<String>,
    pub with: Option<String>,
}

/// Resolved objects in declaration order.
#[derive(Clone, Debug, Default)]
pub struct Env {
    order: Vec<String>,
    objects: HashMap<String, Object>,
    pub checks: Vec<CheckDecl>,
}

fn invalid(pos: Pos, message: impl Into<String>) -> DslError {
    DslError::Invalid { pos, message: message.into() }
}

fn dimension(pos: Pos, message: impl Into<String>) -> DslError {
    DslError::Dimension { pos, message: message.into() }
}

/// Rejects free variables outside `allowed`, naming the first one.
fn closed(e: &Entry, allowed: &[String]) -> Result<Expr, DslError> {
    match free_vars_of([&e.expr]).into_iter().find(|v| !allowed.contains(v)) {
        Some(name) => Err(DslError::Unresolved { pos: e.pos, name }),
        None => Ok(e.expr.clone()),
    }
}

fn matrix_of(m: &MatrixLit, rows: usize, cols: usize, what: &str, allowed: &[String]) -> Result<Matrix, DslError> {
    if let Some((i, r)) = m.rows.iter().enumerate().find(|(_, r)| r.len() != m.rows[0].len()) {
        return Err(dimension(m.pos, format!("{what} row {} has {} entries, row 1 has {}", i + 1, r.len(), m.rows[0].len())));
    }
    if m.rows.len() != rows || m.rows.iter().any(|r| r.len() != cols) {
        let got_cols = m.rows.first().map_or(0, Vec::len);
        return Err(dimension(m.pos, format!("{what} must be {rows}x{cols}, got {}x{got_cols}", m.rows.len())));
    }
    m.rows.iter().map(|r| r.iter().map(|e| closed(e, allowed)).collect()).collect()
}

/// Entries of a single row or single column.
fn vector_of(m: &MatrixLit, len: Option<usize>, what: &str, allowed: &[String]) -> Result<Vec<Expr>, DslError> {
    let flat: Vec<&Entry> = if m.rows.len() == 1 {
        m.rows[0].iter().collect()
    } else if m.rows.iter().all(|r| r.len() == 1) {
        m.rows.iter().map(|r| &r[0]).collect()
    } else {
        return Err(dimension(m.pos, format!("{what} must be a row or a column")));
    };
    if let Some(n) = len {
        if flat.len() != n {
            return Err(dimension(m.pos, format!("{what} needs {n} components, got {}", flat.len())));
        }
    }
    flat.into_iter().map(|e| closed(e, allowed)).collect()
}

fn constant(e: &Entry) -> Result<f64, DslError> {
    let e2 = closed(e, &[])?;
    let v = Evaluator::new(&Assignment::new()).eval(&e2).map_err(|err| invalid(e.pos, err.to_string()))?;
    if v.im != 0.0 || !v.re.is_finite() {
        return Err(invalid(e.pos, "bound must be a finite real number"));
    }
    Ok(v.re)
}

fn texts(ns: &[Name]) -> Vec<&str> {
    ns.iter().map(|n| n.text.as_str()).collect()
}

impl Env {
    pub fn get(&self, name: &str) -> Option<&Object> {
        self.objects.get(name)
    }

    /// Objects in declaration order.
    pub fn objects(&self) -> impl Iterator<Item = (&str, &Object)> {
        self.order.iter().map(|n| (n.as_str(), &self.objects[n]))
    }

    fn lookup(&self, n: &Name) -> Result<&Object, DslError> {
        self.objects.get(&n.text).ok_or_else(|| DslError::Unresolved { pos: n.pos, name: n.text.clone() })
    }

    fn expect_kind<'a, T>(
        &'a self,
        n: &Name,
        want: &str,
        pick: impl Fn(&'a Object) -> Option<T>,
    ) -> Result<T, DslError> {
        let obj = self.lookup(n)?;
        pick(obj).ok_or_else(|| invalid(n.pos, format!("`{}` is a {}, expected a {want}", n.text, obj.kind())))
    }

    fn chart(&self, n: &Name) -> Result<Arc<Chart>, DslError> {
        self.expect_kind(n, "chart", |o| match o {
            Object::Chart(c) => Some(c.clone()),
            _ => None,
        })
    }

    fn metric(&self, n: &Name) -> Result<Arc<MetricField>, DslError> {
        self.expect_kind(n, "metric", |o| match o {
            Object::Metric(g) => Some(g.clone()),
            _ => None,
        })
    }

    fn section(&self, n: &Name, chart: &Chart) -> Result<Vec<Expr>, DslError> {
        let (c, comps) = self.expect_kind(n, "section", |o| match o {
            Object::Section { chart, comps } => Some((chart.clone(), comps.clone())),
            _ => None,
        })?;
        if c.name != chart.name {
            return Err(invalid(n.pos, format!("section `{}` is on chart `{}`, expected `{}`", n.text, c.name, chart.name)));
        }
        Ok(comps)
    }

    fn insert(&mut self, name: &Name, obj: Object) -> Result<(), DslError> {
        if self.objects.contains_key(&name.text) {
            return Err(invalid(name.pos, format!("`{}` is already declared", name.text)));
        }
        self.order.push(name.text.clone());
        self.objects.insert(name.text.clone(), obj);
        Ok(())
    }

    pub fn build(decls: &[Decl]) -> Result<Env, DslError> {
        let mut env = Env::default();
        for d in decls {
            env.declare(d)?;
        }
        Ok(env)
    }

    fn declare(&mut self, d: &Decl) -> Result<(), DslError> {
        match d {
            Decl::Chart { name, dim, coords, bounds } => {
                if coords.len() != *dim {
                    return Err(dimension(name.pos, format!("chart `{}` has dim {dim} but {} coordinates", name.text, coords.len())));
                }
                let bounds = match bounds {
                    None => vec![(-0.5, 0.5); *dim],
                    Some(b) => {
                        let rows = matrix_of(b, *dim, 2, "bounds", &[])?;
                        let mut out = Vec::new();
                        for (r, row) in b.rows.iter().enumerate() {
                            let (lo, hi) = (constant(&row[0])?, constant(&row[1])?);
                            if lo >= hi {
                                return Err(invalid(row[0].pos, format!("empty range for `{}`", coords[r].text)));
                            }
                            out.push((lo, hi));
                        }
                        debug_assert_eq!(rows.len(), out.len());
                        out
                    }
                };
                let ch = Chart::new(&name.text, &texts(coords), &bounds).map_err(|e| invalid(name.pos, e.to_string()))?;
                self.insert(name, Object::Chart(ch))
            }
            Decl::Metric { name, chart, matrix } => {
                let ch = self.chart(chart)?;
                let m = ch.dim();
                let g = matrix_of(matrix, m, m, "metric", &ch.coords)?;
                let g = MetricField::new(ch, g).map_err(|e| invalid(matrix.pos, e.to_string()))?;
                self.insert(name, Object::Metric(g))
            }
            Decl::Connection { name, chart, fiber, blocks } => {
                let ch = self.chart(chart)?;
                let (m, n) = (ch.dim(), fiber.len());
                if blocks.len() != m {
                    return Err(dimension(name.pos, format!("connection needs one {n}x{n} block per coordinate, got {}", blocks.len())));
                }
                let k = blocks.iter().map(|b| matrix_of(b, n, n, "connection block", &ch.coords)).collect::<Result<_, _>>()?;
                let fc = FiberedChart::new(ch, &texts(fiber), &vec![(-1.0, 1.0); n]).map_err(|e| invalid(fiber[0].pos, e.to_string()))?;
                let k = LinearConnection::new(fc, k).map_err(|e| invalid(name.pos, e.to_string()))?;
                self.insert(name, Object::Connection(k))
            }
            Decl::Gauge { name, group, chart, matrix } => {
                let ch = self.chart(chart)?;
                let gs = match group.text.as_str() {
                    "u1" => GaugeStructure::u1(),
                    "su2" => GaugeStructure::su2(),
                    other => return Err(invalid(group.pos, format!("unknown structure group `{other}`, expected u1 or su2"))),
                };
                let k = matrix_of(matrix, ch.dim(), gs.dim(), "gauge potential", &ch.coords)?;
                let k = GaugeField::new(Arc::new(gs), ch, &name.text, k).map_err(|e| invalid(name.pos, e.to_string()))?;
                self.insert(name, Object::Gauge(k))
            }
            Decl::Section { name, chart, comps } => {
                let ch = self.chart(chart)?;
                let comps = vector_of(comps, None, "section", &ch.coords)?;
                self.insert(name, Object::Section { chart: ch, comps })
            }
            Decl::Lagrangian { name, chart, fiber, metric, density } => {
                let ch = self.chart(chart)?;
                let fc = FiberedChart::new(ch.clone(), &texts(fiber), &vec![(-1.0, 1.0); fiber.len()])
                    .map_err(|e| invalid(fiber[0].pos, e.to_string()))?;
                let lag = match metric {
                    None => JetLagrangian::new(fc, density.expr.clone()),
                    Some(gn) => {
                        let g = self.metric(gn)?;
                        if g.chart.name != ch.name {
                            return Err(invalid(gn.pos, format!("metric `{}` is not on chart `{}`", gn.text, ch.name)));
                        }
                        JetLagrangian::with_metric(fc, density.expr.clone(), g)
                    }
                };
                let lag = lag.map_err(|e| match e {
                    VariationalError::ForeignSymbol(v) => DslError::Unresolved { pos: density.pos, name: v },
                    other => invalid(density.pos, other.to_string()),
                })?;
                self.insert(name, Object::Lagrangian(lag))
            }
            Decl::Model { name, kind, fields } => {
                let model = self.model(name, kind, fields)?;
                self.insert(name, Object::Model(model))
            }
            Decl::Komar { name, fields } => {
                let f = Fields::new(fields, &["metric", "vector"])?;
                let g = self.metric(f.ident("metric", name.pos)?)?;
                let x = self.section(f.ident("vector", name.pos)?, &g.chart)?;
                if x.len() != g.dim() {
                    return Err(dimension(name.pos, format!("vector needs {} components, got {}", g.dim(), x.len())));
                }
                let data = KomarData::new(g, x).map_err(|e| invalid(name.pos, e.to_string()))?;
                self.insert(name, Object::Komar(data))
            }
            Decl::Check { id, subject, with } => {
                if !run::check_kinds().contains(&id.text.as_str()) {
                    return Err(invalid(id.pos, format!("unknown check `{}`", id.text)));
                }
                if let Some(s) = subject {
                    let obj = self.lookup(s)?;
                    if !run::applies(&id.text, obj) {
                        return Err(invalid(s.pos, format!("check `{}` does not apply to the {} `{}`", id.text, obj.kind(), s.text)));
                    }
                    if let Some(w) = with {
                        self.section(w, obj.chart())?;
                    } else if run::needs_section(&id.text, obj) {
                        return Err(invalid(s.pos, format!("check `{}` on `{}` needs `with <section>`", id.text, s.text)));
                    }
                }
                self.checks.push(CheckDecl {
                    id: id.text.clone(),
                    subject: subject.as_ref().map(|s| s.text.clone()),
                    with: with.as_ref().map(|w| w.text.clone()),
                });
                Ok(())
            }
        }
    }

    fn model(&self, name: &Name, kind: &Name, fields: &[Field]) -> Result<Model, DslError> {
        let err = |e: crate::models::ModelError| invalid(name.pos, e.to_string());
        match kind.text.as_str() {
            "scalar" => {
                let f = Fields::new(fields, &["metric", "connection", "mass", "field", "conj"])?;
                let g = self.metric(f.ident("metric", name.pos)?)?;
                let field = f.ident("field", name.pos)?;
                let phi = self.section(field, &g.chart)?;
                let phibar = match f.opt_ident("conj")? {
                    Some(c) => self.section(c, &g.chart)?,
                    None => phi.clone(),
                };
                if phibar.len() != phi.len() {
                    return Err(dimension(field.pos, "field and conjugate differ in length"));
                }
                let kappa = match f.opt_ident("connection")? {
                    Some(c) => self.expect_kind(c, "connection", |o| match o {
                        Object::Connection(k) => Some(k.clone()),
                        _ => None,
                    })?,
                    None => {
                        let names: Vec<String> = (0..phi.len()).map(|i| format!("{}{i}", field.text)).collect();
                        let names: Vec<&str> = names.iter().map(String::as_str).collect();
                        let fc = FiberedChart::new(g.chart.clone(), &names, &vec![(-1.0, 1.0); names.len()])
                            .map_err(|e| invalid(field.pos, e.to_string()))?;
                        LinearConnection::zero(fc)
                    }
                };
                if kappa.fc.n() != phi.len() {
                    return Err(dimension(field.pos, format!("connection acts on {} components, field has {}", kappa.fc.n(), phi.len())));
                }
                let model = ScalarModel::new(g, kappa, f.constant("mass", Expr::one())?).map_err(err)?;
                let section = model.section(phi, phibar).map_err(err)?;
                Ok(Model::Scalar { model, section })
            }
            "dirac" => {
                let f = Fields::new(fields, &["chart", "coframe", "potential", "mass", "field", "conj"])?;
                let ch = self.chart(f.ident("chart", name.pos)?)?;
                let m = ch.dim();
                let coframe = match f.get("coframe") {
                    Some(Value::Matrix(mat)) => matrix_of(mat, m, m, "coframe", &ch.coords)?,
                    Some(_) => return Err(invalid(f.key("coframe").pos, "coframe must be a matrix")),
                    None => (0..m).map(|l| (0..m).map(|a| Expr::int(i64::from(l == a))).collect()).collect(),
                };
                let a_pot = match f.opt_ident("potential")? {
                    Some(p) => {
                        let v = self.section(p, &ch)?;
                        if v.len() != m {
                            return Err(dimension(p.pos, format!("potential needs {m} components, got {}", v.len())));
                        }
                        v
                    }
                    None => vec![Expr::zero(); m],
                };
                let model = DiracModel::new(ch.clone(), coframe, a_pot, f.constant("mass", Expr::one())?).map_err(err)?;
                let field = f.ident("field", name.pos)?;
                let psi = self.section(field, &ch)?;
                if psi.len() != model.spinor_dim() {
                    return Err(dimension(field.pos, format!("spinor needs {} components, got {}", model.spinor_dim(), psi.len())));
                }
                let psibar = match f.opt_ident("conj")? {
                    Some(c) => self.section(c, &ch)?,
                    None => psi.clone(),
                };
                if psibar.len() != psi.len() {
                    return Err(dimension(field.pos, "field and conjugate differ in length"));
                }
                let section = model.section(psi, psibar).map_err(err)?;
                Ok(Model::Dirac { model, section })
            }
            "yangmills" => {
                let f = Fields::new(fields, &["metric", "gauge"])?;
                let g = self.metric(f.ident("metric", name.pos)?)?;
                let gn = f.ident("gauge", name.pos)?;
                let k = self.expect_kind(gn, "gauge field", |o| match o {
                    Object::Gauge(k) => Some(k.clone()),
                    _ => None,
                })?;
                if k.chart.name != g.chart.name {
                    return Err(invalid(gn.pos, format!("gauge field `{}` is not on chart `{}`", gn.text, g.chart.name)));
                }
                let model = YangMillsModel::new(g, k.gs.clone(), &k.prefix).map_err(err)?;
                let field = model.field(k.k.clone()).map_err(err)?;
                Ok(Model::YangMills { model, field })
            }
            "gravity" => {
                let f = Fields::new(fields, &["metric"])?;
                let g = self.metric(f.ident("metric", name.pos)?)?;
                Ok(Model::Gravity(GravityModel::levi_civita(g).map_err(err)?))
            }
            other => Err(invalid(kind.pos, format!("unknown model kind `{other}`, expected scalar, dirac, yangmills or gravity"))),
        }
    }
}

/// Body of a model or komar block, validated against the allowed keys.
struct Fields<'a> {
    fields: &'a [Field],
}

impl<'a> Fields<'a> {
    fn new(fields: &'a [Field], allowed: &[&str]) -> Result<Self, DslError> {
        for (k, f) in fields.iter().enumerate() {
            if !allowed.contains(&f.key.text.as_str()) {
                return Err(invalid(f.key.pos, format!("unknown field `{}`, expected one of {}", f.key.text, allowed.join(", "))));
            }
            if fields[..k].iter().any(|g| g.key.text == f.key.text) {
                return Err(invalid(f.key.pos, format!("field `{}` given twice", f.key.text)));
            }
        }
        Ok(Fields { fields })
    }

    fn find(&self, key: &str) -> Option<&'a Field> {
        self.fields.iter().find(|f| f.key.text == key)
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.find(key).map(|f| &f.value)
    }

    fn key(&self, key: &str) -> &'a Name {
        &self.find(key).expect("present").key
    }

    fn opt_ident(&self, key: &str) -> Result<Option<&'a Name>, DslError> {
        match self.find(key) {
            None => Ok(None),
            Some(Field { value: Value::Ident(n), .. }) => Ok(Some(n)),
            Some(f) => Err(invalid(f.key.pos, format!("`{key}` must be a name"))),
        }
    }

    fn ident(&self, key: &str, decl: Pos) -> Result<&'a Name, DslError> {
        self.opt_ident(key)?.ok_or_else(|| invalid(decl, format!("missing field `{key}`")))
    }

    fn constant(&self, key: &str, default: Expr) -> Result<Expr, DslError> {
        match self.find(key) {
            None => Ok(default),
            Some(Field { value: Value::Expr(e), .. }) => closed(e, &[]),
            Some(Field { value: Value::Ident(n), .. }) => Err(DslError::Unresolved { pos: n.pos, name: n.text.clone() }),
            Some(f) => Err(invalid(f.key.pos, format!("`{key}` must be a number"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn undeclared_chart_is_named() {
        let e = parse("metric g on N { [1] }").unwrap_err();
        assert_eq!(e, DslError::Unresolved { pos: Pos { line: 1, col: 13 }, name: "N".into() });
    }

    #[test]
    fn metric_shape_must_match_chart() {
        let e = parse("chart M dim 2 coords x y\nmetric g on M { [1,0,0;0,1,0] }").unwrap_err();
        assert!(matches!(e, DslError::Dimension { pos: Pos { line: 2, .. }, .. }), "{e}");
    }

    #[test]
    fn foreign_symbol_in_component_is_unresolved() {
        let e = parse("chart M dim 1 coords x\nmetric g on M { [1 + z] }").unwrap_err();
        assert!(matches!(e, DslError::Unresolved { ref name, .. } if name == "z"), "{e}");
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let e = parse("chart M dim 1 coords x\nchart M dim 1 coords y").unwrap_err();
        assert!(matches!(e, DslError::Invalid { pos: Pos { line: 2, col: 7 }, .. }), "{e}");
    }

    #[test]
    fn scalar_model_resolves() {
        let doc = parse(
            "chart M dim 2 coords t x\nmetric g on M { [-1,0;0,1] }\nsection phi on M { [sin(t)] }\nmodel S scalar { metric g; field phi; mass 2 }",
        )
        .unwrap();
        assert!(matches!(doc.env.get("S"), Some(Object::Model(Model::Scalar { .. }))));
    }
}
