//! Dirac field on a chart with a given tetrad. `ψ` and `ψ̄` are independent
//! fields; the spacetime connection is the Levi-Civita one.

use std::sync::Arc;

use num::BigRational;

use super::{delta, stack_connections, ModelError};
use crate::connections::{CMatrix, FiberedChart, GeneralConnection, Section};
use crate::geometry::{inverse, levi_civita, AffineConnectionField, Chart, Matrix, MetricField};
use crate::symexpr::{Const, Expr};
use crate::variational::{canonical_energy_tensor, gu, sqrtg, EnergyTensor, JetLagrangian};

/// Frame metric `η` (signature `+ − ⋯ −`) and lower-index gamma matrices `γ_λ`
/// with `γ_λγ_μ + γ_μγ_λ = 2η_{λμ}`, in the Dirac representation for dimension 4
/// and `γ⁰ = σ₁`, `γ¹ = iσ₂` for dimension 2.
pub fn gamma_matrices(dim: usize) -> Result<(Vec<i64>, Vec<CMatrix>), ModelError> {
    let c = Const::int;
    let i = Const::imag_unit;
    let upper: Vec<CMatrix> = match dim {
        2 => vec![vec![vec![c(0), c(1)], vec![c(1), c(0)]], vec![vec![c(0), c(1)], vec![c(-1), c(0)]]],
        4 => {
            let sigma: [[[Const; 2]; 2]; 3] = [
                [[c(0), c(1)], [c(1), c(0)]],
                [[c(0), i().neg()], [i(), c(0)]],
                [[c(1), c(0)], [c(0), c(-1)]],
            ];
            let mut gs = vec![(0..4)
                .map(|r| (0..4).map(|s| if r == s { c(if r < 2 { 1 } else { -1 }) } else { c(0) }).collect())
                .collect()];
            for s in &sigma {
                let mut m = vec![vec![c(0); 4]; 4];
                for r in 0..2 {
                    for q in 0..2 {
                        m[r][q + 2] = s[r][q].clone();
                        m[r + 2][q] = s[r][q].neg();
                    }
                }
                gs.push(m);
            }
            gs
        }
        _ => return Err(ModelError::Unsupported("dirac", "dimension 2 or 4".into())),
    };
    let eta: Vec<i64> = (0..dim).map(|l| if l == 0 { 1 } else { -1 }).collect();
    let lower = upper
        .into_iter()
        .enumerate()
        .map(|(l, m)| m.into_iter().map(|r| r.into_iter().map(|x| x.mul(&c(eta[l]))).collect()).collect())
        .collect();
    Ok((eta, lower))
}

fn cmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.len();
    (0..n)
        .map(|r| (0..n).map(|s| (0..n).fold(Const::zero(), |acc, k| acc.add(&a[r][k].mul(&b[k][s])))).collect())
        .collect()
}

fn clifford_holds(eta: &[i64], gammas: &[CMatrix]) -> bool {
    let n = gammas[0].len();
    gammas.iter().enumerate().all(|(l, gl)| {
        gammas.iter().enumerate().all(|(m, gm)| {
            let (p, q) = (cmul(gl, gm), cmul(gm, gl));
            (0..n).all(|r| {
                (0..n).all(|s| {
                    let want = if r == s && l == m { Const::int(2 * eta[l]) } else { Const::zero() };
                    p[r][s].add(&q[r][s]).sub(&want).is_zero()
                })
            })
        })
    })
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n).map(|r| (0..n).map(|s| Expr::sum((0..n).map(|k| &a[r][k] * &b[k][s]))).collect()).collect()
}

#[derive(Clone, Debug)]
pub struct DiracModel {
    pub eta: Vec<i64>,
    /// `θ^λ_a`, indexed `[λ][a]`.
    pub coframe: Matrix,
    /// `θ_μ{}^c`, indexed `[c][μ]`.
    pub frame: Matrix,
    pub g: Arc<MetricField>,
    pub gamma: AffineConnectionField,
    /// `γ_λ`.
    pub gammas: Vec<CMatrix>,
    pub a_pot: Vec<Expr>,
    pub mass: Expr,
    /// Spinor chart: `ψ^α` followed by `ψ̄_α`.
    pub fc: Arc<FiberedChart>,
}

impl DiracModel {
    pub fn new(chart: Arc<Chart>, coframe: Matrix, a_pot: Vec<Expr>, mass: Expr) -> Result<Self, ModelError> {
        let m = chart.dim();
        let (eta, gammas) = gamma_matrices(m)?;
        if !clifford_holds(&eta, &gammas) {
            return Err(ModelError::Unsupported("dirac", "gamma matrices obeying the Clifford relation".into()));
        }
        if coframe.len() != m || coframe.iter().any(|r| r.len() != m) || a_pot.len() != m {
            return Err(ModelError::Unsupported("dirac", format!("a {m}x{m} tetrad and {m} potential components")));
        }
        let mut gmat: Matrix = vec![vec![Expr::zero(); m]; m];
        for a in 0..m {
            for b in a..m {
                let v = Expr::sum((0..m).map(|l| Expr::int(eta[l]) * &coframe[l][a] * &coframe[l][b]));
                gmat[b][a] = v.clone();
                gmat[a][b] = v;
            }
        }
        let g = MetricField::new(chart.clone(), gmat)?;
        let frame = inverse(&coframe);
        let n = gammas[0].len();
        let mut names: Vec<String> = (0..n).map(|a| format!("s{a}")).collect();
        names.extend((0..n).map(|a| format!("s{a}bar")));
        let fc = FiberedChart::from_owned(chart, names, vec![(-1.0, 1.0); 2 * n])?;
        Ok(DiracModel { gamma: levi_civita(&g), eta, coframe, frame, g, gammas, a_pot, mass, fc })
    }

    /// Identity tetrad on `chart`.
    pub fn flat(chart: Arc<Chart>, a_pot: Vec<Expr>, mass: Expr) -> Result<Self, ModelError> {
        let m = chart.dim();
        let id = (0..m).map(|l| (0..m).map(|a| delta(l, a)).collect()).collect();
        Self::new(chart, id, a_pot, mass)
    }

    pub fn spinor_dim(&self) -> usize {
        self.gammas[0].len()
    }

    /// `γ_a = θ^λ_aγ_λ`.
    pub fn gamma_down(&self) -> Vec<Matrix> {
        let m = self.g.dim();
        let n = self.spinor_dim();
        (0..m)
            .map(|a| {
                (0..n)
                    .map(|r| {
                        (0..n)
                            .map(|s| {
                                Expr::sum((0..m).filter(|&l| !self.gammas[l][r][s].is_zero()).map(|l| {
                                    Expr::constant(self.gammas[l][r][s].clone()) * &self.coframe[l][a]
                                }))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// `γ^a = g^{ab}γ_b`.
    pub fn gamma_up(&self) -> Vec<Matrix> {
        let m = self.g.dim();
        let n = self.spinor_dim();
        let down = self.gamma_down();
        (0..m)
            .map(|a| {
                (0..n)
                    .map(|r| (0..n).map(|s| Expr::sum((0..m).map(|b| self.g.upper(a, b) * &down[b][r][s]))).collect())
                    .collect()
            })
            .collect()
    }

    /// Frame components `Γ̃_a{}^λ{}_μ = θ^λ_c(Γ_a{}^c{}_dθ_μ{}^d − ∂_aθ_μ{}^c)`, indexed `[a][λ][μ]`.
    pub fn frame_connection(&self) -> Vec<Matrix> {
        let m = self.g.dim();
        let ch = &self.g.chart;
        (0..m)
            .map(|a| {
                (0..m)
                    .map(|l| {
                        (0..m)
                            .map(|mu| {
                                Expr::sum((0..m).map(|c| {
                                    let inner = Expr::sum((0..m).map(|d| self.gamma.at(a, c, d) * &self.frame[d][mu]))
                                        - ch.partial(&self.frame[c][mu], a);
                                    &self.coframe[l][c] * inner
                                }))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// `Γ̌_a = iA_a + ¼Γ_a{}^{λμ}γ_λγ_μ`, with `Γ_a{}^{λμ} = Γ̃_a{}^λ{}_νη^{νμ}`.
    pub fn spinor_connection(&self) -> Vec<Matrix> {
        let m = self.g.dim();
        let n = self.spinor_dim();
        let gt = self.frame_connection();
        let quarter = Expr::rational(1, 4);
        (0..m)
            .map(|a| {
                let mut acc: Matrix = (0..n).map(|r| (0..n).map(|s| Expr::i() * &self.a_pot[a] * delta(r, s)).collect()).collect();
                for l in 0..m {
                    for mu in 0..m {
                        let w = &quarter * Expr::int(self.eta[mu]) * &gt[a][l][mu];
                        if w.is_zero() {
                            continue;
                        }
                        let prod = cmul(&self.gammas[l], &self.gammas[mu]);
                        for r in 0..n {
                            for s in 0..n {
                                if !prod[r][s].is_zero() {
                                    acc[r][s] = &acc[r][s] + &w * Expr::constant(prod[r][s].clone());
                                }
                            }
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// `κ^α_a = Γ̌_a{}^α{}_βψ^β`, `κ̄_{αa} = −ψ̄_βΓ̌_a{}^β{}_α` on the spinor chart.
    pub fn connection(&self) -> GeneralConnection {
        let (m, n) = (self.g.dim(), self.spinor_dim());
        let sc = self.spinor_connection();
        let fc = &self.fc;
        let mut k = vec![vec![Expr::zero(); m]; 2 * n];
        for a in 0..m {
            for al in 0..n {
                k[al][a] = Expr::sum((0..n).map(|b| &sc[a][al][b] * fc.y(b)));
                k[n + al][a] = -Expr::sum((0..n).map(|b| fc.y(n + b) * &sc[a][b][al]));
            }
        }
        let gc = GeneralConnection { fc: fc.clone(), k };
        stack_connections(fc.clone(), &[&gc]).expect("spinor connection uses base and fiber symbols")
    }

    pub fn section(&self, psi: Vec<Expr>, psibar: Vec<Expr>) -> Result<Section, ModelError> {
        let mut comps = psi;
        comps.extend(psibar);
        Ok(Section::new(self.fc.clone(), comps)?)
    }

    pub fn energy_tensor(&self) -> Result<EnergyTensor, ModelError> {
        Ok(canonical_energy_tensor(&dirac_lagrangian(self)?, &self.connection())?)
    }

    /// `𝒰^a_b = ℓδ^a_b − (i/2)(ψ̄γ^a∇_bψ − ∇_bψ̄γ^aψ)√|g|` from the section.
    pub fn energy_display(&self, sec: &Section) -> Matrix {
        let (m, n) = (self.g.dim(), self.spinor_dim());
        let k = self.connection();
        let map = sec.jet_map(0);
        let nab = |i: usize, b: usize| sec.d(i, b) - k.k[i][b].subst_many(&map);
        let up = self.gamma_up();
        let (psi, bar) = sec.comps.split_at(n);
        let bil = |gm: &Matrix, l: &dyn Fn(usize) -> Expr, r: &dyn Fn(usize) -> Expr| {
            Expr::sum((0..n).flat_map(|p| (0..n).map(move |q| (p, q))).map(|(p, q)| l(p) * &gm[p][q] * r(q)))
        };
        let sg = self.g.sqrt_abs_det();
        let half_i = Expr::rational(1, 2) * Expr::i();
        let slash = |a: usize, b: usize| {
            bil(&up[a], &|p| bar[p].clone(), &|q| nab(q, b)) - bil(&up[a], &|p| nab(n + p, b), &|q| psi[q].clone())
        };
        let kin = Expr::sum((0..m).map(|a| slash(a, a)));
        let mass = Expr::sum((0..n).map(|p| &bar[p] * &psi[p]));
        let ell = (&half_i * kin - &self.mass * mass) * sg;
        (0..m)
            .map(|a| (0..m).map(|b| &ell * delta(a, b) - &half_i * slash(a, b) * sg).collect())
            .collect()
    }
}

/// `ℓ = ((i/2)g^{ab}(ψ̄γ_a∇_bψ − ∇_aψ̄γ_bψ) − mψ̄ψ)√|g|` in jet symbols.
pub fn dirac_lagrangian(model: &DiracModel) -> Result<JetLagrangian, ModelError> {
    let (m, n) = (model.g.dim(), model.spinor_dim());
    let fc = &model.fc;
    let k = model.connection();
    let nab = |i: usize, a: usize| fc.ya(i, a) - &k.k[i][a];
    let down = model.gamma_down();
    let mut kin = Vec::new();
    for a in 0..m {
        for b in 0..m {
            let mut t = Vec::new();
            for p in 0..n {
                for q in 0..n {
                    let gab = &down[a][p][q];
                    let gbb = &down[b][p][q];
                    if !gab.is_zero() {
                        t.push(fc.y(n + p) * gab * nab(q, b));
                    }
                    if !gbb.is_zero() {
                        t.push(-(nab(n + p, a) * gbb * fc.y(q)));
                    }
                }
            }
            kin.push(gu(a, b) * Expr::sum(t));
        }
    }
    let mass = Expr::sum((0..n).map(|p| fc.y(n + p) * fc.y(p)));
    let density = (Expr::rational(1, 2) * Expr::i() * Expr::sum(kin) - &model.mass * mass) * sqrtg();
    Ok(JetLagrangian::with_metric(fc.clone(), density, model.g.clone())?)
}

/// `F_{ab}ψ̄γ^aψ`, the value of `∇_aT̆^a_b` on shell for `T = ∂ℓ/∂g^{ab}`, with
/// `F_{ab} = ∂_aA_b − ∂_bA_a`. The commutator of `γ_b` with `□` contributes the
/// second half of the coefficient.
pub fn dirac_onshell_divergence_rhs(model: &DiracModel, sec: &Section) -> Vec<Expr> {
    let (m, n) = (model.g.dim(), model.spinor_dim());
    let ch = &model.g.chart;
    let up = model.gamma_up();
    let (psi, bar) = sec.comps.split_at(n);
    let cur: Vec<Expr> = (0..m)
        .map(|a| Expr::sum((0..n).flat_map(|p| (0..n).map(move |q| (p, q))).map(|(p, q)| &bar[p] * &up[a][p][q] * &psi[q])))
        .collect();
    (0..m)
        .map(|b| {
            Expr::sum((0..m).map(|a| (ch.partial(&model.a_pot[b], a) - ch.partial(&model.a_pot[a], b)) * &cur[a]))
        })
        .collect()
}

/// Plane-wave solution `ψ = u e^{−i(Et − kx)}`, `ψ̄ = v e^{i(Et − kx)}` on flat space with
/// `A = 0`, `E² − k² = m²`; `u = (M + m)w`, `vᵀ = wᵀ(M + m)` with `M = γ^0E − γ^1k`.
pub fn plane_wave(model: &DiracModel, e: i64, k: i64, mass: i64) -> Result<Section, ModelError> {
    if e * e - k * k != mass * mass {
        return Err(ModelError::Unsupported("dirac", "E² − k² = m²".into()));
    }
    let n = model.spinor_dim();
    let c = |x: i64| Const::int(x);
    // γ^0 = γ_0, γ^1 = −γ_1
    let mm: CMatrix = (0..n)
        .map(|r| {
            (0..n)
                .map(|s| {
                    let d = if r == s { c(mass) } else { c(0) };
                    model.gammas[0][r][s].mul(&c(e)).add(&model.gammas[1][r][s].mul(&c(k))).add(&d)
                })
                .collect()
        })
        .collect();
    let w: Vec<Const> = (0..n).map(|r| Const::from_ratio(BigRational::from_integer((r as i64 + 1).into()))).collect();
    let u: Vec<Const> = (0..n).map(|r| (0..n).fold(Const::zero(), |acc, s| acc.add(&mm[r][s].mul(&w[s])))).collect();
    let v: Vec<Const> = (0..n).map(|s| (0..n).fold(Const::zero(), |acc, r| acc.add(&w[r].mul(&mm[r][s])))).collect();
    let ch = &model.g.chart;
    let phase = Expr::int(e) * ch.coord(0) - Expr::int(k) * ch.coord(1);
    let fwd = (-(Expr::i() * &phase)).exp();
    let back = (Expr::i() * &phase).exp();
    model.section(
        u.into_iter().map(|x| Expr::constant(x) * &fwd).collect(),
        v.into_iter().map(|x| Expr::constant(x) * &back).collect(),
    )
}

/// `γ_b` covariantly constant: `∂_aγ_b + Γ_a{}^d{}_bγ_d − [Γ̌_a, γ_b]`, indexed `[a][b]` then matrix.
pub fn gamma_covariant_derivative(model: &DiracModel) -> Vec<Vec<Matrix>> {
    let (m, n) = (model.g.dim(), model.spinor_dim());
    let ch = &model.g.chart;
    let down = model.gamma_down();
    let sc = model.spinor_connection();
    (0..m)
        .map(|a| {
            (0..m)
                .map(|b| {
                    let comm = {
                        let p = mat_mul(&sc[a], &down[b]);
                        let q = mat_mul(&down[b], &sc[a]);
                        (0..n).map(|r| (0..n).map(|s| &p[r][s] - &q[r][s]).collect::<Vec<_>>()).collect::<Vec<_>>()
                    };
                    (0..n)
                        .map(|r| {
                            (0..n)
                                .map(|s| {
                                    let mut t = vec![ch.partial(&down[b][r][s], a), -comm[r][s].clone()];
                                    for d in 0..m {
                                        t.push(model.gamma.at(a, d, b) * &down[d][r][s]);
                                    }
                                    Expr::sum(t)
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}
