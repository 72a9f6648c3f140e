//! Seeded random fixtures and the named fixture geometries.
//!
//! Random data are polynomials with small rational coefficients on small boxes,
//! so metrics stay close to their constant part and remain invertible.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::connections::{FiberedChart, GaugeField, GaugeStructure, GeneralConnection, LinearConnection};
use crate::geometry::{AffineConnectionField, Chart, Matrix, MetricField};
use crate::symexpr::{parse, Expr};

pub struct Fixtures {
    rng: ChaCha8Rng,
}

impl Fixtures {
    pub fn new(seed: u64) -> Self {
        Fixtures { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// `p/q` with `|p| ≤ num`, `q ∈ [1, den]`, never zero.
    pub fn rational(&mut self, num: i64, den: i64) -> Expr {
        let mut p = 0;
        while p == 0 {
            p = self.rng.gen_range(-num..=num);
        }
        Expr::rational(p, self.rng.gen_range(1..=den))
    }

    /// Sum of `terms` monomials of total degree `1..=degree` in `vars`.
    pub fn poly(&mut self, vars: &[Expr], degree: u32, terms: usize) -> Expr {
        let mut t = Vec::with_capacity(terms);
        for _ in 0..terms {
            let deg = self.rng.gen_range(1..=degree.max(1));
            let mut f = vec![self.rational(3, 4)];
            for _ in 0..deg {
                f.push(vars[self.rng.gen_range(0..vars.len())].clone());
            }
            t.push(Expr::product(f));
        }
        Expr::sum(t)
    }

    fn coords(chart: &Chart) -> Vec<Expr> {
        (0..chart.dim()).map(|a| chart.coord(a)).collect()
    }

    /// `diag(signature) + ε·(symmetric polynomial perturbation)`, `ε = 1/16`; diagonally
    /// dominant on the unit box up to dimension 4.
    pub fn metric(&mut self, chart: &Arc<Chart>, signature: &[i64], degree: u32) -> Arc<MetricField> {
        let m = chart.dim();
        let xs = Self::coords(chart);
        let mut g: Matrix = vec![vec![Expr::zero(); m]; m];
        for a in 0..m {
            for b in a..m {
                let base = if a == b { Expr::int(signature[a]) } else { Expr::zero() };
                let v = base + Expr::rational(1, 16) * self.poly(&xs, degree, 2);
                g[a][b] = v.clone();
                g[b][a] = v;
            }
        }
        MetricField::new(chart.clone(), g).expect("symmetric by construction")
    }

    pub fn symmetric_connection(&mut self, chart: &Arc<Chart>) -> AffineConnectionField {
        let m = chart.dim();
        let xs = Self::coords(chart);
        let mut raw = vec![vec![vec![Expr::zero(); m]; m]; m];
        for c in 0..m {
            for a in 0..m {
                for b in a..m {
                    let v = self.poly(&xs, 2, 2);
                    raw[c][a][b] = v.clone();
                    raw[c][b][a] = v;
                }
            }
        }
        AffineConnectionField::new(chart.clone(), raw, true).expect("symmetric by construction")
    }

    pub fn linear_connection(&mut self, fc: &Arc<FiberedChart>) -> LinearConnection {
        let (m, n) = (fc.m(), fc.n());
        let xs = Self::coords(&fc.base);
        let k = (0..m).map(|_| (0..n).map(|_| (0..n).map(|_| self.poly(&xs, 2, 2)).collect()).collect()).collect();
        LinearConnection::new(fc.clone(), k).expect("base symbols only")
    }

    /// Coefficients polynomial in both base and fiber coordinates.
    pub fn general_connection(&mut self, fc: &Arc<FiberedChart>) -> GeneralConnection {
        let (m, n) = (fc.m(), fc.n());
        let mut vars = Self::coords(&fc.base);
        vars.extend((0..n).map(|i| fc.y(i)));
        let k = (0..n).map(|_| (0..m).map(|_| self.poly(&vars, 2, 3)).collect()).collect();
        GeneralConnection::new(fc.clone(), k).expect("jet-free symbols")
    }

    pub fn gauge_field(&mut self, gs: &Arc<GaugeStructure>, chart: &Arc<Chart>, prefix: &str) -> GaugeField {
        let xs = Self::coords(chart);
        let k = (0..chart.dim()).map(|_| (0..gs.dim()).map(|_| self.poly(&xs, 2, 2)).collect()).collect();
        GaugeField::new(gs.clone(), chart.clone(), prefix, k).expect("base symbols only")
    }

    pub fn vector(&mut self, chart: &Chart) -> Vec<Expr> {
        let xs = Self::coords(chart);
        (0..chart.dim()).map(|_| self.rational(2, 3) + self.poly(&xs, 2, 2)).collect()
    }

    /// Real polynomial field components.
    pub fn fields(&mut self, chart: &Chart, n: usize) -> Vec<Expr> {
        let xs = Self::coords(chart);
        (0..n).map(|_| self.rational(2, 3) + self.poly(&xs, 3, 3)).collect()
    }

    /// Complex polynomial field components.
    pub fn complex_fields(&mut self, chart: &Chart, n: usize) -> Vec<Expr> {
        let xs = Self::coords(chart);
        (0..n).map(|_| self.rational(2, 3) + self.poly(&xs, 2, 2) + Expr::i() * self.poly(&xs, 2, 2)).collect()
    }
}

pub fn minkowski(coords: &[&str], half_width: f64) -> Arc<MetricField> {
    let m = coords.len();
    let ch = Chart::new("M", coords, &vec![(-half_width, half_width); m]).expect("distinct coordinates");
    let g = (0..m)
        .map(|a| (0..m).map(|b| Expr::int(if a != b { 0 } else if a == 0 { -1 } else { 1 })).collect())
        .collect();
    MetricField::new(ch, g).expect("diagonal")
}

/// Schwarzschild with `M = 1` on `r ∈ [3, 10]`, `θ ∈ [0.3, π − 0.3]`.
pub fn schwarzschild() -> Arc<MetricField> {
    let pi = std::f64::consts::PI;
    let ch = Chart::new("S", &["t", "r", "th", "ph"], &[(0.0, 1.0), (3.0, 10.0), (0.3, pi - 0.3), (0.0, 6.0)])
        .expect("distinct coordinates");
    let f = parse("1 - 2/r").expect("literal");
    let mut g = vec![vec![Expr::zero(); 4]; 4];
    g[0][0] = -f.clone();
    g[1][1] = Expr::one().div(&f);
    g[2][2] = parse("r^2").expect("literal");
    g[3][3] = parse("r^2*sin(th)^2").expect("literal");
    MetricField::new(ch, g).expect("diagonal")
}

/// Round 2-sphere on `θ ∈ [0.3, π − 0.3]`.
pub fn sphere() -> Arc<MetricField> {
    let pi = std::f64::consts::PI;
    let ch = Chart::new("S2", &["th", "ph"], &[(0.3, pi - 0.3), (0.0, 6.0)]).expect("distinct coordinates");
    let s = parse("sin(th)^2").expect("literal");
    MetricField::new(ch, vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), s]]).expect("diagonal")
}

/// `S² × ℝ` with a time direction: `−dt² + dθ² + sin²θ dφ²`.
pub fn sphere_time() -> Arc<MetricField> {
    let pi = std::f64::consts::PI;
    let ch = Chart::new("ST", &["t", "th", "ph"], &[(0.0, 1.0), (0.3, pi - 0.3), (0.0, 6.0)]).expect("distinct");
    let mut g = vec![vec![Expr::zero(); 3]; 3];
    g[0][0] = Expr::int(-1);
    g[1][1] = Expr::one();
    g[2][2] = parse("sin(th)^2").expect("literal");
    MetricField::new(ch, g).expect("diagonal")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{einstein, levi_civita};
    use crate::symexpr::{compare_arrays, Assignment, NumericOptions};

    #[test]
    fn same_seed_same_fixture() {
        let ch = Chart::unit("P", &["x", "y"]);
        let a = Fixtures::new(4).metric(&ch, &[1, 1], 3);
        let b = Fixtures::new(4).metric(&ch, &[1, 1], 3);
        assert!(a.lower(0, 1).same_as(b.lower(0, 1)));
    }

    #[test]
    fn schwarzschild_is_vacuum() {
        let g = schwarzschild();
        let p = Assignment::from_reals(&[("t", 0.0), ("r", 4.0), ("th", 1.0), ("ph", 0.0)]);
        assert!((g.lower(0, 0).eval(&p).unwrap().re + 0.5).abs() < 1e-15);
        let gt = einstein(&g, &levi_civita(&g));
        let zeros = vec![Expr::zero(); 16];
        assert!(compare_arrays(&gt.data, &zeros, &g.chart.domain(), &NumericOptions::default()).unwrap().pass);
    }
}
