//! Finite-difference oracles, independent of symbolic differentiation.

use num::complex::Complex64;

use super::VerifyError;
use crate::connections::Section;
use crate::models::ModelError;
use crate::symexpr::{Assignment, Expr};
use crate::variational::{euler_lagrange, JetLagrangian, VariationalError};

/// Central difference `(e(v+h) − e(v−h)) / 2h` at `point`.
pub fn finite_difference_oracle(e: &Expr, v: &str, point: &Assignment, h: f64) -> Result<Complex64, VerifyError> {
    if h.is_nan() || h <= 0.0 {
        return Err(VerifyError::Step(h));
    }
    let x0 = point.get(v).unwrap_or_default();
    let at = |dx: f64| {
        let mut p = point.clone();
        p.set(v, x0 + dx);
        e.eval(&p).map_err(|source| crate::symexpr::NumericError::Eval { source, point: p.clone() })
    };
    Ok((at(h)? - at(-h)?) / (2.0 * h))
}

/// Composite Simpson rule for a function sampled at `n + 1` equally spaced nodes (`n` even).
fn simpson(values: &[Complex64], step: f64) -> Complex64 {
    let n = values.len() - 1;
    let mut s = values[0] + values[n];
    for (k, v) in values.iter().enumerate().take(n).skip(1) {
        s += v * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * step / 3.0
}

fn integrate(f: &Expr, var: &str, lo: f64, hi: f64, n: usize) -> Result<Complex64, VerifyError> {
    let step = (hi - lo) / n as f64;
    let mut vals = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let p = Assignment::from_reals(&[(var, lo + step * k as f64)]);
        vals.push(f.eval(&p).map_err(|source| crate::symexpr::NumericError::Eval { source, point: p })?);
    }
    Ok(simpson(&vals, step))
}

/// First variation of the action on a one-dimensional base with one field,
/// `(d/dε)∫ℓ∘j(φ + εη)` by central differences against `∫(E∘j₂φ)η`.
/// `η` must vanish with its derivative at both ends of the chart. Returns `(fd, el)`.
pub fn action_variation_oracle(
    lag: &JetLagrangian,
    phi: &Expr,
    eta: &Expr,
    h: f64,
) -> Result<(Complex64, Complex64), VerifyError> {
    if h.is_nan() || h <= 0.0 {
        return Err(VerifyError::Step(h));
    }
    let fc = &lag.fc;
    if fc.m() != 1 || fc.n() != 1 {
        let got = fc.m() * fc.n();
        return Err(ModelError::from(VariationalError::Dimension { expected: 1, got }).into());
    }
    let var = &fc.base.coords[0];
    let (lo, hi) = fc.base.bounds[0];
    let nodes = 400;
    let action = |eps: f64| -> Result<Complex64, VerifyError> {
        let field = phi + Expr::constant(crate::symexpr::Const::from_ratio(
            num::BigRational::from_float(eps).expect("finite step"),
        )) * eta;
        let sec = Section::new(fc.clone(), vec![field]).map_err(ModelError::from)?;
        integrate(&sec.pullback(lag.ell(), 1), var, lo, hi, nodes)
    };
    let fd = (action(h)? - action(-h)?) / (2.0 * h);
    let sec = Section::new(fc.clone(), vec![phi.clone()]).map_err(ModelError::from)?;
    let el = sec.pullback(&euler_lagrange(lag)[0], 2);
    let analytic = integrate(&(el * eta), var, lo, hi, nodes)?;
    Ok((fd, analytic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::FiberedChart;
    use crate::geometry::Chart;
    use crate::symexpr::parse;
    use rand::{Rng, SeedableRng};

    #[test]
    fn square_derivative() {
        let p = Assignment::from_reals(&[("x", 3.0)]);
        let d = finite_difference_oracle(&parse("x^2").unwrap(), "x", &p, 1e-5).unwrap();
        assert!((d.re - 6.0).abs() < 1e-9);
    }

    #[test]
    fn zero_step_is_rejected() {
        let p = Assignment::from_reals(&[("x", 3.0)]);
        assert_eq!(finite_difference_oracle(&parse("x").unwrap(), "x", &p, 0.0), Err(VerifyError::Step(0.0)));
    }

    #[test]
    fn agrees_with_symbolic_derivative() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let shapes = ["sin(a*x)*exp(b*x)", "(a + x)^3/(2 + b*x^2)", "log(2 + a*x^2)*cos(b + x)", "sqrt(3 + a*x)*x^b"];
        for k in 0..100 {
            let a = rng.gen_range(-1.0..1.0);
            let b = rng.gen_range(0.5..2.0f64).round();
            let src = shapes[k % shapes.len()].replace('a', &format!("({a})")).replace('b', &format!("({b})"));
            let e = parse(&src).unwrap();
            let x = rng.gen_range(0.2..1.0);
            let p = Assignment::from_reals(&[("x", x)]);
            let fd = finite_difference_oracle(&e, "x", &p, 1e-5).unwrap();
            let sym = e.diff("x").eval(&p).unwrap();
            assert!((fd - sym).norm() <= 1e-5 * (1.0 + sym.norm()), "{src} at {x}: {fd} vs {sym}");
        }
    }

    #[test]
    fn free_scalar_action_variation() {
        let ch = Chart::new("L", &["x"], &[(-1.0, 1.0)]).unwrap();
        let fc = FiberedChart::unit(ch, &["u"]);
        let lag = JetLagrangian::new(fc, parse("1/2*u_a0^2 - 2*u^2").unwrap()).unwrap();
        let (fd, el) =
            action_variation_oracle(&lag, &parse("sin(2*x) + x^2").unwrap(), &parse("(1 - x^2)^4").unwrap(), 1e-3)
                .unwrap();
        assert!((fd - el).norm() <= 1e-4 * (1.0 + el.norm()), "{fd} vs {el}");
    }
}
