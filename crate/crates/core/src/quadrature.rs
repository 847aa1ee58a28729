//! Numerical integration: Gauss-Hermite and Gauss-Legendre rules and an
//! adaptive integrator for polynomial-times-Gaussian integrands.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::GaussPoly;
use crate::poly::{Poly, VarId};
use crate::scalar::{Ring, ToComplex64};

/// Controls for every numerical integration in the crate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Starting Gauss-Hermite order per dimension.
    pub order: usize,
    /// Orders are doubled until this limit.
    pub max_order: usize,
    /// Relative convergence tolerance between successive orders.
    pub tol: f64,
    /// Half-width of the box for Gauss-Legendre integrals over the plane.
    pub radius: f64,
    /// Starting Gauss-Legendre order per dimension for box integrals.
    pub box_order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { order: 8, max_order: 128, tol: 1e-12, radius: 12.0, box_order: 64 }
    }
}

/// Nodes and weights of a one-dimensional rule.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn cache() -> &'static Mutex<HashMap<(char, usize), Arc<Rule>>> {
    static CACHE: OnceLock<Mutex<HashMap<(char, usize), Arc<Rule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(kind: char, n: usize, build: fn(usize) -> Rule) -> Arc<Rule> {
    if let Some(r) = cache().lock().expect("rule cache").get(&(kind, n)) {
        return r.clone();
    }
    let rule = Arc::new(build(n));
    cache().lock().expect("rule cache").insert((kind, n), rule.clone());
    rule
}

/// Gauss-Hermite rule for the weight `exp(-x^2)`.
pub fn gauss_hermite(n: usize) -> Arc<Rule> {
    cached('h', n, build_hermite)
}

/// Gauss-Laguerre rule for the weight `exp(-z)` on `[0, inf)`.
pub fn gauss_laguerre(n: usize) -> Arc<Rule> {
    cached('g', n, build_laguerre)
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    cached('l', n, build_legendre)
}

fn build_hermite(n: usize) -> Rule {
    assert!(n > 0, "empty rule");
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        // Orthonormal Hermite functions keep the recurrence bounded for large n.
        let mut dpsi = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4 * (-0.5 * z * z).exp();
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            dpsi = (2.0 * nf).sqrt() * p2 - z * p1;
            let z1 = z;
            z = z1 - p1 / dpsi;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 * (-z * z).exp() / (dpsi * dpsi);
        w[n - 1 - i] = w[i];
    }
    Rule { nodes: x, weights: w }
}

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix.
fn build_laguerre(n: usize) -> Rule {
    assert!(n > 0, "empty rule");
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * i as f64 + 1.0
        } else if i + 1 == j || j + 1 == i {
            i.max(j) as f64
        } else {
            0.0
        }
    });
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
}

fn build_legendre(n: usize) -> Rule {
    assert!(n > 0, "empty rule");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    Rule { nodes: x, weights: w }
}

/// Value of an integral together with the order that met the tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    pub order: usize,
    /// Estimated error: difference between the last two orders.
    pub error: f64,
}

/// Doubles `order` until successive values agree; `eval(order)` returns the
/// value and an absolute scale (`sum |w f|`) used for the relative test.
pub fn adaptive(
    start: usize,
    max_order: usize,
    tol: f64,
    what: &str,
    mut eval: impl FnMut(usize) -> (Complex64, f64),
) -> Result<Quadrature> {
    let mut order = start.max(1);
    let (mut prev, _) = eval(order);
    while order * 2 <= max_order {
        order *= 2;
        let (value, scale) = eval(order);
        let error = (value - prev).norm();
        if error <= tol * scale.max(f64::MIN_POSITIVE) {
            return Ok(Quadrature { value, order, error });
        }
        prev = value;
    }
    Err(Error::UnderResolved(format!("{} did not converge up to order {}", what, max_order)))
}

/// Polynomial compiled for fast repeated evaluation at complex points.
pub struct CompiledPoly {
    slots: usize,
    max_exp: Vec<usize>,
    terms: Vec<(Complex64, Vec<(usize, usize)>)>,
}

impl CompiledPoly {
    /// Compiles `p` over `slots`; every other variable is evaluated with `fixed`.
    pub fn new<C: Ring + ToComplex64>(p: &Poly<C>, slots: &[VarId], fixed: &dyn Fn(VarId) -> Complex64) -> Self {
        let mut grouped: HashMap<Vec<(usize, usize)>, Complex64> = HashMap::new();
        let mut max_exp = vec![0usize; slots.len()];
        for (m, c) in p.terms() {
            let mut coeff = c.to_c64();
            let mut key = Vec::new();
            for (v, k) in m.vars() {
                match slots.iter().position(|&s| s == v) {
                    Some(i) => {
                        key.push((i, k as usize));
                        max_exp[i] = max_exp[i].max(k as usize);
                    }
                    None => coeff *= fixed(v).powu(k as u32),
                }
            }
            *grouped.entry(key).or_insert(Complex64::new(0.0, 0.0)) += coeff;
        }
        let mut terms: Vec<_> = grouped.into_iter().map(|(k, c)| (c, k)).collect();
        terms.sort_by(|a, b| a.1.cmp(&b.1));
        Self { slots: slots.len(), max_exp, terms }
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        debug_assert_eq!(z.len(), self.slots);
        let powers: Vec<Vec<Complex64>> = z
            .iter()
            .zip(&self.max_exp)
            .map(|(x, &k)| {
                let mut v = Vec::with_capacity(k + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                v.push(acc);
                for _ in 0..k {
                    acc *= x;
                    v.push(acc);
                }
                v
            })
            .collect();
        self.terms
            .iter()
            .map(|(c, key)| key.iter().fold(*c, |acc, &(i, k)| acc * powers[i][k]))
            .sum()
    }
}

/// Complex symmetric factorisation `A = L L^T` with principal square roots of the pivots.
fn complex_cholesky(a: &DMatrix<Complex64>) -> Option<DMatrix<Complex64>> {
    let n = a.nrows();
    let mut l = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d.norm() == 0.0 {
            return None;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// `integral P(y) exp(-y^T A y + b.y + c) d^n y` over `R^n` for complex symmetric
/// `A` with positive definite real part.
///
/// The integrand is recentred on the saddle point and whitened with a complex
/// Cholesky factor, then integrated with tensor Gauss-Hermite rules whose order
/// is doubled until converged. `degree` (when known) sets the starting order.
pub fn integrate_gaussian(
    a: &DMatrix<Complex64>,
    b: &[Complex64],
    c: Complex64,
    prefactor: &(dyn Fn(&[Complex64]) -> Complex64 + Sync),
    degree: Option<u32>,
    spec: &QuadratureSpec,
) -> Result<Quadrature> {
    let n = a.nrows();
    if n == 0 {
        let v = prefactor(&[]) * c.exp();
        return Ok(Quadrature { value: v, order: 0, error: 0.0 });
    }
    let re = a.map(|z| z.re);
    let sym = (&re + re.transpose()) * 0.5;
    if sym.cholesky().is_none() {
        return Err(Error::NonDecaying("real part of the quadratic form is not positive definite".into()));
    }
    let l = complex_cholesky(a).ok_or_else(|| Error::NonDecaying("singular quadratic form".into()))?;
    let inv = a.clone().try_inverse().ok_or_else(|| Error::NonDecaying("singular quadratic form".into()))?;
    let bv = nalgebra::DVector::from_column_slice(b);
    let y0 = (&inv * &bv) * Complex64::new(0.5, 0.0);
    let peak = c + bv.dot(&y0) * 0.5;
    let lt_inv = l
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::NonDecaying("singular quadratic form".into()))?;
    let det_l: Complex64 = (0..n).map(|i| l[(i, i)]).product();
    let factor = peak.exp() / det_l;

    let start = match degree {
        Some(d) => spec.order.max(d as usize / 2 + 1),
        None => spec.order,
    };
    let eval = |order: usize| -> (Complex64, f64) {
        let rule = gauss_hermite(order);
        let total: usize = order.pow(n as u32);
        let (sum, abs) = (0..total)
            .into_par_iter()
            .map(|mut idx| {
                let mut w = 1.0;
                let mut node = vec![Complex64::new(0.0, 0.0); n];
                for slot in node.iter_mut() {
                    let k = idx % order;
                    idx /= order;
                    w *= rule.weights[k];
                    *slot = Complex64::new(rule.nodes[k], 0.0);
                }
                let mut y = vec![Complex64::new(0.0, 0.0); n];
                for i in 0..n {
                    let mut s = y0[i];
                    for j in 0..n {
                        s += lt_inv[(i, j)] * node[j];
                    }
                    y[i] = s;
                }
                let f = prefactor(&y);
                (f * w, (f * w).norm())
            })
            .reduce(|| (Complex64::new(0.0, 0.0), 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
        (sum * factor, abs * factor.norm())
    };
    adaptive(start, spec.max_order.max(start), spec.tol, "Gaussian integral", eval)
}

/// Integrates a [`GaussPoly`] over `over`, holding the remaining variables at `fixed`.
pub fn integrate_gauss_poly<C: Ring + ToComplex64>(
    g: &GaussPoly<C>,
    over: &[VarId],
    fixed: &dyn Fn(VarId) -> Complex64,
    spec: &QuadratureSpec,
) -> Result<Quadrature> {
    let form = g.exponent();
    let idx: Vec<usize> = over
        .iter()
        .map(|v| form.index_of(*v).ok_or(Error::UnknownVariable(*v)))
        .collect::<Result<_>>()?;
    let rest: Vec<usize> = (0..form.vars().len()).filter(|i| !idx.contains(i)).collect();
    let m = |i: usize, j: usize| form.matrix()[i][j].to_c64();
    let zf: Vec<Complex64> = rest.iter().map(|&i| fixed(form.vars()[i])).collect();
    let n = idx.len();
    let a = DMatrix::from_fn(n, n, |r, s| -m(idx[r], idx[s]));
    let b: Vec<Complex64> = idx
        .iter()
        .map(|&i| {
            let mut s = form.linear()[i].to_c64();
            for (k, &j) in rest.iter().enumerate() {
                s += m(i, j) * zf[k] * 2.0;
            }
            s
        })
        .collect();
    let mut c = form.constant().to_c64();
    for (k, &i) in rest.iter().enumerate() {
        c += form.linear()[i].to_c64() * zf[k];
        for (l, &j) in rest.iter().enumerate() {
            c += m(i, j) * zf[k] * zf[l];
        }
    }
    let compiled = CompiledPoly::new(g.prefactor(), over, fixed);
    let degree = g.prefactor().degree_in(over);
    integrate_gaussian(&a, &b, c, &|y: &[Complex64]| compiled.eval(y), Some(degree), spec)
}

/// Integral over all variables.
pub fn integrate_all<C: Ring + ToComplex64>(g: &GaussPoly<C>, spec: &QuadratureSpec) -> Result<Quadrature> {
    let vars = g.vars().to_vec();
    integrate_gauss_poly(g, &vars, &|v| panic!("parameter `{}` left unassigned", v), spec)
}

/// `integral f(x) exp(-x^2) dx` with adaptive Gauss-Hermite order and an absolute tolerance.
pub fn hermite_1d(f: impl Fn(f64) -> Complex64, start: usize, max_order: usize, tol: f64) -> Result<Quadrature> {
    adaptive(start, max_order, tol, "Gauss-Hermite integral", |order| {
        let rule = gauss_hermite(order);
        let v: Complex64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| f(*x) * *w).sum();
        (v, 1.0)
    })
}

/// Tensor Gauss-Legendre integral over `[-radius, radius]^dims`, orders doubled to convergence.
pub fn box_integral(
    f: &(dyn Fn(&[f64]) -> Complex64 + Sync),
    dims: usize,
    radius: f64,
    start: usize,
    max_order: usize,
    tol: f64,
) -> Result<Quadrature> {
    adaptive(start, max_order.max(start), tol, "box integral", |order| {
        let rule = gauss_legendre(order);
        let total = order.pow(dims as u32);
        let (sum, abs) = (0..total)
            .into_par_iter()
            .map(|mut idx| {
                let mut w = radius.powi(dims as i32);
                let mut x = vec![0.0; dims];
                for slot in x.iter_mut() {
                    let k = idx % order;
                    idx /= order;
                    w *= rule.weights[k];
                    *slot = radius * rule.nodes[k];
                }
                let v = f(&x) * w;
                (v, v.norm())
            })
            .reduce(|| (Complex64::new(0.0, 0.0), 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
        (sum, abs)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, Rational};
    use std::f64::consts::PI;

    #[test]
    fn hermite_rule_moments() {
        let r = gauss_hermite(20);
        let m0: f64 = r.weights.iter().sum();
        let m2: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| x * x * w).sum();
        let m8: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| x.powi(8) * w).sum();
        assert!((m0 - PI.sqrt()).abs() < 1e-13);
        assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-13);
        assert!((m8 - 105.0 / 16.0 * PI.sqrt()).abs() < 1e-11);
        let big = gauss_hermite(200);
        let s: f64 = big.weights.iter().sum();
        assert!((s - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn legendre_rule_moments() {
        let r = gauss_legendre(12);
        let m0: f64 = r.weights.iter().sum();
        let m4: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| x.powi(4) * w).sum();
        assert!((m0 - 2.0).abs() < 1e-14);
        assert!((m4 - 0.4).abs() < 1e-14);
    }

    #[test]
    fn complex_gaussian_matches_closed_form() {
        // integral exp(-(1+i) y^2 + 2 y) dy = sqrt(pi/(1+i)) exp(1/(1+i))
        let a = DMatrix::from_element(1, 1, Complex64::new(1.0, 1.0));
        let b = [Complex64::new(2.0, 0.0)];
        let q = integrate_gaussian(&a, &b, Complex64::new(0.0, 0.0), &|_| Complex64::new(1.0, 0.0), Some(0), &QuadratureSpec::default())
            .unwrap();
        let s = Complex64::new(1.0, 1.0);
        let exact = (Complex64::new(PI, 0.0) / s).sqrt() * (Complex64::new(1.0, 0.0) / s).exp();
        assert!((q.value - exact).norm() < 1e-12);
    }

    #[test]
    fn gauss_poly_moment_in_two_dims() {
        // integral x^2 exp(-x^2 - y^2 + x y) = 4 pi / (3 sqrt 3)
        let vars = vec![VarId::Q, VarId::X];
        let e = -Poly::<Rational>::var(VarId::Q).pow(2) - Poly::var(VarId::X).pow(2)
            + Poly::var(VarId::Q) * Poly::var(VarId::X);
        let g = GaussPoly::from_polys(vars, Poly::var(VarId::Q).pow(2), &e).unwrap();
        let spec = QuadratureSpec::default();
        let exact = integrate_all(&g, &spec).unwrap().value;
        let boxed = box_integral(
            &|z: &[f64]| Complex64::new(z[0] * z[0] * (-z[0] * z[0] - z[1] * z[1] + z[0] * z[1]).exp(), 0.0),
            2,
            10.0,
            64,
            256,
            1e-12,
        )
        .unwrap();
        assert!((exact - boxed.value).norm() < 1e-10);
        assert!((exact.re - 4.0 * PI / (3.0 * 3f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn growing_integrand_is_rejected() {
        let e = Poly::<Rational>::var(VarId::Q).pow(2);
        let g = GaussPoly::from_polys(vec![VarId::Q], Poly::constant(int(1)), &e).unwrap();
        assert!(matches!(integrate_all(&g, &QuadratureSpec::default()), Err(Error::NonDecaying(_))));
    }

    #[test]
    fn unresolved_integrand_reports() {
        let spec = QuadratureSpec { order: 2, max_order: 8, ..Default::default() };
        let r = hermite_1d(|x| Complex64::new((7.0 * x).cos(), 0.0), spec.order, spec.max_order, 1e-14);
        assert!(matches!(r, Err(Error::UnderResolved(_))));
    }
}
