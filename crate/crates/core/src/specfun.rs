//! Laguerre and Hermite polynomials and the integral identities built on them.

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Poly, VarId};
use crate::quadrature::{gauss_hermite, gauss_laguerre, hermite_1d, QuadratureSpec};
use crate::scalar::{int, rat, Rational, Ring};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Laguerre,
    Hermite,
}

/// A classical orthogonal polynomial stored by its exact coefficients (lowest power first).
#[derive(Clone, Debug, PartialEq)]
pub struct PolySeq {
    pub family: Family,
    pub degree: usize,
    pub coeffs: Vec<Rational>,
}

fn check_index(n: i64) -> Result<usize> {
    if n < 0 {
        Err(Error::NegativeIndex(n))
    } else {
        Ok(n as usize)
    }
}

type Uni = Vec<Rational>;

fn trim(mut p: Uni) -> Uni {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn uni_add(a: &Uni, b: &Uni) -> Uni {
    let n = a.len().max(b.len());
    let zero = Rational::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&zero) + b.get(i).unwrap_or(&zero)).collect())
}

fn uni_scale(a: &Uni, c: &Rational) -> Uni {
    trim(a.iter().map(|x| x * c).collect())
}

/// Multiplies by `c * z`.
fn uni_shift(a: &Uni, c: &Rational) -> Uni {
    let mut out = vec![Rational::zero()];
    out.extend(a.iter().map(|x| x * c));
    trim(out)
}

fn uni_diff(a: &Uni) -> Uni {
    if a.len() <= 1 {
        return vec![Rational::zero()];
    }
    trim(a.iter().enumerate().skip(1).map(|(k, c)| c * int(k as i64)).collect())
}

impl PolySeq {
    /// Laguerre `L_n` by the three-term recurrence.
    pub fn laguerre(n: i64) -> Result<Self> {
        let n = check_index(n)?;
        let mut prev: Uni = vec![Rational::one()];
        if n == 0 {
            return Ok(Self { family: Family::Laguerre, degree: 0, coeffs: prev });
        }
        let mut cur: Uni = vec![Rational::one(), -Rational::one()];
        for k in 1..n {
            let a = uni_add(&uni_scale(&cur, &int(2 * k as i64 + 1)), &uni_shift(&cur, &-Rational::one()));
            let b = uni_add(&a, &uni_scale(&prev, &-int(k as i64)));
            let next = uni_scale(&b, &(Rational::one() / int(k as i64 + 1)));
            prev = std::mem::replace(&mut cur, next);
        }
        Ok(Self { family: Family::Laguerre, degree: n, coeffs: cur })
    }

    /// Laguerre `L_n = (1/n!) (d/dz - 1)^n z^n`.
    pub fn laguerre_rodrigues(n: i64) -> Result<Self> {
        let n = check_index(n)?;
        let mut p: Uni = vec![Rational::zero(); n + 1];
        p[n] = Rational::one();
        let mut fact = Rational::one();
        for k in 1..=n {
            p = uni_add(&uni_diff(&p), &uni_scale(&p, &-Rational::one()));
            fact *= int(k as i64);
        }
        Ok(Self { family: Family::Laguerre, degree: n, coeffs: uni_scale(&p, &(Rational::one() / fact)) })
    }

    /// Physicists' Hermite `H_n` by the three-term recurrence.
    pub fn hermite(n: i64) -> Result<Self> {
        let n = check_index(n)?;
        let mut prev: Uni = vec![Rational::one()];
        if n == 0 {
            return Ok(Self { family: Family::Hermite, degree: 0, coeffs: prev });
        }
        let mut cur: Uni = vec![Rational::zero(), int(2)];
        for k in 1..n {
            let next = uni_add(&uni_shift(&cur, &int(2)), &uni_scale(&prev, &int(-2 * k as i64)));
            prev = std::mem::replace(&mut cur, next);
        }
        Ok(Self { family: Family::Hermite, degree: n, coeffs: cur })
    }

    /// Hermite `H_n = (-1)^n (d/dx - 2x)^n 1`.
    pub fn hermite_rodrigues(n: i64) -> Result<Self> {
        let n = check_index(n)?;
        let mut p: Uni = vec![Rational::one()];
        for _ in 0..n {
            p = uni_add(&uni_diff(&p), &uni_shift(&p, &int(-2)));
        }
        if n % 2 == 1 {
            p = uni_scale(&p, &-Rational::one());
        }
        Ok(Self { family: Family::Hermite, degree: n, coeffs: p })
    }

    /// Horner evaluation in any ring.
    pub fn eval<T: Ring>(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + T::from_rational(c))
    }

    pub fn to_poly(&self, v: VarId) -> Poly<Rational> {
        self.eval(&Poly::var(v))
    }
}

/// `H_n(x)` by recurrence, in any ring (complex floats, exact scalars, polynomials).
pub fn hermite_value<T: Ring>(n: usize, x: &T) -> T {
    let two_x = x.clone() * T::from_int(2);
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = two_x.clone();
    for k in 1..n {
        let next = two_x.clone() * cur.clone() - prev * T::from_int(2 * k as i64);
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// `L_n(z)` by recurrence, in any ring.
pub fn laguerre_value<T: Ring>(n: usize, z: &T) -> T {
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = T::one() - z.clone();
    for k in 1..n {
        let a = T::from_int(2 * k as i64 + 1) - z.clone();
        let next = (a * cur.clone() - prev * T::from_int(k as i64)) * T::from_ratio(1, k as i64 + 1);
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// Two sides of a numerical identity and their discrepancy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    /// `|lhs - rhs|`.
    pub residual: f64,
    /// Gauss-Hermite order that met the convergence test.
    pub order: usize,
}

impl IdentityCheck {
    fn new(lhs: Complex64, rhs: Complex64, order: usize) -> Self {
        Self { lhs_re: lhs.re, lhs_im: lhs.im, rhs_re: rhs.re, rhs_im: rhs.im, residual: (lhs - rhs).norm(), order }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Correctly rounded 192-bit arithmetic for the Laguerre-Hermite oracle.
mod mp {
    use std::ops::{Add, Div, Mul, Neg, Sub};

    use astro_float::{BigFloat, Consts, Radix, RoundingMode};

    const PREC: usize = 192;
    const RM: RoundingMode = RoundingMode::ToEven;

    #[derive(Clone, Debug)]
    pub struct Mp(BigFloat);

    pub fn mp(x: f64) -> Mp {
        Mp(BigFloat::from_f64(x, PREC))
    }

    impl Mp {
        pub fn sqrt(&self) -> Mp {
            Mp(self.0.sqrt(PREC, RM))
        }

        pub fn exp(&self, cc: &mut Consts) -> Mp {
            Mp(self.0.exp(PREC, RM, cc))
        }

        pub fn sin_cos(&self, cc: &mut Consts) -> (Mp, Mp) {
            (Mp(self.0.sin(PREC, RM, cc)), Mp(self.0.cos(PREC, RM, cc)))
        }

        pub fn pi(cc: &mut Consts) -> Mp {
            Mp(cc.pi(PREC, RM))
        }

        pub fn to_f64(&self, cc: &mut Consts) -> f64 {
            self.0.format(Radix::Dec, RM, cc).ok().and_then(|s| s.parse().ok()).unwrap_or(f64::NAN)
        }
    }

    macro_rules! binop {
        ($tr:ident, $f:ident) => {
            impl $tr for Mp {
                type Output = Mp;
                fn $f(self, o: Mp) -> Mp {
                    Mp(self.0.$f(&o.0, PREC, RM))
                }
            }
            impl $tr<f64> for Mp {
                type Output = Mp;
                fn $f(self, o: f64) -> Mp {
                    Mp(self.0.$f(&BigFloat::from_f64(o, PREC), PREC, RM))
                }
            }
        };
    }
    binop!(Add, add);
    binop!(Sub, sub);
    binop!(Mul, mul);
    binop!(Div, div);

    impl Neg for Mp {
        type Output = Mp;
        fn neg(self) -> Mp {
            Mp(self.0.neg())
        }
    }

    pub fn consts() -> Consts {
        Consts::new().expect("constant cache")
    }
}

use mp::{mp, Mp};

/// Gauss-Hermite rule at 192 bits: the `f64` nodes refined by Newton steps on the
/// orthonormal recurrence, with weights `sqrt(pi) / (n h_{n-1}(x)^2)`.
fn hermite_rule_mp(n: usize, sqrt_pi: &Mp) -> Vec<(Mp, Mp)> {
    let nf = n as f64;
    let coef: Vec<(Mp, Mp)> = (1..=n).map(|j| ((mp(2.0) / j as f64).sqrt(), (mp(j as f64 - 1.0) / j as f64).sqrt())).collect();
    let eval = |z: &Mp| {
        let (mut p1, mut p2) = (mp(1.0), mp(0.0));
        for (a, b) in &coef {
            let p3 = std::mem::replace(&mut p2, p1.clone());
            p1 = z.clone() * a.clone() * p2.clone() - b.clone() * p3;
        }
        (p1, p2)
    };
    let root = mp(2.0 * nf).sqrt();
    gauss_hermite(n)
        .nodes
        .iter()
        .map(|&x0| {
            let mut z = mp(x0);
            for _ in 0..3 {
                let (p, prev) = eval(&z);
                z = z - p / (root.clone() * prev);
            }
            let (_, prev) = eval(&z);
            let w = sqrt_pi.clone() / (prev.clone() * prev * nf);
            (z, w)
        })
        .collect()
}

fn hermite_mp(n: usize, x: &Mp) -> Mp {
    let (mut prev, mut cur) = (mp(0.0), mp(1.0));
    for k in 0..n {
        let next = x.clone() * 2.0 * cur.clone() - prev * (2.0 * k as f64);
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

fn laguerre_mp(n: usize, z: &Mp) -> Mp {
    let (mut prev, mut cur) = (mp(0.0), mp(1.0));
    for k in 0..n {
        let next = ((mp(2.0 * k as f64 + 1.0) - z.clone()) * cur.clone() - prev * k as f64) / (k as f64 + 1.0);
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// `int H_n(x-a) H_n(x+a) e^{-x^2} e^{-2ibx} dx` against `2^n sqrt(pi) n! e^{-b^2} L_n(2(a^2+b^2))`.
///
/// At `n = 8` the `2^n n! sqrt(pi)` scale is near `2e7`, so one `f64` ulp of either
/// side is already `4e-9`; both sides are therefore evaluated in 192-bit arithmetic.
/// The Gauss-Hermite order doubles until two successive values agree to `1e-20`
/// of that scale.
pub fn laguerre_hermite_identity_check(n: i64, a: f64, b: f64, quad: &QuadratureSpec) -> Result<IdentityCheck> {
    let n = check_index(n)?;
    if n > 12 {
        return Err(Error::InvalidParameters(format!("degree {} exceeds the supported range n <= 12", n)));
    }
    let mut cc = mp::consts();
    let sqrt_pi = Mp::pi(&mut cc).sqrt();
    let scale = sqrt_pi.clone() * 2f64.powi(n as i32) * factorial(n);
    let tol = 1e-20 * scale.to_f64(&mut cc);
    let mut lhs_at = |order: usize| {
        hermite_rule_mp(order, &sqrt_pi).into_iter().fold((mp(0.0), mp(0.0)), |(re, im), (x, w)| {
            let h = hermite_mp(n, &(x.clone() - a)) * hermite_mp(n, &(x.clone() + a)) * w;
            let (s, c) = (x * (-2.0 * b)).sin_cos(&mut cc);
            (re + h.clone() * c, im + h * s)
        })
    };
    let mut order = quad.order.max(n + 1);
    let mut prev = lhs_at(order);
    let lhs = loop {
        if order * 2 > quad.max_order {
            return Err(Error::UnderResolved(format!("Laguerre-Hermite integral did not converge up to order {}", order)));
        }
        order *= 2;
        let next = lhs_at(order);
        let dre = (next.0.clone() - prev.0).to_f64(&mut mp::consts());
        let dim = (next.1.clone() - prev.1).to_f64(&mut mp::consts());
        if dre.hypot(dim) <= tol {
            break next;
        }
        prev = next;
    };
    let rhs = scale * (-(mp(b) * b)).exp(&mut cc) * laguerre_mp(n, &((mp(a) * a + mp(b) * b) * 2.0));
    let residual = (lhs.0.clone() - rhs.clone()).to_f64(&mut cc).hypot(lhs.1.to_f64(&mut cc));
    Ok(IdentityCheck {
        lhs_re: lhs.0.to_f64(&mut cc),
        lhs_im: lhs.1.to_f64(&mut cc),
        rhs_re: rhs.to_f64(&mut cc),
        rhs_im: 0.0,
        residual,
        order,
    })
}

/// `int exp(-p^2 x^2 + q x) dx` on the real line against `exp(q^2 / 4p^2) sqrt(pi) / p`.
///
/// `sqrt(pi)/p` is read with `p = sqrt(p^2)` on the principal branch, which is
/// the value of the convergent integral when `Re p^2 > 0`.
pub fn gaussian_integral_check(p: Complex64, q: Complex64, quad: &QuadratureSpec) -> Result<IdentityCheck> {
    let p2 = p * p;
    if p2.re <= 0.0 {
        return Err(Error::Divergent(format!("Re(p^2) = {} is not positive", p2.re)));
    }
    let w = p2.re;
    let sw = w.sqrt();
    // x = u / sqrt(w) moves the real part of p^2 into the Hermite weight.
    let f = |u: f64| (Complex64::new(0.0, -p2.im * u * u / w) + q * (u / sw)).exp() / sw;
    let lhs = hermite_1d(f, quad.order, quad.max_order.max(quad.order), 1e-12)?;
    let rhs = (q * q / (p2 * 4.0)).exp() * std::f64::consts::PI.sqrt() / p2.sqrt();
    Ok(IdentityCheck::new(lhs.value, rhs, lhs.order))
}

/// Both sides of the two double-sum reindexing identities on a finite table `a[k][n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubleSums<T> {
    /// `sum_k sum_{n>=k} A(k,n)`.
    pub form1: T,
    /// `sum_n sum_{k<=n} A(k,n)`.
    pub form2: T,
    /// `sum_n sum_k A(k,n)` over the whole table.
    pub full: T,
    /// `sum_n sum_{k<=n} A(k, n-k)` (anti-diagonals).
    pub diagonal: T,
}

impl<T: Ring> DoubleSums<T> {
    pub fn agree(&self) -> bool {
        self.form1 == self.form2 && self.full == self.diagonal
    }
}

pub fn reindex_double_sum<T: Ring>(table: &[Vec<T>]) -> DoubleSums<T> {
    let get = |k: usize, n: usize| table.get(k).and_then(|row| row.get(n)).cloned().unwrap_or_else(T::zero);
    let rows = table.len();
    let cols = table.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut form1 = T::zero();
    for k in 0..rows {
        for n in k..cols {
            form1 = form1 + get(k, n);
        }
    }
    let mut form2 = T::zero();
    for n in 0..cols {
        for k in 0..=n.min(rows.saturating_sub(1)) {
            if k < rows {
                form2 = form2 + get(k, n);
            }
        }
    }
    let mut full = T::zero();
    for n in 0..cols {
        for k in 0..rows {
            full = full + get(k, n);
        }
    }
    let mut diagonal = T::zero();
    for n in 0..(rows + cols) {
        for k in 0..=n {
            diagonal = diagonal + get(k, n - k);
        }
    }
    DoubleSums { form1, form2, full, diagonal }
}

/// `int L_n L_m e^{-z} dz` on `[0, inf)` by Gauss-Laguerre quadrature.
pub fn laguerre_overlap(n: usize, m: usize) -> f64 {
    let rule = gauss_laguerre(n + m + 2);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(z, w)| laguerre_value(n, z) * laguerre_value(m, z) * w)
        .sum()
}

/// `int H_n H_m e^{-x^2} dx` by Gauss-Hermite quadrature.
pub fn hermite_overlap(n: usize, m: usize) -> Result<f64> {
    let q = hermite_1d(|x| Complex64::new(hermite_value(n, &x) * hermite_value(m, &x), 0.0), (n + m) / 2 + 2, 512, 1e-10)?;
    Ok(q.value.re)
}

/// Residual of `(z/4 - z d^2/dz^2 - d/dz - c) [e^{-z/2} L_n(z)]`, returned as the
/// coefficients of `R(z)` where the residual equals `R(z) e^{-z/2}`.
pub fn radial_residual(n: i64, c: &Rational) -> Result<Vec<Rational>> {
    let l = PolySeq::laguerre(n)?.coeffs;
    // With f = e^{-z/2} L: f' = e^{-z/2}(L' - L/2), f'' = e^{-z/2}(L'' - L' + L/4).
    let d1 = uni_diff(&l);
    let d2 = uni_diff(&d1);
    let f1 = uni_add(&d1, &uni_scale(&l, &rat(-1, 2)));
    let f2 = uni_add(&uni_add(&d2, &uni_scale(&d1, &-Rational::one())), &uni_scale(&l, &rat(1, 4)));
    let r = uni_add(
        &uni_add(&uni_shift(&l, &rat(1, 4)), &uni_shift(&f2, &-Rational::one())),
        &uni_add(&uni_scale(&f1, &-Rational::one()), &uni_scale(&l, &-c.clone())),
    );
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{scalar, Scalar};

    #[test]
    fn low_orders() {
        assert_eq!(PolySeq::laguerre(0).unwrap().coeffs, vec![int(1)]);
        assert_eq!(PolySeq::laguerre(1).unwrap().coeffs, vec![int(1), int(-1)]);
        assert_eq!(PolySeq::laguerre(2).unwrap().coeffs, vec![int(1), int(-2), rat(1, 2)]);
        assert_eq!(PolySeq::hermite(2).unwrap().coeffs, vec![int(-2), int(0), int(4)]);
        assert_eq!(PolySeq::laguerre(-1), Err(Error::NegativeIndex(-1)));
        assert_eq!(PolySeq::hermite(-3), Err(Error::NegativeIndex(-3)));
    }

    #[test]
    fn hermite_at_imaginary_unit() {
        let h1 = PolySeq::hermite(1).unwrap();
        assert_eq!(h1.eval(&scalar(int(0), int(1))), scalar(int(0), int(2)));
        assert_eq!(hermite_value::<Scalar>(1, &scalar(int(0), int(1))), scalar(int(0), int(2)));
    }

    #[test]
    fn laguerre_at_zero_is_one() {
        for n in 0..=12 {
            assert_eq!(PolySeq::laguerre(n).unwrap().eval(&Rational::zero()), Rational::one());
        }
    }

    #[test]
    fn recurrence_value_matches_coefficients() {
        let x = rat(3, 7);
        for n in 0..=9 {
            assert_eq!(laguerre_value(n, &x), PolySeq::laguerre(n as i64).unwrap().eval(&x));
            assert_eq!(hermite_value(n, &x), PolySeq::hermite(n as i64).unwrap().eval(&x));
        }
    }

    fn generating_partial_sum(t: f64, x: f64, kmax: i32) -> f64 {
        let mut sum = 0.0;
        let mut fact = 1.0;
        for k in 0..=kmax {
            if k > 0 {
                fact *= k as f64;
            }
            sum += t.powi(k) * hermite_value(k as usize, &x) / fact;
        }
        sum
    }

    #[test]
    fn hermite_generating_function() {
        let (t, x) = (0.3f64, 0.7f64);
        let exact = (-t * t + 2.0 * t * x).exp();
        // Six terms leave a tail of about 1.4e-5; the tail itself is pinned by a long sum.
        let six = generating_partial_sum(t, x, 6);
        let tail = generating_partial_sum(t, x, 40) - six;
        assert!((six + tail - exact).abs() < 1e-14);
        assert!((six - exact).abs() < 2e-5);
        assert!((generating_partial_sum(t, x, 8) - exact).abs() < 1e-6);
    }

    #[test]
    fn appendix_examples() {
        let quad = QuadratureSpec::default();
        assert!(laguerre_hermite_identity_check(0, 0.0, 0.0, &quad).unwrap().residual < 1e-10);
        assert!(laguerre_hermite_identity_check(1, 0.5, 0.3, &quad).unwrap().residual < 1e-8);
        assert!(laguerre_hermite_identity_check(3, 1.0, 1.0, &quad).unwrap().residual < 1e-8);
        assert!(laguerre_hermite_identity_check(13, 1.0, 1.0, &quad).is_err());
        let one = Complex64::new(1.0, 0.0);
        let g = gaussian_integral_check(one, Complex64::new(2.0, 0.0), &quad).unwrap();
        assert!((g.lhs_re - std::f64::consts::E * std::f64::consts::PI.sqrt()).abs() < 1e-9);
        let g = gaussian_integral_check(one, Complex64::new(0.0, 2.0), &quad).unwrap();
        assert!((g.lhs_re - std::f64::consts::PI.sqrt() / std::f64::consts::E).abs() < 1e-9);
        assert!(matches!(
            gaussian_integral_check(Complex64::new(1.0, 1.0), one, &quad),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn double_sum_examples() {
        let ones: Vec<Vec<Rational>> =
            (0..4).map(|k| (0..4).map(|n| if k <= n { int(1) } else { int(0) }).collect()).collect();
        let s = reindex_double_sum(&ones);
        assert_eq!((s.form1.clone(), s.form2.clone()), (int(10), int(10)));
        assert!(s.agree());
        let empty: Vec<Vec<Rational>> = vec![];
        let s = reindex_double_sum(&empty);
        assert!(s.form1.is_zero() && s.form2.is_zero());
    }

    #[test]
    fn radial_equation() {
        for n in 0..6 {
            let c = rat(2 * n + 1, 2);
            assert!(radial_residual(n, &c).unwrap().iter().all(|x| x.is_zero()));
        }
        // The constant E/(2 hbar Omega) leaves (n + 1/2)/2 times the state.
        let r = radial_residual(0, &rat(1, 4)).unwrap();
        assert_eq!(r, vec![rat(1, 4)]);
    }
}
