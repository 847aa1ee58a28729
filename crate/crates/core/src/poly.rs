//! Sparse multivariate polynomials over a fixed variable alphabet.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ComplexRing, Rational, RenderCoeff, Ring, ToComplex64};

/// Symbols available to polynomials.
///
/// `Q1`/`Q2` are the coordinates of the equal-frequency normal form; `Hbar`
/// and `T` are inert parameters that never take part in brackets.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum VarId {
    Q,
    Pq,
    X,
    Px,
    X1,
    P1,
    X2,
    P2,
    Q1,
    Q2,
    Hbar,
    T,
}

pub const NUM_VARS: usize = 12;

impl VarId {
    pub const ALL: [VarId; NUM_VARS] = [
        VarId::Q,
        VarId::Pq,
        VarId::X,
        VarId::Px,
        VarId::X1,
        VarId::P1,
        VarId::X2,
        VarId::P2,
        VarId::Q1,
        VarId::Q2,
        VarId::Hbar,
        VarId::T,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            VarId::Q => "q",
            VarId::Pq => "p_q",
            VarId::X => "x",
            VarId::Px => "p_x",
            VarId::X1 => "X1",
            VarId::P1 => "P1",
            VarId::X2 => "X2",
            VarId::P2 => "P2",
            VarId::Q1 => "Q1",
            VarId::Q2 => "Q2",
            VarId::Hbar => "hbar",
            VarId::T => "t",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|v| v.name() == name)
    }

    /// Inert parameters (`hbar`, `t`).
    pub fn is_parameter(self) -> bool {
        matches!(self, VarId::Hbar | VarId::T)
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exponent vector, one slot per [`VarId`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial([u8; NUM_VARS]);

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(v: VarId) -> Self {
        Self::pow(v, 1)
    }

    pub fn pow(v: VarId, k: u8) -> Self {
        let mut e = [0u8; NUM_VARS];
        e[v.index()] = k;
        Monomial(e)
    }

    pub fn from_pairs(pairs: &[(VarId, u8)]) -> Self {
        let mut m = Self::one();
        for &(v, k) in pairs {
            m.0[v.index()] += k;
        }
        m
    }

    pub fn exp(&self, v: VarId) -> u8 {
        self.0[v.index()]
    }

    pub fn set_exp(&mut self, v: VarId, k: u8) {
        self.0[v.index()] = k;
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0.iter()) {
            *a = a.checked_add(*b).expect("monomial exponent overflow");
        }
        Monomial(e)
    }

    /// `self / other` when every exponent allows it.
    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0.iter()) {
            *a = a.checked_sub(*b)?;
        }
        Some(Monomial(e))
    }

    pub fn divides(&self, other: &Self) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// Variables with non-zero exponent.
    pub fn vars(&self) -> impl Iterator<Item = (VarId, u8)> + '_ {
        VarId::ALL.iter().copied().filter_map(move |v| {
            let k = self.exp(v);
            (k > 0).then_some((v, k))
        })
    }

    /// Falling-factorial factor and remaining monomial of `d^k/dv^k`.
    pub fn diff(&self, v: VarId, k: u8) -> Option<(u64, Self)> {
        let e = self.exp(v);
        if e < k {
            return None;
        }
        let factor = ((e - k + 1)..=e).map(|j| j as u64).product::<u64>();
        let mut m = *self;
        m.0[v.index()] = e - k;
        Some((factor, m))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .vars()
            .map(|(v, k)| if k == 1 { v.name().to_string() } else { format!("{}^{}", v, k) })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

/// Sparse polynomial with coefficients in `C`. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<C> {
    terms: BTreeMap<Monomial, C>,
}

impl<C: Ring> Poly<C> {
    pub fn constant(c: C) -> Self {
        Self::monomial(Monomial::one(), c)
    }

    pub fn var(v: VarId) -> Self {
        Self::monomial(Monomial::var(v), C::one())
    }

    pub fn monomial(m: Monomial, c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn from_terms(iter: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in iter {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&Monomial::one())
    }

    /// Total degree; `0` for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Total degree counting only the listed variables.
    pub fn degree_in(&self, vars: &[VarId]) -> u32 {
        self.terms
            .keys()
            .map(|m| vars.iter().map(|&v| m.exp(v) as u32).sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.terms.keys().flat_map(|m| m.vars().map(|(v, _)| v)).collect()
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_terms(self.terms.iter().map(|(m, a)| (*m, a.clone() * c.clone())))
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, a)| (k.mul(m), a.clone() * c.clone())))
    }

    pub fn pow(&self, k: u32) -> Self {
        self.pow_u32(k)
    }

    pub fn diff(&self, v: VarId) -> Self {
        self.diff_n(v, 1)
    }

    pub fn diff_n(&self, v: VarId, k: u8) -> Self {
        if k == 0 {
            return self.clone();
        }
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if let Some((f, m2)) = m.diff(v, k) {
                out.add_term(m2, c.clone() * C::from_int(f as i64));
            }
        }
        out
    }

    /// Mixed derivative `d^alpha` for a multi-index encoded as a monomial.
    pub fn diff_multi(&self, alpha: &Monomial) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if !alpha.divides(m) {
                continue;
            }
            let mut factor: u64 = 1;
            let mut rest = *m;
            for (v, k) in alpha.vars() {
                let (f, r) = rest.diff(v, k).expect("divisibility checked");
                factor *= f;
                rest = r;
            }
            out.add_term(rest, c.clone() * C::from_int(factor as i64));
        }
        out
    }

    /// Simultaneous substitution `v -> poly` for every entry of `subs`.
    pub fn substitute(&self, subs: &BTreeMap<VarId, Poly<C>>) -> Self {
        let mut cache: HashMap<(VarId, u8), Poly<C>> = HashMap::new();
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut kept = Monomial::one();
            let mut acc = Self::constant(c.clone());
            for (v, k) in m.vars() {
                match subs.get(&v) {
                    Some(target) => {
                        let power = cache
                            .entry((v, k))
                            .or_insert_with(|| target.pow_u32(k as u32))
                            .clone();
                        acc = acc * power;
                    }
                    None => kept.set_exp(v, k),
                }
            }
            out = out + acc.mul_monomial(&kept, &C::one());
        }
        out
    }

    pub fn substitute_one(&self, v: VarId, target: &Poly<C>) -> Self {
        let mut subs = BTreeMap::new();
        subs.insert(v, target.clone());
        self.substitute(&subs)
    }

    /// Substitutes constants for some variables.
    pub fn assign(&self, values: &BTreeMap<VarId, C>) -> Self {
        let subs = values.iter().map(|(v, c)| (*v, Self::constant(c.clone()))).collect();
        self.substitute(&subs)
    }

    /// Full evaluation; errors when a variable has no value.
    pub fn eval_exact(&self, values: &BTreeMap<VarId, C>) -> Result<C> {
        let mut total = C::zero();
        for (m, c) in &self.terms {
            let mut acc = c.clone();
            for (v, k) in m.vars() {
                let x = values.get(&v).ok_or(Error::UnknownVariable(v))?;
                acc = acc * x.pow_u32(k as u32);
            }
            total = total + acc;
        }
        Ok(total)
    }

    /// Evaluation into any ring `T` the coefficients map into.
    pub fn eval_with<T: Ring>(&self, coeff: impl Fn(&C) -> T, value: impl Fn(VarId) -> T) -> T {
        let mut cache: HashMap<(VarId, u8), T> = HashMap::new();
        let mut total = T::zero();
        for (m, c) in &self.terms {
            let mut acc = coeff(c);
            for (v, k) in m.vars() {
                let p = cache.entry((v, k)).or_insert_with(|| value(v).pow_u32(k as u32));
                acc = acc * p.clone();
            }
            total = total + acc;
        }
        total
    }

    pub fn map_coeffs<D: Ring>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (*m, f(c))))
    }

    /// Exact division by a single variable; `None` if some term lacks it.
    pub fn divide_by_var(&self, v: VarId) -> Option<Self> {
        let mv = Monomial::var(v);
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            out.insert(m.checked_div(&mv)?, c.clone());
        }
        Some(Poly { terms: out })
    }

    /// Splits off the coefficient polynomials of powers of `v`.
    pub fn collect_in(&self, v: VarId) -> BTreeMap<u8, Self> {
        let mut out: BTreeMap<u8, Self> = BTreeMap::new();
        for (m, c) in &self.terms {
            let k = m.exp(v);
            let mut rest = *m;
            rest.set_exp(v, 0);
            out.entry(k).or_insert_with(Self::zero).add_term(rest, c.clone());
        }
        out
    }

    pub fn max_abs_coeff(&self) -> f64
    where
        C: ToComplex64,
    {
        self.terms.values().map(|c| c.to_c64().norm()).fold(0.0, f64::max)
    }
}

impl<C: Ring + ToComplex64> Poly<C> {
    pub fn eval_c64(&self, value: impl Fn(VarId) -> Complex64) -> Complex64 {
        self.eval_with(|c| c.to_c64(), value)
    }

    pub fn to_c64(&self) -> Poly<Complex64> {
        self.map_coeffs(|c| c.to_c64())
    }
}

impl<C: ComplexRing> Poly<C> {
    /// Coefficient-wise complex conjugation (variables are treated as real).
    pub fn conj(&self) -> Self {
        self.map_coeffs(|c| c.conj())
    }
}

impl Poly<crate::scalar::Scalar> {
    /// Real and imaginary coefficient parts.
    pub fn split_re_im(&self) -> (Poly<Rational>, Poly<Rational>) {
        (self.map_coeffs(|c| c.re.clone()), self.map_coeffs(|c| c.im.clone()))
    }

    pub fn from_re_im(re: &Poly<Rational>, im: &Poly<Rational>) -> Self {
        let mut out = re.map_coeffs(|r| crate::scalar::scalar(r.clone(), Rational::zero()));
        for (m, c) in im.terms() {
            out.add_term(*m, crate::scalar::scalar(Rational::zero(), c.clone()));
        }
        out
    }
}

impl<C: Ring> Zero for Poly<C> {
    fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<C: Ring> One for Poly<C> {
    fn one() -> Self {
        Self::constant(C::one())
    }
}

impl<C: Ring> Add for Poly<C> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl<C: Ring> Add<&Poly<C>> for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: &Poly<C>) -> Poly<C> {
        self.clone() + rhs.clone()
    }
}

impl<C: Ring> Sub for Poly<C> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (m, c) in rhs.terms {
            self.add_term(m, -c);
        }
        self
    }
}

impl<C: Ring> Sub<&Poly<C>> for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: &Poly<C>) -> Poly<C> {
        self.clone() - rhs.clone()
    }
}

impl<C: Ring> Neg for Poly<C> {
    type Output = Self;
    fn neg(self) -> Self {
        Poly { terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect() }
    }
}

impl<C: Ring> Mul for Poly<C> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<C: Ring> Mul<&Poly<C>> for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Ring> Ring for Poly<C> {
    fn from_rational(r: &Rational) -> Self {
        Self::constant(C::from_rational(r))
    }
}

impl<C: ComplexRing> ComplexRing for Poly<C> {
    fn imag_unit() -> Self {
        Self::constant(C::imag_unit())
    }
    fn conj(&self) -> Self {
        Poly::conj(self)
    }
}

impl<C: Ring + RenderCoeff> fmt::Display for Poly<C> {
    /// Terms by descending total degree, then descending exponent order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut ordered: Vec<(&Monomial, &C)> = self.terms.iter().collect();
        ordered.sort_by(|a, b| b.0.degree().cmp(&a.0.degree()).then(b.0.cmp(a.0)));
        let mut out = String::new();
        for (i, (m, c)) in ordered.into_iter().enumerate() {
            let coeff = c.render();
            let (negative, magnitude) = match coeff.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, coeff),
            };
            let body = if m.is_one() {
                magnitude
            } else if magnitude == "1" {
                m.to_string()
            } else {
                format!("{}*{}", magnitude, m)
            };
            match (i, negative) {
                (0, false) => out.push_str(&body),
                (0, true) => {
                    out.push('-');
                    out.push_str(&body);
                }
                (_, false) => {
                    out.push_str(" + ");
                    out.push_str(&body);
                }
                (_, true) => {
                    out.push_str(" - ");
                    out.push_str(&body);
                }
            }
        }
        f.write_str(&out)
    }
}

/// Convenience constructor for a polynomial `c * v`.
pub fn term<C: Ring>(c: C, v: VarId) -> Poly<C> {
    Poly::monomial(Monomial::var(v), c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn q() -> Poly<Rational> {
        Poly::var(VarId::Q)
    }
    fn x() -> Poly<Rational> {
        Poly::var(VarId::X)
    }

    #[test]
    fn arithmetic_and_zero_pruning() {
        let a = q() + x();
        let b = q() - x();
        let prod = &a * &b;
        assert_eq!(prod, q().pow(2) - x().pow(2));
        assert!((a.clone() - a).is_zero());
    }

    #[test]
    fn derivative_of_power() {
        let p = q().pow(3).scale(&rat(1, 2));
        assert_eq!(p.diff(VarId::Q), q().pow(2).scale(&rat(3, 2)));
        assert_eq!(p.diff_n(VarId::Q, 3), Poly::constant(int(3)));
        assert!(p.diff_n(VarId::Q, 4).is_zero());
        let m = &q().pow(2) * &x().pow(3);
        assert_eq!(
            m.diff_multi(&Monomial::from_pairs(&[(VarId::Q, 1), (VarId::X, 2)])),
            (&q() * &x()).scale(&int(12))
        );
    }

    #[test]
    fn substitution_is_simultaneous() {
        let p = &q() * &x().pow(2);
        let mut subs = BTreeMap::new();
        subs.insert(VarId::Q, x());
        subs.insert(VarId::X, q());
        assert_eq!(p.substitute(&subs), &x() * &q().pow(2));
    }

    #[test]
    fn display_uses_exact_fractions() {
        let p = Poly::var(VarId::Pq) * x() + Poly::var(VarId::Px).pow(2).scale(&rat(1, 2))
            - q().pow(2).scale(&int(2));
        assert_eq!(p.to_string(), "-2*q^2 + p_q*x + 1/2*p_x^2");
        assert_eq!(Poly::<Rational>::zero().to_string(), "0");
    }

    #[test]
    fn divide_by_hbar() {
        let h = Poly::<Rational>::var(VarId::Hbar);
        let p = &h * &q() + h.pow(2);
        assert_eq!(p.divide_by_var(VarId::Hbar).unwrap(), q() + h);
        assert!((q() + Poly::var(VarId::Hbar)).divide_by_var(VarId::Hbar).is_none());
    }

    #[test]
    fn evaluation_routes_agree() {
        let p = &q().pow(2) * &x() + Poly::constant(rat(1, 3));
        let mut vals = BTreeMap::new();
        vals.insert(VarId::Q, int(2));
        vals.insert(VarId::X, rat(1, 2));
        assert_eq!(p.eval_exact(&vals).unwrap(), rat(7, 3));
        let f = p.eval_c64(|v| match v {
            VarId::Q => Complex64::new(2.0, 0.0),
            _ => Complex64::new(0.5, 0.0),
        });
        assert!((f.re - 7.0 / 3.0).abs() < 1e-15);
        vals.remove(&VarId::X);
        assert_eq!(p.eval_exact(&vals), Err(Error::UnknownVariable(VarId::X)));
    }
}
