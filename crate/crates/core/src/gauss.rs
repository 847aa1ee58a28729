//! Polynomial-times-Gaussian functions `P(z) exp(z^T M z + l.z + c)`.
//!
//! The class is closed under differentiation, multiplication and linear
//! changes of variables, so differential operators act on it exactly.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use num_traits::Zero;

use crate::diffop::DiffOperator;
use crate::error::{Error, Result};
use crate::poly::{Monomial, Poly, VarId};
use crate::scalar::{ComplexRing, Rational, Ring, Scalar, ToComplex64};

/// Quadratic form `z^T M z + l.z + c` over an ordered variable list.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadForm<C> {
    vars: Vec<VarId>,
    matrix: Vec<Vec<C>>,
    linear: Vec<C>,
    constant: C,
}

impl<C: Ring> QuadForm<C> {
    pub fn new(vars: Vec<VarId>, matrix: Vec<Vec<C>>, linear: Vec<C>, constant: C) -> Result<Self> {
        let n = vars.len();
        for (i, v) in vars.iter().enumerate() {
            if v.is_parameter() || vars[..i].contains(v) {
                return Err(Error::NotQuadratic(format!("bad variable list entry `{}`", v)));
            }
        }
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) || linear.len() != n {
            return Err(Error::NotQuadratic("dimension mismatch".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if matrix[i][j] != matrix[j][i] {
                    return Err(Error::NotQuadratic("matrix is not symmetric".into()));
                }
            }
        }
        Ok(Self { vars, matrix, linear, constant })
    }

    pub fn zero(vars: Vec<VarId>) -> Self {
        let n = vars.len();
        Self { vars, matrix: vec![vec![C::zero(); n]; n], linear: vec![C::zero(); n], constant: C::zero() }
    }

    /// Reads a polynomial of degree at most two in `vars`.
    pub fn from_poly(vars: Vec<VarId>, poly: &Poly<C>) -> Result<Self> {
        let mut form = Self::zero(vars);
        let half = C::from_ratio(1, 2);
        for (m, c) in poly.terms() {
            let mut idx = Vec::new();
            for (v, k) in m.vars() {
                let i = form.index_of(v).ok_or(Error::UnknownVariable(v))?;
                for _ in 0..k {
                    idx.push(i);
                }
            }
            match idx.as_slice() {
                [] => form.constant = form.constant.clone() + c.clone(),
                [i] => form.linear[*i] = form.linear[*i].clone() + c.clone(),
                [i, j] if i == j => form.matrix[*i][*i] = form.matrix[*i][*i].clone() + c.clone(),
                [i, j] => {
                    let h = c.clone() * half.clone();
                    form.matrix[*i][*j] = form.matrix[*i][*j].clone() + h.clone();
                    form.matrix[*j][*i] = form.matrix[*j][*i].clone() + h;
                }
                _ => return Err(Error::NotQuadratic(format!("term of degree {}", idx.len()))),
            }
        }
        Ok(form)
    }

    pub fn to_poly(&self) -> Poly<C> {
        let mut p = Poly::constant(self.constant.clone());
        let n = self.vars.len();
        for i in 0..n {
            p.add_term(Monomial::var(self.vars[i]), self.linear[i].clone());
            p.add_term(Monomial::pow(self.vars[i], 2), self.matrix[i][i].clone());
            for j in (i + 1)..n {
                let m = Monomial::var(self.vars[i]).mul(&Monomial::var(self.vars[j]));
                p.add_term(m, self.matrix[i][j].clone() * C::from_int(2));
            }
        }
        p
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn matrix(&self) -> &[Vec<C>] {
        &self.matrix
    }

    pub fn linear(&self) -> &[C] {
        &self.linear
    }

    pub fn constant(&self) -> &C {
        &self.constant
    }

    pub fn index_of(&self, v: VarId) -> Option<usize> {
        self.vars.iter().position(|&w| w == v)
    }

    /// `dE/dv` as a polynomial.
    pub fn gradient(&self, v: VarId) -> Result<Poly<C>> {
        let i = self.index_of(v).ok_or(Error::UnknownVariable(v))?;
        let mut g = Poly::constant(self.linear[i].clone());
        for (j, w) in self.vars.iter().enumerate() {
            g.add_term(Monomial::var(*w), self.matrix[i][j].clone() * C::from_int(2));
        }
        Ok(g)
    }

    fn union_vars(&self, other: &Self) -> Vec<VarId> {
        let mut vars = self.vars.clone();
        for v in &other.vars {
            if !vars.contains(v) {
                vars.push(*v);
            }
        }
        vars
    }

    pub fn add(&self, other: &Self) -> Self {
        let vars = self.union_vars(other);
        Self::from_poly(vars, &(self.to_poly() + other.to_poly())).expect("sum of quadratic forms")
    }

    pub fn map_coeffs<D: Ring>(&self, f: impl Fn(&C) -> D) -> QuadForm<D> {
        QuadForm {
            vars: self.vars.clone(),
            matrix: self.matrix.iter().map(|r| r.iter().map(&f).collect()).collect(),
            linear: self.linear.iter().map(&f).collect(),
            constant: f(&self.constant),
        }
    }
}

/// `prefactor * exp(exponent)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussPoly<C> {
    prefactor: Poly<C>,
    exponent: QuadForm<C>,
}

impl<C: Ring> GaussPoly<C> {
    pub fn new(prefactor: Poly<C>, exponent: QuadForm<C>) -> Result<Self> {
        if let Some(v) = prefactor
            .vars()
            .into_iter()
            .find(|v| !v.is_parameter() && exponent.index_of(*v).is_none())
        {
            return Err(Error::UnknownVariable(v));
        }
        Ok(Self { prefactor, exponent })
    }

    /// Builds from a prefactor and an exponent polynomial over `vars`.
    pub fn from_polys(vars: Vec<VarId>, prefactor: Poly<C>, exponent: &Poly<C>) -> Result<Self> {
        Self::new(prefactor, QuadForm::from_poly(vars, exponent)?)
    }

    pub fn prefactor(&self) -> &Poly<C> {
        &self.prefactor
    }

    pub fn exponent(&self) -> &QuadForm<C> {
        &self.exponent
    }

    pub fn vars(&self) -> &[VarId] {
        self.exponent.vars()
    }

    pub fn is_zero(&self) -> bool {
        self.prefactor.is_zero()
    }

    pub fn with_prefactor(&self, prefactor: Poly<C>) -> Self {
        Self { prefactor, exponent: self.exponent.clone() }
    }

    pub fn scale(&self, c: &C) -> Self {
        self.with_prefactor(self.prefactor.scale(c))
    }

    /// `P -> dP/dv + P dE/dv`.
    fn step(&self, p: &Poly<C>, v: VarId) -> Result<Poly<C>> {
        Ok(p.diff(v) + p * &self.exponent.gradient(v)?)
    }

    pub fn diff(&self, v: VarId, order: u32) -> Result<Self> {
        if self.exponent.index_of(v).is_none() {
            return Err(Error::UnknownVariable(v));
        }
        let mut p = self.prefactor.clone();
        for _ in 0..order {
            p = self.step(&p, v)?;
        }
        Ok(self.with_prefactor(p))
    }

    /// Applies a differential operator, sharing derivative prefactors across terms.
    pub fn apply(&self, op: &DiffOperator<C>) -> Result<Self> {
        let mut memo: HashMap<Monomial, Poly<C>> = HashMap::new();
        memo.insert(Monomial::one(), self.prefactor.clone());
        let mut out = Poly::zero();
        for (alpha, coeff) in op.terms() {
            for (v, _) in alpha.vars() {
                if self.exponent.index_of(v).is_none() {
                    return Err(Error::UnknownVariable(v));
                }
            }
            if let Some(v) = coeff
                .vars()
                .into_iter()
                .find(|v| !v.is_parameter() && self.exponent.index_of(*v).is_none())
            {
                return Err(Error::UnknownVariable(v));
            }
            let d = self.derivative_prefactor(alpha, &mut memo)?;
            out = out + coeff * &d;
        }
        Ok(self.with_prefactor(out))
    }

    fn derivative_prefactor(&self, alpha: &Monomial, memo: &mut HashMap<Monomial, Poly<C>>) -> Result<Poly<C>> {
        if let Some(p) = memo.get(alpha) {
            return Ok(p.clone());
        }
        let (v, k) = alpha.vars().next().expect("non-trivial multi-index");
        let mut lower = *alpha;
        lower.set_exp(v, k - 1);
        let base = self.derivative_prefactor(&lower, memo)?;
        let p = self.step(&base, v)?;
        memo.insert(*alpha, p.clone());
        Ok(p)
    }

    /// Sum of two functions sharing one exponent.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.exponent != other.exponent {
            return Err(Error::ExponentMismatch("exponents differ".into()));
        }
        Ok(self.with_prefactor(&self.prefactor + &other.prefactor))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-C::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { prefactor: &self.prefactor * &other.prefactor, exponent: self.exponent.add(&other.exponent) }
    }

    /// Assigns values to some variables or parameters; assigned variables leave the list.
    pub fn assign(&self, values: &BTreeMap<VarId, C>) -> Result<Self> {
        let vars: Vec<VarId> = self.vars().iter().copied().filter(|v| !values.contains_key(v)).collect();
        let exponent = QuadForm::from_poly(vars, &self.exponent.to_poly().assign(values))?;
        Self::new(self.prefactor.assign(values), exponent)
    }

    /// Linear (or affine) change of variables `v -> subs[v]`, landing on `new_vars`.
    pub fn compose_linear(&self, subs: &BTreeMap<VarId, Poly<C>>, new_vars: Vec<VarId>) -> Result<Self> {
        if let Some((v, _)) = subs.iter().find(|(_, p)| p.degree() > 1) {
            return Err(Error::NotQuadratic(format!("substitution for `{}` is not affine", v)));
        }
        let exponent = QuadForm::from_poly(new_vars, &self.exponent.to_poly().substitute(subs))?;
        Self::new(self.prefactor.substitute(subs), exponent)
    }

    pub fn map_coeffs<D: Ring>(&self, f: impl Fn(&C) -> D + Copy) -> GaussPoly<D> {
        GaussPoly { prefactor: self.prefactor.map_coeffs(f), exponent: self.exponent.map_coeffs(f) }
    }
}

impl<C: ComplexRing> GaussPoly<C> {
    pub fn conj(&self) -> Self {
        Self { prefactor: self.prefactor.conj(), exponent: self.exponent.map_coeffs(|c| c.conj()) }
    }
}

impl<C: Ring + ToComplex64> GaussPoly<C> {
    pub fn eval_c64(&self, value: impl Fn(VarId) -> Complex64 + Copy) -> Complex64 {
        self.prefactor.eval_c64(value) * self.exponent.to_poly().eval_c64(value).exp()
    }

    pub fn to_c64(&self) -> GaussPoly<Complex64> {
        self.map_coeffs(|c| c.to_c64())
    }
}

impl GaussPoly<Rational> {
    pub fn to_scalar(&self) -> GaussPoly<Scalar> {
        self.map_coeffs(|c| Scalar::new(c.clone(), Rational::zero()))
    }
}

impl GaussPoly<Scalar> {
    /// Real and imaginary parts when the exponent is real.
    pub fn split_re_im(&self) -> Option<(GaussPoly<Rational>, GaussPoly<Rational>)> {
        let exponent = self.exponent.to_poly();
        let (re_e, im_e) = exponent.split_re_im();
        if !im_e.is_zero() {
            return None;
        }
        let exponent = QuadForm::from_poly(self.vars().to_vec(), &re_e).ok()?;
        let (re, im) = self.prefactor.split_re_im();
        Some((
            GaussPoly { prefactor: re, exponent: exponent.clone() },
            GaussPoly { prefactor: im, exponent },
        ))
    }

    pub fn has_real_coefficients(&self) -> bool {
        self.prefactor.terms().all(|(_, c)| c.im.is_zero())
            && self.exponent.to_poly().terms().all(|(_, c)| c.im.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn gaussian() -> GaussPoly<Rational> {
        let vars = vec![VarId::Q, VarId::X];
        let e = Poly::var(VarId::Q).pow(2).scale(&rat(-1, 2)) + (Poly::var(VarId::Q) * Poly::var(VarId::X)).scale(&int(3))
            - Poly::var(VarId::X).pow(2);
        GaussPoly::from_polys(vars, Poly::var(VarId::X), &e).unwrap()
    }

    #[test]
    fn derivatives_commute() {
        let g = gaussian();
        let a = g.diff(VarId::Q, 1).unwrap().diff(VarId::X, 2).unwrap();
        let b = g.diff(VarId::X, 2).unwrap().diff(VarId::Q, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn apply_matches_repeated_diff() {
        let g = gaussian();
        let mut op = DiffOperator::zero();
        op.add_term(Monomial::from_pairs(&[(VarId::Q, 2), (VarId::X, 1)]), Poly::var(VarId::X));
        let direct = g.diff(VarId::Q, 2).unwrap().diff(VarId::X, 1).unwrap();
        let expected = direct.with_prefactor(direct.prefactor() * &Poly::var(VarId::X));
        assert_eq!(g.apply(&op).unwrap(), expected);
    }

    #[test]
    fn numeric_derivative_agrees() {
        let g = gaussian().to_c64();
        let d = g.diff(VarId::Q, 1).unwrap();
        let at = |q: f64| move |v: VarId| Complex64::new(if v == VarId::Q { q } else { 0.3 }, 0.0);
        let h = 1e-5;
        let fd = (g.eval_c64(at(0.2 + h)) - g.eval_c64(at(0.2 - h))) / (2.0 * h);
        assert!((fd - d.eval_c64(at(0.2))).norm() < 1e-8);
    }

    #[test]
    fn unknown_variable_errors() {
        let g = gaussian();
        assert_eq!(g.diff(VarId::P1, 1), Err(Error::UnknownVariable(VarId::P1)));
        assert!(GaussPoly::new(Poly::var(VarId::P1), QuadForm::<Rational>::zero(vec![VarId::Q])).is_err());
        let cubic = Poly::<Rational>::var(VarId::Q).pow(3);
        assert!(QuadForm::from_poly(vec![VarId::Q], &cubic).is_err());
    }

    #[test]
    fn quadform_round_trip() {
        let g = gaussian();
        let p = g.exponent().to_poly();
        assert_eq!(QuadForm::from_poly(vec![VarId::Q, VarId::X], &p).unwrap().to_poly(), p);
    }
}
