//! Linear differential operators with polynomial coefficients, normal ordered
//! as `sum_alpha c_alpha(z) d^alpha`.

use std::collections::BTreeMap;
use std::ops::{Add, Sub};

use num_traits::Zero;

use crate::poly::{Monomial, Poly, VarId};
use crate::scalar::{Rational, Ring, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct DiffOperator<C> {
    terms: BTreeMap<Monomial, Poly<C>>,
}

/// All `gamma <= alpha` together with the multi-binomial `C(alpha, gamma)`.
pub(crate) fn sub_indices(alpha: &Monomial) -> Vec<(Monomial, u64)> {
    let mut out = vec![(Monomial::one(), 1u64)];
    for (v, k) in alpha.vars() {
        let mut next = Vec::with_capacity(out.len() * (k as usize + 1));
        for (g, b) in &out {
            for j in 0..=k {
                let mut g2 = *g;
                g2.set_exp(v, j);
                next.push((g2, b * binomial(k as u64, j as u64)));
            }
        }
        out = next;
    }
    out
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

impl<C: Ring> DiffOperator<C> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn identity() -> Self {
        Self::multiplication(Poly::constant(C::one()))
    }

    /// Multiplication by `p`.
    pub fn multiplication(p: Poly<C>) -> Self {
        let mut op = Self::zero();
        op.add_term(Monomial::one(), p);
        op
    }

    /// `d/dv`.
    pub fn derivative(v: VarId) -> Self {
        let mut op = Self::zero();
        op.add_term(Monomial::var(v), Poly::constant(C::one()));
        op
    }

    pub fn add_term(&mut self, alpha: Monomial, coeff: Poly<C>) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(alpha).or_insert_with(Poly::zero);
        *entry = std::mem::replace(entry, Poly::zero()) + coeff;
        if entry.is_zero() {
            self.terms.remove(&alpha);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Poly<C>)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest total derivative order.
    pub fn order(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Poly<C>) -> Self {
        let mut op = Self::zero();
        for (a, p) in &self.terms {
            op.add_term(*a, p * c);
        }
        op
    }

    /// `self ∘ other`, brought back to normal order with the Leibniz rule.
    pub fn compose(&self, other: &Self) -> Self {
        let mut op = Self::zero();
        let mut derivs: BTreeMap<(Monomial, Monomial), Poly<C>> = BTreeMap::new();
        for (alpha, c) in &self.terms {
            let subs = sub_indices(alpha);
            for (beta, d) in &other.terms {
                for (gamma, binom) in &subs {
                    let dg = derivs
                        .entry((*beta, *gamma))
                        .or_insert_with(|| d.diff_multi(gamma))
                        .clone();
                    if dg.is_zero() {
                        continue;
                    }
                    let rest = alpha.checked_div(gamma).expect("gamma <= alpha").mul(beta);
                    let coeff = (c * &dg).scale(&C::from_int(*binom as i64));
                    op.add_term(rest, coeff);
                }
            }
        }
        op
    }

    pub fn apply(&self, f: &Poly<C>) -> Poly<C> {
        let mut out = Poly::zero();
        for (alpha, c) in &self.terms {
            let d = f.diff_multi(alpha);
            if !d.is_zero() {
                out = out + c * &d;
            }
        }
        out
    }

    /// Substitutes constants into the coefficient polynomials.
    pub fn assign(&self, values: &BTreeMap<VarId, C>) -> Self {
        let mut op = Self::zero();
        for (a, p) in &self.terms {
            op.add_term(*a, p.assign(values));
        }
        op
    }

    pub fn map_coeffs<D: Ring>(&self, f: impl Fn(&C) -> D + Copy) -> DiffOperator<D> {
        let mut op = DiffOperator::zero();
        for (a, p) in &self.terms {
            op.add_term(*a, p.map_coeffs(f));
        }
        op
    }
}

impl DiffOperator<Scalar> {
    /// Operators with the real and imaginary coefficient parts.
    pub fn split_re_im(&self) -> (DiffOperator<Rational>, DiffOperator<Rational>) {
        (self.map_coeffs(|c| c.re.clone()), self.map_coeffs(|c| c.im.clone()))
    }
}

impl<C: Ring> Add for DiffOperator<C> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, p) in rhs.terms {
            self.add_term(a, p);
        }
        self
    }
}

impl<C: Ring> Sub for DiffOperator<C> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, p) in rhs.terms {
            self.add_term(a, -p);
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn derivative_after_multiplication() {
        // d/dq ∘ q = q d/dq + 1
        let d = DiffOperator::<Rational>::derivative(VarId::Q);
        let q = DiffOperator::multiplication(Poly::var(VarId::Q));
        let lhs = d.compose(&q);
        let rhs = q.compose(&d) + DiffOperator::identity();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn composition_matches_sequential_application() {
        let a = DiffOperator::multiplication(Poly::<Rational>::var(VarId::X).pow(2))
            .compose(&DiffOperator::derivative(VarId::Q))
            + DiffOperator::derivative(VarId::X);
        let b = DiffOperator::derivative(VarId::X)
            .compose(&DiffOperator::derivative(VarId::X))
            .scale(&Poly::var(VarId::Q));
        let f = Poly::var(VarId::Q).pow(3) * Poly::var(VarId::X).pow(4) + Poly::constant(int(5));
        assert_eq!(a.compose(&b).apply(&f), a.apply(&b.apply(&f)));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(sub_indices(&Monomial::from_pairs(&[(VarId::Q, 2), (VarId::X, 1)])).len(), 6);
    }
}
