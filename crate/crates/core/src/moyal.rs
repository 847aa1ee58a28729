//! Poisson bracket, Moyal star product and the Bopp shift operators.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::diffop::{binomial, DiffOperator};
use crate::error::{Error, Result};
use crate::poly::{Monomial, Poly, VarId};
use crate::scalar::{ComplexRing, Rational, Ring};

/// Ordered list of canonical `(coordinate, momentum)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSignature {
    pairs: Vec<(VarId, VarId)>,
}

impl PairSignature {
    pub fn new(pairs: Vec<(VarId, VarId)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &(a, b) in &pairs {
            for v in [a, b] {
                if v.is_parameter() {
                    return Err(Error::InvalidSignature(format!("`{}` is a parameter", v)));
                }
                if !seen.insert(v) {
                    return Err(Error::InvalidSignature(format!("`{}` appears twice", v)));
                }
            }
        }
        Ok(Self { pairs })
    }

    /// `(q, p_q), (x, p_x)`.
    pub fn pu() -> Self {
        Self { pairs: vec![(VarId::Q, VarId::Pq), (VarId::X, VarId::Px)] }
    }

    /// `(X1, P1), (X2, P2)`.
    pub fn oscillator() -> Self {
        Self { pairs: vec![(VarId::X1, VarId::P1), (VarId::X2, VarId::P2)] }
    }

    /// `(Q1, P1), (Q2, P2)`.
    pub fn equal_frequency() -> Self {
        Self { pairs: vec![(VarId::Q1, VarId::P1), (VarId::Q2, VarId::P2)] }
    }

    pub fn pairs(&self) -> &[(VarId, VarId)] {
        &self.pairs
    }

    pub fn coordinates(&self) -> Vec<VarId> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn momenta(&self) -> Vec<VarId> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.pairs.iter().any(|&(a, b)| a == v || b == v)
    }

    /// Rejects polynomials using variables outside the signature (parameters excepted).
    pub fn check<C: Ring>(&self, f: &Poly<C>) -> Result<()> {
        match f.vars().into_iter().find(|v| !v.is_parameter() && !self.contains(*v)) {
            Some(v) => Err(Error::SignatureMismatch(v)),
            None => Ok(()),
        }
    }
}

/// `{f, g} = sum_i (df/dq_i dg/dp_i - df/dp_i dg/dq_i)`.
pub fn poisson_bracket<C: Ring>(f: &Poly<C>, g: &Poly<C>, sig: &PairSignature) -> Result<Poly<C>> {
    sig.check(f)?;
    sig.check(g)?;
    let mut out = Poly::zero();
    for &(q, p) in sig.pairs() {
        out = out + &f.diff(q) * &g.diff(p) - &f.diff(p) * &g.diff(q);
    }
    Ok(out)
}

/// `i hbar / 2` as a polynomial in the `hbar` symbol.
fn half_i_hbar<C: ComplexRing>() -> Poly<C> {
    Poly::var(VarId::Hbar).scale(&(C::imag_unit() * C::from_ratio(1, 2)))
}

/// Moyal product `f ⋆ g`, the exponential bidifferential series truncated where
/// derivatives vanish. `hbar` stays symbolic.
pub fn moyal_star<C: ComplexRing>(f: &Poly<C>, g: &Poly<C>, sig: &PairSignature) -> Result<Poly<C>> {
    sig.check(f)?;
    sig.check(g)?;
    let a = half_i_hbar::<C>();
    let mut layer: Vec<(Poly<C>, Poly<C>, Poly<C>)> = vec![(Poly::constant(C::one()), f.clone(), g.clone())];
    for &(q, p) in sig.pairs() {
        let mut next = Vec::new();
        for (coeff, fa, gb) in &layer {
            let kmax = fa.degree_in(&[q, p]).min(gb.degree_in(&[q, p]));
            let mut a_pow = Poly::constant(C::one());
            let mut fact = Rational::from_integer(1.into());
            for k in 0..=kmax {
                if k > 0 {
                    a_pow = &a_pow * &a;
                    fact *= Rational::from_integer(k.into());
                }
                for m in 0..=k {
                    let df = fa.diff_n(q, (k - m) as u8).diff_n(p, m as u8);
                    if df.is_zero() {
                        continue;
                    }
                    let dg = gb.diff_n(q, m as u8).diff_n(p, (k - m) as u8);
                    if dg.is_zero() {
                        continue;
                    }
                    let sign = if m % 2 == 0 { 1 } else { -1 };
                    let c = Rational::from_integer((sign * binomial(k as u64, m as u64) as i64).into())
                        / &fact;
                    next.push((&(coeff * &a_pow) * &Poly::constant(C::from_rational(&c)), df, dg));
                }
            }
        }
        layer = next;
    }
    let mut out = Poly::zero();
    for (c, fa, gb) in layer {
        out = out + &(&c * &fa) * &gb;
    }
    Ok(out)
}

/// `[f, g]⋆ = (f ⋆ g - g ⋆ f) / (i hbar)`, divided exactly by the `hbar` symbol.
pub fn moyal_bracket<C: ComplexRing>(f: &Poly<C>, g: &Poly<C>, sig: &PairSignature) -> Result<Poly<C>> {
    let diff = moyal_star(f, g, sig)? - moyal_star(g, f, sig)?;
    let reduced = diff
        .divide_by_var(VarId::Hbar)
        .ok_or_else(|| Error::NotDivisibleByHbar(format!("{} terms without hbar", diff.len())))?;
    Ok(reduced.scale(&(-C::imag_unit())))
}

/// Left Bopp operator: `bopp_operator(h)` applied to `rho` equals `h ⋆ rho`.
///
/// Built as the Weyl-symmetrised substitution `q -> q + (i hbar/2) d/dp`,
/// `p -> p - (i hbar/2) d/dq` in every pair.
pub fn bopp_operator<C: ComplexRing>(h: &Poly<C>, sig: &PairSignature) -> Result<DiffOperator<C>> {
    bopp_with_sign(h, sig, C::one())
}

/// Right Bopp operator: applied to `rho` it equals `rho ⋆ h`.
pub fn bopp_operator_right<C: ComplexRing>(h: &Poly<C>, sig: &PairSignature) -> Result<DiffOperator<C>> {
    bopp_with_sign(h, sig, -C::one())
}

fn bopp_with_sign<C: ComplexRing>(h: &Poly<C>, sig: &PairSignature, sign: C) -> Result<DiffOperator<C>> {
    sig.check(h)?;
    let a = half_i_hbar::<C>().scale(&sign);
    let mut cache: BTreeMap<(usize, u8, u8), DiffOperator<C>> = BTreeMap::new();
    let mut out = DiffOperator::zero();
    for (m, c) in h.terms() {
        let mut params = Monomial::one();
        for (v, k) in m.vars() {
            if v.is_parameter() {
                params.set_exp(v, k);
            }
        }
        let mut op = DiffOperator::multiplication(Poly::monomial(params, c.clone()));
        for (i, &(q, p)) in sig.pairs().iter().enumerate() {
            let (j, k) = (m.exp(q), m.exp(p));
            if j == 0 && k == 0 {
                continue;
            }
            let sym = cache
                .entry((i, j, k))
                .or_insert_with(|| weyl_symmetrized(q, p, j, k, &a))
                .clone();
            op = op.compose(&sym);
        }
        out = out + op;
    }
    Ok(out)
}

/// Average over all orderings of `j` copies of `A = q + a d/dp` and `k` of `B = p - a d/dq`.
fn weyl_symmetrized<C: ComplexRing>(q: VarId, p: VarId, j: u8, k: u8, a: &Poly<C>) -> DiffOperator<C> {
    let shift_a = DiffOperator::multiplication(Poly::var(q)) + {
        let mut d = DiffOperator::zero();
        d.add_term(Monomial::var(p), a.clone());
        d
    };
    let shift_b = DiffOperator::multiplication(Poly::var(p)) - {
        let mut d = DiffOperator::zero();
        d.add_term(Monomial::var(q), a.clone());
        d
    };
    let n = (j + k) as usize;
    let mut total = DiffOperator::zero();
    let mut count: i64 = 0;
    for mask in 0u64..(1u64 << n) {
        if mask.count_ones() as u8 != j {
            continue;
        }
        let mut word = DiffOperator::identity();
        for bit in 0..n {
            let factor = if mask >> bit & 1 == 1 { &shift_a } else { &shift_b };
            word = word.compose(factor);
        }
        total = total + word;
        count += 1;
    }
    total.scale(&Poly::constant(C::from_ratio(1, count)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, scalar, Scalar};

    fn v(id: VarId) -> Poly<Scalar> {
        Poly::var(id)
    }

    #[test]
    fn canonical_commutator() {
        let sig = PairSignature::pu();
        let b = moyal_bracket(&v(VarId::Q), &v(VarId::Pq), &sig).unwrap();
        assert_eq!(b, Poly::constant(scalar(int(1), int(0))));
        let s = moyal_star(&v(VarId::Q), &v(VarId::Pq), &sig).unwrap();
        let expected = &v(VarId::Q) * &v(VarId::Pq)
            + v(VarId::Hbar).scale(&scalar(int(0), crate::scalar::rat(1, 2)));
        assert_eq!(s, expected);
    }

    #[test]
    fn unknown_variable_rejected() {
        let sig = PairSignature::pu();
        assert_eq!(
            moyal_star(&v(VarId::X1), &v(VarId::Q), &sig),
            Err(Error::SignatureMismatch(VarId::X1))
        );
        assert!(PairSignature::new(vec![(VarId::Q, VarId::Q)]).is_err());
        assert!(PairSignature::new(vec![(VarId::Q, VarId::Hbar)]).is_err());
    }

    #[test]
    fn bopp_reproduces_star_on_cubic() {
        let sig = PairSignature::pu();
        let h = &v(VarId::Q).pow(2) * &v(VarId::Px) + &v(VarId::Pq) * &v(VarId::X).pow(2);
        let g = &v(VarId::Pq).pow(2) * &v(VarId::Q) + v(VarId::X) * v(VarId::Px).pow(2);
        let left = bopp_operator(&h, &sig).unwrap().apply(&g);
        assert_eq!(left, moyal_star(&h, &g, &sig).unwrap());
        let right = bopp_operator_right(&h, &sig).unwrap().apply(&g);
        assert_eq!(right, moyal_star(&g, &h, &sig).unwrap());
    }

    #[test]
    fn poisson_on_rationals() {
        let sig = PairSignature::oscillator();
        let x = Poly::<Rational>::var(VarId::X1);
        let p = Poly::<Rational>::var(VarId::P1);
        assert_eq!(poisson_bracket(&x, &p, &sig).unwrap(), Poly::constant(int(1)));
    }
}
