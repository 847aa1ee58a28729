//! The fourth-order oscillator in its Ostrogradsky phase space `(q, p_q, x, p_x)`.

use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::moyal::{poisson_bracket, PairSignature};
use crate::poly::{Poly, VarId};
use crate::scalar::{rational_to_f64, render_rational, Field, Rational, Ring};
use crate::scalar::{QuadExt, ToComplex64};

/// Frequencies and Planck constant, all exact and positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PuParams {
    pub omega1: Rational,
    pub omega2: Rational,
    pub hbar: Rational,
}

impl PuParams {
    pub fn new(omega1: Rational, omega2: Rational, hbar: Rational) -> Result<Self> {
        for (name, v) in [("omega1", &omega1), ("omega2", &omega2), ("hbar", &hbar)] {
            if v <= &Rational::zero() {
                return Err(Error::InvalidParameters(format!("{} must be positive, got {}", name, render_rational(v))));
            }
        }
        Ok(Self { omega1, omega2, hbar })
    }

    /// Integer frequencies with `hbar = 1`.
    pub fn ints(omega1: i64, omega2: i64) -> Result<Self> {
        Self::new(crate::scalar::int(omega1), crate::scalar::int(omega2), crate::scalar::int(1))
    }

    /// `Delta = Omega1 - Omega2`.
    pub fn delta(&self) -> Rational {
        &self.omega1 - &self.omega2
    }

    /// `gamma^2 = Omega1^2 - Omega2^2`.
    pub fn gamma_squared(&self) -> Rational {
        &self.omega1 * &self.omega1 - &self.omega2 * &self.omega2
    }

    pub fn require_distinct(&self, what: &str) -> Result<()> {
        if self.omega1 == self.omega2 {
            Err(Error::SingularParameters(format!(
                "{} needs omega1 != omega2 (prefactor 1/(omega1^2 - omega2^2) diverges)",
                what
            )))
        } else {
            Ok(())
        }
    }

    /// Enforces `omega1 > omega2`.
    pub fn require_ordered(&self, what: &str) -> Result<()> {
        self.require_distinct(what)?;
        if self.omega1 < self.omega2 {
            return Err(Error::InvalidParameters(format!("{} assumes omega1 > omega2", what)));
        }
        Ok(())
    }

    /// `gamma = sqrt(Omega1^2 - Omega2^2)` in the quadratic extension.
    pub fn gamma<T: Ring>(&self) -> Result<QuadExt<T>> {
        self.require_ordered("gamma")?;
        QuadExt::sqrt_of(&self.gamma_squared())
            .ok_or_else(|| Error::NotRepresentable("gamma radicand too large".into()))
    }

    pub fn omega1_f64(&self) -> f64 {
        rational_to_f64(&self.omega1)
    }

    pub fn omega2_f64(&self) -> f64 {
        rational_to_f64(&self.omega2)
    }

    pub fn hbar_f64(&self) -> f64 {
        rational_to_f64(&self.hbar)
    }
}

fn c<C: Ring>(r: &Rational) -> C {
    C::from_rational(r)
}

fn v<C: Ring>(id: VarId) -> Poly<C> {
    Poly::var(id)
}

/// `H = p_q x + p_x^2/2 + (Omega1^2 + Omega2^2) x^2/2 - Omega1^2 Omega2^2 q^2/2`.
pub fn hamiltonian<C: Ring>(p: &PuParams) -> Poly<C> {
    let w1 = &p.omega1 * &p.omega1;
    let w2 = &p.omega2 * &p.omega2;
    let half = crate::scalar::rat(1, 2);
    &v::<C>(VarId::Pq) * &v(VarId::X)
        + v::<C>(VarId::Px).pow(2).scale(&c(&half))
        + v::<C>(VarId::X).pow(2).scale(&c(&((&w1 + &w2) * &half)))
        - v::<C>(VarId::Q).pow(2).scale(&c(&(&w1 * &w2 * &half)))
}

/// Noether charges
/// `J1 = [Omega1^2 (p_x + Omega2^2 q)^2 + (p_q + Omega1^2 x)^2] / (Omega1^2 - Omega2^2)`,
/// `J2 = [(p_q + Omega2^2 x)^2 + Omega2^2 (p_x + Omega1^2 q)^2] / (Omega1^2 - Omega2^2)`.
pub fn noether_charges<C: Ring>(p: &PuParams) -> Result<(Poly<C>, Poly<C>)> {
    p.require_distinct("noether_charges")?;
    let w1 = &p.omega1 * &p.omega1;
    let w2 = &p.omega2 * &p.omega2;
    let inv = c::<C>(&(Rational::from_integer(1.into()) / p.gamma_squared()));
    let a = v::<C>(VarId::Px) + v::<C>(VarId::Q).scale(&c(&w2));
    let b = v::<C>(VarId::Pq) + v::<C>(VarId::X).scale(&c(&w1));
    let j1 = (a.pow(2).scale(&c(&w1)) + b.pow(2)).scale(&inv);
    let d = v::<C>(VarId::Pq) + v::<C>(VarId::X).scale(&c(&w2));
    let e = v::<C>(VarId::Px) + v::<C>(VarId::Q).scale(&c(&w1));
    let j2 = (d.pow(2) + e.pow(2).scale(&c(&w2))).scale(&inv);
    Ok((j1, j2))
}

/// Single-oscillator energies `H_i = (P_i^2 + Omega_i^2 X_i^2)/2`.
pub fn oscillator_parts<C: Ring>(p: &PuParams) -> (Poly<C>, Poly<C>) {
    let half = crate::scalar::rat(1, 2);
    let h1 = (v::<C>(VarId::P1).pow(2) + v::<C>(VarId::X1).pow(2).scale(&c(&(&p.omega1 * &p.omega1)))).scale(&c(&half));
    let h2 = (v::<C>(VarId::P2).pow(2) + v::<C>(VarId::X2).pow(2).scale(&c(&(&p.omega2 * &p.omega2)))).scale(&c(&half));
    (h1, h2)
}

/// Difference of two uncoupled oscillators, `H1 - H2`.
pub fn oscillator_hamiltonian<C: Ring>(p: &PuParams) -> Poly<C> {
    let (h1, h2) = oscillator_parts(p);
    h1 - h2
}

/// `(p_x, p_q) = (q'', -(Omega1^2 + Omega2^2) q' - q''')`.
pub fn momenta<T: Ring>(p: &PuParams, qdot: &T, qddot: &T, qdddot: &T) -> (T, T) {
    let s = c::<T>(&(&p.omega1 * &p.omega1 + &p.omega2 * &p.omega2));
    (qddot.clone(), -(s * qdot.clone()) - qdddot.clone())
}

/// Outcome of eliminating Hamilton's equations down to a single equation for `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Elimination {
    /// `dq/dt = {q, H}`, expected to equal `x`.
    pub velocity: Poly<Rational>,
    /// `d^k q / dt^k` for `k = 0..=4` as phase-space polynomials.
    pub derivatives: Vec<Poly<Rational>>,
    /// `q'''' + (Omega1^2 + Omega2^2) q'' + Omega1^2 Omega2^2 q`, expected to vanish.
    pub residual: Poly<Rational>,
}

impl Elimination {
    pub fn closes(&self) -> bool {
        self.velocity == Poly::var(VarId::X) && self.residual.is_zero()
    }
}

/// Iterates `f -> {f, H}` from `q` and forms the fourth-order equation of motion.
pub fn eliminate_hamilton_equations(p: &PuParams) -> Result<Elimination> {
    let sig = PairSignature::pu();
    let h = hamiltonian::<Rational>(p);
    let mut derivatives = vec![Poly::var(VarId::Q)];
    for k in 0..4 {
        let next = poisson_bracket(&derivatives[k], &h, &sig)?;
        derivatives.push(next);
    }
    let w1 = &p.omega1 * &p.omega1;
    let w2 = &p.omega2 * &p.omega2;
    let residual = derivatives[4].clone()
        + derivatives[2].scale(&(&w1 + &w2))
        + derivatives[0].scale(&(&w1 * &w2));
    Ok(Elimination { velocity: derivatives[1].clone(), derivatives, residual })
}

/// `q(t) = a1 cos Omega1 t + b1 sin Omega1 t + a2 cos Omega2 t + b2 sin Omega2 t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalSolution<T> {
    pub a1: T,
    pub b1: T,
    pub a2: T,
    pub b2: T,
}

impl<T: Ring> ClassicalSolution<T> {
    pub fn new(a1: T, b1: T, a2: T, b2: T) -> Self {
        Self { a1, b1, a2, b2 }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.a1.is_zero() && self.b1.is_zero() && self.a2.is_zero() && self.b2.is_zero()
    }

    /// Time derivative, again in the amplitude basis.
    pub fn derivative(&self, p: &PuParams) -> Self {
        let w1 = c::<T>(&p.omega1);
        let w2 = c::<T>(&p.omega2);
        Self {
            a1: self.b1.clone() * w1.clone(),
            b1: -(self.a1.clone() * w1),
            a2: self.b2.clone() * w2.clone(),
            b2: -(self.a2.clone() * w2),
        }
    }

    pub fn nth_derivative(&self, p: &PuParams, k: u32) -> Self {
        (0..k).fold(self.clone(), |s, _| s.derivative(p))
    }

    fn combine(&self, other: &Self, alpha: T, beta: T) -> Self {
        Self {
            a1: self.a1.clone() * alpha.clone() + other.a1.clone() * beta.clone(),
            b1: self.b1.clone() * alpha.clone() + other.b1.clone() * beta.clone(),
            a2: self.a2.clone() * alpha.clone() + other.a2.clone() * beta.clone(),
            b2: self.b2.clone() * alpha + other.b2.clone() * beta,
        }
    }

    /// Equation-of-motion operator applied in the amplitude basis; zero for every solution.
    pub fn exact_residual(&self, p: &PuParams) -> Self {
        let s = c::<T>(&(&p.omega1 * &p.omega1 + &p.omega2 * &p.omega2));
        let prod = c::<T>(&(&p.omega1 * &p.omega1 * &p.omega2 * &p.omega2));
        let d2 = self.nth_derivative(p, 2);
        let d4 = d2.nth_derivative(p, 2);
        d4.combine(&d2, T::one(), s).combine(self, T::one(), prod)
    }

    /// `q''' + sign (Omega1^2 - Omega2^2) q'` as a new solution.
    pub fn symmetry_variation(&self, p: &PuParams, sign: Sign) -> Self {
        let g = c::<T>(&p.gamma_squared());
        let g = match sign {
            Sign::Plus => g,
            Sign::Minus => -g,
        };
        self.nth_derivative(p, 3).combine(&self.derivative(p), T::one(), g)
    }

    /// `(q, q', q'', q''')` at `t = 0`.
    pub fn initial_conditions(&self, p: &PuParams) -> [T; 4] {
        let mut out = [T::zero(), T::zero(), T::zero(), T::zero()];
        let mut s = self.clone();
        for slot in out.iter_mut() {
            *slot = s.a1.clone() + s.a2.clone();
            s = s.derivative(p);
        }
        out
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> ClassicalSolution<U> {
        ClassicalSolution { a1: f(&self.a1), b1: f(&self.b1), a2: f(&self.a2), b2: f(&self.b2) }
    }
}

impl<T: Field> ClassicalSolution<T> {
    /// Amplitudes from `(q, q', q'', q''')` at `t = 0`.
    pub fn from_initial_conditions(p: &PuParams, ic: &[T; 4]) -> Result<Self> {
        p.require_distinct("from_initial_conditions")?;
        let w1 = c::<T>(&p.omega1);
        let w2 = c::<T>(&p.omega2);
        let w1s = w1.clone() * w1.clone();
        let w2s = w2.clone() * w2.clone();
        let den = w2s.clone() - w1s;
        let a1 = (ic[2].clone() + w2s.clone() * ic[0].clone()) / den.clone();
        let a2 = ic[0].clone() - a1.clone();
        let b1 = (ic[3].clone() + w2s * ic[1].clone()) / (w1.clone() * den);
        let b2 = (ic[1].clone() - w1 * b1.clone()) / w2;
        Ok(Self { a1, b1, a2, b2 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// A scalar trajectory `q(t)` whose derivatives can be sampled.
pub trait Trajectory {
    fn derivative_at(&self, k: u32, t: f64) -> f64;
}

impl<T: Ring + ToComplex64> Trajectory for (ClassicalSolution<T>, PuParams) {
    fn derivative_at(&self, k: u32, t: f64) -> f64 {
        let d = self.0.nth_derivative(&self.1, k);
        let (w1, w2) = (self.1.omega1_f64(), self.1.omega2_f64());
        let f = |x: &T| x.to_c64().re;
        f(&d.a1) * (w1 * t).cos() + f(&d.b1) * (w1 * t).sin() + f(&d.a2) * (w2 * t).cos() + f(&d.b2) * (w2 * t).sin()
    }
}

/// Polynomial trajectory `q(t) = sum c_k t^k`, for checking non-solutions.
pub struct PolynomialTrajectory(pub Vec<f64>);

impl Trajectory for PolynomialTrajectory {
    fn derivative_at(&self, k: u32, t: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .skip(k as usize)
            .map(|(j, c)| {
                let falling: f64 = ((j + 1 - k as usize)..=j).map(|i| i as f64).product();
                c * falling * t.powi((j - k as usize) as i32)
            })
            .sum()
    }
}

/// `q'''' + (Omega1^2 + Omega2^2) q'' + Omega1^2 Omega2^2 q` at each sample time.
pub fn eom_residual(traj: &dyn Trajectory, p: &PuParams, t_samples: &[Rational]) -> Vec<f64> {
    let (w1, w2) = (p.omega1_f64(), p.omega2_f64());
    t_samples
        .iter()
        .map(|t| {
            let t = t.to_f64().unwrap_or(f64::NAN);
            traj.derivative_at(4, t) + (w1 * w1 + w2 * w2) * traj.derivative_at(2, t) + w1 * w1 * w2 * w2 * traj.derivative_at(0, t)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use std::collections::BTreeMap;

    fn at(vals: &[(VarId, i64)]) -> BTreeMap<VarId, Rational> {
        vals.iter().map(|(v, x)| (*v, int(*x))).collect()
    }

    #[test]
    fn hamiltonian_values() {
        let p = PuParams::ints(2, 1).unwrap();
        let h = hamiltonian::<Rational>(&p);
        let point = at(&[(VarId::Q, 0), (VarId::Pq, 0), (VarId::X, 0), (VarId::Px, 1)]);
        assert_eq!(h.eval_exact(&point).unwrap(), rat(1, 2));
        let point = at(&[(VarId::Q, 1), (VarId::Pq, 0), (VarId::X, 0), (VarId::Px, 0)]);
        assert_eq!(h.eval_exact(&point).unwrap(), int(-2));
    }

    #[test]
    fn charges_commute_with_hamiltonian() {
        let p = PuParams::ints(2, 1).unwrap();
        let sig = PairSignature::pu();
        let h = hamiltonian::<Rational>(&p);
        let (j1, j2) = noether_charges::<Rational>(&p).unwrap();
        assert!(poisson_bracket(&j1, &h, &sig).unwrap().is_zero());
        assert!(poisson_bracket(&j2, &h, &sig).unwrap().is_zero());
        assert!(poisson_bracket(&j1, &j2, &sig).unwrap().is_zero());
        assert_eq!((j1.clone() - j2).scale(&rat(1, 2)), h);
        assert!(j1.constant_term().is_zero());
    }

    #[test]
    fn equal_frequencies_are_singular() {
        let p = PuParams::ints(1, 1).unwrap();
        assert!(matches!(noether_charges::<Rational>(&p), Err(Error::SingularParameters(_))));
        assert!(PuParams::new(int(0), int(1), int(1)).is_err());
    }

    #[test]
    fn hamilton_equations_close() {
        let p = PuParams::new(rat(3, 2), rat(1, 3), int(1)).unwrap();
        assert!(eliminate_hamilton_equations(&p).unwrap().closes());
    }

    #[test]
    fn momenta_examples() {
        let p = PuParams::ints(2, 1).unwrap();
        // q = cos(Omega1 t) at t = 0: q' = 0, q'' = -Omega1^2, q''' = 0.
        assert_eq!(momenta(&p, &int(0), &int(-4), &int(0)), (int(-4), int(0)));
        // q = sin(Omega2 t) at t = 0: q' = Omega2, q'' = 0, q''' = -Omega2^3.
        assert_eq!(momenta(&p, &int(1), &int(0), &int(-1)), (int(0), int(-4)));
        assert_eq!(momenta(&p, &int(0), &int(0), &int(0)), (int(0), int(0)));
    }

    #[test]
    fn solutions_and_variations() {
        let p = PuParams::ints(3, 2).unwrap();
        let cos1 = ClassicalSolution::new(int(1), int(0), int(0), int(0));
        assert!(cos1.exact_residual(&p).is_zero());
        let var = cos1.symmetry_variation(&p, Sign::Plus);
        // Omega1 Omega2^2 sin(Omega1 t)
        assert_eq!(var, ClassicalSolution::new(int(0), int(12), int(0), int(0)));
        assert!(var.exact_residual(&p).is_zero());
        assert!(ClassicalSolution::<Rational>::zero().symmetry_variation(&p, Sign::Minus).is_zero());

        let mixed = ClassicalSolution::new(1.0, 0.0, 0.0, 1.0);
        let r = eom_residual(&(mixed, p.clone()), &p, &[int(0), rat(1, 2), int(1)]);
        assert!(r.iter().all(|x| x.abs() <= 1e-12));
        let line = PolynomialTrajectory(vec![0.0, 1.0]);
        let r = eom_residual(&line, &p, &[int(2)]);
        assert!((r[0] - 36.0 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn initial_condition_round_trip() {
        let p = PuParams::new(rat(5, 2), rat(2, 3), int(1)).unwrap();
        let s = ClassicalSolution::new(rat(1, 3), int(-2), rat(7, 5), rat(1, 9));
        let ic = s.initial_conditions(&p);
        assert_eq!(ClassicalSolution::from_initial_conditions(&p, &ic).unwrap(), s);
    }
}
