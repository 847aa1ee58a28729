//! Time evolution of superpositions of eigenstates in phase space.
//!
//! A pure state `sum_a c_a |a>` has Wigner function `sum_ab c_a conj(c_b) W_ab`, with
//! cross-Wigner functions `W_ab` built from the ground state by ladder symbols:
//! `W_ab = abar^{⋆n_a} ⋆ W_00 ⋆ alpha^{⋆n_b} / sqrt(n_a! n_b! (2 hbar W)^{n_a + n_b})`
//! per oscillator, `alpha = W X + i P`. Each `W_ab` is a star-genfunction on both
//! sides, so under `rho(t) = U^{-1} ⋆ rho ⋆ U` it only picks up `exp(-i (E_a - E_b) t / hbar)`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix4, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::canon::diagonalizing_map;
use crate::diffop::DiffOperator;
use crate::error::{Error, Result};
use crate::gauss::GaussPoly;
use crate::moyal::{bopp_operator, bopp_operator_right, PairSignature};
use crate::poly::{Poly, VarId};
use crate::pu::{oscillator_hamiltonian, PuParams};
use crate::scalar::{rational_to_f64, Rational, Ring, Scalar};
use crate::wigner::{energy, osc_wigner_in, Frame, WignerState};

/// Unnormalised cross-Wigner function of `|a><b|` in the oscillator frame and the
/// factor that normalises it (`pi^-2` included).
#[derive(Clone, Debug)]
pub struct CrossWigner {
    pub gauss: GaussPoly<Scalar>,
    pub norm: f64,
}

/// `W x + sign i p`.
fn ladder(x: VarId, px: VarId, omega: &Rational, sign: i64) -> Poly<Scalar> {
    let i = Scalar::new(Rational::from_integer(0.into()), Rational::from_integer(sign.into()));
    Poly::var(x).scale(&Scalar::from_rational(omega)) + Poly::var(px).scale(&i)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn hbar_map<C: Ring>(hbar: &Rational) -> BTreeMap<VarId, C> {
    BTreeMap::from([(VarId::Hbar, C::from_rational(hbar))])
}

/// `W_ab` for `a = (n_a, m_a)`, `b = (n_b, m_b)`.
pub fn cross_wigner(p: &PuParams, a: (u32, u32), b: (u32, u32)) -> Result<CrossWigner> {
    let sig = PairSignature::oscillator();
    let ground = WignerState { n: 0, m: 0, params: p.clone(), frame: Frame::Oscillator };
    let mut g = osc_wigner_in::<Scalar>(&ground)?.gauss;
    let hb = hbar_map::<Scalar>(&p.hbar);
    let up1 = bopp_operator(&ladder(VarId::X1, VarId::P1, &p.omega1, -1), &sig)?.assign(&hb);
    let up2 = bopp_operator(&ladder(VarId::X2, VarId::P2, &p.omega2, -1), &sig)?.assign(&hb);
    let down1 = bopp_operator_right(&ladder(VarId::X1, VarId::P1, &p.omega1, 1), &sig)?.assign(&hb);
    let down2 = bopp_operator_right(&ladder(VarId::X2, VarId::P2, &p.omega2, 1), &sig)?.assign(&hb);
    for (op, k) in [(&up1, a.0), (&up2, a.1), (&down1, b.0), (&down2, b.1)] {
        for _ in 0..k {
            g = g.apply(op)?;
        }
    }
    let h = p.hbar_f64();
    let w1 = 2.0 * h * p.omega1_f64();
    let w2 = 2.0 * h * p.omega2_f64();
    let denom = factorial(a.0) * factorial(a.1) * factorial(b.0) * factorial(b.1)
        * w1.powi((a.0 + b.0) as i32)
        * w2.powi((a.1 + b.1) as i32);
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    Ok(CrossWigner { gauss: g, norm: 1.0 / (denom.sqrt() * pi2) })
}

struct Term {
    weight: Complex64,
    frequency: f64,
    value: GaussPoly<Complex64>,
    bracket: GaussPoly<Complex64>,
}

/// Spectral evolution of a finite superposition of eigenstates.
pub struct StarEvolution {
    params: PuParams,
    frame: Frame,
    terms: Vec<Term>,
    /// Initial Wigner function as one Gaussian with complex polynomial prefactor.
    initial: GaussPoly<Complex64>,
    /// Oscillator coordinates `(X1, P1, X2, P2)` from a frame point.
    to_osc: Matrix4<f64>,
}

impl StarEvolution {
    /// `amplitudes` are the coefficients `c_a` of the pure state `sum_a c_a |a>`.
    pub fn new(amplitudes: &[(Complex64, WignerState)]) -> Result<Self> {
        let first = amplitudes
            .first()
            .ok_or_else(|| Error::InvalidParameters("empty superposition".into()))?;
        let params = first.1.params.clone();
        let frame = first.1.frame;
        if amplitudes.iter().any(|(_, s)| s.params != params || s.frame != frame) {
            return Err(Error::InvalidParameters("superposed states must share parameters and frame".into()));
        }
        let to_osc = match frame {
            Frame::Oscillator => Matrix4::identity(),
            Frame::Pu => pu_to_osc(&params)?,
        };
        let sig = PairSignature::oscillator();
        let h = oscillator_hamiltonian::<Scalar>(&params);
        let hb = hbar_map::<Scalar>(&params.hbar);
        let left = bopp_operator(&h, &sig)?.assign(&hb);
        let right = bopp_operator_right(&h, &sig)?.assign(&hb);
        let over_i_hbar = Scalar::new(Rational::from_integer(0.into()), -(Rational::from_integer(1.into()) / &params.hbar));
        let commutator: DiffOperator<Scalar> = (left - right).scale(&Poly::constant(over_i_hbar));
        let mut terms = Vec::new();
        let mut initial: Option<GaussPoly<Complex64>> = None;
        for (ca, sa) in amplitudes {
            for (cb, sb) in amplitudes {
                let w = cross_wigner(&params, (sa.n, sa.m), (sb.n, sb.m))?;
                let weight = ca * cb.conj() * w.norm;
                let de = energy(&params, sa.n, sa.m) - energy(&params, sb.n, sb.m);
                let value = w.gauss.to_c64();
                let bracket = w.gauss.apply(&commutator)?.to_c64();
                let scaled = value.scale(&weight);
                initial = Some(match initial {
                    None => scaled,
                    Some(acc) => acc.add(&scaled)?,
                });
                terms.push(Term { weight, frequency: rational_to_f64(&de) / params.hbar_f64(), value, bracket });
            }
        }
        Ok(Self { params, frame, terms, initial: initial.expect("non-empty"), to_osc })
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    fn osc_point(&self, point: &[f64; 4]) -> [Complex64; 4] {
        let y = self.to_osc * Vector4::from_column_slice(point);
        [y[0], y[1], y[2], y[3]].map(|v| Complex64::new(v, 0.0))
    }

    fn at(z: &[Complex64; 4]) -> impl Fn(VarId) -> Complex64 + Copy + '_ {
        move |v| match v {
            VarId::X1 => z[0],
            VarId::P1 => z[1],
            VarId::X2 => z[2],
            VarId::P2 => z[3],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    fn sum(&self, point: &[f64; 4], t: f64, pick: impl Fn(&Term) -> &GaussPoly<Complex64>) -> Complex64 {
        let z = self.osc_point(point);
        self.terms
            .iter()
            .map(|term| {
                let phase = Complex64::new(0.0, -term.frequency * t).exp();
                term.weight * phase * pick(term).eval_c64(Self::at(&z))
            })
            .sum()
    }

    /// `rho(t)` at a point given in the frame's variable order.
    pub fn value_c64(&self, point: &[f64; 4], t: f64) -> Complex64 {
        self.sum(point, t, |term| &term.value)
    }

    pub fn value(&self, point: &[f64; 4], t: f64) -> f64 {
        self.value_c64(point, t).re
    }

    /// `(H ⋆ rho - rho ⋆ H)/(i hbar)` at time `t`, from exact Bopp operators.
    pub fn moyal_rhs(&self, point: &[f64; 4], t: f64) -> Complex64 {
        self.sum(point, t, |term| &term.bracket)
    }

    /// `d rho/dt - (H ⋆ rho - rho ⋆ H)/(i hbar)`, with a central difference of step `dt`.
    pub fn moyal_residual(&self, point: &[f64; 4], t: f64, dt: f64) -> f64 {
        let d = (self.value_c64(point, t + dt) - self.value_c64(point, t - dt)) / (2.0 * dt);
        (d - self.moyal_rhs(point, t)).norm()
    }

    /// Values on many points in parallel.
    pub fn grid(&self, points: &[[f64; 4]], t: f64) -> Vec<f64> {
        points.par_iter().map(|p| self.value(p, t)).collect()
    }

    /// Star-exponential series truncated at `truncation` powers on each side.
    pub fn series(&self, truncation: u32) -> Result<SeriesEvolution> {
        let sig = PairSignature::oscillator();
        let h = oscillator_hamiltonian::<Complex64>(&self.params);
        let hb = hbar_map::<Complex64>(&self.params.hbar);
        let left = bopp_operator(&h, &sig)?.assign(&hb);
        let right = bopp_operator_right(&h, &sig)?.assign(&hb);
        let mut rows = Vec::new();
        let mut lj = self.initial.clone();
        for _ in 0..=truncation {
            let mut row = Vec::new();
            let mut g = lj.clone();
            for _ in 0..=truncation {
                row.push(g.clone());
                g = g.apply(&right)?;
            }
            rows.push(row);
            lj = lj.apply(&left)?;
        }
        Ok(SeriesEvolution { hbar: self.params.hbar_f64(), terms: rows, to_osc: self.to_osc })
    }
}

/// `sum_{j,k <= N} (-it/hbar)^j/j! (it/hbar)^k/k! H^{⋆j} ⋆ rho ⋆ H^{⋆k}`.
pub struct SeriesEvolution {
    hbar: f64,
    terms: Vec<Vec<GaussPoly<Complex64>>>,
    to_osc: Matrix4<f64>,
}

impl SeriesEvolution {
    pub fn value_c64(&self, point: &[f64; 4], t: f64) -> Complex64 {
        let y = self.to_osc * Vector4::from_column_slice(point);
        let z = [y[0], y[1], y[2], y[3]].map(|v| Complex64::new(v, 0.0));
        let s = Complex64::new(0.0, t / self.hbar);
        let mut total = Complex64::new(0.0, 0.0);
        let mut cj = Complex64::new(1.0, 0.0);
        for (j, row) in self.terms.iter().enumerate() {
            if j > 0 {
                cj *= -s / j as f64;
            }
            let mut ck = Complex64::new(1.0, 0.0);
            for (k, g) in row.iter().enumerate() {
                if k > 0 {
                    ck *= s / k as f64;
                }
                total += cj * ck * g.eval_c64(StarEvolution::at(&z));
            }
        }
        total
    }
}

/// Matrix taking `(q, p_q, x, p_x)` to `(X1, P1, X2, P2)`.
pub fn pu_to_osc(p: &PuParams) -> Result<Matrix4<f64>> {
    let inv = diagonalizing_map(p)?.inverse()?;
    let m: DMatrix<Complex64> = inv.to_c64();
    // map order (q, x, p_q, p_x) -> (X1, X2, P1, P2); frame order (q, p_q, x, p_x) -> (X1, P1, X2, P2)
    let perm = [0usize, 2, 1, 3];
    Ok(Matrix4::from_fn(|r, c| m[(perm[r], perm[c])].re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wigner::{osc_wigner, pu_wigner};

    fn osc(n: u32, m: u32) -> WignerState {
        WignerState::new(n, m, PuParams::ints(2, 1).unwrap(), Frame::Oscillator).unwrap()
    }

    const POINTS: [[f64; 4]; 3] = [[0.2, -0.1, 0.4, 0.3], [0.0, 0.0, 0.0, 0.0], [-0.7, 0.5, 0.1, -0.9]];

    #[test]
    fn diagonal_cross_terms_are_eigenfunctions() {
        for (n, m) in [(0, 0), (1, 0), (1, 2)] {
            let s = osc(n, m);
            let w = cross_wigner(&s.params, (n, m), (n, m)).unwrap();
            let rho = osc_wigner(&s).unwrap();
            for pt in POINTS {
                let at = |v: VarId| match v {
                    VarId::X1 => Complex64::new(pt[0], 0.0),
                    VarId::P1 => Complex64::new(pt[1], 0.0),
                    VarId::X2 => Complex64::new(pt[2], 0.0),
                    VarId::P2 => Complex64::new(pt[3], 0.0),
                    _ => Complex64::new(0.0, 0.0),
                };
                let a = w.gauss.eval_c64(at) * w.norm;
                assert!((a.re - rho.value(&pt)).abs() < 1e-13 && a.im.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn cross_terms_are_two_sided_genfunctions() {
        let p = PuParams::ints(3, 2).unwrap();
        let sig = PairSignature::oscillator();
        let h = oscillator_hamiltonian::<Scalar>(&p);
        let hb = hbar_map::<Scalar>(&p.hbar);
        let left = bopp_operator(&h, &sig).unwrap().assign(&hb);
        let right = bopp_operator_right(&h, &sig).unwrap().assign(&hb);
        let (a, b) = ((1, 0), (0, 2));
        let w = cross_wigner(&p, a, b).unwrap().gauss;
        let ea = Scalar::from_rational(&energy(&p, a.0, a.1));
        let eb = Scalar::from_rational(&energy(&p, b.0, b.1));
        assert!(w.apply(&left).unwrap().sub(&w.scale(&ea)).unwrap().is_zero());
        assert!(w.apply(&right).unwrap().sub(&w.scale(&eb)).unwrap().is_zero());
    }

    #[test]
    fn stationary_state_is_invariant() {
        let e = StarEvolution::new(&[(Complex64::new(1.0, 0.0), osc(2, 1))]).unwrap();
        for pt in POINTS {
            let v0 = e.value(&pt, 0.0);
            for t in [0.3, 17.0, -4.2] {
                assert_eq!(e.value(&pt, t), v0);
            }
        }
    }

    #[test]
    fn pu_frame_evolution_matches_pu_wigner() {
        let s = WignerState::new(1, 1, PuParams::ints(3, 2).unwrap(), Frame::Pu).unwrap();
        let e = StarEvolution::new(&[(Complex64::new(1.0, 0.0), s.clone())]).unwrap();
        let rho = pu_wigner(&s).unwrap();
        for pt in POINTS {
            assert!((e.value(&pt, 1.0) - rho.value(&pt)).abs() < 1e-12);
        }
    }

    #[test]
    fn superposition_interference_and_moyal_equation() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let e = StarEvolution::new(&[(Complex64::new(r, 0.0), osc(0, 0)), (Complex64::new(0.0, r), osc(1, 0))]).unwrap();
        let pt = [0.3, 0.2, -0.1, 0.4];
        // E_10 - E_00 = Omega1 = 2: period pi.
        assert!((e.value(&pt, 0.4) - e.value(&pt, 0.4 + std::f64::consts::PI)).abs() < 1e-12);
        assert!((e.value(&pt, 0.0) - e.value(&pt, 0.7)).abs() > 1e-3);
        for t in [0.0, 0.5, 1.3] {
            assert!(e.moyal_residual(&pt, t, 1e-4) < 1e-6);
        }
        let series = e.series(3).unwrap();
        let t = 1e-2;
        assert!((series.value_c64(&pt, t) - e.value_c64(&pt, t)).norm() < 1e-6);
    }

    #[test]
    fn rejects_mixed_inputs() {
        assert!(StarEvolution::new(&[]).is_err());
        let other = WignerState::new(0, 0, PuParams::ints(3, 1).unwrap(), Frame::Oscillator).unwrap();
        assert!(StarEvolution::new(&[(Complex64::new(1.0, 0.0), osc(0, 0)), (Complex64::new(1.0, 0.0), other)]).is_err());
    }
}
