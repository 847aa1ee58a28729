//! Wigner functions of the eigenstates in the Ostrogradsky and oscillator frames,
//! star-genvalue residuals, the energy spectrum and phase-space expectation values.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::diffop::DiffOperator;
use crate::error::{Error, Result};
use crate::gauss::GaussPoly;
use crate::moyal::{bopp_operator, PairSignature};
use crate::poly::{Poly, VarId};
use crate::pu::{noether_charges, oscillator_parts, PuParams};
use crate::quadrature::{integrate_all, QuadratureSpec};
use crate::scalar::{int, rat, rational_to_f64, Rational, Ring, Scalar, ToComplex64};
use crate::specfun::PolySeq;

/// Phase-space coordinates a Wigner function is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// `(q, p_q, x, p_x)`.
    Pu,
    /// `(X1, P1, X2, P2)`.
    Oscillator,
}

impl Frame {
    /// Variables in evaluation order.
    pub fn vars(self) -> [VarId; 4] {
        match self {
            Frame::Pu => [VarId::Q, VarId::Pq, VarId::X, VarId::Px],
            Frame::Oscillator => [VarId::X1, VarId::P1, VarId::X2, VarId::P2],
        }
    }

    pub fn signature(self) -> PairSignature {
        match self {
            Frame::Pu => PairSignature::pu(),
            Frame::Oscillator => PairSignature::oscillator(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Frame::Pu => "pu",
            Frame::Oscillator => "oscillator",
        }
    }
}

/// Eigenstate labels `(n, m)` together with the model parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WignerState {
    pub n: u32,
    pub m: u32,
    pub params: PuParams,
    pub frame: Frame,
}

impl WignerState {
    pub fn new(n: u32, m: u32, params: PuParams, frame: Frame) -> Result<Self> {
        if frame == Frame::Pu {
            params.require_distinct("Wigner function in the (q, p_q, x, p_x) frame")?;
        }
        Ok(Self { n, m, params, frame })
    }

    pub fn energy(&self) -> Rational {
        energy(&self.params, self.n, self.m)
    }
}

/// `pi^pi_power * gauss`, with `pi` kept out of the exact coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerFunction<C> {
    pub gauss: GaussPoly<C>,
    pub pi_power: i32,
    pub frame: Frame,
    pub hbar: Rational,
}

impl<C: Ring + ToComplex64> WignerFunction<C> {
    pub fn pi_factor(&self) -> f64 {
        std::f64::consts::PI.powi(self.pi_power)
    }

    /// Complex value at a point given in [`Frame::vars`] order.
    pub fn value_c64(&self, point: &[f64; 4]) -> Complex64 {
        let vars = self.frame.vars();
        let hbar = rational_to_f64(&self.hbar);
        let at = |v: VarId| {
            let x = match vars.iter().position(|w| *w == v) {
                Some(i) => point[i],
                None if v == VarId::Hbar => hbar,
                None => 0.0,
            };
            Complex64::new(x, 0.0)
        };
        self.gauss.eval_c64(at) * self.pi_factor()
    }

    pub fn value(&self, point: &[f64; 4]) -> f64 {
        self.value_c64(point).re
    }
}

fn frame_vars(frame: Frame) -> Vec<VarId> {
    frame.vars().to_vec()
}

/// `((-1)^{n+m}/hbar^2) exp(-K1/(hbar W1) - K2/(hbar W2)) L_n(2K1/(hbar W1)) L_m(2K2/(hbar W2))`.
fn laguerre_gaussian<C: Ring>(k1: &Poly<C>, k2: &Poly<C>, s: &WignerState) -> Result<WignerFunction<C>> {
    let p = &s.params;
    let one = Rational::one();
    let a1 = C::from_rational(&(&one / (&p.hbar * &p.omega1)));
    let a2 = C::from_rational(&(&one / (&p.hbar * &p.omega2)));
    let z1 = k1.scale(&(a1.clone() + a1.clone()));
    let z2 = k2.scale(&(a2.clone() + a2.clone()));
    let ln = PolySeq::laguerre(s.n as i64)?.eval(&z1);
    let lm = PolySeq::laguerre(s.m as i64)?.eval(&z2);
    let sign = if (s.n + s.m) % 2 == 0 { 1 } else { -1 };
    let lead = C::from_rational(&(int(sign) / (&p.hbar * &p.hbar)));
    let prefactor = (&ln * &lm).scale(&lead);
    let exponent = -(k1.scale(&a1) + k2.scale(&a2));
    let gauss = GaussPoly::from_polys(frame_vars(s.frame), prefactor, &exponent)?;
    Ok(WignerFunction { gauss, pi_power: -2, frame: s.frame, hbar: p.hbar.clone() })
}

/// Wigner function of `(n, m)` in the `(q, p_q, x, p_x)` frame, built on the charges
/// `J1, J2` (`J_i = 2 H_i` under the diagonalising map).
pub fn pu_wigner_in<C: Ring>(s: &WignerState) -> Result<WignerFunction<C>> {
    pu_wigner_scaled_in(s, &Rational::one())
}

/// Same construction with both charges multiplied by `scale`. Only `scale = 1`
/// yields an eigenfunction; other values serve as negative controls.
pub fn pu_wigner_scaled_in<C: Ring>(s: &WignerState, scale: &Rational) -> Result<WignerFunction<C>> {
    if s.frame != Frame::Pu {
        return Err(Error::InvalidParameters("pu_wigner needs a state in the pu frame".into()));
    }
    s.params.require_distinct("pu_wigner")?;
    let (j1, j2) = noether_charges::<C>(&s.params)?;
    let c = C::from_rational(scale);
    laguerre_gaussian(&j1.scale(&c), &j2.scale(&c), s)
}

/// Wigner function of `(n, m)` in the oscillator frame, on `2 H_1`, `2 H_2`.
pub fn osc_wigner_in<C: Ring>(s: &WignerState) -> Result<WignerFunction<C>> {
    if s.frame != Frame::Oscillator {
        return Err(Error::InvalidParameters("osc_wigner needs a state in the oscillator frame".into()));
    }
    let (h1, h2) = oscillator_parts::<C>(&s.params);
    let two = C::from_int(2);
    laguerre_gaussian(&h1.scale(&two), &h2.scale(&two), s)
}

pub fn pu_wigner(s: &WignerState) -> Result<WignerFunction<Scalar>> {
    pu_wigner_in(s)
}

pub fn osc_wigner(s: &WignerState) -> Result<WignerFunction<Scalar>> {
    osc_wigner_in(s)
}

/// Either Wigner function, chosen by the state's frame.
pub fn wigner_in<C: Ring>(s: &WignerState) -> Result<WignerFunction<C>> {
    match s.frame {
        Frame::Pu => pu_wigner_in(s),
        Frame::Oscillator => osc_wigner_in(s),
    }
}

fn hbar_values<C: Ring>(hbar: &Rational) -> BTreeMap<VarId, C> {
    BTreeMap::from([(VarId::Hbar, C::from_rational(hbar))])
}

/// `h ⋆ rho - e rho`, computed as the Bopp operator of `h` applied to `rho`.
/// The result is the zero function exactly when `(rho, e)` solves the left genvalue problem.
pub fn star_genvalue_residual(h: &Poly<Scalar>, rho: &WignerFunction<Scalar>, e: &Scalar) -> Result<GaussPoly<Scalar>> {
    let op = bopp_operator(h, &rho.frame.signature())?.assign(&hbar_values(&rho.hbar));
    rho.gauss.apply(&op)?.sub(&rho.gauss.scale(e))
}

/// Real and imaginary parts of `h ⋆ rho - e rho` for real `h`, `rho` and `e`.
#[derive(Clone, Debug, PartialEq)]
pub struct GenvalueParts {
    pub real: GaussPoly<Rational>,
    pub imag: GaussPoly<Rational>,
}

impl GenvalueParts {
    pub fn is_zero(&self) -> bool {
        self.real.is_zero() && self.imag.is_zero()
    }
}

/// Bopp operator of a real observable at fixed `hbar`, split into the real part
/// (even powers of `hbar`) and the imaginary part (odd powers).
#[derive(Clone, Debug)]
pub struct GenvalueOperator {
    pub real: DiffOperator<Rational>,
    pub imag: DiffOperator<Rational>,
    pub frame: Frame,
}

impl GenvalueOperator {
    pub fn new(h: &Poly<Rational>, frame: Frame, hbar: &Rational) -> Result<Self> {
        let hs = h.map_coeffs(|c| Scalar::new(c.clone(), Rational::zero()));
        let op = bopp_operator(&hs, &frame.signature())?.assign(&hbar_values(hbar));
        let (real, imag) = op.split_re_im();
        Ok(Self { real, imag, frame })
    }

    /// Both parts of `h ⋆ rho - e rho`.
    pub fn residual(&self, rho: &GaussPoly<Rational>, e: &Rational) -> Result<GenvalueParts> {
        let real = rho.apply(&self.real)?.sub(&rho.scale(e))?;
        let imag = rho.apply(&self.imag)?;
        Ok(GenvalueParts { real, imag })
    }
}

/// `E_nm = hbar ((n + 1/2) Omega1 - (m + 1/2) Omega2)`.
pub fn energy(p: &PuParams, n: u32, m: u32) -> Rational {
    energy_formula(&p.omega1, &p.omega2, &p.hbar, n, m)
}

/// The energy formula with no restriction on the frequencies.
pub fn energy_formula(omega1: &Rational, omega2: &Rational, hbar: &Rational, n: u32, m: u32) -> Rational {
    let half = rat(1, 2);
    hbar * ((int(n as i64) + &half) * omega1 - (int(m as i64) + &half) * omega2)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectrumEntry {
    pub n: u32,
    pub m: u32,
    #[serde(serialize_with = "crate::scalar::serialize_rational")]
    pub energy: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Spectrum {
    pub entries: Vec<SpectrumEntry>,
    /// Energies decrease without bound as `m` grows.
    pub unbounded_below: bool,
    pub note: String,
}

/// Energy table for `0 <= n <= n_max`, `0 <= m <= m_max`, with `n` running fastest.
pub fn spectrum(p: &PuParams, n_max: u32, m_max: u32) -> Result<Spectrum> {
    p.require_distinct("spectrum")?;
    let mut entries = Vec::new();
    for m in 0..=m_max {
        for n in 0..=n_max {
            entries.push(SpectrumEntry { n, m, energy: energy(p, n, m) });
        }
    }
    Ok(Spectrum {
        entries,
        unbounded_below: true,
        note: "E_nm -> -infinity as m -> infinity at fixed n".into(),
    })
}

/// Normalisation of the phase-space measure: `<A> = c * integral (A ⋆ rho)`.
pub const MEASURE_CALIBRATION: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Expectation {
    pub value: Complex64,
    pub order: usize,
    pub calibration: f64,
}

/// `<A> = integral (A ⋆ rho)` over phase space.
pub fn expectation(a: &Poly<Scalar>, rho: &WignerFunction<Scalar>, quad: &QuadratureSpec) -> Result<Expectation> {
    let op = bopp_operator(a, &rho.frame.signature())?.assign(&hbar_values(&rho.hbar));
    let g = rho.gauss.apply(&op)?.assign(&hbar_values(&rho.hbar))?;
    let q = integrate_all(&g, quad)?;
    Ok(Expectation { value: q.value * rho.pi_factor() * MEASURE_CALIBRATION, order: q.order, calibration: MEASURE_CALIBRATION })
}

/// `integral rho` over phase space.
pub fn total_integral<C: Ring + ToComplex64>(rho: &WignerFunction<C>, quad: &QuadratureSpec) -> Result<f64> {
    let g = rho.gauss.assign(&hbar_values(&rho.hbar))?;
    Ok(integrate_all(&g, quad)?.value.re * rho.pi_factor())
}

/// `integral rho1 rho2` over phase space; `delta / (2 pi hbar)^2` for eigenstates.
pub fn overlap<C: Ring + ToComplex64>(r1: &WignerFunction<C>, r2: &WignerFunction<C>, quad: &QuadratureSpec) -> Result<f64> {
    if r1.frame != r2.frame {
        return Err(Error::InvalidParameters("overlap of Wigner functions in different frames".into()));
    }
    let g = r1.gauss.mul(&r2.gauss).assign(&hbar_values(&r1.hbar))?;
    Ok(integrate_all(&g, quad)?.value.re * r1.pi_factor() * r2.pi_factor())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pu::{hamiltonian, oscillator_hamiltonian};
    use crate::scalar::scalar;
    use std::f64::consts::PI;

    fn state(n: u32, m: u32, o1: i64, o2: i64, frame: Frame) -> WignerState {
        WignerState::new(n, m, PuParams::ints(o1, o2).unwrap(), frame).unwrap()
    }

    fn re(r: Rational) -> Scalar {
        scalar(r, int(0))
    }

    #[test]
    fn ground_state_at_origin() {
        let s = state(0, 0, 2, 1, Frame::Pu);
        let rho = pu_wigner(&s).unwrap();
        assert!((rho.value(&[0.0; 4]) - 1.0 / (PI * PI)).abs() < 1e-15);
        let osc = osc_wigner(&WignerState { frame: Frame::Oscillator, ..s }).unwrap();
        assert!((osc.value(&[0.0; 4]) - 1.0 / (PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn pu_frame_rejects_equal_frequencies() {
        let p = PuParams::ints(1, 1).unwrap();
        assert!(matches!(WignerState::new(0, 0, p.clone(), Frame::Pu), Err(Error::SingularParameters(_))));
        let s = WignerState { n: 0, m: 0, params: p, frame: Frame::Pu };
        assert!(matches!(pu_wigner(&s), Err(Error::SingularParameters(_))));
    }

    #[test]
    fn ground_state_genvalue() {
        let s = state(0, 0, 2, 1, Frame::Pu);
        let rho = pu_wigner(&s).unwrap();
        assert!(rho.gauss.has_real_coefficients());
        let h = hamiltonian::<Scalar>(&s.params);
        let e = re(s.energy());
        assert_eq!(e, re(rat(1, 2)));
        assert!(star_genvalue_residual(&h, &rho, &e).unwrap().is_zero());
        let wrong = star_genvalue_residual(&h, &rho, &Scalar::zero()).unwrap();
        assert_eq!(wrong, rho.gauss.scale(&e));
    }

    #[test]
    fn excited_states_split_residual() {
        for (o1, o2) in [(2, 1), (3, 2)] {
            let p = PuParams::ints(o1, o2).unwrap();
            let op = GenvalueOperator::new(&hamiltonian(&p), Frame::Pu, &p.hbar).unwrap();
            let osc = GenvalueOperator::new(&oscillator_hamiltonian(&p), Frame::Oscillator, &p.hbar).unwrap();
            for (n, m) in [(1, 0), (0, 2), (2, 1)] {
                let s = WignerState::new(n, m, p.clone(), Frame::Pu).unwrap();
                let rho = pu_wigner_in::<Rational>(&s).unwrap();
                assert!(op.residual(&rho.gauss, &s.energy()).unwrap().is_zero(), "pu ({n},{m})");
                let so = WignerState { frame: Frame::Oscillator, ..s.clone() };
                let rho = osc_wigner_in::<Rational>(&so).unwrap();
                assert!(osc.residual(&rho.gauss, &so.energy()).unwrap().is_zero(), "osc ({n},{m})");
            }
        }
    }

    #[test]
    fn doubled_charges_are_not_eigenfunctions() {
        let s = state(0, 0, 2, 1, Frame::Pu);
        let rho = pu_wigner_scaled_in::<Rational>(&s, &int(2)).unwrap();
        let op = GenvalueOperator::new(&hamiltonian(&s.params), Frame::Pu, &s.params.hbar).unwrap();
        let parts = op.residual(&rho.gauss, &s.energy()).unwrap();
        assert!(parts.imag.is_zero());
        assert!(!parts.real.is_zero());
    }

    #[test]
    fn right_genvalue_matches_left() {
        let s = state(1, 1, 3, 2, Frame::Pu);
        let rho = pu_wigner(&s).unwrap();
        let h = hamiltonian::<Scalar>(&s.params);
        let op = crate::moyal::bopp_operator_right(&h, &PairSignature::pu()).unwrap().assign(&hbar_values(&s.params.hbar));
        let r = rho.gauss.apply(&op).unwrap().sub(&rho.gauss.scale(&re(s.energy()))).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn negativity_witness() {
        let rho = osc_wigner(&state(1, 0, 2, 1, Frame::Oscillator)).unwrap();
        assert!((rho.value(&[0.0; 4]) + 1.0 / (PI * PI)).abs() < 1e-15);
        let rho = pu_wigner(&state(1, 0, 2, 1, Frame::Pu)).unwrap();
        assert!(rho.value(&[0.0; 4]) < 0.0);
    }

    #[test]
    fn first_excited_node_surface() {
        // 2 J1/(hbar W1) = 1 on the p_x axis at p_x^2 = gamma^2 / (2 W1)
        let s = state(1, 0, 2, 1, Frame::Pu);
        let rho = pu_wigner(&s).unwrap();
        let px = (3.0f64 / 4.0).sqrt();
        assert!(rho.value(&[0.0, 0.0, 0.0, px]).abs() < 1e-15);
    }

    #[test]
    fn oscillator_rotation_invariance() {
        let s = state(2, 1, 3, 2, Frame::Oscillator);
        let rho = osc_wigner(&s).unwrap();
        let (w1, w2) = (3.0, 2.0);
        for (x1, y1, x2, y2) in [(0.3, -0.2, 0.5, 0.1), (1.1, 0.4, -0.3, 0.7)] {
            let base = rho.value(&[x1, w1 * y1, x2, w2 * y2]);
            for theta in [0.4f64, 1.3, 2.9] {
                let (c, s) = (theta.cos(), theta.sin());
                let (r1, r2) = (c * x1 - s * y1, s * x1 + c * y1);
                let v = rho.value(&[r1, w1 * r2, x2, w2 * y2]);
                assert!((v - base).abs() < 1e-13 * base.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn radial_form() {
        for n in 0..4 {
            let c = int(n) + rat(1, 2);
            assert!(crate::specfun::radial_residual(n, &c).unwrap().iter().all(|r| r.is_zero()));
        }
        let halved = crate::specfun::radial_residual(0, &rat(1, 4)).unwrap();
        assert!(halved.iter().any(|r| !r.is_zero()));
    }

    #[test]
    fn spectrum_table() {
        let p = PuParams::ints(2, 1).unwrap();
        let sp = spectrum(&p, 1, 1).unwrap();
        let got: Vec<_> = sp.entries.iter().map(|e| (e.n, e.m, e.energy.clone())).collect();
        assert_eq!(
            got,
            vec![(0, 0, rat(1, 2)), (1, 0, rat(5, 2)), (0, 1, rat(-1, 2)), (1, 1, rat(3, 2))]
        );
        assert_eq!(energy(&p, 1, 0) - energy(&p, 0, 0), int(2));
        assert_eq!(energy(&p, 0, 1) - energy(&p, 0, 0), int(-1));
        assert!(spectrum(&PuParams::ints(1, 1).unwrap(), 1, 1).is_err());
        assert_eq!(energy_formula(&int(1), &int(1), &int(1), 3, 1), int(2));
    }

    #[test]
    fn normalisation_and_expectations() {
        let quad = QuadratureSpec::default();
        let s = state(0, 0, 2, 1, Frame::Pu);
        let rho = pu_wigner(&s).unwrap();
        assert!((total_integral(&rho, &quad).unwrap() - 1.0).abs() < 1e-10);
        let one = expectation(&Poly::constant(Scalar::one()), &rho, &quad).unwrap();
        assert!((one.value.re - 1.0).abs() < 1e-10 && one.value.im.abs() < 1e-12);
        let q = expectation(&Poly::var(VarId::Q), &rho, &quad).unwrap();
        assert!(q.value.norm() < 1e-8);
        let h = hamiltonian::<Scalar>(&s.params);
        let s21 = state(2, 1, 2, 1, Frame::Pu);
        let e = expectation(&h, &pu_wigner(&s21).unwrap(), &quad).unwrap();
        assert!((e.value.re - rational_to_f64(&s21.energy())).abs() < 1e-8);
        assert!(e.value.im.abs() < 1e-8);
    }

    #[test]
    fn overlaps() {
        let quad = QuadratureSpec::default();
        let a = osc_wigner(&state(0, 0, 2, 1, Frame::Oscillator)).unwrap();
        let b = osc_wigner(&state(1, 0, 2, 1, Frame::Oscillator)).unwrap();
        let scale = 1.0 / (4.0 * PI * PI);
        assert!((overlap(&a, &a, &quad).unwrap() - scale).abs() < 1e-10);
        assert!(overlap(&a, &b, &quad).unwrap().abs() < 1e-10);
    }
}
