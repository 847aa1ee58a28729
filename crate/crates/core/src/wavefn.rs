//! Position-space wavefunctions (with `hbar = 1`): oscillator eigenfunctions, the
//! closed-form eigenfunctions in `(q, x)`, the Dirac integral transform and the
//! passage between wavefunctions and Wigner functions.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::canon::GeneratingFunction;
use crate::diffop::DiffOperator;
use crate::error::{Error, Result};
use crate::gauss::{GaussPoly, QuadForm};
use crate::grid::{Grid, GridData, Values};
use crate::poly::{Monomial, Poly, VarId};
use crate::pu::PuParams;
use crate::quadrature::{gauss_legendre, integrate_all, integrate_gauss_poly, integrate_gaussian, CompiledPoly, QuadratureSpec};
use crate::scalar::{int, rat, rational_sqrt, rational_to_f64, ComplexRing, Field, Rational, Scalar, ToComplex64};
use crate::specfun::hermite_value;
use crate::wigner::{energy, Frame, WignerFunction};

/// How a wavefunction produces its values.
#[derive(Clone, Debug)]
pub enum Repr {
    /// A closed-form Gaussian times polynomial in the two position variables.
    Closed(GaussPoly<Complex64>),
    /// `norm * integral exp(i F) psi d^2 X`, evaluated by quadrature at each point.
    Dirac { integrand: GaussPoly<Complex64>, over: [VarId; 2], norm: f64, quad: QuadratureSpec },
    /// `integral rho((a + X)/2, p) exp(i p.(X - a)) d^2 p / psi(a)`.
    FromWigner { rho: GaussPoly<Complex64>, momenta: [VarId; 2], reference: [f64; 2], reference_value: f64, quad: QuadratureSpec },
    /// Values on a grid.
    Sampled { grid: Grid, values: Vec<Complex64> },
}

#[derive(Clone, Debug)]
pub struct WaveFn2D {
    pub repr: Repr,
    pub vars: [VarId; 2],
    pub n: u32,
    pub m: u32,
    pub frame: Frame,
    /// Overall factor applied to every value.
    pub scale: Complex64,
}

fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl WaveFn2D {
    pub fn value(&self, a: f64, b: f64) -> Result<Complex64> {
        let raw = match &self.repr {
            Repr::Closed(g) => g.eval_c64(|v| at2(&self.vars, a, b, v)),
            Repr::Dirac { integrand, over, norm, quad } => {
                let fixed = |v: VarId| at2(&self.vars, a, b, v);
                integrate_gauss_poly(integrand, over, &fixed, quad)?.value * *norm
            }
            Repr::FromWigner { rho, momenta, reference, reference_value, quad } => {
                let pos = [(reference[0] + a) / 2.0, (reference[1] + b) / 2.0];
                let shift = [a - reference[0], b - reference[1]];
                momentum_integral(rho, &self.vars, momenta, pos, shift, quad)? / *reference_value
            }
            Repr::Sampled { grid, values } => {
                let idx = (0..grid.len()).find(|&i| grid.point(i) == [a, b]).ok_or_else(|| {
                    Error::InvalidParameters(format!("({}, {}) is not a sample point", a, b))
                })?;
                values[idx]
            }
        };
        Ok(raw * self.scale)
    }

    /// Values at every grid point, computed in parallel.
    pub fn values_on(&self, grid: &Grid) -> Result<Vec<Complex64>> {
        if grid.axes.len() != 2 {
            return Err(Error::InvalidParameters("wavefunction grids are two-dimensional".into()));
        }
        grid.map(|p| self.value(p[0], p[1])).into_iter().collect()
    }

    pub fn sample(&self, grid: &Grid) -> Result<WaveFn2D> {
        let values = self.values_on(grid)?;
        Ok(WaveFn2D { repr: Repr::Sampled { grid: grid.clone(), values }, scale: Complex64::one(), ..self.clone() })
    }

    pub fn grid_data(&self, grid: &Grid) -> Result<GridData> {
        let mut meta = serde_json::Map::new();
        meta.insert("n".into(), self.n.into());
        meta.insert("m".into(), self.m.into());
        meta.insert("frame".into(), self.frame.name().into());
        GridData::new(grid.clone(), Values::Complex(self.values_on(grid)?), meta)
    }

    pub fn closed(&self) -> Option<GaussPoly<Complex64>> {
        match &self.repr {
            Repr::Closed(g) => Some(g.scale(&self.scale)),
            _ => None,
        }
    }
}

fn at2(vars: &[VarId; 2], a: f64, b: f64, v: VarId) -> Complex64 {
    if v == vars[0] {
        c64(a)
    } else if v == vars[1] {
        c64(b)
    } else {
        Complex64::zero()
    }
}

fn require_unit_hbar(p: &PuParams) -> Result<()> {
    if p.hbar != Rational::one() {
        return Err(Error::InvalidParameters("wavefunctions are built with hbar = 1".into()));
    }
    Ok(())
}

/// `integral |g|^2` over all variables, for a closed form.
fn norm_squared(g: &GaussPoly<Complex64>, quad: &QuadratureSpec) -> Result<f64> {
    Ok(integrate_all(&g.mul(&g.conj()), quad)?.value.re)
}

fn normalized(g: GaussPoly<Complex64>, vars: [VarId; 2], n: u32, m: u32, frame: Frame) -> Result<WaveFn2D> {
    let nsq = norm_squared(&g, &QuadratureSpec::default())?;
    Ok(WaveFn2D { repr: Repr::Closed(g), vars, n, m, frame, scale: c64(1.0 / nsq.sqrt()) })
}

/// `exp(-W1 X1^2/2 - W2 X2^2/2) H_n(sqrt(W1) X1) H_m(sqrt(W2) X2)`, unit norm.
pub fn osc_wavefunction(n: u32, m: u32, p: &PuParams) -> Result<WaveFn2D> {
    require_unit_hbar(p)?;
    let (w1, w2) = (p.omega1_f64(), p.omega2_f64());
    let h1 = hermite_value(n as usize, &Poly::<Complex64>::var(VarId::X1).scale(&c64(w1.sqrt())));
    let h2 = hermite_value(m as usize, &Poly::<Complex64>::var(VarId::X2).scale(&c64(w2.sqrt())));
    let exponent = Poly::<Complex64>::var(VarId::X1).pow(2).scale(&c64(-w1 / 2.0))
        + Poly::var(VarId::X2).pow(2).scale(&c64(-w2 / 2.0));
    let g = GaussPoly::from_polys(vec![VarId::X1, VarId::X2], &h1 * &h2, &exponent)?;
    normalized(g, [VarId::X1, VarId::X2], n, m, Frame::Oscillator)
}

fn ratio_of_factorials(top: &[u32], bottom: &[u32]) -> Rational {
    let f = |k: u32| (1..=k as i64).fold(int(1), |acc, j| acc * int(j));
    top.iter().map(|&k| f(k)).fold(int(1), |a, b| a * b) / bottom.iter().map(|&k| f(k)).fold(int(1), |a, b| a * b)
}

/// The finite Hermite sum `phi_nm(q, x)` with `r_i = sqrt(W_i)`:
/// `H+_k = H_k(i r1 (W2 q - i x))`, `H-_k = H_k(r2 (W1 q + i x))`, `A = i (W1 - W2)/(4 r1 r2)`.
pub fn pu_phi<C: Field + ComplexRing>(n: u32, m: u32, w1: &C, w2: &C, r1: &C, r2: &C) -> Poly<C> {
    let i = C::imag_unit();
    let q = Poly::<C>::var(VarId::Q);
    let x = Poly::<C>::var(VarId::X);
    let plus = (q.scale(w2) - x.scale(&i)).scale(&(i.clone() * r1.clone()));
    let minus = (q.scale(w1) + x.scale(&i)).scale(r2);
    let a = i * (w1.clone() - w2.clone()) / (C::from_int(4) * r1.clone() * r2.clone());
    let (lo, hi) = (n.min(m), n.max(m));
    let d = hi - lo;
    let mut out = Poly::zero();
    for k in 0..=lo {
        let c = ratio_of_factorials(&[lo, d], &[lo - k, k, d + k]);
        let (kp, km) = if m <= n { (d + k, k) } else { (k, d + k) };
        let term = &hermite_value(kp as usize, &plus) * &hermite_value(km as usize, &minus);
        out = out + term.scale(&(a.pow_u32(k) * C::from_rational(&c)));
    }
    out
}

/// `exp(-i W1 W2 q x - (Delta/2)(x^2 + W1 W2 q^2)) phi_nm(q, x)`, unnormalised.
pub fn pu_closed_gauss<C: Field + ComplexRing>(n: u32, m: u32, w1: &C, w2: &C, r1: &C, r2: &C) -> Result<GaussPoly<C>> {
    let q = Poly::<C>::var(VarId::Q);
    let x = Poly::<C>::var(VarId::X);
    let w12 = w1.clone() * w2.clone();
    let half_delta = (w1.clone() - w2.clone()) * C::from_ratio(1, 2);
    let exponent = (&q * &x).scale(&-(C::imag_unit() * w12.clone()))
        - (x.pow(2) + q.pow(2).scale(&w12)).scale(&half_delta);
    GaussPoly::from_polys(vec![VarId::Q, VarId::X], pu_phi(n, m, w1, w2, r1, r2), &exponent)
}

fn check_pu_closed(p: &PuParams) -> Result<()> {
    require_unit_hbar(p)?;
    if p.omega1 == p.omega2 {
        return Err(Error::NonNormalizable("the closed-form eigenfunctions need omega1 != omega2".into()));
    }
    if p.omega1 < p.omega2 {
        return Err(Error::InvalidParameters("closed-form eigenfunctions assume omega1 > omega2".into()));
    }
    Ok(())
}

fn pu_closed_c64(n: u32, m: u32, p: &PuParams) -> Result<GaussPoly<Complex64>> {
    let (w1, w2) = (p.omega1_f64(), p.omega2_f64());
    pu_closed_gauss(n, m, &c64(w1), &c64(w2), &c64(w1.sqrt()), &c64(w2.sqrt()))
}

/// Normalised closed-form eigenfunction `psi_nm(q, x)`.
pub fn pu_wavefunction_closed(n: u32, m: u32, p: &PuParams) -> Result<WaveFn2D> {
    check_pu_closed(p)?;
    normalized(pu_closed_c64(n, m, p)?, [VarId::Q, VarId::X], n, m, Frame::Pu)
}

/// Unnormalised closed form with exact coefficients; needs square frequencies.
pub fn pu_wavefunction_exact(n: u32, m: u32, p: &PuParams) -> Result<GaussPoly<Scalar>> {
    check_pu_closed(p)?;
    let root = |r: &Rational| {
        rational_sqrt(r).ok_or_else(|| Error::NotRepresentable("frequencies must be rational squares".into()))
    };
    let s = |r: Rational| Scalar::new(r, Rational::zero());
    let (r1, r2) = (root(&p.omega1)?, root(&p.omega2)?);
    pu_closed_gauss(n, m, &s(p.omega1.clone()), &s(p.omega2.clone()), &s(r1), &s(r2))
}

/// `-i x d/dq - (1/2) d^2/dx^2 + (W1^2 + W2^2) x^2/2 - W1^2 W2^2 q^2/2`.
pub fn schrodinger_operator<C: ComplexRing>(p: &PuParams) -> DiffOperator<C> {
    let w1 = &p.omega1 * &p.omega1;
    let w2 = &p.omega2 * &p.omega2;
    let x = Poly::<C>::var(VarId::X);
    let q = Poly::<C>::var(VarId::Q);
    let mut op = DiffOperator::zero();
    op.add_term(Monomial::var(VarId::Q), x.scale(&-C::imag_unit()));
    op.add_term(Monomial::pow(VarId::X, 2), Poly::constant(C::from_ratio(-1, 2)));
    let potential = x.pow(2).scale(&C::from_rational(&((&w1 + &w2) * rat(1, 2))))
        - q.pow(2).scale(&C::from_rational(&(&w1 * &w2 * rat(1, 2))));
    op + DiffOperator::multiplication(potential)
}

/// `max |H psi - E psi|` over `points` for a closed-form wavefunction.
pub fn schrodinger_residual(psi: &WaveFn2D, p: &PuParams, points: &[[f64; 2]]) -> Result<f64> {
    let g = psi
        .closed()
        .ok_or_else(|| Error::InvalidParameters("Schrodinger residual needs a closed form".into()))?;
    let e = c64(rational_to_f64(&energy(p, psi.n, psi.m)));
    let r = g.apply(&schrodinger_operator::<Complex64>(p))?.sub(&g.scale(&e))?;
    Ok(points
        .iter()
        .map(|pt| r.eval_c64(|v| at2(&psi.vars, pt[0], pt[1], v)).norm())
        .fold(0.0, f64::max))
}

/// Positions and momenta of a frame.
fn frame_split(frame: Frame) -> ([VarId; 2], [VarId; 2]) {
    let v = frame.vars();
    ([v[0], v[2]], [v[1], v[3]])
}

/// Gaussian data `(M, l, c)` of `exp(z^T M z + l.z + c)` in the order `vars`.
fn gaussian_data(g: &GaussPoly<Complex64>, vars: &[VarId]) -> Result<(DMatrix<Complex64>, Vec<Complex64>, Complex64)> {
    let f = g.exponent();
    let idx: Vec<usize> = vars.iter().map(|v| f.index_of(*v).ok_or(Error::UnknownVariable(*v))).collect::<Result<_>>()?;
    if f.vars().len() != idx.len() {
        return Err(Error::InvalidParameters("wavefunction has extra variables".into()));
    }
    let n = idx.len();
    Ok((
        DMatrix::from_fn(n, n, |r, s| f.matrix()[idx[r]][idx[s]]),
        idx.iter().map(|&i| f.linear()[i]).collect(),
        *f.constant(),
    ))
}

/// `(1/(2 pi)^2) integral conj(psi(pos - y/2)) psi(pos + y/2) exp(-i y.p) d^2 y` for a
/// closed-form `psi`; this convention maps the oscillator ground state to `W_00`.
pub fn wigner_point(psi: &WaveFn2D, pos: [f64; 2], mom: [f64; 2], quad: &QuadratureSpec) -> Result<Complex64> {
    let g = psi
        .closed()
        .ok_or_else(|| Error::InvalidParameters("Wigner transform needs a closed-form wavefunction".into()))?;
    let (mm, l, c) = gaussian_data(&g, &psi.vars)?;
    let mbar = mm.map(|z| z.conj());
    let x = nalgebra::DVector::from_column_slice(&[c64(pos[0]), c64(pos[1])]);
    let a = (&mm + &mbar) * c64(-0.25);
    let lin = (&mm - &mbar) * &x;
    let b: Vec<Complex64> = (0..2)
        .map(|i| lin[i] + (l[i] - l[i].conj()) * 0.5 - Complex64::new(0.0, mom[i]))
        .collect();
    let quad_pos = (x.transpose() * (&mm + &mbar) * &x)[(0, 0)];
    let c0 = quad_pos + (0..2).map(|i| (l[i] + l[i].conj()) * x[i]).sum::<Complex64>() + c + c.conj();
    let prefactor = CompiledPoly::new(g.prefactor(), &psi.vars, &|_| Complex64::zero());
    let conj_prefactor = CompiledPoly::new(&g.prefactor().conj(), &psi.vars, &|_| Complex64::zero());
    let f = |y: &[Complex64]| {
        let plus = [x[0] + y[0] * 0.5, x[1] + y[1] * 0.5];
        let minus = [x[0] - y[0] * 0.5, x[1] - y[1] * 0.5];
        conj_prefactor.eval(&minus) * prefactor.eval(&plus)
    };
    let degree = 2 * g.prefactor().degree();
    let q = integrate_gaussian(&a, &b, c0, &f, Some(degree), quad)?;
    Ok(q.value / (4.0 * std::f64::consts::PI * std::f64::consts::PI))
}

/// Wigner function of a closed-form wavefunction on a 4D grid in frame order.
pub fn wigner_from_wavefunction(psi: &WaveFn2D, grid: &Grid, quad: &QuadratureSpec) -> Result<SampledWigner> {
    if grid.axes.len() != 4 {
        return Err(Error::InvalidParameters("Wigner grids are four-dimensional".into()));
    }
    let values: Vec<Complex64> = grid
        .map(|p| wigner_point(psi, [p[0], p[2]], [p[1], p[3]], quad))
        .into_iter()
        .collect::<Result<_>>()?;
    let max_imag = values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(SampledWigner { grid: grid.clone(), values: values.iter().map(|z| z.re).collect(), max_imag, frame: psi.frame })
}

#[derive(Clone, Debug)]
pub struct SampledWigner {
    pub grid: Grid,
    pub values: Vec<f64>,
    /// Largest imaginary part met before taking the real part.
    pub max_imag: f64,
    pub frame: Frame,
}

/// `integral rho(pos, p) exp(i p.shift) d^2 p`.
fn momentum_integral(
    rho: &GaussPoly<Complex64>,
    positions: &[VarId; 2],
    momenta: &[VarId; 2],
    pos: [f64; 2],
    shift: [f64; 2],
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    let f = rho.exponent();
    let mut linear = f.linear().to_vec();
    for (k, v) in momenta.iter().enumerate() {
        let i = f.index_of(*v).ok_or(Error::UnknownVariable(*v))?;
        linear[i] += Complex64::new(0.0, shift[k]);
    }
    let form = QuadForm::new(f.vars().to_vec(), f.matrix().to_vec(), linear, *f.constant())?;
    let g = GaussPoly::new(rho.prefactor().clone(), form)?;
    let fixed = |v: VarId| at2(positions, pos[0], pos[1], v);
    Ok(integrate_gauss_poly(&g, momenta, &fixed, quad)?.value)
}

/// Threshold on `|psi(0)|` below which the origin counts as a node.
pub const NODE_THRESHOLD: f64 = 1e-8;
/// Smallest `|psi|` accepted at a fallback reference point.
pub const FALLBACK_THRESHOLD: f64 = 1e-3;

/// Points scanned, in order, when the origin is a node: `[-2, 2]^2` in steps of `1/4`.
pub fn fallback_scan() -> Grid {
    use crate::grid::Axis;
    Grid::new(vec![Axis::new("a", -2.0, 2.0, 17).expect("valid"), Axis::new("b", -2.0, 2.0, 17).expect("valid")])
}

/// Recovers `psi` (up to a global phase) from a pure-state Wigner function; the
/// phase makes `psi(reference)` real and positive. The reference is the origin,
/// or the first point of [`fallback_scan`] with `|psi| > FALLBACK_THRESHOLD`.
pub fn wavefunction_from_wigner(rho: &WignerFunction<Scalar>, n: u32, m: u32, quad: &QuadratureSpec) -> Result<WaveFn2D> {
    let (positions, momenta) = frame_split(rho.frame);
    let g = rho.gauss.to_c64().scale(&c64(rho.pi_factor()));
    let density = |a: [f64; 2]| -> Result<f64> { Ok(momentum_integral(&g, &positions, &momenta, a, [0.0, 0.0], quad)?.re) };
    let mut reference = [0.0, 0.0];
    let mut value = density(reference)?.max(0.0).sqrt();
    if value < NODE_THRESHOLD {
        let scan = fallback_scan();
        let found = (0..scan.len()).map(|i| scan.point(i)).find_map(|p| {
            let a = [p[0], p[1]];
            match density(a) {
                Ok(d) if d.max(0.0).sqrt() > FALLBACK_THRESHOLD => Some(Ok((a, d.sqrt()))),
                Ok(_) => None,
                Err(e) => Some(Err(e)),
            }
        });
        match found {
            Some(r) => {
                let (a, v) = r?;
                reference = a;
                value = v;
            }
            None => return Err(Error::NodeAtReference("no scan point has |psi| above threshold".into())),
        }
    }
    Ok(WaveFn2D {
        repr: Repr::FromWigner { rho: g, momenta, reference, reference_value: value, quad: quad.clone() },
        vars: positions,
        n,
        m,
        frame: rho.frame,
        scale: Complex64::one(),
    })
}

/// `N integral exp(i F(old, X)) psi(X) d^2 X` with `N = sqrt|det B| / (2 pi)` from the
/// mixed Hessian `B` of `F`, which makes the transform unitary.
pub fn dirac_transform(psi: &WaveFn2D, f: &GeneratingFunction, quad: &QuadratureSpec) -> Result<WaveFn2D> {
    let g = psi
        .closed()
        .ok_or_else(|| Error::InvalidParameters("Dirac transform needs a closed-form wavefunction".into()))?;
    if psi.vars != f.new {
        return Err(Error::VariableMismatch(psi.vars[0]));
    }
    let i = Complex64::new(0.0, 1.0);
    let phase = f.poly.map_coeffs(|c| c.to_c64() * i);
    let exponent = g.exponent().to_poly() + phase;
    let vars = vec![f.old[0], f.old[1], f.new[0], f.new[1]];
    let integrand = GaussPoly::from_polys(vars, g.prefactor().clone(), &exponent)?;
    let b = f.mixed_hessian();
    let det = b[0][0].to_c64() * b[1][1].to_c64() - b[0][1].to_c64() * b[1][0].to_c64();
    let norm = det.norm().sqrt() / (2.0 * std::f64::consts::PI);
    let out = WaveFn2D {
        repr: Repr::Dirac { integrand, over: f.new, norm, quad: quad.clone() },
        vars: f.old,
        n: psi.n,
        m: psi.m,
        frame: Frame::Pu,
        scale: Complex64::one(),
    };
    out.value(0.0, 0.0)?;
    Ok(out)
}

/// Half-widths of the box `[-r_q, r_q] x [-r_x, r_x]` holding ten standard deviations
/// of `|psi|^2` for the eigenfunctions in `(q, x)`.
pub fn pu_box(p: &PuParams) -> [f64; 2] {
    let delta = rational_to_f64(&p.delta());
    let w12 = p.omega1_f64() * p.omega2_f64();
    [10.0 / (2.0 * delta * w12).sqrt(), 10.0 / (2.0 * delta).sqrt()]
}

/// Largest per-axis Gauss-Legendre order tried by [`gram_matrix`].
pub const GRAM_MAX_ORDER: usize = 512;

/// Inner products `<psi_i, psi_j>` on a box by tensor Gauss-Legendre quadrature, with
/// the order doubled until the matrix changes by less than `tol`.
pub fn gram_matrix(states: &[&WaveFn2D], radii: [f64; 2], quad: &QuadratureSpec, tol: f64) -> Result<DMatrix<Complex64>> {
    let eval = |order: usize| -> Result<DMatrix<Complex64>> {
        let rule = gauss_legendre(order);
        let nodes: Vec<(f64, f64, f64)> = (0..order * order)
            .map(|k| {
                let (i, j) = (k / order, k % order);
                let w = rule.weights[i] * rule.weights[j] * radii[0] * radii[1];
                (rule.nodes[i] * radii[0], rule.nodes[j] * radii[1], w)
            })
            .collect();
        let values: Vec<Vec<Complex64>> = states
            .iter()
            .map(|s| nodes.par_iter().map(|&(a, b, _)| s.value(a, b)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok(DMatrix::from_fn(states.len(), states.len(), |r, c| {
            nodes.iter().enumerate().map(|(k, n)| values[r][k].conj() * values[c][k] * n.2).sum()
        }))
    };
    let mut order = quad.box_order.max(8);
    let mut prev = eval(order)?;
    while order < GRAM_MAX_ORDER {
        order *= 2;
        let next = eval(order)?;
        let change = (&next - &prev).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if change <= tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::UnderResolved(format!("Gram matrix did not converge up to order {}", order)))
}

/// Largest `|u - e^{i phi} v| / max|u|` with the phase taken from `<v, u>`.
pub fn distance_up_to_phase(u: &[Complex64], v: &[Complex64]) -> f64 {
    let inner: Complex64 = u.iter().zip(v).map(|(a, b)| b.conj() * a).sum();
    let phase = if inner.norm() > 0.0 { inner / inner.norm() } else { Complex64::one() };
    let scale = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
    u.iter().zip(v).map(|(a, b)| (a - phase * b).norm()).fold(0.0, f64::max) / scale.max(f64::MIN_POSITIVE)
}

#[derive(Clone, Debug, Serialize)]
pub struct NormEntry {
    pub delta: String,
    pub omega1: String,
    pub omega2: String,
    pub norm_squared: f64,
}

/// Squared norms of the unnormalised closed form as `Delta -> 0` at mean frequency 1.
#[derive(Clone, Debug, Serialize)]
pub struct NormDivergence {
    pub n: u32,
    pub m: u32,
    pub entries: Vec<NormEntry>,
    pub monotone: bool,
    /// `(norm(Delta_{k+1}) / norm(Delta_k)) / (Delta_k / Delta_{k+1})`, one per step.
    pub rate_ratios: Vec<f64>,
}

impl NormDivergence {
    /// Growth matches `1/Delta` to relative tolerance `tol` at every step.
    pub fn inverse_rate_within(&self, tol: f64) -> bool {
        self.rate_ratios.iter().all(|r| (r - 1.0).abs() <= tol)
    }
}

/// Uses `Omega1 = 1 + Delta/2`, `Omega2 = 1 - Delta/2` for each `Delta` in `(0, 2)`.
pub fn equal_freq_norm_divergence(n: u32, m: u32, deltas: &[Rational], quad: &QuadratureSpec) -> Result<NormDivergence> {
    let mut entries = Vec::new();
    let mut norms = Vec::new();
    for d in deltas {
        let half = d * rat(1, 2);
        let p = PuParams::new(int(1) + &half, int(1) - &half, int(1))?;
        check_pu_closed(&p)?;
        let nsq = norm_squared(&pu_closed_c64(n, m, &p)?, quad)?;
        norms.push(nsq);
        entries.push(NormEntry {
            delta: crate::scalar::render_rational(d),
            omega1: crate::scalar::render_rational(&p.omega1),
            omega2: crate::scalar::render_rational(&p.omega2),
            norm_squared: nsq,
        });
    }
    let monotone = deltas.windows(2).zip(norms.windows(2)).all(|(d, v)| (d[1] < d[0]) == (v[1] > v[0]));
    let rate_ratios = deltas
        .windows(2)
        .zip(norms.windows(2))
        .map(|(d, v)| (v[1] / v[0]) / (rational_to_f64(&d[0]) / rational_to_f64(&d[1])))
        .collect();
    Ok(NormDivergence { n, m, entries, monotone, rate_ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::generating_function;
    use crate::wigner::{osc_wigner, pu_wigner, WignerState};

    fn params(a: i64, b: i64) -> PuParams {
        PuParams::ints(a, b).unwrap()
    }

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn oscillator_states_are_orthonormal() {
        let p = params(4, 1);
        let a = osc_wavefunction(0, 0, &p).unwrap();
        let b = osc_wavefunction(1, 0, &p).unwrap();
        let ga = a.closed().unwrap();
        let gb = b.closed().unwrap();
        assert!((integrate_all(&ga.mul(&ga.conj()), &quad()).unwrap().value.re - 1.0).abs() < 1e-10);
        assert!(integrate_all(&ga.conj().mul(&gb), &quad()).unwrap().value.norm() < 1e-10);
        assert!(osc_wavefunction(0, 0, &PuParams::new(int(4), int(1), int(2)).unwrap()).is_err());
    }

    #[test]
    fn ground_state_wigner_matches_closed_form() {
        let p = params(4, 1);
        let psi = osc_wavefunction(0, 0, &p).unwrap();
        let rho = osc_wigner(&WignerState::new(0, 0, p.clone(), Frame::Oscillator).unwrap()).unwrap();
        for pt in [[0.0, 0.0, 0.0, 0.0], [0.3, -0.5, 0.8, 0.2], [-1.0, 1.5, 0.4, -0.9]] {
            let w = wigner_point(&psi, [pt[0], pt[2]], [pt[1], pt[3]], &quad()).unwrap();
            assert!((w.re - rho.value(&pt)).abs() < 1e-8);
            assert!(w.im.abs() < 1e-9);
        }
        let excited = osc_wavefunction(2, 1, &p).unwrap();
        let rho = osc_wigner(&WignerState::new(2, 1, p, Frame::Oscillator).unwrap()).unwrap();
        let pt = [0.3, -0.5, 0.2, 0.7];
        let w = wigner_point(&excited, [pt[0], pt[2]], [pt[1], pt[3]], &quad()).unwrap();
        assert!((w.re - rho.value(&pt)).abs() < 1e-8 && w.im.abs() < 1e-9);
    }

    #[test]
    fn pu_ground_state_wigner() {
        let p = params(4, 1);
        let psi = pu_wavefunction_closed(0, 0, &p).unwrap();
        let rho = pu_wigner(&WignerState::new(0, 0, p, Frame::Pu).unwrap()).unwrap();
        for pt in [[0.0, 0.0, 0.0, 0.0], [0.1, 0.4, -0.3, 0.5]] {
            let w = wigner_point(&psi, [pt[0], pt[2]], [pt[1], pt[3]], &quad()).unwrap();
            assert!((w.re - rho.value(&pt)).abs() < 1e-6, "{} vs {}", w.re, rho.value(&pt));
        }
    }

    #[test]
    fn inversion_recovers_oscillator_states() {
        let p = params(4, 1);
        for (n, m) in [(0, 0), (1, 0)] {
            let rho = osc_wigner(&WignerState::new(n, m, p.clone(), Frame::Oscillator).unwrap()).unwrap();
            let psi = wavefunction_from_wigner(&rho, n, m, &quad()).unwrap();
            let exact = osc_wavefunction(n, m, &p).unwrap();
            if let Repr::FromWigner { reference, .. } = psi.repr {
                assert_eq!(reference == [0.0, 0.0], n == 0);
                let r = psi.value(reference[0], reference[1]).unwrap();
                assert!(r.im.abs() < 1e-12 && r.re > 0.0);
            }
            let pts = [[0.0, 0.1], [0.4, -0.3], [-0.6, 0.5]];
            let u: Vec<_> = pts.iter().map(|p| exact.value(p[0], p[1]).unwrap()).collect();
            let v: Vec<_> = pts.iter().map(|p| psi.value(p[0], p[1]).unwrap()).collect();
            assert!(distance_up_to_phase(&u, &v) < 1e-8);
        }
    }

    #[test]
    fn dirac_transform_of_ground_state() {
        let p = params(4, 1);
        let f = generating_function(&p).unwrap();
        let psi = dirac_transform(&osc_wavefunction(0, 0, &p).unwrap(), &f, &quad()).unwrap();
        let closed = pu_wavefunction_closed(0, 0, &p).unwrap();
        let pts = [[0.0, 0.0], [0.2, -0.4], [-0.5, 0.3], [0.7, 0.9]];
        let u: Vec<_> = pts.iter().map(|p| closed.value(p[0], p[1]).unwrap()).collect();
        let v: Vec<_> = pts.iter().map(|p| psi.value(p[0], p[1]).unwrap()).collect();
        assert!(distance_up_to_phase(&u, &v) < 1e-10);
        // |psi(0)|^2 = (Delta sqrt(W1 W2) / pi) for the unit-norm ground state
        let expected = (3.0 * 2.0 / std::f64::consts::PI).sqrt();
        assert!((v[0].norm() - expected).abs() < 1e-10);
    }

    #[test]
    fn closed_form_solves_schrodinger_exactly() {
        let p = params(4, 1);
        let op = schrodinger_operator::<Scalar>(&p);
        for (n, m) in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (2, 2)] {
            let g = pu_wavefunction_exact(n, m, &p).unwrap();
            let e = Scalar::new(energy(&p, n, m), Rational::zero());
            assert!(g.apply(&op).unwrap().sub(&g.scale(&e)).unwrap().is_zero(), "({n},{m})");
        }
        assert!(matches!(pu_wavefunction_exact(0, 0, &params(3, 1)), Err(Error::NotRepresentable(_))));
    }

    #[test]
    fn closed_form_residual_in_floating_point() {
        let p = params(3, 2);
        let psi = pu_wavefunction_closed(2, 1, &p).unwrap();
        let pts = [[0.1, 0.2], [-0.3, 0.5], [0.6, -0.4]];
        assert!(schrodinger_residual(&psi, &p, &pts).unwrap() < 1e-10);
    }

    #[test]
    fn closed_form_errors() {
        assert!(matches!(pu_wavefunction_closed(0, 0, &params(2, 2)), Err(Error::NonNormalizable(_))));
        assert!(matches!(pu_wavefunction_closed(0, 0, &params(1, 2)), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn norm_divergence() {
        let r = equal_freq_norm_divergence(0, 0, &[rat(1, 2), rat(1, 4), rat(1, 8)], &quad()).unwrap();
        assert!(r.monotone);
        assert!(r.inverse_rate_within(0.05));
        // pi / (Delta sqrt(W1 W2))
        let expected = std::f64::consts::PI / (0.5 * (1.0f64 - 1.0 / 16.0).sqrt());
        assert!((r.entries[0].norm_squared - expected).abs() < 1e-9);
    }

    #[test]
    fn dirac_transform_of_excited_states() {
        let p = params(4, 1);
        let f = generating_function(&p).unwrap();
        let pts = [[0.1, 0.0], [0.2, -0.4], [-0.5, 0.3], [0.7, 0.9], [0.0, 0.6]];
        for (n, m) in [(1, 0), (0, 1), (1, 1), (2, 1)] {
            let psi = dirac_transform(&osc_wavefunction(n, m, &p).unwrap(), &f, &quad()).unwrap();
            let closed = pu_wavefunction_closed(n, m, &p).unwrap();
            let u: Vec<_> = pts.iter().map(|p| closed.value(p[0], p[1]).unwrap()).collect();
            let v: Vec<_> = pts.iter().map(|p| psi.value(p[0], p[1]).unwrap()).collect();
            assert!(distance_up_to_phase(&u, &v) < 1e-8, "({n},{m})");
        }
    }

    #[test]
    fn closed_forms_are_orthonormal() {
        let p = params(3, 2);
        let states: Vec<_> = [(0, 0), (1, 0), (0, 1), (1, 1)]
            .iter()
            .map(|&(n, m)| pu_wavefunction_closed(n, m, &p).unwrap())
            .collect();
        let refs: Vec<_> = states.iter().collect();
        let g = gram_matrix(&refs, pu_box(&p), &quad(), 1e-9).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((g[(r, c)] - c64(want)).norm() < 1e-6, "({r},{c}) {}", g[(r, c)]);
            }
        }
    }

    #[test]
    fn phase_distance() {
        let u = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)];
        let v: Vec<_> = u.iter().map(|z| z * Complex64::new(0.0, 1.0)).collect();
        assert!(distance_up_to_phase(&u, &v) < 1e-15);
    }
}
