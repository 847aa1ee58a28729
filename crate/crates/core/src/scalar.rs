//! Coefficient rings shared by the algebraic layers.
//!
//! Everything above this module is written against [`Ring`], so the same
//! polynomial, Gaussian and special-function code runs over exact rationals,
//! complex rationals, the quadratic extension [`QuadExt`], plain floats, and
//! even over [`Poly`](crate::poly::Poly) itself.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number.
pub type Rational = BigRational;

/// Complex number with exact rational parts.
pub type Scalar = Complex<BigRational>;

/// Commutative ring with a canonical embedding of the rationals.
pub trait Ring:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_rational(r: &Rational) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn pow_u32(&self, k: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

/// Ring with exact division.
pub trait Field: Ring + Div<Output = Self> {
    fn inv(&self) -> Self {
        Self::one() / self.clone()
    }
}

/// Ring containing the imaginary unit.
pub trait ComplexRing: Ring {
    fn imag_unit() -> Self;
    fn conj(&self) -> Self;
}

/// Numeric evaluation into `Complex64`.
pub trait ToComplex64 {
    fn to_c64(&self) -> Complex64;
}

/// Human readable rendering used by golden-file output: rationals as `a/b`.
pub trait RenderCoeff {
    fn render(&self) -> String;
}

impl Ring for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
}
impl Field for Rational {}

impl Ring for Scalar {
    fn from_rational(r: &Rational) -> Self {
        Complex::new(r.clone(), Rational::zero())
    }
}
impl Field for Scalar {}

impl ComplexRing for Scalar {
    fn imag_unit() -> Self {
        Complex::new(Rational::zero(), Rational::one())
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
}

impl Ring for f64 {
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
}
impl Field for f64 {}

impl Ring for Complex64 {
    fn from_rational(r: &Rational) -> Self {
        Complex64::new(rational_to_f64(r), 0.0)
    }
}
impl Field for Complex64 {}

impl ComplexRing for Complex64 {
    fn imag_unit() -> Self {
        Complex64::i()
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
}

impl ToComplex64 for Rational {
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }
}
impl ToComplex64 for Scalar {
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}
impl ToComplex64 for f64 {
    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
}
impl ToComplex64 for Complex64 {
    fn to_c64(&self) -> Complex64 {
        *self
    }
}

impl RenderCoeff for Rational {
    fn render(&self) -> String {
        render_rational(self)
    }
}

impl RenderCoeff for Scalar {
    fn render(&self) -> String {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => render_rational(&self.re),
            (true, false) => render_imag(&self.im),
            (false, false) => {
                let im = render_imag(&self.im);
                let (sign, mag) = match im.strip_prefix('-') {
                    Some(rest) => ("-", rest.to_string()),
                    None => ("+", im),
                };
                format!("({} {} {})", render_rational(&self.re), sign, mag)
            }
        }
    }
}

impl RenderCoeff for f64 {
    fn render(&self) -> String {
        format!("{}", self)
    }
}

impl RenderCoeff for Complex64 {
    fn render(&self) -> String {
        if self.im == 0.0 {
            format!("{}", self.re)
        } else {
            format!("({} + {}*i)", self.re, self.im)
        }
    }
}

fn render_imag(im: &Rational) -> String {
    if im.is_one() {
        "i".to_string()
    } else if (-im).is_one() {
        "-i".to_string()
    } else {
        format!("{}*i", render_rational(im))
    }
}

/// `a/b` (or `a` for integers), the canonical exact text form.
pub fn render_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serde helper writing a rational as its `"a/b"` string.
pub fn serialize_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&render_rational(r))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerators/denominators: fall back to a scaled division.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Complex rational `re + im*i`.
pub fn scalar(re: Rational, im: Rational) -> Scalar {
    Complex::new(re, im)
}

/// Parses `a`, `a/b`, or a finite decimal such as `-0.125` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::InvalidParameters(format!("cannot parse `{}` as a rational", text));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::InvalidParameters(format!("zero denominator in `{}`", text)));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let w: BigInt = if whole_digits.is_empty() {
            BigInt::zero()
        } else {
            whole_digits.parse().map_err(|_| bad())?
        };
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let magnitude = Rational::new(w * &scale + f, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Exact square root when `r` is the square of a rational.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Splits `n > 0` as `s^2 * d` with `d` squarefree.
fn squarefree_split(n: &BigInt) -> (BigInt, BigInt) {
    let mut rest = n.clone();
    let mut square = BigInt::one();
    let mut free = BigInt::one();
    let mut p = BigInt::from(2);
    while &p * &p <= rest {
        let mut count = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            count += 1;
        }
        square *= num_traits::pow(p.clone(), (count / 2) as usize);
        if count % 2 == 1 {
            free *= &p;
        }
        p += 1;
    }
    free *= rest;
    (square, free)
}

/// `a + b*sqrt(d)` with `d` a squarefree positive integer, over a base ring `T`.
///
/// The radicand is carried per value; `radicand == 0` marks a value with no
/// surd part. Combining two values whose surd parts use different radicands
/// is a logic error and panics.
#[derive(Clone, Debug)]
pub struct QuadExt<T> {
    pub rational: T,
    pub surd: T,
    pub radicand: u64,
}

impl<T: Ring> QuadExt<T> {
    pub fn new(rational: T, surd: T, radicand: u64) -> Self {
        Self { rational, surd, radicand }.normalized()
    }

    pub fn from_base(value: T) -> Self {
        Self { rational: value, surd: T::zero(), radicand: 0 }
    }

    fn normalized(mut self) -> Self {
        if self.surd.is_zero() || self.radicand == 0 {
            if self.radicand == 0 && !self.surd.is_zero() {
                panic!("surd part without radicand");
            }
            self.surd = T::zero();
            self.radicand = 0;
        } else if self.radicand == 1 {
            self.rational = self.rational + self.surd.clone();
            self.surd = T::zero();
            self.radicand = 0;
        }
        self
    }

    fn merge_radicand(a: &Self, b: &Self) -> u64 {
        match (a.radicand, b.radicand) {
            (0, d) | (d, 0) => d,
            (d, e) if d == e => d,
            (d, e) => panic!("mixed radicands sqrt({}) and sqrt({})", d, e),
        }
    }

    /// `sqrt(r)` for a non-negative rational.
    pub fn sqrt_of(r: &Rational) -> Option<Self> {
        if r.is_negative() {
            return None;
        }
        if r.is_zero() {
            return Some(Self::zero());
        }
        let prod = r.numer() * r.denom();
        let (s, d) = squarefree_split(&prod);
        let coeff = Rational::new(s, r.denom().clone());
        let d = d.to_u64()?;
        if d == 1 {
            Some(Self::from_base(T::from_rational(&coeff)))
        } else {
            Some(Self::new(T::zero(), T::from_rational(&coeff), d))
        }
    }

    /// Galois conjugate `a - b*sqrt(d)`.
    pub fn galois_conj(&self) -> Self {
        Self { rational: self.rational.clone(), surd: -self.surd.clone(), radicand: self.radicand }
    }

    /// The base-ring value when the surd part vanishes.
    pub fn as_base(&self) -> Option<&T> {
        if self.surd.is_zero() {
            Some(&self.rational)
        } else {
            None
        }
    }
}

impl<T: Ring> PartialEq for QuadExt<T> {
    fn eq(&self, other: &Self) -> bool {
        self.rational == other.rational
            && self.surd == other.surd
            && (self.surd.is_zero() || self.radicand == other.radicand)
    }
}

impl<T: Ring> Add for QuadExt<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let d = Self::merge_radicand(&self, &rhs);
        Self { rational: self.rational + rhs.rational, surd: self.surd + rhs.surd, radicand: d }
            .normalized()
    }
}

impl<T: Ring> Sub for QuadExt<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Ring> Neg for QuadExt<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { rational: -self.rational, surd: -self.surd, radicand: self.radicand }
    }
}

impl<T: Ring> Mul for QuadExt<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let d = Self::merge_radicand(&self, &rhs);
        let dd = T::from_int(d as i64);
        let rational = self.rational.clone() * rhs.rational.clone()
            + self.surd.clone() * rhs.surd.clone() * dd;
        let surd = self.rational * rhs.surd + self.surd * rhs.rational;
        Self { rational, surd, radicand: d }.normalized()
    }
}

impl<T: Field> Div for QuadExt<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let conj = rhs.galois_conj();
        let norm = (rhs * conj.clone()).rational;
        let num = self * conj;
        Self {
            rational: num.rational / norm.clone(),
            surd: num.surd / norm,
            radicand: num.radicand,
        }
        .normalized()
    }
}

impl<T: Ring> Zero for QuadExt<T> {
    fn zero() -> Self {
        Self::from_base(T::zero())
    }
    fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.surd.is_zero()
    }
}

impl<T: Ring> One for QuadExt<T> {
    fn one() -> Self {
        Self::from_base(T::one())
    }
}

impl<T: Ring> Ring for QuadExt<T> {
    fn from_rational(r: &Rational) -> Self {
        Self::from_base(T::from_rational(r))
    }
}

impl<T: Field> Field for QuadExt<T> {}

impl<T: ComplexRing> ComplexRing for QuadExt<T> {
    fn imag_unit() -> Self {
        Self::from_base(T::imag_unit())
    }
    fn conj(&self) -> Self {
        Self { rational: self.rational.conj(), surd: self.surd.conj(), radicand: self.radicand }
    }
}

impl<T: ToComplex64> ToComplex64 for QuadExt<T> {
    fn to_c64(&self) -> Complex64 {
        self.rational.to_c64() + self.surd.to_c64() * (self.radicand as f64).sqrt()
    }
}

impl<T: Ring + RenderCoeff> RenderCoeff for QuadExt<T> {
    fn render(&self) -> String {
        if self.surd.is_zero() {
            return self.rational.render();
        }
        let surd = format!("{}*sqrt({})", self.surd.render(), self.radicand);
        if self.rational.is_zero() {
            surd
        } else {
            format!("({} + {})", self.rational.render(), surd)
        }
    }
}
