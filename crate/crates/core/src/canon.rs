//! Linear canonical transformations of the `(q, x, p_q, p_x)` phase space, their
//! type-1 generating functions and Hamiltonian pullbacks.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Poly, VarId};
use crate::pu::{hamiltonian, oscillator_hamiltonian, PuParams};
use crate::scalar::{int, rat, rational_to_f64, Field, QuadExt, Rational, Ring, Scalar, ToComplex64};

/// `a + b sqrt(d)` over complex rationals.
pub type Surd = QuadExt<Scalar>;

pub type Matrix<T> = Vec<Vec<T>>;

/// Old phase-space variables in map order.
pub const PU_VARS: [VarId; 4] = [VarId::Q, VarId::X, VarId::Pq, VarId::Px];
pub const OSC_VARS: [VarId; 4] = [VarId::X1, VarId::X2, VarId::P1, VarId::P2];
pub const EQUAL_FREQ_VARS: [VarId; 4] = [VarId::Q1, VarId::Q2, VarId::P1, VarId::P2];

pub fn surd(r: Rational) -> Surd {
    Surd::from_rational(&r)
}

/// Lifts a rational polynomial into the extension.
pub fn lift(p: &Poly<Rational>) -> Poly<Surd> {
    p.map_coeffs(|c| Surd::from_rational(c))
}

pub fn identity<T: Ring>(n: usize) -> Matrix<T> {
    (0..n).map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect()
}

pub fn mat_mul<T: Ring>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, |r| r.len()));
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).fold(T::zero(), |acc, l| acc + a[i][l].clone() * b[l][j].clone()))
                .collect()
        })
        .collect()
}

pub fn transpose<T: Clone>(a: &Matrix<T>) -> Matrix<T> {
    let m = a.first().map_or(0, |r| r.len());
    (0..m).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

fn mat_scale<T: Ring>(a: &Matrix<T>, c: &T) -> Matrix<T> {
    a.iter().map(|r| r.iter().map(|x| x.clone() * c.clone()).collect()).collect()
}

fn mat_add<T: Ring>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.clone() + y.clone()).collect()).collect()
}

/// Gauss-Jordan inverse; `None` when singular.
pub fn mat_inverse<T: Field>(a: &Matrix<T>) -> Option<Matrix<T>> {
    let n = a.len();
    let mut m: Matrix<T> = a.clone();
    let mut inv = identity::<T>(n);
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col].inv();
        for j in 0..n {
            m[col][j] = m[col][j].clone() * p.clone();
            inv[col][j] = inv[col][j].clone() * p.clone();
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for j in 0..n {
                m[r][j] = m[r][j].clone() - f.clone() * m[col][j].clone();
                inv[r][j] = inv[r][j].clone() - f.clone() * inv[col][j].clone();
            }
        }
    }
    Some(inv)
}

/// Standard symplectic form for coordinates-then-momenta ordering.
pub fn symplectic_form<T: Ring>(pairs: usize) -> Matrix<T> {
    let n = 2 * pairs;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j == i + pairs {
                        T::one()
                    } else if i == j + pairs {
                        -T::one()
                    } else {
                        T::zero()
                    }
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    Diagonalize,
    EqualFrequency,
    Identity,
}

/// `old = M new`, both vectors ordered coordinates first, then momenta.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearCanonicalMap {
    pub matrix: Matrix<Surd>,
    pub old: [VarId; 4],
    pub new: [VarId; 4],
    pub kind: MapKind,
}

impl LinearCanonicalMap {
    pub fn new(matrix: Matrix<Surd>, old: [VarId; 4], new: [VarId; 4], kind: MapKind) -> Result<Self> {
        if matrix.len() != 4 || matrix.iter().any(|r| r.len() != 4) {
            return Err(Error::InvalidParameters("canonical map matrix must be 4x4".into()));
        }
        Ok(Self { matrix, old, new, kind })
    }

    pub fn identity() -> Self {
        Self { matrix: identity(4), old: PU_VARS, new: PU_VARS, kind: MapKind::Identity }
    }

    /// `M^T J M - J`, exactly.
    pub fn symplectic_defect(&self) -> Matrix<Surd> {
        let j = symplectic_form::<Surd>(2);
        let lhs = mat_mul(&mat_mul(&transpose(&self.matrix), &j), &self.matrix);
        mat_add(&lhs, &mat_scale(&j, &-Surd::one()))
    }

    pub fn is_symplectic(&self) -> bool {
        self.symplectic_defect().iter().flatten().all(|x| x.is_zero())
    }

    /// Largest entry of `|M^T J M - J|` in floating point.
    pub fn symplectic_defect_f64(&self) -> f64 {
        let m = self.to_c64();
        let j = DMatrix::from_fn(4, 4, |r, c| {
            Complex64::new(if c == r + 2 { 1.0 } else if r == c + 2 { -1.0 } else { 0.0 }, 0.0)
        });
        let d = m.transpose() * &j * &m - &j;
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn to_c64(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(4, 4, |r, c| self.matrix[r][c].to_c64())
    }

    /// Inverse map `new = M^{-1} old`, by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        let inv = mat_inverse(&self.matrix).ok_or_else(|| Error::SingularParameters("map is not invertible".into()))?;
        Ok(Self { matrix: inv, old: self.new, new: self.old, kind: self.kind })
    }

    /// `-J M^T J`, which equals the inverse for a symplectic matrix.
    pub fn symplectic_inverse(&self) -> Matrix<Surd> {
        let j = symplectic_form::<Surd>(2);
        mat_scale(&mat_mul(&mat_mul(&j, &transpose(&self.matrix)), &j), &-Surd::one())
    }

    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if self.new != inner.old {
            return Err(Error::InvalidParameters("maps do not chain".into()));
        }
        Ok(Self { matrix: mat_mul(&self.matrix, &inner.matrix), old: self.old, new: inner.new, kind: self.kind })
    }

    /// Old variables as linear polynomials in the new ones.
    pub fn substitution(&self) -> BTreeMap<VarId, Poly<Surd>> {
        let mut subs = BTreeMap::new();
        for (i, &v) in self.old.iter().enumerate() {
            let mut p = Poly::zero();
            for (j, &w) in self.new.iter().enumerate() {
                p = p + Poly::var(w).scale(&self.matrix[i][j]);
            }
            subs.insert(v, p);
        }
        subs
    }

    /// `h ∘ T`, expressed in the new variables.
    pub fn pullback(&self, h: &Poly<Surd>) -> Result<Poly<Surd>> {
        if let Some(v) = h.vars().into_iter().find(|v| !v.is_parameter() && !self.old.contains(v)) {
            return Err(Error::VariableMismatch(v));
        }
        Ok(h.substitute(&self.substitution()))
    }

    /// Image of a numeric point of the new variables.
    pub fn apply_c64(&self, new: &[Complex64; 4]) -> [Complex64; 4] {
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (i, o) in out.iter_mut().enumerate() {
            for (j, z) in new.iter().enumerate() {
                *o += self.matrix[i][j].to_c64() * z;
            }
        }
        out
    }
}

/// Quadratic type-1 generating function `F(old coordinates, new coordinates)` with
/// `p = dF/d(old)` and `P = -dF/d(new)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratingFunction {
    pub poly: Poly<Surd>,
    pub old: [VarId; 2],
    pub old_momenta: [VarId; 2],
    pub new: [VarId; 2],
    pub new_momenta: [VarId; 2],
}

impl GeneratingFunction {
    pub fn new(
        poly: Poly<Surd>,
        old: [VarId; 2],
        old_momenta: [VarId; 2],
        new: [VarId; 2],
        new_momenta: [VarId; 2],
    ) -> Result<Self> {
        if poly.degree() > 2 {
            return Err(Error::NotQuadratic("generating function must be quadratic".into()));
        }
        if let Some(v) = poly.vars().into_iter().find(|v| !old.contains(v) && !new.contains(v)) {
            return Err(Error::VariableMismatch(v));
        }
        let f = Self { poly, old, old_momenta, new, new_momenta };
        if mat_inverse(&f.mixed_hessian()).is_none() {
            return Err(Error::SingularParameters("mixed Hessian of the generating function is singular".into()));
        }
        Ok(f)
    }

    fn second(&self, a: VarId, b: VarId) -> Surd {
        self.poly.diff(a).diff(b).constant_term()
    }

    fn block(&self, rows: &[VarId; 2], cols: &[VarId; 2]) -> Matrix<Surd> {
        rows.iter().map(|&a| cols.iter().map(|&b| self.second(a, b)).collect()).collect()
    }

    /// `d^2 F / d(old_i) d(new_j)`.
    pub fn mixed_hessian(&self) -> Matrix<Surd> {
        self.block(&self.old, &self.new)
    }

    /// Solves `p = dF/dq`, `P = -dF/dQ` for `(q, p)` in terms of `(Q, P)`.
    pub fn induced_map(&self, kind: MapKind) -> Result<LinearCanonicalMap> {
        let a = self.block(&self.old, &self.old);
        let b = self.mixed_hessian();
        let c = self.block(&self.new, &self.new);
        let bt_inv = mat_inverse(&transpose(&b))
            .ok_or_else(|| Error::SingularParameters("mixed Hessian is singular".into()))?;
        let neg = -Surd::one();
        let q_from_q = mat_scale(&mat_mul(&bt_inv, &c), &neg);
        let q_from_p = mat_scale(&bt_inv, &neg);
        let p_from_q = mat_add(&mat_mul(&a, &q_from_q), &b);
        let p_from_p = mat_mul(&a, &q_from_p);
        let mut m = vec![vec![Surd::zero(); 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = q_from_q[i][j].clone();
                m[i][j + 2] = q_from_p[i][j].clone();
                m[i + 2][j] = p_from_q[i][j].clone();
                m[i + 2][j + 2] = p_from_p[i][j].clone();
            }
        }
        let old = [self.old[0], self.old[1], self.old_momenta[0], self.old_momenta[1]];
        let new = [self.new[0], self.new[1], self.new_momenta[0], self.new_momenta[1]];
        LinearCanonicalMap::new(m, old, new, kind)
    }

    /// `dF/d(old)` at a numeric point `(old coordinates, new coordinates)`.
    pub fn old_momenta_at(&self, old: [Complex64; 2], new: [Complex64; 2]) -> [Complex64; 2] {
        let value = |v: VarId| {
            if let Some(i) = self.old.iter().position(|w| *w == v) {
                old[i]
            } else if let Some(i) = self.new.iter().position(|w| *w == v) {
                new[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        [self.poly.diff(self.old[0]).eval_c64(value), self.poly.diff(self.old[1]).eval_c64(value)]
    }
}

fn term(c: Surd, vars: &[VarId]) -> Poly<Surd> {
    vars.iter().fold(Poly::constant(c), |acc, &v| &acc * &Poly::var(v))
}

/// Maps the Hamiltonian onto `H1 - H2` in `(X1, X2, P1, P2)`:
/// `q = (W1 X2 - P1)/(W1 g)`, `x = (W1 X1 - P2)/g`, `p_q = W1 (W1 P2 - W2^2 X1)/g`,
/// `p_x = (W1 P1 - W2^2 X2)/g` with `g = sqrt(W1^2 - W2^2)`.
pub fn diagonalizing_map(p: &PuParams) -> Result<LinearCanonicalMap> {
    let g: Surd = p.gamma()?;
    let inv_g = Surd::one() / g;
    let w1 = surd(p.omega1.clone());
    let w2sq = surd(&p.omega2 * &p.omega2);
    let z = Surd::zero;
    let s = |x: Surd| x * inv_g.clone();
    let m = vec![
        vec![z(), s(Surd::one() ), s(-Surd::one() / w1.clone()), z()],
        vec![s(w1.clone()), z(), z(), s(-Surd::one())],
        vec![s(-(w1.clone() * w2sq.clone())), z(), z(), s(w1.clone() * w1.clone())],
        vec![z(), s(-w2sq), s(w1), z()],
    ];
    LinearCanonicalMap::new(m, PU_VARS, OSC_VARS, MapKind::Diagonalize)
}

/// `F = W1 g q X1 + g x X2 - W1^2 q x - W1 X1 X2`.
pub fn generating_function(p: &PuParams) -> Result<GeneratingFunction> {
    let g: Surd = p.gamma()?;
    let w1 = surd(p.omega1.clone());
    let poly = term(w1.clone() * g.clone(), &[VarId::Q, VarId::X1])
        + term(g, &[VarId::X, VarId::X2])
        + term(-(w1.clone() * w1.clone()), &[VarId::Q, VarId::X])
        + term(-w1, &[VarId::X1, VarId::X2]);
    GeneratingFunction::new(
        poly,
        [VarId::Q, VarId::X],
        [VarId::Pq, VarId::Px],
        [VarId::X1, VarId::X2],
        [VarId::P1, VarId::P2],
    )
}

/// Equal-frequency generating function `F = i W^2 q Q2 - W^2 q x + i W x Q1 + (W/4) Q1 Q2`
/// and its induced (complex) canonical map.
pub fn equal_freq_map(omega: &Rational, hbar: &Rational) -> Result<(GeneratingFunction, LinearCanonicalMap)> {
    if *omega <= Rational::zero() || *hbar <= Rational::zero() {
        return Err(Error::InvalidParameters("omega and hbar must be positive".into()));
    }
    let w = surd(omega.clone());
    let i = Surd::from_base(Scalar::new(Rational::zero(), Rational::one()));
    let poly = term(i.clone() * w.clone() * w.clone(), &[VarId::Q, VarId::Q2])
        + term(-(w.clone() * w.clone()), &[VarId::Q, VarId::X])
        + term(i * w.clone(), &[VarId::X, VarId::Q1])
        + term(w * surd(rat(1, 4)), &[VarId::Q1, VarId::Q2]);
    let f = GeneratingFunction::new(
        poly,
        [VarId::Q, VarId::X],
        [VarId::Pq, VarId::Px],
        [VarId::Q1, VarId::Q2],
        [VarId::P1, VarId::P2],
    )?;
    let map = f.induced_map(MapKind::EqualFrequency)?;
    Ok((f, map))
}

/// `H_W = W (Q1 P2 - Q2 P1) - (W^2/4)(Q1^2 + Q2^2)`.
pub fn equal_freq_hamiltonian(omega: &Rational) -> Poly<Surd> {
    let w = surd(omega.clone());
    let quarter = surd(-(omega * omega) / int(4));
    term(w.clone(), &[VarId::Q1, VarId::P2]) - term(w, &[VarId::Q2, VarId::P1])
        + term(quarter.clone(), &[VarId::Q1, VarId::Q1])
        + term(quarter, &[VarId::Q2, VarId::Q2])
}

/// `E_mk = W hbar (m - W hbar k^2 / 4)`.
pub fn equal_freq_spectrum(omega: f64, hbar: f64, m: i64, k: f64) -> f64 {
    omega * hbar * (m as f64 - omega * hbar * k * k / 4.0)
}

/// Normal-mode frequencies of a quadratic Hamiltonian: `|Im|` of the eigenvalues of
/// `J Hess(h)`, sorted, over the variables `vars` (coordinates then momenta).
pub fn normal_mode_frequencies(h: &Poly<Rational>, vars: &[VarId; 4]) -> Vec<f64> {
    let s = DMatrix::from_fn(4, 4, |r, c| {
        let d = h.diff(vars[r]).diff(vars[c]).constant_term();
        rational_to_f64(&d)
    });
    let j = DMatrix::from_fn(4, 4, |r, c| if c == r + 2 { 1.0 } else if r == c + 2 { -1.0 } else { 0.0 });
    let mut out: Vec<f64> = (j * s).complex_eigenvalues().iter().map(|z| z.im.abs()).collect();
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalue"));
    out
}

/// Machine-readable summary of a transformation and the pulled-back Hamiltonian.
#[derive(Clone, Debug, Serialize)]
pub struct TransformReport {
    pub kind: MapKind,
    pub conventions: Conventions,
    pub old_vars: Vec<String>,
    pub new_vars: Vec<String>,
    pub matrix: Vec<Vec<String>>,
    /// `[re, im]` per entry.
    pub matrix_f64: Vec<Vec<[f64; 2]>>,
    pub symplectic: bool,
    pub generating_function: Option<String>,
    pub mixed_hessian: Option<Vec<Vec<String>>>,
    pub hamiltonian: String,
    pub pullback: String,
    pub expected: String,
    pub pullback_matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Conventions {
    pub matrix: &'static str,
    pub ordering: &'static str,
    pub momenta: &'static str,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            matrix: "old = M * new",
            ordering: "coordinates first, then momenta",
            momenta: "p = dF/d(old), P = -dF/d(new)",
        }
    }
}

fn render_matrix(m: &Matrix<Surd>) -> Vec<Vec<String>> {
    use crate::scalar::RenderCoeff;
    m.iter().map(|r| r.iter().map(|x| x.render()).collect()).collect()
}

/// Builds the map of the requested kind and checks the pullback against its target.
pub fn transform_report(kind: MapKind, p: &PuParams) -> Result<TransformReport> {
    let (map, f, h, expected) = match kind {
        MapKind::Diagonalize => {
            let map = diagonalizing_map(p)?;
            let f = generating_function(p)?;
            (map, Some(f), lift(&hamiltonian(p)), lift(&oscillator_hamiltonian(p)))
        }
        MapKind::EqualFrequency => {
            let (f, map) = equal_freq_map(&p.omega1, &p.hbar)?;
            let equal = PuParams::new(p.omega1.clone(), p.omega1.clone(), p.hbar.clone())?;
            (map, Some(f), lift(&hamiltonian(&equal)), equal_freq_hamiltonian(&p.omega1))
        }
        MapKind::Identity => {
            let h = lift(&hamiltonian(p));
            (LinearCanonicalMap::identity(), None, h.clone(), h)
        }
    };
    let pullback = map.pullback(&h)?;
    let c = map.to_c64();
    Ok(TransformReport {
        kind,
        conventions: Conventions::default(),
        old_vars: map.old.iter().map(|v| v.name().to_string()).collect(),
        new_vars: map.new.iter().map(|v| v.name().to_string()).collect(),
        matrix: render_matrix(&map.matrix),
        matrix_f64: (0..4).map(|r| (0..4).map(|s| [c[(r, s)].re, c[(r, s)].im]).collect()).collect(),
        symplectic: map.is_symplectic(),
        generating_function: f.as_ref().map(|f| f.poly.to_string()),
        mixed_hessian: f.as_ref().map(|f| render_matrix(&f.mixed_hessian())),
        hamiltonian: h.to_string(),
        pullback: pullback.to_string(),
        expected: expected.to_string(),
        pullback_matches: pullback == expected,
    })
}
