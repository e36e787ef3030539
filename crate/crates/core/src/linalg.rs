//! Fixed-size complex linear algebra: 3-vectors, 3x3 matrices, commutators
//! and rank-one Hermitian projectors.
//!
//! Everything here is generic over [`Real`], so the same kernel runs in
//! `f32` and `f64`. Tolerance checks use the max-entry norm throughout.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest admissible `(phi^+, phi)` for a projector; below it the dressing point is singular.
pub const DEFAULT_PROJECTOR_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexVector3<T> {
    pub c: [Complex<T>; 3],
}

impl<T: Real> ComplexVector3<T> {
    pub fn new(a: Complex<T>, b: Complex<T>, c: Complex<T>) -> Self {
        Self { c: [a, b, c] }
    }

    pub fn zeros() -> Self {
        Self { c: [Complex::zero(); 3] }
    }

    pub fn from_real(a: T, b: T, c: T) -> Self {
        Self::new(Complex::new(a, T::zero()), Complex::new(b, T::zero()), Complex::new(c, T::zero()))
    }

    /// Sum of squared moduli, `(v^+, v)`.
    pub fn norm_sq(&self) -> T {
        self.c.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.c.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    /// Hermitian inner product `(self^+, other)`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        (0..3).fold(Complex::zero(), |acc, k| acc + self.c[k].conj() * other.c[k])
    }

    /// Bilinear pairing of a row vector `self` with a column vector `other`.
    pub fn pair(&self, other: &Self) -> Complex<T> {
        (0..3).fold(Complex::zero(), |acc, k| acc + self.c[k] * other.c[k])
    }

    pub fn conj(&self) -> Self {
        Self { c: self.c.map(|z| z.conj()) }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { c: self.c.map(|z| z * s) }
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl<T: Real> Index<usize> for ComplexVector3<T> {
    type Output = Complex<T>;
    fn index(&self, i: usize) -> &Complex<T> {
        &self.c[i]
    }
}

impl<T: Real> IndexMut<usize> for ComplexVector3<T> {
    fn index_mut(&mut self, i: usize) -> &mut Complex<T> {
        &mut self.c[i]
    }
}

impl<T: Real> Add for ComplexVector3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { c: [self.c[0] + rhs.c[0], self.c[1] + rhs.c[1], self.c[2] + rhs.c[2]] }
    }
}

impl<T: Real> Sub for ComplexVector3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self { c: [self.c[0] - rhs.c[0], self.c[1] - rhs.c[1], self.c[2] - rhs.c[2]] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexMatrix3<T> {
    pub m: [[Complex<T>; 3]; 3],
}

impl<T: Real> ComplexMatrix3<T> {
    pub fn zeros() -> Self {
        Self { m: [[Complex::zero(); 3]; 3] }
    }

    pub fn identity() -> Self {
        Self::diag([Complex::one(); 3])
    }

    pub fn diag(d: [Complex<T>; 3]) -> Self {
        let mut out = Self::zeros();
        for (k, v) in d.into_iter().enumerate() {
            out.m[k][k] = v;
        }
        out
    }

    pub fn diag_real(a: T, b: T, c: T) -> Self {
        let z = T::zero();
        Self::diag([Complex::new(a, z), Complex::new(b, z), Complex::new(c, z)])
    }

    /// `J = diag(1, 1, -1)`.
    pub fn j() -> Self {
        Self::diag_real(T::one(), T::one(), -T::one())
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut out = Self::zeros();
        for r in 0..3 {
            for c in 0..3 {
                out.m[r][c] = f(r, c);
            }
        }
        out
    }

    pub fn from_columns(cols: [ComplexVector3<T>; 3]) -> Self {
        Self::from_fn(|r, c| cols[c].c[r])
    }

    pub fn column(&self, c: usize) -> ComplexVector3<T> {
        ComplexVector3 { c: [self.m[0][c], self.m[1][c], self.m[2][c]] }
    }

    /// Tensor product `u (x) v` with entries `u_k v_j` (no conjugation).
    pub fn outer(u: &ComplexVector3<T>, v: &ComplexVector3<T>) -> Self {
        Self::from_fn(|r, c| u.c[r] * v.c[c])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|r, c| self.m[c][r].conj())
    }

    pub fn trace(&self) -> Complex<T> {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::from_fn(|r, c| self.m[r][c] * s)
    }

    pub fn scale_real(&self, s: T) -> Self {
        Self::from_fn(|r, c| self.m[r][c] * s)
    }

    pub fn mul_vec(&self, v: &ComplexVector3<T>) -> ComplexVector3<T> {
        let mut out = ComplexVector3::zeros();
        for r in 0..3 {
            out.c[r] = self.m[r][0] * v.c[0] + self.m[r][1] * v.c[1] + self.m[r][2] * v.c[2];
        }
        out
    }

    /// Row vector times matrix.
    pub fn vec_mul(v: &ComplexVector3<T>, m: &Self) -> ComplexVector3<T> {
        let mut out = ComplexVector3::zeros();
        for c in 0..3 {
            out.c[c] = v.c[0] * m.m[0][c] + v.c[1] * m.m[1][c] + v.c[2] * m.m[2][c];
        }
        out
    }

    /// Max-entry norm.
    pub fn max_abs(&self) -> T {
        self.m.iter().flatten().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    /// `max |M - M^+|`.
    pub fn hermitian_deviation(&self) -> T {
        (*self - self.adjoint()).max_abs()
    }

    /// `max |M + M^+|`.
    pub fn anti_hermitian_deviation(&self) -> T {
        (*self + self.adjoint()).max_abs()
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl<T: Real> Index<(usize, usize)> for ComplexMatrix3<T> {
    type Output = Complex<T>;
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.m[r][c]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for ComplexMatrix3<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.m[r][c]
    }
}

impl<T: Real> Add for ComplexMatrix3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|r, c| self.m[r][c] + rhs.m[r][c])
    }
}

impl<T: Real> AddAssign for ComplexMatrix3<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Real> Sub for ComplexMatrix3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|r, c| self.m[r][c] - rhs.m[r][c])
    }
}

impl<T: Real> Neg for ComplexMatrix3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_fn(|r, c| -self.m[r][c])
    }
}

impl<T: Real> Mul for ComplexMatrix3<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::from_fn(|r, c| self.m[r][0] * rhs.m[0][c] + self.m[r][1] * rhs.m[1][c] + self.m[r][2] * rhs.m[2][c])
    }
}

impl<T: Real> Mul<ComplexVector3<T>> for ComplexMatrix3<T> {
    type Output = ComplexVector3<T>;
    fn mul(self, rhs: ComplexVector3<T>) -> ComplexVector3<T> {
        self.mul_vec(&rhs)
    }
}

/// `[a, b] = ab - ba`.
pub fn commutator<T: Real>(a: &ComplexMatrix3<T>, b: &ComplexMatrix3<T>) -> ComplexMatrix3<T> {
    ComplexMatrix3::from_fn(|r, c| {
        let mut ab = Complex::<T>::zero();
        let mut ba = Complex::<T>::zero();
        for k in 0..3 {
            ab = ab + a.m[r][k] * b.m[k][c];
            ba = ba + b.m[r][k] * a.m[k][c];
        }
        ab - ba
    })
}

/// Rank-one Hermitian projector `P = phi phi^+ / (phi^+, phi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projector<T> {
    matrix: ComplexMatrix3<T>,
}

impl<T: Real> Projector<T> {
    pub fn matrix(&self) -> &ComplexMatrix3<T> {
        &self.matrix
    }

    /// Wraps `matrix` without checking that it is a projector.
    pub fn from_matrix_unchecked(matrix: ComplexMatrix3<T>) -> Self {
        Self { matrix }
    }

    pub fn into_matrix(self) -> ComplexMatrix3<T> {
        self.matrix
    }

    /// `max |P^2 - P|`.
    pub fn idempotency_deviation(&self) -> T {
        (self.matrix * self.matrix - self.matrix).max_abs()
    }
}

/// Builds the projector onto `phi`, with the default floor.
pub fn projector_from_vector<T: Real>(phi: &ComplexVector3<T>) -> Result<Projector<T>> {
    projector_with_floor(phi, DEFAULT_PROJECTOR_FLOOR)
}

/// Builds the projector onto `phi`; fails when `(phi^+, phi) <= floor`.
///
/// The vector is rescaled by its largest component first, so `P` stays
/// finite even when the entries of `phi` are far outside the unit range.
pub fn projector_with_floor<T: Real>(phi: &ComplexVector3<T>, floor: f64) -> Result<Projector<T>> {
    let scale = phi.max_abs();
    // compare on the largest component so the test itself cannot underflow
    if !(scale.as_f64() > floor.sqrt()) || !phi.is_finite() {
        return Err(Error::DegenerateVector { norm_sq: phi.norm_sq().as_f64() });
    }
    let u = phi.scale(Complex::new(scale.recip(), T::zero()));
    let n = u.norm_sq();
    let matrix = ComplexMatrix3::from_fn(|r, c| u.c[r] * u.c[c].conj() / n);
    Ok(Projector { matrix })
}
