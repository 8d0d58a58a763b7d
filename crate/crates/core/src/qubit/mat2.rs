use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use super::Axis;
use crate::Real;

/// Dense 2×2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<T> {
    pub m: [[Complex<T>; 2]; 2],
}

impl<T: Real> Mat2<T> {
    pub fn new(m: [[Complex<T>; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
        Self { m: [[o, z], [z, o]] }
    }

    pub fn zero() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self { m: [[z, z], [z, z]] }
    }

    pub fn pauli(axis: Axis) -> Self {
        let (o, z, i) = (
            Complex::new(T::one(), T::zero()),
            Complex::new(T::zero(), T::zero()),
            Complex::new(T::zero(), T::one()),
        );
        let m = match axis {
            Axis::X => [[z, o], [o, z]],
            Axis::Y => [[z, -i], [i, z]],
            Axis::Z => [[o, z], [z, -o]],
        };
        Self { m }
    }

    /// `h·σ` for a real 3-vector `h`.
    pub fn from_bloch(h: [T; 3]) -> Self {
        let c = |re: T, im: T| Complex::new(re, im);
        Self {
            m: [
                [c(h[2], T::zero()), c(h[0], -h[1])],
                [c(h[0], h[1]), c(-h[2], T::zero())],
            ],
        }
    }

    /// `exp(-i h·σ)`, exact via `cos|h| I - i sin|h| ĥ·σ`.
    pub fn exp_minus_i_pauli(h: [T; 3]) -> Self {
        let norm = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
        if norm == T::zero() {
            return Self::identity();
        }
        let (s, c) = norm.sin_cos();
        let k = s / norm;
        let n = Self::from_bloch([h[0] * k, h[1] * k, h[2] * k]);
        let mi = Complex::new(T::zero(), -T::one());
        Self::identity().scale(Complex::new(c, T::zero())) + n.scale(mi)
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self {
            m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
        }
    }

    pub fn trace(&self) -> Complex<T> {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        let mut out = *self;
        for row in out.m.iter_mut() {
            for e in row.iter_mut() {
                *e = *e * k;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> T {
        self.m
            .iter()
            .flatten()
            .map(|e| e.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    /// Real Pauli coefficients `(Tr(Mσx), Tr(Mσy), Tr(Mσz)) / 2`, assuming
    /// `M` Hermitian.
    pub fn bloch(&self) -> [T; 3] {
        let two = T::one() + T::one();
        let m = &self.m;
        [
            (m[0][1].re + m[1][0].re) / two,
            (m[1][0].im - m[0][1].im) / two,
            (m[0][0].re - m[1][1].re) / two,
        ]
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        Self {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
        }
    }
}

impl<T: Real> Add for Mat2<T> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (r, s) in self.m.iter_mut().zip(rhs.m.iter()) {
            for (e, f) in r.iter_mut().zip(s.iter()) {
                *e = *e + *f;
            }
        }
        self
    }
}

impl<T: Real> Sub for Mat2<T> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (r, s) in self.m.iter_mut().zip(rhs.m.iter()) {
            for (e, f) in r.iter_mut().zip(s.iter()) {
                *e = *e - *f;
            }
        }
        self
    }
}
