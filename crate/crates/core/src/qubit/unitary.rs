use num_complex::Complex;

use super::{Axis, Mat2};
use crate::{Error, Real, Result};

/// A 2×2 unitary. Construction through [`Unitary::new`] checks `U†U = I`
/// and `|det U| = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unitary<T>(Mat2<T>);

impl<T: Real> Unitary<T> {
    pub fn new(m: Mat2<T>) -> Result<Self> {
        let tol = T::check_tolerance() * T::of(100.0);
        let dev = (m.adjoint() * m).max_abs_diff(&Mat2::identity());
        let det_dev = (m.det().norm() - T::one()).abs();
        if dev > tol || det_dev > tol {
            return Err(Error::InvalidArgument(format!(
                "matrix is not unitary (‖U†U − I‖∞ = {:.3e})",
                dev.to_f64_lossy()
            )));
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Mat2::identity())
    }

    /// `exp(-i θ/2 σ_axis)`.
    pub fn rotation(axis: Axis, angle: T) -> Self {
        let half = angle / (T::one() + T::one());
        let mut h = [T::zero(); 3];
        h[axis.index()] = half;
        Self(Mat2::exp_minus_i_pauli(h))
    }

    /// `exp(-i h·σ)` for any real `h`.
    pub fn exp_pauli(h: [T; 3]) -> Self {
        Self(Mat2::exp_minus_i_pauli(h))
    }

    pub fn matrix(&self) -> &Mat2<T> {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Matrix product `self · rhs` (rhs acts first).
    pub fn then_after(&self, rhs: &Self) -> Self {
        Self(self.0 * rhs.0)
    }

    /// `|Tr(A†B)|/2`, equal to one iff the two agree up to global phase.
    pub fn phase_overlap(&self, other: &Self) -> T {
        (self.0.adjoint() * other.0).trace().norm() / (T::one() + T::one())
    }

    pub fn equals_up_to_phase(&self, other: &Self) -> bool {
        (self.phase_overlap(other) - T::one()).abs() <= T::check_tolerance()
    }

    /// Heisenberg action on Bloch vectors: `U† (v·σ) U = (R v)·σ`.
    pub fn heisenberg(&self, v: [T; 3]) -> [T; 3] {
        (self.0.adjoint() * Mat2::from_bloch(v) * self.0).bloch()
    }

    /// Schrödinger action on Bloch vectors: `U (v·σ) U† = (R v)·σ`.
    pub fn schrodinger(&self, v: [T; 3]) -> [T; 3] {
        (self.0 * Mat2::from_bloch(v) * self.0.adjoint()).bloch()
    }

    /// `|⟨0|U|0⟩|²`.
    pub fn survival(&self) -> T {
        self.0.m[0][0].norm_sqr()
    }

    pub fn cast<S: Real>(&self) -> Unitary<S> {
        let c = |z: Complex<T>| Complex::new(S::of(z.re.to_f64_lossy()), S::of(z.im.to_f64_lossy()));
        let m = &self.0.m;
        Unitary(Mat2::new([[c(m[0][0]), c(m[0][1])], [c(m[1][0]), c(m[1][1])]]))
    }
}

impl<T: Real> std::ops::Mul for Unitary<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_non_unitary() {
        let mut m = Mat2::<f64>::identity();
        m.m[0][0] = Complex::new(1.1, 0.0);
        assert!(Unitary::new(m).is_err());
    }

    #[test]
    fn phase_equivalence_ignores_global_phase() {
        let u = Unitary::<f64>::rotation(Axis::Y, 0.7);
        let phased = Unitary::new(u.matrix().scale(Complex::from_polar(1.0, 1.3))).unwrap();
        assert!(u.equals_up_to_phase(&phased));
        assert!(!u.equals_up_to_phase(&Unitary::rotation(Axis::Y, 0.71)));
    }

    proptest! {
        #[test]
        fn heisenberg_inverts_schrodinger(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
            let u = Unitary::exp_pauli([a, b, c]);
            let v = [0.2, -0.5, 0.8];
            let back = u.heisenberg(u.schrodinger(v));
            for k in 0..3 {
                prop_assert!((back[k] - v[k]).abs() < 1e-12);
            }
        }
    }
}
