//! Pauli transfer matrices in the normalized basis {I, σx, σy, σz}/√2.

use num_complex::Complex;

use super::{Axis, Mat2, Unitary};
use crate::Real;

/// 4×4 real Pauli transfer matrix, row-major. Column `j` is the image of
/// basis element `j`; a trace-preserving map has first row (1, 0, 0, 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ptm<T> {
    pub m: [[T; 4]; 4],
}

fn basis<T: Real>(i: usize) -> Mat2<T> {
    match i {
        0 => Mat2::identity(),
        1 => Mat2::pauli(Axis::X),
        2 => Mat2::pauli(Axis::Y),
        _ => Mat2::pauli(Axis::Z),
    }
}

impl<T: Real> Ptm<T> {
    pub fn identity() -> Self {
        let mut m = [[T::zero(); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = T::one();
        }
        Self { m }
    }

    /// Largest deviation of the first row from (1, 0, 0, 0).
    pub fn tp_deviation(&self) -> T {
        let r = &self.m[0];
        (r[0] - T::one()).abs().max(r[1].abs()).max(r[2].abs()).max(r[3].abs())
    }

    /// `‖B Bᵀ − I‖∞` of the lower-right 3×3 block.
    pub fn orthogonality_deviation(&self) -> T {
        let mut worst = T::zero();
        for i in 1..4 {
            for j in 1..4 {
                let dot: T = (1..4).map(|k| self.m[i][k] * self.m[j][k]).sum();
                let want = if i == j { T::one() } else { T::zero() };
                worst = worst.max((dot - want).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        worst
    }

    pub fn to_f64(&self) -> [[f64; 4]; 4] {
        self.m.map(|row| row.map(|x| x.to_f64_lossy()))
    }
}

impl<T: Real> std::ops::Mul for Ptm<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = [[T::zero(); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, out) in row.iter_mut().enumerate() {
                *out = (0..4).map(|k| self.m[i][k] * rhs.m[k][j]).sum();
            }
        }
        Self { m }
    }
}

/// `R_ij = ½ Tr[σ_i U σ_j U†]`.
pub fn unitary_to_ptm<T: Real>(u: &Unitary<T>) -> Ptm<T> {
    let um = *u.matrix();
    let ud = um.adjoint();
    let half = Complex::new(T::of(0.5), T::zero());
    let mut m = [[T::zero(); 4]; 4];
    for j in 0..4 {
        let image = um * basis(j) * ud;
        for (i, row) in m.iter_mut().enumerate() {
            row[j] = ((basis::<T>(i) * image).trace() * half).re;
        }
    }
    Ptm { m }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{build_clifford_group, conjugate_pauli, SignedPauli};

    #[test]
    fn identity_maps_to_identity() {
        let r = unitary_to_ptm(&Unitary::<f64>::identity());
        assert!(r.max_abs_diff(&Ptm::identity()) < 1e-15);
    }

    #[test]
    fn rz_block() {
        let phi = 0.37_f64;
        let r = unitary_to_ptm(&Unitary::rotation(Axis::Z, phi));
        let (s, c) = phi.sin_cos();
        let want = Ptm {
            m: [
                [1.0, 0.0, 0.0, 0.0],
                [0.0, c, -s, 0.0],
                [0.0, s, c, 0.0],
                [0.0, 0.0, 0.0, 1.0],
            ],
        };
        assert!(r.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn rx_half_sends_z_to_minus_y() {
        let r = unitary_to_ptm(&Unitary::rotation(Axis::X, std::f64::consts::FRAC_PI_2));
        assert!((r.m[2][3] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn cliffords_are_tp_and_orthogonal_and_match_conjugation() {
        // conjugate_pauli is Heisenberg (K†PK), so it reads rows of R.
        let g = build_clifford_group();
        for c in g.iter() {
            let u = g.element(c).net;
            let r = unitary_to_ptm(&u);
            assert!(r.tp_deviation() < 1e-12);
            assert!(r.orthogonality_deviation() < 1e-10);
            for p in SignedPauli::ALL {
                let q = conjugate_pauli(&u, p).unwrap();
                let row = &r.m[p.axis.index() + 1];
                let want = q.vector::<f64>();
                for k in 0..3 {
                    assert!((p.sign::<f64>() * row[k + 1] - want[k]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn composition_is_homomorphic() {
        let a = Unitary::<f64>::exp_pauli([0.3, -0.1, 0.7]);
        let b = Unitary::<f64>::exp_pauli([-0.2, 0.5, 0.05]);
        let lhs = unitary_to_ptm(&(a * b));
        let rhs = unitary_to_ptm(&a) * unitary_to_ptm(&b);
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
    }
}
