use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Mat2, Unitary};
use crate::{Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn unit<T: Real>(self) -> [T; 3] {
        let mut v = [T::zero(); 3];
        v[self.index()] = T::one();
        v
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::InvalidArgument(format!("unknown axis {other:?}"))),
        }
    }
}

/// One of the six operators `±σx, ±σy, ±σz`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedPauli {
    pub axis: Axis,
    pub negative: bool,
}

impl SignedPauli {
    pub const ALL: [SignedPauli; 6] = [
        SignedPauli::plus(Axis::X),
        SignedPauli::minus(Axis::X),
        SignedPauli::plus(Axis::Y),
        SignedPauli::minus(Axis::Y),
        SignedPauli::plus(Axis::Z),
        SignedPauli::minus(Axis::Z),
    ];

    pub const fn plus(axis: Axis) -> Self {
        Self { axis, negative: false }
    }

    pub const fn minus(axis: Axis) -> Self {
        Self { axis, negative: true }
    }

    pub fn sign<T: Real>(self) -> T {
        if self.negative {
            -T::one()
        } else {
            T::one()
        }
    }

    /// Cartesian unit vector `r̂`.
    pub fn vector<T: Real>(self) -> [T; 3] {
        let mut v = [T::zero(); 3];
        v[self.axis.index()] = self.sign();
        v
    }

    pub fn matrix<T: Real>(self) -> Mat2<T> {
        let p = Mat2::pauli(self.axis);
        if self.negative {
            p.scale(num_complex::Complex::new(-T::one(), T::zero()))
        } else {
            p
        }
    }
}

impl fmt::Display for SignedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.negative { '-' } else { '+' };
        let a = match self.axis {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        };
        write!(f, "{s}{a}")
    }
}

/// Heisenberg-picture conjugation `K† P K`, which for Clifford `K` is again
/// a signed Pauli.
pub fn conjugate_pauli<T: Real>(k: &Unitary<T>, p: SignedPauli) -> Result<SignedPauli> {
    let km = k.matrix();
    let conj = km.adjoint() * p.matrix() * *km;
    let mut best = (T::infinity(), SignedPauli::ALL[0]);
    for cand in SignedPauli::ALL {
        let d = conj.max_abs_diff(&cand.matrix());
        if d < best.0 {
            best = (d, cand);
        }
    }
    if best.0 <= T::check_tolerance() {
        Ok(best.1)
    } else {
        Err(Error::NotClifford {
            deviation: best.0.to_f64_lossy(),
        })
    }
}
