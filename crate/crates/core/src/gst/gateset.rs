use std::collections::BTreeMap;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::{GateLabel, GateString};
use crate::qubit::{unitary_to_ptm, Ptm, Unitary};
use crate::{Error, Result};

pub type Mat4 = Matrix4<f64>;
pub type Vec4 = Vector4<f64>;

/// Basis of every gate set: `{I, σx, σy, σz}/√2`.
pub const GATESET_BASIS: &str = "normalized-pauli";

pub fn ptm_to_mat4(p: &Ptm<f64>) -> Mat4 {
    Mat4::from_fn(|i, j| p.m[i][j])
}

pub fn mat4_to_ptm(m: &Mat4) -> Ptm<f64> {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    Ptm { m: out }
}

pub fn unitary_to_mat4(u: &Unitary<f64>) -> Mat4 {
    ptm_to_mat4(&unitary_to_ptm(u))
}

/// `|0⟩⟨0|` as a state or effect vector.
pub fn ideal_spam() -> Vec4 {
    Vec4::new(1.0, 0.0, 0.0, 1.0) / 2f64.sqrt()
}

/// Labelled transfer matrices with one preparation and one effect.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "GateSetJson", into = "GateSetJson")]
pub struct GateSet {
    gates: BTreeMap<GateLabel, Mat4>,
    pub rho: Vec4,
    pub effect: Vec4,
}

#[derive(Serialize, Deserialize)]
struct GateSetJson {
    basis: String,
    gates: BTreeMap<GateLabel, [[f64; 4]; 4]>,
    rho: [f64; 4],
    effect: [f64; 4],
}

impl From<GateSetJson> for GateSet {
    fn from(j: GateSetJson) -> Self {
        Self {
            gates: j
                .gates
                .into_iter()
                .map(|(l, m)| (l, Mat4::from_fn(|r, c| m[r][c])))
                .collect(),
            rho: Vec4::from_column_slice(&j.rho),
            effect: Vec4::from_column_slice(&j.effect),
        }
    }
}

impl From<GateSet> for GateSetJson {
    fn from(g: GateSet) -> Self {
        Self {
            basis: GATESET_BASIS.to_string(),
            gates: g.gates.iter().map(|(l, m)| (*l, mat4_to_ptm(m).m)).collect(),
            rho: g.rho.into(),
            effect: g.effect.into(),
        }
    }
}

/// Ideal unitary of a gate label.
pub fn ideal_unitary(label: GateLabel) -> Unitary<f64> {
    use crate::qubit::Axis;
    use std::f64::consts::FRAC_PI_2;
    match label {
        GateLabel::Gi => Unitary::identity(),
        GateLabel::Gx => Unitary::rotation(Axis::X, FRAC_PI_2),
        GateLabel::Gy => Unitary::rotation(Axis::Y, FRAC_PI_2),
        GateLabel::MinusGx => Unitary::rotation(Axis::X, -FRAC_PI_2),
        GateLabel::MinusGy => Unitary::rotation(Axis::Y, -FRAC_PI_2),
    }
}

impl GateSet {
    pub fn new(gates: BTreeMap<GateLabel, Mat4>, rho: Vec4, effect: Vec4) -> Self {
        Self { gates, rho, effect }
    }

    pub fn ideal(labels: &[GateLabel]) -> Self {
        Self {
            gates: labels
                .iter()
                .map(|&l| (l, unitary_to_mat4(&ideal_unitary(l))))
                .collect(),
            rho: ideal_spam(),
            effect: ideal_spam(),
        }
    }

    pub fn labels(&self) -> Vec<GateLabel> {
        self.gates.keys().copied().collect()
    }

    pub fn gate(&self, label: GateLabel) -> Result<&Mat4> {
        self.gates
            .get(&label)
            .ok_or_else(|| Error::InvalidArgument(format!("gate set has no {label}")))
    }

    pub fn set_gate(&mut self, label: GateLabel, m: Mat4) {
        self.gates.insert(label, m);
    }

    pub fn gates(&self) -> impl Iterator<Item = (GateLabel, &Mat4)> {
        self.gates.iter().map(|(l, m)| (*l, m))
    }

    /// `⟨E| G_n ⋯ G_1 |ρ⟩`, unclipped.
    pub fn probability(&self, s: &GateString) -> Result<f64> {
        let mut v = self.rho;
        for &l in s.labels() {
            v = self.gate(l)? * v;
        }
        Ok(self.effect.dot(&v))
    }

    /// `G ↦ T G T⁻¹`, `ρ ↦ Tρ`, `⟨E| ↦ ⟨E|T⁻¹`.
    pub fn transform(&self, t: &Mat4) -> Result<Self> {
        let inv = t
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("gauge transform is singular".into()))?;
        Ok(Self {
            gates: self.gates.iter().map(|(l, g)| (*l, t * g * inv)).collect(),
            rho: t * self.rho,
            effect: inv.transpose() * self.effect,
        })
    }

    /// Largest deviation of any gate's first row from (1, 0, 0, 0).
    pub fn tp_deviation(&self) -> f64 {
        self.gates
            .values()
            .map(|g| mat4_to_ptm(g).tp_deviation())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_probabilities() {
        let g = GateSet::ideal(&GateLabel::STANDARD);
        let p = |s: &str| g.probability(&s.parse().unwrap()).unwrap();
        assert!((p("{}") - 1.0).abs() < 1e-15);
        assert!((p("Gi") - 1.0).abs() < 1e-15);
        assert!((p("Gx") - 0.5).abs() < 1e-15);
        assert!(p("GxGx").abs() < 1e-15);
        assert!((p("GyGyGy") - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gauge_transform_preserves_probabilities() {
        let g = GateSet::ideal(&GateLabel::STANDARD);
        let mut t = Mat4::identity();
        t[(1, 0)] = 0.1;
        t[(2, 3)] = -0.2;
        t[(3, 3)] = 1.3;
        let h = g.transform(&t).unwrap();
        for s in ["GxGyGi", "GyGyGx", "{}"] {
            let s = s.parse().unwrap();
            assert!((g.probability(&s).unwrap() - h.probability(&s).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn json_round_trip() {
        let g = GateSet::ideal(&GateLabel::EXTENDED);
        let back: GateSet = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(g, back);
    }
}
