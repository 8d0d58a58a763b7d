use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::gateset::{ideal_spam, unitary_to_mat4};
use super::{GateLabel, GateSet};
use crate::qubit::{noisy_pulse_unitary, noisy_rotation, PhysicalPulse};
use crate::{Error, Result};

/// Injected error on the ideal gate set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    None,
    /// `θ → (1 + ε)θ` on driven gates; `Gi` untouched.
    Overrotation,
    /// Constant concurrent detuning `δ` on every timed pulse, idles included.
    Detuning,
}

impl FromStr for ErrorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "overrot" | "overrotation" => Ok(Self::Overrotation),
            "detune" | "detuning" => Ok(Self::Detuning),
            _ => Err(Error::InvalidArgument(format!("unknown error model {s:?}"))),
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Overrotation => "overrotation",
            Self::Detuning => "detuning",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub kind: ErrorKind,
    pub magnitude: f64,
}

impl ErrorModel {
    pub const NONE: Self = Self {
        kind: ErrorKind::None,
        magnitude: 0.0,
    };

    pub fn new(kind: ErrorKind, magnitude: f64) -> Result<Self> {
        if !magnitude.is_finite() || magnitude.abs() >= 0.5 {
            return Err(Error::InvalidArgument(format!(
                "error magnitude {magnitude} must satisfy |x| < 0.5"
            )));
        }
        Ok(Self { kind, magnitude })
    }

    pub fn overrotation(eps: f64) -> Result<Self> {
        Self::new(ErrorKind::Overrotation, eps)
    }

    pub fn detuning(delta: f64) -> Result<Self> {
        Self::new(ErrorKind::Detuning, delta)
    }
}

/// Physical implementation of each gate label; `Gi` idles for a π-pulse time.
pub fn gate_pulse(label: GateLabel) -> PhysicalPulse {
    match label {
        GateLabel::Gi => PhysicalPulse::idle(2),
        GateLabel::Gx => PhysicalPulse::x(1),
        GateLabel::Gy => PhysicalPulse::y(1),
        GateLabel::MinusGx => PhysicalPulse::x(-1),
        GateLabel::MinusGy => PhysicalPulse::y(-1),
    }
}

/// Rebuilds every gate from its noisy pulse; SPAM stays ideal.
pub fn apply_error_model(ideal: &GateSet, model: &ErrorModel) -> GateSet {
    let mut out = ideal.clone();
    for label in ideal.labels() {
        let pulse = gate_pulse(label);
        let u = match model.kind {
            ErrorKind::None => noisy_pulse_unitary(&pulse, 0.0),
            ErrorKind::Detuning => noisy_pulse_unitary(&pulse, model.magnitude),
            ErrorKind::Overrotation => noisy_rotation(&pulse, pulse.angle::<f64>() * (1.0 + model.magnitude), 0.0),
        };
        out.set_gate(label, unitary_to_mat4(&u));
    }
    out.rho = ideal_spam();
    out.effect = ideal_spam();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{Axis, Unitary};
    use std::f64::consts::FRAC_PI_2;

    fn max_diff(a: &super::super::Mat4, b: &super::super::Mat4) -> f64 {
        (a - b).abs().max()
    }

    #[test]
    fn zero_magnitude_is_ideal() {
        let ideal = GateSet::ideal(&GateLabel::EXTENDED);
        for kind in [ErrorKind::None, ErrorKind::Overrotation, ErrorKind::Detuning] {
            let g = apply_error_model(&ideal, &ErrorModel::new(kind, 0.0).unwrap());
            for (l, m) in g.gates() {
                assert!(max_diff(m, ideal.gate(l).unwrap()) < 1e-14, "{kind} {l}");
            }
        }
    }

    #[test]
    fn detuned_idle_is_z_rotation() {
        let delta = 0.03;
        let g = apply_error_model(
            &GateSet::ideal(&GateLabel::STANDARD),
            &ErrorModel::detuning(delta).unwrap(),
        );
        // exp(-i·2·(π/4)·δ σz) is a z rotation by πδ.
        let expect = unitary_to_mat4(&Unitary::rotation(Axis::Z, std::f64::consts::PI * delta));
        assert!(max_diff(g.gate(GateLabel::Gi).unwrap(), &expect) < 1e-14);
    }

    #[test]
    fn overrotation_scales_angle_only_on_driven_gates() {
        let eps = 0.1;
        let ideal = GateSet::ideal(&GateLabel::EXTENDED);
        let g = apply_error_model(&ideal, &ErrorModel::overrotation(eps).unwrap());
        let rx = unitary_to_mat4(&Unitary::rotation(Axis::X, (1.0 + eps) * FRAC_PI_2));
        let ry_neg = unitary_to_mat4(&Unitary::rotation(Axis::Y, -(1.0 + eps) * FRAC_PI_2));
        assert!(max_diff(g.gate(GateLabel::Gx).unwrap(), &rx) < 1e-14);
        assert!(max_diff(g.gate(GateLabel::MinusGy).unwrap(), &ry_neg) < 1e-14);
        assert!(max_diff(g.gate(GateLabel::Gi).unwrap(), ideal.gate(GateLabel::Gi).unwrap()) < 1e-15);
    }

    #[test]
    fn magnitude_bounds() {
        assert!(ErrorModel::detuning(0.5).is_err());
        assert!(ErrorModel::overrotation(f64::NAN).is_err());
        assert_eq!("detune".parse::<ErrorKind>().unwrap(), ErrorKind::Detuning);
    }
}
