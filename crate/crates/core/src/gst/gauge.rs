use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use super::gateset::Mat4;
use super::GateSet;
use crate::optim::{levenberg_marquardt, LeastSquares, LmOptions};
use crate::{Error, Result};

/// Weight of the SPAM terms relative to the gates in the gauge objective.
/// Small, so the frame is fixed by the gates.
pub const DEFAULT_SPAM_WEIGHT: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeGroup {
    /// Any invertible `T`.
    Full,
    /// `T` with first row `(1, 0, 0, 0)`.
    TracePreserving,
    /// `T = 1 ⊕ R` with `R ∈ SO(3)`.
    Unitary,
}

impl GaugeGroup {
    fn dimension(self) -> usize {
        match self {
            Self::Full => 16,
            Self::TracePreserving => 12,
            Self::Unitary => 3,
        }
    }

    fn transform(self, x: &[f64]) -> Mat4 {
        match self {
            Self::Full => Mat4::identity() + Mat4::from_row_slice(x),
            Self::TracePreserving => {
                let mut t = Mat4::identity();
                for (k, v) in x.iter().enumerate() {
                    t[(1 + k / 4, k % 4)] += v;
                }
                t
            }
            Self::Unitary => {
                let r: Matrix3<f64> = Rotation3::new(Vector3::new(x[0], x[1], x[2])).into_inner();
                let mut t = Mat4::identity();
                t.fixed_view_mut::<3, 3>(1, 1).copy_from(&r);
                t
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeSchedule {
    None,
    Unitary,
    #[default]
    TpThenUnitary,
}

impl FromStr for GaugeSchedule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "unitary" => Ok(Self::Unitary),
            "tp-then-unitary" => Ok(Self::TpThenUnitary),
            _ => Err(Error::InvalidArgument(format!("unknown gauge schedule {s:?}"))),
        }
    }
}

impl fmt::Display for GaugeSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Unitary => "unitary",
            Self::TpThenUnitary => "tp-then-unitary",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeStage {
    pub group: GaugeGroup,
    pub spam_weight: f64,
    pub initial_objective: f64,
    pub objective: f64,
    pub iterations: usize,
    /// Set when the optimizer failed and the stage fell back to the identity.
    pub diverged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaugeResult {
    pub gate_set: GateSet,
    /// Accumulated transform: `gate_set = est.transform(transform)`.
    pub transform: Mat4,
    pub stages: Vec<GaugeStage>,
}

impl GaugeResult {
    pub fn objective(&self) -> Option<f64> {
        self.stages.last().map(|s| s.objective)
    }

    pub fn diverged(&self) -> bool {
        self.stages.iter().any(|s| s.diverged)
    }
}

/// `Σ_g ‖G − G_t‖²_F + w_spam (‖ρ − ρ_t‖² + ‖E − E_t‖²)`.
pub fn gauge_objective(g: &GateSet, target: &GateSet, w_spam: f64) -> Result<f64> {
    Ok(residuals(g, target, w_spam)?.iter().map(|r| r * r).sum())
}

fn residuals(g: &GateSet, target: &GateSet, w_spam: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(16 * 5 + 8);
    for (label, m) in g.gates() {
        out.extend((m - target.gate(label)?).iter());
    }
    let w = w_spam.sqrt();
    out.extend((g.rho - target.rho).iter().map(|v| w * v));
    out.extend((g.effect - target.effect).iter().map(|v| w * v));
    Ok(out)
}

struct GaugeProblem<'a> {
    est: &'a GateSet,
    target: &'a GateSet,
    group: GaugeGroup,
    w_spam: f64,
    size: usize,
}

impl LeastSquares for GaugeProblem<'_> {
    fn residuals(&self, x: &[f64]) -> Vec<f64> {
        match self.est.transform(&self.group.transform(x)) {
            Ok(g) => residuals(&g, self.target, self.w_spam).unwrap_or_else(|_| vec![f64::NAN; self.size]),
            Err(_) => vec![f64::NAN; self.size],
        }
    }
}

/// Minimizes the gauge objective over one group, starting at the identity.
pub fn gauge_optimize_group(est: &GateSet, target: &GateSet, group: GaugeGroup, w_spam: f64) -> Result<GaugeResult> {
    let initial = residuals(est, target, w_spam)?;
    let initial_objective: f64 = initial.iter().map(|r| r * r).sum();
    let problem = GaugeProblem {
        est,
        target,
        group,
        w_spam,
        size: initial.len(),
    };
    let opts = LmOptions {
        max_iterations: 500,
        ..LmOptions::default()
    };
    let report = levenberg_marquardt(&problem, &vec![0.0; group.dimension()], &opts);
    let t = group.transform(&report.x);
    let ok = report.cost.is_finite() && report.cost <= initial_objective && t.try_inverse().is_some();
    let (gate_set, transform, objective) = if ok {
        (est.transform(&t)?, t, report.cost)
    } else {
        log::warn!("gauge optimization over {group:?} diverged; keeping the identity gauge");
        (est.clone(), Mat4::identity(), initial_objective)
    };
    Ok(GaugeResult {
        gate_set,
        transform,
        stages: vec![GaugeStage {
            group,
            spam_weight: w_spam,
            initial_objective,
            objective,
            iterations: report.iterations,
            diverged: !ok,
        }],
    })
}

/// Runs the rounds of `schedule` in order, composing their transforms.
pub fn gauge_optimize(est: &GateSet, target: &GateSet, schedule: GaugeSchedule, w_spam: f64) -> Result<GaugeResult> {
    let groups: &[GaugeGroup] = match schedule {
        GaugeSchedule::None => &[],
        GaugeSchedule::Unitary => &[GaugeGroup::Unitary],
        GaugeSchedule::TpThenUnitary => &[GaugeGroup::TracePreserving, GaugeGroup::Unitary],
    };
    let mut acc = GaugeResult {
        gate_set: est.clone(),
        transform: Mat4::identity(),
        stages: Vec::new(),
    };
    for &group in groups {
        let step = gauge_optimize_group(&acc.gate_set, target, group, w_spam)?;
        acc.transform = step.transform * acc.transform;
        acc.gate_set = step.gate_set;
        acc.stages.extend(step.stages);
    }
    Ok(acc)
}

/// Rotation axis of the Bloch block of a unitary-like transfer matrix.
pub fn rotation_axis(g: &Mat4) -> Option<Vector3<f64>> {
    let svd = g.fixed_view::<3, 3>(1, 1).into_owned().svd(true, true);
    let r: Matrix3<f64> = svd.u? * svd.v_t?;
    if r.determinant() < 0.0 {
        return None;
    }
    Rotation3::from_matrix_unchecked(r).axis().map(|a| a.into_inner())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gst::{apply_error_model, unitary_to_mat4, ErrorModel, GateLabel};
    use crate::qubit::Unitary;

    #[test]
    fn target_is_a_fixed_point() {
        let t = GateSet::ideal(&GateLabel::STANDARD);
        let r = gauge_optimize(&t, &t, GaugeSchedule::TpThenUnitary, 1.0).unwrap();
        assert!(r.objective().unwrap() < 1e-20);
        assert!((r.transform - Mat4::identity()).abs().max() < 1e-9);
    }

    #[test]
    fn recovers_rotation_gauge() {
        let target = GateSet::ideal(&GateLabel::STANDARD);
        let gauge = unitary_to_mat4(&Unitary::exp_pauli([0.11, -0.07, 0.19]));
        let est = target.transform(&gauge).unwrap();
        for schedule in [GaugeSchedule::Unitary, GaugeSchedule::TpThenUnitary] {
            let r = gauge_optimize(&est, &target, schedule, 1.0).unwrap();
            assert!(r.objective().unwrap() < 1e-10, "{schedule}");
            for (l, g) in r.gate_set.gates() {
                assert!((g - target.gate(l).unwrap()).abs().max() < 1e-6);
            }
        }
    }

    #[test]
    fn recovers_tp_gauge() {
        let target = GateSet::ideal(&GateLabel::STANDARD);
        let mut gauge = Mat4::identity();
        gauge[(1, 0)] = 0.05;
        gauge[(2, 3)] = -0.04;
        gauge[(3, 3)] = 1.03;
        let est = target.transform(&gauge).unwrap();
        let r = gauge_optimize_group(&est, &target, GaugeGroup::TracePreserving, 1.0).unwrap();
        assert!(r.objective().unwrap() < 1e-10);
    }

    #[test]
    fn detuned_axes_return_to_equator() {
        let target = GateSet::ideal(&GateLabel::STANDARD);
        for delta in [0.01, 0.0444] {
            let noisy = apply_error_model(&target, &ErrorModel::detuning(delta).unwrap());
            let tilt = |g: &GateSet, l| rotation_axis(g.gate(l).unwrap()).unwrap()[2].abs();
            assert!(tilt(&noisy, GateLabel::Gx) > 0.5 * delta);
            let r = gauge_optimize(&noisy, &target, GaugeSchedule::TpThenUnitary, DEFAULT_SPAM_WEIGHT).unwrap();
            for l in [GateLabel::Gx, GateLabel::Gy] {
                let t = tilt(&r.gate_set, l);
                assert!(t < 3.0 * delta * delta, "δ={delta} {l}: z-tilt {t}");
            }
        }
    }
}
