use serde::{Deserialize, Serialize};

use super::diamond::{cp_project, diamond_distance, DiamondDistance, DIAMOND_CONVENTION};
use super::gauge::{gauge_optimize, GaugeSchedule, GaugeStage, DEFAULT_SPAM_WEIGHT};
use super::{
    apply_error_model, lgst, mle_refine, simulate_dataset, ErrorModel, ExperimentDesign, FitLog, GateLabel, GateSet,
    GstDataset, Mat4,
};
use crate::rb::Shots;
use crate::Result;

/// Injected detuning offsets Δ for the standard sweep.
pub const DETUNING_SWEEP_HZ: [f64; 4] = [75.0, 500.0, 1000.0, 1400.0];
pub const RABI_FREQUENCY_HZ: f64 = 22_500.0;

/// `δ = Δ/Ω` for each sweep point.
pub fn detuning_sweep() -> Vec<f64> {
    DETUNING_SWEEP_HZ.iter().map(|d| d / RABI_FREQUENCY_HZ).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineOptions {
    pub shots: Shots,
    pub seed: u64,
    pub gauge: GaugeSchedule,
    pub spam_weight: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            shots: Shots::Infinite,
            seed: 0,
            gauge: GaugeSchedule::TpThenUnitary,
            spam_weight: DEFAULT_SPAM_WEIGHT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateDistance {
    pub gate: GateLabel,
    pub distance: DiamondDistance,
    /// Negative Choi mass removed before evaluation.
    pub cp_clip: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GstEstimate {
    pub gate_set: GateSet,
    pub gauge_transform: [[f64; 4]; 4],
    pub gauge_stages: Vec<GaugeStage>,
    pub distances: Vec<GateDistance>,
    pub fit: FitLog,
    pub lgst_condition_number: f64,
}

/// The three diamond distances reported per gate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateDistances {
    pub gate: GateLabel,
    pub dd_calc: f64,
    pub dd_calc_gauge: f64,
    pub dd_est: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GstReport {
    pub model: ErrorModel,
    pub convention: String,
    pub gauge: GaugeSchedule,
    pub spam_weight: f64,
    pub circuits: usize,
    pub gates: Vec<GateDistances>,
    pub estimate: GstEstimate,
    pub calculated_gauge_stages: Vec<GaugeStage>,
}

impl GstReport {
    pub fn gate(&self, label: GateLabel) -> Option<&GateDistances> {
        self.gates.iter().find(|g| g.gate == label)
    }
}

fn to_rows(m: &Mat4) -> [[f64; 4]; 4] {
    std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]))
}

/// Per-gate distances to `target`, after projecting each gate onto the CP cone.
pub fn gate_distances(g: &GateSet, target: &GateSet) -> Result<Vec<GateDistance>> {
    g.gates()
        .map(|(label, m)| {
            let (projected, cp_clip) = cp_project(m);
            if cp_clip > 0.0 {
                log::debug!("{label}: clipped {cp_clip:.3e} of negative Choi weight");
            }
            Ok(GateDistance {
                gate: label,
                distance: diamond_distance(&projected, target.gate(label)?)?,
                cp_clip,
            })
        })
        .collect()
}

/// LGST, chi-squared refinement and gauge optimization of one dataset.
pub fn estimate(
    data: &GstDataset,
    design: &ExperimentDesign,
    schedule: GaugeSchedule,
    spam_weight: f64,
) -> Result<GstEstimate> {
    let target = GateSet::ideal(&design.gate_labels);
    let initial = lgst(data, design)?;
    let fit = mle_refine(&initial.gate_set, data, design)?;
    let gauged = gauge_optimize(&fit.gate_set, &target, schedule, spam_weight)?;
    Ok(GstEstimate {
        distances: gate_distances(&gauged.gate_set, &target)?,
        gate_set: gauged.gate_set,
        gauge_transform: to_rows(&gauged.transform),
        gauge_stages: gauged.stages,
        fit: fit.log,
        lgst_condition_number: initial.condition_number,
    })
}

/// Both evaluation paths for one error model: analytic gates with and
/// without gauge optimization, and the estimate from simulated data.
pub fn run_gst_pipeline(model: &ErrorModel, design: &ExperimentDesign, opts: &PipelineOptions) -> Result<GstReport> {
    let data = simulate_model_dataset(model, design, opts)?;
    report_from_dataset(model, design, &data, opts)
}

/// Dataset simulated from the gates of `model` with the shots and seed of `opts`.
pub fn simulate_model_dataset(
    model: &ErrorModel,
    design: &ExperimentDesign,
    opts: &PipelineOptions,
) -> Result<GstDataset> {
    let truth = apply_error_model(&GateSet::ideal(&design.gate_labels), model);
    simulate_dataset(&truth, design, opts.shots, opts.seed)
}

/// [`run_gst_pipeline`] on an existing dataset assumed to come from `model`.
pub fn report_from_dataset(
    model: &ErrorModel,
    design: &ExperimentDesign,
    data: &GstDataset,
    opts: &PipelineOptions,
) -> Result<GstReport> {
    let target = GateSet::ideal(&design.gate_labels);
    let truth = apply_error_model(&target, model);
    let est = estimate(data, design, opts.gauge, opts.spam_weight)?;
    let calc = gate_distances(&truth, &target)?;
    let calc_gauged = gauge_optimize(&truth, &target, opts.gauge, opts.spam_weight)?;
    let calc_gauge = gate_distances(&calc_gauged.gate_set, &target)?;
    let gates = calc
        .iter()
        .zip(&calc_gauge)
        .zip(&est.distances)
        .map(|((c, g), e)| GateDistances {
            gate: c.gate,
            dd_calc: c.distance.value,
            dd_calc_gauge: g.distance.value,
            dd_est: e.distance.value,
        })
        .collect();
    Ok(GstReport {
        model: *model,
        convention: DIAMOND_CONVENTION.to_string(),
        gauge: opts.gauge,
        spam_weight: opts.spam_weight,
        circuits: design.len(),
        gates,
        estimate: est,
        calculated_gauge_stages: calc_gauged.stages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gst::standard_design;

    #[test]
    fn no_error_gives_zero_distances() {
        let d = standard_design();
        let opts = PipelineOptions {
            shots: Shots::Finite(220),
            seed: 3,
            ..PipelineOptions::default()
        };
        let r = run_gst_pipeline(&ErrorModel::NONE, &d, &opts).unwrap();
        for g in &r.gates {
            assert!(g.dd_calc < 1e-8 && g.dd_calc_gauge < 1e-8, "{g:?}");
            assert!(g.dd_est <= 2e-3, "{g:?}");
        }
    }

    #[test]
    fn sweep_values() {
        let s = detuning_sweep();
        assert!((s[2] - 1000.0 / 22_500.0).abs() < 1e-15);
        assert!((s[2] - 0.0444).abs() < 1e-4);
    }
}
