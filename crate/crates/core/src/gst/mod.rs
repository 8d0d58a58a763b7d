//! Gate-set tomography: experiment designs, simulated data, linear
//! inversion, chi-squared refinement, gauge optimization and diamond
//! distances.

mod dataset;
mod design;
mod diamond;
mod gateset;
mod gauge;
mod labels;
mod lgst;
mod mle;
mod model;
mod pipeline;

pub use dataset::{simulate_dataset, simulate_drift_dataset, DataRow, GstDataset};
pub use design::{
    extended_design, extended_germ_file_json, extended_germs, standard_design, standard_fiducials, standard_germs,
    DesignEntry, ExperimentDesign, EXTENDED_GERMS_VERSION, EXTENDED_GERM_COUNT, EXTENDED_GERM_RULE, MAX_LENGTHS,
};
pub use diamond::{
    choi, choi_to_ptm, cp_project, diamond_distance, diamond_sdp, diamond_state_search, min_choi_eigenvalue,
    unitary_pair_distance, DiamondDistance, CP_TOLERANCE, CROSS_CHECK_TOLERANCE, DIAMOND_CONVENTION,
    DIAMOND_NORM_SCALE,
};
pub use gateset::{
    ideal_spam, ideal_unitary, mat4_to_ptm, ptm_to_mat4, unitary_to_mat4, GateSet, Mat4, Vec4, GATESET_BASIS,
};
pub use gauge::{
    gauge_objective, gauge_optimize, gauge_optimize_group, rotation_axis, GaugeGroup, GaugeResult, GaugeSchedule,
    GaugeStage, DEFAULT_SPAM_WEIGHT,
};
pub use labels::{GateLabel, GateString};
pub use lgst::{lgst, make_trace_preserving, LgstReport, MAX_GRAM_CONDITION};
pub use mle::{mle_refine, FitLog, MleResult, StageLog, CHI2_REGULARIZER, OBJECTIVE, TP_GAUGE_DIMENSION};
pub use model::{apply_error_model, gate_pulse, ErrorKind, ErrorModel};
pub use pipeline::{
    detuning_sweep, estimate, gate_distances, report_from_dataset, run_gst_pipeline, simulate_model_dataset,
    GateDistance, GateDistances, GstEstimate, GstReport, PipelineOptions, DETUNING_SWEEP_HZ, RABI_FREQUENCY_HZ,
};
