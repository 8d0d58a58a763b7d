//! Randomized benchmarking: sequence generation, noisy simulation, decay
//! fits and the gamma description of per-sequence infidelities.

mod decay;
mod gamma;
mod moments;
mod sequence;
mod simulate;

pub use decay::{fit_decay, DecayFit, DecayPoint, KappaMode, EXPERIMENTAL_KAPPA};
pub use gamma::{
    analytic_gamma_params, clifford_error_factor, fit_gamma, gamma_goodness_of_fit, gamma_histogram, GammaFit,
    GammaParams, GoodnessOfFit, HistogramBin,
};
pub use moments::{moments_prediction, MomentsMethod, MomentsPrediction};
pub use sequence::{generate_rb_sequence, RbSequence};
pub use simulate::{
    run_rb, run_rb_on_sequences, simulate_survival, LengthData, NoiseReuse, RbConfig, RbDataset, RbMetadata,
    SequenceData, Shots, SURVIVAL_ESTIMATOR,
};
