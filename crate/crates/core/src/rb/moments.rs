use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{analytic_gamma_params, generate_rb_sequence};
use crate::noise::NoiseKind;
use crate::qubit::{Axis, CliffordGroup, SignedPauli};
use crate::rng::{stream, tag};
use crate::stats::{mean, variance};
use crate::walk::{compute_walk, StepWeighting};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentsMethod {
    GammaAnalytic,
    MonteCarlo,
}

/// Predicted mean and variance of the survival infidelity at one length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentsPrediction {
    pub mean: f64,
    /// Variance over sequences of the noise-averaged infidelity.
    pub variance: f64,
    /// Variance over single (sequence, realization) draws.
    pub pooled_variance: f64,
    pub mean_se: f64,
    pub variance_se: f64,
    pub method: MomentsMethod,
    pub samples: usize,
}

/// Quasi-DC moments come from the analytic gamma law (`E = β`, `V = β²`,
/// pooled `5β²` for Gaussian δ). White-noise moments are a Monte Carlo over
/// `samples` random sequences using the first-order concurrent walk: per
/// sequence the noise average is `σ² Σ_l ‖v_l,2D‖²`, and one i.i.d. draw
/// of `‖Σ_l δ_l v_l,2D‖²` feeds the pooled variance.
pub fn moments_prediction(
    j: usize,
    sigma: f64,
    kind: NoiseKind,
    samples: usize,
    seed: u64,
) -> Result<MomentsPrediction> {
    if sigma == 0.0 {
        return Ok(MomentsPrediction {
            mean: 0.0,
            variance: 0.0,
            pooled_variance: 0.0,
            mean_se: 0.0,
            variance_se: 0.0,
            method: match kind {
                NoiseKind::QuasiDc => MomentsMethod::GammaAnalytic,
                NoiseKind::White => MomentsMethod::MonteCarlo,
            },
            samples: 0,
        });
    }
    match kind {
        NoiseKind::QuasiDc => {
            let g = analytic_gamma_params(j, sigma);
            Ok(MomentsPrediction {
                mean: g.mean(),
                variance: g.variance(),
                pooled_variance: 5.0 * g.variance(),
                mean_se: 0.0,
                variance_se: 0.0,
                method: MomentsMethod::GammaAnalytic,
                samples: 0,
            })
        }
        NoiseKind::White => {
            if samples < 2 {
                return Err(Error::InvalidArgument("Monte Carlo needs ≥ 2 samples".into()));
            }
            let group = CliffordGroup::<f64>::standard();
            let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let axis = SignedPauli::plus(Axis::Z);
            let draws = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream(seed, &[tag::MONTE_CARLO, j as u64, i as u64]);
                    let seq = generate_rb_sequence(&group, j, &mut rng)?;
                    let w = compute_walk(&group, seq.gates(), axis, StepWeighting::Concurrent)?;
                    let averaged: f64 = w.steps.iter().map(|s| s.vector[0].powi(2) + s.vector[1].powi(2)).sum();
                    let mut r = [0.0; 2];
                    for s in &w.steps {
                        let d = normal.sample(&mut rng);
                        r[0] += d * s.vector[0];
                        r[1] += d * s.vector[1];
                    }
                    Ok((sigma * sigma * averaged, r[0] * r[0] + r[1] * r[1]))
                })
                .collect::<Result<Vec<(f64, f64)>>>()?;
            let seq_level: Vec<f64> = draws.iter().map(|d| d.0).collect();
            let single: Vec<f64> = draws.iter().map(|d| d.1).collect();
            let n = samples as f64;
            let m = mean(&seq_level);
            let v = variance(&seq_level);
            let m4 = seq_level.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
            Ok(MomentsPrediction {
                mean: m,
                variance: v,
                pooled_variance: variance(&single),
                mean_se: (v / n).sqrt(),
                variance_se: ((m4 - v * v).max(0.0) / n).sqrt(),
                method: MomentsMethod::MonteCarlo,
                samples,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silent_noise() {
        for kind in [NoiseKind::QuasiDc, NoiseKind::White] {
            let m = moments_prediction(100, 0.0, kind, 100, 0).unwrap();
            assert_eq!((m.mean, m.variance), (0.0, 0.0));
        }
    }

    #[test]
    fn dc_is_gamma() {
        let m = moments_prediction(100, 0.02, NoiseKind::QuasiDc, 0, 0).unwrap();
        assert!((m.mean - 0.016075).abs() < 1e-5);
        assert!((m.variance - 2.584e-4).abs() < 1e-6, "{}", m.variance);
    }

    #[test]
    fn white_mean_agrees_and_variance_is_smaller() {
        let dc = moments_prediction(100, 0.02, NoiseKind::QuasiDc, 0, 0).unwrap();
        let wh = moments_prediction(100, 0.02, NoiseKind::White, 10_000, 4).unwrap();
        assert_eq!(wh.method, MomentsMethod::MonteCarlo);
        assert!(
            (wh.mean - dc.mean).abs() < 4.0 * wh.mean_se + 0.02 * dc.mean,
            "{} vs {}",
            wh.mean,
            dc.mean
        );
        assert!(wh.variance + 3.0 * wh.variance_se < dc.variance);
        assert!(wh.pooled_variance > wh.variance);
    }
}
