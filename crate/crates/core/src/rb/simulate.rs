use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_rb_sequence, RbSequence};
use crate::noise::{sample_ensemble, NoiseEnsemble, NoiseRealization, NoiseSpec};
use crate::qubit::{CliffordGroup, CLIFFORD_TABLE_VERSION, DEFAULT_IDENTITY_IDLE};
use crate::rng::{derive_seed, stream, tag, PRNG_ALGORITHM};
use crate::stats::{mean, variance};
use crate::{Error, Result};

pub const SURVIVAL_ESTIMATOR: &str = "binomial-mle";

/// Repetitions per (sequence, realization) pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shots {
    /// Exact probability, no sampling.
    Infinite,
    Finite(u32),
}

/// Whether one noise ensemble per length is shared by all sequences of
/// that length, or each sequence draws its own.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseReuse {
    #[default]
    PerLength,
    PerSequence,
}

/// Exact survival `|⟨0|Ũ|0⟩|²`, or its binomial MLE from `shots`
/// repetitions.
pub fn simulate_survival<R: Rng + ?Sized>(
    group: &CliffordGroup<f64>,
    seq: &RbSequence,
    noise: &NoiseRealization<f64>,
    shots: Shots,
    rng: &mut R,
) -> Result<f64> {
    let p = group.sequence_unitary(seq.gates(), noise)?.survival().clamp(0.0, 1.0);
    match shots {
        Shots::Infinite => Ok(p),
        Shots::Finite(0) => Err(Error::InvalidArgument("shot count must be ≥ 1".into())),
        Shots::Finite(r) => {
            let b = Binomial::new(r as u64, p).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            Ok(b.sample(rng) as f64 / r as f64)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbConfig {
    pub lengths: Vec<usize>,
    pub sequences_per_length: usize,
    pub noise: NoiseSpec,
    pub realizations: usize,
    pub shots: Shots,
    /// Master seed for sequences and shot sampling.
    pub seed: u64,
    #[serde(default)]
    pub noise_reuse: NoiseReuse,
    #[serde(default = "default_idle")]
    pub identity_idle: u8,
}

fn default_idle() -> u8 {
    DEFAULT_IDENTITY_IDLE
}

impl RbConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut bad = Vec::new();
        if self.lengths.is_empty() {
            bad.push("lengths: must not be empty".to_string());
        }
        if let Some(j) = self.lengths.iter().find(|&&j| j < 2) {
            bad.push(format!("lengths: every J must be ≥ 2 (got {j})"));
        }
        if self.sequences_per_length == 0 {
            bad.push("sequences_per_length: must be ≥ 1".to_string());
        }
        if self.realizations == 0 {
            bad.push("realizations: must be ≥ 1".to_string());
        }
        if !(self.noise.sigma >= 0.0 && self.noise.sigma.is_finite()) {
            bad.push("noise.sigma: must be finite and ≥ 0".to_string());
        }
        if self.shots == Shots::Finite(0) {
            bad.push("shots: must be ≥ 1".to_string());
        }
        if self.identity_idle == 0 {
            bad.push("identity_idle: must be ≥ 1".to_string());
        }
        bad
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbMetadata {
    pub noise: NoiseSpec,
    pub lengths: Vec<usize>,
    pub realizations: usize,
    pub shots: Shots,
    pub seed: u64,
    pub noise_reuse: NoiseReuse,
    pub estimator: String,
    pub prng: String,
    pub clifford_table: String,
    pub identity_idle: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceData {
    pub sequence: RbSequence,
    /// `F_{i,n}` for each noise realization `n`.
    pub estimates: Vec<f64>,
    /// Noise-averaged survival `F_i`.
    pub mean: f64,
}

impl SequenceData {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.mean
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthData {
    pub j: usize,
    pub sequences: Vec<SequenceData>,
}

impl LengthData {
    /// Noise-averaged infidelities `1 − F_i`, one per sequence.
    pub fn infidelities(&self) -> Vec<f64> {
        self.sequences.iter().map(SequenceData::infidelity).collect()
    }

    pub fn mean_survival(&self) -> f64 {
        mean(&self.sequences.iter().map(|s| s.mean).collect::<Vec<_>>())
    }

    /// Variance over sequences of the noise-averaged survival.
    pub fn sequence_variance(&self) -> f64 {
        variance(&self.sequences.iter().map(|s| s.mean).collect::<Vec<_>>())
    }

    /// Variance over every (sequence, realization) estimate.
    pub fn pooled_variance(&self) -> f64 {
        let all: Vec<f64> = self
            .sequences
            .iter()
            .flat_map(|s| s.estimates.iter().copied())
            .collect();
        variance(&all)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbDataset {
    pub metadata: RbMetadata,
    pub lengths: Vec<LengthData>,
}

impl RbDataset {
    pub fn length(&self, j: usize) -> Option<&LengthData> {
        self.lengths.iter().find(|l| l.j == j)
    }
}

/// Generates sequences from the config and simulates them.
pub fn run_rb(config: &RbConfig) -> Result<RbDataset> {
    let bad = config.validate();
    if !bad.is_empty() {
        return Err(Error::InvalidArgument(bad.join("; ")));
    }
    let group = CliffordGroup::<f64>::with_identity_idle(config.identity_idle)?;
    let sets = config
        .lengths
        .iter()
        .map(|&j| {
            let seqs = (0..config.sequences_per_length)
                .map(|i| {
                    let seed = derive_seed(config.seed, &[tag::SEQUENCE, j as u64, i as u64]);
                    let mut s = generate_rb_sequence(&group, j, &mut stream(seed, &[]))?;
                    s.seed = Some(seed);
                    Ok(s)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((j, seqs))
        })
        .collect::<Result<Vec<_>>>()?;
    run_rb_on_sequences(&group, &sets, config)
}

fn ensemble_for(
    group: &CliffordGroup<f64>,
    config: &RbConfig,
    j: usize,
    seq_index: Option<usize>,
) -> Result<NoiseEnsemble<f64>> {
    let mut path = vec![tag::NOISE, j as u64];
    path.extend(seq_index.map(|i| i as u64));
    let spec = config.noise.with_seed(derive_seed(config.noise.seed, &path));
    let max_slots = group
        .iter()
        .map(|c| group.element(c).noisy_pulse_count())
        .max()
        .unwrap_or(1);
    sample_ensemble(&spec, config.realizations, (j * max_slots).max(1))
}

/// Simulates caller-supplied sequences grouped by length. The config's
/// `lengths` and `sequences_per_length` are ignored; the noise, shot and
/// seed settings apply.
pub fn run_rb_on_sequences(
    group: &CliffordGroup<f64>,
    sets: &[(usize, Vec<RbSequence>)],
    config: &RbConfig,
) -> Result<RbDataset> {
    let mut lengths = Vec::with_capacity(sets.len());
    for (j, seqs) in sets {
        let j = *j;
        if let Some(bad) = seqs.iter().find(|s| s.len() != j) {
            return Err(Error::InvalidArgument(format!(
                "sequence of length {} filed under J = {j}",
                bad.len()
            )));
        }
        let shared = match config.noise_reuse {
            NoiseReuse::PerLength => Some(ensemble_for(group, config, j, None)?),
            NoiseReuse::PerSequence => None,
        };
        let sequences = seqs
            .par_iter()
            .enumerate()
            .map(|(i, seq)| {
                let own;
                let ensemble = match &shared {
                    Some(e) => e,
                    None => {
                        own = ensemble_for(group, config, j, Some(i))?;
                        &own
                    }
                };
                let slots = group.noisy_slots(seq.gates());
                let estimates = ensemble
                    .realizations()
                    .iter()
                    .enumerate()
                    .map(|(n, r)| {
                        let mut rng = stream(config.seed, &[tag::SHOTS, j as u64, i as u64, n as u64]);
                        simulate_survival(group, seq, &r.prefix(slots)?, config.shots, &mut rng)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(SequenceData {
                    sequence: seq.clone(),
                    mean: mean(&estimates),
                    estimates,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        lengths.push(LengthData { j, sequences });
    }
    Ok(RbDataset {
        metadata: RbMetadata {
            noise: config.noise,
            lengths: sets.iter().map(|(j, _)| *j).collect(),
            realizations: config.realizations,
            shots: config.shots,
            seed: config.seed,
            noise_reuse: config.noise_reuse,
            estimator: SURVIVAL_ESTIMATOR.to_string(),
            prng: PRNG_ALGORITHM.to_string(),
            clifford_table: CLIFFORD_TABLE_VERSION.to_string(),
            identity_idle: group.element(group.identity()).duration() as u8,
        },
        lengths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseKind;
    use crate::qubit::build_clifford_group;
    use crate::walk::{compute_walk, StepWeighting};

    fn config(kind: NoiseKind, sigma: f64, shots: Shots) -> RbConfig {
        RbConfig {
            lengths: vec![10, 30],
            sequences_per_length: 6,
            noise: NoiseSpec::new(kind, sigma, 77).unwrap(),
            realizations: 8,
            shots,
            seed: 3,
            noise_reuse: NoiseReuse::PerLength,
            identity_idle: 2,
        }
    }

    #[test]
    fn noiseless_survival_is_one() {
        let d = run_rb(&config(NoiseKind::QuasiDc, 0.0, Shots::Infinite)).unwrap();
        for l in &d.lengths {
            for s in &l.sequences {
                assert!(s.estimates.iter().all(|&f| (f - 1.0).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn identity_sequence_is_blind_to_z_noise() {
        let g = build_clifford_group();
        let seq = RbSequence::from_gates(&g, vec![g.identity(); 10]).unwrap();
        let noise = NoiseRealization::constant(0.05, g.noisy_slots(seq.gates()));
        let p = simulate_survival(&g, &seq, &noise, Shots::Infinite, &mut stream(0, &[])).unwrap();
        assert!((p - 1.0).abs() < 1e-14);
    }

    #[test]
    fn survival_matches_first_order_walk() {
        let g = build_clifford_group();
        let mut rng = stream(21, &[]);
        let seq = generate_rb_sequence(&g, 50, &mut rng).unwrap();
        let delta = 0.02;
        let w = compute_walk(
            &g,
            seq.gates(),
            crate::qubit::SignedPauli::plus(crate::qubit::Axis::Z),
            StepWeighting::Concurrent,
        )
        .unwrap();
        let noise = NoiseRealization::constant(delta, g.noisy_slots(seq.gates()));
        let p = simulate_survival(&g, &seq, &noise, Shots::Infinite, &mut rng).unwrap();
        let first = delta * delta * w.norm_v2d_sq;
        // Second-order remainder is O((δ‖V‖)⁴).
        assert!(((1.0 - p) - first).abs() < 2.0 * (delta * delta * w.norm_v_sq).powi(2) + 1e-12);
    }

    #[test]
    fn mismatched_noise_rejected() {
        let g = build_clifford_group();
        let seq = generate_rb_sequence(&g, 5, &mut stream(0, &[])).unwrap();
        let noise = NoiseRealization::constant(0.0, 1000);
        assert!(matches!(
            simulate_survival(&g, &seq, &noise, Shots::Infinite, &mut stream(0, &[])),
            Err(Error::NoiseLengthMismatch { .. })
        ));
    }

    #[test]
    fn finite_shots_stay_near_exact() {
        let exact = run_rb(&config(NoiseKind::QuasiDc, 0.05, Shots::Infinite)).unwrap();
        let sampled = run_rb(&config(NoiseKind::QuasiDc, 0.05, Shots::Finite(25))).unwrap();
        for (a, b) in exact.lengths.iter().zip(&sampled.lengths) {
            for (sa, sb) in a.sequences.iter().zip(&b.sequences) {
                assert_eq!(sa.sequence, sb.sequence);
                for (&p, &q) in sa.estimates.iter().zip(&sb.estimates) {
                    assert!((0.0..=1.0).contains(&q));
                    assert!((q * 25.0 - (q * 25.0).round()).abs() < 1e-9);
                    // Five binomial standard deviations.
                    assert!((p - q).abs() <= 5.0 * (p * (1.0 - p) / 25.0).sqrt() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn deterministic_and_schedule_independent() {
        let c = config(NoiseKind::White, 0.03, Shots::Finite(50));
        let a = run_rb(&c).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_rb(&c)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn per_sequence_noise_differs() {
        let mut c = config(NoiseKind::QuasiDc, 0.03, Shots::Infinite);
        let shared = run_rb(&c).unwrap();
        c.noise_reuse = NoiseReuse::PerSequence;
        let own = run_rb(&c).unwrap();
        assert_ne!(
            shared.lengths[0].sequences[0].estimates,
            own.lengths[0].sequences[0].estimates
        );
    }

    #[test]
    fn validation_lists_every_field() {
        let mut c = config(NoiseKind::QuasiDc, 0.0, Shots::Finite(0));
        c.lengths = vec![1];
        c.realizations = 0;
        let bad = c.validate();
        assert_eq!(bad.len(), 3, "{bad:?}");
    }
}
