use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentDesign, GateSet, GateString};
use crate::rb::Shots;
use crate::rng::{stream, tag};
use crate::Result;

/// One measured circuit. `shots = None` marks exact probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataRow {
    pub sequence: GateString,
    pub probability: f64,
    pub shots: Option<u32>,
    pub counts: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GstDataset {
    pub rows: Vec<DataRow>,
}

impl GstDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn lookup(&self, s: &GateString) -> Option<&DataRow> {
        self.rows.iter().find(|r| &r.sequence == s)
    }
}

fn sample_row(sequence: &GateString, p: f64, shots: Shots, seed: u64, index: usize) -> DataRow {
    let p = p.clamp(0.0, 1.0);
    match shots {
        Shots::Infinite => DataRow {
            sequence: sequence.clone(),
            probability: p,
            shots: None,
            counts: None,
        },
        Shots::Finite(n) => {
            let mut rng = stream(seed, &[tag::SHOTS, index as u64]);
            let k = Binomial::new(n as u64, p)
                .expect("p clamped to [0, 1]")
                .sample(&mut rng) as u32;
            DataRow {
                sequence: sequence.clone(),
                probability: k as f64 / n as f64,
                shots: Some(n),
                counts: Some(k),
            }
        }
    }
}

/// Forward-simulates every design circuit, clipping to `[0, 1]`.
pub fn simulate_dataset(g: &GateSet, design: &ExperimentDesign, shots: Shots, seed: u64) -> Result<GstDataset> {
    simulate_with(design, shots, seed, |_| g)
}

/// Circuits in the first half of the design list use `first`, the rest
/// `second`; a time-dependent gate set outside the Markovian model.
pub fn simulate_drift_dataset(
    first: &GateSet,
    second: &GateSet,
    design: &ExperimentDesign,
    shots: Shots,
    seed: u64,
) -> Result<GstDataset> {
    let half = design.len() / 2;
    simulate_with(design, shots, seed, |i| if i < half { first } else { second })
}

fn simulate_with<'a, F>(design: &ExperimentDesign, shots: Shots, seed: u64, pick: F) -> Result<GstDataset>
where
    F: Fn(usize) -> &'a GateSet + Sync,
{
    let rows = design
        .entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| {
            let p = pick(i).probability(&e.sequence)?;
            Ok(sample_row(&e.sequence, p, shots, seed, i))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GstDataset { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gst::{apply_error_model, standard_design, ErrorModel, GateLabel};

    #[test]
    fn ideal_spam_overlap() {
        let g = GateSet::ideal(&GateLabel::STANDARD);
        let d = standard_design();
        let data = simulate_dataset(&g, &d, Shots::Infinite, 0).unwrap();
        assert_eq!(data.len(), d.len());
        let row = data.lookup(&"Gi".parse().unwrap()).unwrap();
        assert!((row.probability - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ramsey_phase_accumulates_per_idle() {
        let delta = 0.01;
        let g = apply_error_model(
            &GateSet::ideal(&GateLabel::STANDARD),
            &ErrorModel::detuning(delta).unwrap(),
        );
        let d = standard_design();
        let data = simulate_dataset(&g, &d, Shots::Infinite, 0).unwrap();
        // Gx · Gi^n · GxGxGx: a Ramsey fringe whose phase grows by πδ per idle,
        // on top of the fiducials' own detuning errors.
        let fringe = |n: usize| {
            let s: GateString = format!("Gx{}GxGxGx", "Gi".repeat(n)).parse().unwrap();
            data.lookup(&s).map(|r| r.probability)
        };
        let g0 = apply_error_model(&GateSet::ideal(&GateLabel::STANDARD), &ErrorModel::NONE);
        let mut gx_only = g.clone();
        gx_only.set_gate(GateLabel::Gi, *g0.gate(GateLabel::Gi).unwrap());
        for n in [16usize, 64, 256] {
            let p = fringe(n).expect("Gi germ circuit in design");
            let phase = std::f64::consts::PI * delta * n as f64;
            let s: GateString = format!("Gx{}GxGxGx", "Gi".repeat(n)).parse().unwrap();
            let p_no_idle_error = gx_only.probability(&s).unwrap();
            // With exact gates the fringe is (1 + cos φ)/2 for ideal fiducials.
            let analytic = 0.5 * (1.0 + phase.cos());
            assert!((p - analytic).abs() < 0.05, "n={n}: {p} vs {analytic}");
            assert!((p_no_idle_error - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn finite_shots_within_binomial_band() {
        let g = apply_error_model(
            &GateSet::ideal(&GateLabel::STANDARD),
            &ErrorModel::detuning(0.0444).unwrap(),
        );
        let d = standard_design();
        let exact = simulate_dataset(&g, &d, Shots::Infinite, 0).unwrap();
        let n = 1_000_000;
        let sampled = simulate_dataset(&g, &d, Shots::Finite(n), 9).unwrap();
        for (a, b) in exact.rows.iter().zip(&sampled.rows) {
            let p = a.probability;
            let band = 5.0 * (p * (1.0 - p) / n as f64).sqrt() + 1e-12;
            assert!(
                (a.probability - b.probability).abs() <= band.max(5.0 / n as f64),
                "{}",
                a.sequence
            );
        }
        assert_eq!(sampled, simulate_dataset(&g, &d, Shots::Finite(n), 9).unwrap());
    }
}
