use serde::{Deserialize, Serialize};

use super::LengthData;
use crate::optim::{nelder_mead, Bounds, NelderMeadOptions};
use crate::{Error, Result};

/// Typical state-preparation error; the starting point for free-κ fits.
pub const EXPERIMENTAL_KAPPA: f64 = 3e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaMode {
    Fixed(f64),
    Free,
}

/// Sequence-averaged infidelity at one length with its fit weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub j: usize,
    pub mean_infidelity: f64,
    pub weight: f64,
}

impl DecayPoint {
    /// Weight `1/Var(mean)` from the spread over sequences, floored at
    /// `variance_floor`.
    pub fn from_length(data: &LengthData, variance_floor: f64) -> Self {
        let n = data.sequences.len().max(1) as f64;
        Self {
            j: data.j,
            mean_infidelity: 1.0 - data.mean_survival(),
            weight: 1.0 / (data.sequence_variance() / n).max(variance_floor),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub p_rb: f64,
    /// Curvature estimate of the standard error of `p_rb` at fixed κ.
    pub p_rb_se: f64,
    pub kappa: f64,
    pub kappa_fixed: bool,
    /// `data − model` per input point.
    pub residuals: Vec<f64>,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// `Ī(J) = 0.5 − (0.5 − κ) e^{−p J}`.
pub fn decay_model(j: f64, p: f64, kappa: f64) -> f64 {
    0.5 - (0.5 - kappa) * (-p * j).exp()
}

/// Weighted least-squares fit of the RB decay with three starts of a
/// bounded simplex search.
pub fn fit_decay(points: &[DecayPoint], kappa: KappaMode) -> Result<DecayFit> {
    let mut distinct: Vec<usize> = points.iter().filter(|p| p.weight > 0.0).map(|p| p.j).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "decay fit needs ≥ 3 distinct weighted lengths, got {}",
            distinct.len()
        )));
    }
    if points
        .iter()
        .any(|p| p.weight.partial_cmp(&0.0).map_or(true, |o| o.is_lt()) || !p.mean_infidelity.is_finite())
    {
        return Err(Error::InvalidArgument(
            "decay points need finite values and weights ≥ 0".into(),
        ));
    }
    // Rescale weights so the objective is O(1) and tolerances are meaningful.
    let wmax = points.iter().map(|p| p.weight).fold(0.0, f64::max);
    let objective = |p: f64, k: f64| -> f64 {
        points
            .iter()
            .map(|pt| pt.weight / wmax * (pt.mean_infidelity - decay_model(pt.j as f64, p, k)).powi(2))
            .sum()
    };

    let k0 = match kappa {
        KappaMode::Fixed(k) => k,
        KappaMode::Free => EXPERIMENTAL_KAPPA,
    };
    let guesses: Vec<f64> = points
        .iter()
        .filter(|pt| pt.weight > 0.0)
        .filter_map(|pt| {
            let arg = (0.5 - pt.mean_infidelity) / (0.5 - k0);
            (arg > 0.0 && arg < 1.0).then(|| -arg.ln() / pt.j as f64)
        })
        .collect();
    let p0 = if guesses.is_empty() {
        1e-4
    } else {
        (guesses.iter().sum::<f64>() / guesses.len() as f64).max(1e-8)
    };

    let opts = NelderMeadOptions::default();
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    let mut iterations = 0;
    for scale in [1.0, 1.0 / 3.0, 3.0] {
        let start = p0 * scale;
        let m = match kappa {
            KappaMode::Fixed(k) => {
                let b = Bounds::new(vec![0.0], vec![10.0])?;
                nelder_mead(|x| objective(x[0], k), &[start], &[0.2 * start], Some(&b), &opts)
            }
            KappaMode::Free => {
                let b = Bounds::new(vec![0.0, 0.0], vec![10.0, 0.49])?;
                nelder_mead(
                    |x| objective(x[0], x[1]),
                    &[start, k0],
                    &[0.2 * start, 1e-3],
                    Some(&b),
                    &opts,
                )
            }
        };
        iterations += m.iterations;
        if best.as_ref().map_or(true, |b| m.value < b.1) {
            best = Some((m.x, m.value, m.converged));
        }
    }
    let (x, value, converged) = best.expect("at least one start");
    let (p, k) = match kappa {
        KappaMode::Fixed(k) => (x[0], k),
        KappaMode::Free => (x[0], x[1]),
    };
    if !converged {
        log::warn!("decay fit did not converge within {iterations} iterations (p = {p:e}, objective {value:e})");
    }
    // Fisher information in p: Σ w (∂Ī/∂p)².
    let info: f64 = points
        .iter()
        .map(|pt| {
            let j = pt.j as f64;
            pt.weight * ((0.5 - k) * j * (-p * j).exp()).powi(2)
        })
        .sum();
    Ok(DecayFit {
        p_rb: p,
        p_rb_se: if info > 0.0 { info.sqrt().recip() } else { f64::INFINITY },
        kappa: k,
        kappa_fixed: matches!(kappa, KappaMode::Fixed(_)),
        residuals: points
            .iter()
            .map(|pt| pt.mean_infidelity - decay_model(pt.j as f64, p, k))
            .collect(),
        objective: value * wmax,
        converged,
        iterations,
    })
}
