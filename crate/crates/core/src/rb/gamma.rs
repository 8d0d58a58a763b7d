use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Gamma};

use crate::stats::mean;
use crate::{Error, Result};

/// Mean first-order `|E|²` per Clifford of the bundled decomposition
/// table: `1/2 + π²/96`.
pub fn clifford_error_factor() -> f64 {
    0.5 + PI * PI / 96.0
}

/// Shape and scale of a gamma distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl GammaParams {
    pub fn mean(&self) -> f64 {
        self.alpha * self.beta
    }

    pub fn variance(&self) -> f64 {
        self.alpha * self.beta * self.beta
    }

    fn cdf(&self, x: f64) -> Result<f64> {
        let g = Gamma::new(self.alpha, 1.0 / self.beta).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(g.cdf(x))
    }
}

/// First-principles quasi-DC parameters `Γ(1, (2Jσ²/3)(1/2 + π²/96))`.
pub fn analytic_gamma_params(j: usize, sigma: f64) -> GammaParams {
    let j_sigma_sq = j as f64 * sigma * sigma;
    if j_sigma_sq > 0.1 {
        log::warn!("Jσ² = {j_sigma_sq:.3} is not small; the gamma description is first order");
    }
    GammaParams {
        alpha: 1.0,
        beta: 2.0 * j_sigma_sq / 3.0 * clifford_error_factor(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    /// `+∞` for a bin that absorbs the upper tail.
    pub upper: f64,
    pub observed: usize,
    pub expected: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodnessOfFit {
    pub chi2: f64,
    pub dof: usize,
    pub reduced_chi2: f64,
    pub p_value: f64,
    /// Bins after merging to expected counts ≥ 5.
    pub bins: Vec<HistogramBin>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    /// ⌈√n⌉ equal-width bins over `[0, 1.05·max]`, expected counts from the
    /// fitted distribution.
    pub histogram: Vec<HistogramBin>,
    pub gof: GoodnessOfFit,
}

impl GammaFit {
    /// Index of the most populated histogram bin (first on ties).
    pub fn modal_bin(&self) -> usize {
        let max = self.histogram.iter().map(|b| b.observed).max().unwrap_or(0);
        self.histogram.iter().position(|b| b.observed == max).unwrap_or(0)
    }
}

fn check_samples(samples: &[f64]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no infidelity samples".into()));
    }
    if let Some(x) = samples.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::InvalidArgument(format!("infidelity {x} outside [0, 1]")));
    }
    if samples.iter().all(|&x| x == samples[0]) {
        return Err(Error::DegenerateSample(format!(
            "all {} samples equal {}",
            samples.len(),
            samples[0]
        )));
    }
    if samples.len() < 30 {
        log::warn!("gamma fit with only {} samples", samples.len());
    }
    Ok(())
}

/// Equal-width histogram with `⌈√n⌉` bins over `[0, 1.05·max]`; the last
/// bin's expected count includes the tail beyond the range.
pub fn gamma_histogram(samples: &[f64], params: GammaParams) -> Result<Vec<HistogramBin>> {
    let n = samples.len();
    let n_bins = (n as f64).sqrt().ceil() as usize;
    let top = samples.iter().fold(0.0, |a: f64, &b| a.max(b)) * 1.05;
    let width = top / n_bins as f64;
    let mut bins: Vec<HistogramBin> = (0..n_bins)
        .map(|k| HistogramBin {
            lower: k as f64 * width,
            upper: (k + 1) as f64 * width,
            observed: 0,
            expected: 0.0,
        })
        .collect();
    for &x in samples {
        let k = ((x / width) as usize).min(n_bins - 1);
        bins[k].observed += 1;
    }
    for (k, b) in bins.iter_mut().enumerate() {
        let hi = if k + 1 == n_bins { 1.0 } else { params.cdf(b.upper)? };
        b.expected = n as f64 * (hi - params.cdf(b.lower)?);
    }
    Ok(bins)
}

/// Pearson χ² of `samples` against `params`, after merging adjacent bins
/// until each expects at least five counts. `fitted` parameters are
/// subtracted from the degrees of freedom.
pub fn gamma_goodness_of_fit(samples: &[f64], params: GammaParams, fitted: usize) -> Result<GoodnessOfFit> {
    check_samples(samples)?;
    let raw = gamma_histogram(samples, params)?;
    let mut bins: Vec<HistogramBin> = Vec::new();
    let mut open: Option<HistogramBin> = None;
    for b in raw {
        let cur = match open.take() {
            Some(o) => HistogramBin {
                lower: o.lower,
                upper: b.upper,
                observed: o.observed + b.observed,
                expected: o.expected + b.expected,
            },
            None => b,
        };
        if cur.expected >= 5.0 {
            bins.push(cur);
        } else {
            open = Some(cur);
        }
    }
    if let Some(o) = open {
        match bins.last_mut() {
            Some(last) => {
                last.upper = o.upper;
                last.observed += o.observed;
                last.expected += o.expected;
            }
            None => bins.push(o),
        }
    }
    if let Some(last) = bins.last_mut() {
        last.upper = f64::INFINITY;
    }
    let dof = bins.len().saturating_sub(1 + fitted);
    if dof == 0 {
        return Err(Error::InsufficientData(format!(
            "only {} usable bins for χ²",
            bins.len()
        )));
    }
    let chi2: f64 = bins
        .iter()
        .map(|b| (b.observed as f64 - b.expected).powi(2) / b.expected)
        .sum();
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(GoodnessOfFit {
        chi2,
        dof,
        reduced_chi2: chi2 / dof as f64,
        p_value: 1.0 - dist.cdf(chi2),
        bins,
    })
}

/// Maximum-likelihood gamma fit with the shape fixed to one, so the scale
/// is the sample mean.
pub fn fit_gamma(samples: &[f64]) -> Result<GammaFit> {
    check_samples(samples)?;
    let params = GammaParams {
        alpha: 1.0,
        beta: mean(samples),
    };
    Ok(GammaFit {
        alpha: params.alpha,
        beta: params.beta,
        n: samples.len(),
        histogram: gamma_histogram(samples, params)?,
        gof: gamma_goodness_of_fit(samples, params, 1)?,
    })
}
