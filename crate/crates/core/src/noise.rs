//! Seeded ensembles of detuning trajectories in the quasi-DC and white
//! limits.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::rng::{stream, tag};
use crate::{Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseKind {
    /// One draw per realization, constant over every pulse slot.
    #[serde(rename = "quasi-dc", alias = "dc")]
    QuasiDc,
    /// Independent draw per pulse slot.
    #[serde(rename = "white")]
    White,
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dc" | "quasi-dc" => Ok(Self::QuasiDc),
            "white" => Ok(Self::White),
            other => Err(Error::InvalidArgument(format!("unknown noise kind {other:?}"))),
        }
    }
}

/// Distribution of `δ = Δ/Ω` and the seed of its stream.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise sigma must be finite and ≥ 0, got {sigma}"
            )));
        }
        Ok(Self { kind, sigma, seed })
    }

    /// Same distribution, different stream.
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// One detuning value per noisy pulse slot.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseRealization<T = f64> {
    kind: NoiseKind,
    values: Vec<T>,
}

impl<T: Real> NoiseRealization<T> {
    pub fn new(kind: NoiseKind, values: Vec<T>) -> Result<Self> {
        if kind == NoiseKind::QuasiDc && values.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::InvalidArgument("quasi-DC realization must be constant".into()));
        }
        Ok(Self { kind, values })
    }

    pub fn constant(delta: T, slots: usize) -> Self {
        Self {
            kind: NoiseKind::QuasiDc,
            values: vec![delta; slots],
        }
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// First `slots` values, for sequences shorter than the ensemble length.
    pub fn prefix(&self, slots: usize) -> Result<Self> {
        if slots > self.values.len() {
            return Err(Error::NoiseLengthMismatch {
                expected: slots,
                got: self.values.len(),
            });
        }
        Ok(Self {
            kind: self.kind,
            values: self.values[..slots].to_vec(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseEnsemble<T = f64> {
    pub spec: NoiseSpec,
    realizations: Vec<NoiseRealization<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleJson {
    spec: NoiseSpec,
    values: Vec<Vec<f64>>,
}

impl<T: Real> Serialize for NoiseEnsemble<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EnsembleJson {
            spec: self.spec,
            values: self
                .realizations
                .iter()
                .map(|r| r.values.iter().map(|v| v.to_f64_lossy()).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for NoiseEnsemble<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = EnsembleJson::deserialize(d)?;
        let realizations = raw
            .values
            .into_iter()
            .map(|v| NoiseRealization::new(raw.spec.kind, v.into_iter().map(T::of).collect()))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        if realizations.is_empty() {
            return Err(serde::de::Error::custom("noise ensemble is empty"));
        }
        Ok(Self {
            spec: raw.spec,
            realizations,
        })
    }
}

impl<T: Real> NoiseEnsemble<T> {
    pub fn realizations(&self) -> &[NoiseRealization<T>] {
        &self.realizations
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }

    pub fn pulse_count(&self) -> usize {
        self.realizations.first().map_or(0, NoiseRealization::len)
    }
}

/// Draws `n_realizations` trajectories of `pulse_count` slots from a
/// single stream seeded by `spec.seed`.
pub fn sample_ensemble<T: Real>(
    spec: &NoiseSpec,
    n_realizations: usize,
    pulse_count: usize,
) -> Result<NoiseEnsemble<T>> {
    if pulse_count == 0 || n_realizations == 0 {
        return Err(Error::InvalidArgument(
            "ensemble needs at least one realization and one pulse slot".into(),
        ));
    }
    let normal =
        Normal::new(0.0, spec.sigma).map_err(|e| Error::InvalidArgument(format!("noise sigma {}: {e}", spec.sigma)))?;
    let mut rng = stream(spec.seed, &[tag::NOISE]);
    let realizations = (0..n_realizations)
        .map(|_| {
            let values = match spec.kind {
                NoiseKind::QuasiDc => vec![T::of(normal.sample(&mut rng)); pulse_count],
                NoiseKind::White => (0..pulse_count).map(|_| T::of(normal.sample(&mut rng))).collect(),
            };
            NoiseRealization {
                kind: spec.kind,
                values,
            }
        })
        .collect();
    Ok(NoiseEnsemble {
        spec: *spec,
        realizations,
    })
}

/// Root-mean-square over every value of every realization.
pub fn ensemble_rms<T: Real>(e: &NoiseEnsemble<T>) -> Result<T> {
    let n: usize = e.realizations.iter().map(NoiseRealization::len).sum();
    if n == 0 {
        return Err(Error::InsufficientData("empty noise ensemble".into()));
    }
    let sq: T = e
        .realizations
        .iter()
        .flat_map(|r| r.values.iter())
        .map(|&v| v * v)
        .sum();
    Ok((sq / T::of(n as f64)).sqrt())
}
