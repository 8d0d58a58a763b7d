use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::qubit::{Clifford, CliffordGroup, GROUP_ORDER};
use crate::{Error, Real, Result};

/// `J − 1` random Cliffords followed by the gate that inverts their
/// product, so the ideal net operation is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RbSequence {
    gates: Vec<Clifford>,
    /// Seed of the stream that drew the random gates, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RbSequence {
    /// Appends the inversion gate to `body`.
    pub fn from_body<T: Real>(group: &CliffordGroup<T>, mut body: Vec<Clifford>) -> Result<Self> {
        let inv = group.inverse_of_product(&body)?;
        body.push(inv);
        Ok(Self {
            gates: body,
            seed: None,
        })
    }

    /// Checks that a full gate list composes to the identity.
    pub fn from_gates<T: Real>(group: &CliffordGroup<T>, gates: Vec<Clifford>) -> Result<Self> {
        if gates.len() < 2 {
            return Err(Error::InvalidArgument("RB sequences have J ≥ 2".into()));
        }
        if group.product(&gates) != group.identity() {
            return Err(Error::InvalidArgument(
                "sequence does not compose to the identity".into(),
            ));
        }
        Ok(Self { gates, seed: None })
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gates(&self) -> &[Clifford] {
        &self.gates
    }
}

pub fn generate_rb_sequence<T: Real, R: Rng + ?Sized>(
    group: &CliffordGroup<T>,
    j: usize,
    rng: &mut R,
) -> Result<RbSequence> {
    if j < 2 {
        return Err(Error::InvalidArgument(format!("RB sequences have J ≥ 2, got {j}")));
    }
    let body = (0..j - 1)
        .map(|_| Clifford::from_index(rng.random_range(0..GROUP_ORDER)))
        .collect::<Result<Vec<_>>>()?;
    RbSequence::from_body(group, body)
}
