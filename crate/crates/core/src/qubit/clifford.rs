//! The 24-element single-qubit Clifford group and its physical pulse table.

use serde::{Deserialize, Serialize};

use super::{noisy_pulse_unitary, PhysicalPulse, PulseAxis, Unitary};
use crate::noise::NoiseRealization;
use crate::{Error, Real, Result};

/// Versioned decomposition table: every non-identity Clifford is at most one
/// driven pulse plus an optional frame update; the identity is an idle.
pub const CLIFFORD_TABLE_V1: &str = include_str!("../../data/clifford_table_v1.json");
pub const CLIFFORD_TABLE_VERSION: &str = "clifford_table_v1";
pub const GROUP_ORDER: usize = 24;
pub const DEFAULT_IDENTITY_IDLE: u8 = 2;

/// Handle to an element of a [`CliffordGroup`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Clifford(u8);

impl Clifford {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        if i < GROUP_ORDER {
            Ok(Self(i as u8))
        } else {
            Err(Error::InvalidArgument(format!("Clifford index {i} out of range")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliffordTableEntry {
    pub index: usize,
    pub pulses: Vec<PhysicalPulse>,
}

#[derive(Clone, Debug)]
pub struct CliffordElement<T> {
    pub index: usize,
    pub decomposition: Vec<PhysicalPulse>,
    pub net: Unitary<T>,
}

impl<T: Real> CliffordElement<T> {
    pub fn noisy_pulse_count(&self) -> usize {
        self.decomposition.iter().filter(|p| p.is_noisy()).count()
    }

    /// Total noisy duration in π/2 units.
    pub fn duration(&self) -> u32 {
        self.decomposition.iter().map(|p| p.duration() as u32).sum()
    }
}

#[derive(Clone, Debug)]
pub struct CliffordGroup<T: Real = f64> {
    elements: Vec<CliffordElement<T>>,
    product: [[u8; GROUP_ORDER]; GROUP_ORDER],
    inverse: [u8; GROUP_ORDER],
    identity: Clifford,
}

/// The standard group with a π-length identity idle.
pub fn build_clifford_group() -> CliffordGroup<f64> {
    CliffordGroup::standard()
}

/// Ideal product of a pulse list, later pulses multiplying from the left.
fn ideal_product<T: Real>(pulses: &[PhysicalPulse]) -> Unitary<T> {
    pulses
        .iter()
        .fold(Unitary::identity(), |acc, p| noisy_pulse_unitary(p, T::zero()) * acc)
}

impl<T: Real> CliffordGroup<T> {
    pub fn standard() -> Self {
        Self::with_identity_idle(DEFAULT_IDENTITY_IDLE).expect("bundled Clifford table is valid")
    }

    /// Standard table with the identity idle length overridden.
    pub fn with_identity_idle(duration: u8) -> Result<Self> {
        let mut entries = Self::bundled_table();
        let idle = PhysicalPulse::new(PulseAxis::Idle, 0, duration)?;
        for e in entries.iter_mut() {
            if e.pulses.iter().all(|p| p.axis() == PulseAxis::Idle) {
                e.pulses = vec![idle];
            }
        }
        Self::from_table(&entries)
    }

    pub fn bundled_table() -> Vec<CliffordTableEntry> {
        serde_json::from_str(CLIFFORD_TABLE_V1).expect("bundled Clifford table parses")
    }

    pub fn from_table_json(json: &str) -> Result<Self> {
        let entries: Vec<CliffordTableEntry> = serde_json::from_str(json)?;
        Self::from_table(&entries)
    }

    /// Builds the group from a decomposition table, checking that the table
    /// holds 24 distinct elements closed under multiplication.
    pub fn from_table(entries: &[CliffordTableEntry]) -> Result<Self> {
        if entries.len() != GROUP_ORDER {
            return Err(Error::InvalidArgument(format!(
                "Clifford table has {} entries, expected {GROUP_ORDER}",
                entries.len()
            )));
        }
        let mut elements = Vec::with_capacity(GROUP_ORDER);
        for (pos, e) in entries.iter().enumerate() {
            if e.index != pos {
                return Err(Error::InvalidArgument(format!(
                    "table entry {pos} has index {}",
                    e.index
                )));
            }
            if e.pulses.is_empty() {
                return Err(Error::InvalidArgument(format!("Clifford {pos} has no pulses")));
            }
            elements.push(CliffordElement {
                index: pos,
                decomposition: e.pulses.clone(),
                net: ideal_product(&e.pulses),
            });
        }
        for i in 0..GROUP_ORDER {
            for j in 0..i {
                if elements[i].net.equals_up_to_phase(&elements[j].net) {
                    return Err(Error::InvalidArgument(format!("Cliffords {j} and {i} coincide")));
                }
            }
        }
        let identity = elements
            .iter()
            .position(|e| e.net.equals_up_to_phase(&Unitary::identity()))
            .ok_or_else(|| Error::InvalidArgument("table has no identity".into()))?;
        if !elements[identity]
            .decomposition
            .iter()
            .all(|p| p.axis() == PulseAxis::Idle)
        {
            return Err(Error::InvalidArgument("identity must be realised as an idle".into()));
        }

        let find = |u: &Unitary<T>| elements.iter().position(|e| e.net.equals_up_to_phase(u));
        let mut product = [[0u8; GROUP_ORDER]; GROUP_ORDER];
        for a in 0..GROUP_ORDER {
            for b in 0..GROUP_ORDER {
                let ab = elements[a].net * elements[b].net;
                let k = find(&ab)
                    .ok_or_else(|| Error::InvalidArgument(format!("product of Cliffords {a}·{b} leaves the table")))?;
                product[a][b] = k as u8;
            }
        }
        let mut inverse = [0u8; GROUP_ORDER];
        for (a, inv) in inverse.iter_mut().enumerate() {
            *inv = (0..GROUP_ORDER)
                .find(|&b| product[a][b] as usize == identity)
                .ok_or_else(|| Error::InvalidArgument(format!("Clifford {a} has no inverse")))?
                as u8;
        }
        Ok(Self {
            elements,
            product,
            inverse,
            identity: Clifford(identity as u8),
        })
    }

    pub fn table(&self) -> Vec<CliffordTableEntry> {
        self.elements
            .iter()
            .map(|e| CliffordTableEntry {
                index: e.index,
                pulses: e.decomposition.clone(),
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Clifford> {
        (0..GROUP_ORDER as u8).map(Clifford)
    }

    pub fn element(&self, c: Clifford) -> &CliffordElement<T> {
        &self.elements[c.index()]
    }

    pub fn identity(&self) -> Clifford {
        self.identity
    }

    /// Element with net unitary `a·b` (b acts first).
    pub fn compose(&self, a: Clifford, b: Clifford) -> Clifford {
        Clifford(self.product[a.index()][b.index()])
    }

    pub fn inverse(&self, c: Clifford) -> Clifford {
        Clifford(self.inverse[c.index()])
    }

    /// Net element of a time-ordered sequence: `C_n ⋯ C_2 C_1`.
    pub fn product(&self, seq: &[Clifford]) -> Clifford {
        seq.iter().fold(self.identity, |acc, &c| self.compose(c, acc))
    }

    /// The element `G` with `G · product(seq) = I`, i.e. the gate that
    /// returns the sequence to the identity when appended.
    pub fn inverse_of_product(&self, seq: &[Clifford]) -> Result<Clifford> {
        if seq.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(self.inverse(self.product(seq)))
    }

    pub fn find(&self, u: &Unitary<T>) -> Option<Clifford> {
        self.elements
            .iter()
            .position(|e| e.net.equals_up_to_phase(u))
            .map(|i| Clifford(i as u8))
    }

    /// Number of noise samples the flattened pulse stream consumes.
    pub fn noisy_slots(&self, seq: &[Clifford]) -> usize {
        seq.iter().map(|&c| self.element(c).noisy_pulse_count()).sum()
    }

    pub fn pulses<'a>(&'a self, seq: &'a [Clifford]) -> impl Iterator<Item = &'a PhysicalPulse> + 'a {
        seq.iter().flat_map(move |&c| self.element(c).decomposition.iter())
    }

    pub fn ideal_unitary(&self, seq: &[Clifford]) -> Unitary<T> {
        seq.iter()
            .fold(Unitary::identity(), |acc, &c| self.element(c).net * acc)
    }

    /// Ordered product of noisy pulse unitaries, one δ per noisy slot.
    pub fn sequence_unitary(&self, seq: &[Clifford], noise: &NoiseRealization<T>) -> Result<Unitary<T>> {
        self.sequence_unitary_with(seq, noise.values())
    }

    pub fn sequence_unitary_with(&self, seq: &[Clifford], deltas: &[T]) -> Result<Unitary<T>> {
        let expected = self.noisy_slots(seq);
        if deltas.len() != expected {
            return Err(Error::NoiseLengthMismatch {
                expected,
                got: deltas.len(),
            });
        }
        let mut slot = 0;
        let mut u = Unitary::identity();
        for p in self.pulses(seq) {
            let d = if p.is_noisy() {
                slot += 1;
                deltas[slot - 1]
            } else {
                T::zero()
            };
            u = noisy_pulse_unitary(p, d) * u;
        }
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::Axis;
    use std::f64::consts::PI;

    fn by_unitary(g: &CliffordGroup, u: Unitary<f64>) -> Clifford {
        g.find(&u).expect("element present")
    }

    #[test]
    fn group_has_24_elements_and_idle_identity() {
        let g = build_clifford_group();
        assert_eq!(g.len(), 24);
        let id = g.element(g.identity());
        assert_eq!(id.decomposition, vec![PhysicalPulse::idle(2)]);
    }

    #[test]
    fn all_products_close_up_to_phase() {
        // Brute-force 2×2 multiplication for all 576 pairs.
        let g = build_clifford_group();
        for a in g.iter() {
            for b in g.iter() {
                let direct = g.element(a).net * g.element(b).net;
                let c = g.compose(a, b);
                assert!(g.element(c).net.equals_up_to_phase(&direct));
            }
        }
    }

    #[test]
    fn compose_examples() {
        let g = build_clifford_group();
        let id = g.identity();
        for c in g.iter() {
            assert_eq!(g.compose(id, c), c);
            assert_eq!(g.compose(c, g.inverse(c)), id);
        }
        let x90 = by_unitary(&g, Unitary::rotation(Axis::X, PI / 2.0));
        let x180 = by_unitary(&g, Unitary::rotation(Axis::X, PI));
        assert_eq!(g.compose(x90, x90), x180);
    }

    #[test]
    fn inverse_of_product_examples() {
        let g = build_clifford_group();
        let id = g.identity();
        assert_eq!(g.inverse_of_product(&[id, id, id]).unwrap(), id);
        let x90 = by_unitary(&g, Unitary::rotation(Axis::X, PI / 2.0));
        let xm90 = by_unitary(&g, Unitary::rotation(Axis::X, -PI / 2.0));
        assert_eq!(g.inverse_of_product(&[x90]).unwrap(), xm90);
        assert!(matches!(g.inverse_of_product(&[]), Err(Error::EmptySequence)));
    }

    #[test]
    fn long_random_sequence_inverts() {
        use rand::Rng;
        let g = build_clifford_group();
        let mut rng = crate::rng::stream(11, &[]);
        let seq: Vec<Clifford> = (0..100).map(|_| Clifford(rng.random_range(0..24))).collect();
        let inv = g.inverse_of_product(&seq).unwrap();
        let brute = seq.iter().fold(Unitary::identity(), |acc, &c| g.element(c).net * acc);
        let total = g.element(inv).net * brute;
        assert!(total.equals_up_to_phase(&Unitary::identity()));
    }

    #[test]
    fn table_round_trips_through_json() {
        let g = build_clifford_group();
        let json = serde_json::to_string(&g.table()).unwrap();
        let back = CliffordGroup::<f64>::from_table_json(&json).unwrap();
        assert_eq!(back.table(), g.table());
    }

    #[test]
    fn bad_tables_rejected() {
        let mut t = CliffordGroup::<f64>::bundled_table();
        t[5].pulses = t[4].pulses.clone();
        assert!(CliffordGroup::<f64>::from_table(&t).is_err());
        assert!(CliffordGroup::<f64>::from_table(&t[..23]).is_err());
    }

    #[test]
    fn identity_idle_override() {
        let g = CliffordGroup::<f64>::with_identity_idle(1).unwrap();
        assert_eq!(g.element(g.identity()).decomposition, vec![PhysicalPulse::idle(1)]);
    }

    #[test]
    fn noiseless_sequence_is_net_clifford() {
        let g = build_clifford_group();
        let seq: Vec<Clifford> = [3, 8, 17, 21, 5].iter().map(|&i| Clifford(i)).collect();
        let zeros = vec![0.0; g.noisy_slots(&seq)];
        let u = g.sequence_unitary_with(&seq, &zeros).unwrap();
        assert!(u.equals_up_to_phase(&g.element(g.product(&seq)).net));
        let short = vec![0.0; zeros.len() - 1];
        assert!(matches!(
            g.sequence_unitary_with(&seq, &short),
            Err(Error::NoiseLengthMismatch { .. })
        ));
    }

    #[test]
    fn quasi_dc_sequence_matches_independent_product() {
        // Independent re-implementation: build each pulse's exponential
        // from its Hamiltonian written out by hand.
        let g = build_clifford_group();
        let seq: Vec<Clifford> = [8, 20, 14, 0].iter().map(|&i| Clifford(i)).collect();
        let delta = 0.05;
        let deltas = vec![delta; g.noisy_slots(&seq)];
        let u = g.sequence_unitary_with(&seq, &deltas).unwrap();
        let mut brute = crate::qubit::Mat2::<f64>::identity();
        for p in g.pulses(&seq) {
            let theta = p.quarter_turns() as f64 * PI / 2.0;
            let det = p.duration() as f64 * PI / 4.0 * delta;
            let h = match p.axis() {
                PulseAxis::X => [theta / 2.0, 0.0, det],
                PulseAxis::Y => [0.0, theta / 2.0, det],
                PulseAxis::Idle => [0.0, 0.0, det],
                PulseAxis::FrameZ => [0.0, 0.0, theta / 2.0],
            };
            brute = crate::qubit::Mat2::exp_minus_i_pauli(h) * brute;
        }
        assert!(u.matrix().max_abs_diff(&brute) < 1e-14);
    }
}
