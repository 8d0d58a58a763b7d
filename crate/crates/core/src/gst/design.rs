use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::gateset::{ideal_unitary, unitary_to_mat4, Mat4};
use super::{GateLabel, GateString};
use crate::{Error, Result};

/// Germ-power cap schedule.
pub const MAX_LENGTHS: [usize; 9] = [1, 2, 4, 8, 16, 32, 64, 128, 256];

/// Rule-generated extended germ list, regenerated by [`extended_germs`].
pub const EXTENDED_GERMS_V1: &str = include_str!("../../data/extended_germs_v1.json");
pub const EXTENDED_GERMS_VERSION: &str = "extended-germs-v1";
pub const EXTENDED_GERM_COUNT: usize = 39;

const STANDARD_FIDUCIALS: [&str; 6] = ["{}", "Gx", "Gy", "GxGx", "GxGxGx", "GyGyGy"];
const STANDARD_GERMS: [&str; 11] = [
    "Gx",
    "Gy",
    "Gi",
    "GxGy",
    "GxGyGi",
    "GxGiGy",
    "GxGiGi",
    "GyGiGi",
    "GxGxGiGy",
    "GxGyGyGi",
    "GxGxGyGxGyGy",
];

/// One designed circuit: `prep · germ^power · measure`, first label first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignEntry {
    pub sequence: GateString,
    pub prep: usize,
    pub measure: usize,
    /// Index into `germs`; `None` for fiducial-pair (Gram) circuits.
    pub germ: Option<usize>,
    pub power: usize,
    /// Smallest max-length block containing the circuit; 1 for LGST circuits.
    pub max_length: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentDesign {
    pub gate_labels: Vec<GateLabel>,
    pub fiducials: Vec<GateString>,
    pub germs: Vec<GateString>,
    pub max_lengths: Vec<usize>,
    pub entries: Vec<DesignEntry>,
}

fn parse_all(items: &[&str]) -> Vec<GateString> {
    items.iter().map(|s| s.parse().expect("built-in gate string")).collect()
}

pub fn standard_fiducials() -> Vec<GateString> {
    parse_all(&STANDARD_FIDUCIALS)
}

pub fn standard_germs() -> Vec<GateString> {
    parse_all(&STANDARD_GERMS)
}

impl ExperimentDesign {
    /// Builds the deduplicated circuit list: all fiducial pairs, each
    /// bare gate between all fiducial pairs, then for every `L` and germ
    /// the whole-germ power `⌊L/|germ|⌋` (skipped when zero).
    pub fn build(
        gate_labels: Vec<GateLabel>,
        fiducials: Vec<GateString>,
        germs: Vec<GateString>,
        max_lengths: Vec<usize>,
    ) -> Result<Self> {
        if fiducials.is_empty() || germs.is_empty() || max_lengths.is_empty() {
            return Err(Error::InvalidArgument(
                "design needs fiducials, germs and lengths".into(),
            ));
        }
        if let Some(g) = germs.iter().find(|g| g.is_empty()) {
            return Err(Error::InvalidArgument(format!("empty germ {g}")));
        }
        let known: HashSet<_> = gate_labels.iter().copied().collect();
        for s in fiducials.iter().chain(&germs) {
            if let Some(l) = s.labels().iter().find(|l| !known.contains(l)) {
                return Err(Error::InvalidArgument(format!("{s} uses {l} outside the gate set")));
            }
        }
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        let mut push = |e: DesignEntry| {
            if seen.insert(e.sequence.clone()) {
                entries.push(e);
            }
        };
        let pairs = |body: &GateString| -> Vec<(usize, usize, GateString)> {
            let n = fiducials.len();
            (0..n * n)
                .map(|k| {
                    (
                        k / n,
                        k % n,
                        GateString::concat(&[&fiducials[k / n], body, &fiducials[k % n]]),
                    )
                })
                .collect()
        };
        for (prep, measure, sequence) in pairs(&GateString::empty()) {
            push(DesignEntry {
                sequence,
                prep,
                measure,
                germ: None,
                power: 0,
                max_length: 1,
            });
        }
        for &l in &gate_labels {
            let body = GateString(vec![l]);
            let germ = germs.iter().position(|g| *g == body);
            for (prep, measure, sequence) in pairs(&body) {
                push(DesignEntry {
                    sequence,
                    prep,
                    measure,
                    germ,
                    power: 1,
                    max_length: 1,
                });
            }
        }
        for &cap in &max_lengths {
            for (gi, g) in germs.iter().enumerate() {
                let power = cap / g.len();
                if power == 0 {
                    continue;
                }
                for (prep, measure, sequence) in pairs(&g.repeat(power)) {
                    push(DesignEntry {
                        sequence,
                        prep,
                        measure,
                        germ: Some(gi),
                        power,
                        max_length: cap,
                    });
                }
            }
        }
        Ok(Self {
            gate_labels,
            fiducials,
            germs,
            max_lengths,
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sequences(&self) -> impl Iterator<Item = &GateString> {
        self.entries.iter().map(|e| &e.sequence)
    }

    /// Index of `prep · body · measure` if present.
    pub fn find(&self, s: &GateString) -> Option<usize> {
        self.entries.iter().position(|e| &e.sequence == s)
    }
}

/// Standard `{Gi, Gx, Gy}` design: 6 fiducials, 11 germs, `L` up to 256.
pub fn standard_design() -> ExperimentDesign {
    ExperimentDesign::build(
        GateLabel::STANDARD.to_vec(),
        standard_fiducials(),
        standard_germs(),
        MAX_LENGTHS.to_vec(),
    )
    .expect("standard design is valid")
}

/// Extended `{Gi, ±Gx, ±Gy}` design using the bundled 39-germ list.
pub fn extended_design() -> ExperimentDesign {
    let germs: Vec<String> = serde_json::from_str::<ExtendedGermFile>(EXTENDED_GERMS_V1)
        .expect("bundled germ file parses")
        .germs;
    ExperimentDesign::build(
        GateLabel::EXTENDED.to_vec(),
        standard_fiducials(),
        germs.iter().map(|s| s.parse().expect("bundled germ")).collect(),
        MAX_LENGTHS.to_vec(),
    )
    .expect("extended design is valid")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtendedGermFile {
    version: String,
    rule: String,
    germs: Vec<String>,
}

pub const EXTENDED_GERM_RULE: &str = "standard germs; then their sign images (Gx<->-Gx, Gy<->-Gy); \
then shortlex words over [Gx, Gy, -Gx, -Gy, Gi] of length 2..=6 that contain a negative label, \
use at least two distinct labels, have a non-identity ideal product, are not a power of a shorter word, \
and are not a cyclic rotation of an already accepted germ; stop at 39";

fn ideal_product(s: &GateString) -> Mat4 {
    s.labels()
        .iter()
        .fold(Mat4::identity(), |acc, &l| unitary_to_mat4(&ideal_unitary(l)) * acc)
}

fn is_power_of_shorter(w: &[GateLabel]) -> bool {
    (1..w.len()).any(|p| w.len() % p == 0 && w.chunks(p).all(|c| c == &w[..p]))
}

fn rotations(w: &[GateLabel]) -> impl Iterator<Item = Vec<GateLabel>> + '_ {
    (0..w.len()).map(move |k| w[k..].iter().chain(&w[..k]).copied().collect())
}

/// Regenerates the extended germ list from [`EXTENDED_GERM_RULE`].
pub fn extended_germs() -> Vec<GateString> {
    let mut accepted: Vec<GateString> = standard_germs();
    let images: Vec<GateString> = accepted
        .iter()
        .map(|g| GateString(g.labels().iter().map(|l| l.sign_flipped()).collect()))
        .collect();
    for g in images {
        if !accepted.contains(&g) {
            accepted.push(g);
        }
    }
    let mut cyclic: HashSet<Vec<GateLabel>> = accepted
        .iter()
        .flat_map(|g| rotations(g.labels()).collect::<Vec<_>>())
        .collect();
    let alphabet = [
        GateLabel::Gx,
        GateLabel::Gy,
        GateLabel::MinusGx,
        GateLabel::MinusGy,
        GateLabel::Gi,
    ];
    'lengths: for len in 2..=6 {
        let total = alphabet.len().pow(len as u32);
        for code in 0..total {
            if accepted.len() == EXTENDED_GERM_COUNT {
                break 'lengths;
            }
            let mut c = code;
            let mut w = vec![GateLabel::Gi; len];
            for slot in w.iter_mut().rev() {
                *slot = alphabet[c % alphabet.len()];
                c /= alphabet.len();
            }
            let distinct: HashSet<_> = w.iter().collect();
            if !w.iter().any(|l| l.is_negative())
                || distinct.len() < 2
                || is_power_of_shorter(&w)
                || cyclic.contains(&w)
            {
                continue;
            }
            let g = GateString(w);
            if (ideal_product(&g) - Mat4::identity()).abs().max() < 1e-9 {
                continue;
            }
            cyclic.extend(rotations(g.labels()));
            accepted.push(g);
        }
    }
    accepted
}

/// JSON body of the bundled germ file, as produced by the rule.
pub fn extended_germ_file_json() -> String {
    let file = ExtendedGermFile {
        version: EXTENDED_GERMS_VERSION.to_string(),
        rule: EXTENDED_GERM_RULE.to_string(),
        germs: extended_germs().iter().map(|g| g.to_string()).collect(),
    };
    serde_json::to_string_pretty(&file).expect("germ file serializes") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_count_and_membership() {
        let d = standard_design();
        assert_eq!(d.len(), 2737);
        assert!(d.germs.contains(&"GxGxGyGxGyGy".parse().unwrap()));
        let unique: HashSet<_> = d.sequences().collect();
        assert_eq!(unique.len(), d.len());
        assert_eq!(d, standard_design());
    }

    #[test]
    fn unit_germs_see_every_fiducial_pair() {
        let d = standard_design();
        for germ in ["Gx", "Gy", "Gi"] {
            let g: GateString = germ.parse().unwrap();
            for a in &d.fiducials {
                for b in &d.fiducials {
                    assert!(d.find(&GateString::concat(&[a, &g, b])).is_some(), "{a}{g}{b}");
                }
            }
        }
    }

    #[test]
    fn lengths_are_bounded() {
        let d = standard_design();
        let fid_max = d.fiducials.iter().map(GateString::len).max().unwrap();
        for e in &d.entries {
            assert!(e.sequence.len() <= e.max_length + 2 * fid_max, "{}", e.sequence);
        }
    }

    #[test]
    fn bundled_germs_match_rule() {
        assert_eq!(extended_germ_file_json(), EXTENDED_GERMS_V1);
        let germs = extended_germs();
        assert_eq!(germs.len(), EXTENDED_GERM_COUNT);
        assert_eq!(&germs[..11], &standard_germs()[..]);
        let d = extended_design();
        assert_eq!(d.germs, germs);
        assert!(d.len() > standard_design().len());
    }

    #[test]
    fn rejects_foreign_labels() {
        let r = ExperimentDesign::build(
            GateLabel::STANDARD.to_vec(),
            standard_fiducials(),
            vec!["-Gx".parse().unwrap()],
            vec![1],
        );
        assert!(r.is_err());
    }
}
