//! Pauli-space random walks of Clifford sequences.
//!
//! Step `l` points along the error axis conjugated by everything before
//! gate `l`: `r̂_l = K†_{l−1} σ K_{l−1}`. For small quasi-DC detuning the
//! survival infidelity of a net-identity sequence is `δ²‖V₂D‖²`.

use std::sync::atomic::{AtomicBool, Ordering};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::qubit::{conjugate_pauli, pulse_error_vector, Clifford, CliffordGroup, SignedPauli, Unitary};
use crate::rb::{generate_rb_sequence, RbSequence};
use crate::{Error, Real, Result};

static LARGE_PREDICTION_WARNED: AtomicBool = AtomicBool::new(false);

/// How each gate's step is weighted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum StepWeighting {
    /// One unit step per Clifford, frame-only gates included.
    Unit,
    /// Step length equals the gate's noisy duration in π/2 units.
    #[default]
    Duration,
    /// Exact first-order error vector of the gate's pulses under the
    /// concurrent model, in the frame before the gate. Not restricted to
    /// the six signed Pauli directions.
    Concurrent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkStep<T> {
    pub direction: SignedPauli,
    pub weight: T,
    pub vector: [T; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkRecord<T> {
    pub weighting: StepWeighting,
    pub steps: Vec<WalkStep<T>>,
    pub v: [T; 3],
    pub v2d: [T; 2],
    pub vz: T,
    pub norm_v2d_sq: T,
    pub norm_v_sq: T,
}

impl<T: Real> WalkRecord<T> {
    fn from_steps(weighting: StepWeighting, steps: Vec<WalkStep<T>>) -> Self {
        let mut v = [T::zero(); 3];
        for s in &steps {
            for (acc, x) in v.iter_mut().zip(s.vector) {
                *acc = *acc + x;
            }
        }
        let norm_v2d_sq = v[0] * v[0] + v[1] * v[1];
        Self {
            weighting,
            steps,
            v,
            v2d: [v[0], v[1]],
            vz: v[2],
            norm_v2d_sq,
            norm_v_sq: norm_v2d_sq + v[2] * v[2],
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `Σ_l ‖step_l‖`, an upper bound on `‖V‖`.
    pub fn path_length(&self) -> T {
        self.steps
            .iter()
            .map(|s| (s.vector[0] * s.vector[0] + s.vector[1] * s.vector[1] + s.vector[2] * s.vector[2]).sqrt())
            .sum()
    }
}

fn scaled<T: Real>(v: [T; 3], w: T) -> [T; 3] {
    [v[0] * w, v[1] * w, v[2] * w]
}

/// Walk of `seq` for an error along `error_axis`.
pub fn compute_walk<T: Real>(
    group: &CliffordGroup<T>,
    seq: &[Clifford],
    error_axis: SignedPauli,
    weighting: StepWeighting,
) -> Result<WalkRecord<T>> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let axis_vec = error_axis.vector::<T>();
    let mut frame = Unitary::identity();
    let mut steps = Vec::with_capacity(seq.len());
    for &c in seq {
        let el = group.element(c);
        let direction = conjugate_pauli(&frame, error_axis)?;
        let (weight, vector) = match weighting {
            StepWeighting::Unit => (T::one(), direction.vector()),
            StepWeighting::Duration => {
                let w = T::of(el.duration() as f64);
                (w, scaled(direction.vector(), w))
            }
            StepWeighting::Concurrent => {
                let mut inner = frame;
                let mut acc = [T::zero(); 3];
                for p in &el.decomposition {
                    let e = inner.heisenberg(pulse_error_vector(p, axis_vec));
                    for k in 0..3 {
                        acc[k] = acc[k] + e[k];
                    }
                    inner = crate::qubit::noisy_pulse_unitary(p, T::zero()) * inner;
                }
                let w = (acc[0] * acc[0] + acc[1] * acc[1] + acc[2] * acc[2]).sqrt();
                (w, acc)
            }
        };
        steps.push(WalkStep {
            direction,
            weight,
            vector,
        });
        frame = el.net * frame;
    }
    Ok(WalkRecord::from_steps(weighting, steps))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongWalkLabel {
    pub is_long: bool,
    pub threshold_used: f64,
}

/// Diffusive mean of `‖V₂D‖²` for a `J`-step unit walk.
pub fn diffusive_mean_v2d(j: usize) -> f64 {
    2.0 / 3.0 * j as f64
}

/// `is_long ⇔ ‖V₂D‖² > m·(2/3)·J`.
pub fn classify_long_walk<T: Real>(w: &WalkRecord<T>, j: usize, multiplier: f64) -> Result<LongWalkLabel> {
    if !(multiplier > 0.0 && multiplier.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "long-walk multiplier must be > 0, got {multiplier}"
        )));
    }
    Ok(LongWalkLabel {
        is_long: w.norm_v2d_sq.to_f64_lossy() > multiplier * diffusive_mean_v2d(j),
        threshold_used: multiplier,
    })
}

/// Rejection-samples `target` RB sequences of length `j` whose unit-weight
/// σz walks are long at multiplier `m`. `m = 0` accepts every draw.
pub fn preselect_long_walk_sequences<T: Real, R: Rng + ?Sized>(
    group: &CliffordGroup<T>,
    j: usize,
    target: usize,
    multiplier: f64,
    attempt_cap: usize,
    rng: &mut R,
) -> Result<Vec<RbSequence>> {
    if target == 0 {
        return Err(Error::InvalidArgument("preselection target must be ≥ 1".into()));
    }
    if multiplier < 0.0 || !multiplier.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "long-walk multiplier must be ≥ 0, got {multiplier}"
        )));
    }
    let axis = SignedPauli::plus(crate::qubit::Axis::Z);
    let mut accepted = Vec::with_capacity(target);
    let mut attempts = 0;
    while accepted.len() < target {
        if attempts >= attempt_cap {
            return Err(Error::AttemptCapExceeded {
                attempts,
                accepted: accepted.len(),
                target,
            });
        }
        attempts += 1;
        let seq = generate_rb_sequence(group, j, rng)?;
        let keep = multiplier == 0.0 || {
            let w = compute_walk(group, seq.gates(), axis, StepWeighting::Unit)?;
            classify_long_walk(&w, j, multiplier)?.is_long
        };
        if keep {
            accepted.push(seq);
        }
    }
    log::debug!("preselected {target} sequences at J = {j}, m = {multiplier} in {attempts} attempts");
    Ok(accepted)
}

/// First-order quasi-DC survival infidelity `δ²‖V₂D‖²`.
pub fn predicted_dc_infidelity<T: Real>(delta: T, w: &WalkRecord<T>) -> T {
    let out = delta * delta * w.norm_v2d_sq;
    if out > T::of(0.1) && !LARGE_PREDICTION_WARNED.swap(true, Ordering::Relaxed) {
        log::warn!("predicted infidelity {out} is outside the first-order regime");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{build_clifford_group, Axis, Mat2};
    use crate::rng::stream;
    use std::f64::consts::PI;

    fn z() -> SignedPauli {
        SignedPauli::plus(Axis::Z)
    }

    fn find(g: &CliffordGroup, axis: Axis, angle: f64) -> Clifford {
        g.find(&Unitary::rotation(axis, angle)).unwrap()
    }

    #[test]
    fn identity_sequence_walks_straight_up() {
        let g = build_clifford_group();
        let seq = vec![g.identity(); 7];
        let w = compute_walk(&g, &seq, z(), StepWeighting::Duration).unwrap();
        assert!(w.steps.iter().all(|s| s.direction == z()));
        assert_eq!(w.norm_v2d_sq, 0.0);
        assert_eq!(w.vz, 14.0);
    }

    #[test]
    fn four_quarter_turns_close_the_loop() {
        let g = build_clifford_group();
        let seq = vec![find(&g, Axis::X, PI / 2.0); 4];
        let w = compute_walk(&g, &seq, z(), StepWeighting::Unit).unwrap();
        let dirs: Vec<String> = w.steps.iter().map(|s| s.direction.to_string()).collect();
        assert_eq!(dirs, ["+z", "+y", "-z", "-y"]);
        assert_eq!(w.v, [0.0; 3]);
    }

    #[test]
    fn empty_sequence_rejected() {
        let g = build_clifford_group();
        assert!(matches!(
            compute_walk(&g, &[], z(), StepWeighting::Unit),
            Err(Error::EmptySequence)
        ));
    }

    #[test]
    fn matches_brute_force_conjugation() {
        // Independent path: accumulate the dense product and conjugate σz
        // directly, reading the Pauli coefficients.
        let g = build_clifford_group();
        let mut rng = stream(5, &[]);
        let seq = generate_rb_sequence(&g, 100, &mut rng).unwrap();
        let w = compute_walk(&g, seq.gates(), z(), StepWeighting::Unit).unwrap();
        let mut k = Mat2::<f64>::identity();
        let mut v = [0.0; 3];
        for &c in seq.gates() {
            let r = (k.adjoint() * Mat2::pauli(Axis::Z) * k).bloch();
            for i in 0..3 {
                v[i] += r[i].round();
            }
            k = *g.element(c).net.matrix() * k;
        }
        let norm: f64 = v.iter().map(|x| x * x).sum();
        assert_eq!(w.norm_v_sq, norm);
    }

    #[test]
    fn record_invariants() {
        let g = build_clifford_group();
        let mut rng = stream(6, &[]);
        for weighting in [StepWeighting::Unit, StepWeighting::Duration, StepWeighting::Concurrent] {
            let seq = generate_rb_sequence(&g, 40, &mut rng).unwrap();
            let w = compute_walk(&g, seq.gates(), z(), weighting).unwrap();
            assert!((w.norm_v_sq - w.norm_v2d_sq - w.vz * w.vz).abs() < 1e-12);
            assert!(w.norm_v_sq.sqrt() <= w.path_length() + 1e-12);
        }
    }

    #[test]
    fn walk_is_additive() {
        let g = build_clifford_group();
        let mut rng = stream(8, &[]);
        let seq = generate_rb_sequence(&g, 20, &mut rng).unwrap();
        let gates = seq.gates();
        let head = compute_walk(&g, &gates[..19], z(), StepWeighting::Unit).unwrap();
        let full = compute_walk(&g, gates, z(), StepWeighting::Unit).unwrap();
        let net = g.element(g.product(&gates[..19])).net;
        let last = conjugate_pauli(&net, z()).unwrap();
        assert_eq!(full.steps[..19], head.steps[..]);
        assert_eq!(full.steps[19].direction, last);
    }

    #[test]
    fn classification_examples() {
        let mut w = WalkRecord::<f64>::from_steps(StepWeighting::Unit, vec![]);
        for m in [0.5, 1.0, 2.0] {
            assert!(!classify_long_walk(&w, 200, m).unwrap().is_long);
        }
        w.norm_v2d_sq = 300.0;
        assert!(classify_long_walk(&w, 200, 2.0).unwrap().is_long);
        w.norm_v2d_sq = 140.0;
        assert!(classify_long_walk(&w, 200, 1.0).unwrap().is_long);
        assert!(!classify_long_walk(&w, 200, 2.0).unwrap().is_long);
        assert!(classify_long_walk(&w, 200, 0.0).is_err());
    }

    #[test]
    fn preselection_meets_threshold() {
        let g = build_clifford_group();
        let mut rng = stream(9, &[]);
        let picked = preselect_long_walk_sequences(&g, 200, 20, 2.0, 100_000, &mut rng).unwrap();
        assert_eq!(picked.len(), 20);
        for s in &picked {
            let w = compute_walk(&g, s.gates(), z(), StepWeighting::Unit).unwrap();
            assert!(w.norm_v2d_sq > 2.0 * 2.0 / 3.0 * 200.0);
        }
        let all = preselect_long_walk_sequences(&g, 10, 5, 0.0, 5, &mut rng).unwrap();
        assert_eq!(all.len(), 5);
        assert!(matches!(
            preselect_long_walk_sequences(&g, 10, 5, 1000.0, 50, &mut rng),
            Err(Error::AttemptCapExceeded { .. })
        ));
    }

    #[test]
    fn acceptance_fraction_matches_monte_carlo_tail() {
        // The attempt count of rejection sampling is geometric with the tail
        // probability estimated from an independent batch of walks.
        let g = build_clifford_group();
        let j = 50;
        let mut rng = stream(10, &[1]);
        let n = 20_000;
        let tail = (0..n)
            .filter(|_| {
                let s = generate_rb_sequence(&g, j, &mut rng).unwrap();
                let w = compute_walk(&g, s.gates(), z(), StepWeighting::Unit).unwrap();
                classify_long_walk(&w, j, 2.0).unwrap().is_long
            })
            .count() as f64
            / n as f64;
        let mut rng = stream(10, &[2]);
        let target = 400;
        let mut attempts = 0usize;
        let mut accepted = 0usize;
        while accepted < target {
            attempts += 1;
            let s = generate_rb_sequence(&g, j, &mut rng).unwrap();
            let w = compute_walk(&g, s.gates(), z(), StepWeighting::Unit).unwrap();
            accepted += classify_long_walk(&w, j, 2.0).unwrap().is_long as usize;
        }
        let frac = target as f64 / attempts as f64;
        let se = (tail * (1.0 - tail) / n as f64).sqrt() + (frac * (1.0 - frac) / attempts as f64).sqrt();
        assert!((frac - tail).abs() < 4.0 * se, "{frac} vs {tail}");
    }

    #[test]
    fn unit_walk_mean_is_diffusive() {
        let g = build_clifford_group();
        let mut rng = stream(12, &[]);
        let j = 50;
        let n = 20_000;
        let mean = (0..n)
            .map(|_| {
                let s = generate_rb_sequence(&g, j, &mut rng).unwrap();
                compute_walk(&g, s.gates(), z(), StepWeighting::Unit).unwrap().norm_v_sq
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean / j as f64 - 1.0).abs() < 0.1, "mean ‖V‖²/J = {}", mean / j as f64);
    }

    #[test]
    fn prediction_arithmetic() {
        let mut w = WalkRecord::<f64>::from_steps(StepWeighting::Unit, vec![]);
        assert_eq!(predicted_dc_infidelity(0.0, &w), 0.0);
        w.norm_v2d_sq = 40.0;
        assert!((predicted_dc_infidelity(0.05, &w) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn concurrent_walk_predicts_exact_infidelity_to_first_order() {
        // The exact infidelity carries an odd δ³ term that cancels between
        // +δ and −δ; the symmetric average is accurate to O(δ⁴).
        let g = build_clifford_group();
        let mut rng = stream(13, &[]);
        let exact = |s: &RbSequence, d: f64| {
            let u = g
                .sequence_unitary_with(s.gates(), &vec![d; g.noisy_slots(s.gates())])
                .unwrap();
            1.0 - u.survival()
        };
        for _ in 0..10 {
            let s = generate_rb_sequence(&g, 50, &mut rng).unwrap();
            let w = compute_walk(&g, s.gates(), z(), StepWeighting::Concurrent).unwrap();
            if w.norm_v2d_sq < 1.0 {
                continue;
            }
            let one_sided: Vec<f64> = [0.001, 0.002, 0.005]
                .iter()
                .map(|&d| exact(&s, d) / predicted_dc_infidelity(d, &w))
                .collect();
            assert!(
                (one_sided[0] - 1.0).abs() <= (one_sided[2] - 1.0).abs() + 1e-9,
                "{one_sided:?}"
            );
            for d in [0.001, 0.002, 0.005] {
                let sym = 0.5 * (exact(&s, d) + exact(&s, -d)) / predicted_dc_infidelity(d, &w);
                assert!((sym - 1.0).abs() < 0.05, "δ = {d}: {sym}");
            }
        }
    }

    #[test]
    fn generic_over_f32() {
        let g = CliffordGroup::<f32>::standard();
        let seq = vec![find(&build_clifford_group(), Axis::X, PI / 2.0); 4];
        let w = compute_walk(&g, &seq, z(), StepWeighting::Unit).unwrap();
        assert_eq!(w.norm_v_sq, 0.0f32);
    }
}
