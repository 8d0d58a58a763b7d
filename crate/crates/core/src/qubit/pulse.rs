use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use super::{Axis, Unitary};
use crate::{Error, Real, Result};

static LARGE_DETUNING_WARNED: AtomicBool = AtomicBool::new(false);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PulseAxis {
    #[serde(rename = "x")]
    X,
    #[serde(rename = "y")]
    Y,
    #[serde(rename = "idle")]
    Idle,
    /// Instantaneous, noise-free frame update about z.
    #[serde(rename = "frame-z")]
    FrameZ,
}

/// A timed physical operation. Angles are integer multiples of π/2 and
/// durations are in units of the π/2 pulse time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPulse", into = "RawPulse")]
pub struct PhysicalPulse {
    axis: PulseAxis,
    quarter_turns: i8,
    duration: u8,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPulse {
    axis: PulseAxis,
    angle_units_of_pi_over_2: i8,
    duration: u8,
}

impl TryFrom<RawPulse> for PhysicalPulse {
    type Error = Error;
    fn try_from(r: RawPulse) -> Result<Self> {
        PhysicalPulse::new(r.axis, r.angle_units_of_pi_over_2, r.duration)
    }
}

impl From<PhysicalPulse> for RawPulse {
    fn from(p: PhysicalPulse) -> Self {
        RawPulse {
            axis: p.axis,
            angle_units_of_pi_over_2: p.quarter_turns,
            duration: p.duration,
        }
    }
}

impl PhysicalPulse {
    pub fn new(axis: PulseAxis, quarter_turns: i8, duration: u8) -> Result<Self> {
        let bad = |why: &str| {
            Err(Error::InvalidArgument(format!(
                "pulse {axis:?}/{quarter_turns}/{duration}: {why}"
            )))
        };
        match axis {
            PulseAxis::FrameZ if duration != 0 => return bad("frame updates take no time"),
            PulseAxis::FrameZ if !(-2..=2).contains(&quarter_turns) || quarter_turns == 0 => {
                return bad("frame angle must be ±π/2 or π")
            }
            PulseAxis::Idle if quarter_turns != 0 || duration == 0 => {
                return bad("idles have zero angle and positive duration")
            }
            PulseAxis::X | PulseAxis::Y if !matches!(quarter_turns.abs(), 1 | 2) => {
                return bad("driven pulses rotate by ±π/2 or ±π")
            }
            PulseAxis::X | PulseAxis::Y if duration as i8 != quarter_turns.abs() => {
                return bad("driven pulse duration must equal |angle| in π/2 units")
            }
            _ => {}
        }
        Ok(Self {
            axis,
            quarter_turns,
            duration,
        })
    }

    pub fn x(quarter_turns: i8) -> Self {
        Self::new(PulseAxis::X, quarter_turns, quarter_turns.unsigned_abs()).expect("valid x pulse")
    }

    pub fn y(quarter_turns: i8) -> Self {
        Self::new(PulseAxis::Y, quarter_turns, quarter_turns.unsigned_abs()).expect("valid y pulse")
    }

    pub fn idle(duration: u8) -> Self {
        Self::new(PulseAxis::Idle, 0, duration).expect("valid idle")
    }

    pub fn frame_z(quarter_turns: i8) -> Self {
        Self::new(PulseAxis::FrameZ, quarter_turns, 0).expect("valid frame update")
    }

    pub fn axis(&self) -> PulseAxis {
        self.axis
    }

    pub fn quarter_turns(&self) -> i8 {
        self.quarter_turns
    }

    pub fn duration(&self) -> u8 {
        self.duration
    }

    pub fn angle<T: Real>(&self) -> T {
        T::of(self.quarter_turns as f64) * T::FRAC_PI_2()
    }

    /// Frame updates are exact and consume no noise sample.
    pub fn is_noisy(&self) -> bool {
        self.axis != PulseAxis::FrameZ
    }

    fn rotation_axis(&self) -> Option<Axis> {
        match self.axis {
            PulseAxis::X => Some(Axis::X),
            PulseAxis::Y => Some(Axis::Y),
            PulseAxis::FrameZ => Some(Axis::Z),
            PulseAxis::Idle => None,
        }
    }
}

/// Half-angle of the concurrent detuning term per unit δ: duration × π/4,
/// so a π pulse accumulates twice the phase of a π/2 pulse.
pub fn detuning_half_angle<T: Real>(duration: u8) -> T {
    T::of(duration as f64) * T::FRAC_PI_4()
}

/// Unitary of a pulse under a concurrent detuning `δ = Δ/Ω`:
/// `exp{-i[(θ/2)σ_axis + duration·(π/4)·δ σz]}`.
pub fn noisy_pulse_unitary<T: Real>(pulse: &PhysicalPulse, delta: T) -> Unitary<T> {
    noisy_rotation(pulse, pulse.angle(), delta)
}

/// As [`noisy_pulse_unitary`] but with an explicit rotation angle, used for
/// over-rotated gates. The detuning term still scales with the nominal
/// duration.
pub fn noisy_rotation<T: Real>(pulse: &PhysicalPulse, angle: T, delta: T) -> Unitary<T> {
    if delta.abs() > T::of(0.5) && !LARGE_DETUNING_WARNED.swap(true, Ordering::Relaxed) {
        log::warn!("detuning |δ| = {delta} is outside the perturbative regime");
    }
    let two = T::one() + T::one();
    match pulse.axis {
        PulseAxis::FrameZ => Unitary::rotation(Axis::Z, angle),
        PulseAxis::Idle => Unitary::exp_pauli([T::zero(), T::zero(), detuning_half_angle::<T>(pulse.duration) * delta]),
        PulseAxis::X | PulseAxis::Y => {
            let mut h = [T::zero(); 3];
            h[pulse.rotation_axis().unwrap().index()] = angle / two;
            h[2] = h[2] + detuning_half_angle::<T>(pulse.duration) * delta;
            Unitary::exp_pauli(h)
        }
    }
}

/// First-order error vector of one pulse under a concurrent error
/// `amp·δ·(u·σ)` (with `u` the unit error axis), expressed in the frame at
/// the start of the pulse.
///
/// With the pulse rotating by θ about `a`, the toggling-frame integral is
/// `u∥ + (sin θ/θ) u⊥ − ((1 − cos θ)/θ) a × u`, scaled by the detuning
/// half-angle. Frame updates carry no error.
pub fn pulse_error_vector<T: Real>(pulse: &PhysicalPulse, error_axis: [T; 3]) -> [T; 3] {
    let amp = detuning_half_angle::<T>(pulse.duration);
    let u = error_axis;
    match pulse.axis {
        PulseAxis::FrameZ => [T::zero(); 3],
        PulseAxis::Idle => [amp * u[0], amp * u[1], amp * u[2]],
        PulseAxis::X | PulseAxis::Y => {
            let a: [T; 3] = pulse.rotation_axis().unwrap().unit();
            let theta = pulse.angle::<T>();
            let (s, c) = theta.sin_cos();
            let sinc = s / theta;
            let cosc = (T::one() - c) / theta;
            let dot = a[0] * u[0] + a[1] * u[1] + a[2] * u[2];
            let cross = [
                a[1] * u[2] - a[2] * u[1],
                a[2] * u[0] - a[0] * u[2],
                a[0] * u[1] - a[1] * u[0],
            ];
            let mut out = [T::zero(); 3];
            for k in 0..3 {
                let par = dot * a[k];
                let perp = u[k] - par;
                out[k] = amp * (par + sinc * perp - cosc * cross[k]);
            }
            out
        }
    }
}
